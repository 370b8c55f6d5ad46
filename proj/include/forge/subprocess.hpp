// Copyright 2026 The Forge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Whitespace-separated argv; the first word is resolved through PATH.
struct CommandSpec {
  std::vector<std::string> argv;

  static CommandSpec parse(std::string_view text);
  std::string str() const;
  bool empty() const { return argv.empty(); }
};

struct ProcessResult {
  int exit_code = -1;  // -1 when killed or timed out
  bool timed_out = false;
  std::string out;
  std::string err;
};

// Runs to completion feeding `input` on stdin. The child is killed when the
// timeout expires. Throws AdapterError if the process cannot be spawned.
ProcessResult run_process(const CommandSpec& cmd, std::string_view input,
                          std::chrono::milliseconds timeout);

// A long-lived child spoken to one line at a time (stderr is inherited).
class LineProcess {
 public:
  explicit LineProcess(const CommandSpec& cmd);
  ~LineProcess();
  LineProcess(const LineProcess&) = delete;
  LineProcess& operator=(const LineProcess&) = delete;

  // Throws ProtocolError if the child has gone away.
  void write_line(std::string_view line);
  // nullopt on EOF; throws AdapterError on timeout.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);
  void close_stdin();
  // Waits for exit (killing after `grace`) and returns the exit code.
  int finish(std::chrono::milliseconds grace = std::chrono::milliseconds(2000));

 private:
  int pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string buffer_;
  bool reaped_ = false;
  int status_ = -1;
};

}  // namespace forge
