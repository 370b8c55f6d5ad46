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

#include "forge/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <mutex>
#include <sstream>

#include "forge/errors.hpp"

namespace forge {

namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { ::signal(SIGPIPE, SIG_IGN); });
}

struct Pipe {
  int fd[2] = {-1, -1};
  Pipe() {
    if (::pipe2(fd, O_CLOEXEC) != 0) throw AdapterError(std::string("pipe: ") + std::strerror(errno));
  }
};

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

// Forks and execs; returns pid. The child's stdin/stdout (and optionally
// stderr) are attached to the given pipe ends.
int spawn(const CommandSpec& cmd, int child_in, int child_out, int child_err) {
  if (cmd.empty()) throw AdapterError("empty adapter command");
  ignore_sigpipe();
  std::vector<char*> argv;
  for (const auto& a : cmd.argv) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw AdapterError(std::string("fork: ") + std::strerror(errno));
  if (pid == 0) {
    ::dup2(child_in, 0);
    ::dup2(child_out, 1);
    if (child_err >= 0) ::dup2(child_err, 2);
    ::execvp(argv[0], argv.data());
    ::_exit(127);
  }
  return pid;
}

int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  return -1;
}

}  // namespace

CommandSpec CommandSpec::parse(std::string_view text) {
  CommandSpec c;
  std::istringstream in{std::string(text)};
  std::string word;
  while (in >> word) c.argv.push_back(word);
  return c;
}

std::string CommandSpec::str() const {
  std::string s;
  for (const auto& a : argv) {
    if (!s.empty()) s += ' ';
    s += a;
  }
  return s;
}

ProcessResult run_process(const CommandSpec& cmd, std::string_view input,
                          std::chrono::milliseconds timeout) {
  Pipe in, out, err;
  const int pid = spawn(cmd, in.fd[0], out.fd[1], err.fd[1]);
  close_fd(in.fd[0]);
  close_fd(out.fd[1]);
  close_fd(err.fd[1]);
  ::fcntl(in.fd[1], F_SETFL, O_NONBLOCK);

  ProcessResult result;
  std::size_t written = 0;
  if (input.empty()) close_fd(in.fd[1]);
  const auto deadline = Clock::now() + timeout;
  char buf[65536];
  while (out.fd[0] >= 0 || err.fd[0] >= 0) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) {
      result.timed_out = true;
      break;
    }
    std::vector<pollfd> fds;
    if (in.fd[1] >= 0) fds.push_back({in.fd[1], POLLOUT, 0});
    if (out.fd[0] >= 0) fds.push_back({out.fd[0], POLLIN, 0});
    if (err.fd[0] >= 0) fds.push_back({err.fd[0], POLLIN, 0});
    const int n = ::poll(fds.data(), fds.size(), static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (n < 0 && errno != EINTR) break;
    for (const pollfd& p : fds) {
      if (!p.revents) continue;
      if (p.fd == in.fd[1]) {
        const ssize_t w = ::write(p.fd, input.data() + written, input.size() - written);
        if (w > 0) written += static_cast<std::size_t>(w);
        if (w < 0 && errno != EAGAIN) close_fd(in.fd[1]);
        if (written == input.size()) close_fd(in.fd[1]);
      } else {
        const ssize_t r = ::read(p.fd, buf, sizeof buf);
        if (r > 0) {
          (p.fd == out.fd[0] ? result.out : result.err).append(buf, static_cast<std::size_t>(r));
        } else if (r == 0 || errno != EAGAIN) {
          close_fd(p.fd == out.fd[0] ? out.fd[0] : err.fd[0]);
        }
      }
    }
  }
  close_fd(in.fd[1]);
  close_fd(out.fd[0]);
  close_fd(err.fd[0]);
  if (result.timed_out) ::kill(pid, SIGKILL);
  int status = 0;
  ::waitpid(pid, &status, 0);
  result.exit_code = result.timed_out ? -1 : decode_status(status);
  return result;
}

LineProcess::LineProcess(const CommandSpec& cmd) {
  Pipe in, out;
  pid_ = spawn(cmd, in.fd[0], out.fd[1], -1);
  ::close(in.fd[0]);
  ::close(out.fd[1]);
  in_fd_ = in.fd[1];
  out_fd_ = out.fd[0];
}

LineProcess::~LineProcess() {
  close_fd(in_fd_);
  close_fd(out_fd_);
  if (!reaped_ && pid_ > 0) {
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, nullptr, 0);
  }
}

void LineProcess::write_line(std::string_view line) {
  if (in_fd_ < 0) throw ProtocolError("agent stdin already closed");
  std::string data(line);
  data += '\n';
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t w = ::write(in_fd_, data.data() + off, data.size() - off);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("agent stdin write failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(w);
  }
}

std::optional<std::string> LineProcess::read_line(std::chrono::milliseconds timeout) {
  const auto deadline = Clock::now() + timeout;
  char buf[65536];
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    if (out_fd_ < 0) {
      if (buffer_.empty()) return std::nullopt;
      return std::exchange(buffer_, {});
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now());
    if (left.count() <= 0) throw AdapterError("agent reply timed out");
    pollfd p{out_fd_, POLLIN, 0};
    const int n = ::poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (n <= 0) continue;
    const ssize_t r = ::read(out_fd_, buf, sizeof buf);
    if (r > 0) {
      buffer_.append(buf, static_cast<std::size_t>(r));
    } else if (r == 0 || errno != EINTR) {
      close_fd(out_fd_);
    }
  }
}

void LineProcess::close_stdin() { close_fd(in_fd_); }

int LineProcess::finish(std::chrono::milliseconds grace) {
  if (reaped_) return status_;
  close_fd(in_fd_);
  const auto deadline = Clock::now() + grace;
  int status = 0;
  for (;;) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) break;
    if (Clock::now() >= deadline) {
      ::kill(pid_, SIGKILL);
      ::waitpid(pid_, &status, 0);
      break;
    }
    ::usleep(2000);
  }
  reaped_ = true;
  status_ = decode_status(status);
  close_fd(out_fd_);
  return status_;
}

}  // namespace forge
