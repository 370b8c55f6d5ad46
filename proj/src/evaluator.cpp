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

#include "forge/evaluator.hpp"

#include <cstdlib>
#include <set>

#include "forge/design_io.hpp"
#include "forge/errors.hpp"

namespace forge {

std::chrono::milliseconds adapter_timeout_from_env() {
  if (const char* v = std::getenv("FORGE_ADAPTER_TIMEOUT")) {
    char* end = nullptr;
    const double secs = std::strtod(v, &end);
    if (end != v && *end == '\0' && secs > 0)
      return std::chrono::milliseconds(static_cast<long long>(secs * 1000));
  }
  return kDefaultAdapterTimeout;
}

Metrics parse_metrics_reply(std::string_view text) {
  // First non-empty line only.
  std::size_t start = 0;
  while (start < text.size() && (text[start] == '\n' || text[start] == '\r')) ++start;
  const std::size_t end = text.find('\n', start);
  const std::string_view line = text.substr(start, end == std::string_view::npos ? text.size() - start : end - start);
  const json j = parse_json_text(line);
  if (!j.is_object()) throw ParseError("adapter reply", "expected an object");
  auto integer = [](const json& v, const char* what) -> std::int64_t {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw ParseError(std::string("adapter reply.") + what, "expected a non-negative integer");
    return v.get<std::int64_t>();
  };
  if (!j.contains("latency")) throw ParseError("adapter reply", "missing 'latency'");
  if (!j.contains("area")) throw ParseError("adapter reply", "missing 'area'");
  Metrics m;
  const json& lat = j.at("latency");
  if (lat.is_object()) {
    if (!lat.contains("min") || !lat.contains("max"))
      throw ParseError("adapter reply.latency", "range needs 'min' and 'max'");
    const std::int64_t lo = integer(lat.at("min"), "latency.min");
    const std::int64_t hi = integer(lat.at("max"), "latency.max");
    if (hi < lo) throw ParseError("adapter reply.latency", "max < min");
    m.latency = lo + (hi - lo + 1) / 2;
  } else {
    m.latency = integer(lat, "latency");
  }
  m.area = integer(j.at("area"), "area");
  return m;
}

Metrics evaluate_external(const Design& d, const CommandSpec& cmd, std::chrono::milliseconds timeout) {
  const ProcessResult r = run_process(cmd, serialize(d) + "\n", timeout);
  if (r.timed_out)
    throw AdapterError("adapter '" + cmd.str() + "' timed out after " + std::to_string(timeout.count()) + " ms");
  if (r.exit_code != 0)
    throw AdapterError("adapter '" + cmd.str() + "' exited with status " + std::to_string(r.exit_code) +
                       (r.err.empty() ? "" : ": " + r.err));
  try {
    return parse_metrics_reply(r.out);
  } catch (const ParseError& e) {
    throw ProtocolError("adapter '" + cmd.str() + "' sent a malformed reply: " + e.what());
  }
}

Design function_subdesign(const Design& d, const std::string& function) {
  Design sub;
  sub.name = d.name + "::" + function;
  sub.top = function;
  sub.arrays = d.arrays;
  const auto names = subtree_functions(d, function);
  const std::set<std::string> keep(names.begin(), names.end());
  for (const auto& f : d.functions)
    if (keep.count(f.name)) sub.functions.push_back(f);
  return sub;
}

ExternalEvaluator::ExternalEvaluator(CommandSpec cmd, std::chrono::milliseconds timeout, int max_concurrent)
    : cmd_(std::move(cmd)),
      timeout_(timeout),
      slots_(std::make_unique<std::counting_semaphore<256>>(std::clamp(max_concurrent, 1, 256))) {}

Metrics ExternalEvaluator::evaluate(const Design& d) const {
  slots_->acquire();
  struct Release {
    std::counting_semaphore<256>& s;
    ~Release() { s.release(); }
  } release{*slots_};
  return evaluate_external(d, cmd_, timeout_);
}

Metrics ExternalEvaluator::evaluate_function(const Design& d, const std::string& fn) const {
  return evaluate(function_subdesign(d, fn));
}

std::unique_ptr<Evaluator> make_evaluator(std::string_view spec, const CostParams& params,
                                          std::chrono::milliseconds timeout) {
  if (spec.empty() || spec == "builtin") return std::make_unique<BuiltinEvaluator>(params);
  if (spec.starts_with("cmd:")) {
    CommandSpec cmd = CommandSpec::parse(spec.substr(4));
    if (cmd.empty()) throw ParseError("evaluator", "cmd: needs a command");
    return std::make_unique<ExternalEvaluator>(std::move(cmd), timeout);
  }
  throw ParseError("evaluator", "expected 'builtin' or 'cmd:<path>', got '" + std::string(spec) + "'");
}

}  // namespace forge
