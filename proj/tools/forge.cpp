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

#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "forge/call_graph.hpp"
#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/evaluator.hpp"
#include "forge/harness.hpp"
#include "forge/ilp.hpp"
#include "forge/stage1.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kInfeasible = 2, kInputError = 3, kAdapterError = 4 };

std::vector<int> parse_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream in(s);
  std::string tok;
  while (std::getline(in, tok, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw forge::InputError("bad agent count '" + tok + "' in --n");
    out.push_back(v);
  }
  return out;
}

int analyze(const std::string& path, const std::string& evaluator_spec, const std::string& cost_params,
            bool as_json) {
  using namespace forge;
  const Design d = load_design_file(path);
  CostParams params;
  if (!cost_params.empty()) params = cost_params_from_json(parse_json_text(read_file(cost_params)));
  const auto ev = make_evaluator(evaluator_spec, params);
  const CallGraph g = extract_call_graph(d);
  const LatencyModel m = build_latency_model(g, d);
  const Metrics base = ev->evaluate(d);
  const auto leaves = ilp_leaves(d);

  json edges = json::array();
  for (const auto& e : g.edges)
    edges.push_back({{"caller", e.caller}, {"callee", e.callee}, {"kind", to_string(e.kind)},
                     {"loop_multiplier", e.loop_multiplier}});
  json per_fn = json::object();
  for (const auto& f : leaves) per_fn[f] = to_json(ev->evaluate_function(d, f));
  if (as_json) {
    json out{{"design", d.name},     {"top", d.top},           {"nodes", g.nodes},
             {"edges", edges},       {"ilp_leaves", leaves},   {"latency_model", to_json(m.root)},
             {"baseline", to_json(base)}, {"leaf_metrics", per_fn}};
    std::cout << out.dump(2) << "\n";
    return kOk;
  }
  std::cout << "design " << d.name << " (top " << d.top << ", " << d.functions.size() << " functions)\n";
  std::cout << "call graph:\n";
  if (g.edges.empty()) std::cout << "  (no calls)\n";
  for (const auto& e : g.edges)
    std::cout << "  " << e.caller << " -> " << e.callee << "  " << to_string(e.kind) << " x" << e.loop_multiplier
              << "\n";
  std::cout << "latency model: " << to_string(m.root) << "\n";
  std::cout << "baseline: latency " << base.latency << " area " << base.area << "\n";
  for (const auto& f : leaves)
    std::cout << "  " << f << ": latency " << per_fn[f]["latency"] << " area " << per_fn[f]["area"] << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("forge"));
  spdlog::set_level(spdlog::level::warn);

  CLI::App app{"forge: two-stage design-space exploration over the kernel IR"};
  app.require_subcommand(1);
  int verbosity = 0;
  app.add_flag("-v,--verbose", verbosity, "More logging (-vv for debug)");

  std::string design_path, evaluator = "builtin", cost_params;
  bool as_json = false;
  auto* analyze_cmd = app.add_subcommand("analyze", "Call graph, latency model and baseline metrics");
  analyze_cmd->add_option("design", design_path, "Design file")->required();
  analyze_cmd->add_option("--evaluator", evaluator, "builtin or cmd:<path>");
  analyze_cmd->add_option("--cost-params", cost_params, "Cost parameter file");
  analyze_cmd->add_flag("--json", as_json, "Print JSON");

  std::string config_path, output;
  std::optional<int> agents;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> budget;
  std::optional<std::string> run_evaluator;
  auto* run_cmd = app.add_subcommand("run", "Run the full pipeline");
  run_cmd->add_option("--config", config_path, "Run configuration")->required();
  run_cmd->add_option("--agents", agents, "Number of exploration agents");
  run_cmd->add_option("--seed", seed, "Base seed");
  run_cmd->add_option("--budget", budget, "Area budget");
  run_cmd->add_option("--evaluator", run_evaluator, "builtin or cmd:<path>");
  run_cmd->add_option("--output", output, "Output directory");

  std::string n_list = "1,2,4,8,10";
  int repeats = 5;
  auto* scale_cmd = app.add_subcommand("scale", "Agent-scaling experiment");
  scale_cmd->add_option("--config", config_path, "Run configuration")->required();
  scale_cmd->add_option("--n", n_list, "Comma-separated agent counts");
  scale_cmd->add_option("--repeats", repeats, "Repeats per agent count");
  scale_cmd->add_option("--seed", seed, "Base seed");
  scale_cmd->add_option("--budget", budget, "Area budget");
  scale_cmd->add_option("--evaluator", run_evaluator, "builtin or cmd:<path>");
  scale_cmd->add_option("--output", output, "Output directory");

  std::string report_dir;
  auto* report_cmd = app.add_subcommand("report", "Write pareto.csv, speedup_table.csv and pareto.svg");
  report_cmd->add_option("run_dir", report_dir, "Run or scaling directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }
  if (verbosity == 1) spdlog::set_level(spdlog::level::info);
  if (verbosity > 1) spdlog::set_level(spdlog::level::debug);

  try {
    if (*analyze_cmd) return analyze(design_path, evaluator, cost_params, as_json);

    auto load = [&] {
      forge::RunConfig cfg = forge::load_run_config(config_path);
      if (agents) cfg.agents_n = *agents;
      if (seed) cfg.seed = *seed;
      if (budget) cfg.area_budget = *budget;
      if (run_evaluator) cfg.evaluator = *run_evaluator;
      if (!output.empty()) cfg.output_dir = output;
      return cfg;
    };
    if (*run_cmd) {
      const forge::RunRecord r = forge::run_pipeline(load());
      std::cout << "baseline latency " << r.baseline_metrics.latency << ", final latency " << r.final.latency
                << " (area " << r.final.area << ", agent " << r.final.agent_index << ", step " << r.final.step
                << ", ILP rank " << r.final.seeded_from << ")\n";
      return kOk;
    }
    if (*scale_cmd) {
      const forge::RunConfig cfg = load();
      const auto t = forge::scaling_experiment(cfg, parse_list(n_list), repeats, cfg.output_dir);
      std::cout << "N  mean_speedup  min  max  gain%\n";
      for (const auto& row : t.rows)
        std::cout << row.n << "  " << row.mean_speedup << "  " << row.min_speedup << "  " << row.max_speedup << "  "
                  << row.gain_pct << "\n";
      return kOk;
    }
    if (*report_cmd) {
      forge::emit_report(report_dir);
      return kOk;
    }
  } catch (const forge::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const forge::AdapterError& e) {
    std::cerr << "adapter error: " << e.what() << "\n";
    return kAdapterError;
  } catch (const forge::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const forge::ValidationError& e) {
    std::cerr << "invalid design: " << e.what() << "\n";
    return kInputError;
  } catch (const forge::InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
