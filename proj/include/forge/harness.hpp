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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "forge/cost_model.hpp"
#include "forge/ilp.hpp"
#include "forge/stage1.hpp"
#include "forge/stage2.hpp"

namespace forge {

struct RunConfig {
  std::filesystem::path design_path;
  std::int64_t area_budget = 0;
  int agents_n = 1;
  std::uint64_t seed = 0;
  std::string evaluator = "builtin";  // builtin | cmd:<path>
  OptimizerPolicy optimizer_policy;
  ExplorerConfig explorer;
  std::filesystem::path output_dir;
  CostParams cost_params;
};

// Relative paths inside the file resolve against the file's directory.
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
nlohmann::json to_json(const RunConfig& c);

struct RunRecord {
  nlohmann::json config;
  Metrics baseline_metrics;
  std::vector<VariantSet> variant_sets;
  LatencyModel model;
  std::int64_t ilp_budget = 0;
  IlpResult ilp;
  std::vector<ExplorationRecord> records;  // ordered by (agent_index, step)
  ExplorationRecord final;
  double wall_time = 0;  // seconds
};

nlohmann::json to_json(const RunRecord& r, bool include_wall_time = true);
RunRecord run_record_from_json(const nlohmann::json& j);
RunRecord load_run_record(const std::filesystem::path& run_dir);

// Writes run.json, ilp_solutions.json, variants/<f>.json,
// stage2/agent_<i>.jsonl and final_design.json under cfg.output_dir.
// Throws InfeasibleError when no assignment fits the budget.
RunRecord run_pipeline(const RunConfig& cfg);

struct ScalingRow {
  int n = 0;
  double mean_speedup = 0, min_speedup = 0, max_speedup = 0;
  double mean_latency = 0;
  double gain_pct = 0;  // mean speedup vs the previous row
  std::vector<std::int64_t> best_latency;  // per repeat
};

struct ScalingTable {
  std::int64_t baseline_latency = 0;
  std::vector<ScalingRow> rows;
};

// Repeat r uses seed cfg.seed + 1000 r for every N (nested agent seeds);
// runs go to <out_dir>/N<n>_r<r>.
ScalingTable scaling_experiment(const RunConfig& cfg, const std::vector<int>& n_values, int repeats,
                                const std::filesystem::path& out_dir);
void write_speedup_table(const ScalingTable& t, const std::filesystem::path& csv);
nlohmann::json to_json(const ScalingTable& t);
ScalingTable scaling_table_from_json(const nlohmann::json& j);

struct ParetoPoint {
  double speedup = 0;
  std::int64_t area = 0;
  std::string provenance;
  friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

// Non-dominated set under (max speedup, min area); equal points are kept.
// Sorted by area, then speedup, then provenance.
std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points);
std::vector<ParetoPoint> to_pareto_points(const std::vector<ExplorationRecord>& records,
                                          std::int64_t baseline_latency);
std::string provenance(const ExplorationRecord& r);

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

// For a run directory (run.json) or a scaling directory (scaling.json):
// pareto.csv, speedup_table.csv and pareto.svg.
void emit_report(const std::filesystem::path& dir);

}  // namespace forge
