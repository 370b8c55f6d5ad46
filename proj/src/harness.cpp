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

#include "forge/harness.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <map>
#include <numeric>

#include <spdlog/spdlog.h>

#include "forge/design_io.hpp"
#include "forge/errors.hpp"
#include "forge/evaluator.hpp"

namespace forge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
  if (!out) throw Error("write failed: " + p.string());
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

class RunLock {
 public:
  explicit RunLock(fs::path p) : path_(std::move(p)) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0)
      throw InputError("run directory is locked by another pipeline (" + path_.string() +
                       "); remove the file if no run is active");
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
  }
  ~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  RunLock(const RunLock&) = delete;
  RunLock& operator=(const RunLock&) = delete;

 private:
  fs::path path_;
};

std::int64_t require_int(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("config.") + key, "missing");
  if (!it->is_number_integer()) throw ParseError(std::string("config.") + key, "expected an integer");
  return it->get<std::int64_t>();
}

double speedup_of(std::int64_t baseline, std::int64_t latency) {
  return static_cast<double>(baseline) / static_cast<double>(std::max<std::int64_t>(latency, 1));
}

}  // namespace

RunConfig run_config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ParseError("config", "expected an object");
  RunConfig c;
  auto path_field = [&](const char* key) -> std::optional<fs::path> {
    auto it = j.find(key);
    if (it == j.end()) return std::nullopt;
    if (!it->is_string()) throw ParseError(std::string("config.") + key, "expected a path string");
    fs::path p = it->get<std::string>();
    return (p.is_absolute() ? p : base_dir / p).lexically_normal();
  };
  auto dp = path_field("design_path");
  if (!dp) throw ParseError("config.design_path", "missing");
  c.design_path = *dp;
  c.area_budget = require_int(j, "area_budget");
  if (c.area_budget < 0) throw ParseError("config.area_budget", "must be non-negative");
  if (j.contains("agents_n")) {
    const auto n = require_int(j, "agents_n");
    if (n < 1) throw ParseError("config.agents_n", "must be >= 1");
    c.agents_n = static_cast<int>(n);
  }
  if (j.contains("seed")) c.seed = static_cast<std::uint64_t>(require_int(j, "seed"));
  if (j.contains("evaluator")) {
    if (!j.at("evaluator").is_string()) throw ParseError("config.evaluator", "expected a string");
    c.evaluator = j.at("evaluator").get<std::string>();
    if (c.evaluator != "builtin" && !c.evaluator.starts_with("cmd:"))
      throw ParseError("config.evaluator", "expected 'builtin' or 'cmd:<path>'");
  }
  if (j.contains("optimizer_policy")) c.optimizer_policy = optimizer_policy_from_json(j.at("optimizer_policy"));
  if (j.contains("explorer")) c.explorer = explorer_config_from_json(j.at("explorer"));
  c.output_dir = path_field("output_dir").value_or((base_dir / "forge-run").lexically_normal());
  if (auto it = j.find("cost_params"); it != j.end()) {
    if (it->is_string()) {
      fs::path p = it->get<std::string>();
      if (!p.is_absolute()) p = base_dir / p;
      c.cost_params = cost_params_from_json(parse_json_text(read_file(p)));
    } else {
      c.cost_params = cost_params_from_json(*it);
    }
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  return run_config_from_json(parse_json_text(read_file(path)), path.parent_path());
}

json to_json(const RunConfig& c) {
  return {{"design_path", c.design_path.string()},
          {"area_budget", c.area_budget},
          {"agents_n", c.agents_n},
          {"seed", c.seed},
          {"evaluator", c.evaluator},
          {"optimizer_policy", to_json(c.optimizer_policy)},
          {"explorer", to_json(c.explorer)},
          {"output_dir", c.output_dir.string()},
          {"cost_params", to_json(c.cost_params)}};
}

json to_json(const RunRecord& r, bool include_wall_time) {
  json sets = json::array();
  for (const auto& s : r.variant_sets) sets.push_back(to_json(s));
  json records = json::array();
  for (const auto& x : r.records) records.push_back(to_json(x));
  json j{{"config", r.config},
         {"baseline_metrics", to_json(r.baseline_metrics)},
         {"variant_sets", sets},
         {"latency_model", to_json(r.model.root)},
         {"ilp_budget", r.ilp_budget},
         {"ilp", to_json(r.ilp)},
         {"records", records},
         {"final", to_json(r.final)}};
  if (include_wall_time) j["wall_time"] = r.wall_time;
  return j;
}

RunRecord run_record_from_json(const json& j) {
  RunRecord r;
  r.config = j.at("config");
  r.baseline_metrics = metrics_from_json(j.at("baseline_metrics"));
  for (const auto& s : j.at("variant_sets")) r.variant_sets.push_back(variant_set_from_json(s));
  r.model.root = model_node_from_json(j.at("latency_model"));
  r.ilp_budget = j.at("ilp_budget").get<std::int64_t>();
  const json& ilp = j.at("ilp");
  for (const auto& s : ilp.at("solutions")) r.ilp.solutions.push_back(ilp_solution_from_json(s));
  r.ilp.infeasible = ilp.at("infeasible").get<bool>();
  r.ilp.min_area = ilp.at("min_area").get<std::int64_t>();
  r.ilp.report = ilp.value("report", std::string());
  for (const auto& x : j.at("records")) r.records.push_back(exploration_record_from_json(x));
  r.final = exploration_record_from_json(j.at("final"));
  r.wall_time = j.value("wall_time", 0.0);
  return r;
}

RunRecord load_run_record(const fs::path& run_dir) {
  const fs::path p = run_dir / "run.json";
  if (!fs::exists(p)) throw InputError("no run.json in " + run_dir.string());
  try {
    return run_record_from_json(parse_json_text(read_file(p)));
  } catch (const json::exception& e) {
    throw ParseError(p.string(), e.what());
  }
}

RunRecord run_pipeline(const RunConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.agents_n < 1) throw InputError("agents_n must be >= 1");
  if (cfg.area_budget < 0) throw InputError("area budget must be non-negative");
  if (cfg.area_budget == 0) throw InfeasibleError("area budget is 0; no design fits");
  const Design d = load_design_file(cfg.design_path);

  const fs::path out = cfg.output_dir;
  fs::create_directories(out);
  RunLock lock(out / "forge.lock");
  for (const char* sub : {"variants", "stage2"}) {
    fs::remove_all(out / sub);
    fs::create_directories(out / sub);
  }
  fs::remove(out / "run.json");
  fs::remove(out / "final_design.json");

  const auto timeout = adapter_timeout_from_env();
  const auto evaluator = make_evaluator(cfg.evaluator, cfg.cost_params, timeout);

  RunRecord rec;
  rec.config = to_json(cfg);
  rec.baseline_metrics = evaluator->evaluate(d);
  spdlog::info("{}: baseline latency {} area {}", d.name, rec.baseline_metrics.latency, rec.baseline_metrics.area);

  OptimizerPolicy policy = cfg.optimizer_policy;
  policy.seed = cfg.seed;
  policy.timeout = timeout;
  rec.variant_sets = run_stage1(d, ilp_leaves(d), policy, *evaluator);
  for (const auto& vs : rec.variant_sets) write_json(out / "variants" / (vs.function + ".json"), to_json(vs));

  rec.model = build_latency_model(extract_call_graph(d), d);
  std::int64_t leaf_area = 0;
  for (const auto& vs : rec.variant_sets) leaf_area += vs.baseline_metrics.area;
  rec.ilp_budget = cfg.area_budget - (rec.baseline_metrics.area - leaf_area);
  rec.ilp = solve_top_n({rec.variant_sets, rec.model, rec.ilp_budget}, cfg.agents_n);
  write_json(out / "ilp_solutions.json", to_json(rec.ilp));
  if (rec.ilp.infeasible) throw InfeasibleError(rec.ilp.report + " (ILP budget after fixed area)");
  spdlog::info("{}: {} ILP solution(s), rank 1 predicted latency {}", d.name, rec.ilp.solutions.size(),
               rec.ilp.solutions.front().predicted_latency);

  ExplorerConfig explorer = cfg.explorer;
  explorer.seed = cfg.seed;
  explorer.timeout = timeout;
  const auto per_agent =
      run_stage2(d, rec.variant_sets, rec.ilp.solutions, cfg.area_budget, explorer, *evaluator, cfg.agents_n);
  for (std::size_t i = 0; i < per_agent.size(); ++i) {
    std::string lines;
    for (const auto& r : per_agent[i]) lines += to_json(r).dump() + "\n";
    write_text(out / "stage2" / ("agent_" + std::to_string(i + 1) + ".jsonl"), lines);
    rec.records.insert(rec.records.end(), per_agent[i].begin(), per_agent[i].end());
  }
  std::stable_sort(rec.records.begin(), rec.records.end(), [](const auto& a, const auto& b) {
    return std::pair(a.agent_index, a.step) < std::pair(b.agent_index, b.step);
  });
  rec.final = select_final(rec.records, cfg.area_budget);
  const Design final_design =
      reconstruct(d, rec.variant_sets, rec.ilp.solutions.at(rec.final.seeded_from - 1), rec.final);
  write_text(out / "final_design.json", serialize(final_design) + "\n");

  rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_json(out / "run.json", to_json(rec));
  spdlog::info("{}: final latency {} area {} (agent {}, step {}, ILP rank {})", d.name, rec.final.latency,
               rec.final.area, rec.final.agent_index, rec.final.step, rec.final.seeded_from);
  return rec;
}

json to_json(const ScalingTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows)
    rows.push_back({{"n", r.n},
                    {"mean_speedup", r.mean_speedup},
                    {"min_speedup", r.min_speedup},
                    {"max_speedup", r.max_speedup},
                    {"mean_latency", r.mean_latency},
                    {"gain_pct", r.gain_pct},
                    {"best_latency", r.best_latency}});
  return {{"baseline_latency", t.baseline_latency}, {"rows", rows}};
}

ScalingTable scaling_table_from_json(const json& j) {
  ScalingTable t;
  t.baseline_latency = j.at("baseline_latency").get<std::int64_t>();
  for (const auto& r : j.at("rows")) {
    ScalingRow row;
    row.n = r.at("n").get<int>();
    row.mean_speedup = r.at("mean_speedup").get<double>();
    row.min_speedup = r.at("min_speedup").get<double>();
    row.max_speedup = r.at("max_speedup").get<double>();
    row.mean_latency = r.at("mean_latency").get<double>();
    row.gain_pct = r.at("gain_pct").get<double>();
    row.best_latency = r.at("best_latency").get<std::vector<std::int64_t>>();
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_speedup_table(const ScalingTable& t, const fs::path& csv) {
  std::string s = "n,mean_speedup,min_speedup,max_speedup,mean_best_latency,gain_pct\n";
  for (const auto& r : t.rows)
    s += std::to_string(r.n) + "," + fmt_double(r.mean_speedup) + "," + fmt_double(r.min_speedup) + "," +
         fmt_double(r.max_speedup) + "," + fmt_double(r.mean_latency) + "," + fmt_double(r.gain_pct) + "\n";
  write_text(csv, s);
}

namespace {

std::string run_dir_name(int n, int repeat) { return "N" + std::to_string(n) + "_r" + std::to_string(repeat); }

ScalingTable build_table(std::int64_t baseline, const std::vector<int>& n_values,
                         const std::vector<std::vector<std::int64_t>>& latency /* [n][repeat] */) {
  ScalingTable t;
  t.baseline_latency = baseline;
  for (std::size_t i = 0; i < n_values.size(); ++i) {
    ScalingRow row;
    row.n = n_values[i];
    row.best_latency = latency[i];
    std::vector<double> sp;
    for (auto l : latency[i]) sp.push_back(speedup_of(baseline, l));
    row.mean_speedup = std::accumulate(sp.begin(), sp.end(), 0.0) / static_cast<double>(sp.size());
    row.min_speedup = *std::min_element(sp.begin(), sp.end());
    row.max_speedup = *std::max_element(sp.begin(), sp.end());
    row.mean_latency = static_cast<double>(std::accumulate(latency[i].begin(), latency[i].end(), std::int64_t{0})) /
                       static_cast<double>(latency[i].size());
    if (!t.rows.empty()) row.gain_pct = 100.0 * (row.mean_speedup / t.rows.back().mean_speedup - 1.0);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

ScalingTable scaling_experiment(const RunConfig& cfg, const std::vector<int>& n_values, int repeats,
                                const fs::path& out_dir) {
  if (n_values.empty()) throw InputError("scaling experiment needs at least one N");
  if (repeats < 1) throw InputError("repeats must be >= 1");
  for (int n : n_values)
    if (n < 1) throw InputError("agent counts must be >= 1");
  fs::create_directories(out_dir);
  // one job per repeat; the N sweep inside a repeat is sequential
  std::vector<std::future<std::vector<RunRecord>>> jobs;
  for (int r = 0; r < repeats; ++r)
    jobs.push_back(std::async(std::launch::async, [&, r] {
      std::vector<RunRecord> out;
      for (int n : n_values) {
        RunConfig c = cfg;
        c.agents_n = n;
        c.seed = cfg.seed + 1000 * static_cast<std::uint64_t>(r);
        c.output_dir = out_dir / run_dir_name(n, r);
        out.push_back(run_pipeline(c));
      }
      return out;
    }));
  std::vector<std::vector<std::int64_t>> latency(n_values.size());
  std::int64_t baseline = 0;
  json runs = json::array();
  for (int r = 0; r < repeats; ++r) {
    const auto recs = jobs[r].get();
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      latency[i].push_back(recs[i].final.latency);
      baseline = recs[i].baseline_metrics.latency;
      runs.push_back({{"n", n_values[i]}, {"repeat", r}, {"dir", run_dir_name(n_values[i], r)}});
    }
  }
  ScalingTable t = build_table(baseline, n_values, latency);
  write_json(out_dir / "scaling.json", {{"table", to_json(t)}, {"runs", runs}});
  write_speedup_table(t, out_dir / "speedup_table.csv");
  return t;
}

std::vector<ParetoPoint> pareto_front(std::vector<ParetoPoint> points) {
  std::sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.area, b.speedup, a.provenance) < std::tie(b.area, a.speedup, b.provenance);
  });
  std::vector<ParetoPoint> out;
  bool have_prev = false;
  double best_prev = 0;  // best speedup among strictly smaller areas
  for (std::size_t i = 0; i < points.size();) {
    std::size_t j = i;
    while (j < points.size() && points[j].area == points[i].area) ++j;
    const double group_max = points[i].speedup;
    if (!have_prev || group_max > best_prev) {
      for (std::size_t k = i; k < j && points[k].speedup == group_max; ++k) out.push_back(points[k]);
      best_prev = group_max;
      have_prev = true;
    }
    i = j;
  }
  std::sort(out.begin(), out.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    return std::tie(a.area, a.speedup, a.provenance) < std::tie(b.area, b.speedup, b.provenance);
  });
  return out;
}

std::string provenance(const ExplorationRecord& r) {
  return "agent" + std::to_string(r.agent_index) + "/step" + std::to_string(r.step) + "/rank" +
         std::to_string(r.seeded_from) + "/" + r.design_ref;
}

std::vector<ParetoPoint> to_pareto_points(const std::vector<ExplorationRecord>& records,
                                          std::int64_t baseline_latency) {
  std::vector<ParetoPoint> out;
  for (const auto& r : records) out.push_back({speedup_of(baseline_latency, r.latency), r.area, provenance(r)});
  return out;
}

double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw InputError("pearson_correlation: length mismatch");
  if (xs.size() < 2) throw InputError("pearson_correlation: needs at least two points");
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0 || syy == 0) throw InputError("pearson_correlation: undefined for zero variance");
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

namespace {

struct Series {
  int n;
  std::vector<ParetoPoint> front;
};

std::string render_svg(const std::vector<Series>& series) {
  constexpr double W = 640, H = 440, L = 70, R = 120, T = 30, B = 60;
  static constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                            "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (const auto& p : s.front) {
      x0 = std::min(x0, double(p.area)), x1 = std::max(x1, double(p.area));
      y0 = std::min(y0, p.speedup), y1 = std::max(y1, p.speedup);
    }
  if (x0 > x1) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 - x0 < 1e-9) x0 -= 1, x1 += 1;
  if (y1 - y0 < 1e-9) y0 -= 0.5, y1 += 0.5;
  const double px = (x1 - x0) * 0.05, py = (y1 - y0) * 0.05;
  x0 -= px, x1 += px, y0 -= py, y1 += py;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt_double(W) + "\" height=\"" +
                  fmt_double(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<line x1=\"" + fmt_double(L) + "\" y1=\"" + fmt_double(H - B) + "\" x2=\"" + fmt_double(W - R) +
       "\" y2=\"" + fmt_double(H - B) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + fmt_double(L) + "\" y1=\"" + fmt_double(T) + "\" x2=\"" + fmt_double(L) + "\" y2=\"" +
       fmt_double(H - B) + "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double xv = x0 + (x1 - x0) * i / 4, yv = y0 + (y1 - y0) * i / 4;
    s += "<text x=\"" + fmt_double(sx(xv)) + "\" y=\"" + fmt_double(H - B + 16) + "\" text-anchor=\"middle\">" +
         fmt_double(std::round(xv)) + "</text>\n";
    s += "<text x=\"" + fmt_double(L - 6) + "\" y=\"" + fmt_double(sy(yv) + 4) + "\" text-anchor=\"end\">" +
         fmt_double(std::round(yv * 100) / 100) + "</text>\n";
  }
  s += "<text x=\"" + fmt_double((L + W - R) / 2) + "\" y=\"" + fmt_double(H - 15) +
       "\" text-anchor=\"middle\">area</text>\n";
  s += "<text transform=\"translate(18," + fmt_double((T + H - B) / 2) +
       ") rotate(-90)\" text-anchor=\"middle\">speedup over baseline</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % std::size(kColors)];
    std::string pts;
    for (const auto& p : series[k].front) pts += fmt_double(sx(double(p.area))) + "," + fmt_double(sy(p.speedup)) + " ";
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" points=\"" + pts + "\"/>\n";
    for (const auto& p : series[k].front)
      s += "<circle cx=\"" + fmt_double(sx(double(p.area))) + "\" cy=\"" + fmt_double(sy(p.speedup)) +
           "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const double ly = T + 16.0 * static_cast<double>(k);
    s += "<rect x=\"" + fmt_double(W - R + 15) + "\" y=\"" + fmt_double(ly) + "\" width=\"10\" height=\"10\" fill=\"" +
         color + "\"/>\n";
    s += "<text x=\"" + fmt_double(W - R + 30) + "\" y=\"" + fmt_double(ly + 9) + "\">N=" +
         std::to_string(series[k].n) + "</text>\n";
  }
  return s + "</svg>\n";
}

void write_report(const fs::path& dir, const std::vector<Series>& series) {
  std::string csv = "n,speedup,area,provenance\n";
  for (const auto& s : series)
    for (const auto& p : s.front)
      csv += std::to_string(s.n) + "," + fmt_double(p.speedup) + "," + std::to_string(p.area) + "," +
             csv_field(p.provenance) + "\n";
  write_text(dir / "pareto.csv", csv);
  write_text(dir / "pareto.svg", render_svg(series));
}

}  // namespace

void emit_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("no such run directory: " + dir.string());
  if (fs::exists(dir / "scaling.json")) {
    const json j = parse_json_text(read_file(dir / "scaling.json"));
    const ScalingTable t = scaling_table_from_json(j.at("table"));
    std::map<int, std::vector<ExplorationRecord>> by_n;
    std::map<int, std::int64_t> baseline;
    for (const auto& run : j.at("runs")) {
      const RunRecord r = load_run_record(dir / run.at("dir").get<std::string>());
      auto& v = by_n[run.at("n").get<int>()];
      v.insert(v.end(), r.records.begin(), r.records.end());
      baseline[run.at("n").get<int>()] = r.baseline_metrics.latency;
    }
    std::vector<Series> series;
    for (const auto& row : t.rows)
      series.push_back({row.n, pareto_front(to_pareto_points(by_n[row.n], baseline[row.n]))});
    write_report(dir, series);
    write_speedup_table(t, dir / "speedup_table.csv");
    return;
  }
  if (!fs::exists(dir / "run.json")) throw InputError(dir.string() + " holds neither run.json nor scaling.json");
  const RunRecord r = load_run_record(dir);
  const int n = r.config.value("agents_n", 1);
  write_report(dir, {{n, pareto_front(to_pareto_points(r.records, r.baseline_metrics.latency))}});
  write_speedup_table(build_table(r.baseline_metrics.latency, {n}, {{r.final.latency}}), dir / "speedup_table.csv");
}

}  // namespace forge
