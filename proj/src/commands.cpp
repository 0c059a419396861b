#include "odcal/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>

#include <json.hpp>

#include "odcal/eval.hpp"
#include "odcal/io.hpp"
#include "odcal/rng.hpp"
#include "odcal/scenario.hpp"
#include "odcal/simulator.hpp"
#include "odcal/solver.hpp"
#include "odcal/svg.hpp"

namespace odcal {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kGtSimSalt = 0x517;
constexpr std::uint64_t kSampleSalt = 0x5a7;

void apply_seed(ScenarioSpec& spec, std::uint64_t seed) {
  spec.seed = seed;
  spec.topology.seed = seed;
  spec.simulator.seed = seed;
  spec.solver.seed = seed;
}

std::string scenario_fingerprint(const std::string& network_json,
                                 const std::string& measurements_json) {
  return content_fingerprint(network_json + measurements_json);
}

json demand_map(const std::vector<std::string>& od_ids, const DemandVector& d) {
  json j;
  for (std::size_t z = 0; z < od_ids.size(); ++z) j[od_ids[z]] = d(static_cast<Eigen::Index>(z));
  return j;
}

json metrics_json(const MetricsTriple& m) {
  json j;
  j["nrmse_demand"] = std::isnan(m.nrmse_demand) ? json() : json(m.nrmse_demand);
  j["nrmse_time"] = m.nrmse_time;
  j["nrmse_count"] = m.nrmse_count;
  return j;
}

MetricsTriple metrics_from_json(const json& j) {
  MetricsTriple m;
  m.nrmse_demand = j.at("nrmse_demand").is_number() ? j.at("nrmse_demand").get<double>()
                                                    : std::nan("");
  m.nrmse_time = j.at("nrmse_time").get<double>();
  m.nrmse_count = j.at("nrmse_count").get<double>();
  return m;
}

struct LoadedScenario {
  ScenarioSpec spec;
  Network net;
  FieldMeasurements meas;
  std::optional<DemandVector> gt_demand;
  std::string fingerprint;
};

LoadedScenario load_scenario_dir(const std::string& dir) {
  const fs::path base(dir);
  if (!fs::exists(base / "scenario.json")) {
    throw std::runtime_error("not a generated scenario directory (missing scenario.json): " + dir);
  }
  LoadedScenario s;
  s.spec = scenario_from_json(read_file((base / "scenario.json").string()));
  const std::string net_text = read_file((base / "network.json").string());
  const std::string meas_text = read_file((base / "measurements.json").string());
  s.net = network_from_json(net_text);
  s.meas = measurements_from_json(meas_text);
  s.fingerprint = scenario_fingerprint(net_text, meas_text);
  const fs::path gt_path = base / "gt_demand.json";
  if (fs::exists(gt_path)) {
    s.gt_demand = demand_from_json(read_file(gt_path.string()), s.net.od_pairs);
  }
  return s;
}

}  // namespace

void cmd_generate(const GenerateOptions& opts) {
  ScenarioSpec spec = scenario_from_json(read_file(opts.spec_path));
  if (opts.seed) apply_seed(spec, *opts.seed);

  Network net = generate_synthetic_network(spec.topology);
  const auto violations = validate_network(net);
  if (!violations.empty()) {
    throw std::runtime_error("generated network failed validation: " + violations.front().entity +
                             ": " + violations.front().rule);
  }
  const NetworkIndex idx = NetworkIndex::build(net);
  const DemandVector gt = make_ground_truth_demand(spec, idx.n_ods());

  SimulatorConfig sim_cfg = spec.simulator;
  sim_cfg.retain_trips = true;
  const SimulationResult rollout = simulate(idx, gt, sim_cfg, mix_seed(spec.seed, kGtSimSalt));
  const FieldMeasurements meas =
      sample_measurements(rollout, idx, spec.penetration, mix_seed(spec.seed, kSampleSalt));

  const fs::path out(opts.out_dir);
  fs::create_directories(out);
  write_file((out / "network.json").string(), network_to_json(net));
  write_file((out / "gt_demand.json").string(), demand_to_json(net.od_pairs, gt));
  write_file((out / "measurements.json").string(), measurements_to_json(meas));
  write_file((out / "scenario.json").string(), scenario_to_json(spec));

  std::cout << "generated scenario in " << out.string() << ": " << idx.n_segments()
            << " segments, " << idx.n_ods() << " OD pairs, total demand " << spec.total_demand
            << ", penetration " << spec.penetration << "\n";
  for (const std::string& w : meas.warnings) std::cout << "  warning: " << w << "\n";
}

std::string cmd_calibrate(const CalibrateOptions& opts) {
  LoadedScenario s = load_scenario_dir(opts.scenario_dir);
  if (opts.iterations) s.spec.solver.max_iterations = *opts.iterations;
  if (opts.rollouts) s.spec.solver.rollouts = *opts.rollouts;
  if (opts.seed) {
    s.spec.solver.seed = *opts.seed;
    s.spec.simulator.seed = *opts.seed;
  }
  const std::string mode = opts.regularized ? "regularized" : "baseline";
  if (opts.regularized) {
    s.spec.solver.auto_balance_w2 = true;
    if (s.spec.solver.weights.w2 <= 0.0) s.spec.solver.weights.w2 = 1.0;
  } else {
    s.spec.solver.auto_balance_w2 = false;
    s.spec.solver.weights.w2 = 0.0;
  }

  const CalibrationTrace trace =
      run_calibration(s.net, s.meas, s.gt_demand, s.spec.solver, s.spec.simulator);

  const fs::path out_dir(opts.out_dir.empty() ? opts.scenario_dir : opts.out_dir);
  fs::create_directories(out_dir);
  char stem_buf[64];
  std::snprintf(stem_buf, sizeof(stem_buf), "trace_%s_seed%llu", mode.c_str(),
                static_cast<unsigned long long>(s.spec.solver.seed));
  const fs::path csv_path = out_dir / (std::string(stem_buf) + ".csv");
  write_file(csv_path.string(), trace_to_csv(trace));

  json sidecar;
  sidecar["mode"] = mode;
  sidecar["seed"] = s.spec.solver.seed;
  sidecar["scenario_fingerprint"] = s.fingerprint;
  sidecar["w1"] = trace.w1;
  sidecar["w2"] = trace.w2;
  sidecar["iterations"] = s.spec.solver.max_iterations;
  sidecar["rollouts"] = s.spec.solver.rollouts;
  sidecar["final_objective"] = trace.final_objective;
  sidecar["final_metrics"] = metrics_json(trace.final_metrics);
  sidecar["final_demand"] = demand_map(s.net.od_pairs, trace.final_demand);
  if (s.gt_demand) sidecar["gt_demand"] = demand_map(s.net.od_pairs, *s.gt_demand);
  write_file((out_dir / (std::string(stem_buf) + ".json")).string(), sidecar.dump(2) + "\n");

  if (opts.plot) {
    std::vector<SvgSeries> series(3);
    series[0] = {"nrmse_demand", "#d62728", {}};
    series[1] = {"nrmse_time", "#1f77b4", {}};
    series[2] = {"nrmse_count", "#2ca02c", {}};
    for (const TraceRow& row : trace.rows) {
      series[0].values.push_back(row.metrics.nrmse_demand);
      series[1].values.push_back(row.metrics.nrmse_time);
      series[2].values.push_back(row.metrics.nrmse_count);
    }
    write_file((out_dir / (std::string(stem_buf) + ".svg")).string(),
               svg_line_chart(mode + " calibration", "iteration", series));
  }

  if (!opts.quiet) {
    std::cout << mode << " seed " << s.spec.solver.seed << ": objective "
              << trace.final_objective << ", nrmse_demand " << trace.final_metrics.nrmse_demand
              << ", nrmse_time " << trace.final_metrics.nrmse_time << ", nrmse_count "
              << trace.final_metrics.nrmse_count << "\n";
    std::cout << "wrote " << csv_path.string() << "\n";
  }
  return csv_path.string();
}

namespace {

struct TraceArtifacts {
  json sidecar;
  std::string mode;
};

TraceArtifacts load_trace_artifacts(const std::string& trace_csv) {
  if (!fs::exists(trace_csv)) throw std::runtime_error("trace not found: " + trace_csv);
  fs::path sidecar_path(trace_csv);
  sidecar_path.replace_extension(".json");
  if (!fs::exists(sidecar_path)) {
    throw std::runtime_error("missing result sidecar for trace: " + sidecar_path.string());
  }
  TraceArtifacts a;
  a.sidecar = json::parse(read_file(sidecar_path.string()));
  a.mode = a.sidecar.value("mode", "unknown");
  return a;
}

}  // namespace

void cmd_compare(const CompareOptions& opts) {
  const TraceArtifacts a = load_trace_artifacts(opts.trace_a);
  const TraceArtifacts b = load_trace_artifacts(opts.trace_b);

  const std::string fp_a = a.sidecar.value("scenario_fingerprint", "");
  const std::string fp_b = b.sidecar.value("scenario_fingerprint", "");
  if (fp_a.empty() || fp_a != fp_b) {
    throw std::runtime_error("traces come from different scenarios (fingerprints " + fp_a +
                             " vs " + fp_b + ")");
  }

  std::string prefix = opts.out_prefix;
  if (prefix.empty()) {
    prefix = (fs::path(opts.trace_a).parent_path() / "comparison").string();
  }

  ComparisonRow row_a{fp_a, a.mode, metrics_from_json(a.sidecar.at("final_metrics"))};
  ComparisonRow row_b{fp_b, b.mode, metrics_from_json(b.sidecar.at("final_metrics"))};
  write_file(prefix + ".csv", comparison_report_csv(row_a, row_b));

  if (!a.sidecar.contains("gt_demand")) {
    throw std::runtime_error("trace sidecars carry no ground-truth demand; scatter unavailable");
  }
  const json& gt = a.sidecar.at("gt_demand");
  const json& da = a.sidecar.at("final_demand");
  const json& db = b.sidecar.at("final_demand");
  std::string scatter = "od,gt_demand,demand_" + a.mode + ",demand_" + b.mode + "\n";
  std::vector<double> gt_vals, b_vals;
  char buf[200];
  for (auto it = gt.begin(); it != gt.end(); ++it) {
    const std::string& od = it.key();
    if (!da.contains(od) || !db.contains(od)) {
      throw std::runtime_error("final demand missing OD " + od);
    }
    std::snprintf(buf, sizeof(buf), "%s,%.12g,%.12g,%.12g\n", od.c_str(),
                  it.value().get<double>(), da.at(od).get<double>(), db.at(od).get<double>());
    scatter += buf;
    gt_vals.push_back(it.value().get<double>());
    b_vals.push_back(db.at(od).get<double>());
  }
  write_file(prefix + "_scatter.csv", scatter);

  if (opts.plot) {
    write_file(prefix + "_scatter.svg",
               svg_scatter("ground truth vs calibrated demand (" + b.mode + ")", "ground truth",
                           "calibrated", gt_vals, b_vals));
  }

  std::cout << "wrote " << prefix << ".csv and " << prefix << "_scatter.csv\n";
}

}  // namespace odcal
