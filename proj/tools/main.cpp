#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "odcal/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"odcal: OD demand calibration against path travel times and sample segment counts"};
  app.require_subcommand(1);

  odcal::GenerateOptions gen;
  CLI::App* generate = app.add_subcommand("generate", "Synthesize a scenario: network, ground "
                                                      "truth demand, and sampled measurements");
  generate->add_option("--spec", gen.spec_path, "Scenario spec JSON file")->required();
  generate->add_option("--out", gen.out_dir, "Output directory")->required();
  std::uint64_t gen_seed = 0;
  CLI::Option* gen_seed_opt = generate->add_option("--seed", gen_seed, "Override the spec seed");

  odcal::CalibrateOptions cal;
  CLI::App* calibrate = app.add_subcommand("calibrate", "Run the iterative calibration on a "
                                                        "generated scenario");
  calibrate->add_option("scenario", cal.scenario_dir, "Generated scenario directory")->required();
  bool flag_reg = false, flag_base = false;
  calibrate->add_flag("--regularized", flag_reg, "Use the count-ratio regularized objective");
  calibrate->add_flag("--baseline", flag_base, "Travel-time-only objective (w2 = 0)");
  int cal_iters = 0, cal_rollouts = 0;
  std::uint64_t cal_seed = 0;
  CLI::Option* iters_opt = calibrate->add_option("--iterations", cal_iters, "Iteration budget K");
  CLI::Option* roll_opt = calibrate->add_option("--rollouts", cal_rollouts,
                                                "Simulation rollouts per evaluation");
  CLI::Option* cal_seed_opt = calibrate->add_option("--seed", cal_seed, "Calibration seed");
  calibrate->add_option("--out", cal.out_dir, "Output directory (default: scenario dir)");
  calibrate->add_flag("--plot", cal.plot, "Also write an SVG convergence chart");

  odcal::CompareOptions cmp;
  CLI::App* compare = app.add_subcommand("compare", "Compare two calibration traces from the "
                                                    "same scenario");
  compare->add_option("trace_a", cmp.trace_a, "First trace CSV")->required();
  compare->add_option("trace_b", cmp.trace_b, "Second trace CSV")->required();
  compare->add_option("--out", cmp.out_prefix, "Output path prefix");
  compare->add_flag("--plot", cmp.plot, "Also write a scatter SVG");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) {
      if (*gen_seed_opt) gen.seed = gen_seed;
      odcal::cmd_generate(gen);
    } else if (*calibrate) {
      if (flag_reg == flag_base) {
        std::cerr << "calibrate: pass exactly one of --regularized / --baseline\n";
        return 1;
      }
      cal.regularized = flag_reg;
      if (*iters_opt) cal.iterations = cal_iters;
      if (*roll_opt) cal.rollouts = cal_rollouts;
      if (*cal_seed_opt) cal.seed = cal_seed;
      odcal::cmd_calibrate(cal);
    } else if (*compare) {
      odcal::cmd_compare(cmp);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
