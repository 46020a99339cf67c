#include <CLI11.hpp>

#include "commands.hpp"

using namespace flagsim::cli;

int main(int argc, char** argv) {
  CLI::App app{"Flagellated soft-robot simulator, calibrator and path planner"};
  app.require_subcommand(1);
#ifdef FLAGSIM_VERSION
  app.set_version_flag("--version", FLAGSIM_VERSION);
#endif

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a schedule and write the trajectory");
  simulate->add_option("--config", sim.config, "Robot config file")->required();
  simulate->add_option("--schedule", sim.schedule, "Actuation schedule CSV")->required();
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--stride", sim.stride, "Output sample spacing [s] (default: 1% of the time scale)");
  simulate->add_option("--snapshot-stride", sim.snapshot_stride, "Full state every k samples (0: none)");

  CharacterizeArgs chr;
  auto* characterize = app.add_subcommand("characterize", "Measure the turning primitive at constant omega");
  characterize->add_option("--config", chr.config, "Robot config file")->required();
  characterize->add_option("--out", chr.out, "Output directory")->required();
  auto* chr_omega = characterize->add_option("--omega", chr.omega, "Motor speed [rad/s]");
  auto* chr_bar = characterize->add_option("--omega-bar", chr.omega_bar, "Dimensionless motor speed");
  chr_omega->excludes(chr_bar);
  characterize->add_option("--duration", chr.duration_time_scales, "Run length in time scales");
  characterize->add_option("--switching-periods", chr.switching_periods,
                           "Square-wave periods for the switch response (0: skip)");

  CalibrateArgs cal;
  auto* calibrate = app.add_subcommand("calibrate", "Fit C_t, C_r, C_yr to measurements");
  calibrate->add_option("--config", cal.config, "Geometry and numerics config")->required();
  calibrate->add_option("--measurements", cal.measurements, "Measurement CSV")->required();
  calibrate->add_option("--validate", cal.validation, "Held-out measurement CSV");
  calibrate->add_option("--out", cal.out, "Output directory")->required();
  calibrate->add_option("--jobs", cal.jobs, "Parallel simulations")->check(CLI::PositiveNumber);
  calibrate->add_option("--seed-grid", cal.seed_grid, "Grid points per coefficient")->check(CLI::Range(2, 20));
  calibrate->add_option("--max-evaluations", cal.max_evaluations, "Nelder-Mead evaluation budget");
  calibrate->add_option("--step-time-scales", cal.step_time_scales, "dt as a fraction of each site's time scale");
  calibrate->add_option("--duration", cal.duration_time_scales, "Run length per prediction in time scales");

  PlanArgs plan;
  auto* plan_cmd = app.add_subcommand("plan", "Plan a binary schedule for a path");
  plan_cmd->add_option("--config", plan.config, "Robot config file")->required();
  plan_cmd->add_option("--path-spec", plan.path_spec, "Path spec file")->required();
  plan_cmd->add_option("--out", plan.out, "Output directory")->required();
  plan_cmd->add_option("--map", plan.map, "Primitive map from 'characterize'");
  auto* plan_omega = plan_cmd->add_option("--omega", plan.omega, "Motor speed omega_H [rad/s]");
  auto* plan_bar = plan_cmd->add_option("--omega-bar", plan.omega_bar, "Dimensionless motor speed");
  plan_omega->excludes(plan_bar);
  plan_cmd->add_flag("--verify", plan.verify, "Execute the plan in the simulator and audit it");
  plan_cmd->add_option("--stride", plan.stride, "Output sample spacing for --verify [s]");

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "Steady-state descriptors over a parameter grid");
  sweep_cmd->add_option("--config", sweep.config, "Base robot config")->required();
  sweep_cmd->add_option("--sweep", sweep.sweep, "Sweep spec file")->required();
  sweep_cmd->add_option("--out", sweep.out, "Output directory")->required();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Parallel simulations")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--duration", sweep.duration_time_scales, "Run length per point in time scales");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadInput;
  }

  if (*simulate) return cmd_simulate(sim);
  if (*characterize) return cmd_characterize(chr);
  if (*calibrate) return cmd_calibrate(cal);
  if (*plan_cmd) return cmd_plan(plan);
  if (*sweep_cmd) return cmd_sweep(sweep);
  return kBadInput;
}
