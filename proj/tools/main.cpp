#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vpfp/errors.hpp"
#include "vpfp/harness.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitInvariant = 4;

vpfp::RunConfig load_config(const std::string& path, vpfp::ExperimentKind verb_kind) {
  vpfp::RunConfig config = path.empty() ? vpfp::RunConfig{} : vpfp::RunConfig::load(path);
  config.apply_env_overrides();
  config.experiment = verb_kind;
  return config;
}

int do_run(const std::string& config_path) {
  const vpfp::RunConfig config =
      load_config(config_path, vpfp::ExperimentKind::single_run);
  const vpfp::RunArtifacts artifacts = vpfp::run_single(config);
  const vpfp::DiagnosticsRecord& last = artifacts.series.back();
  std::printf("run complete: t=%g records=%zu energy_E=%.6e mass_m0=%.12g\n", last.t,
              artifacts.series.size(), last.energy_E, last.mass_m0);
  for (const std::string& f : artifacts.files) std::printf("  wrote %s\n", f.c_str());
  return kExitOk;
}

int do_converge(const std::string& config_path) {
  const vpfp::RunConfig config =
      load_config(config_path, vpfp::ExperimentKind::convergence_study);
  const vpfp::ConvergenceReport report = vpfp::run_convergence_study(config);
  std::filesystem::create_directories(config.output.dir);
  const std::string path = config.output.dir + "/convergence.json";
  std::ofstream os(path);
  os << report.to_json() << "\n";
  std::printf("%-18s %-12s %-12s %-12s %s\n", "pair", "eps_l1", "eps_l2", "eps_linf",
              "orders (l1/l2/linf)");
  for (const vpfp::ConvergencePair& p : report.pairs) {
    char label[64];
    std::snprintf(label, sizeof(label), "%dx%d->%dx%d", p.nx_coarse, p.nh_coarse, p.nx_fine,
                  p.nh_fine);
    if (p.order)
      std::printf("%-18s %-12.4e %-12.4e %-12.4e %.2f/%.2f/%.2f\n", label, p.error.l1,
                  p.error.l2, p.error.linf, p.order->l1, p.order->l2, p.order->linf);
    else
      std::printf("%-18s %-12.4e %-12.4e %-12.4e -\n", label, p.error.l1, p.error.l2,
                  p.error.linf);
  }
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int do_sweep(const std::string& config_path) {
  const vpfp::RunConfig config =
      load_config(config_path, vpfp::ExperimentKind::regime_sweep);
  const auto results = vpfp::run_regime_sweep(config);
  for (const vpfp::RegimeResult& r : results) {
    if (r.energy_rate)
      std::printf("tau0=%-10g energy decay rate %.4e (fit residual %.2e, %d samples)\n",
                  r.tau0, r.energy_rate->rate, r.energy_rate->residual,
                  r.energy_rate->samples);
    else
      std::printf("tau0=%-10g energy decay rate: fit unavailable\n", r.tau0);
  }
  return kExitOk;
}

int do_verify(const std::string& config_path) {
  const vpfp::RunConfig config =
      load_config(config_path, vpfp::ExperimentKind::invariant_battery);
  const vpfp::BatteryReport report = vpfp::run_invariant_battery(config);
  vpfp::print_battery(std::cout, report);
  return report.all_pass() ? kExitOk : kExitInvariant;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hermite-DG solver for the 1D Vlasov-Poisson-Fokker-Planck system"};
  app.require_subcommand(1);

  std::string config_path;
  auto* run_cmd = app.add_subcommand("run", "integrate one configuration and emit data files");
  auto* converge_cmd =
      app.add_subcommand("converge", "joint (Nx, NH) refinement self-convergence study");
  auto* sweep_cmd =
      app.add_subcommand("sweep", "time series and decay fits across collisional regimes");
  auto* verify_cmd =
      app.add_subcommand("verify", "randomized invariant battery; nonzero exit on failure");
  for (auto* cmd : {run_cmd, converge_cmd, sweep_cmd, verify_cmd})
    cmd->add_option("--config", config_path, "JSON run configuration");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run_cmd->parsed()) return do_run(config_path);
    if (converge_cmd->parsed()) return do_converge(config_path);
    if (sweep_cmd->parsed()) return do_sweep(config_path);
    if (verify_cmd->parsed()) return do_verify(config_path);
  } catch (const vpfp::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const vpfp::numeric_failure& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const vpfp::compatibility_violation& e) {
    std::fprintf(stderr, "numeric failure: %s\n", e.what());
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitConfig;
}
