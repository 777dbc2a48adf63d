// coopsense: run experiment specs, validate them, and optimize vote counts.
//
//   coopsense run <spec> [--out PATH] [--seed N] [--workers N]
//   coopsense validate <spec>
//   coopsense optimize-n --k K --pf X --pd Y --alpha A
//
// COOPSENSE_OUT_DIR sets the directory for results when --out is not given.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "coopsense/coopsense.hpp"

namespace fs = std::filesystem;
using namespace coopsense;

namespace {

constexpr const char* kOutDirEnv = "COOPSENSE_OUT_DIR";

void print_diagnostics(const spec_error& e) {
  for (const auto& d : e.diagnostics()) std::cerr << "error: " << d.field << ": " << d.message << '\n';
}

fs::path resolve_output(const ExperimentSpec& spec, const std::string& out_flag) {
  if (!out_flag.empty()) return out_flag;
  fs::path rel = spec.output;
  if (const char* dir = std::getenv(kOutDirEnv); dir && *dir) return fs::path(dir) / rel;
  return rel;
}

std::string fmt_opt(const std::optional<RateEstimate>& r) {
  if (!r) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", r->point);
  return buf;
}

void print_summary(const ExperimentSpec& spec, const std::vector<ResultRow>& rows, const fs::path& out) {
  std::printf("%s: %zu sweep points x %zu schemes -> %s\n", spec.name.c_str(), spec.sweep.size(), spec.schemes.size(),
              out.string().c_str());
  std::printf("%10s  %-19s %10s %10s %10s %10s %10s %10s\n", to_string(spec.axis), "scheme", "pd", "pf", "qf", "qm",
              "qe", "qe_analytic");
  for (const auto& r : rows) {
    const auto& e = r.estimate;
    char qe[32] = "-";
    if (e.qe) std::snprintf(qe, sizeof qe, "%.4g", e.qe->point);
    std::printf("%10.4g  %-19s %10s %10s %10s %10s %10s %10.4g\n", r.sweep_value, to_string(e.scheme),
                fmt_opt(e.pd).c_str(), fmt_opt(e.pf).c_str(), fmt_opt(e.qf).c_str(), fmt_opt(e.qm).c_str(), qe,
                e.analytic.qe);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cooperative spectrum sensing under noise uncertainty"};
  app.require_subcommand(1);

  std::string spec_path, out_path;
  std::optional<std::uint64_t> seed;
  unsigned workers = default_workers();
  auto* run = app.add_subcommand("run", "Run an experiment spec and write a CSV table");
  run->add_option("spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--out", out_path, "Output CSV path");
  run->add_option("--seed", seed, "Override the spec's seed");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string validate_path;
  auto* val = app.add_subcommand("validate", "Validate an experiment spec without running it");
  val->add_option("spec", validate_path, "Experiment spec (JSON)")->required();

  std::size_t K = 0;
  double pf = 0.0, pd = 0.0, alpha = 0.0;
  auto* opt = app.add_subcommand("optimize-n", "Vote threshold minimizing the total error");
  opt->add_option("--k", K, "Number of SUs")->required()->check(CLI::PositiveNumber);
  opt->add_option("--pf", pf, "Per-SU false-alarm probability")->required()->check(CLI::Range(0.0, 1.0));
  opt->add_option("--pd", pd, "Per-SU detection probability")->required()->check(CLI::Range(0.0, 1.0));
  opt->add_option("--alpha", alpha, "Prior probability of H0")->required()->check(CLI::Range(0.0, 1.0));

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      const auto spec = load_spec(spec_path);
      const auto rows = run_sweep(spec, seed, workers);
      const fs::path out = resolve_output(spec, out_path);
      write_atomically(out, render_csv(rows));
      print_summary(spec, rows, out);
    } else if (*val) {
      const auto spec = load_spec(validate_path);
      std::printf("ok: %s (%zu sweep points, %zu schemes)\n", spec.name.c_str(), spec.sweep.size(),
                  spec.schemes.size());
    } else if (*opt) {
      const auto best = optimize_vote_count(K, Probability{pf}, Probability{pd}, alpha);
      std::printf("n* = %zu (N* = K - n = %zu)\nQ_e* = %.17g\n", best.n, best.n_star(), best.qe);
    }
  } catch (const spec_error& e) {
    print_diagnostics(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
