// gpucb: run regret experiments, certify stored traces, audit confidence bounds.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gpucb/harness.hpp"
#include "gpucb/serialization.hpp"
#include "gpucb/theory_checks.hpp"

namespace {

using nlohmann::json;

struct RunFlags {
  std::string config_file;
  std::optional<std::string> kernel;
  std::optional<double> nu;
  std::optional<double> ell;
  std::optional<std::size_t> grid;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> master_seed;
  std::vector<std::string> policies;
  std::optional<std::string> beta_mode;
  std::optional<double> norm_bound;
  std::optional<std::size_t> expansion_size;
  std::optional<std::size_t> threads;
  std::optional<std::string> out;
};

void add_run_flags(CLI::App& cmd, RunFlags& f) {
  cmd.add_option("--config", f.config_file, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  cmd.add_option("--kernel", f.kernel, "Kernel family")->check(CLI::IsMember({"se", "matern"}));
  cmd.add_option("--nu", f.nu, "Matern smoothness (0.5, 1.5 or 2.5)");
  cmd.add_option("--ell", f.ell, "Kernel lengthscale");
  cmd.add_option("--grid", f.grid, "Grid points per axis");
  cmd.add_option("--dim", f.dim, "Input dimension");
  cmd.add_option("--horizon", f.horizon, "Steps per run");
  cmd.add_option("--seeds", f.seeds, "Number of seeds");
  cmd.add_option("--master-seed", f.master_seed, "Master seed");
  cmd.add_option("--policies", f.policies, "Comma-separated policies: ucb,ei,mvr,pe,random")->delimiter(',');
  cmd.add_option("--beta-mode", f.beta_mode, "exact_norm or upper_bound");
  cmd.add_option("--norm-bound", f.norm_bound, "Norm bound B used by --beta-mode upper_bound");
  cmd.add_option("--expansion-size", f.expansion_size, "Kernel expansion terms per objective");
  cmd.add_option("--threads", f.threads, "Worker threads (0 = hardware concurrency)");
  cmd.add_option("--out", f.out, "Output directory");
}

gpucb::ExperimentConfig resolve_config(const RunFlags& f) {
  gpucb::ExperimentConfig config;
  if (!f.config_file.empty()) {
    config = gpucb::load_config(f.config_file);
  }
  // Flags are applied through the JSON loader so both paths share validation.
  json overrides = json::object();
  if (f.kernel) overrides["kernel"] = *f.kernel;
  if (f.nu) overrides["nu"] = *f.nu;
  if (f.ell) overrides["ell"] = *f.ell;
  if (f.grid) overrides["grid"] = *f.grid;
  if (f.dim) overrides["dim"] = *f.dim;
  if (f.horizon) overrides["horizon"] = *f.horizon;
  if (f.seeds) overrides["seeds"] = *f.seeds;
  if (f.master_seed) overrides["master_seed"] = *f.master_seed;
  if (!f.policies.empty()) overrides["policies"] = f.policies;
  if (f.beta_mode) overrides["beta_mode"] = *f.beta_mode;
  if (f.norm_bound) overrides["norm_bound"] = *f.norm_bound;
  if (f.expansion_size) overrides["expansion_size"] = *f.expansion_size;
  if (f.threads) overrides["threads"] = *f.threads;
  if (f.out) overrides["out"] = *f.out;
  config = gpucb::config_from_json(overrides, config);
  config.validate();
  return config;
}

void print_summary(const gpucb::ExperimentResult& result) {
  const std::size_t horizon = result.config.horizon;
  std::cout << "policy      runs  mean R_T          se R_T        mean r_T        se r_T\n";
  for (const auto& a : result.aggregates) {
    const auto& last = a.per_step.back();
    std::cout << a.policy << std::string(12 - std::min<std::size_t>(a.policy.size(), 11), ' ') << a.runs << "  "
              << gpucb::format_double(last.mean_cum) << "  " << gpucb::format_double(last.se_cum) << "  "
              << gpucb::format_double(last.mean_simple) << "  " << gpucb::format_double(last.se_simple) << '\n';
  }
  std::cout << "(T = " << horizon << ")\n";
}

int cmd_run(const RunFlags& flags) {
  auto config = resolve_config(flags);
  if (config.output_dir.empty()) {
    config.output_dir = "gpucb_out";
  }
  const auto result = gpucb::run_experiment(config);
  print_summary(result);
  std::cout << "wrote " << (config.output_dir / "results.csv").string() << '\n';
  return 0;
}

int cmd_verify(const RunFlags& flags, double tolerance) {
  auto config = resolve_config(flags);
  config.audit = true;
  const auto result = gpucb::run_experiment(config);
  std::size_t violations = 0;
  double worst = -1e300;
  for (const auto& trace : result.traces) {
    const double excess = trace.audit_max_excess.value_or(0.0);
    worst = std::max(worst, excess);
    if (excess > tolerance) {
      ++violations;
      std::cout << "violation: policy=" << trace.policy << " seed=" << trace.seed
                << " excess=" << gpucb::format_double(excess) << '\n';
    }
  }
  std::cout << "audited " << result.traces.size() << " traces; largest |f - mu| - B sigma = "
            << gpucb::format_double(worst) << "; violations = " << violations << '\n';
  return violations == 0 ? 0 : 1;
}

struct CertifyOptions {
  std::string in;
  std::string out;
  std::vector<double> lambdas{0.02, 0.05, 0.1, 0.3};
  std::vector<std::string> policies;
  std::size_t threads = 0;
  bool strict = false;
};

struct TraceReport {
  json document;
  bool elliptical_ok = true;
  bool lambda_ok = false;
  bool cumulative_ok = false;
};

TraceReport certify_trace(const gpucb::ExperimentConfig& config, const std::vector<gpucb::Point>& grid,
                          const gpucb::RegretTrace& trace, const std::vector<double>& lambdas) {
  std::vector<gpucb::Point> sequence;
  sequence.reserve(trace.steps.size());
  for (const auto& s : trace.steps) {
    sequence.push_back(grid.at(s.chosen_index));
  }
  const std::size_t horizon = sequence.size();
  const gpucb::SequenceAnalysis analysis(config.kernel, sequence);

  TraceReport report;
  json counts = json::array();
  for (const double lambda : lambdas) {
    const auto count = analysis.elliptical(lambda, horizon);
    report.elliptical_ok = report.elliptical_ok && count.within_bound();
    counts.push_back(gpucb::to_json(count));
  }

  json doc{{"policy", trace.policy}, {"seed", trace.seed}, {"T", horizon}, {"elliptical", std::move(counts)}};
  if (horizon >= 2) {
    const auto cert = analysis.certify(horizon);
    const auto cumulative = analysis.cumulative(horizon);
    report.lambda_ok = cert.pass;
    report.cumulative_ok = cumulative.pass;
    doc["lambda_certificate"] = gpucb::to_json(cert);
    doc["cumulative_certificate"] = gpucb::to_json(cumulative);

    std::vector<double> steps;
    std::vector<double> lambda_values;
    for (const auto& s : cumulative.steps) {
      if (s.feasible && !s.at_lower_bracket) {
        steps.push_back(static_cast<double>(s.horizon));
        lambda_values.push_back(s.lambda_star);
      }
    }
    const auto family = config.kernel.family() == gpucb::KernelFamily::SquaredExponential
                            ? gpucb::ScheduleFamily::SquaredExponential
                            : gpucb::ScheduleFamily::Matern;
    try {
      doc["schedule_fit"] = gpucb::to_json(
          gpucb::schedule_shape_check(family, config.dim, config.kernel.nu(), steps, lambda_values));
    } catch (const std::invalid_argument& e) {
      doc["schedule_fit"] = json{{"error", e.what()}};
    }
  }
  report.document = std::move(doc);
  return report;
}

int cmd_certify(const CertifyOptions& opts) {
  const std::filesystem::path in_dir = opts.in;
  const auto manifest_path = in_dir / "manifest.json";
  std::ifstream manifest_in(manifest_path);
  if (!manifest_in) {
    throw std::runtime_error("cannot open '" + manifest_path.string() + "'");
  }
  const json manifest = json::parse(manifest_in);
  const auto config = gpucb::config_from_json(manifest.at("config"));

  const auto results_path = in_dir / "results.csv";
  std::ifstream results_in(results_path);
  if (!results_in) {
    throw std::runtime_error("cannot open '" + results_path.string() + "'");
  }
  auto traces = gpucb::read_results_csv(results_in);
  if (!opts.policies.empty()) {
    std::erase_if(traces, [&](const auto& t) {
      return std::find(opts.policies.begin(), opts.policies.end(), t.policy) == opts.policies.end();
    });
  }

  const std::filesystem::path out_dir = opts.out.empty() ? in_dir / "certificates" : std::filesystem::path(opts.out);
  std::filesystem::create_directories(out_dir);
  const auto grid = gpucb::make_grid(config.grid_resolution, config.dim);

  std::vector<TraceReport> reports(traces.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < traces.size(); i = next++) {
      try {
        reports[i] = certify_trace(config, grid, traces[i], opts.lambdas);
        const auto path = out_dir / (traces[i].policy + "_seed" + std::to_string(traces[i].seed) + ".json");
        std::ofstream out(path);
        out << reports[i].document.dump(2) << '\n';
        if (!out) {
          throw std::runtime_error("failed writing '" + path.string() + "'");
        }
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = traces.size();
      }
    }
  };
  std::size_t threads = opts.threads != 0 ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::max<std::size_t>(1, std::min(threads, traces.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 1; i < threads; ++i) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);

  std::size_t elliptical = 0, lambda = 0, cumulative = 0;
  for (const auto& r : reports) {
    elliptical += r.elliptical_ok;
    lambda += r.lambda_ok;
    cumulative += r.cumulative_ok;
  }
  const std::size_t n = reports.size();
  std::cout << "certified " << n << " traces into " << out_dir.string() << '\n'
            << "  elliptical count bound: " << elliptical << "/" << n << '\n'
            << "  min-std certificate:    " << lambda << "/" << n << '\n'
            << "  cumulative certificate: " << cumulative << "/" << n << '\n';
  const bool all = elliptical == n && lambda == n && cumulative == n;
  return opts.strict && !all ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Noise-free GP bandit experiments"};
  app.require_subcommand(1);

  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Run a seeded regret experiment and write CSV + manifest");
  add_run_flags(*run, run_flags);

  CertifyOptions certify_opts;
  auto* certify = app.add_subcommand("certify", "Certify posterior-std bounds on the traces of a stored run");
  certify->add_option("--in", certify_opts.in, "Run directory holding manifest.json and results.csv")
      ->required()
      ->check(CLI::ExistingDirectory);
  certify->add_option("--out", certify_opts.out, "Certificate directory (default: <in>/certificates)");
  certify->add_option("--lambdas", certify_opts.lambdas, "Elliptical-count thresholds")->delimiter(',');
  certify->add_option("--policies", certify_opts.policies, "Only certify these policies")->delimiter(',');
  certify->add_option("--threads", certify_opts.threads, "Worker threads (0 = hardware concurrency)");
  certify->add_flag("--strict", certify_opts.strict, "Exit with status 1 unless every certificate passes");

  RunFlags verify_flags;
  double tolerance = 1e-6;
  auto* verify = app.add_subcommand("verify", "Audit |f - mu| <= B sigma on the grid at every step");
  add_run_flags(*verify, verify_flags);
  verify->add_option("--tolerance", tolerance, "Allowed excess");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_flags);
    if (*certify) return cmd_certify(certify_opts);
    if (*verify) return cmd_verify(verify_flags, tolerance);
  } catch (const std::exception& e) {
    std::cerr << "gpucb: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
