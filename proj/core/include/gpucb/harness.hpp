#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gpucb/algorithms.hpp"
#include "gpucb/kernels.hpp"
#include "gpucb/random.hpp"
#include "gpucb/rkhs.hpp"

namespace gpucb {

enum class BetaMode {
  ExactNorm,   // beta^{1/2} = ||f||_k of the sampled objective
  UpperBound,  // beta^{1/2} = ExperimentConfig::norm_bound
};

std::string_view beta_mode_name(BetaMode mode) noexcept;
BetaMode parse_beta_mode(std::string_view name);

struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::squared_exponential(0.25);
  std::size_t grid_resolution = 25;
  std::size_t dim = 2;
  std::size_t horizon = 200;
  std::size_t num_seeds = 100;
  std::uint64_t master_seed = 0;
  std::vector<PolicyConfig> policies{PolicyConfig{}};
  std::size_t expansion_size = 50;
  BetaMode beta_mode = BetaMode::ExactNorm;
  std::optional<double> norm_bound;
  std::filesystem::path output_dir;
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;
  /// Check |f - mu| <= ||f||_k sigma on the whole grid after every step.
  bool audit = false;

  void validate() const;
};

struct TraceStep {
  std::size_t chosen_index = 0;
  double f_value = 0.0;
  double inst_regret = 0.0;
  double cum_regret = 0.0;
  double simple_regret = 0.0;
  /// sigma(x_t; X_{t-1}); not part of the CSV.
  double posterior_std = 0.0;
};

struct RegretTrace {
  std::string policy;
  std::size_t seed = 0;
  double norm = 0.0;
  double beta_sqrt = 0.0;
  double f_star = 0.0;
  std::size_t best_index = 0;
  std::vector<TraceStep> steps;
  std::size_t effective_size = 0;
  /// Largest |f - mu| - ||f||_k sigma over grid and steps, when audited.
  std::optional<double> audit_max_excess;
};

/// Everything a seed fixes, shared by every policy run under that seed.
struct SeedProblem {
  RkhsFunction objective;
  std::vector<double> values;  // objective on the grid
  GridMaximum best;
  std::size_t initial_index;
  RandomStream stream;  // root stream of the seed
};

SeedProblem make_problem(const ExperimentConfig& config, std::span<const Point> grid, std::size_t seed_index);

/// Largest |f(x) - mu(x)| - width * sigma(x) over the tracked candidates.
double confidence_bound_excess(const History& history, std::span<const double> values, double width);

RegretTrace run_single(const ExperimentConfig& config, const PolicyConfig& policy, std::size_t seed_index);
RegretTrace run_single(const ExperimentConfig& config, std::span<const Point> grid, const SeedProblem& problem,
                       const PolicyConfig& policy, std::size_t seed_index);

struct AggregatePoint {
  double mean_cum = 0.0;
  double se_cum = 0.0;
  double mean_simple = 0.0;
  double se_simple = 0.0;
};

struct PolicyAggregate {
  std::string policy;
  std::size_t runs = 0;
  std::vector<AggregatePoint> per_step;
};

struct ExperimentResult {
  ExperimentConfig config;
  /// Seed-major, then in config.policies order.
  std::vector<RegretTrace> traces;
  std::vector<PolicyAggregate> aggregates;
  /// One objective per seed, in seed order.
  std::vector<RkhsFunction> objectives;

  [[nodiscard]] const PolicyAggregate& aggregate_for(std::string_view policy) const;
};

/// Mean and standard error per step, folded in trace order.
std::vector<PolicyAggregate> aggregate(std::span<const RegretTrace> traces);

/// Runs every (seed, policy) pair on a worker pool. Writes results when
/// config.output_dir is set.
ExperimentResult run_experiment(const ExperimentConfig& config);

inline constexpr std::string_view kResultsHeader =
    "policy,seed,t,chosen_index,f_value,inst_regret,cum_regret,simple_regret";

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

void write_results_csv(std::ostream& out, std::span<const RegretTrace> traces);
/// Parses the results CSV back into traces. posterior_std is left at 0 and
/// f_star is recovered as f_value + inst_regret, exact up to one rounding.
std::vector<RegretTrace> read_results_csv(std::istream& in);
void write_summary_csv(std::ostream& out, std::span<const PolicyAggregate> aggregates);

/// results.csv, summary.csv and manifest.json under `dir`.
void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir);

}  // namespace gpucb
