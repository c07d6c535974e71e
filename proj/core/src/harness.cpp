#include "gpucb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "gpucb/serialization.hpp"

namespace gpucb {

std::string_view beta_mode_name(BetaMode mode) noexcept {
  return mode == BetaMode::ExactNorm ? "exact_norm" : "upper_bound";
}

BetaMode parse_beta_mode(std::string_view name) {
  if (name == "exact_norm" || name == "exact") return BetaMode::ExactNorm;
  if (name == "upper_bound" || name == "bound") return BetaMode::UpperBound;
  throw std::invalid_argument("unknown beta mode '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (horizon < 1) throw std::invalid_argument("horizon must be at least 1");
  if (grid_resolution < 2) throw std::invalid_argument("grid resolution must be at least 2");
  if (num_seeds < 1) throw std::invalid_argument("num_seeds must be at least 1");
  if (dim < 1) throw std::invalid_argument("dim must be at least 1");
  if (expansion_size < 1) throw std::invalid_argument("expansion size must be at least 1");
  if (policies.empty()) throw std::invalid_argument("at least one policy is required");
  for (const auto& p : policies) {
    p.validate();
  }
  if (beta_mode == BetaMode::UpperBound && !(norm_bound && *norm_bound > 0.0)) {
    throw std::invalid_argument("beta mode upper_bound needs a positive norm_bound");
  }
}

SeedProblem make_problem(const ExperimentConfig& config, std::span<const Point> grid, std::size_t seed_index) {
  const RandomStream root(derive_stream_key(config.master_seed, seed_index));
  RandomStream objective_stream = root.split("objective");
  RkhsFunction objective = sample_objective(config.kernel, config.dim, config.expansion_size, objective_stream);
  std::vector<double> values = evaluate_on(objective, grid);
  const GridMaximum best = grid_maximum(values);
  RandomStream initial_stream = root.split("initial");
  const std::size_t initial = initial_stream.uniform_index(grid.size());
  return SeedProblem{std::move(objective), std::move(values), best, initial, root};
}

double confidence_bound_excess(const History& history, std::span<const double> values, double width) {
  const CandidatePosterior p = history.candidate_posterior();
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < p.mean.size(); ++j) {
    worst = std::max(worst, std::abs(values[static_cast<std::size_t>(j)] - p.mean[j]) - width * p.std[j]);
  }
  return worst;
}

RegretTrace run_single(const ExperimentConfig& config, std::span<const Point> grid, const SeedProblem& problem,
                       const PolicyConfig& policy_config, std::size_t seed_index) {
  PolicyConfig resolved = policy_config;
  const double norm = problem.objective.norm();
  if (!resolved.beta_sqrt) {
    resolved.beta_sqrt = config.beta_mode == BetaMode::ExactNorm ? norm : config.norm_bound.value_or(norm);
  }
  auto policy = make_policy(resolved, grid.size());
  RandomStream rng = problem.stream.split("policy").split(policy_name(resolved.kind));

  RegretTrace trace;
  trace.policy = std::string(policy_name(resolved.kind));
  trace.seed = seed_index;
  trace.norm = norm;
  trace.beta_sqrt = *resolved.beta_sqrt;
  trace.f_star = problem.best.value;
  trace.best_index = problem.best.index;
  trace.steps.reserve(config.horizon);

  History history(config.kernel, config.dim, std::vector<Point>(grid.begin(), grid.end()));
  double excess = config.audit ? confidence_bound_excess(history, problem.values, norm)
                               : -std::numeric_limits<double>::infinity();

  double cumulative = 0.0;
  double best_seen = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 1; t <= config.horizon; ++t) {
    const std::size_t index = t == 1 ? problem.initial_index : policy->select(history, rng);
    TraceStep step;
    step.chosen_index = index;
    step.posterior_std = history.candidate_posterior(index).std;
    step.f_value = problem.values[index];
    step.inst_regret = trace.f_star - step.f_value;
    cumulative += step.inst_regret;
    step.cum_regret = cumulative;
    best_seen = std::max(best_seen, step.f_value);
    step.simple_regret = trace.f_star - best_seen;
    trace.steps.push_back(step);

    history.extend(grid[index], step.f_value);
    if (config.audit) {
      excess = std::max(excess, confidence_bound_excess(history, problem.values, norm));
    }
  }
  trace.effective_size = history.effective_size();
  if (config.audit) {
    trace.audit_max_excess = excess;
  }
  return trace;
}

RegretTrace run_single(const ExperimentConfig& config, const PolicyConfig& policy, std::size_t seed_index) {
  config.validate();
  const auto grid = make_grid(config.grid_resolution, config.dim);
  const auto problem = make_problem(config, grid, seed_index);
  return run_single(config, grid, problem, policy, seed_index);
}

// ---------------------------------------------------------------------------

const PolicyAggregate& ExperimentResult::aggregate_for(std::string_view policy) const {
  for (const auto& a : aggregates) {
    if (a.policy == policy) {
      return a;
    }
  }
  throw std::out_of_range("no aggregate for policy '" + std::string(policy) + "'");
}

std::vector<PolicyAggregate> aggregate(std::span<const RegretTrace> traces) {
  std::vector<PolicyAggregate> out;
  std::vector<std::vector<const RegretTrace*>> groups;
  for (const auto& trace : traces) {
    auto it = std::find_if(out.begin(), out.end(), [&](const auto& a) { return a.policy == trace.policy; });
    if (it == out.end()) {
      out.push_back({trace.policy, 0, {}});
      groups.emplace_back();
      it = out.end() - 1;
    }
    groups[static_cast<std::size_t>(it - out.begin())].push_back(&trace);
  }

  for (std::size_t g = 0; g < out.size(); ++g) {
    const auto& members = groups[g];
    const std::size_t runs = members.size();
    std::size_t steps = std::numeric_limits<std::size_t>::max();
    for (const auto* m : members) {
      steps = std::min(steps, m->steps.size());
    }
    out[g].runs = runs;
    out[g].per_step.resize(steps);
    for (std::size_t t = 0; t < steps; ++t) {
      double sum_cum = 0.0;
      double sum_simple = 0.0;
      for (const auto* m : members) {
        sum_cum += m->steps[t].cum_regret;
        sum_simple += m->steps[t].simple_regret;
      }
      AggregatePoint& point = out[g].per_step[t];
      point.mean_cum = sum_cum / static_cast<double>(runs);
      point.mean_simple = sum_simple / static_cast<double>(runs);
      if (runs > 1) {
        double ss_cum = 0.0;
        double ss_simple = 0.0;
        for (const auto* m : members) {
          ss_cum += std::pow(m->steps[t].cum_regret - point.mean_cum, 2);
          ss_simple += std::pow(m->steps[t].simple_regret - point.mean_simple, 2);
        }
        const double n = static_cast<double>(runs);
        point.se_cum = std::sqrt(ss_cum / (n - 1.0) / n);
        point.se_simple = std::sqrt(ss_simple / (n - 1.0) / n);
      }
    }
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  for (const auto& p : config.policies) {
    if (p.kind == PolicyKind::Reds) {
      throw UnimplementedPolicy("reds: unimplemented baseline");
    }
  }
  const auto grid = make_grid(config.grid_resolution, config.dim);
  const std::size_t seeds = config.num_seeds;
  const std::size_t per_seed = config.policies.size();

  std::vector<RegretTrace> traces(seeds * per_seed);
  std::vector<std::optional<RkhsFunction>> objectives(seeds);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (std::size_t seed = next++; seed < seeds; seed = next++) {
      try {
        SeedProblem problem = make_problem(config, grid, seed);
        for (std::size_t p = 0; p < per_seed; ++p) {
          traces[seed * per_seed + p] = run_single(config, grid, problem, config.policies[p], seed);
        }
        objectives[seed] = std::move(problem.objective);
      } catch (...) {
        const std::lock_guard lock(failure_mutex);
        if (!failure) {
          failure = std::current_exception();
        }
        next = seeds;
      }
    }
  };

  std::size_t threads = config.threads != 0 ? config.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, seeds);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
  }
  if (failure) {
    std::rethrow_exception(failure);
  }

  ExperimentResult result{config, std::move(traces), {}, {}};
  result.aggregates = aggregate(result.traces);
  result.objectives.reserve(seeds);
  for (auto& f : objectives) {
    result.objectives.push_back(std::move(*f));
  }
  if (!config.output_dir.empty()) {
    write_outputs(result, config.output_dir);
  }
  return result;
}

// ---------------------------------------------------------------------------

std::string format_double(double value) {
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) {
    throw std::runtime_error("failed to format double");
  }
  return std::string(buffer, end);
}

void write_results_csv(std::ostream& out, std::span<const RegretTrace> traces) {
  out << kResultsHeader << '\n';
  for (const auto& trace : traces) {
    for (std::size_t i = 0; i < trace.steps.size(); ++i) {
      const auto& s = trace.steps[i];
      out << trace.policy << ',' << trace.seed << ',' << (i + 1) << ',' << s.chosen_index << ','
          << format_double(s.f_value) << ',' << format_double(s.inst_regret) << ',' << format_double(s.cum_regret)
          << ',' << format_double(s.simple_regret) << '\n';
    }
  }
}

namespace {

double parse_double(std::string_view field) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed number '" + std::string(field) + "' in results CSV");
  }
  return value;
}

std::size_t parse_size(std::string_view field) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc{} || ptr != field.data() + field.size()) {
    throw std::runtime_error("malformed integer '" + std::string(field) + "' in results CSV");
  }
  return value;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::vector<RegretTrace> read_results_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kResultsHeader) {
    throw std::runtime_error("results CSV header mismatch; expected '" + std::string(kResultsHeader) + "'");
  }
  std::vector<RegretTrace> traces;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) {
      continue;
    }
    const auto fields = split_fields(line);
    if (fields.size() != 8) {
      throw std::runtime_error("results CSV line " + std::to_string(line_number) + " has " +
                               std::to_string(fields.size()) + " fields");
    }
    const std::string policy(fields[0]);
    const std::size_t seed = parse_size(fields[1]);
    const std::size_t t = parse_size(fields[2]);
    if (traces.empty() || traces.back().policy != policy || traces.back().seed != seed || t == 1) {
      RegretTrace trace;
      trace.policy = policy;
      trace.seed = seed;
      traces.push_back(std::move(trace));
    }
    RegretTrace& trace = traces.back();
    if (t != trace.steps.size() + 1) {
      throw std::runtime_error("results CSV line " + std::to_string(line_number) + " breaks step order");
    }
    TraceStep step;
    step.chosen_index = parse_size(fields[3]);
    step.f_value = parse_double(fields[4]);
    step.inst_regret = parse_double(fields[5]);
    step.cum_regret = parse_double(fields[6]);
    step.simple_regret = parse_double(fields[7]);
    trace.f_star = step.f_value + step.inst_regret;
    trace.steps.push_back(step);
  }
  return traces;
}

void write_summary_csv(std::ostream& out, std::span<const PolicyAggregate> aggregates) {
  out << "policy,t,runs,mean_cum_regret,se_cum_regret,mean_simple_regret,se_simple_regret\n";
  for (const auto& a : aggregates) {
    for (std::size_t t = 0; t < a.per_step.size(); ++t) {
      const auto& p = a.per_step[t];
      out << a.policy << ',' << (t + 1) << ',' << a.runs << ',' << format_double(p.mean_cum) << ','
          << format_double(p.se_cum) << ',' << format_double(p.mean_simple) << ',' << format_double(p.se_simple)
          << '\n';
    }
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw std::runtime_error("failed writing '" + path.string() + "'");
  }
}

}  // namespace

void write_outputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " + ec.message());
  }

  const auto results_path = dir / "results.csv";
  auto results = open_output(results_path);
  results.precision(17);
  write_results_csv(results, result.traces);
  finish(results, results_path);

  const auto summary_path = dir / "summary.csv";
  auto summary = open_output(summary_path);
  write_summary_csv(summary, result.aggregates);
  finish(summary, summary_path);

  nlohmann::json manifest;
  manifest["config"] = to_json(result.config);
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& trace : result.traces) {
    nlohmann::json run{{"policy", trace.policy},          {"seed", trace.seed},
                       {"norm", trace.norm},              {"beta_sqrt", trace.beta_sqrt},
                       {"f_star", trace.f_star},          {"best_index", trace.best_index},
                       {"effective_size", trace.effective_size}};
    if (trace.audit_max_excess) {
      run["audit_max_excess"] = *trace.audit_max_excess;
    }
    runs.push_back(std::move(run));
  }
  manifest["runs"] = std::move(runs);
  const auto manifest_path = dir / "manifest.json";
  auto manifest_out = open_output(manifest_path);
  manifest_out << manifest.dump(2) << '\n';
  finish(manifest_out, manifest_path);

  nlohmann::json objectives = nlohmann::json::array();
  for (const auto& f : result.objectives) {
    objectives.push_back(to_json(f));
  }
  const auto objectives_path = dir / "objectives.json";
  auto objectives_out = open_output(objectives_path);
  objectives_out << objectives.dump() << '\n';
  finish(objectives_out, objectives_path);
}

}  // namespace gpucb
