#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "dragonking/distributions.hpp"
#include "dragonking/dragon_king.hpp"
#include "dragonking/error.hpp"
#include "dragonking/random.hpp"
#include "dragonking/tail_fit.hpp"

namespace dragonking {

enum class Reference { fitted, truth };

inline const char* to_string(Reference r) { return r == Reference::truth ? "true" : "fitted"; }

struct StudyConfig {
  DistributionModel model = Cauchy{};
  TailFamily family = TailFamily::power;
  Reference reference = Reference::fitted;
  TailWindow window{};
  std::size_t n = 1000;
  std::size_t replications = 2000;
  std::vector<double> alphas{0.10, 0.05, 0.01};
  std::size_t rank = 4;
  Seed master_seed{20110101};
  // 0 selects std::thread::hardware_concurrency(). Results never depend on it.
  unsigned threads = 0;
  WeibullFitMethod weibull_method = WeibullFitMethod::probability_space;
};

struct CellResult {
  double alpha = 0.0;
  std::size_t rejections = 0;
  double rate = 0.0;
  double std_error = 0.0;  // sqrt(rate (1 - rate) / completed)
};

struct StudyResult {
  StudyConfig config;
  std::size_t completed = 0;
  std::size_t failed = 0;
  std::string first_failure;  // message of the lowest-indexed failed replication
  std::vector<CellResult> cells;  // one per alpha, in config order
};

// Reference tail implied by the generating law:
//   Cauchy(mu, sigma) -> sigma/pi * x^-1 (right-tail asymptote)
//   Pareto(lambda, alpha) -> exact survival lambda^alpha (x + lambda)^-alpha
//   Weibull(beta, tau) -> exp(-beta x^tau)
inline TailModel true_tail(const DistributionModel& model, TailFamily family) {
  validate(model);
  TailModel tail;
  tail.side = Side::right;
  tail.diagnostics.method = "true";
  const bool ok = std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Cauchy>) {
          if (family != TailFamily::power) return false;
          tail.law = PowerTail{m.sigma / std::numbers::pi, -1.0};
          return true;
        } else if constexpr (std::is_same_v<T, Pareto>) {
          if (family != TailFamily::power) return false;
          tail.law = ParetoSurvival{m.lambda, m.alpha};
          return true;
        } else if constexpr (std::is_same_v<T, Weibull>) {
          if (family != TailFamily::weibull) return false;
          tail.law = WeibullTail{m.beta, m.tau};
          return true;
        } else {
          return false;
        }
      },
      model);
  if (!ok) {
    std::ostringstream msg;
    msg << "true_tail: " << label(model) << " has no closed-form " << to_string(family) << " tail";
    throw config_error(msg.str());
  }
  return tail;
}

inline void validate(const StudyConfig& config) {
  validate(config.model);
  if (config.replications < 1) throw config_error("study: replications must be at least 1");
  if (config.alphas.empty()) throw config_error("study: at least one alpha is required");
  if (config.alphas.size() > 64) throw config_error("study: at most 64 alphas per study");
  for (double a : config.alphas) {
    if (!(a > 0.0 && a < 1.0)) {
      std::ostringstream msg;
      msg << "study: alpha " << a << " is outside (0,1)";
      throw config_error(msg.str());
    }
  }
  if (config.rank < 1 || config.rank > config.n) {
    std::ostringstream msg;
    msg << "study: rank " << config.rank << " is outside 1.." << config.n;
    throw config_error(msg.str());
  }
  if (config.reference == Reference::truth) {
    (void)true_tail(config.model, config.family);
  } else {
    (void)resolve_window(config.n, config.window);
  }
}

namespace detail {

struct ReplicationOutcome {
  std::uint64_t rejected = 0;  // bit j set: rejected at alphas[j]
  bool failed = false;
  std::string failure;
};

inline ReplicationOutcome run_replication(const StudyConfig& config, const Sampler& sampler,
                                          const TailModel* reference, std::size_t r) {
  ReplicationOutcome out;
  try {
    const Sample s(sampler.draw(config.n, derive_seed(config.master_seed, r)));
    TailModel model = reference != nullptr
                          ? *reference
                          : fit_tail(s, config.window, config.family, config.weibull_method);
    model.side = config.window.side;
    const TestConfig test{config.alphas, {config.rank}};
    const auto results = classify(s, model, test);
    for (std::size_t j = 0; j < results.size(); ++j)
      if (results[j].verdict == Verdict::dragon_king) out.rejected |= (std::uint64_t{1} << j);
  } catch (const validation_error& e) {
    out.failed = true;
    out.failure = e.what();
  } catch (const numerical_error& e) {
    out.failed = true;
    out.failure = e.what();
  }
  return out;
}

}  // namespace detail

// One cell of the validation study: R samples, each fitted (or compared with
// the true tail) and tested at the given rank. Replication r always uses
// derive_seed(master, r), and aggregation is a count, so the result is
// identical for any thread count or execution order.
inline StudyResult run_study(const StudyConfig& config) {
  validate(config);
  const Sampler sampler(config.model);
  std::optional<TailModel> reference;
  if (config.reference == Reference::truth) {
    reference = true_tail(config.model, config.family);
    reference->side = config.window.side;
  }
  const TailModel* ref = reference ? &*reference : nullptr;

  const std::size_t reps = config.replications;
  std::vector<detail::ReplicationOutcome> outcomes(reps);
  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                         : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, reps));
  if (threads <= 1) {
    for (std::size_t r = 0; r < reps; ++r) outcomes[r] = detail::run_replication(config, sampler, ref, r);
  } else {
    std::vector<std::jthread> workers;
    workers.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
      workers.emplace_back([&, t] {
        for (std::size_t r = t; r < reps; r += threads)
          outcomes[r] = detail::run_replication(config, sampler, ref, r);
      });
    }
  }

  StudyResult result;
  result.config = config;
  std::vector<std::size_t> counts(config.alphas.size(), 0);
  for (const auto& o : outcomes) {
    if (o.failed) {
      if (result.failed == 0) result.first_failure = o.failure;
      ++result.failed;
      continue;
    }
    ++result.completed;
    for (std::size_t j = 0; j < counts.size(); ++j)
      if (o.rejected & (std::uint64_t{1} << j)) ++counts[j];
  }
  // More than 1% failed replications invalidates the cell.
  if (result.failed * 100 > reps || result.completed == 0) {
    std::ostringstream msg;
    msg << "study " << label(config.model) << ": " << result.failed << " of " << reps
        << " replications failed; first failure: " << result.first_failure;
    throw numerical_error(msg.str());
  }
  for (std::size_t j = 0; j < counts.size(); ++j) {
    CellResult cell;
    cell.alpha = config.alphas[j];
    cell.rejections = counts[j];
    cell.rate = static_cast<double>(counts[j]) / static_cast<double>(result.completed);
    cell.std_error = std::sqrt(cell.rate * (1.0 - cell.rate) / static_cast<double>(result.completed));
    result.cells.push_back(cell);
  }
  return result;
}

inline std::vector<StudyResult> study_grid(std::span<const StudyConfig> configs) {
  if (configs.empty()) throw config_error("study_grid: the grid is empty");
  for (const auto& c : configs) validate(c);
  std::vector<StudyResult> results;
  results.reserve(configs.size());
  for (const auto& c : configs) results.push_back(run_study(c));
  return results;
}

// ---------------------------------------------------------------------------
// Grid presets in the layout of the published validation tables
// ---------------------------------------------------------------------------

struct GridOptions {
  std::size_t replications = 2000;
  Seed master_seed{20110101};
  unsigned threads = 0;
  std::size_t rank = 4;
  std::vector<double> alphas{0.10, 0.05, 0.01};
};

namespace detail {

inline StudyConfig grid_cell(const GridOptions& opt, DistributionModel model, TailFamily family,
                             Reference ref, std::size_t n, TailWindow window) {
  StudyConfig c;
  c.model = std::move(model);
  c.family = family;
  c.reference = ref;
  c.window = window;
  c.n = n;
  c.replications = opt.replications;
  c.alphas = opt.alphas;
  c.rank = opt.rank;
  c.master_seed = opt.master_seed;
  c.threads = opt.threads;
  return c;
}

}  // namespace detail

// Power-law family: Cauchy(0,1) and Pareto(2,1) true + fitted, Hyp(2,1) and
// Weib(1,1/2) fitted; blocks (n=1000, 10%-1%), (n=1000, 25%-2.5%),
// (n=5000, 10%-1%). True-reference cells do not depend on the window and
// appear only in the first and last blocks.
inline std::vector<StudyConfig> power_table_grid(const GridOptions& opt = {}) {
  const TailWindow narrow{0.10, 0.01, Side::right};
  const TailWindow wide{0.25, 0.025, Side::right};
  struct Block {
    std::size_t n;
    TailWindow window;
    bool with_truth;
  };
  const Block blocks[] = {{1000, narrow, true}, {1000, wide, false}, {5000, narrow, true}};
  std::vector<StudyConfig> grid;
  for (const auto& b : blocks) {
    for (const DistributionModel& m : {DistributionModel{Cauchy{0, 1}}, DistributionModel{Pareto{2, 1}}}) {
      if (b.with_truth) grid.push_back(detail::grid_cell(opt, m, TailFamily::power, Reference::truth, b.n, b.window));
      grid.push_back(detail::grid_cell(opt, m, TailFamily::power, Reference::fitted, b.n, b.window));
    }
    grid.push_back(detail::grid_cell(opt, Hyperbolic{2, 1}, TailFamily::power, Reference::fitted, b.n, b.window));
    grid.push_back(detail::grid_cell(opt, Weibull{1, 0.5}, TailFamily::power, Reference::fitted, b.n, b.window));
  }
  return grid;
}

// Stretched-exponential family: Cauchy, Pareto, Hyp fitted, Weib(1,1/2) true +
// fitted; blocks (n=1000, 10%-1%) and (n=1000, 25%-2.5%).
inline std::vector<StudyConfig> weibull_table_grid(const GridOptions& opt = {}) {
  const TailWindow narrow{0.10, 0.01, Side::right};
  const TailWindow wide{0.25, 0.025, Side::right};
  std::vector<StudyConfig> grid;
  for (const auto& [window, with_truth] : {std::pair{narrow, true}, std::pair{wide, false}}) {
    grid.push_back(detail::grid_cell(opt, Cauchy{0, 1}, TailFamily::weibull, Reference::fitted, 1000, window));
    grid.push_back(detail::grid_cell(opt, Pareto{2, 1}, TailFamily::weibull, Reference::fitted, 1000, window));
    grid.push_back(detail::grid_cell(opt, Hyperbolic{2, 1}, TailFamily::weibull, Reference::fitted, 1000, window));
    if (with_truth)
      grid.push_back(detail::grid_cell(opt, Weibull{1, 0.5}, TailFamily::weibull, Reference::truth, 1000, window));
    grid.push_back(detail::grid_cell(opt, Weibull{1, 0.5}, TailFamily::weibull, Reference::fitted, 1000, window));
  }
  return grid;
}

}  // namespace dragonking
