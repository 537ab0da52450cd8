#include "fpanel/mcstudy.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fpanel/errors.hpp"
#include "fpanel/portmanteau.hpp"
#include "fpanel/rng.hpp"
#include "fpanel/stats.hpp"

namespace fpanel {

ConfidenceInterval clopper_pearson(int successes, int trials, double level) {
  if (trials < 1) {
    throw std::invalid_argument("interval needs at least 1 trial, got " +
                                std::to_string(trials));
  }
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("success count " + std::to_string(successes) +
                                " outside [0, " + std::to_string(trials) + "]");
  }
  if (!(level > 0.0 && level < 1.0)) {
    throw std::invalid_argument("confidence level must lie in (0, 1), got " +
                                std::to_string(level));
  }
  const double tail = (1.0 - level) / 2.0;
  const double k = static_cast<double>(successes);
  const double n = static_cast<double>(trials);
  ConfidenceInterval ci;
  ci.lo = (successes == 0) ? 0.0 : beta_quantile(tail, k, n - k + 1.0);
  ci.hi = (successes == trials) ? 1.0 : beta_quantile(1.0 - tail, k + 1.0, n - k);
  return ci;
}

namespace {

// Run fn(r) for r in [0, count) across workers. Any per-index output must
// be written to a preallocated slot indexed by r, which keeps results
// independent of the schedule.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, std::max(count, 1));
  if (workers == 1) {
    for (int r = 0; r < count; ++r) fn(r);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> failures(static_cast<std::size_t>(workers));
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (int r = w; r < count; r += workers) fn(r);
      } catch (...) {
        failures[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

StudyResult run_study(const PanelGenerator& gen, double rho,
                      std::span<const int> h_list, const RunConfig& config,
                      const StudyOptions& opts) {
  config.validate();
  if (h_list.empty()) {
    throw std::invalid_argument("study needs at least one lag horizon");
  }
  int max_h = 0;
  for (int h : h_list) {
    if (h < 1) {
      throw std::invalid_argument("lag horizons must be positive, got " +
                                  std::to_string(h));
    }
    max_h = std::max(max_h, h);
  }
  if (gen.replicates() < max_h + 2) {
    throw InsufficientDataError("horizon " + std::to_string(max_h) +
                                " needs panels of at least " +
                                std::to_string(max_h + 2) + " replicates, got " +
                                std::to_string(gen.replicates()));
  }
  if (!(std::abs(rho) < 1.0)) {
    throw std::invalid_argument("AR coefficient must satisfy |rho| < 1, got " +
                                std::to_string(rho));
  }

  RunConfig per_panel = config;
  per_panel.h_max = max_h;
  const int trials = config.replications;

  // reject[r * h_list.size() + j] for replication r, horizon j.
  std::vector<unsigned char> reject(
      static_cast<std::size_t>(trials) * h_list.size(), 0);
  parallel_for(trials, opts.threads, [&](int r) {
    const std::uint64_t seed_r =
        derive_seed(config.seed, static_cast<std::uint64_t>(r));
    const FunctionalPanel panel = (rho == 0.0)
                                      ? generate_h0_panel(gen, seed_r)
                                      : generate_ar_panel(gen, rho, seed_r);
    const TestReport report = run_test(panel, per_panel);
    for (std::size_t j = 0; j < h_list.size(); ++j) {
      const auto& row =
          report.horizons[static_cast<std::size_t>(h_list[j] - 1)];
      reject[static_cast<std::size_t>(r) * h_list.size() + j] =
          row.reject ? 1 : 0;
    }
  });

  StudyResult result;
  result.series_count = gen.series_count();
  result.replicates_per_panel = gen.replicates();
  result.trials = trials;
  result.rho = rho;
  result.alpha = config.alpha;
  result.interval_level = opts.interval_level;
  result.seed = config.seed;
  result.rows.reserve(h_list.size());
  for (std::size_t j = 0; j < h_list.size(); ++j) {
    int count = 0;
    for (int r = 0; r < trials; ++r) {
      count += reject[static_cast<std::size_t>(r) * h_list.size() + j];
    }
    StudyRow row;
    row.h_max = h_list[j];
    row.rejections = count;
    row.trials = trials;
    row.frequency = static_cast<double>(count) / trials;
    row.interval = clopper_pearson(count, trials, opts.interval_level);
    result.rows.push_back(row);
  }
  return result;
}

} // namespace

StudyResult run_size_study(const PanelGenerator& gen, std::span<const int> h_list,
                           const RunConfig& config, const StudyOptions& opts) {
  return run_study(gen, 0.0, h_list, config, opts);
}

StudyResult run_power_study(const PanelGenerator& gen, double rho,
                            std::span<const int> h_list, const RunConfig& config,
                            const StudyOptions& opts) {
  return run_study(gen, rho, h_list, config, opts);
}

CltSummary clt_check(int dim, int series_length, int h_max, int trials,
                     std::uint64_t seed, int threads) {
  if (dim < 1) {
    throw std::invalid_argument("dimension must be at least 1, got " +
                                std::to_string(dim));
  }
  if (h_max < 1) {
    throw std::invalid_argument("maximum lag must be at least 1, got " +
                                std::to_string(h_max));
  }
  if (series_length < h_max + 2) {
    throw InsufficientDataError("series length " + std::to_string(series_length) +
                                " too short for lag " + std::to_string(h_max));
  }
  if (trials < 1) {
    throw std::invalid_argument("need at least 1 replication, got " +
                                std::to_string(trials));
  }

  const double p = static_cast<double>(dim);
  const double h = static_cast<double>(h_max);
  std::vector<double> zs(static_cast<std::size_t>(trials));
  parallel_for(trials, threads, [&](int r) {
    CounterRng rng(derive_seed(seed, static_cast<std::uint64_t>(r)));
    Eigen::MatrixXd z(series_length, dim);
    for (int n = 0; n < series_length; ++n) {
      for (int j = 0; j < dim; ++j) {
        z(n, j) = rng.next_normal();
      }
    }
    // The covariance is known to be the identity here, so the statistic is
    // just the squared Frobenius norms of the raw lag products, centered
    // and scaled by the limit moments.
    double q = 0.0;
    for (int lag = 1; lag <= h_max; ++lag) {
      const Eigen::MatrixXd a =
          z.topRows(series_length - lag).transpose() * z.bottomRows(series_length - lag);
      q += a.squaredNorm() / static_cast<double>(series_length);
    }
    zs[static_cast<std::size_t>(r)] = (q - p * p * h) / (p * std::sqrt(2.0 * h));
  });

  CltSummary out;
  out.trials = trials;
  double sum = 0.0;
  for (double v : zs) sum += v;
  out.mean = sum / trials;
  if (trials < 2) {
    out.degenerate = true;
    out.sd = 0.0;
    return out;
  }
  double ss = 0.0;
  for (double v : zs) ss += (v - out.mean) * (v - out.mean);
  out.sd = std::sqrt(ss / (trials - 1));

  std::sort(zs.begin(), zs.end());
  double ks = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double cdf = normal_cdf(zs[i]);
    const double lo = static_cast<double>(i) / trials;
    const double hi = static_cast<double>(i + 1) / trials;
    ks = std::max({ks, cdf - lo, hi - cdf});
  }
  out.ks_distance = ks;
  return out;
}

} // namespace fpanel
