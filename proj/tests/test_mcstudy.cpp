#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpanel/config.hpp"
#include "fpanel/errors.hpp"
#include "fpanel/mcstudy.hpp"
#include "fpanel/rng.hpp"
#include "support/test_helpers.hpp"

using namespace fpanel;
using fpanel::testing::small_generator;

TEST_SUITE("mcstudy") {

TEST_CASE("interval endpoints match published values") {
  ConfidenceInterval ci = clopper_pearson(55, 1000, 0.95);
  CHECK(ci.lo == doctest::Approx(0.0416988).epsilon(2e-5));
  CHECK(ci.hi == doctest::Approx(0.0709915).epsilon(2e-5));
}

TEST_CASE("interval boundary cases use the closed forms") {
  ConfidenceInterval zero = clopper_pearson(0, 100, 0.95);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(1.0 - std::pow(0.025, 0.01)).epsilon(1e-10));

  ConfidenceInterval full = clopper_pearson(100, 100, 0.95);
  CHECK(full.hi == 1.0);
  CHECK(full.lo == doctest::Approx(std::pow(0.025, 0.01)).epsilon(1e-10));
}

TEST_CASE("interval validates its arguments") {
  CHECK_THROWS_AS(clopper_pearson(5, 4, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(-1, 4, 0.95), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(1, 4, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(1, 4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(clopper_pearson(1, 0, 0.95), std::invalid_argument);
}

TEST_CASE("intervals narrow as trials grow") {
  ConfidenceInterval small_trials = clopper_pearson(5, 100, 0.95);
  ConfidenceInterval big_trials = clopper_pearson(500, 10000, 0.95);
  CHECK(big_trials.hi - big_trials.lo < small_trials.hi - small_trials.lo);
}

TEST_CASE("intervals cover the true rate at least nominally") {
  // 10^4 simulated binomial(200, 0.05) experiments; the interval is exact,
  // so empirical coverage must sit at or above 95 percent.
  CounterRng rng(2026);
  const int experiments = 10000;
  const int n = 200;
  const double p = 0.05;
  int covered = 0;
  for (int e = 0; e < experiments; ++e) {
    int k = 0;
    for (int i = 0; i < n; ++i) {
      if (rng.next_uniform() < p) ++k;
    }
    ConfidenceInterval ci = clopper_pearson(k, n, 0.95);
    if (ci.lo <= p && p <= ci.hi) ++covered;
  }
  CHECK(static_cast<double>(covered) / experiments >= 0.95);
}

TEST_CASE("null rejection rate stays inside the exact binomial band") {
  // 1000 independent null panels tested at level 0.05: the rejection count
  // lies in [33, 68], the central 99 percent band of binomial(1000, 0.05).
  PanelGenerator gen = small_generator(120);
  RunConfig config;
  config.h_max = 3;
  config.seed = 7001;
  config.replications = 1000;
  std::vector<int> h_list{3};
  StudyResult res = run_size_study(gen, h_list, config);
  REQUIRE(res.rows.size() == 1);
  CHECK(res.rows[0].trials == 1000);
  CHECK(res.rows[0].rejections >= 33);
  CHECK(res.rows[0].rejections <= 68);
  CHECK(res.rows[0].frequency ==
        doctest::Approx(res.rows[0].rejections / 1000.0).epsilon(1e-12));
  CHECK(res.rows[0].interval.lo <= res.rows[0].frequency);
  CHECK(res.rows[0].interval.hi >= res.rows[0].frequency);
}

TEST_CASE("studies are deterministic and thread-count invariant") {
  PanelGenerator gen = small_generator(60);
  RunConfig config;
  config.h_max = 3;
  config.seed = 42;
  config.replications = 50;
  std::vector<int> h_list{1, 3};
  StudyOptions serial;
  serial.threads = 1;
  StudyOptions parallel;
  parallel.threads = 4;
  StudyResult a = run_size_study(gen, h_list, config, serial);
  StudyResult b = run_size_study(gen, h_list, config, parallel);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t j = 0; j < a.rows.size(); ++j) {
    CHECK(a.rows[j].rejections == b.rows[j].rejections);
  }
}

TEST_CASE("zero dependence power equals size replication by replication") {
  PanelGenerator gen = small_generator(60);
  RunConfig config;
  config.h_max = 2;
  config.seed = 99;
  config.replications = 40;
  std::vector<int> h_list{1, 2};
  StudyResult size_res = run_size_study(gen, h_list, config);
  StudyResult power_res = run_power_study(gen, 0.0, h_list, config);
  for (std::size_t j = 0; j < size_res.rows.size(); ++j) {
    CHECK(size_res.rows[j].rejections == power_res.rows[j].rejections);
  }
}

TEST_CASE("horizon list subsets reuse the same replication stream") {
  PanelGenerator gen = small_generator(60);
  RunConfig config;
  config.h_max = 4;
  config.seed = 17;
  config.replications = 30;
  std::vector<int> both{2, 4};
  std::vector<int> only{4};
  StudyResult a = run_size_study(gen, both, config);
  StudyResult b = run_size_study(gen, only, config);
  CHECK(a.rows[1].rejections == b.rows[0].rejections);
}

TEST_CASE("power grows with dependence strength and panel length") {
  PanelGenerator gen_short = small_generator(60);
  PanelGenerator gen_long = small_generator(120);
  RunConfig config;
  config.h_max = 3;
  config.seed = 1234;
  config.replications = 500;
  std::vector<int> h_list{3};
  StudyResult weak = run_power_study(gen_short, 0.2, h_list, config);
  StudyResult strong = run_power_study(gen_short, 0.4, h_list, config);
  CHECK(strong.rows[0].rejections >= weak.rows[0].rejections);
  StudyResult longer = run_power_study(gen_long, 0.38, h_list, config);
  StudyResult shorter = run_power_study(gen_short, 0.38, h_list, config);
  CHECK(longer.rows[0].rejections >= shorter.rows[0].rejections);
  CHECK(strong.rows[0].frequency > 0.3);
}

TEST_CASE("an extreme level drives rejections to zero") {
  PanelGenerator gen = small_generator(60);
  RunConfig config;
  config.h_max = 2;
  config.seed = 5;
  config.replications = 50;
  config.alpha = 1e-10;
  std::vector<int> h_list{2};
  StudyResult res = run_size_study(gen, h_list, config);
  CHECK(res.rows[0].rejections == 0);
}

TEST_CASE("studies validate their inputs") {
  PanelGenerator gen = small_generator(10);
  RunConfig config;
  config.h_max = 9;
  config.replications = 5;
  std::vector<int> h_list{9};
  CHECK_THROWS_AS(run_size_study(gen, h_list, config), InsufficientDataError);

  RunConfig ok = config;
  ok.h_max = 3;
  std::vector<int> empty;
  CHECK_THROWS_AS(run_size_study(gen, empty, ok), std::invalid_argument);
  std::vector<int> bad{0};
  CHECK_THROWS_AS(run_size_study(gen, bad, ok), std::invalid_argument);
  std::vector<int> lst{2};
  CHECK_THROWS_AS(run_power_study(gen, 1.0, lst, ok), std::invalid_argument);
}

TEST_CASE("study metadata reflects the request") {
  PanelGenerator gen = small_generator(60);
  RunConfig config;
  config.h_max = 2;
  config.seed = 321;
  config.replications = 20;
  std::vector<int> h_list{1, 2};
  StudyResult res = run_power_study(gen, 0.3, h_list, config);
  CHECK(res.series_count == 2);
  CHECK(res.replicates_per_panel == 60);
  CHECK(res.trials == 20);
  CHECK(res.rho == doctest::Approx(0.3));
  CHECK(res.alpha == doctest::Approx(0.05));
  CHECK(res.seed == 321);
  CHECK(res.rows.size() == 2);
  CHECK(res.rows[0].h_max == 1);
  CHECK(res.rows[1].h_max == 2);
}

TEST_CASE("normal limit check behaves at scale and in degeneracy") {
  CltSummary one = clt_check(2, 50, 1, 1, 11);
  CHECK(one.degenerate);
  CHECK(one.trials == 1);
  CHECK(one.sd == 0.0);
  CHECK_FALSE(one.ks_distance.has_value());

  CltSummary big = clt_check(1, 5000, 1, 2000, 2027);
  CHECK_FALSE(big.degenerate);
  CHECK(std::abs(big.mean) < 0.1);
  CHECK(big.sd > 0.9);
  CHECK(big.sd < 1.1);
  REQUIRE(big.ks_distance.has_value());

  CltSummary mid = clt_check(4, 500, 3, 500, 77);
  CHECK(std::abs(mid.mean) < 0.15);
  CHECK(mid.sd > 0.85);
  CHECK(mid.sd < 1.15);
  REQUIRE(mid.ks_distance.has_value());
  CHECK(*mid.ks_distance < 0.08);

  CltSummary again = clt_check(4, 500, 3, 500, 77);
  CHECK(again.mean == mid.mean);
  CHECK(again.sd == mid.sd);

  CHECK_THROWS_AS(clt_check(0, 100, 1, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(clt_check(2, 100, 99, 10, 1), InsufficientDataError);
  CHECK_THROWS_AS(clt_check(2, 100, 0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(clt_check(2, 100, 1, 0, 1), std::invalid_argument);
}

} // TEST_SUITE("mcstudy")
