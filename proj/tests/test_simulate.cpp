#include <doctest.h>

#include <cmath>
#include <vector>

#include "fpanel/errors.hpp"
#include "fpanel/rng.hpp"
#include "fpanel/simulate.hpp"
#include "support/test_helpers.hpp"

using namespace fpanel;
using fpanel::testing::orthonormal_basis;
using fpanel::testing::random_matrix;
using fpanel::testing::small_generator;

namespace {

bool bitwise_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return (a.array() == b.array()).all();
}

bool panels_bitwise_equal(const FunctionalPanel& a, const FunctionalPanel& b) {
  if (a.series_count() != b.series_count()) return false;
  for (int i = 0; i < a.series_count(); ++i) {
    if (!bitwise_equal(a.series(i), b.series(i))) return false;
  }
  return true;
}

// Score of replicate curve x against a quadrature-orthonormal component.
Eigen::VectorXd project_scores(const FunctionalPanel& panel, int series,
                               const Eigen::VectorXd& mean,
                               const Eigen::VectorXd& component) {
  const Eigen::MatrixXd& x = panel.series(series);
  const Eigen::VectorXd w = panel.grid()->weights();
  Eigen::VectorXd out(x.rows());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out[r] = (x.row(r).transpose() - mean).cwiseProduct(w).dot(component);
  }
  return out;
}

} // namespace

TEST_SUITE("simulate") {

TEST_CASE("cross-sectional factor on exact cases") {
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  CHECK((cross_sectional_factor(eye) - eye).cwiseAbs().maxCoeff() < 1e-14);

  Eigen::MatrixXd spd(2, 2);
  spd << 4, 2, 2, 2;
  Eigen::MatrixXd expect(2, 2);
  expect << 2, 0, 1, 1;
  CHECK((cross_sectional_factor(spd) - expect).cwiseAbs().maxCoeff() < 1e-12);

  Eigen::MatrixXd singular = Eigen::MatrixXd::Ones(2, 2);
  Eigen::MatrixXd f = cross_sectional_factor(singular);
  CHECK((f * f.transpose() - singular).cwiseAbs().maxCoeff() < 1e-8);

  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1, 2, 2, 1;
  CHECK_THROWS_AS(cross_sectional_factor(indefinite), StructuralError);
}

TEST_CASE("factor reproduces random positive definite inputs") {
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    CounterRng rng(300 + rep);
    Eigen::MatrixXd a = random_matrix(4, 4, rng);
    Eigen::MatrixXd sigma = a * a.transpose() +
                            0.01 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::MatrixXd f = cross_sectional_factor(sigma);
    CHECK((f * f.transpose() - sigma).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("ar factor at rho zero is the exact identity") {
  ArFactor ar(0.0, 5);
  Eigen::MatrixXd d = ar.dense();
  CHECK(bitwise_equal(d, Eigen::MatrixXd::Identity(5, 5)));
  CounterRng rng(9);
  Eigen::VectorXd z = random_matrix(5, 1, rng);
  Eigen::VectorXd out = ar.apply(z);
  CHECK((out.array() == z.array()).all());
}

TEST_CASE("ar factor rows match the closed form at small sizes") {
  ArFactor ar(0.5, 2);
  Eigen::MatrixXd d = ar.dense();
  CHECK(d(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(d(0, 1) == 0.0);
  CHECK(d(1, 0) == doctest::Approx(0.4472135954999579).epsilon(1e-12));
  CHECK(d(1, 1) == doctest::Approx(0.8944271909999159).epsilon(1e-12));
}

TEST_CASE("ar factor rows have unit norm") {
  for (double rho : {-0.9, -0.3, 0.2, 0.7, 0.95}) {
    ArFactor ar(rho, 40);
    Eigen::MatrixXd d = ar.dense();
    Eigen::VectorXd diag = (d * d.transpose()).diagonal();
    CHECK((diag - Eigen::VectorXd::Ones(40)).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("streaming apply equals the dense product") {
  ArFactor ar(0.7, 50);
  Eigen::MatrixXd d = ar.dense();
  CounterRng rng(21);
  Eigen::VectorXd z = random_matrix(50, 1, rng);
  CHECK((ar.apply(z) - d * z).cwiseAbs().maxCoeff() < 1e-12);
  Eigen::MatrixXd zm = random_matrix(50, 3, rng);
  CHECK((ar.apply_columns(zm) - d * zm).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ar factor validates its parameters") {
  CHECK_THROWS_AS(ArFactor(1.0, 5), std::invalid_argument);
  CHECK_THROWS_AS(ArFactor(-1.2, 5), std::invalid_argument);
  CHECK_THROWS_AS(ArFactor(0.5, 0), std::invalid_argument);
}

TEST_CASE("generator construction validates structure") {
  GridPtr g = make_uniform_grid(8);
  Eigen::MatrixXd basis = orthonormal_basis(*g, 2);
  std::vector<Eigen::VectorXd> means{Eigen::VectorXd::Zero(8)};
  std::vector<Eigen::MatrixXd> comps{basis};
  std::vector<Eigen::MatrixXd> sigma{Eigen::MatrixXd::Identity(1, 1),
                                     Eigen::MatrixXd::Identity(1, 1)};
  CHECK_NOTHROW(PanelGenerator(g, means, comps, sigma, 10));

  std::vector<Eigen::MatrixXd> bad_sigma{Eigen::MatrixXd::Identity(1, 1)};
  CHECK_THROWS_AS(PanelGenerator(g, means, comps, bad_sigma, 10),
                  StructuralError);

  std::vector<Eigen::VectorXd> bad_means{Eigen::VectorXd::Zero(7)};
  CHECK_THROWS_AS(PanelGenerator(g, bad_means, comps, sigma, 10),
                  StructuralError);

  Eigen::MatrixXd asym = Eigen::MatrixXd::Identity(1, 1);
  std::vector<Eigen::MatrixXd> wide_sigma{Eigen::MatrixXd::Ones(2, 2),
                                          Eigen::MatrixXd::Ones(2, 2)};
  CHECK_THROWS_AS(PanelGenerator(g, means, comps, wide_sigma, 10),
                  StructuralError);
}

TEST_CASE("zero score covariance reproduces the mean curves exactly") {
  GridPtr g = make_uniform_grid(10);
  Eigen::MatrixXd basis = orthonormal_basis(*g, 1);
  Eigen::VectorXd mean(10);
  for (int j = 0; j < 10; ++j) mean[j] = 3.0 + 0.1 * j;
  std::vector<Eigen::VectorXd> means{mean};
  std::vector<Eigen::MatrixXd> comps{basis};
  std::vector<Eigen::MatrixXd> sigma{Eigen::MatrixXd::Zero(1, 1)};
  PanelGenerator gen(g, means, comps, sigma, 6);
  FunctionalPanel panel = generate_h0_panel(gen, 77);
  for (int r = 0; r < 6; ++r) {
    CHECK((panel.series(0).row(r).transpose().array() == mean.array()).all());
  }
}

TEST_CASE("generation is deterministic in the seed") {
  PanelGenerator gen = small_generator(30);
  FunctionalPanel a = generate_h0_panel(gen, 123);
  FunctionalPanel b = generate_h0_panel(gen, 123);
  FunctionalPanel c = generate_h0_panel(gen, 124);
  CHECK(panels_bitwise_equal(a, b));
  CHECK_FALSE(panels_bitwise_equal(a, c));
}

TEST_CASE("zero dependence collapses to the null generator bitwise") {
  PanelGenerator gen = small_generator(25);
  FunctionalPanel h0 = generate_h0_panel(gen, 55);
  FunctionalPanel ar0 = generate_ar_panel(gen, 0.0, 55);
  CHECK(panels_bitwise_equal(h0, ar0));
  std::vector<double> rhos(3, 0.0);
  FunctionalPanel ar0v = generate_ar_panel(gen, rhos, 55);
  CHECK(panels_bitwise_equal(h0, ar0v));
}

TEST_CASE("per-component dependence vector is length checked") {
  PanelGenerator gen = small_generator(25);
  std::vector<double> wrong(2, 0.1);
  CHECK_THROWS_AS(generate_ar_panel(gen, wrong, 1), std::invalid_argument);
}

TEST_CASE("temporal dependence preserves marginal score variance") {
  GridPtr g = make_uniform_grid(12);
  Eigen::MatrixXd basis = orthonormal_basis(*g, 1);
  std::vector<Eigen::VectorXd> means{Eigen::VectorXd::Zero(12)};
  std::vector<Eigen::MatrixXd> comps{basis};
  std::vector<Eigen::MatrixXd> sigma{Eigen::MatrixXd::Identity(1, 1)};
  PanelGenerator gen(g, means, comps, sigma, 5000);

  FunctionalPanel h0 = generate_h0_panel(gen, 31);
  FunctionalPanel ar = generate_ar_panel(gen, 0.6, 31);
  Eigen::VectorXd s0 = project_scores(h0, 0, means[0], basis.col(0));
  Eigen::VectorXd s1 = project_scores(ar, 0, means[0], basis.col(0));
  const double v0 = s0.squaredNorm() / s0.size();
  const double v1 = s1.squaredNorm() / s1.size();
  CHECK(v1 == doctest::Approx(v0).epsilon(0.05));
  CHECK(v1 == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("lag-one score autocorrelation tracks the requested value") {
  GridPtr g = make_uniform_grid(12);
  Eigen::MatrixXd basis = orthonormal_basis(*g, 1);
  std::vector<Eigen::VectorXd> means{Eigen::VectorXd::Zero(12)};
  std::vector<Eigen::MatrixXd> comps{basis};
  std::vector<Eigen::MatrixXd> sigma{Eigen::MatrixXd::Identity(1, 1)};
  PanelGenerator gen(g, means, comps, sigma, 5000);
  FunctionalPanel ar = generate_ar_panel(gen, 0.38, 8);
  Eigen::VectorXd s = project_scores(ar, 0, means[0], basis.col(0));
  double c0 = 0.0, c1 = 0.0;
  for (Eigen::Index r = 0; r < s.size(); ++r) c0 += s[r] * s[r];
  for (Eigen::Index r = 0; r + 1 < s.size(); ++r) c1 += s[r] * s[r + 1];
  CHECK(c1 / c0 == doctest::Approx(0.38).epsilon(0.08));
  CHECK(std::abs(c1 / c0 - 0.38) < 0.03);
}

TEST_CASE("estimating a generator from its own output recovers it") {
  GridPtr g = make_uniform_grid(15);
  Eigen::MatrixXd basis = orthonormal_basis(*g, 2);
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> comps;
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd mean(15);
    for (int j = 0; j < 15; ++j) mean[j] = 1.0 + i + 0.2 * j;
    means.push_back(mean);
    comps.push_back(basis);
  }
  Eigen::MatrixXd coupling(2, 2);
  coupling << 1.0, 0.6, 0.6, 1.0;
  std::vector<Eigen::MatrixXd> sigma{4.0 * coupling, 1.0 * coupling};
  PanelGenerator gen(g, means, comps, sigma, 1000);
  FunctionalPanel panel = generate_h0_panel(gen, 404);

  PanelGenerator fit = estimate_generator(panel, 2);
  CHECK(fit.components()[0].cols() == 2);
  for (int i = 0; i < 2; ++i) {
    CHECK((fit.means()[i] - means[i]).cwiseAbs().maxCoeff() < 0.25);
    const Eigen::VectorXd w = g->weights();
    for (int k = 0; k < 2; ++k) {
      const double overlap = std::abs(
          fit.components()[i].col(k).cwiseProduct(w).dot(basis.col(k)));
      CHECK(overlap == doctest::Approx(1.0).epsilon(0.01));
    }
  }
  for (int k = 0; k < 2; ++k) {
    const Eigen::MatrixXd& est = fit.sigma()[k];
    const Eigen::MatrixXd& truth = sigma[k];
    for (int a = 0; a < 2; ++a) {
      CHECK(est(a, a) == doctest::Approx(truth(a, a)).epsilon(0.15));
    }
    CHECK(std::abs(est(0, 1)) ==
          doctest::Approx(std::abs(truth(0, 1))).epsilon(0.20));
  }
}

TEST_CASE("estimation refuses more components than eigenpairs") {
  FunctionalPanel panel = fpanel::testing::random_panel(1, 5, 10, 61);
  CHECK_THROWS_AS(estimate_generator(panel, 6), StructuralError);
  CHECK_NOTHROW(estimate_generator(panel, 5));
  CHECK_THROWS_AS(estimate_generator(panel, 0), std::invalid_argument);
}

TEST_CASE("factor cache matches the covariance inputs") {
  PanelGenerator gen = small_generator(10);
  for (std::size_t k = 0; k < gen.sigma().size(); ++k) {
    const Eigen::MatrixXd& f = gen.factors()[k];
    CHECK((f * f.transpose() - gen.sigma()[k]).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("replicate count can be rebound without touching parameters") {
  PanelGenerator gen = small_generator(10);
  PanelGenerator larger = gen.with_replicates(200);
  CHECK(larger.replicates() == 200);
  CHECK(gen.replicates() == 10);
  CHECK(generator_to_json(gen.with_replicates(200)) ==
        generator_to_json(larger));
}

TEST_CASE("json serialization round-trips exactly") {
  PanelGenerator gen = small_generator(40);
  const std::string text = generator_to_json(gen, 0.25);
  GeneratorConfig parsed = generator_from_json(text);
  CHECK(parsed.rho.has_value());
  CHECK(*parsed.rho == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(generator_to_json(parsed.generator, *parsed.rho) == text);
  FunctionalPanel a = generate_h0_panel(gen, 999);
  FunctionalPanel b = generate_h0_panel(parsed.generator, 999);
  CHECK(panels_bitwise_equal(a, b));

  const std::string no_rho = generator_to_json(gen);
  GeneratorConfig parsed2 = generator_from_json(no_rho);
  CHECK_FALSE(parsed2.rho.has_value());
}

TEST_CASE("json parsing rejects malformed documents") {
  CHECK_THROWS_AS(generator_from_json("not json at all"), StructuralError);
  CHECK_THROWS_AS(generator_from_json("{\"kind\": \"something_else\"}"),
                  StructuralError);
  PanelGenerator gen = small_generator(5);
  std::string text = generator_to_json(gen);
  // Drop a required section and expect a structural complaint.
  auto pos = text.find("\"sigma\"");
  REQUIRE(pos != std::string::npos);
  std::string broken = text.substr(0, pos) + "\"sigma_x\"" +
                       text.substr(pos + 7);
  CHECK_THROWS_AS(generator_from_json(broken), StructuralError);
}

} // TEST_SUITE("simulate")
