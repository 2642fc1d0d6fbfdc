#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "nestlog/diagnostics.hpp"
#include "nestlog/simulate.hpp"

using namespace nestlog;

namespace {

std::vector<std::vector<double>> normal_chains(std::size_t count, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::vector<std::vector<double>> chains(count, std::vector<double>(length));
  for (auto& c : chains) {
    for (auto& v : c) v = normal(gen);
  }
  return chains;
}

}  // namespace

TEST_CASE("potential scale reduction") {
  const std::vector<std::vector<double>> constant(3, std::vector<double>(50, 0.7));
  CHECK(gelman_rubin(constant) == 1.0);

  auto iid = normal_chains(4, 5000, 1);
  CHECK(std::fabs(gelman_rubin(iid) - 1.0) < 0.01);

  auto shifted = iid;
  for (auto& v : shifted[0]) v += 5.0;
  CHECK(gelman_rubin(shifted) > 2.0);

  // Affine maps leave the statistic unchanged.
  auto scaled = shifted;
  for (auto& c : scaled) {
    for (auto& v : c) v = 3.0 * v - 7.0;
  }
  CHECK(gelman_rubin(scaled) == doctest::Approx(gelman_rubin(shifted)).epsilon(1e-12));

  // Hand-computed: chains {0,...,9} and {1,...,10}: W = 55/6, B = 5.
  std::vector<std::vector<double>> two(2);
  for (int i = 0; i < 10; ++i) {
    two[0].push_back(i);
    two[1].push_back(i + 1);
  }
  const double W = 55.0 / 6.0;
  CHECK(gelman_rubin(two) == doctest::Approx(std::sqrt((0.9 * W + 0.5) / W)));

  CHECK_THROWS_AS(gelman_rubin(std::vector<std::vector<double>>(1, std::vector<double>(20))), std::invalid_argument);
  CHECK_THROWS_AS(gelman_rubin(std::vector<std::vector<double>>(2, std::vector<double>(5))), std::invalid_argument);
  std::vector<std::vector<double>> ragged{std::vector<double>(20), std::vector<double>(21)};
  CHECK_THROWS_AS(gelman_rubin(ragged), std::invalid_argument);
}

TEST_CASE("running potential scale reduction") {
  const auto chains = normal_chains(3, 105, 2);
  const auto running = gelman_rubin_running(chains, 25);
  REQUIRE(running.size() == 5);
  CHECK(running[0].length == 25);
  CHECK(running[3].length == 100);
  CHECK(running.back().length == 105);
  CHECK(running.back().value == gelman_rubin(chains));
}

TEST_CASE("autocorrelation") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> normal;
  std::vector<double> ar(200000);
  double x = 0.0;
  for (auto& v : ar) v = x = 0.7 * x + normal(gen);
  const auto rho = autocorrelation(ar, 3);
  CHECK(rho[0] == doctest::Approx(1.0));
  CHECK(std::fabs(rho[1] - 0.7) < 0.01);
  CHECK(std::fabs(rho[2] - 0.49) < 0.01);
  CHECK(std::fabs(rho[3] - 0.343) < 0.015);

  std::vector<double> noise(20000);
  for (auto& v : noise) v = normal(gen);
  const auto white = autocorrelation(noise, 10);
  for (std::size_t k = 1; k <= 10; ++k) CHECK(std::fabs(white[k]) < 4.0 / std::sqrt(20000.0));

  auto moved = noise;
  for (auto& v : moved) v += 100.0;
  const auto moved_rho = autocorrelation(moved, 10);
  for (std::size_t k = 0; k <= 10; ++k) CHECK(moved_rho[k] == doctest::Approx(white[k]).epsilon(1e-8));

  const std::vector<double> flat(30, 2.0);
  CHECK(autocorrelation(flat, 2) == std::vector<double>{1.0, 0.0, 0.0});
  CHECK_THROWS_AS(autocorrelation(flat, 30), std::invalid_argument);
}

TEST_CASE("empirical extremal coefficient") {
  Rng rng(4);
  const auto indep = sample_nested_logistic(TwoLayerTree::singletons(3), DependenceParams(1.0, {1, 1, 1}), 20000, rng);
  std::vector<double> values;
  for (std::size_t i = 0; i < indep.rows(); ++i) {
    for (int d = 0; d < 3; ++d) values.push_back(indep(i, 0));
  }
  const MaximaDataset comonotone(indep.rows(), 3, values);
  const std::vector<int> all{1, 2, 3};
  CHECK(std::fabs(empirical_extremal_coefficient(comonotone, all) - 1.0) < 4 * extremal_coefficient_standard_error(1.0, 20000));
  const double theta = empirical_extremal_coefficient(indep, all);
  CHECK(std::fabs(theta - 3.0) < 3 * extremal_coefficient_standard_error(theta, 20000));
  CHECK(extremal_coefficient_standard_error(2.0, 400) == doctest::Approx(0.1));

  const MaximaDataset tiny(2, 2, {1.0, 2.0, 4.0, 0.5});
  const std::vector<int> pair{1, 2};
  CHECK(empirical_extremal_coefficient(tiny, pair) == doctest::Approx(2.0 / (0.5 + 0.25)));
  const std::vector<int> one{1};
  CHECK_THROWS_AS(empirical_extremal_coefficient(tiny, one), std::invalid_argument);
  const std::vector<int> out_of_range{1, 3};
  CHECK_THROWS_AS(empirical_extremal_coefficient(tiny, out_of_range), std::invalid_argument);
}

TEST_CASE("true positive rate per cluster") {
  const auto truth = TwoLayerTree::parse("1,2|3,4");
  auto replicate = [](const std::string& modal) {
    PosteriorSummary s;
    s.trees.push_back({TwoLayerTree::parse(modal), 1.0, 10, {}, {}, {}});
    s.n_records = 10;
    return s;
  };
  const std::vector<PosteriorSummary> reps{replicate("1,2|3,4"), replicate("1,2|3|4"), replicate("1,3|2,4"),
                                           replicate("1,2,3,4")};
  const auto rate = true_positive_rate(reps, truth);
  REQUIRE(rate.size() == 2);
  CHECK(rate[0] == doctest::Approx(0.5));
  CHECK(rate[1] == doctest::Approx(0.25));
}
