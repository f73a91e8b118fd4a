#include <doctest.h>

#include <cmath>
#include <random>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/forward.hpp"
#include "oracles.hpp"

using namespace hmmdiv;

namespace {

const ModelBParams kCase1{0.41, 0.6, {1.0, 0.0}, 0.0, 1.0, 0.0, 2.0};

// Regimes with zero slope whose density at y = 0 equals the given value.
SwitchingChain peaked_chain(const TransitionMatrix& t, Eigen::VectorXd pi,
                            const std::vector<double>& peak) {
  std::vector<GaussianRegime> regimes;
  for (double f : peak) regimes.push_back({0.0, 0.0, 1.0 / (f * std::sqrt(2.0 * oracle::kPi))});
  return SwitchingChain(t, std::move(pi), regimes);
}

ModelParams random_model(std::mt19937_64& rng, bool four_state) {
  std::uniform_real_distribution<double> prob(0.05, 0.95), mean(-2.0, 2.0), coef(-0.8, 0.8),
      sd(0.4, 2.0);
  if (four_state)
    return ModelBParams{prob(rng), prob(rng), {mean(rng), mean(rng)}, coef(rng),
                        coef(rng), coef(rng),  sd(rng)};
  ModelAParams a;
  a.p00 = prob(rng);
  a.p11 = prob(rng);
  a.mu = {mean(rng), mean(rng)};
  a.psi = {coef(rng), coef(rng)};
  a.sigma = {sd(rng), sd(rng)};
  return a;
}

}  // namespace

TEST_CASE("forward_init with equal emissions keeps the prior") {
  Eigen::VectorXd pi(2);
  pi << 0.3, 0.7;
  const auto chain = peaked_chain(TransitionMatrix::two_state(0.2, 0.4), pi, {0.25, 0.25});
  const auto s = forward_init(chain, 0.0);
  CHECK(s.weights[0] == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(s.log_likelihood == doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("forward_init hand case") {
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  const auto chain = peaked_chain(TransitionMatrix::two_state(0.2, 0.2), pi, {0.3, 0.1});
  const auto s = forward_init(chain, 0.0);
  CHECK(s.weights[0] == doctest::Approx(0.75).epsilon(1e-13));
  CHECK(s.weights[1] == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(s.log_likelihood == doctest::Approx(std::log(0.2)).epsilon(1e-13));
  CHECK(s.t == 1);
}

TEST_CASE("forward_step hand case") {
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  const double c = 0.2;
  const auto chain = peaked_chain(TransitionMatrix::two_state(0.2, 0.2), pi, {c, c});
  ForwardState s;
  s.weights = Eigen::Vector2d(0.75, 0.25);
  s.t = 1;
  const auto next = forward_step(chain, s, 0.0, 0.0);
  CHECK(next.weights[0] == doctest::Approx(0.65).epsilon(1e-13));
  CHECK(next.weights[1] == doctest::Approx(0.35).epsilon(1e-13));
  CHECK(next.log_likelihood == doctest::Approx(std::log(c)).epsilon(1e-13));
  CHECK(next.t == 2);
}

TEST_CASE("case 1 lift, single observation") {
  const auto chain = to_chain(kCase1);
  const std::vector<double> y{0.7};
  const double f = forward_init(chain, 0.7).log_likelihood;
  CHECK(std::abs(f - brute_force_log_likelihood(chain, y)) < 1e-12);
  CHECK(std::abs(f - oracle::path_sum_log_likelihood(kCase1, y, 0.0)) < 1e-12);
  CHECK(std::abs(f - matrix_log_likelihood(chain, y)) < 1e-12);
}

TEST_CASE("identical models step identically; weights stay normalized") {
  const auto p = to_chain(kCase1), q = to_chain(kCase1);
  const auto path = sample_path(p, 200, 10, 9);
  auto a = forward_init(p, path.y[0], path.y0), b = forward_init(q, path.y[0], path.y0);
  for (std::size_t t = 1; t < path.y.size(); ++t) {
    a = forward_step(p, a, path.y[t], path.y[t - 1]);
    b = forward_step(q, b, path.y[t], path.y[t - 1]);
    CHECK(a.weights == b.weights);
    CHECK(std::abs(a.weights.sum() - 1.0) < 1e-12);
    CHECK(a.weights.minCoeff() >= 0.0);
    CHECK(a.weights.maxCoeff() <= 1.0);
  }
}

TEST_CASE("oracle equivalence on randomized instances") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 8);
  std::uniform_real_distribution<double> obs(-3.0, 3.0);
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const bool four = i % 2 == 1;
    const ModelParams m = random_model(rng, four);
    const auto chain = to_chain(m);
    std::vector<double> y(static_cast<std::size_t>(len(rng)));
    for (auto& v : y) v = obs(rng);
    const double y0 = obs(rng);
    const double oracle_value = oracle::path_sum_log_likelihood(m, y, y0);
    const double f = log_likelihood(chain, y, y0);
    const double bf = brute_force_log_likelihood(chain, y, y0);
    const double mx = matrix_log_likelihood(chain, y, y0);
    worst = std::max({worst, std::abs(f - bf), std::abs(mx - bf), std::abs(f - oracle_value)});
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("degenerate i.i.d. model reduces to a Gaussian sum") {
  const ModelBParams iid{0.4, 0.59, {1.0, 1.0}, 0.0, 1.0, 0.0, 0.7};
  const auto chain = to_chain(iid);
  const auto path = sample_path(chain, 100, 0, 5);
  double expected = 0.0;
  for (double v : path.y) expected += std::log(oracle::npdf(v, 1.0, 0.7));
  CHECK(log_likelihood(chain, path.y, path.y0) == doctest::Approx(expected).epsilon(1e-12));

  const ModelBParams other{0.3, 0.5, {2.0, 2.0}, 0.0, 1.0, 0.0, 1.1};
  const auto r = per_step_log_ratios(chain, to_chain(other), path.y, path.y0);
  for (std::size_t t = 0; t < r.size(); ++t) {
    const double direct =
        std::log(oracle::npdf(path.y[t], 1.0, 0.7)) - std::log(oracle::npdf(path.y[t], 2.0, 1.1));
    CHECK(r[t] == doctest::Approx(direct).epsilon(1e-10));
  }
}

TEST_CASE("ratio identity") {
  const auto p = to_chain(kCase1);
  const auto q = to_chain(ModelBParams{0.41, 0.6, {2.0, 1.0}, 0.0, 1.0, 0.0, 1.5});
  const auto path = sample_path(p, 2000, 100, 17);
  const auto r = per_step_log_ratios(p, q, path.y, path.y0);
  double sum = 0.0;
  for (double v : r) sum += v;
  const double diff = log_likelihood(p, path.y, path.y0) - log_likelihood(q, path.y, path.y0);
  CHECK(std::abs(sum - diff) <= 1e-12 * std::max(1.0, std::abs(diff)));

  const auto same = per_step_log_ratios(p, p, path.y, path.y0);
  for (double v : same) CHECK(v == 0.0);
}

TEST_CASE("matrix form agrees on longer case 1 data") {
  const auto chain = to_chain(kCase1);
  const auto path = sample_path(chain, 50, 10, 21);
  CHECK(std::abs(matrix_log_likelihood(chain, path.y, path.y0) -
                 log_likelihood(chain, path.y, path.y0)) < 1e-9);
  const Eigen::MatrixXd m = density_matrix(chain, 0.3, -0.2);
  CHECK(m(1, 0) == doctest::Approx(chain.transition()(0, 1) * chain.emission(1, 0.3, -0.2)));
  CHECK(m.minCoeff() >= 0.0);
}

TEST_CASE("long sequences stay finite") {
  const ModelBParams cases[] = {kCase1, {0.599, 0.4, {2, 1}, 0.3, 1, 0, 1.1},
                                {0.4, 0.59, {2, 1}, 0.1, 1, 0.1, 1.0}};
  for (const auto& m : cases) {
    const auto chain = to_chain(m);
    const auto path = sample_path(chain, 100000, 100, 1);
    CHECK(std::isfinite(log_likelihood(chain, path.y, path.y0)));
  }
}

TEST_CASE("four-state chain with psi2 = 0 equals the two-state model") {
  const ModelBParams b{0.3, 0.45, {1.2, -0.4}, 0.25, 0.9, 0.0, 1.3};
  const auto a = reduce_to_family_a(b);
  REQUIRE(a);
  const auto path = sample_path(ModelParams{b}, 500, 50, 77);
  CHECK(std::abs(log_likelihood(to_chain(b), path.y, path.y0) -
                 log_likelihood(to_chain(*a), path.y, path.y0)) < 1e-10);
}

TEST_CASE("degenerate single-state chain") {
  Eigen::MatrixXd one(1, 1);
  one << 1.0;
  const SwitchingChain chain(TransitionMatrix(one), Eigen::VectorXd::Ones(1),
                             {GaussianRegime{0.5, 0.3, 1.2}});
  const std::vector<double> y{0.1, -0.4, 1.3};
  double expected = 0.0, prev = 0.2;
  for (double v : y) {
    expected += std::log(oracle::npdf(v, 0.5 + 0.3 * prev, 1.2));
    prev = v;
  }
  CHECK(brute_force_log_likelihood(chain, y, 0.2) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("error paths") {
  Eigen::VectorXd pi(2);
  pi << 0.5, 0.5;
  const SwitchingChain narrow(TransitionMatrix::two_state(0.3, 0.3), pi,
                              {GaussianRegime{0.0, 0.0, 0.01}, GaussianRegime{0.0, 0.0, 0.01}});
  CHECK_THROWS_AS(forward_init(narrow, 50.0), DegenerateInputError);
  const std::vector<double> y{0.0, 50.0};
  CHECK_THROWS_AS(log_likelihood(narrow, y), DegenerateInputError);

  const std::vector<double> too_long(25, 0.0);
  CHECK_THROWS_AS(brute_force_log_likelihood(to_chain(kCase1), too_long), std::length_error);
}
