#pragma once

// Two-regime Markov switching autoregressions and the common d-state view
// used by the likelihood, simulation and divergence code.
//
// Family A: Y_t = mu[X_t] + psi[X_t] * Y_{t-1} + sigma[X_t] * eps_t
// Family B: Y_t = psi1 * mu[X_t] + psi2 * mu[X_{t-1}] + phi * Y_{t-1} + sigma * eps_t
//
// Family B depends on the pair (X_{t-1}, X_t), so it is carried as a
// first-order chain on four pair-states ordered (0,0), (0,1), (1,0), (1,1).

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace hmmdiv {

struct ModelAParams {
  double p00 = 0.5;
  double p11 = 0.5;
  std::array<double, 2> mu{0.0, 0.0};
  std::array<double, 2> psi{0.0, 0.0};
  std::array<double, 2> sigma{1.0, 1.0};

  bool operator==(const ModelAParams&) const = default;
};

// Field order follows the conventional (p01, p10, mu, phi, psi1, psi2, sigma).
struct ModelBParams {
  double p01 = 0.5;
  double p10 = 0.5;
  std::array<double, 2> mu{0.0, 0.0};
  double phi = 0.0;
  double psi1 = 1.0;
  double psi2 = 0.0;
  double sigma = 1.0;

  bool operator==(const ModelBParams&) const = default;
};

using ModelParams = std::variant<ModelAParams, ModelBParams>;

enum class Family { A, B };

Family family_of(const ModelParams& m);
std::string to_string(Family f);

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate_model(const ModelAParams& m);
ValidationReport validate_model(const ModelBParams& m);
ValidationReport validate_model(const ModelParams& m);

// Throws InvalidModelError listing every violation.
void require_valid(const ModelParams& m);

// Row-stochastic matrix; rows are the "from" state.
class TransitionMatrix {
 public:
  static constexpr double kRowTolerance = 1e-12;

  explicit TransitionMatrix(Eigen::MatrixXd p);
  static TransitionMatrix two_state(double p01, double p10);

  std::size_t size() const { return static_cast<std::size_t>(p_.rows()); }
  double operator()(std::size_t from, std::size_t to) const {
    return p_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
  }
  const Eigen::MatrixXd& matrix() const { return p_; }

 private:
  Eigen::MatrixXd p_;
};

// Left Perron vector by power iteration on the transposed matrix.
// Throws NonConvergenceError when the chain is periodic or reducible enough
// that the iteration does not settle within max_iters.
Eigen::VectorXd stationary_distribution(const TransitionMatrix& t,
                                        double tol = 1e-15,
                                        std::size_t max_iters = 100000);

struct FourStateChain {
  TransitionMatrix transition;
  Eigen::Vector4d pi;
  ModelBParams parent;
};

FourStateChain lift_four_state(const ModelBParams& m);

// Pair-state index for (X_{t-1}, X_t).
constexpr int pair_state(int prev, int cur) { return 2 * prev + cur; }

double normal_pdf(double y, double mean, double sd);
double normal_log_pdf(double y, double mean, double sd);
double normal_cdf(double x);

// f(y | X_{t-1} = prev, X_t = cur, Y_{t-1} = y_prev). Family A ignores prev.
double emission_density(const ModelParams& m, int prev, int cur, double y,
                        double y_prev);

// Conditional mean of Y_t given the regime pair and Y_{t-1}.
double emission_mean(const ModelAParams& m, int cur, double y_prev);
double emission_mean(const ModelBParams& m, int prev, int cur, double y_prev);

struct GaussianRegime {
  double intercept = 0.0;
  double slope = 0.0;
  double sd = 1.0;

  double mean(double y_prev) const { return intercept + slope * y_prev; }
};

// d-state first-order chain whose state k emits N(intercept_k + slope_k *
// y_prev, sd_k^2). Immutable once built.
class SwitchingChain {
 public:
  SwitchingChain(TransitionMatrix transition, Eigen::VectorXd initial,
                 std::vector<GaussianRegime> regimes,
                 std::vector<int> observed_state = {});

  std::size_t states() const { return regimes_.size(); }
  const TransitionMatrix& transition() const { return transition_; }
  const Eigen::VectorXd& initial() const { return initial_; }
  const GaussianRegime& regime(std::size_t k) const { return regimes_[k]; }

  double emission(std::size_t k, double y, double y_prev) const;
  double log_emission(std::size_t k, double y, double y_prev) const;

  // Label reported for chain state k in sampled paths (the native regime
  // X_t for a lifted chain).
  int observed_state(std::size_t k) const { return observed_[k]; }

 private:
  TransitionMatrix transition_;
  Eigen::VectorXd initial_;
  std::vector<GaussianRegime> regimes_;
  std::vector<int> observed_;
};

SwitchingChain to_chain(const ModelAParams& m);
SwitchingChain to_chain(const ModelBParams& m);
SwitchingChain to_chain(const ModelParams& m);

// Family B with psi2 == 0 is family A with shared sigma and slope phi.
std::optional<ModelAParams> reduce_to_family_a(const ModelBParams& m);

struct PathSample {
  std::vector<double> y;
  std::vector<int> x;
  double y0 = 0.0;  // observation preceding y[0]; likelihoods condition on it
  std::uint64_t seed = 0;
  std::size_t burn_in = 0;

  bool operator==(const PathSample&) const = default;
};

// X_0 ~ initial distribution, Y_0 = 0, then burn_in steps are discarded and
// n are kept. Pure function of its arguments.
PathSample sample_path(const SwitchingChain& chain, std::size_t n,
                       std::size_t burn_in, std::uint64_t seed);
PathSample sample_path(const ModelParams& m, std::size_t n, std::size_t burn_in,
                       std::uint64_t seed);

}  // namespace hmmdiv
