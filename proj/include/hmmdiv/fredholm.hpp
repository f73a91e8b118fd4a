#pragma once

// Deterministic divergence rates through the invariant law of the prediction
// filter.
//
// The filter weight W_t = P(X_t = 0 | Y_1..Y_t) together with the regime
// component and the previous observation forms a Markov chain. Its stationary
// density m_c(u, x) (component c, Y_{t-1} = u, W_t = x) solves a
// two-dimensional Fredholm equation of the second kind,
//
//   m_t(u, x) = sum_s T(s, t) int int f_s(u | v) d/dx Q_t(x; u, w) m_s(v, w) dv dw,
//
// where T is the generating chain's component transition, f_s the regime
// density of the source component, and Q_t(x; u, w) = P(W_t <= x | ...).
// Family A has two components (the regime); family B has four (the regime
// pair). The equation is collocated on an interior tensor lattice and the
// Perron vector of the resulting column-stochastic matrix is the discrete
// invariant density.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hmmdiv/model.hpp"

namespace hmmdiv {

struct GridSpec {
  int N = 16;             // lattice intervals per axis
  double a = 15.0;        // observation axis truncated to [-a, a]
  int quad_points = 201;  // Simpson nodes per axis for the inner integrals

  void validate() const;
  int interior() const { return N - 1; }
  double delta() const { return 1.0 / (2.0 * N); }
  double v_step() const { return 2.0 * a / N; }
  double cell_area() const { return v_step() / N; }
  // i = 1 .. N-1
  double v_node(int i) const { return -a + 2.0 * a * i / N; }
  double x_node(int i) const { return static_cast<double>(i) / N; }

  bool operator==(const GridSpec&) const = default;
};

// P(chi^2_1(lambda) <= x) = Phi(sqrt(x) - sqrt(lambda)) - Phi(-sqrt(x) - sqrt(lambda)).
double noncentral_chisq1_cdf(double x, double lambda);

// z(w, x): the threshold on g0/g1 equivalent to W_t <= x for a two-regime
// filter with transition probabilities of `filt` and prior weight w.
double filter_threshold(const ModelAParams& filt, double w, double x);

// Q_j(u, z) = P(g(Y|0,u) / g(Y|1,u) <= z) with the ratio under `filt` and
// Y ~ regime j of `gen` given Y_{t-1} = u. Closed form via the noncentral
// chi-square law; z <= 0 gives 0 because the ratio is strictly positive.
double q_two_state(double u, double z, int j, const ModelAParams& gen,
                   const ModelAParams& filt);

// Q_jk(x; u, w) = P(W_t <= x | X_{t-1} = j, X_t = k, Y_{t-1} = u,
// W_{t-1} = w) for family B, with Y_t drawn from regime pair (j, k) of `gen`.
double q_four_state(double x, double u, double w, int j, int k,
                    const ModelBParams& gen, const ModelBParams& filt);

struct KernelMatrix {
  int components = 0;
  GridSpec grid;
  Eigen::MatrixXd entries;            // column-normalized
  Eigen::VectorXd pre_norm_col_sums;  // before normalization

  Eigen::Index dim() const { return entries.rows(); }
  // iu, ix are 0-based interior indices (lattice index minus one).
  Eigen::Index index(int component, int iu, int ix) const;
  double max_column_deviation() const;
};

// Columns with a pre-normalization sum outside this band are rejected.
inline constexpr double kMinColumnSum = 0.5;
inline constexpr double kMaxColumnSum = 1.5;

KernelMatrix build_kernel(const ModelAParams& gen, const ModelAParams& filt,
                          const GridSpec& grid);
KernelMatrix build_kernel(const ModelBParams& gen, const ModelBParams& filt,
                          const GridSpec& grid);

struct InvariantDensityGrid {
  int components = 0;
  GridSpec grid;
  Eigen::VectorXd density;  // same ordering as KernelMatrix::index
  double cell_area = 0.0;
  double eigen_residual = 0.0;
  std::size_t iterations = 0;

  double at(int component, int iu, int ix) const;
  double total_mass() const { return density.sum() * cell_area; }
};

InvariantDensityGrid solve_invariant(const KernelMatrix& k, double tol = 1e-12,
                                     std::size_t max_iters = 100000);

// J^alpha with numerator under theta1 (the generating model) and denominator
// under theta, both driven by the filter weight whose invariant law is m.
double j_alpha(const ModelAParams& theta1, const ModelAParams& theta, double alpha,
               const InvariantDensityGrid& m, const GridSpec& grid);
double j_alpha(const ModelBParams& theta1, const ModelBParams& theta, double alpha,
               const InvariantDensityGrid& m, const GridSpec& grid);

// E[log predictive density under `filt`] with data from `gen`; m must be the
// invariant law of the `filt` filter.
double j_log(const ModelAParams& filt, const ModelAParams& gen,
             const InvariantDensityGrid& m, const GridSpec& grid);
double j_log(const ModelBParams& filt, const ModelBParams& gen,
             const InvariantDensityGrid& m, const GridSpec& grid);

struct FredholmDiagnostics {
  double eigen_residual = 0.0;
  double max_column_deviation = 0.0;
  std::size_t iterations = 0;
  GridSpec grid;
  double seconds = 0.0;
};

struct DivergenceResult {
  double alpha = 1.0;
  double value = 0.0;
  std::string method = "fredholm";
  FredholmDiagnostics diagnostics;
};

// Renyi order alpha, or the KL rate when routes_to_kl(alpha). theta1 is the
// generating model. Both models must be of the same family.
DivergenceResult divergence_fredholm(const ModelParams& theta1, const ModelParams& theta,
                                     double alpha, const GridSpec& grid);

// Same for several orders; kernels and invariant densities are shared.
std::vector<DivergenceResult> divergence_fredholm_grid(const ModelParams& theta1,
                                                       const ModelParams& theta,
                                                       std::span<const double> alphas,
                                                       const GridSpec& grid);

}  // namespace hmmdiv
