#pragma once

// Exact likelihoods of observation sequences under a SwitchingChain.
//
// All routines condition on the observation y0 preceding the sequence and
// start the hidden chain from chain.initial() at the first observation, so
// log_likelihood(y) = log sum_k pi_k f_k(y_1 | y0) + sum_{t>=2} log s_t.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hmmdiv/model.hpp"

namespace hmmdiv {

// Normalized posterior over chain states after t observations together with
// the accumulated log-likelihood.
struct ForwardState {
  Eigen::VectorXd weights;
  double log_likelihood = 0.0;
  std::size_t t = 0;
};

// Every unnormalized weight below this is treated as a total underflow.
inline constexpr double kUnderflowFloor = 1e-300;

ForwardState forward_init(const SwitchingChain& chain, double y1, double y0 = 0.0);

ForwardState forward_step(const SwitchingChain& chain, const ForwardState& state,
                          double y_t, double y_prev);

double log_likelihood(const SwitchingChain& chain, std::span<const double> y,
                      double y0 = 0.0);

// log s_t(p) - log s_t(q) for every t, where s_t is the one-step predictive
// density of y_t given y_1..y_{t-1} (and y0).
std::vector<double> per_step_log_ratios(const SwitchingChain& p,
                                        const SwitchingChain& q,
                                        std::span<const double> y, double y0 = 0.0);

// Same, but writes into a caller-owned buffer (resized to y.size()).
void per_step_log_ratios(const SwitchingChain& p, const SwitchingChain& q,
                         std::span<const double> y, double y0,
                         std::vector<double>& out);

// Sum over every hidden path; exponential cost, used as a test oracle.
inline constexpr std::size_t kBruteForcePathLimit = std::size_t{1} << 20;
double brute_force_log_likelihood(const SwitchingChain& chain,
                                  std::span<const double> y, double y0 = 0.0);

// M_k with entry (j, i) = p_ij * f_j(y_k | y_{k-1}).
Eigen::MatrixXd density_matrix(const SwitchingChain& chain, double y, double y_prev);

// log || M_n ... M_2 M_1 pi || with M_1 = diag(f_k(y_1 | y0)), rescaled at
// every step.
double matrix_log_likelihood(const SwitchingChain& chain, std::span<const double> y,
                             double y0 = 0.0);

}  // namespace hmmdiv
