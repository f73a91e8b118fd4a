#include "hmmdiv/forward.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "hmmdiv/errors.hpp"

namespace hmmdiv {

namespace {

// Normalizes in place and returns log of the pre-normalization sum.
double normalize_or_throw(Eigen::VectorXd& v, std::size_t t) {
  if ((v.array() < kUnderflowFloor).all())
    throw DegenerateInputError("predictive density underflow at step " +
                               std::to_string(t));
  const double s = v.sum();
  if (!std::isfinite(s))
    throw DegenerateInputError("non-finite predictive density at step " +
                               std::to_string(t));
  v /= s;
  return std::log(s);
}

}  // namespace

ForwardState forward_init(const SwitchingChain& chain, double y1, double y0) {
  const auto d = chain.states();
  ForwardState st;
  st.weights.resize(static_cast<Eigen::Index>(d));
  for (std::size_t k = 0; k < d; ++k)
    st.weights[static_cast<Eigen::Index>(k)] =
        chain.initial()[static_cast<Eigen::Index>(k)] * chain.emission(k, y1, y0);
  st.log_likelihood = normalize_or_throw(st.weights, 1);
  st.t = 1;
  return st;
}

// One filter update in place; returns log s_t.
static double step_in_place(const SwitchingChain& chain, Eigen::VectorXd& weights,
                     Eigen::VectorXd& scratch, double y_t, double y_prev,
                     std::size_t t) {
  const auto d = static_cast<Eigen::Index>(chain.states());
  const Eigen::MatrixXd& p = chain.transition().matrix();
  scratch.resize(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double prior = 0.0;
    for (Eigen::Index s = 0; s < d; ++s) prior += p(s, j) * weights[s];
    scratch[j] = prior * chain.emission(static_cast<std::size_t>(j), y_t, y_prev);
  }
  const double inc = normalize_or_throw(scratch, t);
  weights.swap(scratch);
  return inc;
}

ForwardState forward_step(const SwitchingChain& chain, const ForwardState& state,
                          double y_t, double y_prev) {
  ForwardState next;
  next.weights = state.weights;
  Eigen::VectorXd scratch;
  next.t = state.t + 1;
  next.log_likelihood =
      state.log_likelihood + step_in_place(chain, next.weights, scratch, y_t, y_prev, next.t);
  return next;
}

double log_likelihood(const SwitchingChain& chain, std::span<const double> y,
                      double y0) {
  if (y.empty()) throw DegenerateInputError("log_likelihood needs at least one observation");
  ForwardState st = forward_init(chain, y[0], y0);
  Eigen::VectorXd scratch;
  for (std::size_t t = 1; t < y.size(); ++t)
    st.log_likelihood += step_in_place(chain, st.weights, scratch, y[t], y[t - 1], t + 1);
  return st.log_likelihood;
}

void per_step_log_ratios(const SwitchingChain& p, const SwitchingChain& q,
                         std::span<const double> y, double y0,
                         std::vector<double>& out) {
  out.resize(y.size());
  if (y.empty()) return;
  ForwardState sp = forward_init(p, y[0], y0);
  ForwardState sq = forward_init(q, y[0], y0);
  out[0] = sp.log_likelihood - sq.log_likelihood;
  Eigen::VectorXd scratch;
  for (std::size_t t = 1; t < y.size(); ++t) {
    const double lp = step_in_place(p, sp.weights, scratch, y[t], y[t - 1], t + 1);
    const double lq = step_in_place(q, sq.weights, scratch, y[t], y[t - 1], t + 1);
    out[t] = lp - lq;
  }
}

std::vector<double> per_step_log_ratios(const SwitchingChain& p,
                                        const SwitchingChain& q,
                                        std::span<const double> y, double y0) {
  std::vector<double> out;
  per_step_log_ratios(p, q, y, y0, out);
  return out;
}

double brute_force_log_likelihood(const SwitchingChain& chain,
                                  std::span<const double> y, double y0) {
  const std::size_t d = chain.states();
  const std::size_t n = y.size();
  if (n == 0) throw DegenerateInputError("brute force needs at least one observation");
  std::size_t paths = 1;
  for (std::size_t t = 0; t < n; ++t) {
    if (paths > kBruteForcePathLimit / d)
      throw std::length_error("brute force path count exceeds 2^20");
    paths *= d;
  }

  std::vector<std::size_t> path(n, 0);
  double total = 0.0;
  for (std::size_t code = 0; code < paths; ++code) {
    std::size_t c = code;
    for (std::size_t t = 0; t < n; ++t) {
      path[t] = c % d;
      c /= d;
    }
    double prob = chain.initial()[static_cast<Eigen::Index>(path[0])] *
                  chain.emission(path[0], y[0], y0);
    for (std::size_t t = 1; t < n && prob > 0.0; ++t)
      prob *= chain.transition()(path[t - 1], path[t]) *
              chain.emission(path[t], y[t], y[t - 1]);
    total += prob;
  }
  if (!(total > 0.0)) throw DegenerateInputError("brute force density underflow");
  return std::log(total);
}

Eigen::MatrixXd density_matrix(const SwitchingChain& chain, double y, double y_prev) {
  const auto d = static_cast<Eigen::Index>(chain.states());
  Eigen::MatrixXd m(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    const double f = chain.emission(static_cast<std::size_t>(j), y, y_prev);
    for (Eigen::Index i = 0; i < d; ++i)
      m(j, i) = chain.transition()(static_cast<std::size_t>(i),
                                   static_cast<std::size_t>(j)) * f;
  }
  return m;
}

double matrix_log_likelihood(const SwitchingChain& chain, std::span<const double> y,
                             double y0) {
  if (y.empty()) throw DegenerateInputError("matrix likelihood needs at least one observation");
  const auto d = static_cast<Eigen::Index>(chain.states());
  Eigen::VectorXd first(d);
  for (Eigen::Index k = 0; k < d; ++k)
    first[k] = chain.emission(static_cast<std::size_t>(k), y[0], y0);
  Eigen::VectorXd v = first.asDiagonal() * chain.initial();
  double acc = 0.0;
  for (std::size_t t = 0;; ++t) {
    const double norm = v.lpNorm<1>();
    if (!(norm > 0.0) || !std::isfinite(norm))
      throw DegenerateInputError("matrix product norm underflow at step " +
                                 std::to_string(t + 1));
    acc += std::log(norm);
    v /= norm;
    if (t + 1 == y.size()) break;
    v = density_matrix(chain, y[t + 1], y[t]) * v;
  }
  return acc;
}

}  // namespace hmmdiv
