#pragma once

// Reference computations written directly from the model definitions, kept
// apart from the library so the tests compare two independent derivations.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "hmmdiv/model.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

inline double npdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * kPi));
}

inline double ncdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// D_alpha(N(m1, s1^2) || N(m2, s2^2)).
inline double gaussian_renyi(double m1, double s1, double m2, double s2, double alpha) {
  const double mix = alpha * s2 * s2 + (1.0 - alpha) * s1 * s1;
  return std::log(s2 / s1) + std::log(s2 * s2 / mix) / (2.0 * (alpha - 1.0)) +
         alpha * (m1 - m2) * (m1 - m2) / (2.0 * mix);
}

inline double gaussian_kl(double m1, double s1, double m2, double s2) {
  return std::log(s2 / s1) + (s1 * s1 + (m1 - m2) * (m1 - m2)) / (2.0 * s2 * s2) - 0.5;
}

// Two-regime stationary law from the balance equation pi0 * p01 = pi1 * p10.
inline std::array<double, 2> stationary2(double p01, double p10) {
  return {p10 / (p01 + p10), p01 / (p01 + p10)};
}

// log of the full hidden-path sum, conditioning on y0 and starting the
// regime chain from its stationary law. Family A sums over (x_1..x_n);
// family B over (x_0..x_n) because the first emission needs X_0.
inline double path_sum_log_likelihood(const hmmdiv::ModelParams& m, std::span<const double> y,
                                      double y0) {
  const std::size_t n = y.size();
  if (const auto* a = std::get_if<hmmdiv::ModelAParams>(&m)) {
    const double p[2][2] = {{a->p00, 1.0 - a->p00}, {1.0 - a->p11, a->p11}};
    const auto pi = stationary2(p[0][1], p[1][0]);
    double total = 0.0;
    for (std::uint64_t path = 0; path < (std::uint64_t{1} << n); ++path) {
      double prob = 1.0, prev_y = y0;
      int prev_x = -1;
      for (std::size_t t = 0; t < n; ++t) {
        const int x = static_cast<int>((path >> t) & 1u);
        prob *= prev_x < 0 ? pi[x] : p[prev_x][x];
        prob *= npdf(y[t], a->mu[x] + a->psi[x] * prev_y, a->sigma[x]);
        prev_x = x;
        prev_y = y[t];
      }
      total += prob;
    }
    return std::log(total);
  }
  const auto& b = std::get<hmmdiv::ModelBParams>(m);
  const double p[2][2] = {{1.0 - b.p01, b.p01}, {b.p10, 1.0 - b.p10}};
  const auto pi = stationary2(b.p01, b.p10);
  double total = 0.0;
  for (std::uint64_t path = 0; path < (std::uint64_t{1} << (n + 1)); ++path) {
    int prev_x = static_cast<int>(path & 1u);
    double prob = pi[prev_x], prev_y = y0;
    for (std::size_t t = 0; t < n; ++t) {
      const int x = static_cast<int>((path >> (t + 1)) & 1u);
      prob *= p[prev_x][x];
      prob *= npdf(y[t], b.psi2 * b.mu[prev_x] + b.psi1 * b.mu[x] + b.phi * prev_y, b.sigma);
      prev_x = x;
      prev_y = y[t];
    }
    total += prob;
  }
  return std::log(total);
}

// One filter update of P(X_t = 0 | data) given P(X_{t-1} = 0 | data) = w,
// written out term by term.
inline double filter_update_a(const hmmdiv::ModelAParams& f, double w, double y, double u) {
  const double r0 = f.p00 * w + (1.0 - f.p11) * (1.0 - w);
  const double r1 = (1.0 - f.p00) * w + f.p11 * (1.0 - w);
  const double c0 = r0 * npdf(y, f.mu[0] + f.psi[0] * u, f.sigma[0]);
  const double c1 = r1 * npdf(y, f.mu[1] + f.psi[1] * u, f.sigma[1]);
  return c0 / (c0 + c1);
}

inline double filter_update_b(const hmmdiv::ModelBParams& f, double w, double y, double u) {
  const double p00 = 1.0 - f.p01, p11 = 1.0 - f.p10;
  auto dens = [&](int i, int j) {
    return npdf(y, f.psi2 * f.mu[i] + f.psi1 * f.mu[j] + f.phi * u, f.sigma);
  };
  const double c00 = w * p00 * dens(0, 0), c01 = w * f.p01 * dens(0, 1);
  const double c10 = (1.0 - w) * f.p10 * dens(1, 0), c11 = (1.0 - w) * p11 * dens(1, 1);
  return (c00 + c10) / (c00 + c01 + c10 + c11);
}

struct Proportion {
  double p;
  std::size_t draws;
};

// Fraction of draws Y ~ N(mean, sd^2) satisfying pred(Y).
template <class Pred>
Proportion simulate(double mean, double sd, std::size_t draws, std::uint64_t seed, Pred pred) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, sd);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < draws; ++i) hits += pred(z(rng)) ? 1 : 0;
  return {static_cast<double>(hits) / static_cast<double>(draws), draws};
}

// Binomial standard error at the hypothesised probability, floored at one
// draw so that exact 0/1 probabilities remain testable.
inline double binomial_se(double q, std::size_t draws) {
  const double m = static_cast<double>(draws);
  return std::sqrt(std::max(q * (1.0 - q), 1.0 / m) / m);
}

}  // namespace oracle
