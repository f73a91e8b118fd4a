#pragma once

// Simulation estimators of the Kullback-Leibler and Renyi divergence rates
// D(p || q). Paths are drawn under p; both filters run on each path.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hmmdiv/model.hpp"

namespace hmmdiv {

struct McConfig {
  std::size_t n = 2000;
  std::size_t reps = 100;
  std::size_t burn_in = 100;
  std::uint64_t seed = 20240611;

  void validate() const;
  bool operator==(const McConfig&) const = default;
};

// Order alpha == 1 stands for the KL rate; anything within kKlBand of 1 is
// evaluated as KL.
inline constexpr double kKlAlpha = 1.0;
inline constexpr double kKlBand = 1e-8;
inline bool routes_to_kl(double alpha) { return std::abs(alpha - 1.0) < kKlBand; }

struct DivergenceEstimate {
  double alpha = kKlAlpha;
  double mean = 0.0;
  double std_dev = 0.0;  // sample standard deviation across replications
  std::size_t reps = 0;
  std::string method = "monte-carlo";
};

// Independent, reproducible per-replication seed.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replication);

// (1/n) sum_t log r_t.
double kl_statistic(std::span<const double> log_ratios);

// log((1/n) sum_t r_t^(alpha-1)) / (alpha-1), aggregated in the log domain.
// Falls back to kl_statistic when routes_to_kl(alpha).
double renyi_statistic(std::span<const double> log_ratios, double alpha);

DivergenceEstimate estimate_kl_mc(const SwitchingChain& p, const SwitchingChain& q,
                                  const McConfig& cfg);
DivergenceEstimate estimate_renyi_mc(const SwitchingChain& p, const SwitchingChain& q,
                                     double alpha, const McConfig& cfg);

// Every alpha evaluated on the same replicated paths.
std::vector<DivergenceEstimate> estimate_mc_grid(const SwitchingChain& p,
                                                 const SwitchingChain& q,
                                                 std::span<const double> alphas,
                                                 const McConfig& cfg);

DivergenceEstimate estimate_kl_mc(const ModelParams& p, const ModelParams& q,
                                  const McConfig& cfg);
DivergenceEstimate estimate_renyi_mc(const ModelParams& p, const ModelParams& q,
                                     double alpha, const McConfig& cfg);

}  // namespace hmmdiv
