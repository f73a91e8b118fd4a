#include "hmmdiv/monte_carlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/forward.hpp"
#include "hmmdiv/parallel.hpp"

namespace hmmdiv {

void McConfig::validate() const {
  if (n < 1) throw ConfigError("mc.n must be >= 1");
  if (reps < 1) throw ConfigError("mc.reps must be >= 1");
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t replication) {
  // splitmix64 finalizer applied to the replication index
  std::uint64_t z = static_cast<std::uint64_t>(replication) + 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return seed ^ z;
}

double kl_statistic(std::span<const double> log_ratios) {
  double sum = 0.0;
  for (double v : log_ratios) sum += v;
  return sum / static_cast<double>(log_ratios.size());
}

double renyi_statistic(std::span<const double> log_ratios, double alpha) {
  if (routes_to_kl(alpha)) return kl_statistic(log_ratios);
  const double e = alpha - 1.0;
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : log_ratios) peak = std::max(peak, e * v);
  double sum = 0.0;
  for (double v : log_ratios) sum += std::exp(e * v - peak);
  const double log_mean =
      peak + std::log(sum) - std::log(static_cast<double>(log_ratios.size()));
  return log_mean / e;
}

namespace {

DivergenceEstimate summarize(double alpha, const std::vector<double>& values) {
  DivergenceEstimate est;
  est.alpha = alpha;
  est.reps = values.size();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  est.mean = mean;
  est.std_dev =
      values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return est;
}

}  // namespace

std::vector<DivergenceEstimate> estimate_mc_grid(const SwitchingChain& p,
                                                 const SwitchingChain& q,
                                                 std::span<const double> alphas,
                                                 const McConfig& cfg) {
  cfg.validate();
  for (double a : alphas)
    if (!(a > 0.0)) throw ConfigError("alpha must be positive");

  // stats[a][r]; filled by replication index so the reduction order is fixed.
  std::vector<std::vector<double>> stats(alphas.size(), std::vector<double>(cfg.reps));
  parallel_for(cfg.reps, [&](std::size_t r) {
    try {
      const PathSample path = sample_path(p, cfg.n, cfg.burn_in, replicate_seed(cfg.seed, r));
      std::vector<double> log_ratios;
      per_step_log_ratios(p, q, path.y, path.y0, log_ratios);
      for (std::size_t a = 0; a < alphas.size(); ++a)
        stats[a][r] = renyi_statistic(log_ratios, alphas[a]);
    } catch (const DegenerateInputError& e) {
      throw DegenerateInputError("replication " + std::to_string(r) + ": " + e.what());
    }
  });

  std::vector<DivergenceEstimate> out;
  out.reserve(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a) out.push_back(summarize(alphas[a], stats[a]));
  return out;
}

DivergenceEstimate estimate_kl_mc(const SwitchingChain& p, const SwitchingChain& q,
                                  const McConfig& cfg) {
  const double alpha = kKlAlpha;
  return estimate_mc_grid(p, q, std::span<const double>(&alpha, 1), cfg).front();
}

DivergenceEstimate estimate_renyi_mc(const SwitchingChain& p, const SwitchingChain& q,
                                     double alpha, const McConfig& cfg) {
  return estimate_mc_grid(p, q, std::span<const double>(&alpha, 1), cfg).front();
}

DivergenceEstimate estimate_kl_mc(const ModelParams& p, const ModelParams& q,
                                  const McConfig& cfg) {
  return estimate_kl_mc(to_chain(p), to_chain(q), cfg);
}

DivergenceEstimate estimate_renyi_mc(const ModelParams& p, const ModelParams& q,
                                     double alpha, const McConfig& cfg) {
  return estimate_renyi_mc(to_chain(p), to_chain(q), alpha, cfg);
}

}  // namespace hmmdiv
