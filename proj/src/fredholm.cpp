#include "hmmdiv/fredholm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "hmmdiv/errors.hpp"
#include "hmmdiv/monte_carlo.hpp"
#include "hmmdiv/quadrature.hpp"

namespace hmmdiv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Below this relative curvature the chi-square form loses digits to
// cancellation and the quadratic is solved directly instead.
constexpr double kFlatCurvature = 1e-7;

// Scan resolution used to bracket sign changes of the filter level function.
constexpr int kLevelScanPoints = 400;
constexpr double kScanHalfWidth = 8.0;

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// P(lo < Y <= hi) for Y ~ N(mean, sd^2), accurate in both tails.
double normal_mass(double lo, double hi, double mean, double sd) {
  if (!(hi > lo)) return 0.0;
  const double a = (lo - mean) / sd, b = (hi - mean) / sd;
  if (a >= 0.0) return normal_cdf(-a) - normal_cdf(-b);
  return normal_cdf(b) - normal_cdf(a);
}

struct Interval {
  double lo;
  double hi;
};

double interval_mass(const std::vector<Interval>& set, double mean, double sd) {
  double total = 0.0;
  for (const auto& iv : set) total += normal_mass(iv.lo, iv.hi, mean, sd);
  return std::clamp(total, 0.0, 1.0);
}

// Prediction weights over chain components for the step after a filter with
// P(X_{t-1} = 0 | data) = w: mass w (resp. 1 - w) sits on the first component
// labelled 0 (resp. 1) and is pushed through the transition matrix. For both
// model families all components sharing a label have the same transition row.
Eigen::VectorXd predictive_weights(const SwitchingChain& c, double w) {
  const auto d = static_cast<Eigen::Index>(c.states());
  Eigen::VectorXd posterior = Eigen::VectorXd::Zero(d);
  bool seen0 = false, seen1 = false;
  for (Eigen::Index k = 0; k < d; ++k) {
    const int label = c.observed_state(static_cast<std::size_t>(k));
    if (label == 0 && !seen0) posterior[k] = w, seen0 = true;
    if (label == 1 && !seen1) posterior[k] = 1.0 - w, seen1 = true;
  }
  return c.transition().matrix().transpose() * posterior;
}

// {y : sum_c rho_c(w) * s_c(x) * f_c(y | u) <= 0} with s_c = 1 - x for
// components labelled 0 and -x otherwise, i.e. the event W_t <= x.
class LevelSet {
 public:
  LevelSet(const SwitchingChain& filt, double u, double w, double x) : filt_(filt), u_(u) {
    const Eigen::VectorXd rho = predictive_weights(filt, w);
    for (std::size_t c = 0; c < filt.states(); ++c) {
      const double coef =
          rho[static_cast<Eigen::Index>(c)] * (filt.observed_state(c) == 0 ? 1.0 - x : -x);
      if (coef > 0.0) pos_.push_back({c, std::log(coef)});
      if (coef < 0.0) neg_.push_back({c, std::log(-coef)});
    }
  }

  // log(positive part) - log(negative part); <= 0 inside the set.
  double gap(double y) const { return lse(pos_, y) - lse(neg_, y); }

  std::vector<Interval> solve(double lo, double hi) const {
    if (neg_.empty()) return {};
    if (pos_.empty()) return {{-kInf, kInf}};
    std::vector<double> roots;
    const double step = (hi - lo) / kLevelScanPoints;
    double ya = lo, ga = gap(ya);
    for (int i = 1; i <= kLevelScanPoints; ++i) {
      const double yb = lo + step * i;
      const double gb = gap(yb);
      if ((ga <= 0.0) != (gb <= 0.0)) roots.push_back(bisect(ya, yb, ga));
      ya = yb;
      ga = gb;
    }
    std::vector<Interval> set;
    double start = -kInf;
    bool inside = gap(lo) <= 0.0;
    for (double r : roots) {
      if (inside) set.push_back({start, r});
      start = r;
      inside = !inside;
    }
    if (inside) set.push_back({start, kInf});
    return set;
  }

 private:
  struct Term {
    std::size_t component;
    double log_coef;
  };

  double lse(const std::vector<Term>& terms, double y) const {
    double acc = -kInf;
    for (const auto& t : terms)
      acc = log_sum_exp(acc, t.log_coef + filt_.log_emission(t.component, y, u_));
    return acc;
  }

  double bisect(double a, double b, double ga) const {
    const bool neg_a = ga <= 0.0;
    for (int it = 0; it < 200 && b - a > 1e-13 * (1.0 + std::abs(a)); ++it) {
      const double mid = 0.5 * (a + b);
      if ((gap(mid) <= 0.0) == neg_a)
        a = mid;
      else
        b = mid;
    }
    return 0.5 * (a + b);
  }

  const SwitchingChain& filt_;
  double u_;
  std::vector<Term> pos_;
  std::vector<Term> neg_;
};

// Stable solution of P(zeta*Y^2 + 2*eta*Y + c <= 0), Y ~ N(mean, sd^2).
double quadratic_sublevel_mass(double zeta, double eta, double c, double mean, double sd) {
  if (zeta == 0.0) {
    if (eta == 0.0) return c <= 0.0 ? 1.0 : 0.0;
    const double root = -c / (2.0 * eta);
    return eta > 0.0 ? normal_mass(-kInf, root, mean, sd) : normal_mass(root, kInf, mean, sd);
  }
  const double disc = eta * eta - zeta * c;
  if (disc <= 0.0) return zeta > 0.0 ? 0.0 : 1.0;
  const double q = -(eta + std::copysign(std::sqrt(disc), eta));
  double r1 = q / zeta, r2 = c / q;
  if (q == 0.0) r1 = r2 = 0.0;
  if (r1 > r2) std::swap(r1, r2);
  const double between = normal_mass(r1, r2, mean, sd);
  return zeta > 0.0 ? between : 1.0 - between;
}

// Qlev[t][iu][level][iw]: P(W_t <= (level + 1/2)/N | component t, u, w).
class LevelTable {
 public:
  LevelTable(int components, const GridSpec& g)
      : comps_(components), n_(g.interior()), levels_(g.N),
        data_(static_cast<std::size_t>(components) * n_ * levels_ * n_) {}

  double& at(int t, int iu, int level, int iw) {
    return data_[((static_cast<std::size_t>(t) * n_ + iu) * levels_ + level) * n_ + iw];
  }
  double at(int t, int iu, int level, int iw) const {
    return data_[((static_cast<std::size_t>(t) * n_ + iu) * levels_ + level) * n_ + iw];
  }
  // Q(x_{ix+1} + delta) - Q(x_{ix+1} - delta)
  double cell(int t, int iu, int ix, int iw) const {
    return at(t, iu, ix + 1, iw) - at(t, iu, ix, iw);
  }

 private:
  int comps_, n_, levels_;
  std::vector<double> data_;
};

double level_x(const GridSpec& g, int level) { return (level + 0.5) / g.N; }

LevelTable level_table_two_state(const ModelAParams& gen, const ModelAParams& filt,
                                 const GridSpec& g) {
  LevelTable table(2, g);
  for (int t = 0; t < 2; ++t)
    for (int iu = 0; iu < g.interior(); ++iu)
      for (int level = 0; level < g.N; ++level)
        for (int iw = 0; iw < g.interior(); ++iw) {
          const double z = filter_threshold(filt, g.x_node(iw + 1), level_x(g, level));
          table.at(t, iu, level, iw) = q_two_state(g.v_node(iu + 1), z, t, gen, filt);
        }
  return table;
}

LevelTable level_table_generic(const SwitchingChain& gen, const SwitchingChain& filt,
                               const GridSpec& g) {
  const int comps = static_cast<int>(gen.states());
  LevelTable table(comps, g);
  for (int iu = 0; iu < g.interior(); ++iu) {
    const double u = g.v_node(iu + 1);
    double lo = kInf, hi = -kInf;
    for (int t = 0; t < comps; ++t) {
      const auto& r = gen.regime(static_cast<std::size_t>(t));
      lo = std::min(lo, r.mean(u) - kScanHalfWidth * r.sd);
      hi = std::max(hi, r.mean(u) + kScanHalfWidth * r.sd);
    }
    for (int level = 0; level < g.N; ++level)
      for (int iw = 0; iw < g.interior(); ++iw) {
        const auto set = LevelSet(filt, u, g.x_node(iw + 1), level_x(g, level)).solve(lo, hi);
        for (int t = 0; t < comps; ++t) {
          const auto& r = gen.regime(static_cast<std::size_t>(t));
          table.at(t, iu, level, iw) = interval_mass(set, r.mean(u), r.sd);
        }
      }
  }
  return table;
}

KernelMatrix assemble_kernel(const SwitchingChain& gen, const LevelTable& q,
                             const GridSpec& g) {
  const int comps = static_cast<int>(gen.states());
  const int n = g.interior();
  KernelMatrix k;
  k.components = comps;
  k.grid = g;
  const Eigen::Index dim = static_cast<Eigen::Index>(comps) * n * n;
  k.entries = Eigen::MatrixXd::Zero(dim, dim);
  const Eigen::MatrixXd& p = gen.transition().matrix();
  const double dv = g.v_step();

  for (int s = 0; s < comps; ++s)
    for (int iv = 0; iv < n; ++iv) {
      std::vector<double> f(static_cast<std::size_t>(n));
      for (int iu = 0; iu < n; ++iu)
        f[iu] = gen.emission(static_cast<std::size_t>(s), g.v_node(iu + 1), g.v_node(iv + 1));
      for (int iw = 0; iw < n; ++iw) {
        const Eigen::Index col = k.index(s, iv, iw);
        for (int t = 0; t < comps; ++t) {
          const double pst = p(s, t);
          if (pst == 0.0) continue;
          for (int iu = 0; iu < n; ++iu) {
            const double base = pst * f[iu] * dv;
            for (int ix = 0; ix < n; ++ix)
              k.entries(k.index(t, iu, ix), col) = base * q.cell(t, iu, ix, iw);
          }
        }
      }
    }

  k.pre_norm_col_sums = k.entries.colwise().sum().transpose();
  for (Eigen::Index c = 0; c < dim; ++c) {
    const double s = k.pre_norm_col_sums[c];
    if (!(s >= kMinColumnSum && s <= kMaxColumnSum)) {
      std::ostringstream os;
      os << "kernel column " << c << " sums to " << s << " before normalization; "
         << "grid too coarse (N=" << g.N << ", a=" << g.a << ")";
      throw GridTooCoarseError(os.str(), s);
    }
    k.entries.col(c) /= s;
  }
  return k;
}

enum class Functional { Power, Log };

// Expected value over the invariant grid of
//   Power: (num(y; u, w) / den(y; u, w))^(alpha-1)
//   Log:   log den(y; u, w)
// where u ~ f_s(. | v), the next component t ~ T(s, .), y ~ f_t(. | u), with
// (s, v, w) distributed as m. num mixes `gen` components, den mixes `filt`.
// The result is divided by the quadrature mass of the same generating
// densities so identical inputs give exactly 1 (Power) or share the same
// normalization (Log).
double invariant_expectation(const SwitchingChain& gen, const SwitchingChain& filt,
                             Functional kind, double alpha, const InvariantDensityGrid& m,
                             const GridSpec& g) {
  g.validate();
  if (m.grid != g) throw NumericError("invariant density was solved on a different grid");
  if (m.components != static_cast<int>(gen.states()))
    throw NumericError("invariant density has the wrong component count");

  const auto rule = simpson_rule(-g.a, g.a, static_cast<std::size_t>(g.quad_points));
  const int nq = g.quad_points;
  const int n = g.interior();
  const int comps = static_cast<int>(gen.states());
  const auto sq = static_cast<std::size_t>(nq) * static_cast<std::size_t>(nq);

  // log f_c(y_b | u_a), stored [c][a * nq + b].
  auto log_table = [&](const SwitchingChain& c) {
    std::vector<std::vector<double>> out(c.states(), std::vector<double>(sq));
    for (std::size_t k = 0; k < c.states(); ++k)
      for (int a = 0; a < nq; ++a)
        for (int b = 0; b < nq; ++b)
          out[k][static_cast<std::size_t>(a) * nq + b] =
              c.log_emission(k, rule.nodes[b], rule.nodes[a]);
    return out;
  };
  const auto lg = log_table(gen);
  const auto lf = log_table(filt);

  // h[t][iw][a] = sum_b W_b * F(y_b; u_a, w) * f_t(y_b | u_a);  h0 without F.
  std::vector<std::vector<std::vector<double>>> h(
      comps, std::vector<std::vector<double>>(n, std::vector<double>(nq)));
  std::vector<std::vector<double>> h0(comps, std::vector<double>(nq));
  std::vector<double> value(sq);
  const double e = alpha - 1.0;

  auto log_mix = [](const std::vector<std::vector<double>>& table, const Eigen::VectorXd& rho,
                    std::size_t idx) {
    double acc = -kInf;
    for (Eigen::Index c = 0; c < rho.size(); ++c)
      if (rho[c] > 0.0) acc = log_sum_exp(acc, std::log(rho[c]) + table[c][idx]);
    return acc;
  };

  for (int iw = 0; iw < n; ++iw) {
    const double w = g.x_node(iw + 1);
    const Eigen::VectorXd rho_den = predictive_weights(filt, w);
    const Eigen::VectorXd rho_num = predictive_weights(gen, w);
    for (std::size_t idx = 0; idx < sq; ++idx) {
      const double ld = log_mix(lf, rho_den, idx);
      value[idx] = kind == Functional::Log ? ld : e * (log_mix(lg, rho_num, idx) - ld);
    }
    for (int t = 0; t < comps; ++t)
      for (int a = 0; a < nq; ++a) {
        double acc = 0.0, mass = 0.0;
        for (int b = 0; b < nq; ++b) {
          const std::size_t idx = static_cast<std::size_t>(a) * nq + b;
          const double dens = std::exp(lg[t][idx]);
          mass += rule.weights[b] * dens;
          acc += kind == Functional::Log ? rule.weights[b] * value[idx] * dens
                                         : rule.weights[b] * std::exp(value[idx] + lg[t][idx]);
        }
        h[t][iw][a] = acc;
        if (iw == 0) h0[t][a] = mass;
      }
  }

  const Eigen::MatrixXd& p = gen.transition().matrix();
  double num = 0.0, den = 0.0;
  for (int s = 0; s < comps; ++s)
    for (int iv = 0; iv < n; ++iv) {
      // u-density of the source component at lattice node v
      std::vector<double> fu(static_cast<std::size_t>(nq));
      for (int a = 0; a < nq; ++a)
        fu[a] = rule.weights[a] *
                gen.emission(static_cast<std::size_t>(s), rule.nodes[a], g.v_node(iv + 1));
      double g0 = 0.0;
      for (int t = 0; t < comps; ++t) {
        if (p(s, t) == 0.0) continue;
        double acc = 0.0;
        for (int a = 0; a < nq; ++a) acc += fu[a] * h0[t][a];
        g0 += p(s, t) * acc;
      }
      for (int iw = 0; iw < n; ++iw) {
        double gv = 0.0;
        for (int t = 0; t < comps; ++t) {
          if (p(s, t) == 0.0) continue;
          double acc = 0.0;
          for (int a = 0; a < nq; ++a) acc += fu[a] * h[t][iw][a];
          gv += p(s, t) * acc;
        }
        const double weight = m.at(s, iv, iw);
        num += weight * gv;
        den += weight * g0;
      }
    }
  const double out = num / den;
  if (!std::isfinite(out)) throw NumericError("non-finite invariant expectation");
  return out;
}

double j_alpha_impl(const SwitchingChain& gen, const SwitchingChain& filt, double alpha,
                    const InvariantDensityGrid& m, const GridSpec& g) {
  if (routes_to_kl(alpha)) throw NumericError("j_alpha requires alpha != 1");
  if (!(alpha > 0.0)) throw NumericError("alpha must be positive");
  return invariant_expectation(gen, filt, Functional::Power, alpha, m, g);
}

double j_log_impl(const SwitchingChain& filt, const SwitchingChain& gen,
                  const InvariantDensityGrid& m, const GridSpec& g) {
  return invariant_expectation(gen, filt, Functional::Log, 1.0, m, g);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

template <class Params>
std::vector<DivergenceResult> fredholm_grid_impl(const Params& theta1, const Params& theta,
                                                 std::span<const double> alphas,
                                                 const GridSpec& g) {
  require_valid(theta1);
  require_valid(theta);
  g.validate();
  const SwitchingChain gen = to_chain(theta1);
  const SwitchingChain alt = to_chain(theta);

  const bool any_renyi = std::any_of(alphas.begin(), alphas.end(),
                                     [](double a) { return !routes_to_kl(a); });
  const bool any_kl = std::any_of(alphas.begin(), alphas.end(), routes_to_kl);

  struct Solved {
    InvariantDensityGrid m;
    double max_dev = 0.0;
    double seconds = 0.0;
  };
  auto solve_for = [&](const Params& filt) {
    const auto start = Clock::now();
    KernelMatrix k = build_kernel(theta1, filt, g);
    Solved s{solve_invariant(k), k.max_column_deviation(), 0.0};
    s.seconds = seconds_since(start);
    return s;
  };

  // The theta-filter law feeds both the Renyi functional and the KL term J_theta.
  std::optional<Solved> filt_alt, filt_gen;
  if (any_renyi || any_kl) filt_alt = solve_for(theta);
  double kl_value = 0.0, kl_seconds = 0.0;
  if (any_kl) {
    filt_gen = solve_for(theta1);
    const auto start = Clock::now();
    kl_value = j_log_impl(gen, gen, filt_gen->m, g) - j_log_impl(alt, gen, filt_alt->m, g);
    kl_seconds = seconds_since(start) + filt_gen->seconds;
  }

  std::vector<DivergenceResult> out;
  for (double alpha : alphas) {
    if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
    DivergenceResult r;
    r.alpha = alpha;
    r.diagnostics.grid = g;
    r.diagnostics.eigen_residual = filt_alt->m.eigen_residual;
    r.diagnostics.max_column_deviation = filt_alt->max_dev;
    r.diagnostics.iterations = filt_alt->m.iterations;
    if (routes_to_kl(alpha)) {
      r.value = kl_value;
      r.diagnostics.eigen_residual =
          std::max(r.diagnostics.eigen_residual, filt_gen->m.eigen_residual);
      r.diagnostics.max_column_deviation =
          std::max(r.diagnostics.max_column_deviation, filt_gen->max_dev);
      r.diagnostics.iterations = std::max(r.diagnostics.iterations, filt_gen->m.iterations);
      r.diagnostics.seconds = filt_alt->seconds + kl_seconds;
    } else {
      const auto start = Clock::now();
      const double j = j_alpha_impl(gen, alt, alpha, filt_alt->m, g);
      if (!(j > 0.0)) throw NumericError("J^alpha must be positive");
      r.value = std::log(j) / (alpha - 1.0);
      r.diagnostics.seconds = filt_alt->seconds + seconds_since(start);
    }
    if (!std::isfinite(r.value)) throw NumericError("non-finite divergence");
    out.push_back(r);
  }
  return out;
}

}  // namespace

void GridSpec::validate() const {
  if (N < 4) throw ConfigError("grid.N must be >= 4");
  if (!(a > 0.0)) throw ConfigError("grid.a must be positive");
  if (quad_points < 51 || quad_points % 2 == 0)
    throw ConfigError("grid.quad_points must be odd and >= 51");
}

double noncentral_chisq1_cdf(double x, double lambda) {
  if (!(x > 0.0)) return 0.0;
  if (lambda < 0.0) throw NumericError("noncentrality must be nonnegative");
  if (std::isinf(x)) return 1.0;
  const double s = std::sqrt(x), r = std::sqrt(lambda);
  // Phi(s - r) - Phi(-s - r), arranged to avoid 1 - 1 cancellation.
  if (s - r < 0.0) return normal_cdf(s - r) - normal_cdf(-s - r);
  return 1.0 - normal_cdf(r - s) - normal_cdf(-s - r);
}

double filter_threshold(const ModelAParams& filt, double w, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return kInf;
  const double p00 = filt.p00, p01 = 1.0 - filt.p00;
  const double p11 = filt.p11, p10 = 1.0 - filt.p11;
  return x / (1.0 - x) * (p01 * w + p11 * (1.0 - w)) / (p00 * w + p10 * (1.0 - w));
}

double q_two_state(double u, double z, int j, const ModelAParams& gen,
                   const ModelAParams& filt) {
  if (!(z > 0.0)) return 0.0;
  if (std::isinf(z)) return 1.0;
  const double mean = emission_mean(gen, j, u);
  const double sd = gen.sigma[j];
  const double s0 = filt.sigma[0], s1 = filt.sigma[1];
  const double m0 = emission_mean(filt, 0, u), m1 = emission_mean(filt, 1, u);

  // log(g0/g1) = log(s1/s0) + zeta*y^2 + 2*eta*y + nu
  const double zeta = 1.0 / (2.0 * s1 * s1) - 1.0 / (2.0 * s0 * s0);
  const double eta = m0 / (2.0 * s0 * s0) - m1 / (2.0 * s1 * s1);
  const double nu = -m0 * m0 / (2.0 * s0 * s0) + m1 * m1 / (2.0 * s1 * s1);
  const double level = std::log(s0 * z / s1);

  if (std::abs(zeta) * sd * sd < kFlatCurvature)
    return quadratic_sublevel_mass(zeta, eta, nu - level, mean, sd);

  // (Y + eta/zeta)^2 compared with the threshold; (Y + eta/zeta)/sd is a
  // unit-variance normal so the square is noncentral chi-square.
  const double shift = eta / zeta;
  const double threshold = level / zeta + shift * shift - nu / zeta;
  const double lambda = (mean + shift) * (mean + shift) / (sd * sd);
  const double inside = noncentral_chisq1_cdf(threshold / (sd * sd), lambda);
  return zeta > 0.0 ? inside : 1.0 - inside;
}

double q_four_state(double x, double u, double w, int j, int k, const ModelBParams& gen,
                    const ModelBParams& filt) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const SwitchingChain filt_chain = to_chain(filt);
  const double mean = emission_mean(gen, j, k, u);
  const double sd = gen.sigma;
  const auto set = LevelSet(filt_chain, u, w, x)
                       .solve(mean - kScanHalfWidth * sd, mean + kScanHalfWidth * sd);
  return interval_mass(set, mean, sd);
}

Eigen::Index KernelMatrix::index(int component, int iu, int ix) const {
  const Eigen::Index n = grid.interior();
  return (static_cast<Eigen::Index>(component) * n + iu) * n + ix;
}

double KernelMatrix::max_column_deviation() const {
  return (pre_norm_col_sums.array() - 1.0).abs().maxCoeff();
}

KernelMatrix build_kernel(const ModelAParams& gen, const ModelAParams& filt,
                          const GridSpec& grid) {
  grid.validate();
  require_valid(gen);
  require_valid(filt);
  return assemble_kernel(to_chain(gen), level_table_two_state(gen, filt, grid), grid);
}

KernelMatrix build_kernel(const ModelBParams& gen, const ModelBParams& filt,
                          const GridSpec& grid) {
  grid.validate();
  require_valid(gen);
  require_valid(filt);
  const SwitchingChain g = to_chain(gen);
  return assemble_kernel(g, level_table_generic(g, to_chain(filt), grid), grid);
}

double InvariantDensityGrid::at(int component, int iu, int ix) const {
  const Eigen::Index n = grid.interior();
  return density[(static_cast<Eigen::Index>(component) * n + iu) * n + ix];
}

InvariantDensityGrid solve_invariant(const KernelMatrix& k, double tol,
                                     std::size_t max_iters) {
  const Eigen::Index dim = k.dim();
  const double area = k.grid.cell_area();
  Eigen::VectorXd m = Eigen::VectorXd::Constant(dim, 1.0 / (static_cast<double>(dim) * area));
  Eigen::VectorXd next(dim);
  double residual = kInf;
  std::size_t it = 0;
  while (it < max_iters) {
    next.noalias() = k.entries * m;
    ++it;
    residual = (next - m).lpNorm<1>();
    m.swap(next);
    m /= m.sum() * area;
    if (residual <= tol) break;
  }
  next.noalias() = k.entries * m;
  residual = (next - m).lpNorm<1>();
  if (residual > tol)
    throw NonConvergenceError("power iteration did not converge in " +
                                  std::to_string(max_iters) + " iterations",
                              residual);
  InvariantDensityGrid out;
  out.components = k.components;
  out.grid = k.grid;
  out.density = std::move(m);
  out.cell_area = area;
  out.eigen_residual = residual;
  out.iterations = it;
  return out;
}

double j_alpha(const ModelAParams& theta1, const ModelAParams& theta, double alpha,
               const InvariantDensityGrid& m, const GridSpec& grid) {
  return j_alpha_impl(to_chain(theta1), to_chain(theta), alpha, m, grid);
}

double j_alpha(const ModelBParams& theta1, const ModelBParams& theta, double alpha,
               const InvariantDensityGrid& m, const GridSpec& grid) {
  return j_alpha_impl(to_chain(theta1), to_chain(theta), alpha, m, grid);
}

double j_log(const ModelAParams& filt, const ModelAParams& gen,
             const InvariantDensityGrid& m, const GridSpec& grid) {
  return j_log_impl(to_chain(filt), to_chain(gen), m, grid);
}

double j_log(const ModelBParams& filt, const ModelBParams& gen,
             const InvariantDensityGrid& m, const GridSpec& grid) {
  return j_log_impl(to_chain(filt), to_chain(gen), m, grid);
}

std::vector<DivergenceResult> divergence_fredholm_grid(const ModelParams& theta1,
                                                       const ModelParams& theta,
                                                       std::span<const double> alphas,
                                                       const GridSpec& grid) {
  if (theta1.index() != theta.index())
    throw InvalidModelError("both models must belong to the same family");
  if (const auto* a1 = std::get_if<ModelAParams>(&theta1))
    return fredholm_grid_impl(*a1, std::get<ModelAParams>(theta), alphas, grid);
  return fredholm_grid_impl(std::get<ModelBParams>(theta1), std::get<ModelBParams>(theta),
                            alphas, grid);
}

DivergenceResult divergence_fredholm(const ModelParams& theta1, const ModelParams& theta,
                                     double alpha, const GridSpec& grid) {
  return divergence_fredholm_grid(theta1, theta, std::span<const double>(&alpha, 1), grid)
      .front();
}

}  // namespace hmmdiv
