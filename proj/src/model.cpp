#include "hmmdiv/model.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "hmmdiv/errors.hpp"

namespace hmmdiv {

namespace {

bool open_unit(double p) { return p > 0.0 && p < 1.0; }

std::string join(const std::vector<std::string>& items) {
  std::ostringstream os;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) os << "; ";
    os << items[i];
  }
  return os.str();
}

}  // namespace

Family family_of(const ModelParams& m) {
  return std::holds_alternative<ModelAParams>(m) ? Family::A : Family::B;
}

std::string to_string(Family f) { return f == Family::A ? "A" : "B"; }

ValidationReport validate_model(const ModelAParams& m) {
  ValidationReport r;
  if (!open_unit(m.p00)) r.violations.push_back("p00 must lie in (0, 1)");
  if (!open_unit(m.p11)) r.violations.push_back("p11 must lie in (0, 1)");
  for (int j = 0; j < 2; ++j) {
    const auto s = std::to_string(j);
    if (!std::isfinite(m.mu[j])) r.violations.push_back("mu" + s + " must be finite");
    if (!(std::abs(m.psi[j]) < 1.0))
      r.violations.push_back("|psi" + s + "| < 1 required");
    if (!(m.sigma[j] > 0.0) || !std::isfinite(m.sigma[j]))
      r.violations.push_back("sigma" + s + " must be positive");
  }
  return r;
}

ValidationReport validate_model(const ModelBParams& m) {
  ValidationReport r;
  if (!open_unit(m.p01)) r.violations.push_back("p01 must lie in (0, 1)");
  if (!open_unit(m.p10)) r.violations.push_back("p10 must lie in (0, 1)");
  if (!std::isfinite(m.mu[0]) || !std::isfinite(m.mu[1]))
    r.violations.push_back("mu must be finite");
  if (!(std::abs(m.phi) < 1.0)) r.violations.push_back("|phi| < 1 required");
  if (!std::isfinite(m.psi1) || !std::isfinite(m.psi2))
    r.violations.push_back("psi1 and psi2 must be finite");
  if (!(m.sigma > 0.0) || !std::isfinite(m.sigma))
    r.violations.push_back("sigma must be positive");
  return r;
}

ValidationReport validate_model(const ModelParams& m) {
  return std::visit([](const auto& p) { return validate_model(p); }, m);
}

void require_valid(const ModelParams& m) {
  auto r = validate_model(m);
  if (!r.ok()) throw InvalidModelError("invalid model: " + join(r.violations));
}

TransitionMatrix::TransitionMatrix(Eigen::MatrixXd p) : p_(std::move(p)) {
  if (p_.rows() == 0 || p_.rows() != p_.cols())
    throw InvalidModelError("transition matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      const double v = p_(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw InvalidModelError("transition entries must lie in [0, 1]");
    }
    if (std::abs(p_.row(i).sum() - 1.0) > kRowTolerance)
      throw InvalidModelError("transition row " + std::to_string(i) +
                              " does not sum to 1");
  }
}

TransitionMatrix TransitionMatrix::two_state(double p01, double p10) {
  Eigen::MatrixXd p(2, 2);
  p << 1.0 - p01, p01, p10, 1.0 - p10;
  return TransitionMatrix(std::move(p));
}

Eigen::VectorXd stationary_distribution(const TransitionMatrix& t, double tol,
                                        std::size_t max_iters) {
  const Eigen::Index d = static_cast<Eigen::Index>(t.size());
  const Eigen::MatrixXd pt = t.matrix().transpose();
  Eigen::VectorXd pi = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
  double residual = 0.0;
  for (std::size_t it = 0; it < max_iters; ++it) {
    Eigen::VectorXd next = pt * pi;
    next /= next.sum();
    residual = (next - pi).lpNorm<1>();
    pi = std::move(next);
    if (residual <= tol) return pi;
  }
  throw NonConvergenceError("stationary distribution did not converge", residual);
}

FourStateChain lift_four_state(const ModelBParams& m) {
  const double p01 = m.p01, p10 = m.p10;
  const double p00 = 1.0 - p01, p11 = 1.0 - p10;
  Eigen::MatrixXd p(4, 4);
  // From pair (i, j) the next pair is (j, k) with probability p_jk.
  p << p00, p01, 0.0, 0.0,
       0.0, 0.0, p10, p11,
       p00, p01, 0.0, 0.0,
       0.0, 0.0, p10, p11;
  const double s = p01 + p10;
  Eigen::Vector4d pi;
  pi << p00 * p10 / s, p01 * p10 / s, p10 * p01 / s, p11 * p01 / s;
  return FourStateChain{TransitionMatrix(std::move(p)), pi, m};
}

double normal_pdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return std::exp(-0.5 * z * z) / (sd * std::sqrt(2.0 * std::numbers::pi));
}

double normal_log_pdf(double y, double mean, double sd) {
  const double z = (y - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double emission_mean(const ModelAParams& m, int cur, double y_prev) {
  return m.mu[cur] + m.psi[cur] * y_prev;
}

double emission_mean(const ModelBParams& m, int prev, int cur, double y_prev) {
  return m.psi2 * m.mu[prev] + m.psi1 * m.mu[cur] + m.phi * y_prev;
}

double emission_density(const ModelParams& m, int prev, int cur, double y,
                        double y_prev) {
  if (const auto* a = std::get_if<ModelAParams>(&m))
    return normal_pdf(y, emission_mean(*a, cur, y_prev), a->sigma[cur]);
  const auto& b = std::get<ModelBParams>(m);
  return normal_pdf(y, emission_mean(b, prev, cur, y_prev), b.sigma);
}

SwitchingChain::SwitchingChain(TransitionMatrix transition, Eigen::VectorXd initial,
                               std::vector<GaussianRegime> regimes,
                               std::vector<int> observed_state)
    : transition_(std::move(transition)),
      initial_(std::move(initial)),
      regimes_(std::move(regimes)),
      observed_(std::move(observed_state)) {
  const auto d = transition_.size();
  if (regimes_.size() != d || static_cast<std::size_t>(initial_.size()) != d)
    throw InvalidModelError("chain dimensions disagree");
  if ((initial_.array() < 0.0).any() || std::abs(initial_.sum() - 1.0) > 1e-12)
    throw InvalidModelError("initial distribution must be a probability vector");
  for (const auto& r : regimes_)
    if (!(r.sd > 0.0)) throw InvalidModelError("regime sd must be positive");
  if (observed_.empty()) {
    observed_.resize(d);
    for (std::size_t k = 0; k < d; ++k) observed_[k] = static_cast<int>(k);
  }
  if (observed_.size() != d) throw InvalidModelError("observed_state size mismatch");
}

double SwitchingChain::emission(std::size_t k, double y, double y_prev) const {
  const auto& r = regimes_[k];
  return normal_pdf(y, r.mean(y_prev), r.sd);
}

double SwitchingChain::log_emission(std::size_t k, double y, double y_prev) const {
  const auto& r = regimes_[k];
  return normal_log_pdf(y, r.mean(y_prev), r.sd);
}

SwitchingChain to_chain(const ModelAParams& m) {
  require_valid(m);
  auto t = TransitionMatrix::two_state(1.0 - m.p00, 1.0 - m.p11);
  Eigen::VectorXd pi = stationary_distribution(t);
  std::vector<GaussianRegime> regimes;
  for (int j = 0; j < 2; ++j) regimes.push_back({m.mu[j], m.psi[j], m.sigma[j]});
  return SwitchingChain(std::move(t), std::move(pi), std::move(regimes));
}

SwitchingChain to_chain(const ModelBParams& m) {
  require_valid(m);
  auto lifted = lift_four_state(m);
  std::vector<GaussianRegime> regimes;
  std::vector<int> observed;
  for (int prev = 0; prev < 2; ++prev)
    for (int cur = 0; cur < 2; ++cur) {
      regimes.push_back({m.psi2 * m.mu[prev] + m.psi1 * m.mu[cur], m.phi, m.sigma});
      observed.push_back(cur);
    }
  return SwitchingChain(std::move(lifted.transition), Eigen::VectorXd(lifted.pi),
                        std::move(regimes), std::move(observed));
}

SwitchingChain to_chain(const ModelParams& m) {
  return std::visit([](const auto& p) { return to_chain(p); }, m);
}

std::optional<ModelAParams> reduce_to_family_a(const ModelBParams& m) {
  if (m.psi2 != 0.0) return std::nullopt;
  ModelAParams a;
  a.p00 = 1.0 - m.p01;
  a.p11 = 1.0 - m.p10;
  a.mu = {m.psi1 * m.mu[0], m.psi1 * m.mu[1]};
  a.psi = {m.phi, m.phi};
  a.sigma = {m.sigma, m.sigma};
  return a;
}

namespace {

std::size_t draw_index(std::mt19937_64& rng, const Eigen::Ref<const Eigen::VectorXd>& probs) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  double u = unif(rng);
  const auto d = static_cast<std::size_t>(probs.size());
  for (std::size_t k = 0; k + 1 < d; ++k) {
    u -= probs[static_cast<Eigen::Index>(k)];
    if (u < 0.0) return k;
  }
  return d - 1;
}

}  // namespace

PathSample sample_path(const SwitchingChain& chain, std::size_t n,
                       std::size_t burn_in, std::uint64_t seed) {
  if (n == 0) throw InvalidModelError("sample_path requires n >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const Eigen::MatrixXd& p = chain.transition().matrix();

  PathSample out;
  out.seed = seed;
  out.burn_in = burn_in;
  out.y.reserve(n);
  out.x.reserve(n);

  std::size_t state = draw_index(rng, chain.initial());
  double y = 0.0;
  out.y0 = y;
  for (std::size_t t = 0; t < burn_in + n; ++t) {
    state = draw_index(rng, p.row(static_cast<Eigen::Index>(state)).transpose());
    const auto& r = chain.regime(state);
    const double next = r.mean(y) + r.sd * noise(rng);
    if (t + 1 == burn_in) out.y0 = next;
    if (t >= burn_in) {
      out.y.push_back(next);
      out.x.push_back(chain.observed_state(state));
    }
    y = next;
  }
  return out;
}

PathSample sample_path(const ModelParams& m, std::size_t n, std::size_t burn_in,
                       std::uint64_t seed) {
  return sample_path(to_chain(m), n, burn_in, seed);
}

}  // namespace hmmdiv
