// Single-layer GRU with four fully connected mixture heads, plus exact
// reverse-mode gradients of the sequence NLL (full backpropagation through
// time).
//
// Cell equations, with a = [x; h]:
//   z  = logistic(W_z a + b_z)
//   r  = logistic(W_r a + b_r)
//   n  = tanh(W_h [x; r*h] + b_h)
//   h' = (1 - z) * h + z * n

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "traje/core.hpp"
#include "traje/mdn.hpp"

namespace traje::rnn
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using HiddenState = Eigen::VectorXd;

struct ModelConfig
{
  int input_dim{2};
  int hidden_dim{64};
  int mixtures{5};

  int gate_fan_in() const { return input_dim + hidden_dim; }

  void validate() const
  {
    if (input_dim != 2) {
      throw std::invalid_argument("ModelConfig: input_dim must be 2");
    }
    if (hidden_dim < 1 || mixtures < 1) {
      throw std::invalid_argument("ModelConfig: hidden_dim and mixtures must be >= 1");
    }
  }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Gate matrices act on [x; h] (columns: input first, then hidden).
/// The mu and sigma heads interleave coordinates: row 2k is x of
/// component k, row 2k+1 is y.
struct ModelParams
{
  Matrix w_update, w_reset, w_candidate;
  Vector b_update, b_reset, b_candidate;
  Matrix w_pi, w_rho, w_mu, w_sigma;
  Vector b_pi, b_rho, b_mu, b_sigma;

  static ModelParams zeros(const ModelConfig& cfg)
  {
    const int h = cfg.hidden_dim;
    const int m = cfg.mixtures;
    ModelParams p;
    p.w_update = Matrix::Zero(h, cfg.gate_fan_in());
    p.w_reset = Matrix::Zero(h, cfg.gate_fan_in());
    p.w_candidate = Matrix::Zero(h, cfg.gate_fan_in());
    p.b_update = Vector::Zero(h);
    p.b_reset = Vector::Zero(h);
    p.b_candidate = Vector::Zero(h);
    p.w_pi = Matrix::Zero(m, h);
    p.w_rho = Matrix::Zero(m, h);
    p.w_mu = Matrix::Zero(2 * m, h);
    p.w_sigma = Matrix::Zero(2 * m, h);
    p.b_pi = Vector::Zero(m);
    p.b_rho = Vector::Zero(m);
    p.b_mu = Vector::Zero(2 * m);
    p.b_sigma = Vector::Zero(2 * m);
    return p;
  }

  /// Calls fn(name, tensor) for every tensor in a fixed order.
  template <typename Self, typename Fn>
  static void visit(Self& self, Fn&& fn)
  {
    fn(std::string_view{"w_update"}, self.w_update);
    fn(std::string_view{"b_update"}, self.b_update);
    fn(std::string_view{"w_reset"}, self.w_reset);
    fn(std::string_view{"b_reset"}, self.b_reset);
    fn(std::string_view{"w_candidate"}, self.w_candidate);
    fn(std::string_view{"b_candidate"}, self.b_candidate);
    fn(std::string_view{"w_pi"}, self.w_pi);
    fn(std::string_view{"b_pi"}, self.b_pi);
    fn(std::string_view{"w_rho"}, self.w_rho);
    fn(std::string_view{"b_rho"}, self.b_rho);
    fn(std::string_view{"w_mu"}, self.w_mu);
    fn(std::string_view{"b_mu"}, self.b_mu);
    fn(std::string_view{"w_sigma"}, self.w_sigma);
    fn(std::string_view{"b_sigma"}, self.b_sigma);
  }

  template <typename Fn>
  void for_each(Fn&& fn)
  {
    visit(*this, fn);
  }

  template <typename Fn>
  void for_each(Fn&& fn) const
  {
    visit(*this, fn);
  }

  std::size_t parameter_count() const
  {
    std::size_t n = 0;
    for_each([&](std::string_view, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
  }

  /// Flattens every tensor (row-major inside each tensor) in visit order.
  std::vector<double> flatten() const
  {
    std::vector<double> out;
    out.reserve(parameter_count());
    for_each([&](std::string_view, const auto& t) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
          out.push_back(t(i, j));
        }
      }
    });
    return out;
  }

  void unflatten(std::span<const double> flat)
  {
    if (flat.size() != parameter_count()) {
      throw std::invalid_argument("ModelParams::unflatten: size mismatch");
    }
    std::size_t pos = 0;
    for_each([&](std::string_view, auto& t) {
      for (Eigen::Index i = 0; i < t.rows(); ++i) {
        for (Eigen::Index j = 0; j < t.cols(); ++j) {
          t(i, j) = flat[pos++];
        }
      }
    });
  }

  bool all_finite() const
  {
    bool ok = true;
    for_each([&](std::string_view, const auto& t) { ok = ok && t.allFinite(); });
    return ok;
  }

  bool operator==(const ModelParams& other) const { return flatten() == other.flatten(); }
};

struct Model
{
  ModelConfig config;
  ModelParams params;
};

/// Uniform in [-s, s] with s = sqrt(1 / fan_in) for every matrix, zero biases.
inline ModelParams init_params(const ModelConfig& cfg, std::uint64_t seed)
{
  cfg.validate();
  ModelParams p = ModelParams::zeros(cfg);
  Rng rng(seed);
  p.for_each([&](std::string_view name, auto& t) {
    if (name.front() != 'w') {
      return;
    }
    const double scale = std::sqrt(1.0 / static_cast<double>(t.cols()));
    std::uniform_real_distribution<double> dist(-scale, scale);
    for (Eigen::Index i = 0; i < t.rows(); ++i) {
      for (Eigen::Index j = 0; j < t.cols(); ++j) {
        t(i, j) = dist(rng);
      }
    }
  });
  return p;
}

inline Model make_model(const ModelConfig& cfg, std::uint64_t seed)
{
  return {cfg, init_params(cfg, seed)};
}

namespace detail
{

inline double logistic(double v)
{
  return 1.0 / (1.0 + std::exp(-v));
}

inline Vector concat(const Offset& x, const Vector& h)
{
  Vector a(2 + h.size());
  a(0) = x.dx;
  a(1) = x.dy;
  a.tail(h.size()) = h;
  return a;
}

}  // namespace detail

inline HiddenState cell_step(const ModelParams& p, const HiddenState& h, const Offset& x)
{
  const Vector a = detail::concat(x, h);
  const Vector z = (p.w_update * a + p.b_update).unaryExpr(&detail::logistic);
  const Vector r = (p.w_reset * a + p.b_reset).unaryExpr(&detail::logistic);
  const Vector ar = detail::concat(x, r.cwiseProduct(h));
  const Vector n = (p.w_candidate * ar + p.b_candidate).array().tanh().matrix();
  return (Vector::Ones(h.size()) - z).cwiseProduct(h) + z.cwiseProduct(n);
}

inline mdn::RawMixtureOutputs heads(const ModelParams& p, const HiddenState& h)
{
  const Vector pi = p.w_pi * h + p.b_pi;
  const Vector rho = p.w_rho * h + p.b_rho;
  const Vector mu = p.w_mu * h + p.b_mu;
  const Vector sigma = p.w_sigma * h + p.b_sigma;
  const auto m = static_cast<std::size_t>(pi.size());

  mdn::RawMixtureOutputs raw;
  raw.pi_hat.assign(pi.data(), pi.data() + m);
  raw.rho_hat.assign(rho.data(), rho.data() + m);
  raw.mu_hat.resize(m);
  raw.sigma_hat.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto i = static_cast<Eigen::Index>(2 * k);
    raw.mu_hat[k] = {mu(i), mu(i + 1)};
    raw.sigma_hat[k] = {sigma(i), sigma(i + 1)};
  }
  return raw;
}

inline HiddenState initial_state(const ModelConfig& cfg)
{
  return HiddenState::Zero(cfg.hidden_dim);
}

/// One mixture per input offset; output t models the offset following input t.
inline std::vector<mdn::MixtureParams> forward_sequence(const Model& model,
                                                        std::span<const Offset> offsets)
{
  if (offsets.empty()) {
    throw std::invalid_argument("forward_sequence: empty sequence");
  }
  std::vector<mdn::MixtureParams> out;
  out.reserve(offsets.size());
  HiddenState h = initial_state(model.config);
  for (const Offset& x : offsets) {
    h = cell_step(model.params, h, x);
    out.push_back(mdn::constrain(heads(model.params, h), 0.0));
  }
  return out;
}

class TrainingDivergence : public std::runtime_error
{
public:
  TrainingDivergence(const std::string& what, std::size_t step)
    : std::runtime_error(what), step_(step)
  {
  }

  std::size_t step() const { return step_; }

private:
  std::size_t step_;
};

struct LossAndGradient
{
  double loss{0.0};
  ModelParams gradient;
};

namespace detail
{

/// d(-log p(target)) / d(raw head outputs) for one unbiased mixture step.
/// Outputs are laid out like the head biases.
inline double mixture_step_gradient(const mdn::RawMixtureOutputs& raw, const Offset& target,
                                    Vector& d_pi, Vector& d_rho, Vector& d_mu, Vector& d_sigma)
{
  const mdn::MixtureParams p = mdn::constrain(raw, 0.0);
  const std::size_t m = p.size();

  std::vector<double> log_terms(m);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < m; ++k) {
    log_terms[k] = std::log(p.weights[k]) +
                   mdn::component_log_density(p.means[k], p.sigmas[k], p.rhos[k], target);
    top = std::max(top, log_terms[k]);
  }
  double acc = 0.0;
  for (double t : log_terms) {
    acc += std::exp(t - top);
  }
  const double log_p = top + std::log(acc);

  for (std::size_t k = 0; k < m; ++k) {
    const auto ik = static_cast<Eigen::Index>(k);
    const auto i2 = static_cast<Eigen::Index>(2 * k);
    const double gamma = std::exp(log_terms[k] - log_p);
    d_pi(ik) = p.weights[k] - gamma;

    const double s1 = p.sigmas[k].x;
    const double s2 = p.sigmas[k].y;
    const double rho = p.rhos[k];
    const double q = 1.0 - rho * rho;
    const double z1 = (target.dx - p.means[k].dx) / s1;
    const double z2 = (target.dy - p.means[k].dy) / s2;
    const double quad = z1 * z1 + z2 * z2 - 2.0 * rho * z1 * z2;

    d_mu(i2) = -gamma * (z1 - rho * z2) / (s1 * q);
    d_mu(i2 + 1) = -gamma * (z2 - rho * z1) / (s2 * q);

    // Clamped entries are constant, so their gradient is zero.
    const bool s1_free = std::exp(raw.sigma_hat[k].x) > mdn::kSigmaMin;
    const bool s2_free = std::exp(raw.sigma_hat[k].y) > mdn::kSigmaMin;
    d_sigma(i2) = s1_free ? -gamma * (-1.0 + z1 * (z1 - rho * z2) / q) : 0.0;
    d_sigma(i2 + 1) = s2_free ? -gamma * (-1.0 + z2 * (z2 - rho * z1) / q) : 0.0;

    const bool rho_free = std::abs(std::tanh(raw.rho_hat[k])) < mdn::kRhoMax;
    d_rho(ik) = rho_free ? -gamma * (rho + z1 * z2 - rho * quad / q) : 0.0;
  }
  return -log_p;
}

}  // namespace detail

/// NLL of `targets` (target t is the offset after input t) and its exact
/// gradient with respect to every parameter.
inline LossAndGradient backward_sequence(const Model& model, std::span<const Offset> offsets,
                                         std::span<const Offset> targets)
{
  if (offsets.empty()) {
    throw std::invalid_argument("backward_sequence: empty sequence");
  }
  if (offsets.size() != targets.size()) {
    throw std::invalid_argument("backward_sequence: offsets and targets differ in length");
  }
  const ModelParams& p = model.params;
  const int hd = model.config.hidden_dim;
  const int md = model.config.mixtures;
  const std::size_t steps = offsets.size();

  struct StepCache
  {
    Vector h_prev, a, z, r, ar, n;
    Vector d_pi, d_rho, d_mu, d_sigma;
  };
  std::vector<StepCache> cache(steps);
  std::vector<Vector> hidden(steps);

  LossAndGradient result{0.0, ModelParams::zeros(model.config)};
  ModelParams& g = result.gradient;

  HiddenState h = initial_state(model.config);
  for (std::size_t t = 0; t < steps; ++t) {
    StepCache& c = cache[t];
    c.h_prev = h;
    c.a = detail::concat(offsets[t], h);
    c.z = (p.w_update * c.a + p.b_update).unaryExpr(&detail::logistic);
    c.r = (p.w_reset * c.a + p.b_reset).unaryExpr(&detail::logistic);
    c.ar = detail::concat(offsets[t], c.r.cwiseProduct(h));
    c.n = (p.w_candidate * c.ar + p.b_candidate).array().tanh().matrix();
    h = (Vector::Ones(hd) - c.z).cwiseProduct(h) + c.z.cwiseProduct(c.n);
    hidden[t] = h;

    c.d_pi.resize(md);
    c.d_rho.resize(md);
    c.d_mu.resize(2 * md);
    c.d_sigma.resize(2 * md);
    const double step_loss =
        detail::mixture_step_gradient(heads(p, h), targets[t], c.d_pi, c.d_rho, c.d_mu, c.d_sigma);
    if (!std::isfinite(step_loss)) {
      throw TrainingDivergence("non-finite loss at step " + std::to_string(t), t);
    }
    result.loss += step_loss;
  }

  Vector dh_next = Vector::Zero(hd);
  for (std::size_t t = steps; t-- > 0;) {
    const StepCache& c = cache[t];
    const Vector& hn = hidden[t];

    g.w_pi.noalias() += c.d_pi * hn.transpose();
    g.b_pi += c.d_pi;
    g.w_rho.noalias() += c.d_rho * hn.transpose();
    g.b_rho += c.d_rho;
    g.w_mu.noalias() += c.d_mu * hn.transpose();
    g.b_mu += c.d_mu;
    g.w_sigma.noalias() += c.d_sigma * hn.transpose();
    g.b_sigma += c.d_sigma;

    Vector dh = dh_next;
    dh.noalias() += p.w_pi.transpose() * c.d_pi;
    dh.noalias() += p.w_rho.transpose() * c.d_rho;
    dh.noalias() += p.w_mu.transpose() * c.d_mu;
    dh.noalias() += p.w_sigma.transpose() * c.d_sigma;

    const Vector dz = dh.cwiseProduct(c.n - c.h_prev);
    const Vector dn = dh.cwiseProduct(c.z);
    Vector dh_prev = dh.cwiseProduct(Vector::Ones(hd) - c.z);

    const Vector dpre_n = dn.cwiseProduct((Vector::Ones(hd) - c.n.cwiseProduct(c.n)));
    g.w_candidate.noalias() += dpre_n * c.ar.transpose();
    g.b_candidate += dpre_n;
    const Vector d_ar = p.w_candidate.transpose() * dpre_n;
    const Vector d_rh = d_ar.tail(hd);
    const Vector dr = d_rh.cwiseProduct(c.h_prev);
    dh_prev += d_rh.cwiseProduct(c.r);

    const Vector dpre_z = dz.cwiseProduct(c.z.cwiseProduct(Vector::Ones(hd) - c.z));
    g.w_update.noalias() += dpre_z * c.a.transpose();
    g.b_update += dpre_z;
    const Vector dpre_r = dr.cwiseProduct(c.r.cwiseProduct(Vector::Ones(hd) - c.r));
    g.w_reset.noalias() += dpre_r * c.a.transpose();
    g.b_reset += dpre_r;

    Vector da = p.w_update.transpose() * dpre_z;
    da.noalias() += p.w_reset.transpose() * dpre_r;
    dh_prev += da.tail(hd);

    dh_next = std::move(dh_prev);
  }
  return result;
}

/// Sequence NLL without gradients.
inline double sequence_loss(const Model& model, std::span<const Offset> offsets,
                            std::span<const Offset> targets)
{
  const auto params = forward_sequence(model, offsets);
  return mdn::nll_loss(params, targets);
}

}  // namespace traje::rnn
