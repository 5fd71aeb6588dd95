// Bivariate Gaussian mixture density machinery: turning raw network outputs
// into a valid mixture (optionally sharpened by a sampling bias), evaluating
// its density, the sequence NLL, sampling, and the best-mean selector.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "traje/core.hpp"

namespace traje
{

using Rng = std::mt19937_64;

namespace mdn
{

/// Lower bound on every standard deviation, in pixels.
inline constexpr double kSigmaMin = 1e-3;
/// Bound on |rho| so that 1 - rho^2 stays away from zero.
inline constexpr double kRhoMax = 0.999;

struct Scale
{
  double x{1.0};
  double y{1.0};

  friend bool operator==(const Scale&, const Scale&) = default;
};

/// Unconstrained head outputs for one time step. sigma_hat holds log-scales.
struct RawMixtureOutputs
{
  std::vector<double> pi_hat;
  std::vector<Offset> mu_hat;
  std::vector<Scale> sigma_hat;
  std::vector<double> rho_hat;

  std::size_t size() const { return pi_hat.size(); }
};

struct MixtureParams
{
  std::vector<double> weights;
  std::vector<Offset> means;
  std::vector<Scale> sigmas;
  std::vector<double> rhos;

  std::size_t size() const { return weights.size(); }

  friend bool operator==(const MixtureParams&, const MixtureParams&) = default;
};

/// Numerically stable softmax of `logits * scale`.
inline std::vector<double> softmax(std::span<const double> logits, double scale = 1.0)
{
  std::vector<double> out(logits.size());
  if (logits.empty()) {
    return out;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (double v : logits) {
    top = std::max(top, v * scale);
  }
  double total = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] * scale - top);
    total += out[k];
  }
  for (double& v : out) {
    v /= total;
  }
  return out;
}

/// Maps raw outputs to a valid mixture. bias = 0 gives the plain softmax /
/// exp / tanh transforms; larger bias sharpens weights and shrinks sigmas.
inline MixtureParams constrain(const RawMixtureOutputs& raw, double bias)
{
  if (!(bias >= 0.0)) {
    throw std::invalid_argument("constrain: bias must be non-negative");
  }
  const std::size_t m = raw.size();
  if (raw.mu_hat.size() != m || raw.sigma_hat.size() != m || raw.rho_hat.size() != m) {
    throw std::invalid_argument("constrain: inconsistent mixture count");
  }

  MixtureParams p;
  p.weights = softmax(raw.pi_hat, 1.0 + bias);
  p.means = raw.mu_hat;
  p.sigmas.resize(m);
  p.rhos.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    p.sigmas[k].x = std::max(std::exp(raw.sigma_hat[k].x - bias), kSigmaMin);
    p.sigmas[k].y = std::max(std::exp(raw.sigma_hat[k].y - bias), kSigmaMin);
    p.rhos[k] = std::clamp(std::tanh(raw.rho_hat[k]), -kRhoMax, kRhoMax);
  }
  return p;
}

/// Log of one bivariate normal component evaluated at x.
inline double component_log_density(const Offset& mean, const Scale& sigma, double rho,
                                    const Offset& x)
{
  const double z1 = (x.dx - mean.dx) / sigma.x;
  const double z2 = (x.dy - mean.dy) / sigma.y;
  const double one_minus_rho2 = 1.0 - rho * rho;
  const double quad = z1 * z1 + z2 * z2 - 2.0 * rho * z1 * z2;
  return -std::log(2.0 * std::numbers::pi * sigma.x * sigma.y * std::sqrt(one_minus_rho2)) -
         quad / (2.0 * one_minus_rho2);
}

inline double density(const MixtureParams& params, const Offset& x)
{
  double total = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double z1 = (x.dx - params.means[k].dx) / params.sigmas[k].x;
    const double z2 = (x.dy - params.means[k].dy) / params.sigmas[k].y;
    const double rho = params.rhos[k];
    const double one_minus_rho2 = 1.0 - rho * rho;
    const double quad = z1 * z1 + z2 * z2 - 2.0 * rho * z1 * z2;
    const double norm =
        2.0 * std::numbers::pi * params.sigmas[k].x * params.sigmas[k].y * std::sqrt(one_minus_rho2);
    total += params.weights[k] * std::exp(-quad / (2.0 * one_minus_rho2)) / norm;
  }
  return total;
}

/// log(density) through log-sum-exp; finite far into the tails.
inline double log_density(const MixtureParams& params, const Offset& x)
{
  double top = -std::numeric_limits<double>::infinity();
  std::vector<double> terms(params.size());
  for (std::size_t k = 0; k < params.size(); ++k) {
    terms[k] = params.weights[k] > 0.0
                   ? std::log(params.weights[k]) +
                         component_log_density(params.means[k], params.sigmas[k], params.rhos[k], x)
                   : -std::numeric_limits<double>::infinity();
    top = std::max(top, terms[k]);
  }
  double acc = 0.0;
  for (double t : terms) {
    acc += std::exp(t - top);
  }
  return top + std::log(acc);
}

/// Sum over the sequence of -log density of each target under its step's mixture.
inline double nll_loss(std::span<const MixtureParams> param_seq, std::span<const Offset> targets)
{
  if (param_seq.size() != targets.size()) {
    throw std::invalid_argument("nll_loss: parameter and target sequences differ in length");
  }
  if (param_seq.empty()) {
    throw std::invalid_argument("nll_loss: empty sequence");
  }
  double loss = 0.0;
  for (std::size_t t = 0; t < param_seq.size(); ++t) {
    loss -= log_density(param_seq[t], targets[t]);
  }
  return loss;
}

inline double nll_mean(std::span<const MixtureParams> param_seq, std::span<const Offset> targets)
{
  return nll_loss(param_seq, targets) / static_cast<double>(targets.size());
}

/// Inverse-CDF pick over the weight prefix sums for a uniform draw u in [0, 1).
inline std::size_t pick_component(const MixtureParams& params, double u)
{
  double cumulative = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    cumulative += params.weights[k];
    if (u < cumulative) {
      return k;
    }
  }
  // u landed in the rounding slack above the last prefix sum.
  for (std::size_t k = params.size(); k-- > 0;) {
    if (params.weights[k] > 0.0) {
      return k;
    }
  }
  return 0;
}

inline Offset sample(const MixtureParams& params, Rng& rng)
{
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const std::size_t k = pick_component(params, uniform(rng));

  std::normal_distribution<double> normal(0.0, 1.0);
  const double n1 = normal(rng);
  const double n2 = normal(rng);
  const double rho = params.rhos[k];
  // Cholesky factor of [[sx^2, rho sx sy], [rho sx sy, sy^2]].
  return {params.means[k].dx + params.sigmas[k].x * n1,
          params.means[k].dy + params.sigmas[k].y * (rho * n1 + std::sqrt(1.0 - rho * rho) * n2)};
}

/// Index of the max-weight component; ties go to the lowest index.
inline std::size_t best_component(const MixtureParams& params)
{
  std::size_t best = 0;
  for (std::size_t k = 1; k < params.size(); ++k) {
    if (params.weights[k] > params.weights[best]) {
      best = k;
    }
  }
  return best;
}

inline Offset best_mean(const MixtureParams& params)
{
  return params.means[best_component(params)];
}

}  // namespace mdn
}  // namespace traje
