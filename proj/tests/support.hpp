#pragma once

#include <cmath>
#include <memory>
#include <random>

#include "traje/rnn.hpp"

namespace traje::fixtures
{

/// Random model with small random biases.
inline rnn::Model random_model(int hidden, int mixtures, std::uint64_t seed)
{
  rnn::Model m = rnn::make_model({2, hidden, mixtures}, seed);
  Rng rng(seed + 1000);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  m.params.for_each([&](std::string_view name, auto& t) {
    if (name.front() == 'b') {
      for (Eigen::Index i = 0; i < t.size(); ++i) {
        t(i) = u(rng);
      }
    }
  });
  return m;
}

/// Hand-built single-component model whose mean is the last input offset
/// (within 1e-7 relative for offsets below 30 px) with isotropic spread `sigma`.
inline std::shared_ptr<const rnn::Model> constant_velocity_model(double sigma = 1.0)
{
  const double a = 1e-5;
  rnn::Model m;
  m.config = {2, 2, 1};
  m.params = rnn::ModelParams::zeros(m.config);
  m.params.b_update.setConstant(60.0);
  m.params.w_candidate(0, 0) = a;
  m.params.w_candidate(1, 1) = a;
  m.params.w_mu(0, 0) = 1.0 / a;
  m.params.w_mu(1, 1) = 1.0 / a;
  m.params.b_sigma.setConstant(std::log(sigma));
  return std::make_shared<const rnn::Model>(m);
}

}  // namespace traje::fixtures
