#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "traje/mdn.hpp"

using namespace traje;
using namespace traje::mdn;

namespace
{

RawMixtureOutputs random_raw(std::size_t m, Rng& rng, double spread = 3.0)
{
  std::uniform_real_distribution<double> u(-spread, spread);
  RawMixtureOutputs raw;
  for (std::size_t k = 0; k < m; ++k) {
    raw.pi_hat.push_back(u(rng));
    raw.mu_hat.push_back({u(rng), u(rng)});
    raw.sigma_hat.push_back({u(rng) / 3.0, u(rng) / 3.0});
    raw.rho_hat.push_back(u(rng) / 2.0);
  }
  return raw;
}

/// Random valid mixture with sigmas in [0.5, 2] and |rho| <= 0.9.
MixtureParams random_mixture(std::size_t m, Rng& rng)
{
  std::uniform_real_distribution<double> w(0.05, 1.0);
  std::uniform_real_distribution<double> mu(-3.0, 3.0);
  std::uniform_real_distribution<double> sg(0.5, 2.0);
  std::uniform_real_distribution<double> rho(-0.9, 0.9);
  MixtureParams p;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    p.weights.push_back(w(rng));
    total += p.weights.back();
    p.means.push_back({mu(rng), mu(rng)});
    p.sigmas.push_back({sg(rng), sg(rng)});
    p.rhos.push_back(rho(rng));
  }
  for (double& v : p.weights) {
    v /= total;
  }
  return p;
}

/// Midpoint-rule integral of the density over the means' bounding box
/// padded by 8 * max sigma.
double grid_integral(const MixtureParams& p, int cells)
{
  double smax = 0.0;
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (std::size_t k = 0; k < p.size(); ++k) {
    smax = std::max({smax, p.sigmas[k].x, p.sigmas[k].y});
    x0 = std::min(x0, p.means[k].dx);
    x1 = std::max(x1, p.means[k].dx);
    y0 = std::min(y0, p.means[k].dy);
    y1 = std::max(y1, p.means[k].dy);
  }
  x0 -= 8 * smax;
  x1 += 8 * smax;
  y0 -= 8 * smax;
  y1 += 8 * smax;
  const double hx = (x1 - x0) / cells;
  const double hy = (y1 - y0) / cells;
  double sum = 0.0;
  for (int i = 0; i < cells; ++i) {
    for (int j = 0; j < cells; ++j) {
      sum += density(p, {x0 + (i + 0.5) * hx, y0 + (j + 0.5) * hy});
    }
  }
  return sum * hx * hy;
}

MixtureParams single(Offset mu, Scale s, double rho)
{
  return {{1.0}, {mu}, {s}, {rho}};
}

}  // namespace

TEST(ConstrainTest, UniformWeightsFromEqualLogits)
{
  RawMixtureOutputs raw{{0, 0, 0, 0, 0}, {{}, {}, {}, {}, {}}, {{0, 0}, {0, 0}, {0, 0}, {0, 0}, {0, 0}},
                        {0, 0, 0, 0, 0}};
  const auto p = constrain(raw, 0.0);
  for (double w : p.weights) {
    EXPECT_DOUBLE_EQ(w, 0.2);
  }
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(p.rhos[k], 0.0);
    EXPECT_EQ(p.sigmas[k].x, 1.0);
    EXPECT_EQ(p.sigmas[k].y, 1.0);
  }
}

TEST(ConstrainTest, LargeBiasLimit)
{
  RawMixtureOutputs raw{{1, 0}, {{3, 4}, {-1, 2}}, {{0.5, 0.2}, {0, 0}}, {0.3, -0.2}};
  const auto p = constrain(raw, 1e4);
  EXPECT_NEAR(p.weights[0], 1.0, 1e-12);
  EXPECT_NEAR(p.weights[1], 0.0, 1e-12);
  for (const auto& s : p.sigmas) {
    EXPECT_EQ(s.x, kSigmaMin);
    EXPECT_EQ(s.y, kSigmaMin);
  }
}

TEST(ConstrainTest, NegativeBiasRejected)
{
  RawMixtureOutputs raw{{0}, {{0, 0}}, {{0, 0}}, {0}};
  EXPECT_THROW(constrain(raw, -0.1), std::invalid_argument);
}

TEST(ConstrainTest, ClampsRho)
{
  RawMixtureOutputs raw{{0}, {{0, 0}}, {{-50, 0}}, {40}};
  const auto p = constrain(raw, 0.0);
  EXPECT_EQ(p.rhos[0], kRhoMax);
  EXPECT_EQ(p.sigmas[0].x, kSigmaMin);
}

TEST(ConstrainTest, InvariantsHoldForRandomInputs)
{
  Rng rng(3);
  std::uniform_real_distribution<double> bias(0.0, 20.0);
  for (int i = 0; i < 500; ++i) {
    const auto raw = random_raw(1 + i % 5, rng, 30.0);
    const auto p = constrain(raw, bias(rng));
    double total = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      EXPECT_GE(p.weights[k], 0.0);
      total += p.weights[k];
      EXPECT_GE(p.sigmas[k].x, kSigmaMin);
      EXPECT_GE(p.sigmas[k].y, kSigmaMin);
      EXPECT_LE(std::abs(p.rhos[k]), kRhoMax);
      EXPECT_EQ(p.means[k], raw.mu_hat[k]);
    }
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
}

TEST(ConstrainTest, BiasIsMonotone)
{
  Rng rng(5);
  for (int i = 0; i < 300; ++i) {
    const auto raw = random_raw(5, rng);
    double b1 = std::uniform_real_distribution<double>(0, 5)(rng);
    double b2 = b1 + std::uniform_real_distribution<double>(0.01, 5)(rng);
    const auto p1 = constrain(raw, b1);
    const auto p2 = constrain(raw, b2);
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_LE(p2.sigmas[k].x, p1.sigmas[k].x);
      EXPECT_LE(p2.sigmas[k].y, p1.sigmas[k].y);
    }
    EXPECT_GE(p2.weights[best_component(p2)], p1.weights[best_component(p1)] - 1e-15);
  }
}

TEST(DensityTest, StandardNormalValues)
{
  const auto p = single({0, 0}, {1, 1}, 0.0);
  EXPECT_NEAR(density(p, {0, 0}), 1.0 / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(density(p, {0, 0}), 0.159155, 1e-6);
  EXPECT_NEAR(density(p, {1, 0}), std::exp(-0.5) / (2.0 * std::numbers::pi), 1e-15);
  EXPECT_NEAR(density(p, {1, 0}), 0.096532, 1e-6);
}

TEST(DensityTest, IntegratesToOne)
{
  Rng rng(17);
  for (int i = 0; i < 10; ++i) {
    const auto p = random_mixture(1 + i % 5, rng);
    EXPECT_NEAR(grid_integral(p, 500), 1.0, 1e-3);
  }
}

TEST(LogDensityTest, PeakValue)
{
  const auto p = single({2, -1}, {1, 1}, 0.0);
  EXPECT_NEAR(log_density(p, {2, -1}), -std::log(2.0 * std::numbers::pi), 1e-14);
}

TEST(LogDensityTest, FiniteInFarTail)
{
  const auto p = single({0, 0}, {1, 1}, 0.5);
  EXPECT_EQ(density(p, {1e3, -1e3}), 0.0);
  const double ld = log_density(p, {1e3, -1e3});
  EXPECT_TRUE(std::isfinite(ld));
  EXPECT_LT(ld, -1e5);

  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const auto q = random_mixture(5, rng);
    const double far = 100.0 * 2.0;
    EXPECT_TRUE(std::isfinite(log_density(q, {far + 10, -far - 10})));
  }
}

TEST(LogDensityTest, MatchesLogOfDensity)
{
  Rng rng(23);
  std::uniform_real_distribution<double> u(-6, 6);
  for (int i = 0; i < 1000; ++i) {
    const auto p = random_mixture(1 + i % 5, rng);
    const Offset x{u(rng), u(rng)};
    const double d = density(p, x);
    if (d > 1e-300) {
      const double expected = std::log(d);
      EXPECT_NEAR(log_density(p, x), expected, 1e-9 * std::max(1.0, std::abs(expected)));
    }
  }
}

TEST(NllTest, SingleStepAndAdditivity)
{
  const auto p = single({0, 0}, {1, 1}, 0.0);
  std::vector<MixtureParams> one{p};
  std::vector<Offset> t1{{0, 0}};
  const double l1 = nll_loss(one, t1);
  EXPECT_NEAR(l1, std::log(2.0 * std::numbers::pi), 1e-14);
  EXPECT_NEAR(l1, 1.83788, 1e-5);

  std::vector<MixtureParams> two{p, p};
  std::vector<Offset> t2{{0, 0}, {0, 0}};
  EXPECT_EQ(nll_loss(two, t2), 2.0 * l1);
}

TEST(NllTest, MatchesPerStepSum)
{
  Rng rng(29);
  std::uniform_real_distribution<double> u(-4, 4);
  std::vector<MixtureParams> ps;
  std::vector<Offset> ts;
  for (int t = 0; t < 12; ++t) {
    ps.push_back(random_mixture(3, rng));
    ts.push_back({u(rng), u(rng)});
  }
  double brute = 0.0;
  for (std::size_t t = 0; t < ps.size(); ++t) {
    brute += -std::log(density(ps[t], ts[t]));
  }
  EXPECT_NEAR(nll_loss(ps, ts), brute, 1e-9 * std::abs(brute));

  // Additive over concatenation.
  std::span<const MixtureParams> all(ps);
  std::span<const Offset> targets(ts);
  EXPECT_NEAR(nll_loss(all, targets),
              nll_loss(all.first(5), targets.first(5)) + nll_loss(all.subspan(5), targets.subspan(5)),
              1e-12);
}

TEST(NllTest, LengthMismatchRejected)
{
  std::vector<MixtureParams> ps{single({0, 0}, {1, 1}, 0)};
  std::vector<Offset> ts{{0, 0}, {1, 1}};
  EXPECT_THROW(nll_loss(ps, ts), std::invalid_argument);
}

TEST(SampleTest, DegenerateWidth)
{
  const auto p = single({3, 4}, {kSigmaMin, kSigmaMin}, 0.0);
  Rng rng(1);
  for (int i = 0; i < 100; ++i) {
    const Offset s = sample(p, rng);
    EXPECT_NEAR(s.dx, 3.0, 10 * kSigmaMin);
    EXPECT_NEAR(s.dy, 4.0, 10 * kSigmaMin);
  }
}

TEST(SampleTest, DeterministicGivenSeed)
{
  Rng rng0(99);
  const auto p = random_mixture(5, rng0);
  Rng a(42), b(42);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(sample(p, a), sample(p, b));
  }
}

TEST(SampleTest, MomentsMatchCovariance)
{
  const auto p = single({0, 0}, {1, 2}, 0.5);
  Rng rng(2024);
  const int n = 100000;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    const Offset s = sample(p, rng);
    sx += s.dx;
    sy += s.dy;
    sxx += s.dx * s.dx;
    syy += s.dy * s.dy;
    sxy += s.dx * s.dy;
  }
  const double mx = sx / n, my = sy / n;
  EXPECT_NEAR(mx, 0.0, 0.02);
  EXPECT_NEAR(my, 0.0, 0.02);
  // Covariance [[1, 1], [1, 4]] (rho * sx * sy = 0.5 * 1 * 2).
  EXPECT_NEAR(sxx / n - mx * mx, 1.0, 0.03);
  EXPECT_NEAR(syy / n - my * my, 4.0, 0.03 * 4.0);
  EXPECT_NEAR(sxy / n - mx * my, 1.0, 0.03);
}

TEST(SampleTest, ComponentFrequenciesFollowWeights)
{
  MixtureParams p{{0.2, 0.5, 0.3},
                  {{-100, 0}, {0, 0}, {100, 0}},
                  {{1, 1}, {1, 1}, {1, 1}},
                  {0, 0, 0}};
  Rng rng(8);
  int counts[3] = {0, 0, 0};
  const int n = 60000;
  for (int i = 0; i < n; ++i) {
    const Offset s = sample(p, rng);
    counts[s.dx < -50 ? 0 : (s.dx > 50 ? 2 : 1)]++;
  }
  EXPECT_NEAR(counts[0] / double(n), 0.2, 0.01);
  EXPECT_NEAR(counts[1] / double(n), 0.5, 0.01);
  EXPECT_NEAR(counts[2] / double(n), 0.3, 0.01);
}

TEST(BestMeanTest, PicksMaxWeight)
{
  MixtureParams p{{0.1, 0.7, 0.2}, {{1, 1}, {2, 2}, {3, 3}}, {{1, 1}, {1, 1}, {1, 1}}, {0, 0, 0}};
  EXPECT_EQ(best_mean(p), (Offset{2, 2}));
}

TEST(BestMeanTest, TieGoesToFirst)
{
  RawMixtureOutputs raw{{0, 0, 0}, {{1, 1}, {2, 2}, {3, 3}}, {{0, 0}, {0, 0}, {0, 0}}, {0, 0, 0}};
  EXPECT_EQ(best_mean(constrain(raw, 0.0)), (Offset{1, 1}));
}

TEST(BestMeanTest, ShiftInvariant)
{
  Rng rng(31);
  for (int i = 0; i < 200; ++i) {
    auto raw = random_raw(5, rng);
    const Offset before = best_mean(constrain(raw, 0.0));
    for (double& v : raw.pi_hat) {
      v += 3.25;
    }
    EXPECT_EQ(best_mean(constrain(raw, 0.0)), before);
  }
}
