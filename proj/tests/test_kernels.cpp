#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "msgp/error.hpp"
#include "msgp/kernels.hpp"
#include "msgp/rng.hpp"

using namespace msgp;

TEST(SeCovariance, ZeroLagIsPhi) {
  for (std::size_t d = 1; d <= 3; ++d) {
    SEKernelParams p{2.5, std::vector<double>(d, 1.7)};
    std::vector<double> zero(d, 0.0);
    EXPECT_DOUBLE_EQ(se_covariance(zero, p), 2.5);
  }
}

TEST(SeCovariance, UnitLag) {
  const double delta[] = {1.0};
  EXPECT_NEAR(se_covariance(delta, {1.0, {1.0}}), 0.6065306597126334, 1e-15);
}

TEST(SeCovariance, EvenAndBounded) {
  Rng rng(1);
  SEKernelParams p{1.3, {2.0, 0.7}};
  for (int i = 0; i < 100; ++i) {
    const double a[] = {rng.uniform(-10, 10), rng.uniform(-10, 10)};
    const double b[] = {-a[0], -a[1]};
    const double v = se_covariance(a, p);
    EXPECT_EQ(v, se_covariance(b, p));
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, 1.3);
  }
}

TEST(SeCovariance, DimensionMismatch) {
  const double delta[] = {1.0, 2.0};
  EXPECT_THROW(se_covariance(delta, {1.0, {1.0}}), Error);
}

TEST(SeSpectralDensity, ClosedFormAtZero) {
  const double w[] = {0.0};
  EXPECT_NEAR(se_spectral_density(w, {1.0, {1.0}}), 2.5066282746310002, 1e-14);
}

TEST(SeSpectralDensity, MatchesQuadrature) {
  // Quadrature of the cosine transform over [-40, 40] (mpmath, 30 digits).
  const double w[] = {0.7};
  EXPECT_NEAR(se_spectral_density(w, {1.3, {2.2}}), 2.1901283688776571, 1e-12);
}

TEST(SeSpectralDensity, ZeroPhiAndSymmetry) {
  Rng rng(2);
  SEKernelParams p{1.0, {1.5, 3.0}};
  for (int i = 0; i < 50; ++i) {
    const double w[] = {rng.uniform(-3, 3), rng.uniform(-3, 3)};
    const double mw[] = {-w[0], -w[1]};
    EXPECT_EQ(se_spectral_density(w, p), se_spectral_density(mw, p));
    EXPECT_EQ(se_spectral_density(w, {0.0, {1.5, 3.0}}), 0.0);
  }
}

TEST(StCovariance, Examples) {
  const double zero[] = {0.0, 0.0, 0.0};
  NonSeparableSTParams c1{6.71, 12.17, 10.89, 16.43, 6347, 4615};
  EXPECT_DOUBLE_EQ(st_covariance(zero, c1), 6.71);
  const double lag[] = {1.0, 0.0, 0.0};
  EXPECT_NEAR(st_covariance(lag, c1), 6.6873859416654077, 1e-13);
}

TEST(StCovariance, SeparableLimit) {
  NonSeparableSTParams p{2.0, 3.0, 4.0, 5.0, 1e300, 1e300};
  const double lag[] = {1.5, -2.0, 3.0};
  const double expected = 2.0 * std::exp(-1.5 * 1.5 / 18.0 - 4.0 / 32.0) * std::exp(-3.0 / 5.0);
  EXPECT_NEAR(st_covariance(lag, p), expected, 1e-14);
}

TEST(StCovariance, EvenInEveryCoordinate) {
  Rng rng(3);
  NonSeparableSTParams p{1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  for (int i = 0; i < 100; ++i) {
    const double a[] = {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)};
    const double b[] = {-a[0], -a[1], -a[2]};
    EXPECT_EQ(st_covariance(a, p), st_covariance(b, p));
  }
}

TEST(Validate, RejectsNonPositive) {
  EXPECT_THROW(validate(SEKernelParams{0.0, {1.0}}), Error);
  EXPECT_THROW(validate(SEKernelParams{1.0, {-1.0}}), Error);
  EXPECT_THROW(validate(NonSeparableSTParams{1, 1, 1, 1, 0, 1}), Error);
  EXPECT_NO_THROW(validate(NonSeparableSTParams{}));
}

TEST(NumericSpectralDensity, SeMatchesClosedForm) {
  const Lattice lattice({256});
  SEKernelParams p{1.0, {5.0}};
  const auto table =
      numeric_spectral_density([&](std::span<const double> d) { return se_covariance(d, p); }, lattice);
  const double peak = se_spectral_density(std::vector<double>{0.0}, p);
  for (std::size_t t = 0; t < lattice.size(); ++t) {
    const double w[] = {lattice.frequency(0, t)};
    const double exact = se_spectral_density(w, p);
    if (exact < 1e-8 * peak) continue;
    EXPECT_NEAR(table.values()[t], exact, 1e-3 * exact) << "t=" << t;
  }
}

TEST(NumericSpectralDensity, ErrorShrinksWithLattice) {
  SEKernelParams p{1.0, {6.0}};
  std::vector<double> errs;
  for (std::size_t m : {64u, 128u, 256u}) {
    const Lattice lattice({m});
    const auto table =
        numeric_spectral_density([&](std::span<const double> d) { return se_covariance(d, p); }, lattice);
    const double peak = se_spectral_density(std::vector<double>{0.0}, p);
    double worst = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      const double w[] = {lattice.frequency(0, t)};
      const double exact = se_spectral_density(w, p);
      if (exact >= 1e-3 * peak) worst = std::max(worst, std::abs(table.values()[t] - exact) / exact);
    }
    errs.push_back(worst);
  }
  EXPECT_LE(errs[1], std::max(errs[0] / 2, 1e-12));
  EXPECT_LE(errs[2], std::max(errs[1] / 2, 1e-12));
}

TEST(NumericSpectralDensity, DegenerateKernels) {
  const Lattice lattice({8, 4});
  const auto zero = numeric_spectral_density([](std::span<const double>) { return 0.0; }, lattice);
  for (double v : zero.values()) EXPECT_EQ(v, 0.0);
  const auto delta = numeric_spectral_density(
      [](std::span<const double> d) { return d[0] == 0.0 && d[1] == 0.0 ? 1.0 : 0.0; }, lattice);
  for (double v : delta.values()) EXPECT_NEAR(v, 1.0, 1e-14);
}

TEST(NumericSpectralDensity, SymmetricAndNonnegative) {
  const Lattice lattice({16, 8, 6});
  const NonSeparableSTParams p{1.0, 2.0, 1.5, 2.0, 1e5, 1e5};
  const auto table =
      numeric_spectral_density([&](std::span<const double> d) { return st_covariance(d, p); }, lattice, {5, 5, 5});
  for (std::size_t f = 0; f < table.size(); ++f) {
    EXPECT_GE(table.values()[f], 0.0);
    EXPECT_EQ(table.values()[f], table.values()[lattice.mirror(f)]);
  }
}

TEST(NumericSpectralDensity, RoundTripReproducesSampledKernel) {
  const Lattice lattice({24, 20});
  SEKernelParams p{1.4, {1.2, 2.0}};
  const LagKernel k = [&](std::span<const double> d) { return se_covariance(d, p); };
  const auto table = numeric_spectral_density(k, lattice);
  const auto sampled = sampled_kernel(k, lattice);
  std::vector<Complex> g(table.values().begin(), table.values().end());
  const auto back = dft_inverse(lattice, g);
  const double root_n = std::sqrt(static_cast<double>(lattice.size()));
  for (std::size_t i = 0; i < lattice.size(); ++i) EXPECT_NEAR(back[i].real() / root_n, sampled[i], 1e-8);
}

TEST(NumericSpectralDensity, LargeNegativeMassIsAnError) {
  const Lattice lattice({16});
  // Box kernel: its transform is a Dirichlet kernel with large negative lobes.
  const LagKernel box = [](std::span<const double> d) { return std::abs(d[0]) <= 3.0 ? 1.0 : 0.0; };
  EXPECT_THROW(numeric_spectral_density(box, lattice), Error);
}

TEST(Registry, ParamNamesAndMaps) {
  EXPECT_EQ(param_names("se", 2), (std::vector<std::string>{"phi", "rho1", "rho2"}));
  EXPECT_EQ(param_names("st_nonseparable", 3),
            (std::vector<std::string>{"phi", "rho1", "rho2", "rho3", "c1", "c2"}));
  const Theta t = make_theta(NonSeparableSTParams{1, 2, 3, 4, 5, 6});
  const auto map = to_param_map(t);
  EXPECT_EQ(map.at("c2"), 6.0);
  EXPECT_EQ(theta_from_map("st_nonseparable", 3, map), t);
  EXPECT_THROW(kernel_definition("matern"), Error);
  auto bad = map;
  bad["rho4"] = 1.0;
  EXPECT_THROW(theta_from_map("st_nonseparable", 3, bad), Error);
}

TEST(Registry, ZeroLagEqualsPhiForEveryFamily) {
  Rng rng(4);
  for (int i = 0; i < 20; ++i) {
    const Theta se = make_theta(SEKernelParams{rng.uniform(0.1, 5), {rng.uniform(0.5, 9), rng.uniform(0.5, 9)}});
    const Theta st = make_theta(NonSeparableSTParams{rng.uniform(0.1, 5), 1, 2, 3, 4, 5});
    EXPECT_EQ(lag_covariance(se, std::vector<double>{0, 0}), se.phi());
    EXPECT_EQ(lag_covariance(st, std::vector<double>{0, 0, 0}), st.phi());
  }
}

TEST(Registry, CustomFamily) {
  KernelDefinition def;
  def.name = "test_exponential";
  def.param_names = [](std::size_t) { return std::vector<std::string>{"phi", "rho1"}; };
  def.covariance = [](std::span<const double> v, std::span<const double> d) {
    return v[0] * std::exp(-std::abs(d[0]) / v[1]);
  };
  register_kernel(def);
  Theta t{"test_exponential", 1, {2.0, 3.0}};
  EXPECT_NO_THROW(validate(t));
  EXPECT_NEAR(lag_covariance(t, std::vector<double>{3.0}), 2.0 * std::exp(-1.0), 1e-15);
  t.values[1] = -1.0;
  EXPECT_THROW(validate(t), Error);
}
