#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "msgp/error.hpp"
#include "msgp/simdata.hpp"

using namespace msgp;

TEST(PintoreCovariance, ZeroLagIsPhi) {
  const auto f = PintoreField::paper(1.7);
  for (double x : {5.0, 25.0, 60.0}) EXPECT_DOUBLE_EQ(pintore_covariance({x, x}, {x, x}, f), 1.7);
}

TEST(PintoreCovariance, PaperFieldValues) {
  const auto f = PintoreField::paper();
  EXPECT_DOUBLE_EQ(f.rho(0.0, 0.0), 3.0);
  EXPECT_DOUBLE_EQ(f.beta(0.0, 0.0), 18.0);
  EXPECT_NEAR(pintore_covariance({0.0, 0.0}, {1.0, 2.0}, f), 0.7589963862787276, 1e-14);
}

TEST(PintoreCovariance, ConstantBetaIsStationarySe) {
  PintoreField f;
  f.phi = 2.0;
  f.rho = [](double, double) { return 1.5; };
  const double lag[] = {1.0, -2.0};
  EXPECT_NEAR(pintore_covariance({3.0, 4.0}, {4.0, 2.0}, f), se_covariance(lag, {2.0, {1.5, 1.5}}), 1e-14);
}

TEST(PintoreCovariance, ScaleFactorInUnitInterval) {
  const auto f = PintoreField::paper();
  Rng rng(1);
  for (int i = 0; i < 200; ++i) {
    const Point2 a{rng.uniform(0, 100), rng.uniform(0, 100)};
    const Point2 b{a[0], a[1]};
    const Point2 c{a[0] + rng.uniform(-3, 3), a[1] + rng.uniform(-3, 3)};
    const double h = pintore_covariance(a, c, f) / std::exp(-(std::pow(a[0] - c[0], 2) + std::pow(a[1] - c[1], 2)) /
                                                            (0.5 * (f.beta(a[0], a[1]) + f.beta(c[0], c[1]))));
    EXPECT_GT(h, 0.0);
    EXPECT_LE(h, 1.0 + 1e-15);
    EXPECT_EQ(pintore_covariance(a, b, f), 1.0);
  }
}

TEST(PintoreCovariance, MatrixIsPositiveDefinite) {
  const auto f = PintoreField::paper();
  const auto grid = pintore_grid(8, 8, f);
  const Eigen::MatrixXd k = pintore_covariance_matrix(grid, f);
  EXPECT_EQ((k - k.transpose()).cwiseAbs().maxCoeff(), 0.0);
  EXPECT_GT(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(k).eigenvalues().minCoeff(), -1e-10);
}

TEST(SeMixedCovariance, Examples) {
  const double lag[] = {2.0};
  EXPECT_NEAR(se_mixed_covariance(lag, {2.0, {1.5}}, {1.0, {3.0}}), 0.886429448519987, 1e-14);
  EXPECT_NEAR(se_mixed_covariance(lag, {2.0, {1.5}}, {2.0, {1.5}}), se_covariance(lag, {2.0, {1.5}}), 1e-15);
  EXPECT_THROW(se_mixed_covariance(lag, {1.0, {1.0, 1.0}}, {1.0, {1.0}}), Error);
}

TEST(SampleGaussian, CovarianceByMonteCarlo) {
  Eigen::MatrixXd k(2, 2);
  k << 2.0, 0.8, 0.8, 1.0;
  Rng rng(2);
  const int n = 20000;
  double s00 = 0, s01 = 0, s11 = 0;
  for (int r = 0; r < n; ++r) {
    const auto y = sample_gaussian(k, 0.5, rng);
    s00 += y[0] * y[0];
    s01 += y[0] * y[1];
    s11 += y[1] * y[1];
  }
  // Standard errors of second moments of a bivariate normal.
  const double v00 = 2.5, v11 = 1.5, v01 = 0.8;
  EXPECT_LT(std::abs(s00 / n - v00) / std::sqrt(2 * v00 * v00 / n), 3.0);
  EXPECT_LT(std::abs(s11 / n - v11) / std::sqrt(2 * v11 * v11 / n), 3.0);
  EXPECT_LT(std::abs(s01 / n - v01) / std::sqrt((v00 * v11 + v01 * v01) / n), 3.0);
}

TEST(SampleGaussian, RejectsIndefinite) {
  Eigen::MatrixXd k(2, 2);
  k << 1.0, 2.0, 2.0, 1.0;
  Rng rng(3);
  EXPECT_THROW(sample_gaussian(k, 0.0, rng), Error);
}

TEST(SimulatePintore, SingleSiteVariance) {
  const auto f = PintoreField::paper(1.3);
  const Point2 site[] = {{10.0, 20.0}};
  Rng rng(4);
  const int n = 20000;
  double s = 0, s2 = 0;
  for (int r = 0; r < n; ++r) {
    const double y = simulate_pintore(site, f, 0.2, rng)[0];
    s += y;
    s2 += y * y;
  }
  EXPECT_LT(std::abs(s / n) / std::sqrt(1.5 / n), 3.0);
  EXPECT_LT(std::abs(s2 / n - 1.5) / std::sqrt(2 * 1.5 * 1.5 / n), 3.0);
}

TEST(SimulatePintore, DuplicateSitesWithoutNoiseAgree) {
  const auto f = PintoreField::paper();
  const Point2 sites[] = {{30.0, 40.0}, {30.0, 40.0}, {70.0, 10.0}};
  Rng rng(5);
  for (int r = 0; r < 10; ++r) {
    const auto y = simulate_pintore(sites, f, 0.0, rng);
    EXPECT_NEAR(y[0], y[1], 1e-6);
  }
}

TEST(SimulatePintore, DatasetShapeAndLabels) {
  const auto f = pintore_levels({1.5, 3.0, 6.0}, 10.0);
  Rng rng(6);
  const auto d = simulate_pintore_dataset(10, 10, f, 0.25, rng,
                                          [](double x1, double x2) { return pintore_level(x1, x2, 10.0); });
  EXPECT_EQ(d.dims, 2u);
  EXPECT_EQ(d.size(), 100u);
  EXPECT_EQ(d.true_component.size(), 100u);
  EXPECT_DOUBLE_EQ(d.coords[1][0], 0.5);
  EXPECT_DOUBLE_EQ(d.coords[1][1], 1.5);
  Rng again(6);
  EXPECT_EQ(simulate_pintore_dataset(10, 10, f, 0.25, again).y, d.y);
}

TEST(PintoreLevels, CountsOnFortyGrid) {
  std::array<int, 3> counts{};
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 40; ++j) ++counts[static_cast<std::size_t>(pintore_level(i + 0.5, j + 0.5, 40.0) - 1)];
  }
  EXPECT_EQ(counts, (std::array<int, 3>{468, 540, 592}));
  EXPECT_THROW(pintore_levels({1.0, 0.0, 1.0}, 40.0), Error);
}

TEST(TwoRegion, RightRegionIsSmoother) {
  Rng rng(7);
  TwoRegionOptions o;
  double left = 0.0, right = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    const auto d = simulate_two_region_1d(o, rng);
    for (std::size_t i = 0; i + 5 < 50; ++i) left += d.y[i] * d.y[i + 5];
    for (std::size_t i = 50; i + 5 < 100; ++i) right += d.y[i] * d.y[i + 5];
  }
  // Lag-5 covariances: 4 exp(-25/18) = 0.997 left, 4 exp(-25/288) = 3.667 right.
  EXPECT_NEAR(left / (45.0 * reps), 0.997, 0.3);
  EXPECT_NEAR(right / (45.0 * reps), 3.667, 1.0);
  EXPECT_GT(right, left);
}

TEST(TwoRegion, CovarianceStructure) {
  TwoRegionOptions o;
  o.n = 6;
  o.split = 3;
  const auto k = two_region_covariance(o);
  const double lag[] = {1.0};
  EXPECT_DOUBLE_EQ(k(0, 1), se_covariance(lag, o.left));
  EXPECT_DOUBLE_EQ(k(4, 5), se_covariance(lag, o.right));
  EXPECT_DOUBLE_EQ(k(2, 3), se_mixed_covariance(lag, o.left, o.right));
  o.zero_cross = true;
  EXPECT_EQ(two_region_covariance(o)(2, 3), 0.0);
  o.split = 7;
  EXPECT_THROW(two_region_covariance(o), Error);
}

TEST(TwoRegion, LabelsAndNoiseDominated) {
  TwoRegionOptions o;
  o.left.phi = 1e-6;
  o.right.phi = 1e-6;
  o.sigma2 = 1.0;
  Rng rng(8);
  double s2 = 0.0;
  std::size_t n = 0;
  for (int r = 0; r < 100; ++r) {
    const auto d = simulate_two_region_1d(o, rng);
    EXPECT_EQ(d.true_component.front(), 1);
    EXPECT_EQ(d.true_component.back(), 2);
    for (double y : d.y) s2 += y * y;
    n += d.size();
  }
  EXPECT_NEAR(s2 / static_cast<double>(n), 1.0, 3.0 * std::sqrt(2.0 / static_cast<double>(n)));
}

TEST(StCube, ShapeLabelsAndDeterminism) {
  const NonSeparableSTParams comps[] = {{1.0, 2.0, 2.0, 1.5, 1e5, 1e5}, {0.5, 1.5, 1.5, 1.0, 1e5, 1e5}};
  std::vector<std::size_t> region(4 * 3 * 1);
  for (std::size_t s = 0; s < region.size(); ++s) region[s] = s < 6 ? 0 : 1;
  Rng a(9), b(9);
  const auto d = simulate_st_cube(4, 3, 1, comps, region, 0.1, a);
  EXPECT_EQ(d.dims, 3u);
  EXPECT_EQ(d.size(), 12u);
  EXPECT_EQ(d.true_component[0], 1);
  EXPECT_EQ(d.true_component[11], 2);
  for (const auto& c : d.coords) EXPECT_EQ(c[2], 0.0);
  EXPECT_EQ(simulate_st_cube(4, 3, 1, comps, region, 0.1, b).y, d.y);
  region[0] = 2;
  EXPECT_THROW(simulate_st_cube(4, 3, 1, comps, region, 0.1, a), Error);
}
