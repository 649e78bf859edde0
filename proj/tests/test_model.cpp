#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "nem/coupling_rng.hpp"
#include "nem/gaussian_map.hpp"
#include "nem/mixture.hpp"
#include "nem/snapshot.hpp"
#include "nem/subspace.hpp"

using nem::MixtureXi;

namespace {

Eigen::VectorXd random_point(int d, double radius, std::uint64_t seed) {
  nem::Rng rng(seed);
  Eigen::VectorXd x(d);
  for (int i = 0; i < d; ++i) x(i) = rng.normal();
  return radius * x / x.norm();
}

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace

TEST(Mixture, EvaluatesDerivativesExactly) {
  const MixtureXi xi({1, 0, 0, 1});
  EXPECT_DOUBLE_EQ(nem::xi_eval(xi, 1.0, 0), 2.0);
  EXPECT_DOUBLE_EQ(nem::xi_eval(xi, 1.0, 1), 3.0);
  EXPECT_DOUBLE_EQ(nem::xi_eval(xi, 0.5, 2), 3.0);
  EXPECT_DOUBLE_EQ(xi.d3(0.3), 6.0);
  EXPECT_DOUBLE_EQ(xi.eval(0.3, 4), 0.0);
}

TEST(Mixture, RejectsInvalidCoefficients) {
  EXPECT_THROW(MixtureXi({1, -0.1}), std::invalid_argument);
  EXPECT_THROW(MixtureXi({0, 0}), std::invalid_argument);
  EXPECT_THROW(MixtureXi(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(MixtureXi({1, NAN}), std::invalid_argument);
}

TEST(Mixture, ParseAndFormatRoundTrip) {
  const MixtureXi xi = nem::parse_mixture("1, 0.25,0,0.1");
  EXPECT_EQ(xi.degree(), 3);
  EXPECT_EQ(nem::parse_mixture(nem::format_mixture(xi)), xi);
  EXPECT_THROW(nem::parse_mixture("1,,2"), std::invalid_argument);
  EXPECT_THROW(nem::parse_mixture("1,x"), std::invalid_argument);
}

TEST(Mixture, WithoutConstantDropsXi0) {
  const MixtureXi xi({2, 0, 1});
  EXPECT_DOUBLE_EQ(xi.without_constant()(1.0), 1.0);
  EXPECT_THROW(MixtureXi({3}).without_constant(), std::invalid_argument);
}

TEST(Rng, CouplingsArePureFunctionsOfTheirAddress) {
  double block[6];
  nem::coupling_normals(11, 2, 4, 3, 6, block);
  for (int j = 0; j < 6; ++j) EXPECT_EQ(block[j], nem::coupling_normal(11, 2, 4, 3 + j));
  EXPECT_NE(nem::coupling_normal(11, 2, 4, 0), nem::coupling_normal(12, 2, 4, 0));
  EXPECT_NE(nem::derive_seed(1, 0, 1), nem::derive_seed(1, 1, 0));
}

TEST(GaussianMap, ConstantMixtureHasOnlyOrderZero) {
  const auto map = nem::sample_map(MixtureXi({1}), 3, 5, 7);
  EXPECT_NE(map.couplings(0), nullptr);
  EXPECT_EQ(map.couplings(1), nullptr);
  const auto a = nem::map_eval(map, Eigen::VectorXd::Zero(5));
  const auto b = nem::map_eval(map, random_point(5, 1.0, 3));
  EXPECT_EQ(a.F, b.F);
  EXPECT_EQ(nem::grad_energy(map, random_point(5, 0.7, 4)).norm(), 0.0);
}

TEST(GaussianMap, SamplingIsDeterministic) {
  const MixtureXi xi({1, 0, 0, 1});
  const auto a = nem::sample_map(xi, 10, 20, 1);
  const auto b = nem::sample_map(xi, 10, 20, 1);
  const auto c = nem::sample_map(xi, 10, 20, 2);
  const std::size_t count = 10 * 20 * 20 * 20;
  EXPECT_TRUE(std::equal(a.couplings(3), a.couplings(3) + count, b.couplings(3)));
  EXPECT_FALSE(std::equal(a.couplings(3), a.couplings(3) + count, c.couplings(3)));
}

TEST(GaussianMap, LinearMapVarianceAtBasisVector) {
  const auto map = nem::sample_map(MixtureXi({0, 1}), 50, 100, 3);
  Eigen::VectorXd e1 = Eigen::VectorXd::Zero(100);
  e1(0) = 1.0;
  const Eigen::VectorXd F = nem::map_eval(map, e1).F;
  for (int i = 0; i < 50; ++i) EXPECT_EQ(F(i), map.coupling(1, i, 0));
  // mean of F_i^2 is chi^2_50 / 50: sd sqrt(2/50)
  EXPECT_NEAR(F.squaredNorm() / 50.0, 1.0, 3.0 * std::sqrt(2.0 / 50.0));
}

TEST(GaussianMap, OriginKeepsOnlyConstantTerm) {
  const MixtureXi xi({2, 1, 0, 1});
  const auto map = nem::sample_map(xi, 6, 8, 5);
  const Eigen::VectorXd F = nem::map_eval(map, Eigen::VectorXd::Zero(8)).F;
  for (int i = 0; i < 6; ++i) EXPECT_DOUBLE_EQ(F(i), std::sqrt(2.0) * map.coupling(0, i, 0));
}

TEST(GaussianMap, LinearMapIsHomogeneous) {
  const auto map = nem::sample_map(MixtureXi({0, 1}), 7, 9, 2);
  const Eigen::VectorXd x = random_point(9, 0.4, 1);
  EXPECT_LT(rel(nem::map_eval(map, 2.0 * x).F, 2.0 * nem::map_eval(map, x).F), 1e-14);
  const Eigen::VectorXd v = random_point(9, 1.0, 2);
  const Eigen::VectorXd y = random_point(9, 0.9, 3);
  EXPECT_LT(rel(nem::jacobian_apply(map, x, v, false), nem::jacobian_apply(map, y, v, false)), 1e-14);
  const Eigen::MatrixXd G = nem::jacobian(map, x);
  EXPECT_LT(rel(nem::grad_energy(map, x), G.transpose() * G * x), 1e-12);
  EXPECT_LT(rel(nem::hessian_energy_apply(map, y, v), G.transpose() * G * v), 1e-12);
}

TEST(GaussianMap, EnergyMatchesMixtureAtRadius) {
  const MixtureXi xi({0.5, 0.5, 0, 1});
  const int n = 2000;
  const auto map = nem::sample_map(xi, n, 12, 9);
  const double q = 0.6;
  const auto val = nem::map_eval(map, random_point(12, std::sqrt(q), 10));
  EXPECT_NEAR(val.F.squaredNorm() / n, xi(q), 4.0 / std::sqrt(n) * xi(q));
  EXPECT_DOUBLE_EQ(val.energy, 0.5 * val.F.squaredNorm());
}

TEST(GaussianMap, FixedPointEnergyConcentrates) {
  const MixtureXi xi({1, 0, 0, 1});
  const int n = 2000;
  const auto map = nem::sample_map(xi, n, 10, 21);
  const double q = 0.5;
  const double u = nem::map_eval(map, random_point(10, std::sqrt(q), 22)).energy / n;
  // H/n = xi(q) chi^2_n / (2n)
  EXPECT_NEAR(u, 0.5 * xi(q), 5.0 * 0.5 * xi(q) * std::sqrt(2.0 / n));
}

TEST(GaussianMap, CovarianceLawAcrossMaps) {
  const MixtureXi xi({0.3, 0.5, 0.4, 0.2});
  const int d = 6, maps = 4000;
  const Eigen::VectorXd x = random_point(d, 1.0, 1);
  Eigen::VectorXd y = random_point(d, 1.0, 2);
  y = 0.6 * x + 0.8 * (y - y.dot(x) * x).normalized();
  double acc = 0.0, acc2 = 0.0;
  for (int s = 0; s < maps; ++s) {
    const auto map = nem::sample_map(xi, 1, d, 1000 + s);
    const double p = nem::map_eval(map, x).F(0) * nem::map_eval(map, y).F(0);
    acc += p;
    acc2 += p * p;
  }
  const double mean = acc / maps;
  const double sd = std::sqrt(acc2 / maps - mean * mean);
  EXPECT_NEAR(mean, xi(x.dot(y)), 4.0 * sd / std::sqrt(maps));
}

TEST(GaussianMap, AdjointIdentity) {
  const MixtureXi xi({1, 0.5, 0.3, 0.2, 0.1});
  const auto map = nem::sample_map(xi, 9, 11, 4);
  for (int t = 0; t < 5; ++t) {
    const Eigen::VectorXd x = random_point(11, 0.9, 10 + t);
    const Eigen::VectorXd v = random_point(11, 1.0, 20 + t);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(9);
    nem::Rng rng(30 + t);
    for (int i = 0; i < 9; ++i) u(i) = rng.normal();
    const double lhs = u.dot(nem::jacobian_apply(map, x, v, false));
    const double rhs = nem::jacobian_apply(map, x, u, true).dot(v);
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1.0, std::abs(lhs)));
  }
}

TEST(GaussianMap, CentralDifferences) {
  const MixtureXi xi({1, 0, 0, 1});
  const auto map = nem::sample_map(xi, 12, 30, 8);
  const Eigen::VectorXd x = random_point(30, 0.8, 1);
  const Eigen::VectorXd v = random_point(30, 1.0, 2);
  const double h = 1e-5;
  const Eigen::VectorXd fd = (nem::map_eval(map, x + h * v).F - nem::map_eval(map, x - h * v).F) / (2 * h);
  EXPECT_LT(rel(fd, nem::jacobian_apply(map, x, v, false)), 1e-6);
  const double fdH = (nem::map_eval(map, x + h * v).energy - nem::map_eval(map, x - h * v).energy) / (2 * h);
  EXPECT_NEAR(fdH, nem::grad_energy(map, x).dot(v), 1e-6 * std::abs(fdH) + 1e-9);
  const Eigen::VectorXd fdg = (nem::grad_energy(map, x + h * v) - nem::grad_energy(map, x - h * v)) / (2 * h);
  EXPECT_LT(rel(fdg, nem::hessian_energy_apply(map, x, v)), 1e-5);
}

TEST(GaussianMap, HessianIsSymmetric) {
  const auto map = nem::sample_map(MixtureXi({0.2, 0.4, 0.3, 0.5}), 8, 10, 6);
  const Eigen::VectorXd x = random_point(10, 0.7, 3);
  const Eigen::VectorXd u = random_point(10, 1.0, 4), v = random_point(10, 1.0, 5);
  const double a = u.dot(nem::hessian_energy_apply(map, x, v));
  const double b = v.dot(nem::hessian_energy_apply(map, x, u));
  EXPECT_NEAR(a, b, 1e-12 * std::abs(a));
}

TEST(GaussianMap, ProjectedHessianStaysInSubspace) {
  const auto map = nem::sample_map(MixtureXi({1, 0, 1}), 8, 10, 6);
  const Eigen::VectorXd x = random_point(10, 0.7, 3);
  const nem::ConstraintSubspace sub(x);
  const Eigen::VectorXd v = sub.project(random_point(10, 1.0, 4));
  const Eigen::VectorXd hv = nem::hessian_energy_apply(map, x, v, &sub);
  EXPECT_LT(std::abs(hv.dot(x)), 1e-12 * hv.norm());
  EXPECT_THROW(nem::hessian_energy_apply(map, x, x, &sub), std::invalid_argument);
}

TEST(GaussianMap, ErrorsAreSignalled) {
  const MixtureXi xi({1, 0, 0, 1});
  EXPECT_THROW(nem::sample_map(xi, 200, 400, 1), nem::MemoryBudgetExceeded);
  const auto map = nem::sample_map(xi, 3, 4, 1);
  EXPECT_THROW(nem::map_eval(map, Eigen::VectorXd::Constant(4, 1.0)), nem::OutOfBall);
  EXPECT_NO_THROW(nem::map_eval(map, random_point(4, 1.04, 2)));
  EXPECT_THROW(nem::map_eval(map, Eigen::VectorXd::Zero(5)), nem::DimensionMismatch);
  EXPECT_THROW(nem::jacobian_apply(map, Eigen::VectorXd::Zero(4), Eigen::VectorXd::Zero(3), false),
               nem::DimensionMismatch);
}

TEST(Subspace, ProjectionProperties) {
  const Eigen::VectorXd x = random_point(8, 0.5, 1);
  const Eigen::VectorXd m = random_point(8, 1.0, 2);
  const nem::ConstraintSubspace sub(x, {m});
  EXPECT_LT(sub.project(3.0 * x).norm(), 1e-14);
  const Eigen::VectorXd v = random_point(8, 1.0, 3);
  const Eigen::VectorXd p = sub.project(v);
  EXPECT_LT(std::abs(p.dot(x)), 1e-12 * v.norm());
  EXPECT_LT(std::abs(p.dot(m)), 1e-12 * v.norm());
  EXPECT_LT((sub.project(p) - p).norm(), 1e-14);
  const Eigen::VectorXd w = random_point(8, 1.0, 4);
  EXPECT_NEAR(sub.project(v).dot(w), v.dot(sub.project(w)), 1e-14);
  EXPECT_LT((nem::project(sub, p) - p).norm(), 1e-14);
  EXPECT_EQ(sub.complement_basis().cols(), 6);
}

TEST(Subspace, DegenerateConstraintReportsIndex) {
  const Eigen::VectorXd x = random_point(5, 1.0, 1);
  try {
    nem::ConstraintSubspace sub(x, {random_point(5, 1.0, 2), 2.0 * x});
    FAIL() << "expected DegenerateConstraint";
  } catch (const nem::DegenerateConstraint& e) {
    EXPECT_EQ(e.index(), 2u);
  }
  EXPECT_THROW(nem::ConstraintSubspace(Eigen::VectorXd::Zero(5)), nem::DegenerateConstraint);
  const nem::ConstraintSubspace lenient(x, {2.0 * x}, 1e-10, true);
  EXPECT_EQ(lenient.constraint_count(), 1);
}

TEST(Snapshot, RoundTripRegeneratesTheMap) {
  const auto map = nem::sample_map(MixtureXi({1, 0.5, 0.25}), 4, 6, 99);
  std::stringstream buf;
  nem::write_snapshot(buf, nem::snapshot_of(map));
  const auto snap = nem::read_snapshot(buf);
  EXPECT_EQ(snap.n, 4);
  EXPECT_EQ(snap.d, 6);
  EXPECT_EQ(snap.seed, 99u);
  const auto again = nem::restore(snap);
  const Eigen::VectorXd x = random_point(6, 0.5, 1);
  EXPECT_EQ(nem::map_eval(map, x).F, nem::map_eval(again, x).F);
  std::stringstream bad("NOTAMAP!");
  EXPECT_THROW(nem::read_snapshot(bad), nem::SnapshotError);
}
