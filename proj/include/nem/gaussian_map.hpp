#pragma once

#include "nem/mixture.hpp"
#include "nem/subspace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace nem {

class MemoryBudgetExceeded : public std::runtime_error {
 public:
  MemoryBudgetExceeded(std::uint64_t required, std::uint64_t budget);
  std::uint64_t required_bytes() const { return required_; }
  std::uint64_t budget_bytes() const { return budget_; }

 private:
  std::uint64_t required_;
  std::uint64_t budget_;
};

class OutOfBall : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MapOptions {
  std::uint64_t memory_budget_bytes = std::uint64_t{2} << 30;
  /// Evaluation is allowed on the ball of radius 1 + ball_slack.
  double ball_slack = 0.05;
};

/// Value of F at a point together with H = |F|^2 / 2.
struct MapValue {
  Eigen::VectorXd F;
  double energy = 0.0;
};

/// Second-order data of H at a point: F, DF and sum_i F_i Hess F_i.
///
/// Hess H = J^T J + curvature. The J^T J term is applied in factored form.
struct LocalModel {
  Eigen::VectorXd F;
  Eigen::MatrixXd J;
  Eigen::MatrixXd curvature;  // empty when xi has degree < 2
  double energy = 0.0;

  Eigen::VectorXd gradient() const { return J.transpose() * F; }
  Eigen::VectorXd hessian_apply(const Eigen::VectorXd& v) const;
  Eigen::MatrixXd hessian() const;
};

/// Random map F: R^d -> R^n with F_i(x) = sum_k sqrt(xi_k) <G_i^(k), x^{(x)k}>.
///
/// Couplings are i.i.d. N(0,1), stored dense and non-symmetrized with layout
/// [i][j_1]...[j_k] (row-major). Each entry is a pure function of (seed, k, i, offset) so the
/// same map can be regenerated from its header alone. Immutable after sampling.
class GaussianMap {
 public:
  static GaussianMap sample(const MixtureXi& xi, int n, int d, std::uint64_t seed,
                            const MapOptions& options = {});

  /// Bytes needed to store every coupling tensor with xi_k > 0.
  static std::uint64_t coupling_bytes(const MixtureXi& xi, int n, int d);

  const MixtureXi& xi() const { return xi_; }
  int n() const { return n_; }
  int d() const { return d_; }
  double alpha() const { return static_cast<double>(n_) / d_; }
  std::uint64_t seed() const { return seed_; }
  const MapOptions& options() const { return options_; }

  /// Stored tensor G^(k) as n * d^k doubles, or nullptr when xi_k == 0.
  const double* couplings(int k) const;
  /// Entry G^(k)_{i, flat}; reads the stored value.
  double coupling(int k, int i, std::uint64_t flat) const;

  void check_point(const Eigen::VectorXd& x) const;

 private:
  GaussianMap() = default;

  MixtureXi xi_;
  int n_ = 0;
  int d_ = 0;
  std::uint64_t seed_ = 0;
  MapOptions options_;
  std::vector<std::shared_ptr<const std::vector<double>>> tensors_;
};

inline GaussianMap sample_map(const MixtureXi& xi, int n, int d, std::uint64_t seed,
                              const MapOptions& options = {}) {
  return GaussianMap::sample(xi, n, d, seed, options);
}

MapValue map_eval(const GaussianMap& map, const Eigen::VectorXd& x);

/// DF(x) v (length n) or, with transpose, DF(x)^T v (length d).
Eigen::VectorXd jacobian_apply(const GaussianMap& map, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, bool transpose);

/// Dense Jacobian DF(x), n x d.
Eigen::MatrixXd jacobian(const GaussianMap& map, const Eigen::VectorXd& x);

/// grad H(x) = DF(x)^T F(x).
Eigen::VectorXd grad_energy(const GaussianMap& map, const Eigen::VectorXd& x);

/// F(x) and DF(x)^T u in one pass (the AMP and gradient-descent inner step).
struct ValueAndPullback {
  Eigen::VectorXd F;
  Eigen::VectorXd pullback;
};
///
/// AMP iterates are not confined to the ball, so the radius check can be switched off.
ValueAndPullback value_and_pullback(const GaussianMap& map, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u, bool check_ball = true);

LocalModel local_model(const GaussianMap& map, const Eigen::VectorXd& x);

/// P Hess H(x) P v with P the projector onto `subspace` (identity when null).
Eigen::VectorXd hessian_energy_apply(const GaussianMap& map, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v,
                                     const ConstraintSubspace* subspace = nullptr);

}  // namespace nem
