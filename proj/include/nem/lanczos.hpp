#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>

namespace nem {

class LanczosBreakdown : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using Projector = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LanczosOptions {
  /// Stop once the Ritz residual bound is below this absolute tolerance.
  double tol_abs = 1e-8;
  int max_iterations = 300;
  /// Dimension of the space the operator acts on (after projection).
  Eigen::Index effective_dim = -1;
  int max_restarts = 3;
  std::uint64_t seed = 0;
};

struct LanczosResult {
  Eigen::VectorXd vector;
  double value = 0.0;     // Rayleigh quotient of `vector`
  double residual = 0.0;  // |A v - value v| bound from the recurrence
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
};

/// Smallest eigenpair of a symmetric operator by Lanczos with full reorthogonalization.
///
/// When `project` is given, every Krylov vector is projected, so the search stays in the
/// subspace and the operator is effectively P A P. An invariant Krylov space smaller than
/// effective_dim is extended with a fresh random direction (counted as a restart).
LanczosResult lanczos_min_eig(const LinearOperator& apply, Eigen::Index dim,
                              const LanczosOptions& options, const Projector& project = {});

}  // namespace nem
