#include "nem/lanczos.hpp"

#include "nem/coupling_rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <vector>

namespace nem {
namespace {

Eigen::VectorXd random_unit(Rng& rng, Eigen::Index dim, const Projector& project,
                            const Eigen::MatrixXd& basis, Eigen::Index used) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd v(dim);
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = rng.normal();
    if (project) v = project(v);
    for (int pass = 0; pass < 2; ++pass) {
      if (used > 0) v -= basis.leftCols(used) * (basis.leftCols(used).transpose() * v);
    }
    const double norm = v.norm();
    if (norm > 1e-8) return v / norm;
  }
  return Eigen::VectorXd();
}

}  // namespace

LanczosResult lanczos_min_eig(const LinearOperator& apply, Eigen::Index dim,
                              const LanczosOptions& options, const Projector& project) {
  const Eigen::Index effective = options.effective_dim > 0 ? options.effective_dim : dim;
  const Eigen::Index max_steps =
      std::min<Eigen::Index>(std::max(1, options.max_iterations), effective);

  Rng rng(options.seed);
  Eigen::MatrixXd basis(dim, max_steps);
  std::vector<double> alpha, beta;  // beta[j] couples basis j and j+1
  LanczosResult result;

  Eigen::VectorXd q = random_unit(rng, dim, project, basis, 0);
  if (q.size() == 0) throw LanczosBreakdown("lanczos: could not draw a start vector");

  Eigen::Index m = 0;
  Eigen::VectorXd ritz_coeffs;
  double best_value = 0.0;
  double residual = 0.0;

  while (m < max_steps) {
    basis.col(m) = q;
    Eigen::VectorXd w = apply(q);
    if (project) w = project(w);
    const double a = q.dot(w);
    alpha.push_back(a);
    // full reorthogonalization, twice
    for (int pass = 0; pass < 2; ++pass) {
      w -= basis.leftCols(m + 1) * (basis.leftCols(m + 1).transpose() * w);
    }
    const double b = w.norm();
    ++m;

    // Ritz pair of the current tridiagonal matrix
    Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(alpha.data(), m);
    Eigen::VectorXd sub = m > 1 ? Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(beta.data(), m - 1))
                                : Eigen::VectorXd();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
    eig.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    ritz_coeffs = eig.eigenvectors().col(0);
    best_value = eig.eigenvalues()(0);
    residual = b * std::abs(ritz_coeffs(m - 1));

    const double scale = std::max(1.0, std::abs(best_value));
    const bool invariant = b <= 1e-12 * scale;
    if (m == max_steps) break;
    if (invariant) {
      if (m >= effective) break;
      // Krylov space is invariant but smaller than the search space: extend it.
      if (result.restarts >= options.max_restarts) {
        throw LanczosBreakdown("lanczos: Krylov space degenerate after " +
                               std::to_string(result.restarts) + " restarts");
      }
      ++result.restarts;
      q = random_unit(rng, dim, project, basis, m);
      if (q.size() == 0) break;
      beta.push_back(0.0);
      continue;
    }
    if (residual <= options.tol_abs && m >= 2) break;
    beta.push_back(b);
    q = w / b;
  }

  Eigen::VectorXd v = basis.leftCols(m) * ritz_coeffs;
  if (project) v = project(v);
  v.normalize();
  Eigen::VectorXd Av = apply(v);
  if (project) Av = project(Av);
  result.vector = std::move(v);
  result.value = result.vector.dot(Av);
  result.residual = residual;
  result.iterations = static_cast<int>(m);
  result.converged = residual <= options.tol_abs || m >= effective;
  return result;
}

}  // namespace nem
