#include "nem/subspace.hpp"

namespace nem {

ConstraintSubspace::ConstraintSubspace(const Eigen::VectorXd& anchor,
                                       const std::vector<Eigen::VectorXd>& extra_orthogonals,
                                       double dependence_tol, bool skip_dependent) {
  const Eigen::Index d = anchor.size();
  basis_.resize(d, static_cast<Eigen::Index>(1 + extra_orthogonals.size()));
  Eigen::Index cols = 0;
  auto append = [&](const Eigen::VectorXd& raw, std::size_t index) {
    if (raw.size() != d)
      throw std::invalid_argument("constraint vector " + std::to_string(index) +
                                  " has the wrong dimension");
    const double scale = raw.norm();
    if (!(scale > 0.0)) {
      throw DegenerateConstraint(index, "constraint vector " + std::to_string(index) + " is zero");
    }
    Eigen::VectorXd v = raw / scale;
    // Two Gram-Schmidt passes keep the basis orthonormal to round-off.
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index c = 0; c < cols; ++c) v -= basis_.col(c).dot(v) * basis_.col(c);
    }
    const double residual = v.norm();
    if (residual < dependence_tol) {
      if (skip_dependent && index > 0) return;
      throw DegenerateConstraint(index, "constraint vector " + std::to_string(index) +
                                            " is linearly dependent on earlier constraints");
    }
    basis_.col(cols++) = v / residual;
  };
  append(anchor, 0);
  for (std::size_t i = 0; i < extra_orthogonals.size(); ++i) append(extra_orthogonals[i], i + 1);
  basis_.conservativeResize(d, cols);
}

Eigen::VectorXd ConstraintSubspace::project(const Eigen::VectorXd& v) const {
  if (v.size() != basis_.rows()) throw std::invalid_argument("project: dimension mismatch");
  Eigen::VectorXd out = v - basis_ * (basis_.transpose() * v);
  // second pass removes the O(eps * |v|) leftover along the constraints
  out -= basis_ * (basis_.transpose() * out);
  return out;
}

double ConstraintSubspace::violation(const Eigen::VectorXd& v) const {
  return (basis_.transpose() * v).cwiseAbs().maxCoeff();
}

Eigen::MatrixXd ConstraintSubspace::complement_basis() const {
  const Eigen::Index d = basis_.rows();
  const Eigen::Index c = basis_.cols();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(d, d);
  return q.rightCols(d - c);
}

}  // namespace nem
