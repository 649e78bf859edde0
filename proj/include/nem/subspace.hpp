#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace nem {

class DegenerateConstraint : public std::runtime_error {
 public:
  DegenerateConstraint(std::size_t index, const std::string& what)
      : std::runtime_error(what), index_(index) {}
  /// 0 is the anchor, i >= 1 the (i-1)-th extra orthogonal.
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

/// Orthogonal complement of span{anchor, extras...}.
///
/// With only an anchor this is the tangent space T_x = {v : <v, x> = 0}; phase two of the
/// two-phase solver adds m^L so that steps also stay inside V_L = {v : <v, m^L> = 0}.
class ConstraintSubspace {
 public:
  explicit ConstraintSubspace(const Eigen::VectorXd& anchor,
                              const std::vector<Eigen::VectorXd>& extra_orthogonals = {},
                              double dependence_tol = 1e-10, bool skip_dependent = false);

  Eigen::Index dim() const { return basis_.rows(); }
  /// Number of constraint directions actually kept.
  Eigen::Index constraint_count() const { return basis_.cols(); }
  /// Orthonormal basis of the constraint span (columns).
  const Eigen::MatrixXd& constraint_basis() const { return basis_; }

  Eigen::VectorXd project(const Eigen::VectorXd& v) const;
  /// Largest |<v, c>| over unit constraint directions c.
  double violation(const Eigen::VectorXd& v) const;

  /// Orthonormal basis U of the subspace itself (dim x (dim - #constraints)).
  Eigen::MatrixXd complement_basis() const;

 private:
  Eigen::MatrixXd basis_;
};

inline Eigen::VectorXd project(const ConstraintSubspace& subspace, const Eigen::VectorXd& v) {
  return subspace.project(v);
}

}  // namespace nem
