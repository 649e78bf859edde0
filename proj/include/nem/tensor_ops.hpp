#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <vector>

namespace nem {

/// d^k with overflow detection; returns 0 on overflow.
std::uint64_t checked_power(std::uint64_t d, int k);

/// Contracts one slot of a dense tensor of shape [lead][d]^order with a vector.
///
/// Storage is row-major with the lead index outermost. The result has shape
/// [lead][d]^(order-1) with the remaining slots in their original relative order.
void contract_slot(const double* tensor, Eigen::Index lead, int order, int slot,
                   const Eigen::VectorXd& x, double* out);

/// Memoized partial contractions of a [lead][d]^order tensor against x^{(x)order}.
///
/// get(mask) returns the tensor with every slot outside `mask` contracted with x. Slots are
/// removed highest-first, so results sharing a prefix of removals share intermediate work.
class PartialContractions {
 public:
  PartialContractions(const double* tensor, Eigen::Index lead, int order, Eigen::Index dim,
                      const Eigen::VectorXd& x);

  /// Remaining free slots in ascending order define the layout of the returned block.
  const double* get(unsigned mask);

  /// sum over slots s of the tensor with only slot s free: shape [lead][d].
  Eigen::MatrixXd slot_gradients();

  /// sum over ordered slot pairs (s,t), s != t, of the tensor with s,t free; requires lead == 1.
  Eigen::MatrixXd slot_hessian();

  /// Fully contracted values, one per lead index.
  Eigen::VectorXd full();

 private:
  const double* tensor_;
  Eigen::Index lead_;
  int order_;
  Eigen::Index dim_;
  const Eigen::VectorXd& x_;
  std::map<unsigned, std::vector<double>> memo_;
};

}  // namespace nem
