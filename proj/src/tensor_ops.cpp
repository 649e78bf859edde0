#include "nem/tensor_ops.hpp"

#include <bit>
#include <limits>
#include <stdexcept>

namespace nem {

std::uint64_t checked_power(std::uint64_t d, int k) {
  std::uint64_t out = 1;
  for (int i = 0; i < k; ++i) {
    if (d != 0 && out > std::numeric_limits<std::uint64_t>::max() / d) return 0;
    out *= d;
  }
  return out;
}

void contract_slot(const double* tensor, Eigen::Index lead, int order, int slot,
                   const Eigen::VectorXd& x, double* out) {
  const Eigen::Index d = x.size();
  Eigen::Index outer = lead;
  for (int s = 0; s < slot; ++s) outer *= d;
  Eigen::Index inner = 1;
  for (int s = slot + 1; s < order; ++s) inner *= d;

  if (inner == 1) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMajor> view(tensor, outer, d);
    Eigen::Map<Eigen::VectorXd>(out, outer).noalias() = view * x;
    return;
  }
  for (Eigen::Index a = 0; a < outer; ++a) {
    Eigen::Map<const Eigen::MatrixXd> block(tensor + a * d * inner, inner, d);
    Eigen::Map<Eigen::VectorXd>(out + a * inner, inner).noalias() = block * x;
  }
}

PartialContractions::PartialContractions(const double* tensor, Eigen::Index lead, int order,
                                         Eigen::Index dim, const Eigen::VectorXd& x)
    : tensor_(tensor), lead_(lead), order_(order), dim_(dim), x_(x) {
  if (order < 0 || order > 16) throw std::invalid_argument("tensor order out of range");
  if (x.size() != dim) throw std::invalid_argument("contraction vector has wrong dimension");
}

const double* PartialContractions::get(unsigned mask) {
  const unsigned full_mask = (1u << order_) - 1u;
  mask &= full_mask;
  if (mask == full_mask) return tensor_;
  if (auto it = memo_.find(mask); it != memo_.end()) return it->second.data();

  // The most recently removed slot is the lowest one not in mask.
  const unsigned removed = full_mask & ~mask;
  const int slot = std::countr_zero(removed);
  const unsigned parent = mask | (1u << slot);
  const double* src = get(parent);
  const int parent_order = std::popcount(parent);
  const int position = std::popcount(parent & ((1u << slot) - 1u));

  Eigen::Index size = lead_;
  for (int s = 0; s < parent_order - 1; ++s) size *= dim_;
  std::vector<double> out(static_cast<std::size_t>(size));
  contract_slot(src, lead_, parent_order, position, x_, out.data());
  return memo_.emplace(mask, std::move(out)).first->second.data();
}

Eigen::MatrixXd PartialContractions::slot_gradients() {
  // Row-major [lead][d] blocks accumulate into a lead x d matrix.
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(lead_, dim_);
  for (int s = 0; s < order_; ++s) {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    out += Eigen::Map<const RowMajor>(get(1u << s), lead_, dim_);
  }
  return out;
}

Eigen::MatrixXd PartialContractions::slot_hessian() {
  if (lead_ != 1) throw std::logic_error("slot_hessian requires a single tensor");
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(dim_, dim_);
  using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  for (int s = 0; s < order_; ++s) {
    for (int t = s + 1; t < order_; ++t) {
      Eigen::Map<const RowMajor> block(get((1u << s) | (1u << t)), dim_, dim_);
      out += block;
      out += block.transpose();
    }
  }
  return out;
}

Eigen::VectorXd PartialContractions::full() {
  return Eigen::Map<const Eigen::VectorXd>(get(0u), lead_);
}

}  // namespace nem
