#include "nem/gaussian_map.hpp"

#include "nem/coupling_rng.hpp"
#include "nem/tensor_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace nem {
namespace {

Eigen::VectorXd weighted_sum(const double* tensor, std::uint64_t block, int n,
                             const Eigen::VectorXd& w) {
  Eigen::Map<const Eigen::MatrixXd> columns(tensor, static_cast<Eigen::Index>(block), n);
  return columns * w;
}

void check_dim(const Eigen::VectorXd& v, Eigen::Index expected, const char* what) {
  if (v.size() != expected) {
    throw DimensionMismatch(std::string(what) + ": expected length " + std::to_string(expected) +
                            ", got " + std::to_string(v.size()));
  }
}

}  // namespace

MemoryBudgetExceeded::MemoryBudgetExceeded(std::uint64_t required, std::uint64_t budget)
    : std::runtime_error("coupling tensors need " + std::to_string(required) +
                         " bytes, over the memory budget of " + std::to_string(budget) + " bytes"),
      required_(required),
      budget_(budget) {}

std::uint64_t GaussianMap::coupling_bytes(const MixtureXi& xi, int n, int d) {
  std::uint64_t total = 0;
  for (int k = 0; k <= xi.degree(); ++k) {
    if (xi.coeff(k) <= 0.0) continue;
    const std::uint64_t block = checked_power(static_cast<std::uint64_t>(d), k);
    if (block == 0) return std::numeric_limits<std::uint64_t>::max();
    const long double bytes = static_cast<long double>(block) * n * sizeof(double);
    if (bytes > static_cast<long double>(std::numeric_limits<std::uint64_t>::max() / 2))
      return std::numeric_limits<std::uint64_t>::max();
    total += static_cast<std::uint64_t>(bytes);
  }
  return total;
}

GaussianMap GaussianMap::sample(const MixtureXi& xi, int n, int d, std::uint64_t seed,
                                const MapOptions& options) {
  if (n < 1) throw std::invalid_argument("sample_map: n must be >= 1");
  if (d < 2) throw std::invalid_argument("sample_map: d must be >= 2");
  const std::uint64_t bytes = coupling_bytes(xi, n, d);
  if (bytes > options.memory_budget_bytes)
    throw MemoryBudgetExceeded(bytes, options.memory_budget_bytes);

  GaussianMap map;
  map.xi_ = xi;
  map.n_ = n;
  map.d_ = d;
  map.seed_ = seed;
  map.options_ = options;
  map.tensors_.resize(static_cast<std::size_t>(xi.degree()) + 1);
  for (int k = 0; k <= xi.degree(); ++k) {
    if (xi.coeff(k) <= 0.0) continue;
    const std::uint64_t block = checked_power(static_cast<std::uint64_t>(d), k);
    auto data = std::make_shared<std::vector<double>>(block * static_cast<std::uint64_t>(n));
    for (int i = 0; i < n; ++i) {
      coupling_normals(seed, k, static_cast<std::uint64_t>(i), 0, block,
                       data->data() + block * static_cast<std::uint64_t>(i));
    }
    map.tensors_[static_cast<std::size_t>(k)] = std::move(data);
  }
  return map;
}

const double* GaussianMap::couplings(int k) const {
  if (k < 0 || k >= static_cast<int>(tensors_.size()) || !tensors_[static_cast<std::size_t>(k)])
    return nullptr;
  return tensors_[static_cast<std::size_t>(k)]->data();
}

double GaussianMap::coupling(int k, int i, std::uint64_t flat) const {
  const double* base = couplings(k);
  if (!base) throw std::out_of_range("coupling: tensor order not present");
  const std::uint64_t block = checked_power(static_cast<std::uint64_t>(d_), k);
  if (i < 0 || i >= n_ || flat >= block) throw std::out_of_range("coupling: index out of range");
  return base[block * static_cast<std::uint64_t>(i) + flat];
}

void GaussianMap::check_point(const Eigen::VectorXd& x) const {
  check_dim(x, d_, "point");
  const double norm = x.norm();
  if (!(norm <= 1.0 + options_.ball_slack)) {
    throw OutOfBall("point of norm " + std::to_string(norm) + " lies outside the ball of radius " +
                    std::to_string(1.0 + options_.ball_slack));
  }
}

namespace {

MapValue eval_impl(const GaussianMap& map, const Eigen::VectorXd& x) {
  MapValue out;
  out.F = Eigen::VectorXd::Zero(map.n());
  for (int k = 0; k <= map.xi().degree(); ++k) {
    const double* g = map.couplings(k);
    if (!g) continue;
    PartialContractions pc(g, map.n(), k, map.d(), x);
    out.F += std::sqrt(map.xi().coeff(k)) * pc.full();
  }
  out.energy = 0.5 * out.F.squaredNorm();
  return out;
}

}  // namespace

MapValue map_eval(const GaussianMap& map, const Eigen::VectorXd& x) {
  map.check_point(x);
  return eval_impl(map, x);
}

Eigen::MatrixXd jacobian(const GaussianMap& map, const Eigen::VectorXd& x) {
  map.check_point(x);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(map.n(), map.d());
  for (int k = 1; k <= map.xi().degree(); ++k) {
    const double* g = map.couplings(k);
    if (!g) continue;
    PartialContractions pc(g, map.n(), k, map.d(), x);
    J += std::sqrt(map.xi().coeff(k)) * pc.slot_gradients();
  }
  return J;
}

namespace {

Eigen::VectorXd pullback_impl(const GaussianMap& map, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& u) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(map.d());
  for (int k = 1; k <= map.xi().degree(); ++k) {
    const double* g = map.couplings(k);
    if (!g) continue;
    const std::uint64_t block = checked_power(static_cast<std::uint64_t>(map.d()), k);
    const Eigen::VectorXd folded = weighted_sum(g, block, map.n(), u);
    PartialContractions pc(folded.data(), 1, k, map.d(), x);
    out += std::sqrt(map.xi().coeff(k)) * pc.slot_gradients().transpose();
  }
  return out;
}

}  // namespace

Eigen::VectorXd jacobian_apply(const GaussianMap& map, const Eigen::VectorXd& x,
                               const Eigen::VectorXd& v, bool transpose) {
  map.check_point(x);
  if (transpose) {
    check_dim(v, map.n(), "jacobian_apply (transpose)");
    return pullback_impl(map, x, v);
  }
  check_dim(v, map.d(), "jacobian_apply");
  return jacobian(map, x) * v;
}

ValueAndPullback value_and_pullback(const GaussianMap& map, const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& u, bool check_ball) {
  check_dim(u, map.n(), "value_and_pullback");
  if (check_ball)
    map.check_point(x);
  else
    check_dim(x, map.d(), "point");
  ValueAndPullback out;
  out.F = eval_impl(map, x).F;
  out.pullback = pullback_impl(map, x, u);
  return out;
}

Eigen::VectorXd grad_energy(const GaussianMap& map, const Eigen::VectorXd& x) {
  const Eigen::VectorXd F = map_eval(map, x).F;
  return pullback_impl(map, x, F);
}

LocalModel local_model(const GaussianMap& map, const Eigen::VectorXd& x) {
  LocalModel model;
  model.F = map_eval(map, x).F;
  model.energy = 0.5 * model.F.squaredNorm();
  model.J = jacobian(map, x);
  if (map.xi().degree() >= 2) {
    model.curvature = Eigen::MatrixXd::Zero(map.d(), map.d());
    for (int k = 2; k <= map.xi().degree(); ++k) {
      const double* g = map.couplings(k);
      if (!g) continue;
      const std::uint64_t block = checked_power(static_cast<std::uint64_t>(map.d()), k);
      const Eigen::VectorXd folded = weighted_sum(g, block, map.n(), model.F);
      PartialContractions pc(folded.data(), 1, k, map.d(), x);
      model.curvature += std::sqrt(map.xi().coeff(k)) * pc.slot_hessian();
    }
  }
  return model;
}

Eigen::VectorXd LocalModel::hessian_apply(const Eigen::VectorXd& v) const {
  Eigen::VectorXd out = J.transpose() * (J * v);
  if (curvature.size() > 0) out.noalias() += curvature * v;
  return out;
}

Eigen::MatrixXd LocalModel::hessian() const {
  Eigen::MatrixXd out = J.transpose() * J;
  if (curvature.size() > 0) out += curvature;
  return out;
}

Eigen::VectorXd hessian_energy_apply(const GaussianMap& map, const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& v,
                                     const ConstraintSubspace* subspace) {
  check_dim(v, map.d(), "hessian_energy_apply");
  const LocalModel model = local_model(map, x);
  if (!subspace) return model.hessian_apply(v);
  if (subspace->dim() != map.d()) throw DimensionMismatch("subspace dimension mismatch");
  if (subspace->violation(v) > 1e-8 * std::max(1.0, v.norm())) {
    throw std::invalid_argument("hessian_energy_apply: v is not in the constraint subspace");
  }
  return subspace->project(model.hessian_apply(subspace->project(v)));
}

}  // namespace nem
