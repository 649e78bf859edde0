#include "nem/theory.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>

namespace nem {
namespace {

/// Gamma*(t) = xi''(t)^{-1/2} is the pointwise minimizer of xi'' Gamma + 1/Gamma. When it is
/// already concave and non-increasing (and xi'(0) = 0, so there is no boundary term) it is
/// optimal and P = int sqrt(xi'').
bool pointwise_optimum_feasible(const MixtureXi& xi, int grid_n) {
  if (xi.coeff(1) != 0.0 || !(xi.d2(0.0) > 0.0)) return false;
  std::vector<double> g(static_cast<std::size_t>(grid_n) + 1);
  for (int j = 0; j <= grid_n; ++j) g[static_cast<std::size_t>(j)] = 1.0 / std::sqrt(xi.d2(static_cast<double>(j) / grid_n));
  const double tol = 1e-12 * g[0];
  for (std::size_t j = 1; j < g.size(); ++j)
    if (g[j] > g[j - 1] + tol) return false;
  for (std::size_t j = 1; j + 1 < g.size(); ++j)
    if (g[j + 1] - 2.0 * g[j] + g[j - 1] > tol) return false;
  return true;
}

/// Projected Newton over the cone c, beta >= 0 (see e_star_parisi); returns theta.
Eigen::VectorXd solve_cone(const MixtureXi& xi, int grid_n, ParisiResult* out) {
  // Gamma(t) = c + sum_i beta_i (1 - max(t, s_i)), s_i = i / grid_n, with c, beta >= 0, spans
  // the concave non-increasing functions that are linear between knots and non-negative at 1.
  const int K = grid_n;
  const double x1 = xi.coeff(1);
  const int vars = K + 1;  // index 0 is c
  constexpr int kNodes = 5;
  using Rule = boost::math::quadrature::gauss<double, kNodes>;
  std::vector<double> t_nodes, w_nodes;
  for (int cell = 0; cell < K; ++cell) {
    const double a = static_cast<double>(cell) / K, b = static_cast<double>(cell + 1) / K;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    const auto& abscissa = Rule::abscissa();
    const auto& weights = Rule::weights();
    for (std::size_t k = 0; k < abscissa.size(); ++k) {
      const double offsets[2] = {abscissa[k], -abscissa[k]};
      const int copies = abscissa[k] == 0.0 ? 1 : 2;
      for (int c = 0; c < copies; ++c) {
        t_nodes.push_back(mid + half * offsets[c]);
        w_nodes.push_back(half * weights[k]);
      }
    }
  }
  const Eigen::Index M = static_cast<Eigen::Index>(t_nodes.size());
  Eigen::MatrixXd Phi(M, vars);
  Eigen::VectorXd w(M), curv(M);
  for (Eigen::Index r = 0; r < M; ++r) {
    const double t = t_nodes[static_cast<std::size_t>(r)];
    w(r) = w_nodes[static_cast<std::size_t>(r)];
    curv(r) = xi.d2(t);
    Phi(r, 0) = 1.0;
    for (int i = 0; i < K; ++i) Phi(r, i + 1) = 1.0 - std::max(t, static_cast<double>(i) / K);
  }
  Eigen::VectorXd phi0(vars);  // basis values at t = 0
  phi0(0) = 1.0;
  for (int i = 0; i < K; ++i) phi0(i + 1) = 1.0 - static_cast<double>(i) / K;

  auto objective = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* gamma_out) {
    Eigen::VectorXd gamma = Phi * theta;
    if (gamma.minCoeff() <= 0.0) return kInfinity;
    double val = x1 * phi0.dot(theta);
    val += (w.array() * (curv.array() * gamma.array() + gamma.array().inverse())).sum();
    if (gamma_out) *gamma_out = std::move(gamma);
    return 0.5 * val;
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(vars);
  if (K > 32 && K % 2 == 0) {
    // Warm start from the half grid: its knots are every other knot here.
    ParisiResult coarse;
    const Eigen::VectorXd prev = solve_cone(xi, K / 2, &coarse);
    theta(0) = prev(0);
    for (int i = 0; i < K / 2; ++i) theta(2 * i + 1) = prev(i + 1);
  } else {
    theta(0) = 1.0 / std::sqrt(std::max(xi.d2(1.0), 1e-12));
  }
  Eigen::VectorXd gamma;
  double value = objective(theta, &gamma);
  const int max_iter = 2000;
  int stalled = 0;
  for (int iter = 0; iter < max_iter; ++iter) {
    out->iterations = iter + 1;
    const Eigen::ArrayXd inv2 = gamma.array().square().inverse();
    Eigen::VectorXd grad = 0.5 * (x1 * phi0 + Phi.transpose() * (w.array() * (curv.array() - inv2)).matrix());
    // projected-gradient optimality measure
    const double pg = (theta - (theta - grad).cwiseMax(0.0)).cwiseAbs().maxCoeff();
    if (pg < 1e-10) {
      out->converged = true;
      break;
    }
    // Bertsekas' active set: near-zero variables whose gradient pushes them out.
    const double eps = std::min(1e-3, pg);
    std::vector<int> free;
    for (int j = 0; j < vars; ++j)
      if (!(theta(j) <= eps && grad(j) > 0.0)) free.push_back(j);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(vars);
    {
      const Eigen::ArrayXd wcubic = w.array() * gamma.array().cube().inverse();
      Eigen::MatrixXd PhiF(M, static_cast<Eigen::Index>(free.size()));
      Eigen::VectorXd gF(static_cast<Eigen::Index>(free.size()));
      for (std::size_t f = 0; f < free.size(); ++f) {
        PhiF.col(static_cast<Eigen::Index>(f)) = Phi.col(free[f]);
        gF(static_cast<Eigen::Index>(f)) = grad(free[f]);
      }
      Eigen::MatrixXd H = PhiF.transpose() * (wcubic.matrix().asDiagonal() * PhiF);
      H.diagonal().array() += 1e-14 * H.diagonal().maxCoeff();
      const Eigen::VectorXd step = H.ldlt().solve(-gF);
      for (std::size_t f = 0; f < free.size(); ++f) dir(free[f]) = step(static_cast<Eigen::Index>(f));
      // Active variables take a diagonally scaled gradient step toward the bound.
      for (int j = 0; j < vars; ++j) {
        if (theta(j) <= eps && grad(j) > 0.0) {
          const double diag = (wcubic * Phi.col(j).array().square()).sum();
          dir(j) = -grad(j) / std::max(diag, 1e-300);
        }
      }
    }
    // Armijo search along the projected arc; fall back to the gradient direction.
    auto search = [&](const Eigen::VectorXd& d) {
      double s = 1.0;
      for (int ls = 0; ls < 60; ++ls, s *= 0.5) {
        Eigen::VectorXd trial = (theta + s * d).cwiseMax(0.0);
        Eigen::VectorXd trial_gamma;
        const double tv = objective(trial, &trial_gamma);
        if (tv <= value + 1e-4 * grad.dot(trial - theta)) {
          theta = std::move(trial);
          gamma = std::move(trial_gamma);
          value = tv;
          return true;
        }
      }
      return false;
    };
    const double before = value;
    if (!search(dir) && !search(-grad)) {
      out->converged = pg < 1e-8;
      break;
    }
    stalled = (before - value < 1e-15 * std::max(1.0, std::abs(value))) ? stalled + 1 : 0;
    if (stalled >= 5) {
      out->converged = pg < 1e-8;
      break;
    }
  }
  out->value = value;
  return theta;
}

}  // namespace

ParisiResult e_star_parisi(const MixtureXi& xi, int grid_n) {
  if (grid_n < 4) throw std::invalid_argument("e_star_parisi: grid_n too small");
  ParisiResult out;
  const double x1 = xi.coeff(1);

  if (xi.is_affine()) {
    // Gamma constant: (1/2)(xi_1 L + 1/L) is minimized at L = xi_1^{-1/2}.
    if (!(x1 > 0.0)) throw std::invalid_argument("e_star_parisi: xi_{>0} vanishes");
    out.value = std::sqrt(x1);
    out.converged = true;
    out.gamma.assign(static_cast<std::size_t>(grid_n) + 1, 1.0 / std::sqrt(x1));
    return out;
  }

  if (pointwise_optimum_feasible(xi, grid_n)) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    out.value = integrator.integrate([&](double t) { return std::sqrt(xi.d2(t)); }, 0.0, 1.0, 1e-12);
    out.converged = true;
    out.gamma.resize(static_cast<std::size_t>(grid_n) + 1);
    for (int j = 0; j <= grid_n; ++j)
      out.gamma[static_cast<std::size_t>(j)] = 1.0 / std::sqrt(xi.d2(static_cast<double>(j) / grid_n));
    return out;
  }

  const Eigen::VectorXd theta = solve_cone(xi, grid_n, &out);
  out.gamma.resize(static_cast<std::size_t>(grid_n) + 1);
  for (int j = 0; j <= grid_n; ++j) {
    const double t = static_cast<double>(j) / grid_n;
    double g = theta(0);
    for (int i = 0; i < grid_n; ++i) g += theta(i + 1) * (1.0 - std::max(t, static_cast<double>(i) / grid_n));
    out.gamma[static_cast<std::size_t>(j)] = g;
  }
  return out;
}

}  // namespace nem
