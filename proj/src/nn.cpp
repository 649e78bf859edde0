#include "nem/nn.hpp"

#include "nem/coupling_rng.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nem {

double elu(double x) { return x >= 0.0 ? x : std::expm1(x); }
double elu_prime(double x) { return x >= 0.0 ? 1.0 : std::exp(x); }

GaussHermiteRule gauss_hermite(int nodes) {
  if (nodes < 1) throw std::invalid_argument("gauss_hermite: need at least one node");
  // Jacobi matrix of the monic probabilists' Hermite recurrence He_{k+1} = x He_k - k He_{k-1}.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(nodes, nodes);
  for (int k = 1; k < nodes; ++k) T(k, k - 1) = T(k - 1, k) = std::sqrt(static_cast<double>(k));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  GaussHermiteRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights = es.eigenvectors().row(0).transpose().array().square();
  rule.weights /= rule.weights.sum();
  return rule;
}

KernelValue kernel_quadrature(double q, const Activation& sigma, int nodes) {
  if (!(std::abs(q) <= 1.0)) throw std::domain_error("kernel_quadrature: |q| must be <= 1");
  const GaussHermiteRule rule = gauss_hermite(nodes);
  const double r = std::sqrt(std::max(0.0, 1.0 - q * q));
  KernelValue out;
  for (int i = 0; i < nodes; ++i) {
    const double g1 = rule.nodes(i);
    const double s1 = sigma(g1);
    out.sigma1 += rule.weights(i) * g1 * s1;
    double inner = 0.0;
    for (int j = 0; j < nodes; ++j) inner += rule.weights(j) * sigma(q * g1 + r * rule.nodes(j));
    out.K += rule.weights(i) * s1 * inner;
  }
  return out;
}

double kernel_k0(double q, const Activation& sigma, int nodes) {
  const KernelValue kv = kernel_quadrature(q, sigma, nodes);
  return kv.K - kv.sigma1 * kv.sigma1 * q;
}

std::vector<double> hermite_coefficients(const Activation& sigma, int degree) {
  if (degree < 0) throw std::invalid_argument("hermite_coefficients: negative degree");
  boost::math::quadrature::exp_sinh<double> integrator;
  std::vector<double> c(static_cast<std::size_t>(degree) + 1);
  for (int k = 0; k <= degree; ++k) {
    const double log_norm = 0.5 * std::lgamma(k + 1.0) + 0.5 * std::log(2.0 * M_PI);
    auto integrand = [&](double y) {
      if (std::abs(y) > 60.0) return 0.0;
      double h_prev = 1.0, h = y;
      if (k == 0) h = 1.0;
      for (int j = 2; j <= k; ++j) {
        const double next = y * h - (j - 1) * h_prev;
        h_prev = h;
        h = next;
      }
      return sigma(y) * h * std::exp(-0.5 * y * y - log_norm);
    };
    c[static_cast<std::size_t>(k)] =
        integrator.integrate(integrand, 0.0, INFINITY) +
        integrator.integrate([&](double t) { return integrand(-t); }, 0.0, INFINITY);
  }
  return c;
}

MixtureXi xi_from_network(double a, int degree_cap, const Activation& sigma) {
  if (degree_cap < 3) throw std::invalid_argument("xi_from_network: degree_cap must be >= 3");
  if (!(a >= 0.0)) throw std::invalid_argument("xi_from_network: a must be >= 0");
  const std::vector<double> c = hermite_coefficients(sigma, degree_cap);
  std::vector<double> coeffs(c.size(), 0.0);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (k == 1) continue;  // the linear component is projected out
    double v = a * a * c[k] * c[k];
    if (v < -1e-6) throw ModelMismatch("xi_from_network: coefficient " + std::to_string(k) + " is negative");
    if (v < 1e-12) v = 0.0;
    coeffs[k] = v;
  }
  coeffs[0] += 1.0;
  return MixtureXi(std::move(coeffs));
}

// ---------------------------------------------------------------------------------------

void NNConfig::validate() const {
  if (m < 2 || m % 2 != 0) throw std::invalid_argument("nn: m must be even and >= 2");
  if (D < 1 || n < 1) throw std::invalid_argument("nn: D and n must be positive");
  if (!(a > 0.0) || !(lr > 0.0)) throw std::invalid_argument("nn: a and lr must be positive");
  if (epochs < 0 || batch < 1) throw std::invalid_argument("nn: epochs >= 0, batch >= 1");
  if (!(eps_init >= 0.0)) throw std::invalid_argument("nn: eps_init must be >= 0");
}

NNProblem make_problem(const NNConfig& cfg) {
  cfg.validate();
  Rng rng(derive_seed(cfg.seed, 1));
  NNProblem p;
  p.Z.resize(cfg.n, cfg.D);
  for (int i = 0; i < cfg.n; ++i)
    for (int j = 0; j < cfg.D; ++j) p.Z(i, j) = rng.normal();
  p.y.resize(cfg.n);
  for (int i = 0; i < cfg.n; ++i) p.y(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
  std::vector<double> s(static_cast<std::size_t>(cfg.m), 1.0);
  std::fill(s.begin() + cfg.m / 2, s.end(), -1.0);
  std::shuffle(s.begin(), s.end(), rng.engine());
  p.s = Eigen::Map<Eigen::VectorXd>(s.data(), cfg.m);
  return p;
}

Eigen::VectorXd network_output(const NNProblem& p, const Eigen::MatrixXd& W, double a) {
  const Eigen::MatrixXd pre = p.Z * W.transpose();  // n x m
  const Eigen::MatrixXd act = pre.unaryExpr([](double v) { return elu(v); });
  return (a / std::sqrt(static_cast<double>(W.rows()))) * (act * p.s);
}

double training_error(const NNProblem& p, const Eigen::MatrixXd& W, double a) {
  return 0.5 * (p.y - network_output(p, W, a)).squaredNorm() / static_cast<double>(p.y.size());
}

TrainResult train_interpolation(const NNConfig& cfg) {
  const NNProblem p = make_problem(cfg);
  Rng rng(derive_seed(cfg.seed, 2));
  const double m = cfg.m;
  Eigen::MatrixXd W(cfg.m, cfg.D);
  const double init_sd = cfg.eps_init / std::sqrt(static_cast<double>(cfg.D));
  for (int j = 0; j < cfg.m; ++j)
    for (int k = 0; k < cfg.D; ++k) W(j, k) = init_sd * rng.normal();

  TrainResult out;
  const double scale = cfg.a / std::sqrt(m);
  std::vector<int> order(static_cast<std::size_t>(cfg.n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());
  std::size_t pos = 0;
  int epoch = 0;
  Eigen::MatrixXd step(cfg.m, cfg.D);
  Eigen::VectorXd pre(cfg.m);
  while (epoch < cfg.epochs) {
    // E(k) is the index of the pass the step belongs to; it equals floor(k batch / n) whenever
    // batch divides n.
    const double eta = cfg.lr / std::sqrt(1.0 + epoch);
    step.setZero();
    bool finished_pass = false;
    for (int b = 0; b < cfg.batch; ++b) {
      const int i = order[pos];
      const Eigen::RowVectorXd z = p.Z.row(i);
      pre.noalias() = W * z.transpose();
      double f = 0.0;
      for (int j = 0; j < cfg.m; ++j) f += p.s(j) * elu(pre(j));
      const double resid = p.y(i) - scale * f;
      for (int j = 0; j < cfg.m; ++j) step.row(j) += (resid * scale * p.s(j) * elu_prime(pre(j))) * z;
      if (++pos == order.size()) {
        pos = 0;
        std::shuffle(order.begin(), order.end(), rng.engine());
        finished_pass = true;
        break;  // the batch never straddles two passes
      }
    }
    // -(eta/2) grad (y - f)^2 = eta (y - f) grad f
    W += eta * step;
    const double frob_sq = W.squaredNorm();
    if (frob_sq > m) W *= std::sqrt(m / frob_sq);
    out.max_frob_sq = std::max(out.max_frob_sq, W.squaredNorm());
    if (finished_pass) {
      TraceRecord rec;
      rec.step = epoch;
      rec.t = epoch + 1;
      rec.radius_sq = W.squaredNorm() / m;
      rec.u = training_error(p, W, cfg.a);
      rec.aux = {{"frob_sq", W.squaredNorm()}, {"eta", eta}};
      out.trace.add(std::move(rec));
      ++epoch;
    }
  }
  out.W = W;
  out.final_error = training_error(p, W, cfg.a);
  return out;
}

}  // namespace nem
