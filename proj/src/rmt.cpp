#include "nem/rmt.hpp"

#include "nem/coupling_rng.hpp"
#include "nem/gaussian_map.hpp"
#include "nem/lanczos.hpp"
#include "nem/parallel.hpp"
#include "nem/tensor_ops.hpp"
#include "nem/theory.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace nem {

void EnsembleSpec::validate() const {
  if (N < 1 || M < 0 || M > N) throw std::invalid_argument("ensemble: need 0 <= M <= N, N >= 1");
  if (!(a >= 0.0) || !(b >= 0.0)) throw std::invalid_argument("ensemble: a, b must be >= 0");
  if (N > kRmtMaxN)
    throw BudgetExceeded("ensemble: N = " + std::to_string(N) + " exceeds the eigensolver budget " +
                         std::to_string(kRmtMaxN));
}

Eigen::MatrixXd sample_ensemble(const EnsembleSpec& spec, int trial) {
  spec.validate();
  Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(trial)));
  const Eigen::Index N = spec.N;
  Eigen::MatrixXd A(N, N);
  const double scale = spec.a * std::sqrt(static_cast<double>(N));
  for (Eigen::Index j = 0; j < N; ++j) {
    A(j, j) = scale * std::sqrt(2.0) * rng.normal();
    for (Eigen::Index i = j + 1; i < N; ++i) A(i, j) = A(j, i) = scale * rng.normal();
  }
  if (spec.M > 0 && spec.b != 0.0) {
    Eigen::MatrixXd Z(spec.M, N);
    for (Eigen::Index j = 0; j < N; ++j)
      for (Eigen::Index i = 0; i < spec.M; ++i) Z(i, j) = rng.normal();
    A.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose(), spec.b);
    A.triangularView<Eigen::StrictlyUpper>() = A.transpose();
  }
  return A;
}

double smallest_eigenvalue(const Eigen::MatrixXd& A, EdgeSolver solver) {
  const Eigen::Index N = A.rows();
  if (solver == EdgeSolver::kAuto) solver = N <= kDenseEdgeMaxN ? EdgeSolver::kDense : EdgeSolver::kLanczos;
  if (solver == EdgeSolver::kDense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw std::runtime_error("smallest_eigenvalue: eigensolver failed");
    return es.eigenvalues()(0);
  }
  LanczosOptions options;
  options.tol_abs = 1e-9 * std::max(1.0, A.cwiseAbs().rowwise().sum().maxCoeff());
  options.max_iterations = static_cast<int>(std::min<Eigen::Index>(N, 600));
  options.effective_dim = N;
  options.seed = 0x5eed;
  const LanczosResult r = lanczos_min_eig([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; },
                                          N, options);
  return r.value;
}

EdgeStatistics edge_statistics(std::vector<double> samples) {
  EdgeStatistics s;
  s.samples = std::move(samples);
  if (s.samples.empty()) return s;
  const double n = static_cast<double>(s.samples.size());
  s.mean = std::accumulate(s.samples.begin(), s.samples.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : s.samples) ss += (v - s.mean) * (v - s.mean);
  s.sd = s.samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  return s;
}

EdgeStatistics sample_edge(const EnsembleSpec& spec, int trials, EdgeSolver solver, int jobs) {
  spec.validate();
  if (trials < 1) throw std::invalid_argument("sample_edge: trials must be positive");
  std::vector<double> out(static_cast<std::size_t>(trials));
  parallel_for(out.size(), jobs, [&](std::size_t t) {
    const Eigen::MatrixXd A = sample_ensemble(spec, static_cast<int>(t));
    out[t] = smallest_eigenvalue(A, solver) / spec.N;
  });
  return edge_statistics(std::move(out));
}

std::vector<double> spectral_cdf(const EnsembleSpec& spec, const std::vector<double>& grid) {
  const Eigen::MatrixXd A = sample_ensemble(spec, 0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw std::runtime_error("spectral_cdf: eigensolver failed");
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  for (double& v : ev) v /= spec.N;
  std::vector<double> cdf;
  cdf.reserve(grid.size());
  for (double x : grid) {
    const auto count = std::upper_bound(ev.begin(), ev.end(), x) - ev.begin();
    cdf.push_back(static_cast<double>(count) / static_cast<double>(ev.size()));
  }
  return cdf;
}

std::vector<double> theory_cdf(double alpha, double a, double b, const std::vector<double>& grid) {
  if (!std::is_sorted(grid.begin(), grid.end())) throw std::invalid_argument("theory_cdf: grid must be sorted");
  std::vector<double> out;
  out.reserve(grid.size());
  if (a == 0.0) {
    // Pure Wishart: atom of mass 1 - alpha at 0 plus Marchenko-Pastur mass on [b(1-sqrt a)^2, b(1+sqrt a)^2].
    if (b == 0.0) {
      for (double x : grid) out.push_back(x >= 0.0 ? 1.0 : 0.0);
      return out;
    }
    const double lo = b * std::pow(1.0 - std::sqrt(alpha), 2), hi = b * std::pow(1.0 + std::sqrt(alpha), 2);
    auto mp = [&](double x) {
      if (x <= lo || x >= hi) return 0.0;
      return std::sqrt((hi - x) * (x - lo)) / (2.0 * M_PI * b * x);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    for (double x : grid) {
      double v = x >= 0.0 ? std::max(0.0, 1.0 - alpha) : 0.0;
      if (x > lo) v += integrator.integrate(mp, lo, std::min(x, hi), 1e-9);
      out.push_back(std::min(1.0, v));
    }
    return out;
  }
  const double left = -z_star(alpha, a, b);
  // Every eigenvalue of A/N lies below 2a + b(1 + sqrt(alpha))^2.
  const double right = 2.0 * a + b * std::pow(1.0 + std::sqrt(alpha), 2);
  auto density = [&](double x) { return spectral_density(x, alpha, a, b); };
  boost::math::quadrature::tanh_sinh<double> integrator;
  double acc = 0.0, from = left;
  for (double x : grid) {
    const double to = std::clamp(x, left, right);
    if (to > from) {
      acc += integrator.integrate(density, from, to, 1e-8);
      from = to;
    }
    out.push_back(std::clamp(acc, 0.0, 1.0));
  }
  return out;
}

double semicircle_cdf(double x, double a) {
  if (!(a > 0.0)) return x >= 0.0 ? 1.0 : 0.0;
  const double r = 2.0 * a;
  if (x <= -r) return 0.0;
  if (x >= r) return 1.0;
  const double s = x / r;
  return 0.5 + (s * std::sqrt(1.0 - s * s) + std::asin(s)) / M_PI;
}

double kolmogorov_distance(const std::vector<double>& F, const std::vector<double>& G) {
  if (F.size() != G.size()) throw std::invalid_argument("kolmogorov_distance: size mismatch");
  double best = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) best = std::max(best, std::abs(F[i] - G[i]));
  return best;
}

// ---------------------------------------------------------------------------------------

Eigen::MatrixXd tangent_hessian_lazy(const MixtureXi& xi, int n, int d, double q, std::uint64_t seed,
                                     double* energy) {
  if (n < 1 || d < 2) throw std::invalid_argument("tangent_hessian_lazy: need n >= 1, d >= 2");
  if (!(q > 0.0)) throw std::invalid_argument("tangent_hessian_lazy: q must be positive");
  const int deg = xi.degree();
  const Eigen::Index T = d - 1;
  const std::uint64_t D = static_cast<std::uint64_t>(d);
  auto stride = [&](int k, int slot) { return checked_power(D, k - 1 - slot); };

  // F_i = sum_k sqrt(xi_k) q^{k/2} G^(k)_{i,0...0}
  Eigen::VectorXd F = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, T);
  for (int k = 0; k <= deg; ++k) {
    const double c = xi.coeff(k);
    if (c == 0.0) continue;
    const double w = std::sqrt(c);
    for (int i = 0; i < n; ++i) {
      F(i) += w * std::pow(q, 0.5 * k) * coupling_normal(seed, k, static_cast<std::uint64_t>(i), 0);
      if (k == 0) continue;
      const double wj = w * std::pow(q, 0.5 * (k - 1));
      for (int s = 0; s < k; ++s) {
        const std::uint64_t st = stride(k, s);
        for (Eigen::Index j = 1; j < d; ++j)
          J(i, j - 1) += wj * coupling_normal(seed, k, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j) * st);
      }
    }
  }

  Eigen::MatrixXd hess = J.transpose() * J;
  Eigen::MatrixXd block(T, T);
  std::vector<double> row(static_cast<std::size_t>(T));
  for (int k = 2; k <= deg; ++k) {
    const double c = xi.coeff(k);
    if (c == 0.0) continue;
    const double wk = std::sqrt(c) * std::pow(q, 0.5 * (k - 2));
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(T, T);
    for (int s = 0; s < k; ++s) {
      for (int t = s + 1; t < k; ++t) {
        const std::uint64_t ss = stride(k, s), ts = stride(k, t);
        // sum_i F_i G_i[slot s = j, slot t = l, others 0]
        block.setZero();
        for (int i = 0; i < n; ++i) {
          const std::uint64_t eq = static_cast<std::uint64_t>(i);
          for (Eigen::Index j = 1; j < d; ++j) {
            const std::uint64_t base = static_cast<std::uint64_t>(j) * ss;
            if (ts == 1) {
              coupling_normals(seed, k, eq, base + 1, static_cast<std::uint64_t>(T), row.data());
            } else {
              for (Eigen::Index l = 1; l < d; ++l)
                row[static_cast<std::size_t>(l - 1)] = coupling_normal(seed, k, eq, base + static_cast<std::uint64_t>(l) * ts);
            }
            block.row(j - 1) += F(i) * Eigen::Map<const Eigen::RowVectorXd>(row.data(), T);
          }
        }
        acc += block + block.transpose();
      }
    }
    hess += wk * acc;
  }
  if (energy) *energy = 0.5 * F.squaredNorm();
  return hess;
}

Eigen::MatrixXd tangent_hessian_stored(const MixtureXi& xi, int n, int d, double q, std::uint64_t seed,
                                       double* energy) {
  if (!(q > 0.0)) throw std::invalid_argument("tangent_hessian_stored: q must be positive");
  const GaussianMap map = sample_map(xi, n, d, seed);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(d);
  x(0) = std::sqrt(q);
  const LocalModel model = local_model(map, x);
  if (energy) *energy = model.energy;
  return model.hessian().bottomRightCorner(d - 1, d - 1);
}

HessianLawReport verify_hessian_law(const MixtureXi& xi, int n, int d, double q, int trials,
                                    std::uint64_t seed, int jobs) {
  if (trials < 1) throw std::invalid_argument("verify_hessian_law: trials must be positive");
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("verify_hessian_law: q in (0, 1]");
  if (d - 1 > kRmtMaxN) throw BudgetExceeded("verify_hessian_law: d exceeds the eigensolver budget");
  HessianLawReport rep;
  rep.q = q;
  rep.n = n;
  rep.d = d;
  rep.lazy = GaussianMap::coupling_bytes(xi, n, d) > MapOptions{}.memory_budget_bytes;
  rep.trials.resize(static_cast<std::size_t>(trials));
  const double alpha = static_cast<double>(n) / d;
  parallel_for(rep.trials.size(), jobs, [&](std::size_t t) {
    const std::uint64_t s = derive_seed(seed, t);
    double energy = 0.0;
    const Eigen::MatrixXd H = rep.lazy ? tangent_hessian_lazy(xi, n, d, q, s, &energy)
                                       : tangent_hessian_stored(xi, n, d, q, s, &energy);
    HessianLawTrial& tr = rep.trials[t];
    tr.lambda_min = smallest_eigenvalue(H, EdgeSolver::kDense);
    tr.energy = energy;
    const double a = std::sqrt(2.0 * alpha * xi.d2(q) * energy / n);
    tr.predicted = -static_cast<double>(d) * z_star(alpha, a, xi.d1(q));
  });
  std::vector<double> lam;
  double pred = 0.0, en = 0.0;
  for (const auto& tr : rep.trials) {
    lam.push_back(tr.lambda_min / d);
    pred += tr.predicted / d;
    en += tr.energy / n;
  }
  const EdgeStatistics st = edge_statistics(std::move(lam));
  rep.mean_lambda_over_d = st.mean;
  rep.sd_lambda_over_d = st.sd;
  rep.mean_predicted_over_d = pred / trials;
  rep.mean_energy_over_n = en / trials;
  rep.energy_target = 0.5 * xi(q);
  rep.energy_band = rep.energy_target * 5.0 * std::sqrt(2.0 / n);
  return rep;
}

}  // namespace nem
