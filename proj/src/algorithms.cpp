#include "nem/algorithms.hpp"

#include "nem/coupling_rng.hpp"
#include "nem/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace nem {

Eigen::VectorXd random_unit_vector(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(d);
  do {
    for (Eigen::Index i = 0; i < d; ++i) v(i) = rng.normal();
  } while (v.norm() == 0.0);
  return v / v.norm();
}

SolverResult gradient_descent(const GaussianMap& map, const GradientDescentOptions& options) {
  if (!(options.eta > 0.0)) throw std::invalid_argument("gradient_descent: eta must be positive");
  const double n = map.n();
  Eigen::VectorXd x = options.start ? Eigen::VectorXd(*options.start / options.start->norm())
                                    : random_unit_vector(map.d(), derive_seed(options.seed, 1));
  SolverResult result;
  for (int k = 0;; ++k) {
    const MapValue value = map_eval(map, x);
    const Eigen::VectorXd grad = value_and_pullback(map, x, value.F).pullback;
    const Eigen::VectorXd tangent = grad - grad.dot(x) * x;
    TraceRecord rec;
    rec.step = k;
    rec.t = k;
    rec.radius_sq = x.squaredNorm();
    rec.u = value.energy / n;
    rec.aux = {{"grad_norm", tangent.norm()}};
    result.trace.add(rec);
    result.final_u = rec.u;
    if (k >= options.max_iters || value.energy <= options.stop_energy) break;
    Eigen::VectorXd z = x - options.eta * tangent;
    const double norm = z.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    x = z / norm;
  }
  result.x = x;
  return result;
}

EigenDirection min_eig_direction(const LocalModel& model, const ConstraintSubspace& subspace,
                                 double tol_abs, int max_lanczos, std::uint64_t seed) {
  const Eigen::Index d = model.J.cols();
  LanczosOptions opts;
  opts.tol_abs = tol_abs;
  opts.max_iterations = std::max(2, max_lanczos);
  opts.effective_dim = d - subspace.constraint_count();
  opts.seed = seed;
  const LanczosResult res = lanczos_min_eig(
      [&](const Eigen::VectorXd& v) { return model.hessian_apply(v); }, d, opts,
      [&](const Eigen::VectorXd& v) { return subspace.project(v); });
  EigenDirection out;
  out.v = res.vector;
  out.rayleigh = res.value;
  out.residual = res.residual;
  out.iterations = res.iterations;
  out.converged = res.converged;
  return out;
}

EigenDirection min_eig_direction(const GaussianMap& map, const Eigen::VectorXd& x,
                                 const ConstraintSubspace& subspace, double tol_abs,
                                 int max_lanczos, std::uint64_t seed) {
  if (subspace.dim() != map.d()) throw DimensionMismatch("min_eig_direction: subspace dimension");
  return min_eig_direction(local_model(map, x), subspace, tol_abs, max_lanczos, seed);
}

namespace {

int default_lanczos_cap(double delta) {
  return std::max(20, static_cast<int>(std::ceil(40.0 * std::log(1.0 / delta))));
}

}  // namespace

SolverResult hessian_descent(const GaussianMap& map, const HessianDescentOptions& options) {
  const double delta = options.delta;
  if (!(delta > 0.0 && delta < 1.0))
    throw std::invalid_argument("hessian_descent: delta must lie in (0, 1)");
  const int d = map.d();
  const double n = map.n();
  const double sqrt_delta = std::sqrt(delta);
  const int cap = options.max_lanczos > 0 ? options.max_lanczos : default_lanczos_cap(delta);
  const double tol = options.tol_factor * d * delta;

  Eigen::VectorXd x;
  double base = 0.0;
  int k = 0;
  int steps = 0;
  if (options.start && options.start->norm() > 0.0) {
    x = *options.start;
    base = x.squaredNorm();
    if (base >= 1.0) throw std::invalid_argument("hessian_descent: start must lie inside the ball");
    steps = static_cast<int>(std::floor((1.0 - base) / delta + 1e-9));
  } else {
    // x^0 = 0 and x^1 = sqrt(delta) Unif(S^{d-1}): the first step is already taken.
    x = sqrt_delta * random_unit_vector(d, derive_seed(options.seed, 1));
    k = 1;
    steps = static_cast<int>(std::floor(1.0 / delta + 1e-9)) - 1;
  }

  SolverResult result;
  for (int s = 0; s < steps; ++s, ++k) {
    const LocalModel model = local_model(map, x);
    const ConstraintSubspace subspace(x, options.subspace_extras, 1e-10, true);
    const EigenDirection dir =
        min_eig_direction(model, subspace, tol, cap, derive_seed(options.seed, 2, k));
    const double slope = dir.v.dot(model.gradient());
    const double sign = slope < 0.0 ? -1.0 : 1.0;

    TraceRecord rec;
    rec.step = k;
    rec.radius_sq = x.squaredNorm();
    rec.t = rec.radius_sq - base;
    rec.u = model.energy / n;
    rec.aux = {{"rayleigh", dir.rayleigh},
               {"first_order", -sign * slope},
               {"lanczos_residual", dir.residual},
               {"lanczos_iterations", static_cast<double>(dir.iterations)}};
    result.trace.add(rec);

    x -= sign * sqrt_delta * dir.v;
  }

  const double radius_sq = x.squaredNorm();
  const Eigen::VectorXd final_x = x / std::sqrt(radius_sq);
  const MapValue last = map_eval(map, final_x);
  TraceRecord rec;
  rec.step = k;
  rec.radius_sq = 1.0;
  rec.t = 1.0 - base;
  rec.u = last.energy / n;
  rec.aux = {{"pre_normalization_radius_sq", radius_sq}};
  result.trace.add(rec);
  result.x = final_x;
  result.final_u = rec.u;
  return result;
}

AmpResult amp_phase(const GaussianMap& map, double gamma, int L, OnsagerVariant variant) {
  if (L < 2) throw std::invalid_argument("amp_phase: L must be >= 2");
  if (!std::isfinite(gamma)) throw std::invalid_argument("amp_phase: gamma must be finite");
  const int d = map.d();
  const int n = map.n();
  const double alpha = map.alpha();
  const double sqrt_alpha = std::sqrt(alpha);
  const MixtureXi& xi = map.xi();

  Eigen::VectorXd m_prev = Eigen::VectorXd::Zero(d), m_cur = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(n), h_cur = Eigen::VectorXd::Zero(n);
  AmpResult result;

  for (int ell = 0; ell <= L; ++ell) {
    const double overlap_m = m_cur.dot(m_prev);
    const double overlap_h = h_cur.dot(h_prev);
    double B = 0.0, C = 0.0, D = 0.0;
    if (ell >= 2) {
      const double slope = xi.d1(overlap_m);
      B = slope / sqrt_alpha;
      C = sqrt_alpha * slope;
      D = (variant == OnsagerVariant::kLiteral ? slope : xi.d2(overlap_m)) * overlap_h;
    }
    const ValueAndPullback vp = value_and_pullback(map, m_cur, h_cur, false);

    TraceRecord rec;
    rec.step = ell;
    rec.t = ell;
    rec.radius_sq = m_cur.squaredNorm();
    rec.u = 0.5 * vp.F.squaredNorm() / n;
    rec.aux = {{"h_norm_sq", h_cur.squaredNorm()},
               {"overlap_m", overlap_m},
               {"overlap_h", overlap_h},
               {"B", B},
               {"C", C},
               {"D", D}};
    result.trace.add(rec);
    if (ell == L) break;

    Eigen::VectorXd h_next = vp.F / std::sqrt(static_cast<double>(n)) - gamma * B * h_prev;
    Eigen::VectorXd m_next = (gamma / std::sqrt(static_cast<double>(d))) * vp.pullback -
                             (gamma * C + gamma * gamma * D) * m_prev;
    const double size = m_next.squaredNorm() + h_next.squaredNorm();
    if (!std::isfinite(size) || size > 1e12) {
      throw AmpDiverged(ell + 1, "amp_phase: iterates diverged at iteration " +
                                     std::to_string(ell + 1));
    }
    m_prev = std::move(m_cur);
    m_cur = std::move(m_next);
    h_prev = std::move(h_cur);
    h_cur = std::move(h_next);
  }
  result.m = std::move(m_cur);
  result.h = std::move(h_cur);
  return result;
}

TwoPhaseResult two_phase(const GaussianMap& map, const TwoPhaseOptions& options) {
  TwoPhaseResult result;
  AmpResult amp;
  if (options.gamma != 0.0) {
    amp = amp_phase(map, options.gamma, options.L, options.onsager);
  } else {
    amp.m = Eigen::VectorXd::Zero(map.d());
    amp.h = Eigen::VectorXd::Zero(map.n());
  }
  result.m_amp = amp.m;
  const double q = amp.m.squaredNorm();
  result.amp_u = amp.trace.empty() ? 0.0 : amp.trace.back().u;
  for (const auto& r : amp.trace.records()) {
    TraceRecord rec = r;
    rec.aux.insert(rec.aux.begin(), {"phase", 1.0});
    result.trace.add(std::move(rec));
  }

  if (q >= 1.0) {
    result.phase_two_skipped = true;
    result.x = amp.m / std::sqrt(q);
    result.final_u = map_eval(map, result.x).energy / map.n();
    return result;
  }

  HessianDescentOptions hd;
  hd.delta = options.delta;
  hd.seed = options.seed;
  hd.max_lanczos = options.max_lanczos;
  if (q > 1e-20) {
    hd.start = amp.m;
    hd.subspace_extras = {amp.m};
  }
  SolverResult second = hessian_descent(map, hd);
  for (const auto& r : second.trace.records()) {
    TraceRecord rec = r;
    rec.aux.insert(rec.aux.begin(), {"phase", 2.0});
    result.trace.add(std::move(rec));
  }
  result.x = std::move(second.x);
  result.final_u = second.final_u;
  return result;
}

}  // namespace nem
