#include "nem/theory.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/Polynomials>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace nem {
namespace {

constexpr int kBisectionSteps = 80;

/// Smallest point of (lo, hi] where a monotone predicate switches from false to true.
double bisect_threshold(const std::function<bool(double)>& pred, double lo, double hi) {
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

/// Maximum of f on [lo, hi] by Brent's method.
std::pair<double, double> maximize(const std::function<double(double)>& f, double lo, double hi) {
  auto neg = [&](double x) { return -f(x); };
  const auto res = boost::math::tools::brent_find_minima(neg, lo, hi, 52);
  return {res.first, -res.second};
}

/// Grid scan followed by Brent refinement around the best grid point.
std::pair<double, double> grid_maximize(const std::function<double(double)>& f,
                                        const std::vector<double>& grid) {
  std::size_t best = 0;
  double best_val = -kInfinity;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = f(grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  const double lo = grid[best == 0 ? 0 : best - 1];
  const double hi = grid[std::min(best + 1, grid.size() - 1)];
  if (hi > lo) {
    const auto refined = maximize(f, lo, hi);
    if (refined.second > best_val) return refined;
  }
  return {grid[best], best_val};
}

double integrate(const std::function<double(double)>& f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> integrator;
  return integrator.integrate(f, a, b, 1e-12);
}

bool is_pure(const MixtureXi& xi, double* xi0, int* p) {
  int nonzero = 0, deg = 0;
  for (int k = 1; k <= xi.degree(); ++k) {
    if (xi.coeff(k) > 0.0) {
      ++nonzero;
      deg = k;
    }
  }
  if (nonzero != 1 || xi.coeff(deg) != 1.0) return false;
  *xi0 = xi.coeff(0);
  *p = deg;
  return true;
}

}  // namespace

// ---------------------------------------------------------------------------------------

double psi(double r, double alpha, const MixtureXi& xi) {
  if (xi.coeff(1) != 0.0 || xi.coeff(2) != 0.0)
    throw HypothesisViolation("psi: requires xi'(0) = xi''(0) = 0");
  if (!(r > -1.0 && r < 1.0)) throw std::domain_error("psi: r must lie in (-1, 1)");
  if (xi.is_affine() && xi.coeff(1) == 0.0) throw HypothesisViolation("psi: xi is constant");
  // increments over xi(0) are summed directly so that nothing cancels near r = 0
  const MixtureXi rest = xi.without_constant();
  const double x0 = xi(0.0);
  const double span = rest(1.0);
  const double dr = rest(r);
  const double rho = dr / span;
  return 0.5 * std::log1p(-r * r) - 0.5 * alpha * std::log1p(-rho * rho) -
         alpha * x0 / (span + dr) + alpha * x0 / span;
}

double alpha_lb(const MixtureXi& xi, int grid_n) {
  if (grid_n < 10) throw std::invalid_argument("alpha_lb: grid_n too small");
  std::vector<double> grid(static_cast<std::size_t>(grid_n));
  const double lo = 1e-4, hi = 1.0 - 1e-6;
  for (int j = 0; j < grid_n; ++j) grid[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (grid_n - 1);
  auto positive = [&](double alpha) {
    const auto best = grid_maximize([&](double r) { return psi(r, alpha, xi); }, grid);
    return best.second > 1e-10;
  };
  if (!positive(20.0)) return kInfinity;
  return bisect_threshold(positive, 0.0, 20.0);
}

double theta_p(double E, int p) {
  if (p < 2) throw std::invalid_argument("theta_p: p must be >= 2");
  const double P = p;
  const double ratio = P / (P - 1.0);
  const double edge = 2.0 * std::sqrt((P - 1.0) / P);
  if (E < edge * (1.0 - 1e-12)) throw std::domain_error("theta_p: E below 2 sqrt((p-1)/p)");
  const double inner = std::max(0.0, ratio * E * E - 4.0);
  const double inner_half = std::max(0.0, ratio * E * E / 4.0 - 1.0);
  return 0.5 * std::log(P - 1.0) - (P - 2.0) / (P - 1.0) * E * E / 4.0 -
         std::sqrt(ratio) * E / 4.0 * std::sqrt(inner) +
         std::log(std::sqrt(inner_half) + std::sqrt(ratio) * E / 2.0);
}

double e_star_pure(int p) {
  if (p < 2) throw std::invalid_argument("e_star_pure: p must be >= 2");
  const double edge = 2.0 * std::sqrt((p - 1.0) / p);
  if (p == 2) return edge;
  double lo = edge, hi = edge + 1.0;
  while (theta_p(hi, p) > 0.0) hi += 1.0;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (theta_p(mid, p) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double alpha_ub1(const MixtureXi& xi) {
  if (!(xi.coeff(0) > 0.0)) throw HypothesisViolation("alpha_ub1: requires xi(0) > 0");
  const double e = e_star_parisi(xi.without_constant()).value;
  return e * e / xi.coeff(0);
}

double eps0(double alpha, const MixtureXi& xi, double alpha_ub1_value) {
  if (!(alpha > 0.0)) throw std::domain_error("eps0: alpha must be positive");
  const double gap = std::max(0.0, 1.0 - std::sqrt(alpha_ub1_value / alpha));
  return xi(0.0) / xi(1.0) * gap * gap;
}

double phi1(double c, int p, double xi0) {
  if (p < 3) throw std::invalid_argument("phi1: p must be >= 3");
  if (!(xi0 > 0.0)) throw std::invalid_argument("phi1: xi0 must be positive");
  if (c < 0.0) throw std::invalid_argument("phi1: c must be non-negative");
  const double e = e_star_pure(p);
  const double cap = 10.0 * std::sqrt(xi0) * (1.0 + c);
  auto g = [&](double t) { return c * t + theta_p(e + t, p); };
  const auto best = maximize(g, 0.0, cap);
  if (best.first > cap * (1.0 - 1e-6) || g(cap) >= g(cap * (1.0 - 1e-3)))
    throw std::runtime_error("phi1: supremum over t not certified inside the cap");
  const double sup_t = std::max(best.second, g(0.0));
  return c * e + 0.5 * c * c * xi0 + sup_t;
}

double phi2(double c, double alpha, double xi1_total) {
  if (!(alpha > 0.0)) throw std::invalid_argument("phi2: alpha must be positive");
  const double k = c * std::sqrt(xi1_total / alpha);
  const double t = 0.5 * (std::sqrt(k * k + 4.0) - k);
  return -c * std::sqrt(alpha * xi1_total) * t - alpha * (t * t - 1.0) / 2.0 + alpha * std::log(t);
}

double alpha_ub2(double xi0, int p) {
  if (p < 3) throw UnsupportedModel("alpha_ub2: requires p >= 3");
  if (!(xi0 > 0.0)) throw UnsupportedModel("alpha_ub2: requires xi0 > 0");
  const double total = 1.0 + xi0;
  std::vector<double> cs;
  for (int j = 0; j <= 120; ++j) cs.push_back(std::pow(10.0, -3.0 + 5.0 * j / 120.0));
  auto objective = [&](double c, double alpha) {
    return phi1(c, p, xi0) + phi2(c, alpha, total) - 0.5 * c * c * total;
  };
  auto negative = [&](double alpha) {
    const auto best = grid_maximize([&](double c) { return -objective(c, alpha); }, cs);
    return -best.second < -1e-12;
  };
  double hi = 1.0;
  while (!negative(hi)) {
    hi *= 2.0;
    if (hi > 1e3) return kInfinity;
  }
  return bisect_threshold(negative, 0.0, hi);
}

double alpha_ub2(const MixtureXi& xi) {
  double xi0 = 0.0;
  int p = 0;
  if (!is_pure(xi, &xi0, &p))
    throw UnsupportedModel("alpha_ub2: only pure models xi0 + q^p are supported");
  return alpha_ub2(xi0, p);
}

double alpha_gd_threshold(const MixtureXi& xi, double c0) {
  const double x2 = xi.d2(1.0);
  if (!(x2 > 0.0)) throw HypothesisViolation("alpha_gd_threshold: requires xi''(1) > 0");
  const double x1 = xi.d1(1.0);
  const double x3 = xi.d3(1.0);
  const double logterm = x3 > 0.0 ? std::max(std::log(x3 / x2), 1.0) : 1.0;
  return c0 * x1 * x1 / (x2 * xi(1.0) * logterm);
}

// ---------------------------------------------------------------------------------------

double q_of_m(double m, double alpha, double a, double b) {
  return -1.0 / m + alpha * b / (1.0 + b * m) - a * a * m;
}

double z_star(double alpha, double a, double b) {
  if (!(alpha > 0.0)) throw std::domain_error("z_star: alpha must be positive");
  if (a < 0.0 || b < 0.0) throw std::domain_error("z_star: a and b must be non-negative");
  if (b == 0.0) return 2.0 * a;
  if (a == 0.0) {
    if (alpha <= 1.0) return 0.0;
    const double s = std::sqrt(alpha) - 1.0;
    return -b * s * s;
  }
  // Stationary points of Q solve (1 + b m)^2 (1 - a^2 m^2) - alpha b^2 m^2 = 0.
  Eigen::Matrix<double, 5, 1> poly;
  poly << 1.0, 2.0 * b, b * b - a * a - alpha * b * b, -2.0 * a * a * b, -a * a * b * b;
  Eigen::PolynomialSolver<double, 4> solver(poly);
  double best = -kInfinity;
  for (Eigen::Index i = 0; i < solver.roots().size(); ++i) {
    const auto r = solver.roots()(i);
    if (std::abs(r.imag()) > 1e-8 * std::max(1.0, std::abs(r.real())) || r.real() <= 0.0) continue;
    double m = r.real();
    // Newton polish on Q'(m) = 1/m^2 - alpha b^2/(1+bm)^2 - a^2.
    for (int it = 0; it < 4; ++it) {
      const double w = 1.0 + b * m;
      const double f = 1.0 / (m * m) - alpha * b * b / (w * w) - a * a;
      const double fp = -2.0 / (m * m * m) + 2.0 * alpha * b * b * b / (w * w * w);
      if (fp == 0.0) break;
      const double next = m - f / fp;
      if (!(next > 0.0)) break;
      m = next;
    }
    best = std::max(best, q_of_m(m, alpha, a, b));
  }
  if (!std::isfinite(best)) {
    // Fallback: log-grid maximization.
    std::vector<double> grid;
    for (int j = 0; j <= 400; ++j) grid.push_back(std::pow(10.0, -8.0 + 16.0 * j / 400.0));
    best = grid_maximize([&](double m) { return q_of_m(m, alpha, a, b); }, grid).second;
  }
  return -best;
}

std::complex<double> stieltjes(std::complex<double> z, double alpha, double a, double b) {
  if (!(z.imag() > 0.0)) throw std::domain_error("stieltjes: requires Im z > 0");
  using C = std::complex<double>;
  auto residual = [&](C s, C zz) {
    return a * a * b * s * s * s + (a * a + zz * b) * s * s + (b - alpha * b + zz) * s + 1.0;
  };
  auto derivative = [&](C s, C zz) {
    return 3.0 * a * a * b * s * s + 2.0 * (a * a + zz * b) * s + (b - alpha * b + zz);
  };
  const double scale = 10.0 * (1.0 + 2.0 * a + b * (1.0 + alpha) + std::abs(z));
  const double eta_start = std::max(scale, z.imag());
  const int steps = 400;
  C s = -1.0 / C(z.real(), eta_start);
  for (int k = 0; k <= steps; ++k) {
    const double frac = static_cast<double>(k) / steps;
    const double eta = eta_start * std::pow(z.imag() / eta_start, frac);
    const C zz(z.real(), eta);
    for (int it = 0; it < 50; ++it) {
      const C step = residual(s, zz) / derivative(s, zz);
      s -= step;
      if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(s))) break;
    }
  }
  if (!(s.imag() > 0.0) || !std::isfinite(s.real()))
    throw std::runtime_error("stieltjes: continuation lost the physical branch");
  return s;
}

double spectral_density(double x, double alpha, double a, double b, double eta) {
  return stieltjes({x, eta}, alpha, a, b).imag() / M_PI;
}

// ---------------------------------------------------------------------------------------

OdeCurve hd_ode(double alpha, const MixtureXi& xi, double q_start, double u0, double step_h) {
  if (!(alpha > 0.0)) throw std::domain_error("hd_ode: alpha must be positive");
  if (u0 < 0.0) throw std::domain_error("hd_ode: u0 must be non-negative");
  if (!(q_start >= 0.0 && q_start < 1.0)) throw std::domain_error("hd_ode: q_start in [0, 1)");
  if (!(step_h > 0.0)) throw std::domain_error("hd_ode: step must be positive");
  const double horizon = 1.0 - q_start;
  const int steps = std::max(1, static_cast<int>(std::ceil(horizon / step_h - 1e-9)));
  const double h = horizon / steps;
  auto rhs = [&](double t, double u) {
    u = std::max(u, 0.0);
    const double q = q_start + t;
    const double a = std::sqrt(2.0 * alpha * u * xi.d2(q));
    return -z_star(alpha, a, xi.d1(q)) / (2.0 * alpha);
  };
  OdeCurve curve;
  curve.t.reserve(static_cast<std::size_t>(steps) + 1);
  curve.u.reserve(static_cast<std::size_t>(steps) + 1);
  double u = u0;
  curve.t.push_back(0.0);
  curve.u.push_back(u);
  for (int k = 0; k < steps; ++k) {
    const double t = k * h;
    if (u > 0.0) {
      const double k1 = rhs(t, u);
      const double k2 = rhs(t + h / 2, u + h / 2 * k1);
      const double k3 = rhs(t + h / 2, u + h / 2 * k2);
      const double k4 = rhs(t + h, u + h * k3);
      u = std::max(0.0, u + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4));
    }
    curve.t.push_back((k + 1) * h);
    curve.u.push_back(u);
  }
  return curve;
}

double hd_final_energy(double alpha, const MixtureXi& xi, double step_h) {
  return hd_ode(alpha, xi, 0.0, 0.5 * xi(0.0), step_h).final_u();
}

double alpha_hd(const MixtureXi& xi, double u_tol, double step_h) {
  if (xi.is_affine()) return 0.0;
  if (!(xi.coeff(0) > 0.0)) return kInfinity;
  auto solved = [&](double alpha) { return hd_final_energy(alpha, xi, step_h) <= u_tol; };
  const double A = hd_bounds(0.5, xi).A;
  double hi = 2.0 * A + 1.0;
  while (solved(hi)) {
    hi *= 2.0;
    if (hi > 1e4) return kInfinity;
  }
  // solved for small alpha, unsolved at hi: the threshold is where "unsolved" starts.
  return bisect_threshold([&](double a) { return !solved(a); }, 0.0, hi);
}

HdBounds hd_bounds(double alpha, const MixtureXi& xi) {
  if (!(xi.coeff(0) > 0.0)) throw HypothesisViolation("hd_bounds: requires xi(0) > 0");
  if (!(alpha > 0.0)) throw std::domain_error("hd_bounds: alpha must be positive");
  const double I = xi.is_affine() ? 0.0
                                  : integrate([&](double t) { return std::sqrt(std::max(0.0, xi.d2(t))); },
                                              0.0, 1.0);
  const double root0 = std::sqrt(xi.coeff(0));
  HdBounds out;
  const double lb = std::max(0.0, root0 - std::sqrt(1.0 / alpha) * I);
  const double ub = std::max(0.0, root0 - std::sqrt(std::max(0.0, 1.0 - alpha) / alpha) * I);
  out.u_lb = 0.5 * lb * lb;
  out.u_ub = 0.5 * ub * ub;
  out.A = I * I / xi.coeff(0);
  return out;
}

// ---------------------------------------------------------------------------------------

double v_rs(double q, const MixtureXi& xi) { return xi(q) * xi.d1(q) / q; }

double q_rs(const MixtureXi& xi) {
  if (xi.is_affine()) return kInfinity;
  std::vector<double> grid;
  for (int j = 0; j <= 400; ++j) grid.push_back(10.0 * std::pow(1e-6, 1.0 - j / 400.0));
  return grid_maximize([&](double q) { return -v_rs(q, xi); }, grid).first;
}

double q0_of_alpha(double alpha, const MixtureXi& xi) {
  if (!(alpha > 0.0)) throw std::domain_error("q0: alpha must be positive");
  auto g = [&](double q) { return q * xi.d1(q) / xi(q); };
  double hi = 1.0;
  while (g(hi) <= alpha) {
    hi *= 2.0;
    if (hi > 1e12) return kInfinity;
  }
  double lo = 0.0;
  for (int i = 0; i < kBisectionSteps; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < alpha ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double gamma_star(double q, const MixtureXi& xi) {
  if (!(q > 0.0)) throw std::domain_error("gamma_star: q must be positive");
  return -std::sqrt(q / (xi(q) * xi.d1(q)));
}

double u_rs(double q, double alpha, const MixtureXi& xi) {
  const double gap = std::max(0.0, std::sqrt(xi(q)) - std::sqrt(q * xi.d1(q) / alpha));
  return 0.5 * gap * gap;
}

RsQuantities rs_quantities(double alpha, const MixtureXi& xi) {
  if (!(xi.coeff(0) > 0.0 && xi.coeff(1) > 0.0))
    throw HypothesisViolation("rs_quantities: requires xi(0) > 0 and xi'(0) > 0");
  RsQuantities out;
  out.q_rs = q_rs(xi);
  out.q0 = q0_of_alpha(alpha, xi);
  out.q_star = std::min(out.q_rs, out.q0);
  const double q_bar = std::min(out.q_star, 1.0);
  out.gamma_star = gamma_star(q_bar, xi);
  out.u_rs = u_rs(q_bar, alpha, xi);
  return out;
}

double two_phase_final_energy(double alpha, const MixtureXi& xi,
                              const TwoPhaseOptionsTheory& options) {
  if (!(xi.coeff(1) > 0.0)) return hd_final_energy(alpha, xi, options.step_h);
  const double q_star = std::min(q_rs(xi), q0_of_alpha(alpha, xi));
  if (q_star >= 1.0) {
    if (options.literal_qstar_remark) {
      const double gap = std::max(0.0, std::sqrt(xi(1.0)) - std::sqrt(2.0 * xi.d1(1.0) / alpha));
      return 0.5 * gap * gap;
    }
    return u_rs(1.0, alpha, xi);
  }
  return hd_ode(alpha, xi, q_star, u_rs(q_star, alpha, xi), options.step_h).final_u();
}

double alpha_tp(const MixtureXi& xi, double u_tol, const TwoPhaseOptionsTheory& options) {
  auto solved = [&](double alpha) { return two_phase_final_energy(alpha, xi, options) <= u_tol; };
  double hi = 1.0;
  while (solved(hi)) {
    hi *= 2.0;
    if (hi > 1e4) return kInfinity;
  }
  return bisect_threshold([&](double a) { return !solved(a); }, 0.0, hi);
}

std::vector<double> state_evolution(double gamma, const MixtureXi& xi, int L) {
  if (L < 1) throw std::invalid_argument("state_evolution: L must be >= 1");
  std::vector<double> q(static_cast<std::size_t>(L) + 1, 0.0);
  for (int l = 0; l < L; ++l) {
    const double v = q[static_cast<std::size_t>(l)];
    q[static_cast<std::size_t>(l) + 1] = gamma * gamma * xi(v) * xi.d1(v);
  }
  return q;
}

AmpStateEvolution amp_state_evolution(double gamma, const MixtureXi& xi, int L) {
  if (L < 1) throw std::invalid_argument("amp_state_evolution: L must be >= 1");
  AmpStateEvolution se;
  se.m.assign(static_cast<std::size_t>(L) + 1, 0.0);
  se.h.assign(static_cast<std::size_t>(L) + 1, 0.0);
  for (std::size_t l = 0; l < static_cast<std::size_t>(L); ++l) {
    se.m[l + 1] = gamma * gamma * xi.d1(se.m[l]) * se.h[l];
    se.h[l + 1] = xi(se.m[l]);
  }
  return se;
}

// ---------------------------------------------------------------------------------------

TheoryReport theory_report(const MixtureXi& xi, double alpha, double c0) {
  TheoryReport r;
  r.xi = xi;
  r.alpha = alpha;
  r.c0 = c0;
  auto attempt = [&](const char* name, const std::function<void()>& body) {
    try {
      body();
    } catch (const std::exception& e) {
      r.skipped.emplace_back(name, e.what());
    }
  };
  attempt("alpha_lb", [&] { r.alpha_lb = alpha_lb(xi); });
  attempt("e_star", [&] { r.e_star = e_star_parisi(xi.without_constant()).value; });
  attempt("alpha_ub1", [&] {
    if (!(xi.coeff(0) > 0.0)) throw HypothesisViolation("requires xi(0) > 0");
    r.alpha_ub1 = r.e_star * r.e_star / xi.coeff(0);
    r.eps0 = eps0(alpha, xi, r.alpha_ub1);
  });
  attempt("alpha_ub2", [&] { r.alpha_ub2 = alpha_ub2(xi); });
  attempt("alpha_gd", [&] { r.alpha_gd = alpha_gd_threshold(xi, c0); });
  attempt("alpha_hd", [&] { r.alpha_hd = alpha_hd(xi); });
  attempt("alpha_tp", [&] { r.alpha_tp = alpha_tp(xi); });
  attempt("rs_quantities", [&] {
    const RsQuantities rs = rs_quantities(alpha, xi);
    r.q_rs = rs.q_rs;
    r.q0 = rs.q0;
    r.q_star = rs.q_star;
    r.gamma_star = rs.gamma_star;
    r.u_rs = rs.u_rs;
  });
  attempt("hd_bounds", [&] {
    const HdBounds b = hd_bounds(alpha, xi);
    r.A_xi = b.A;
    r.u_lb = b.u_lb;
    r.u_ub = b.u_ub;
  });
  attempt("ode_curve", [&] {
    r.ode_curve = hd_ode(alpha, xi, 0.0, 0.5 * xi(0.0));
    r.u_hd = r.ode_curve.final_u();
  });
  attempt("u_tp", [&] { r.u_tp = two_phase_final_energy(alpha, xi); });
  return r;
}

}  // namespace nem
