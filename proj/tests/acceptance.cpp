// Acceptance checks. Each criterion prints one PASS/FAIL line per check and returns non-zero
// when any check fails. Informational lines start with "  info".
#include "nem/algorithms.hpp"
#include "nem/coupling_rng.hpp"
#include "nem/harness.hpp"
#include "nem/nn.hpp"
#include "nem/rmt.hpp"
#include "nem/theory.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <string>
#include <vector>

namespace {

using namespace nem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(const std::string& id, bool pass, const char* fmt, ...) __attribute__((format(printf, 3, 4)));
void report(const std::string& id, bool pass, const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  std::printf("%s %s: %s\n", pass ? "PASS" : "FAIL", id.c_str(), buf);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

void info(const char* fmt, ...) __attribute__((format(printf, 1, 2)));
void info(const char* fmt, ...) {
  va_list ap;
  va_start(ap, fmt);
  std::printf("  info ");
  std::vprintf(fmt, ap);
  std::printf("\n");
  std::fflush(stdout);
  va_end(ap);
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int n_of(double alpha, int d) { return static_cast<int>(std::lround(alpha * d)); }

MixtureXi pure(double xi0, int p) { return MixtureXi::pure(xi0, p); }

// ---------------------------------------------------------------------------------------

void c1() {
  struct Triple {
    double a, b, alpha;
  };
  const int N = 1500, trials = 5;
  for (Triple t : {Triple{1, 0, 0.5}, Triple{1, 1, 0.5}, Triple{0.5, 2, 0.25}}) {
    const auto t0 = Clock::now();
    EnsembleSpec spec{N, n_of(t.alpha, N), t.a, t.b, 2024};
    EdgeStatistics st = sample_edge(spec, trials);
    const double z = z_star(t.alpha, t.a, t.b);
    const double tol = z < 0.4 ? 0.02 : 0.05 * z;
    const double err = std::abs(st.mean + z);
    const double secs = seconds_since(t0);
    char id[64];
    std::snprintf(id, sizeof id, "C1 edge (a=%g,b=%g,alpha=%g)", t.a, t.b, t.alpha);
    report(id, err <= tol, "mean lambda_min/N = %.5f (sd %.4f), -z_* = %.5f, |diff| = %.5f <= %.5f",
           st.mean, st.sd, -z, err, tol);
    report(std::string(id) + " runtime", secs <= 120.0, "%.1f s <= 120 s", secs);
  }
}

void c2() {
  const auto t0 = Clock::now();
  const MixtureXi xi({1.0, 0.0, 0.0, 1.0});
  const int d = 400, n = 200;
  HessianLawReport r = verify_hessian_law(xi, n, d, 0.5, 5, 99);
  const double secs = seconds_since(t0);
  const double rel = std::abs(r.mean_lambda_over_d - r.mean_predicted_over_d) /
                     std::abs(r.mean_predicted_over_d);
  info("couplings %s, %zu trials", r.lazy ? "generated on demand" : "stored", r.trials.size());
  report("C2 Hessian edge", rel <= 0.07,
         "mean lambda_min/d = %.4f (sd %.4f), predicted %.4f, relative error %.4f <= 0.07",
         r.mean_lambda_over_d, r.sd_lambda_over_d, r.mean_predicted_over_d, rel);
  bool in_band = true;
  for (const auto& t : r.trials)
    in_band = in_band && std::abs(t.energy / n - r.energy_target) <= r.energy_band;
  report("C2 energy band", in_band, "H/n mean %.4f, target xi(q)/2 = %.4f, per-trial band +-%.4f",
         r.mean_energy_over_n, r.energy_target, r.energy_band);
  report("C2 runtime", secs <= 300.0, "%.1f s <= 300 s", secs);
}

void c3() {
  const MixtureXi xi({1.0, 0.0, 0.0, 0.0, 1.0});
  const double ahd = alpha_hd(xi);
  const int d = 500;
  const double tol = 0.05 * xi(1.0) / 2;
  info("alpha_HD(1+q^4) = %.5f", ahd);
  for (double f : {0.5, 0.9, 1.5}) {
    const double alpha = f * ahd;
    const int n = n_of(alpha, d);
    const double theory = hd_final_energy(alpha, xi);
    char id[64];
    std::snprintf(id, sizeof id, "C3 HD vs ODE (alpha=%.2f alpha_HD)", f);
    try {
      double mean = 0.0;
      for (int s = 0; s < 5; ++s) {
        GaussianMap map = sample_map(xi, n, d, derive_seed(3000, s));
        HessianDescentOptions o;
        o.delta = 1.0 / 50;
        o.seed = derive_seed(3001, s);
        mean += hessian_descent(map, o).final_u / 5;
      }
      bool ok = std::abs(mean - theory) <= tol;
      if (f < 1.0) ok = ok && mean <= 0.02;
      if (f > 1.0) ok = ok && mean >= 0.05;
      report(id, ok, "mean final u %.4f, ODE %.4f, tolerance %.4f", mean, theory, tol);
    } catch (const MemoryBudgetExceeded& e) {
      report(id, false, "d = %d, n = %d: couplings need %.3g bytes, budget %.3g bytes", d, n,
             static_cast<double>(e.required_bytes()), static_cast<double>(e.budget_bytes()));
    }
  }
  // reduced scale, reported but not judged
  const int dr = 30;
  for (double f : {0.5, 0.9, 1.5}) {
    const double alpha = f * ahd;
    double mean = 0.0;
    for (int s = 0; s < 5; ++s) {
      GaussianMap map = sample_map(xi, n_of(alpha, dr), dr, derive_seed(3100, s));
      HessianDescentOptions o;
      o.delta = 1.0 / 50;
      o.seed = derive_seed(3101, s);
      mean += hessian_descent(map, o).final_u / 5;
    }
    info("reduced d = %d, alpha = %.2f alpha_HD: mean final u %.4f, ODE %.4f", dr, f, mean,
         hd_final_energy(alpha, xi));
  }
}

void c4() {
  for (int p : {3, 4}) {
    const MixtureXi xi = pure(1.0, p);
    const double A = hd_bounds(1.0, xi).A;
    const double ahd = alpha_hd(xi);
    const bool ok = ahd >= A / (1 + A) - 1e-3 && ahd <= A + 1e-3;
    char id[64];
    std::snprintf(id, sizeof id, "C4 sandwich p=%d", p);
    report(id, ok, "A/(1+A) = %.5f <= alpha_HD = %.5f <= A = %.5f", A / (1 + A), ahd, A);
  }
}

void amp_checks(const std::string& tag, const MixtureXi& xi, double alpha, int d, int L,
                std::uint64_t seed, bool judge) {
  RsQuantities rs = rs_quantities(alpha, xi);
  const double qbar = std::min(rs.q_star, 1.0);
  GaussianMap map = sample_map(xi, n_of(alpha, d), d, seed);
  AmpResult r = amp_phase(map, rs.gamma_star, L);
  const double q = r.m.squaredNorm();
  const double u = map_eval(map, r.m).energy / map.n();
  AmpStateEvolution se = amp_state_evolution(rs.gamma_star, xi, L);
  double worst = 0.0;
  for (int l = 0; l <= std::min(L, 30); ++l)
    worst = std::max(worst, std::abs(r.trace[l].radius_sq - se.m[l]));
  const double se_tol = 5.0 / std::sqrt(d);
  if (judge) {
    report(tag + " norm", std::abs(q - qbar) <= 0.02, "|m^L|^2 = %.4f, q_* ^ q0 = %.4f", q, qbar);
    report(tag + " energy", std::abs(u - rs.u_rs) <= 0.03 * xi(1.0),
           "|F(m^L)|^2/(2n) = %.4f, u_RS = %.4f, tolerance %.4f", u, rs.u_rs, 0.03 * xi(1.0));
    report(tag + " state evolution", worst <= se_tol, "max deviation %.4f <= %.4f", worst, se_tol);
  } else {
    info("%s: |m^L|^2 %.4f vs %.4f; energy %.4f vs u_RS %.4f; SE deviation %.4f (5/sqrt(d) = %.4f)",
         tag.c_str(), q, qbar, u, rs.u_rs, worst, se_tol);
  }
}

void c5() {
  const MixtureXi xi({1.0, 1.0, 0.0, 1.0});
  const int d = 2000;
  const auto t0 = Clock::now();
  try {
    amp_checks("C5 AMP", xi, 0.3, d, 60, 5000, true);
    const double secs = seconds_since(t0);
    report("C5 runtime", secs <= 600.0, "%.1f s <= 600 s", secs);
  } catch (const MemoryBudgetExceeded& e) {
    report("C5 AMP", false, "d = %d, n = %d: couplings need %.3g bytes, budget %.3g bytes", d,
           n_of(0.3, d), static_cast<double>(e.required_bytes()),
           static_cast<double>(e.budget_bytes()));
  }
  for (std::uint64_t s = 0; s < 3; ++s) {
    const std::string tag = "reduced d = 120 seed " + std::to_string(s);
    try {
      amp_checks(tag, xi, 0.3, 120, 60, 5100 + s, false);
    } catch (const AmpDiverged& e) {
      info("%s: %s", tag.c_str(), e.what());
    }
  }
}

void c6() {
  const MixtureXi xi({1.0, 1.0});
  const int d = 1500;
  for (double alpha : {0.3, 0.45, 0.6}) {
    RsQuantities rs = rs_quantities(alpha, xi);
    double worst = 0.0, mean = 0.0;
    for (int s = 0; s < 3; ++s) {
      GaussianMap map = sample_map(xi, n_of(alpha, d), d, derive_seed(6000, s));
      TwoPhaseOptions o;
      o.gamma = rs.gamma_star;
      o.L = 60;
      o.seed = derive_seed(6001, s);
      const double u = two_phase(map, o).final_u;
      worst = std::max(worst, u);
      mean += u / 3;
    }
    char id[64];
    std::snprintf(id, sizeof id, "C6 linear two-phase alpha=%g", alpha);
    if (alpha < 0.5)
      report(id, worst <= 0.02, "largest final u over 3 seeds %.5f <= 0.02", worst);
    else
      report(id, mean >= 0.05, "mean final u %.5f >= 0.05 (theory %.5f)", mean,
             two_phase_final_energy(alpha, xi));
  }
  const double tp = alpha_tp(xi);
  report("C6 alpha_TP", std::abs(tp - 0.5) <= 0.01, "alpha_TP(1+q) = %.5f, target 0.5 +- 0.01", tp);
}

void c7() {
  std::vector<double> v;
  for (int p : {50, 100, 200}) {
    v.push_back(2.0 * alpha_lb(pure(2.0 * std::log(p), p)));
    info("p = %d: 2 alpha_LB = %.5f", p, v.back());
  }
  report("C7 alpha_LB monotone", v[0] > v[1] && v[1] > v[2] && v[0] > 1.0,
         "%.5f > %.5f > %.5f toward 1", v[0], v[1], v[2]);
  report("C7 alpha_LB at p=200", std::abs(v[2] - 1.0) <= 0.25, "|%.5f - 1| <= 0.25", v[2]);
  bool zero = true;
  double worst = 0.0;
  const double h = 1e-3;
  for (int p : {3, 5, 50})
    for (double alpha : {0.3, 1.0, 2.0}) {
      MixtureXi xi = pure(2.0 * std::log(p), p);
      zero = zero && psi(0.0, alpha, xi) == 0.0;
      const double second = (psi(h, alpha, xi) - 2 * psi(0.0, alpha, xi) + psi(-h, alpha, xi)) / (h * h);
      worst = std::max(worst, std::abs(second + 1.0));
    }
  report("C7 Psi(0) = 0", zero, "exact on 9 (p, alpha) pairs");
  report("C7 Psi''(0) = -1", worst <= 1e-3, "largest |Psi''(0) + 1| = %.2e <= 1e-3", worst);
}

void c8() {
  const double ub = alpha_ub1(MixtureXi({1.0, 0.0, 1.0}));
  report("C8 alpha_UB1(1+t^2)", std::abs(ub - 2.0) <= 0.02, "%.6f, target 2 +- 1%%", ub);
  const MixtureXi xi = pure(1.0, 3);
  const double ub2 = alpha_ub2(1.0, 3), lb = alpha_lb(xi);
  info("xi = 1 + t^3: alpha_LB %.5f, alpha_UB2 %.5f, alpha_UB1 %.5f", lb, ub2, alpha_ub1(xi));
  report("C8 alpha_UB2", std::isfinite(ub2) && ub2 >= lb, "alpha_UB2 = %.5f finite and >= alpha_LB = %.5f",
         ub2, lb);
  const double ep = e_star_pure(3);
  ParisiResult pr = e_star_parisi(MixtureXi({0.0, 0.0, 0.0, 1.0}), 400);
  const double rel = std::abs(ep - pr.value) / ep;
  report("C8 E_*(t^3)", rel <= 0.01 && pr.converged, "complexity root %.6f, Parisi %.6f, relative %.2e",
         ep, pr.value, rel);
}

void c9() {
  const auto t0 = Clock::now();
  Rng rng(9);
  double worst_j = 0, worst_jt = 0, worst_g = 0, worst_h = 0;
  const double h = 1e-5;
  auto rel = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).norm() / std::max(b.norm(), 1e-12);
  };
  for (int inst = 0; inst < 20; ++inst) {
    const int d = 5 + static_cast<int>(rng.uniform() * 36);  // 5..40
    const int n = 2 + static_cast<int>(rng.uniform() * 20);
    const int deg = 1 + inst % 4;
    std::vector<double> c(deg + 1);
    for (double& v : c) v = rng.uniform() < 0.25 ? 0.0 : rng.uniform();
    c[deg] = 0.5 + rng.uniform();
    GaussianMap map = sample_map(MixtureXi(c), n, d, derive_seed(900, inst));
    Eigen::VectorXd x(d), v(d), u(n);
    for (int i = 0; i < d; ++i) x(i) = rng.normal();
    for (int i = 0; i < d; ++i) v(i) = rng.normal();
    for (int i = 0; i < n; ++i) u(i) = rng.normal();
    x *= (0.2 + 0.7 * rng.uniform()) / x.norm();
    v /= v.norm();
    const MapValue fp = map_eval(map, x + h * v), fm = map_eval(map, x - h * v);
    worst_j = std::max(worst_j, rel((fp.F - fm.F) / (2 * h), jacobian_apply(map, x, v, false)));
    const double fd_jt = (u.dot(fp.F) - u.dot(fm.F)) / (2 * h);
    const double jt = jacobian_apply(map, x, u, true).dot(v);
    worst_jt = std::max(worst_jt, std::abs(fd_jt - jt) / std::max(std::abs(jt), 1e-12));
    const double fd_g = (fp.energy - fm.energy) / (2 * h);
    const double g = grad_energy(map, x).dot(v);
    worst_g = std::max(worst_g, std::abs(fd_g - g) / std::max(std::abs(g), 1e-12));
    worst_h = std::max(worst_h, rel((grad_energy(map, x + h * v) - grad_energy(map, x - h * v)) / (2 * h),
                                    hessian_energy_apply(map, x, v)));
  }
  const double secs = seconds_since(t0);
  report("C9 Jacobian action", worst_j <= 1e-5, "largest relative error %.2e over 20 instances", worst_j);
  report("C9 Jacobian transpose action", worst_jt <= 1e-5, "largest relative error %.2e", worst_jt);
  report("C9 gradient", worst_g <= 1e-5, "largest relative error %.2e", worst_g);
  report("C9 Hessian action", worst_h <= 1e-5, "largest relative error %.2e", worst_h);
  report("C9 runtime", secs <= 60.0, "%.1f s <= 60 s", secs);
}

void c10() {
  NNSweepConfig cfg;
  cfg.base.m = 20;
  cfg.base.D = 20;
  cfg.base.a = 1.0;
  cfg.alpha_grid = {0.025, 0.05, 0.075, 0.1, 0.15, 0.2, 0.3, 0.4, 0.5};
  cfg.seeds = 3;
  cfg.master_seed = 10;
  cfg.theory = true;
  std::vector<NNSweepRow> rows = run_nn_sweep(cfg);
  std::vector<double> alphas, errs;
  bool monotone = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    info("alpha %.3f: mean error %.3e (sd %.1e), theory %.4f", rows[i].alpha, rows[i].mean_err,
         rows[i].sd_err, rows[i].theory_u);
    alphas.push_back(rows[i].alpha);
    errs.push_back(rows[i].mean_err);
    if (i > 0) monotone = monotone && rows[i].mean_err >= rows[i - 1].mean_err;
  }
  report("C10 trend", monotone, "mean final training error non-decreasing over %zu grid points",
         rows.size());
  const double tp = alpha_tp(xi_from_network(1.0, 12));
  // knee: the ratio at which the mean error first reaches 1% of its initial value 1/2
  const double knee = crossing_alpha(alphas, errs, 0.005);
  report("C10 knee", std::isfinite(knee) && knee >= tp / 2 && knee <= 2 * tp,
         "knee %.4f within [%.4f, %.4f] around alpha_TP = %.4f", knee, tp / 2, 2 * tp, tp);
}

void c11() {
  ExperimentConfig cfg;
  cfg.xi = MixtureXi({1.0, 0.5, 1.0});
  cfg.algorithm = Algorithm::kTwoPhase;
  cfg.alpha_grid = {0.2, 0.4, 0.6};
  cfg.d = 40;
  cfg.seeds = 3;
  cfg.master_seed = 11;
  cfg.L = 20;
  std::string first;
  bool same = true;
  for (int jobs : {1, 2, 4, 1}) {
    cfg.jobs = jobs;
    SweepResult r = run_sweep(cfg);
    const std::string csv = rows_to_csv(r.rows) + runs_to_csv(r.runs);
    if (first.empty())
      first = csv;
    else
      same = same && csv == first;
  }
  report("C11 phase-diagram determinism", same, "byte-identical CSV at 1, 2, 4 and again 1 workers");
  NNSweepConfig nn;
  nn.base.epochs = 50;
  nn.alpha_grid = {0.05, 0.2};
  nn.seeds = 2;
  nn.master_seed = 11;
  nn.theory = false;
  nn.jobs = 1;
  const std::string a = nn_rows_to_csv(run_nn_sweep(nn));
  nn.jobs = 3;
  report("C11 nn determinism", a == nn_rows_to_csv(run_nn_sweep(nn)), "byte-identical CSV at 1 and 3 workers");
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<void()>> criteria = {
      {"1", c1}, {"2", c2}, {"3", c3}, {"4", c4},   {"5", c5},   {"6", c6},
      {"7", c7}, {"8", c8}, {"9", c9}, {"10", c10}, {"11", c11}};
  std::vector<std::string> which;
  for (int i = 1; i < argc; ++i) which.push_back(argv[i]);
  if (which.empty())
    for (int i = 1; i <= 11; ++i) which.push_back(std::to_string(i));
  for (const std::string& w : which) {
    auto it = criteria.find(w);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion '%s'\n", w.c_str());
      return 2;
    }
    try {
      it->second();
    } catch (const std::exception& e) {
      report("C" + w, false, "error: %s", e.what());
    }
  }
  return g_failures == 0 ? 0 : 1;
}
