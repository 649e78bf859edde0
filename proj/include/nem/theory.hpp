#pragma once

#include "nem/mixture.hpp"

#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace nem {

/// Raised when a formula is evaluated outside the hypotheses it was derived under.
class HypothesisViolation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class UnsupportedModel : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------------------
// Existence thresholds.

/// Second-moment exponent Psi(r; alpha, xi). Requires xi'(0) = xi''(0) = 0 and xi(0) > 0.
/// Accepts r in (-1, 1) so that the curvature at r = 0 can be probed from both sides.
double psi(double r, double alpha, const MixtureXi& xi);

/// inf{alpha : sup_r Psi(r; alpha, xi) > 0} by bisection on [0, 20]; +inf when the bracket
/// is exhausted.
double alpha_lb(const MixtureXi& xi, int grid_n = 4000);

/// Complexity of local maxima of the pure p-spin process at level E.
double theta_p(double E, int p);
/// Unique root of theta_p on (2 sqrt((p-1)/p), inf); 2 for p = 2.
double e_star_pure(int p);

struct ParisiResult {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
  /// Gamma on the uniform grid t_j = j / grid_n, j = 0..grid_n.
  std::vector<double> gamma;
};

/// Ground-state energy E_*(xi) = inf P(Gamma) over Gamma concave non-increasing with
/// Gamma(1) >= 0, where P = (1/2)[xi'(0) Gamma(0) + int_0^1 (xi'' Gamma + 1/Gamma)].
ParisiResult e_star_parisi(const MixtureXi& xi, int grid_n = 200);

/// E_*(xi_{>0})^2 / xi(0).
double alpha_ub1(const MixtureXi& xi);
/// (xi(0)/xi(1)) (1 - sqrt(alpha_ub1 / alpha))_+^2.
double eps0(double alpha, const MixtureXi& xi, double alpha_ub1_value);

double phi1(double c, int p, double xi0);
double phi2(double c, double alpha, double xi1_total);
/// Pure models xi = xi0 + q^p only.
double alpha_ub2(double xi0, int p);
/// Dispatches on the mixture; throws UnsupportedModel unless xi is xi0 + q^p.
double alpha_ub2(const MixtureXi& xi);

/// c0 xi'(1)^2 / (xi''(1) xi(1) max(log(xi'''(1)/xi''(1)), 1)).
double alpha_gd_threshold(const MixtureXi& xi, double c0 = 1.0);

// ---------------------------------------------------------------------------------------
// Spectral edge of a sqrt(N) W + b Z^T Z (in units of N).

double q_of_m(double m, double alpha, double a, double b);
/// -sup_{m>0} Q(m; alpha, a, b).
double z_star(double alpha, double a, double b);
/// Root of Q(S) = z continued from S ~ -1/z at large Im z.
std::complex<double> stieltjes(std::complex<double> z, double alpha, double a, double b);
/// Limiting spectral density of A/N at x, from Im S(x + i eta) / pi.
double spectral_density(double x, double alpha, double a, double b, double eta = 1e-7);

// ---------------------------------------------------------------------------------------
// Hessian descent.

struct OdeCurve {
  std::vector<double> t;
  std::vector<double> u;
  double final_u() const { return u.back(); }
};

/// du/dt = -z_*(alpha; sqrt(2 alpha u xi''(q+t)), xi'(q+t)) / (2 alpha) on [0, 1 - q] by RK4.
OdeCurve hd_ode(double alpha, const MixtureXi& xi, double q_start, double u0,
                double step_h = 1e-3);

/// u(1; alpha, xi) from u(0) = xi(0)/2.
double hd_final_energy(double alpha, const MixtureXi& xi, double step_h = 1e-3);

/// sup{alpha : u(1; alpha, xi) <= u_tol}; 0 when xi'' vanishes identically.
double alpha_hd(const MixtureXi& xi, double u_tol = 1e-6, double step_h = 1e-3);

struct HdBounds {
  double u_lb = 0.0;
  double u_ub = 0.0;
  double A = 0.0;
};
HdBounds hd_bounds(double alpha, const MixtureXi& xi);

// ---------------------------------------------------------------------------------------
// Two-phase quantities.

struct RsQuantities {
  double q_rs = kInfinity;
  double q0 = kInfinity;
  double q_star = kInfinity;  // q_rs ^ q0
  double gamma_star = 0.0;    // at q_bar = min(q_star, 1)
  double u_rs = 0.0;          // at q_bar
};

double v_rs(double q, const MixtureXi& xi);
double q_rs(const MixtureXi& xi);
double q0_of_alpha(double alpha, const MixtureXi& xi);
double gamma_star(double q, const MixtureXi& xi);
double u_rs(double q, double alpha, const MixtureXi& xi);
/// Requires xi(0) > 0 and xi'(0) > 0.
RsQuantities rs_quantities(double alpha, const MixtureXi& xi);

struct TwoPhaseOptionsTheory {
  /// Use the phase-one value (1/2)(sqrt(xi(1)) - sqrt(2 xi'(1)/alpha))_+^2 when q_* >= 1.
  bool literal_qstar_remark = false;
  double step_h = 1e-3;
};

/// Predicted final energy of the two-phase algorithm at ratio alpha.
double two_phase_final_energy(double alpha, const MixtureXi& xi,
                              const TwoPhaseOptionsTheory& options = {});

/// sup{alpha : two-phase final energy <= u_tol}. For xi'(0) = 0 the AMP phase stays at the
/// origin and the threshold coincides with alpha_hd.
double alpha_tp(const MixtureXi& xi, double u_tol = 1e-6,
                const TwoPhaseOptionsTheory& options = {});

/// q_{l+1} = gamma^2 xi(q_l) xi'(q_l), q_0 = 0.
std::vector<double> state_evolution(double gamma, const MixtureXi& xi, int L);

/// Diagonal of the two-index recursion followed by the AMP iteration as indexed here:
/// M_{l+1} = gamma^2 xi'(M_l) H_l, H_{l+1} = xi(M_l), M_0 = H_0 = 0. M_l predicts |m^l|^2
/// and H_l predicts |h^l|^2.
struct AmpStateEvolution {
  std::vector<double> m;
  std::vector<double> h;
};
AmpStateEvolution amp_state_evolution(double gamma, const MixtureXi& xi, int L);

// ---------------------------------------------------------------------------------------

struct TheoryReport {
  MixtureXi xi;
  double alpha = 0.0;
  double c0 = 1.0;
  double alpha_lb = std::numeric_limits<double>::quiet_NaN();
  double alpha_ub1 = std::numeric_limits<double>::quiet_NaN();
  double eps0 = std::numeric_limits<double>::quiet_NaN();
  double alpha_ub2 = std::numeric_limits<double>::quiet_NaN();
  double alpha_gd = std::numeric_limits<double>::quiet_NaN();
  double alpha_hd = std::numeric_limits<double>::quiet_NaN();
  double alpha_tp = std::numeric_limits<double>::quiet_NaN();
  double e_star = std::numeric_limits<double>::quiet_NaN();
  double q_rs = std::numeric_limits<double>::quiet_NaN();
  double q0 = std::numeric_limits<double>::quiet_NaN();
  double q_star = std::numeric_limits<double>::quiet_NaN();
  double gamma_star = std::numeric_limits<double>::quiet_NaN();
  double u_rs = std::numeric_limits<double>::quiet_NaN();
  double A_xi = std::numeric_limits<double>::quiet_NaN();
  double u_lb = std::numeric_limits<double>::quiet_NaN();
  double u_ub = std::numeric_limits<double>::quiet_NaN();
  double u_hd = std::numeric_limits<double>::quiet_NaN();
  double u_tp = std::numeric_limits<double>::quiet_NaN();
  OdeCurve ode_curve;
  /// Fields that could not be computed, with the reason.
  std::vector<std::pair<std::string, std::string>> skipped;
};

/// Every prediction for (xi, alpha); fields whose hypotheses fail are left NaN and listed in
/// `skipped`.
TheoryReport theory_report(const MixtureXi& xi, double alpha, double c0 = 1.0);

}  // namespace nem
