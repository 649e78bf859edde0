#pragma once

#include "nem/gaussian_map.hpp"
#include "nem/subspace.hpp"
#include "nem/trace.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

namespace nem {

struct SolverResult {
  Eigen::VectorXd x;  // unit vector
  RunTrace trace;
  double final_u = 0.0;
};

/// Uniform point on the unit sphere.
Eigen::VectorXd random_unit_vector(Eigen::Index d, std::uint64_t seed);

// ---------------------------------------------------------------------------------------
// Projected gradient descent on the sphere.

struct GradientDescentOptions {
  double eta = 1e-3;
  int max_iters = 1000;
  std::uint64_t seed = 0;
  /// Stop once H = u n falls to this value.
  double stop_energy = 0.0;
  /// Optional start point; drawn uniformly on the sphere otherwise.
  std::optional<Eigen::VectorXd> start;
};

SolverResult gradient_descent(const GaussianMap& map, const GradientDescentOptions& options);

// ---------------------------------------------------------------------------------------
// Hessian descent.

struct EigenDirection {
  Eigen::VectorXd v;
  double rayleigh = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Near-minimal eigenvector of Hess H(x) restricted to `subspace`, certified to tol_abs by
/// the Lanczos residual.
EigenDirection min_eig_direction(const GaussianMap& map, const Eigen::VectorXd& x,
                                 const ConstraintSubspace& subspace, double tol_abs,
                                 int max_lanczos, std::uint64_t seed);
EigenDirection min_eig_direction(const LocalModel& model, const ConstraintSubspace& subspace,
                                 double tol_abs, int max_lanczos, std::uint64_t seed);

struct HessianDescentOptions {
  double delta = 0.02;
  std::uint64_t seed = 0;
  /// Extra directions every step must stay orthogonal to (m^L in phase two).
  std::vector<Eigen::VectorXd> subspace_extras;
  /// Entry point; the walk starts at sqrt(delta) * Unif(S^{d-1}) when absent.
  std::optional<Eigen::VectorXd> start;
  /// Lanczos iteration cap; 40 log(1/delta) when <= 0.
  int max_lanczos = 0;
  /// Eigenvector tolerance is tol_factor * d * delta.
  double tol_factor = 1.0;
};

/// Walks K = floor((1 - |start|^2) / delta) steps of length sqrt(delta) along the signed
/// near-minimal eigenvector, then normalizes onto the sphere. Trace time t is the squared
/// radius gained since the start.
SolverResult hessian_descent(const GaussianMap& map, const HessianDescentOptions& options);

// ---------------------------------------------------------------------------------------
// Approximate message passing and the two-phase solver.

class AmpDiverged : public std::runtime_error {
 public:
  AmpDiverged(int ell, const std::string& what) : std::runtime_error(what), ell_(ell) {}
  int iteration() const { return ell_; }

 private:
  int ell_;
};

struct AmpResult {
  Eigen::VectorXd m;  // m^L
  Eigen::VectorXd h;  // h^L
  RunTrace trace;
};

/// Coefficient of the gamma^2 m^{l-1} memory term.
///
/// kCurvature uses D_l = xi''(<m^l, m^{l-1}>) <h^l, h^{l-1}>, the term that Gaussian
/// integration by parts produces for the dependence of DF(m^l) on m^l. kLiteral uses
/// xi' in place of xi''; it does not track state evolution (it diverges even for linear xi,
/// where DF is constant and the term must vanish) and is kept only for comparison.
enum class OnsagerVariant { kCurvature, kLiteral };

/// L iterations of
///   h^{l+1} = F(m^l)/sqrt(n) - gamma B_l h^{l-1}
///   m^{l+1} = (gamma/sqrt(d)) DF(m^l)^T h^l - gamma C_l m^{l-1} - gamma^2 D_l m^{l-1}
/// from m^0 = m^{-1} = h^0 = 0. m is kept unnormalized, |m|^2 of order one.
AmpResult amp_phase(const GaussianMap& map, double gamma, int L,
                    OnsagerVariant variant = OnsagerVariant::kCurvature);

struct TwoPhaseOptions {
  double delta = 0.02;
  double gamma = 0.0;
  int L = 60;
  std::uint64_t seed = 0;
  int max_lanczos = 0;
  OnsagerVariant onsager = OnsagerVariant::kCurvature;
};

struct TwoPhaseResult : SolverResult {
  Eigen::VectorXd m_amp;
  double amp_u = 0.0;  // |F(m^L)|^2 / (2n)
  bool phase_two_skipped = false;
};

/// AMP to m^L, then Hessian descent from m^L inside {v : <v, m^L> = 0}.
TwoPhaseResult two_phase(const GaussianMap& map, const TwoPhaseOptions& options);

}  // namespace nem
