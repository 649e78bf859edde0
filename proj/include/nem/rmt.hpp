#pragma once

#include "nem/mixture.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nem {

class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A = a sqrt(N) W + b Z^T Z with W ~ GOE(N) (diagonal variance 2, off-diagonal 1) and
/// Z an M x N matrix of i.i.d. N(0,1) entries.
struct EnsembleSpec {
  int N = 0;
  int M = 0;
  double a = 0.0;
  double b = 0.0;
  std::uint64_t seed = 0;

  double alpha() const { return static_cast<double>(M) / N; }
  void validate() const;
};

/// Largest N for which the eigensolvers are run at all.
inline constexpr int kRmtMaxN = 3000;
/// At or below this size the smallest eigenvalue comes from the dense solver.
inline constexpr int kDenseEdgeMaxN = 1200;

/// Dense sample of A for one trial.
Eigen::MatrixXd sample_ensemble(const EnsembleSpec& spec, int trial = 0);

enum class EdgeSolver { kAuto, kDense, kLanczos };

double smallest_eigenvalue(const Eigen::MatrixXd& A, EdgeSolver solver = EdgeSolver::kAuto);

struct EdgeStatistics {
  std::vector<double> samples;  // lambda_min / N per trial
  double mean = 0.0;
  double sd = 0.0;
};

EdgeStatistics edge_statistics(std::vector<double> samples);

/// lambda_min(A)/N over `trials` independent draws (trial t uses derive_seed(seed, t)).
EdgeStatistics sample_edge(const EnsembleSpec& spec, int trials,
                           EdgeSolver solver = EdgeSolver::kAuto, int jobs = 1);

/// Empirical CDF of the eigenvalues of A/N (one draw) at each grid point.
std::vector<double> spectral_cdf(const EnsembleSpec& spec, const std::vector<double>& grid);

/// CDF of the limiting law, by quadrature of Im S / pi from the left edge.
std::vector<double> theory_cdf(double alpha, double a, double b, const std::vector<double>& grid);

/// Semicircle CDF of radius 2a (the b = 0 law).
double semicircle_cdf(double x, double a);

double kolmogorov_distance(const std::vector<double>& F, const std::vector<double>& G);

// ---------------------------------------------------------------------------------------
// Hessian of H = |F|^2 / 2 at a point fixed before the map.

struct HessianLawTrial {
  double lambda_min = 0.0;  // smallest eigenvalue of the tangent-space Hessian
  double energy = 0.0;      // H(x)
  double predicted = 0.0;   // d z0(x) with z0 from the measured energy
};

struct HessianLawReport {
  std::vector<HessianLawTrial> trials;
  double q = 0.0;
  int n = 0;
  int d = 0;
  double mean_lambda_over_d = 0.0;
  double sd_lambda_over_d = 0.0;
  double mean_predicted_over_d = 0.0;
  double mean_energy_over_n = 0.0;
  double energy_target = 0.0;    // xi(q)/2
  double energy_band = 0.0;      // 5 sigma half-width of xi(q)|g|^2/(2n) for one trial
  bool lazy = false;             // couplings generated on demand instead of stored
};

/// Tangent-space Hessian U^T Hess H(x) U at x = sqrt(q) e_1 using only the coupling entries
/// with at most two indices off the first coordinate. The entries are the ones a stored map
/// with the same seed holds, so this equals the stored-map computation exactly.
Eigen::MatrixXd tangent_hessian_lazy(const MixtureXi& xi, int n, int d, double q,
                                     std::uint64_t seed, double* energy = nullptr);

/// Same quantity from a fully stored map; requires the couplings to fit in memory.
Eigen::MatrixXd tangent_hessian_stored(const MixtureXi& xi, int n, int d, double q,
                                       std::uint64_t seed, double* energy = nullptr);

/// Samples `trials` maps (seeds derive_seed(seed, t)) and compares lambda_min with d z0(x).
/// The point is fixed to sqrt(q) e_1, which by rotation invariance has the law of any fixed
/// point of norm sqrt(q). Stored couplings are used when they fit, the lazy path otherwise.
HessianLawReport verify_hessian_law(const MixtureXi& xi, int n, int d, double q, int trials,
                                    std::uint64_t seed, int jobs = 1);

}  // namespace nem
