#pragma once

#include "nem/mixture.hpp"
#include "nem/nn.hpp"
#include "nem/theory.hpp"

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace nem {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Algorithm { kGd, kHd, kTwoPhase };
enum class GammaPolicy { kAuto, kExplicit };

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& text);

struct ExperimentConfig {
  MixtureXi xi;
  Algorithm algorithm = Algorithm::kHd;
  std::vector<double> alpha_grid;
  int d = 100;
  int seeds = 1;
  std::uint64_t master_seed = 0;
  // gradient descent
  double eta = 1e-3;
  int gd_iters = 1000;
  // Hessian descent and phase two
  double delta = 0.02;
  // AMP phase
  GammaPolicy gamma_policy = GammaPolicy::kAuto;
  double gamma = 0.0;
  int L = 60;
  // attach threshold and theory_u columns
  bool theory = true;
  std::string output;
  int jobs = 1;

  /// n = round(alpha d) for one grid point; throws ConfigError when it is below 1.
  int n_for(double alpha) const;
  void validate() const;

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Flat "key = value" text behind a "# nem-config v1" header line.
std::string config_to_text(const ExperimentConfig& cfg);
ExperimentConfig config_from_text(const std::string& text);
std::string config_to_json(const ExperimentConfig& cfg);
ExperimentConfig config_from_json(const std::string& text);
/// Reads either format; JSON is recognized by a leading '{'.
ExperimentConfig load_config(const std::string& path);

// ---------------------------------------------------------------------------------------

struct Thresholds {
  double alpha_lb = std::numeric_limits<double>::quiet_NaN();
  double alpha_ub1 = std::numeric_limits<double>::quiet_NaN();
  double alpha_hd = std::numeric_limits<double>::quiet_NaN();
  double alpha_tp = std::numeric_limits<double>::quiet_NaN();
};
/// Each threshold whose hypotheses fail is left NaN.
Thresholds compute_thresholds(const MixtureXi& xi);

/// Predicted final u for the algorithm, NaN when there is no prediction (gd) or it fails.
double theory_u(Algorithm algorithm, double alpha, const MixtureXi& xi);

/// gamma used by the AMP phase at ratio alpha.
double resolve_gamma(const ExperimentConfig& cfg, double alpha);

struct RunOutcome {
  std::size_t alpha_index = 0;
  std::size_t seed_index = 0;
  double alpha = 0.0;
  int n = 0;
  std::uint64_t seed = 0;
  double final_u = std::numeric_limits<double>::quiet_NaN();
  std::string error;  // empty on success
};

struct PhaseDiagramRow {
  double alpha = 0.0;
  int n = 0;
  double mean_final_u = std::numeric_limits<double>::quiet_NaN();
  double sd_final_u = std::numeric_limits<double>::quiet_NaN();
  double theory_u = std::numeric_limits<double>::quiet_NaN();
  double alpha_lb = std::numeric_limits<double>::quiet_NaN();
  double alpha_ub1 = std::numeric_limits<double>::quiet_NaN();
  double alpha_hd = std::numeric_limits<double>::quiet_NaN();
  double alpha_tp = std::numeric_limits<double>::quiet_NaN();
  int runs_ok = 0;
  int runs_failed = 0;
  std::string error;  // first failure message of the row
};

struct SweepResult {
  std::vector<PhaseDiagramRow> rows;
  std::vector<RunOutcome> runs;  // ordered by (alpha index, seed index)
  bool partial_failure() const;
};

/// Seed of run (alpha index, seed index); independent of scheduling.
std::uint64_t run_seed(std::uint64_t master, std::size_t alpha_index, std::size_t seed_index);

/// One (alpha, seed) run: sample the map, run the algorithm, return the final u.
double run_single(const ExperimentConfig& cfg, double alpha, std::uint64_t seed);

SweepResult run_sweep(const ExperimentConfig& cfg);

inline constexpr const char* kPhaseDiagramSchema = "# nem phase-diagram v1";
inline constexpr const char* kRunsSchema = "# nem runs v1";
std::string rows_to_csv(const std::vector<PhaseDiagramRow>& rows);
std::string runs_to_csv(const std::vector<RunOutcome>& runs);
std::string rows_to_json(const std::vector<PhaseDiagramRow>& rows);

/// gnuplot script plotting mean_final_u (with sd bars) and theory_u from `csv_path`, plus one
/// vertical line per finite threshold. style "fig1" draws alpha_lb dashed, alpha_ub solid and
/// alpha_hd red.
std::string emit_plot_script(const std::vector<PhaseDiagramRow>& rows, const std::string& style,
                             const std::string& csv_path = "phase_diagram.csv");

/// Every TheoryReport field plus the sampled u(t) curve.
std::string theory_report_json(const TheoryReport& report);
/// "field,value" rows; curve points appear as u_curve rows with value "t:u".
std::string theory_report_csv(const TheoryReport& report);

// ---------------------------------------------------------------------------------------
// Network sweeps.

struct NNSweepConfig {
  NNConfig base;  // n is overwritten per grid point
  std::vector<double> alpha_grid;
  int seeds = 1;
  std::uint64_t master_seed = 0;
  int degree_cap = 12;
  bool theory = true;
  int jobs = 1;
};

struct NNSweepRow {
  double alpha = 0.0;
  int n = 0;
  double mean_err = std::numeric_limits<double>::quiet_NaN();
  double sd_err = std::numeric_limits<double>::quiet_NaN();
  double theory_u = std::numeric_limits<double>::quiet_NaN();
};

std::vector<NNSweepRow> run_nn_sweep(const NNSweepConfig& cfg);

inline constexpr const char* kNNSchema = "# nem nn-sweep v1";
std::string nn_rows_to_csv(const std::vector<NNSweepRow>& rows);

/// First alpha at which the piecewise-linear curve through (alphas, values) reaches `level`;
/// NaN when it never does.
double crossing_alpha(const std::vector<double>& alphas, const std::vector<double>& values,
                      double level);

}  // namespace nem
