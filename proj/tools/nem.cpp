// nem: command-line front end for theory, simulation, phase diagrams, RMT checks and the
// network experiment.
#include "nem/algorithms.hpp"
#include "nem/coupling_rng.hpp"
#include "nem/gaussian_map.hpp"
#include "nem/harness.hpp"
#include "nem/nn.hpp"
#include "nem/rmt.hpp"
#include "nem/snapshot.hpp"
#include "nem/theory.hpp"
#include "nem/trace.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct Globals {
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out;
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw nem::ConfigError("cannot write " + path);
  f << text;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

nem::MixtureXi parse_xi_flag(const std::string& text) {
  try {
    return nem::parse_mixture(text);
  } catch (const std::invalid_argument& e) {
    throw nem::ConfigError(std::string("--xi: ") + e.what());
  }
}

std::vector<double> parse_grid_flag(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
    } catch (const std::exception&) {
      throw nem::ConfigError("bad grid value '" + item + "'");
    }
  }
  return out;
}

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  return nem::format_double(v);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"nem: nonlinear random equations on the sphere"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--jobs", g.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output path (stdout when absent)");

  // theory
  auto* theory = app.add_subcommand("theory", "Thresholds and predicted energies for a mixture");
  std::string th_xi, th_report = "json";
  double th_alpha = 0.5, th_c0 = 1.0;
  theory->add_option("--xi", th_xi, "Mixture coefficients, e.g. 1,0,0,1")->required();
  theory->add_option("--alpha", th_alpha, "Ratio n/d")->required();
  theory->add_option("--c0", th_c0, "Constant of the gradient-descent threshold");
  theory->add_option("--report", th_report, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Sample one map and run one algorithm");
  std::string sim_xi, sim_alg = "hd", sim_snapshot;
  double sim_alpha = 0.5, sim_delta = 0.02, sim_eta = 1e-3;
  int sim_d = 100, sim_L = 60, sim_iters = 1000;
  std::optional<double> sim_gamma;
  simulate->add_option("--xi", sim_xi, "Mixture coefficients")->required();
  simulate->add_option("--alg", sim_alg, "gd, hd or two-phase")->check(CLI::IsMember({"gd", "hd", "two-phase"}));
  simulate->add_option("--alpha", sim_alpha, "Ratio n/d");
  simulate->add_option("--d", sim_d, "Dimension");
  simulate->add_option("--delta", sim_delta, "Hessian descent step");
  simulate->add_option("--eta", sim_eta, "Gradient descent step");
  simulate->add_option("--iters", sim_iters, "Gradient descent iterations");
  simulate->add_option("--gamma", sim_gamma, "AMP gamma (gamma_* when absent)");
  simulate->add_option("--L", sim_L, "AMP iterations");
  simulate->add_option("--snapshot", sim_snapshot, "Write the map header to this path");

  // phase-diagram
  auto* phase = app.add_subcommand("phase-diagram", "Seeded sweep over alpha with theory columns");
  std::string pd_config, pd_xi, pd_alg = "hd", pd_grid, pd_style = "fig1";
  int pd_d = 100, pd_seeds = 1;
  double pd_delta = 0.02;
  bool pd_no_theory = false;
  phase->add_option("--config", pd_config, "Config file (key-value text or JSON)");
  phase->add_option("--xi", pd_xi, "Mixture coefficients");
  phase->add_option("--alg", pd_alg, "gd, hd or two-phase")->check(CLI::IsMember({"gd", "hd", "two-phase"}));
  phase->add_option("--alpha-grid", pd_grid, "Comma-separated alpha values");
  phase->add_option("--d", pd_d, "Dimension");
  phase->add_option("--seeds", pd_seeds, "Runs per alpha");
  phase->add_option("--delta", pd_delta, "Hessian descent step");
  phase->add_option("--style", pd_style, "Plot style");
  phase->add_flag("--no-theory", pd_no_theory, "Skip theory columns");

  // rmt-check
  auto* rmt = app.add_subcommand("rmt-check", "Spectral edge of a sqrt(N) W + b Z^T Z against z_*");
  double rm_a = 1.0, rm_b = 0.0, rm_alpha = 0.5;
  int rm_N = 1000, rm_trials = 5;
  rmt->add_option("--a", rm_a, "Wigner weight")->check(CLI::NonNegativeNumber);
  rmt->add_option("--b", rm_b, "Wishart weight")->check(CLI::NonNegativeNumber);
  rmt->add_option("--alpha", rm_alpha, "M/N")->check(CLI::Range(0.0, 1.0));
  rmt->add_option("--N", rm_N, "Matrix size")->check(CLI::PositiveNumber);
  rmt->add_option("--trials", rm_trials, "Independent draws")->check(CLI::PositiveNumber);

  // nn
  auto* nn = app.add_subcommand("nn", "Two-layer ELU interpolation of random labels");
  int nn_m = 20, nn_D = 20, nn_epochs = 2000, nn_seeds = 3;
  double nn_a = 1.0, nn_lr = 0.1;
  std::string nn_grid = "0.1,0.2,0.3,0.4,0.5";
  bool nn_no_theory = false;
  nn->add_option("--m", nn_m, "Hidden units (even)");
  nn->add_option("--D", nn_D, "Input dimension");
  nn->add_option("--a", nn_a, "Output scale");
  nn->add_option("--alpha-grid", nn_grid, "Comma-separated n/(mD) values");
  nn->add_option("--lr", nn_lr, "Base learning rate");
  nn->add_option("--epochs", nn_epochs, "Epochs");
  nn->add_option("--seeds", nn_seeds, "Runs per alpha");
  nn->add_flag("--no-theory", nn_no_theory, "Skip the covariance-matched prediction");

  for (auto* sub : {theory, simulate, phase, rmt, nn}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*theory) {
      const nem::TheoryReport rep = nem::theory_report(parse_xi_flag(th_xi), th_alpha, th_c0);
      emit(g.out, th_report == "csv" ? nem::theory_report_csv(rep) : nem::theory_report_json(rep));
      return kExitOk;
    }

    if (*simulate) {
      nem::ExperimentConfig cfg;
      cfg.xi = parse_xi_flag(sim_xi);
      cfg.algorithm = nem::parse_algorithm(sim_alg);
      cfg.d = sim_d;
      cfg.alpha_grid = {sim_alpha};
      cfg.delta = sim_delta;
      cfg.eta = sim_eta;
      cfg.gd_iters = sim_iters;
      cfg.L = sim_L;
      if (sim_gamma) {
        cfg.gamma_policy = nem::GammaPolicy::kExplicit;
        cfg.gamma = *sim_gamma;
      }
      cfg.validate();
      const int n = cfg.n_for(sim_alpha);
      const nem::GaussianMap map = nem::sample_map(cfg.xi, n, cfg.d, nem::derive_seed(g.seed, 0));
      if (!sim_snapshot.empty()) nem::save_snapshot(sim_snapshot, nem::snapshot_of(map));
      const std::uint64_t algo_seed = nem::derive_seed(g.seed, 1);
      nem::SolverResult res;
      double gamma_used = std::nan("");
      if (cfg.algorithm == nem::Algorithm::kGd) {
        nem::GradientDescentOptions o;
        o.eta = cfg.eta;
        o.max_iters = cfg.gd_iters;
        o.seed = algo_seed;
        res = nem::gradient_descent(map, o);
      } else if (cfg.algorithm == nem::Algorithm::kHd) {
        nem::HessianDescentOptions o;
        o.delta = cfg.delta;
        o.seed = algo_seed;
        res = nem::hessian_descent(map, o);
      } else {
        nem::TwoPhaseOptions o;
        o.delta = cfg.delta;
        o.gamma = gamma_used = nem::resolve_gamma(cfg, sim_alpha);
        o.L = cfg.L;
        o.seed = algo_seed;
        res = nem::two_phase(map, o);
      }
      if (!g.out.empty()) emit(g.out, ends_with(g.out, ".json") ? res.trace.to_json() : res.trace.to_csv());
      nlohmann::json summary = {{"algorithm", sim_alg}, {"n", n},           {"d", cfg.d},
                                {"alpha", sim_alpha},  {"seed", g.seed},    {"final_u", num(res.final_u)},
                                {"steps", res.trace.size()}, {"gamma", num(gamma_used)},
                                {"theory_u", num(nem::theory_u(cfg.algorithm, sim_alpha, cfg.xi))}};
      std::cout << summary.dump(2) << "\n";
      return kExitOk;
    }

    if (*phase) {
      nem::ExperimentConfig cfg;
      if (!pd_config.empty()) {
        cfg = nem::load_config(pd_config);
      } else {
        if (pd_xi.empty()) throw nem::ConfigError("phase-diagram: --xi or --config is required");
        cfg.xi = parse_xi_flag(pd_xi);
        cfg.algorithm = nem::parse_algorithm(pd_alg);
        cfg.alpha_grid = parse_grid_flag(pd_grid);
        cfg.d = pd_d;
        cfg.seeds = pd_seeds;
        cfg.delta = pd_delta;
        cfg.theory = !pd_no_theory;
      }
      if (app.count("--seed")) cfg.master_seed = g.seed;
      if (app.count("--jobs")) cfg.jobs = g.jobs;
      if (!g.out.empty()) cfg.output = g.out;
      cfg.validate();
      const nem::SweepResult res = nem::run_sweep(cfg);
      const std::string csv = nem::rows_to_csv(res.rows);
      emit(cfg.output, csv);
      if (!cfg.output.empty() && cfg.output != "-") {
        emit(cfg.output + ".json", nem::rows_to_json(res.rows));
        emit(cfg.output + ".runs.csv", nem::runs_to_csv(res.runs));
        emit(cfg.output + ".gp", nem::emit_plot_script(res.rows, pd_style, cfg.output));
      }
      if (res.partial_failure()) {
        for (const auto& r : res.runs)
          if (!r.error.empty())
            std::cerr << "run alpha=" << nem::format_double(r.alpha) << " seed_index=" << r.seed_index
                      << " failed: " << r.error << "\n";
        return kExitPartial;
      }
      return kExitOk;
    }

    if (*rmt) {
      nem::EnsembleSpec spec;
      spec.N = rm_N;
      spec.M = static_cast<int>(std::lround(rm_alpha * rm_N));
      spec.a = rm_a;
      spec.b = rm_b;
      spec.seed = g.seed;
      try {
        spec.validate();
      } catch (const std::invalid_argument& e) {
        throw nem::ConfigError(e.what());
      }
      const nem::EdgeStatistics st = nem::sample_edge(spec, rm_trials, nem::EdgeSolver::kAuto, g.jobs);
      const double z = nem::z_star(spec.alpha(), rm_a, rm_b);
      const double tol = z < 0.4 ? 0.02 : 0.05 * z;
      const bool pass = std::abs(st.mean + z) <= tol;
      nlohmann::json j = {{"measured", num(st.mean)}, {"predicted", num(-z)}, {"sd", num(st.sd)},
                          {"tolerance", num(tol)},    {"pass", pass},       {"N", spec.N},
                          {"M", spec.M},              {"a", rm_a},          {"b", rm_b},
                          {"trials", rm_trials}};
      emit(g.out, j.dump(2) + "\n");
      return kExitOk;
    }

    if (*nn) {
      nem::NNSweepConfig cfg;
      cfg.base.m = nn_m;
      cfg.base.D = nn_D;
      cfg.base.a = nn_a;
      cfg.base.lr = nn_lr;
      cfg.base.epochs = nn_epochs;
      cfg.alpha_grid = parse_grid_flag(nn_grid);
      cfg.seeds = nn_seeds;
      cfg.master_seed = g.seed;
      cfg.jobs = g.jobs;
      cfg.theory = !nn_no_theory;
      try {
        cfg.base.validate();
      } catch (const std::invalid_argument& e) {
        throw nem::ConfigError(e.what());
      }
      emit(g.out, nem::nn_rows_to_csv(nem::run_nn_sweep(cfg)));
      return kExitOk;
    }
  } catch (const nem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
