#include "nem/harness.hpp"
#include "nem/snapshot.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

namespace nem {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.xi = MixtureXi({1.0, 0.0, 1.0});
  c.algorithm = Algorithm::kHd;
  c.alpha_grid = {0.2, 0.4};
  c.d = 20;
  c.seeds = 3;
  c.master_seed = 77;
  c.delta = 0.05;
  return c;
}

TEST(Config, TextRoundTrip) {
  ExperimentConfig c = small_config();
  c.algorithm = Algorithm::kTwoPhase;
  c.gamma_policy = GammaPolicy::kExplicit;
  c.gamma = -0.123456789012345;
  c.eta = 1.0 / 3.0;
  c.output = "out/run.csv";
  c.theory = false;
  c.jobs = 3;
  const std::string text = config_to_text(c);
  EXPECT_EQ(text.substr(0, text.find('\n')), "# nem-config v1");
  EXPECT_EQ(config_from_text(text), c);
  EXPECT_EQ(config_to_text(config_from_text(text)), text);
}

TEST(Config, JsonRoundTrip) {
  ExperimentConfig c = small_config();
  c.alpha_grid = {0.1, 1.0 / 7.0};
  EXPECT_EQ(config_from_json(config_to_json(c)), c);
}

TEST(Config, LoadsEitherFormat) {
  ExperimentConfig c = small_config();
  const std::string a = testing::TempDir() + "cfg.txt", b = testing::TempDir() + "cfg.json";
  std::ofstream(a) << config_to_text(c);
  std::ofstream(b) << config_to_json(c);
  EXPECT_EQ(load_config(a), c);
  EXPECT_EQ(load_config(b), c);
  EXPECT_THROW(load_config(testing::TempDir() + "missing.cfg"), ConfigError);
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(config_from_text("xi = 1,1\n"), ConfigError);
  EXPECT_THROW(config_from_text("# nem-config v1\nalgorithm = hd\n"), ConfigError);
  EXPECT_THROW(config_from_text("# nem-config v1\nxi = 1,1\nbogus line\n"), ConfigError);
  EXPECT_THROW(config_from_text("# nem-config v1\nxi = 1,1\nalgorithm = newton\n"), ConfigError);
  EXPECT_THROW(config_from_text("# nem-config v1\nxi = 1,1\nd = ten\n"), ConfigError);
  EXPECT_THROW(config_from_json("{\"schema\": \"nem-config.v9\"}"), ConfigError);
  EXPECT_THROW(parse_algorithm("sgd"), ConfigError);
  EXPECT_EQ(parse_algorithm("two-phase"), Algorithm::kTwoPhase);
}

TEST(Config, ValidatesSampleCounts) {
  ExperimentConfig c = small_config();
  c.alpha_grid = {0.01};
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  EXPECT_EQ(c.n_for(0.2), 4);
  EXPECT_EQ(c.n_for(0.425), 9);
  c.delta = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = small_config();
  c.L = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

// ---- sweeps --------------------------------------------------------------------------

TEST(Sweep, EmptyGridGivesNoRows) {
  ExperimentConfig c = small_config();
  c.alpha_grid.clear();
  SweepResult r = run_sweep(c);
  EXPECT_TRUE(r.rows.empty());
  EXPECT_FALSE(r.partial_failure());
  const std::string csv = rows_to_csv(r.rows);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
}

TEST(Sweep, SeedsAreSchedulingIndependent) {
  EXPECT_EQ(run_seed(5, 1, 2), run_seed(5, 1, 2));
  EXPECT_NE(run_seed(5, 1, 2), run_seed(5, 2, 1));
  EXPECT_NE(run_seed(5, 0, 0), run_seed(6, 0, 0));
}

TEST(Sweep, ByteIdenticalAcrossRunsAndWorkerCounts) {
  ExperimentConfig c = small_config();
  c.jobs = 1;
  const std::string one = rows_to_csv(run_sweep(c).rows);
  const std::string again = rows_to_csv(run_sweep(c).rows);
  c.jobs = 4;
  SweepResult four = run_sweep(c);
  EXPECT_EQ(one, again);
  EXPECT_EQ(one, rows_to_csv(four.rows));
  c.jobs = 1;
  EXPECT_EQ(runs_to_csv(run_sweep(c).runs), runs_to_csv(four.runs));
}

TEST(Sweep, RowsAggregateRuns) {
  ExperimentConfig c = small_config();
  SweepResult r = run_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  ASSERT_EQ(r.runs.size(), 6u);
  for (std::size_t a = 0; a < 2; ++a) {
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < 3; ++k) {
      const RunOutcome& o = r.runs[a * 3 + k];
      EXPECT_EQ(o.alpha_index, a);
      EXPECT_EQ(o.seed_index, static_cast<std::size_t>(k));
      EXPECT_EQ(o.final_u, run_single(c, c.alpha_grid[a], o.seed));
      s += o.final_u;
    }
    const double mean = s / 3;
    for (int k = 0; k < 3; ++k) s2 += std::pow(r.runs[a * 3 + k].final_u - mean, 2);
    EXPECT_NEAR(r.rows[a].mean_final_u, mean, 1e-15);
    EXPECT_NEAR(r.rows[a].sd_final_u, std::sqrt(s2 / 2), 1e-15);
    EXPECT_GE(r.rows[a].sd_final_u, 0.0);
    EXPECT_EQ(r.rows[a].runs_ok, 3);
    EXPECT_EQ(r.rows[a].n, c.n_for(c.alpha_grid[a]));
    EXPECT_NEAR(r.rows[a].theory_u, theory_u(Algorithm::kHd, c.alpha_grid[a], c.xi), 1e-12);
  }
}

TEST(Sweep, FailedRunsAreIsolated) {
  ExperimentConfig c = small_config();
  // n = 1000 cubic equations at d = 200 overflow the coupling budget; n = 2 is cheap
  c.xi = MixtureXi({1.0, 0.0, 0.0, 1.0});
  c.d = 200;
  c.alpha_grid = {0.01, 5.0};
  c.seeds = 1;
  c.theory = false;
  SweepResult r = run_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(r.partial_failure());
  EXPECT_EQ(r.rows[0].runs_ok, 1);
  EXPECT_TRUE(r.rows[0].error.empty());
  EXPECT_EQ(r.rows[1].runs_failed, 1);
  EXPECT_FALSE(r.rows[1].error.empty());
  EXPECT_TRUE(std::isnan(r.rows[1].mean_final_u));
  const std::string csv = rows_to_csv(r.rows);
  EXPECT_NE(csv.find("budget"), std::string::npos);
}

TEST(Sweep, HessianDescentBelowThresholdFollowsTheory) {
  // quartic couplings at d = 500 do not fit in memory; d = 30 keeps the same shape
  ExperimentConfig c;
  c.xi = MixtureXi({1.0, 0.0, 0.0, 0.0, 1.0});
  c.algorithm = Algorithm::kHd;
  c.d = 30;
  c.delta = 1.0 / 50;
  c.seeds = 3;
  c.master_seed = 17;
  const double ahd = alpha_hd(c.xi);
  c.alpha_grid = {0.2 * ahd, 0.8 * ahd};
  SweepResult r = run_sweep(c);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_FALSE(r.partial_failure());
  EXPECT_LT(r.rows[0].mean_final_u, r.rows[1].mean_final_u);
  EXPECT_NEAR(r.rows[0].mean_final_u, r.rows[0].theory_u, 0.05);
}

TEST(Sweep, ThresholdsRepeatedPerRow) {
  ExperimentConfig c = small_config();
  c.xi = MixtureXi({1.0, 0.0, 0.0, 1.0});
  c.seeds = 1;
  SweepResult r = run_sweep(c);
  Thresholds t = compute_thresholds(c.xi);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.alpha_lb, t.alpha_lb);
    EXPECT_EQ(row.alpha_hd, t.alpha_hd);
    EXPECT_TRUE(std::isfinite(row.alpha_ub1));
  }
  EXPECT_TRUE(std::isnan(compute_thresholds(MixtureXi({1.0, 1.0})).alpha_lb));
}

TEST(Sweep, CsvSchema) {
  PhaseDiagramRow row;
  row.alpha = 0.5;
  row.n = 10;
  row.error = "boom, \"quoted\"";
  const std::string csv = rows_to_csv({row});
  std::istringstream in(csv);
  std::string l1, l2;
  std::getline(in, l1);
  std::getline(in, l2);
  EXPECT_EQ(l1, "# nem phase-diagram v1");
  EXPECT_EQ(l2,
            "alpha,n,mean_final_u,sd_final_u,theory_u,alpha_lb,alpha_ub1,alpha_hd,alpha_tp,runs_ok,"
            "runs_failed,error");
  EXPECT_NE(csv.find("\"boom, \"\"quoted\"\"\""), std::string::npos);
  EXPECT_NE(rows_to_json({row}).find("\"alpha\""), std::string::npos);
}

// ---- plot scripts --------------------------------------------------------------------

int count(const std::string& s, const std::string& what) {
  int k = 0;
  for (std::size_t p = s.find(what); p != std::string::npos; p = s.find(what, p + 1)) ++k;
  return k;
}

TEST(PlotScript, EmptyRowsGiveAxesOnly) {
  const std::string s = emit_plot_script({}, "fig1");
  EXPECT_NE(s.find("set xlabel"), std::string::npos);
  EXPECT_EQ(count(s, "set arrow"), 0);
}

TEST(PlotScript, OneLinePerFiniteThreshold) {
  PhaseDiagramRow row;
  row.alpha_lb = 0.9;
  row.alpha_ub1 = 2.7;
  row.alpha_hd = 1.01;
  const std::string s = emit_plot_script({row}, "plain", "x.csv");
  EXPECT_EQ(count(s, "set arrow"), 3);
  EXPECT_NE(s.find("'x.csv'"), std::string::npos);
}

TEST(PlotScript, Fig1Styles) {
  PhaseDiagramRow row;
  row.alpha_lb = 0.9;
  row.alpha_ub1 = 2.7;
  row.alpha_hd = 1.01;
  row.alpha_tp = 1.2;
  const std::string s = emit_plot_script({row}, "fig1");
  auto line_of = [&](const std::string& tag) {
    const std::size_t p = s.find("# " + tag + "\n");
    return s.substr(s.rfind('\n', p) + 1, p - s.rfind('\n', p));
  };
  EXPECT_NE(line_of("alpha_lb").find("dt 2 lc rgb 'black'"), std::string::npos);
  EXPECT_NE(line_of("alpha_ub1").find("dt 1 lc rgb 'black'"), std::string::npos);
  EXPECT_NE(line_of("alpha_hd").find("'red'"), std::string::npos);
  EXPECT_EQ(count(s, "set arrow"), 4);
}

// ---- theory report -------------------------------------------------------------------

TEST(TheoryReportText, JsonAndCsvCarryEveryField) {
  TheoryReport r = theory_report(MixtureXi({1.0, 1.0}), 0.3);
  const std::string j = theory_report_json(r), c = theory_report_csv(r);
  for (const char* f : {"alpha_lb", "alpha_ub1", "eps0", "alpha_ub2", "alpha_gd", "alpha_hd",
                        "alpha_tp", "e_star", "q_rs", "q0", "q_star", "gamma_star", "u_rs", "A_xi",
                        "u_lb", "u_ub"}) {
    EXPECT_NE(j.find(std::string("\"") + f + "\""), std::string::npos) << f;
    EXPECT_NE(c.find(std::string("\n") + f + ","), std::string::npos) << f;
  }
  EXPECT_NE(c.find("u_curve,"), std::string::npos);
}

// ---- network sweeps ------------------------------------------------------------------

TEST(NNSweep, DeterministicAcrossWorkers) {
  NNSweepConfig s;
  s.base.epochs = 30;
  s.alpha_grid = {0.05, 0.1};
  s.seeds = 2;
  s.theory = false;
  s.jobs = 1;
  const std::string a = nn_rows_to_csv(run_nn_sweep(s));
  s.jobs = 3;
  EXPECT_EQ(a, nn_rows_to_csv(run_nn_sweep(s)));
  EXPECT_EQ(a.substr(0, a.find('\n')), "# nem nn-sweep v1");
  EXPECT_NE(a.find("alpha,mean_err,sd_err,theory_u"), std::string::npos);
}

TEST(Crossing, LinearInterpolation) {
  EXPECT_DOUBLE_EQ(crossing_alpha({0.1, 0.2, 0.3}, {0.0, 0.01, 0.03}, 0.02), 0.25);
  EXPECT_DOUBLE_EQ(crossing_alpha({0.1, 0.2}, {0.05, 0.1}, 0.01), 0.1);
  EXPECT_TRUE(std::isnan(crossing_alpha({0.1, 0.2}, {0.0, 0.001}, 0.01)));
  EXPECT_TRUE(std::isnan(crossing_alpha({}, {}, 0.01)));
}

// ---- snapshots -----------------------------------------------------------------------

TEST(SnapshotFile, RejectsCorruption) {
  const std::string path = testing::TempDir() + "bad.nemmap";
  std::ofstream(path, std::ios::binary) << "NOTAMAP";
  EXPECT_THROW(load_snapshot(path), SnapshotError);
}

}  // namespace
}  // namespace nem
