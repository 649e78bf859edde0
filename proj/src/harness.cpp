#include "nem/harness.hpp"

#include "nem/algorithms.hpp"
#include "nem/coupling_rng.hpp"
#include "nem/gaussian_map.hpp"
#include "nem/parallel.hpp"
#include "nem/theory.hpp"
#include "nem/trace.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace nem {
namespace {

constexpr const char* kConfigHeader = "# nem-config v1";

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("config: " + key + " expects a number, got '" + text + "'");
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an integer, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("config: " + key + " expects an integer, got '" + text + "'");
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("config: " + key + " expects an unsigned integer, got '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("config: " + key + " expects an unsigned integer, got '" + text + "'");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config: " + key + " expects true or false, got '" + text + "'");
}

std::vector<double> parse_grid(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

MixtureXi parse_xi(const std::string& text) {
  try {
    return parse_mixture(text);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: xi: ") + e.what());
  }
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += (c == '\n' || c == '\r') ? ' ' : c;
  }
  return out + "\"";
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

nlohmann::json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double json_read_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return std::stod(j.get<std::string>());
  throw ConfigError("config: expected a number in JSON");
}

}  // namespace

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kGd:
      return "gd";
    case Algorithm::kHd:
      return "hd";
    case Algorithm::kTwoPhase:
      return "two-phase";
  }
  return "?";
}

Algorithm parse_algorithm(const std::string& text) {
  if (text == "gd") return Algorithm::kGd;
  if (text == "hd") return Algorithm::kHd;
  if (text == "two-phase") return Algorithm::kTwoPhase;
  throw ConfigError("config: unknown algorithm '" + text + "' (gd, hd, two-phase)");
}

int ExperimentConfig::n_for(double alpha) const {
  const double n = std::round(alpha * d);
  if (!(n >= 1.0)) throw ConfigError("config: alpha " + format_double(alpha) + " gives n < 1 at d = " + std::to_string(d));
  return static_cast<int>(n);
}

void ExperimentConfig::validate() const {
  if (d < 2) throw ConfigError("config: d must be >= 2");
  if (seeds < 1) throw ConfigError("config: seeds must be >= 1");
  if (jobs < 1) throw ConfigError("config: jobs must be >= 1");
  for (double a : alpha_grid) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("config: alpha values must be positive");
    n_for(a);
  }
  if (!(eta > 0.0)) throw ConfigError("config: eta must be positive");
  if (gd_iters < 0) throw ConfigError("config: gd_iters must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("config: delta must lie in (0, 1)");
  if (L < 2) throw ConfigError("config: L must be >= 2");
  if (!std::isfinite(gamma)) throw ConfigError("config: gamma must be finite");
}

std::string config_to_text(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << kConfigHeader << '\n';
  out << "xi = " << join_doubles(cfg.xi.coeffs()) << '\n';
  out << "algorithm = " << to_string(cfg.algorithm) << '\n';
  out << "alpha_grid = " << join_doubles(cfg.alpha_grid) << '\n';
  out << "d = " << cfg.d << '\n';
  out << "seeds = " << cfg.seeds << '\n';
  out << "master_seed = " << cfg.master_seed << '\n';
  out << "eta = " << format_double(cfg.eta) << '\n';
  out << "gd_iters = " << cfg.gd_iters << '\n';
  out << "delta = " << format_double(cfg.delta) << '\n';
  out << "gamma_policy = " << (cfg.gamma_policy == GammaPolicy::kAuto ? "auto" : "explicit") << '\n';
  out << "gamma = " << format_double(cfg.gamma) << '\n';
  out << "L = " << cfg.L << '\n';
  out << "theory = " << (cfg.theory ? "true" : "false") << '\n';
  out << "output = " << cfg.output << '\n';
  out << "jobs = " << cfg.jobs << '\n';
  return out.str();
}

namespace {

void apply_key(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "xi") cfg.xi = parse_xi(value);
  else if (key == "algorithm") cfg.algorithm = parse_algorithm(value);
  else if (key == "alpha_grid") cfg.alpha_grid = parse_grid(key, value);
  else if (key == "d") cfg.d = static_cast<int>(parse_integer(key, value));
  else if (key == "seeds") cfg.seeds = static_cast<int>(parse_integer(key, value));
  else if (key == "master_seed") cfg.master_seed = parse_unsigned(key, value);
  else if (key == "eta") cfg.eta = parse_double(key, value);
  else if (key == "gd_iters") cfg.gd_iters = static_cast<int>(parse_integer(key, value));
  else if (key == "delta") cfg.delta = parse_double(key, value);
  else if (key == "gamma_policy") {
    if (value == "auto") cfg.gamma_policy = GammaPolicy::kAuto;
    else if (value == "explicit") cfg.gamma_policy = GammaPolicy::kExplicit;
    else throw ConfigError("config: gamma_policy must be auto or explicit");
  } else if (key == "gamma") cfg.gamma = parse_double(key, value);
  else if (key == "L") cfg.L = static_cast<int>(parse_integer(key, value));
  else if (key == "theory") cfg.theory = parse_bool(key, value);
  else if (key == "output") cfg.output = value;
  else if (key == "jobs") cfg.jobs = static_cast<int>(parse_integer(key, value));
  else throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

ExperimentConfig config_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || trim(line) != kConfigHeader)
    throw ConfigError(std::string("config: first line must be '") + kConfigHeader + "'");
  ExperimentConfig cfg;
  bool has_xi = false;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    apply_key(cfg, key, trim(t.substr(eq + 1)));
    has_xi = has_xi || key == "xi";
  }
  if (!has_xi) throw ConfigError("config: xi is required");
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["schema"] = "nem-config.v1";
  j["xi"] = nlohmann::json::array();
  for (double c : cfg.xi.coeffs()) j["xi"].push_back(c);
  j["algorithm"] = to_string(cfg.algorithm);
  j["alpha_grid"] = nlohmann::json::array();
  for (double a : cfg.alpha_grid) j["alpha_grid"].push_back(a);
  j["d"] = cfg.d;
  j["seeds"] = cfg.seeds;
  j["master_seed"] = cfg.master_seed;
  j["eta"] = json_number(cfg.eta);
  j["gd_iters"] = cfg.gd_iters;
  j["delta"] = json_number(cfg.delta);
  j["gamma_policy"] = cfg.gamma_policy == GammaPolicy::kAuto ? "auto" : "explicit";
  j["gamma"] = json_number(cfg.gamma);
  j["L"] = cfg.L;
  j["theory"] = cfg.theory;
  j["output"] = cfg.output;
  j["jobs"] = cfg.jobs;
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config: JSON root must be an object");
  if (j.value("schema", std::string("nem-config.v1")) != "nem-config.v1")
    throw ConfigError("config: unsupported JSON schema");
  if (!j.contains("xi")) throw ConfigError("config: xi is required");
  ExperimentConfig cfg;
  try {
    std::vector<double> coeffs;
    for (const auto& c : j.at("xi")) coeffs.push_back(json_read_number(c));
    try {
      cfg.xi = MixtureXi(std::move(coeffs));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: xi: ") + e.what());
    }
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const auto& v = it.value();
      if (key == "schema" || key == "xi") continue;
      if (key == "alpha_grid") {
        cfg.alpha_grid.clear();
        for (const auto& a : v) cfg.alpha_grid.push_back(json_read_number(a));
      } else if (key == "algorithm") cfg.algorithm = parse_algorithm(v.get<std::string>());
      else if (key == "gamma_policy" || key == "output") apply_key(cfg, key, v.get<std::string>());
      else if (key == "theory") cfg.theory = v.get<bool>();
      else if (key == "master_seed") cfg.master_seed = v.get<std::uint64_t>();
      else if (key == "d" || key == "seeds" || key == "gd_iters" || key == "L" || key == "jobs")
        apply_key(cfg, key, std::to_string(v.get<long long>()));
      else if (key == "eta" || key == "delta" || key == "gamma") apply_key(cfg, key, format_double(json_read_number(v)));
      else throw ConfigError("config: unknown key '" + key + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: wrong JSON type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') return config_from_json(text);
  return config_from_text(text);
}

// ---------------------------------------------------------------------------------------

Thresholds compute_thresholds(const MixtureXi& xi) {
  Thresholds t;
  auto guarded = [](auto f) {
    try {
      return f();
    } catch (const std::exception&) {
      return std::numeric_limits<double>::quiet_NaN();
    }
  };
  t.alpha_lb = guarded([&] { return alpha_lb(xi); });
  t.alpha_ub1 = guarded([&] { return alpha_ub1(xi); });
  t.alpha_hd = guarded([&] { return alpha_hd(xi); });
  t.alpha_tp = guarded([&] { return alpha_tp(xi); });
  return t;
}

double theory_u(Algorithm algorithm, double alpha, const MixtureXi& xi) {
  try {
    switch (algorithm) {
      case Algorithm::kHd:
        return hd_final_energy(alpha, xi);
      case Algorithm::kTwoPhase:
        return two_phase_final_energy(alpha, xi);
      case Algorithm::kGd:
        break;
    }
  } catch (const std::exception&) {
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double resolve_gamma(const ExperimentConfig& cfg, double alpha) {
  if (cfg.gamma_policy == GammaPolicy::kExplicit) return cfg.gamma;
  try {
    return rs_quantities(alpha, cfg.xi).gamma_star;
  } catch (const std::exception&) {
    return 0.0;  // no AMP phase: two-phase reduces to Hessian descent from the origin
  }
}

std::uint64_t run_seed(std::uint64_t master, std::size_t alpha_index, std::size_t seed_index) {
  return derive_seed(master, alpha_index, seed_index);
}

double run_single(const ExperimentConfig& cfg, double alpha, std::uint64_t seed) {
  const int n = cfg.n_for(alpha);
  const GaussianMap map = sample_map(cfg.xi, n, cfg.d, derive_seed(seed, 0));
  const std::uint64_t algo_seed = derive_seed(seed, 1);
  switch (cfg.algorithm) {
    case Algorithm::kGd: {
      GradientDescentOptions o;
      o.eta = cfg.eta;
      o.max_iters = cfg.gd_iters;
      o.seed = algo_seed;
      return gradient_descent(map, o).final_u;
    }
    case Algorithm::kHd: {
      HessianDescentOptions o;
      o.delta = cfg.delta;
      o.seed = algo_seed;
      return hessian_descent(map, o).final_u;
    }
    case Algorithm::kTwoPhase: {
      TwoPhaseOptions o;
      o.delta = cfg.delta;
      o.gamma = resolve_gamma(cfg, alpha);
      o.L = cfg.L;
      o.seed = algo_seed;
      return two_phase(map, o).final_u;
    }
  }
  throw ConfigError("run_single: unknown algorithm");
}

bool SweepResult::partial_failure() const {
  return std::any_of(runs.begin(), runs.end(), [](const RunOutcome& r) { return !r.error.empty(); });
}

SweepResult run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  SweepResult result;
  const std::size_t A = cfg.alpha_grid.size(), S = static_cast<std::size_t>(cfg.seeds);
  result.runs.resize(A * S);
  for (std::size_t a = 0; a < A; ++a) {
    for (std::size_t s = 0; s < S; ++s) {
      RunOutcome& r = result.runs[a * S + s];
      r.alpha_index = a;
      r.seed_index = s;
      r.alpha = cfg.alpha_grid[a];
      r.n = cfg.n_for(r.alpha);
      r.seed = run_seed(cfg.master_seed, a, s);
    }
  }
  parallel_for(result.runs.size(), cfg.jobs, [&](std::size_t i) {
    RunOutcome& r = result.runs[i];
    try {
      r.final_u = run_single(cfg, r.alpha, r.seed);
    } catch (const std::exception& e) {
      r.error = e.what();
      if (r.error.empty()) r.error = "unknown error";
    }
  });

  Thresholds th;
  if (cfg.theory && A > 0) th = compute_thresholds(cfg.xi);
  result.rows.resize(A);
  std::vector<double> theory_col(A, std::numeric_limits<double>::quiet_NaN());
  if (cfg.theory) {
    parallel_for(A, cfg.jobs, [&](std::size_t a) { theory_col[a] = theory_u(cfg.algorithm, cfg.alpha_grid[a], cfg.xi); });
  }
  for (std::size_t a = 0; a < A; ++a) {
    PhaseDiagramRow& row = result.rows[a];
    row.alpha = cfg.alpha_grid[a];
    row.n = cfg.n_for(row.alpha);
    std::vector<double> ok;
    for (std::size_t s = 0; s < S; ++s) {
      const RunOutcome& r = result.runs[a * S + s];
      if (r.error.empty()) {
        ok.push_back(r.final_u);
      } else {
        ++row.runs_failed;
        if (row.error.empty()) row.error = r.error;
      }
    }
    row.runs_ok = static_cast<int>(ok.size());
    if (!ok.empty()) {
      row.mean_final_u = mean_of(ok);
      row.sd_final_u = sd_of(ok, row.mean_final_u);
    }
    row.theory_u = theory_col[a];
    row.alpha_lb = th.alpha_lb;
    row.alpha_ub1 = th.alpha_ub1;
    row.alpha_hd = th.alpha_hd;
    row.alpha_tp = th.alpha_tp;
  }
  return result;
}

std::string rows_to_csv(const std::vector<PhaseDiagramRow>& rows) {
  std::ostringstream out;
  out << kPhaseDiagramSchema << '\n';
  out << "alpha,n,mean_final_u,sd_final_u,theory_u,alpha_lb,alpha_ub1,alpha_hd,alpha_tp,runs_ok,runs_failed,error\n";
  for (const auto& r : rows) {
    out << format_double(r.alpha) << ',' << r.n << ',' << format_double(r.mean_final_u) << ','
        << format_double(r.sd_final_u) << ',' << format_double(r.theory_u) << ',' << format_double(r.alpha_lb) << ','
        << format_double(r.alpha_ub1) << ',' << format_double(r.alpha_hd) << ',' << format_double(r.alpha_tp) << ','
        << r.runs_ok << ',' << r.runs_failed << ',' << csv_field(r.error) << '\n';
  }
  return out.str();
}

std::string runs_to_csv(const std::vector<RunOutcome>& runs) {
  std::ostringstream out;
  out << kRunsSchema << '\n';
  out << "alpha_index,seed_index,alpha,n,seed,final_u,error\n";
  for (const auto& r : runs) {
    out << r.alpha_index << ',' << r.seed_index << ',' << format_double(r.alpha) << ',' << r.n << ',' << r.seed
        << ',' << format_double(r.final_u) << ',' << csv_field(r.error) << '\n';
  }
  return out.str();
}

std::string rows_to_json(const std::vector<PhaseDiagramRow>& rows) {
  nlohmann::json j;
  j["schema"] = "nem-phase-diagram.v1";
  j["rows"] = nlohmann::json::array();
  for (const auto& r : rows) {
    j["rows"].push_back({{"alpha", json_number(r.alpha)},
                         {"n", r.n},
                         {"mean_final_u", json_number(r.mean_final_u)},
                         {"sd_final_u", json_number(r.sd_final_u)},
                         {"theory_u", json_number(r.theory_u)},
                         {"alpha_lb", json_number(r.alpha_lb)},
                         {"alpha_ub1", json_number(r.alpha_ub1)},
                         {"alpha_hd", json_number(r.alpha_hd)},
                         {"alpha_tp", json_number(r.alpha_tp)},
                         {"runs_ok", r.runs_ok},
                         {"runs_failed", r.runs_failed},
                         {"error", r.error}});
  }
  return j.dump(2) + "\n";
}

std::string emit_plot_script(const std::vector<PhaseDiagramRow>& rows, const std::string& style,
                             const std::string& csv_path) {
  std::ostringstream out;
  out << "# nem plot v1 style=" << style << "\n";
  out << "set datafile separator ','\n";
  out << "set xlabel 'alpha = n/d'\n";
  out << "set ylabel 'final energy H/n'\n";
  out << "set key top left\n";
  if (rows.empty()) {
    out << "set xrange [0:1]\nset yrange [0:1]\n";
    out << "plot NaN notitle\n";
    return out.str();
  }
  const bool fig1 = style == "fig1";
  struct Line {
    const char* column;
    const char* label;
    double value;
    const char* fig1_style;
    const char* plain_style;
  };
  const PhaseDiagramRow& r0 = rows.front();
  const Line lines[] = {
      {"alpha_lb", "alpha_LB (second moment)", r0.alpha_lb, "dt 2 lc rgb 'black'", "dt 1 lc rgb 'gray40'"},
      {"alpha_ub1", "alpha_UB (Gaussian comparison)", r0.alpha_ub1, "dt 1 lc rgb 'black'", "dt 1 lc rgb 'gray40'"},
      {"alpha_hd", "alpha_HD (Hessian descent)", r0.alpha_hd, "dt 1 lc rgb 'red'", "dt 1 lc rgb 'gray40'"},
      {"alpha_tp", "alpha_TP (two-phase)", r0.alpha_tp, "dt 3 lc rgb 'blue'", "dt 1 lc rgb 'gray40'"},
  };
  int tag = 1;
  for (const Line& l : lines) {
    if (!std::isfinite(l.value)) continue;
    out << "set arrow " << tag << " from " << format_double(l.value) << ", graph 0 to " << format_double(l.value)
        << ", graph 1 nohead lw 2 " << (fig1 ? l.fig1_style : l.plain_style) << "  # " << l.column << "\n";
    out << "set label " << tag << " '" << l.label << "' at " << format_double(l.value)
        << ", graph 0.95 rotate by 90 right front\n";
    ++tag;
  }
  out << "plot '" << csv_path << "' every ::1 using 1:3:4 with yerrorbars title 'simulation', \\\n"
      << "     '" << csv_path << "' every ::1 using 1:5 with lines lc rgb 'red' title 'theory'\n";
  return out.str();
}

namespace {

std::vector<std::pair<std::string, double>> report_fields(const TheoryReport& r) {
  return {{"alpha", r.alpha},       {"c0", r.c0},           {"alpha_lb", r.alpha_lb},
          {"alpha_ub1", r.alpha_ub1}, {"eps0", r.eps0},     {"alpha_ub2", r.alpha_ub2},
          {"alpha_gd", r.alpha_gd}, {"alpha_hd", r.alpha_hd}, {"alpha_tp", r.alpha_tp},
          {"e_star", r.e_star},     {"q_rs", r.q_rs},       {"q0", r.q0},
          {"q_star", r.q_star},     {"gamma_star", r.gamma_star}, {"u_rs", r.u_rs},
          {"A_xi", r.A_xi},         {"u_lb", r.u_lb},       {"u_ub", r.u_ub},
          {"u_hd", r.u_hd},         {"u_tp", r.u_tp}};
}

}  // namespace

std::string theory_report_json(const TheoryReport& report) {
  nlohmann::json j;
  j["schema"] = "nem-theory.v1";
  j["xi"] = nlohmann::json::array();
  for (double c : report.xi.coeffs()) j["xi"].push_back(c);
  for (const auto& [name, value] : report_fields(report)) j[name] = json_number(value);
  j["u_curve"] = {{"t", nlohmann::json::array()}, {"u", nlohmann::json::array()}};
  for (std::size_t i = 0; i < report.ode_curve.t.size(); ++i) {
    j["u_curve"]["t"].push_back(json_number(report.ode_curve.t[i]));
    j["u_curve"]["u"].push_back(json_number(report.ode_curve.u[i]));
  }
  j["skipped"] = nlohmann::json::object();
  for (const auto& [name, why] : report.skipped) j["skipped"][name] = why;
  return j.dump(2) + "\n";
}

std::string theory_report_csv(const TheoryReport& report) {
  std::ostringstream out;
  out << "# nem theory v1\n";
  out << "field,value\n";
  out << "xi," << csv_field(join_doubles(report.xi.coeffs())) << '\n';
  for (const auto& [name, value] : report_fields(report)) out << name << ',' << format_double(value) << '\n';
  for (std::size_t i = 0; i < report.ode_curve.t.size(); ++i)
    out << "u_curve," << format_double(report.ode_curve.t[i]) << ':' << format_double(report.ode_curve.u[i]) << '\n';
  for (const auto& [name, why] : report.skipped) out << "skipped:" << name << ',' << csv_field(why) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------------------

std::vector<NNSweepRow> run_nn_sweep(const NNSweepConfig& cfg) {
  if (cfg.seeds < 1) throw ConfigError("nn: seeds must be >= 1");
  const std::size_t A = cfg.alpha_grid.size(), S = static_cast<std::size_t>(cfg.seeds);
  const double d = static_cast<double>(cfg.base.m) * cfg.base.D;
  std::vector<int> ns(A);
  for (std::size_t a = 0; a < A; ++a) {
    const double n = std::round(cfg.alpha_grid[a] * d);
    if (!(n >= 1.0)) throw ConfigError("nn: alpha " + format_double(cfg.alpha_grid[a]) + " gives n < 1");
    ns[a] = static_cast<int>(n);
  }
  cfg.base.validate();
  std::vector<double> errs(A * S);
  parallel_for(errs.size(), cfg.jobs, [&](std::size_t i) {
    NNConfig c = cfg.base;
    c.n = ns[i / S];
    c.seed = run_seed(cfg.master_seed, i / S, i % S);
    errs[i] = train_interpolation(c).final_error;
  });
  std::vector<NNSweepRow> rows(A);
  MixtureXi xi;
  if (cfg.theory && A > 0) xi = xi_from_network(cfg.base.a, cfg.degree_cap);
  for (std::size_t a = 0; a < A; ++a) {
    NNSweepRow& r = rows[a];
    r.alpha = cfg.alpha_grid[a];
    r.n = ns[a];
    const std::vector<double> v(errs.begin() + static_cast<std::ptrdiff_t>(a * S),
                                errs.begin() + static_cast<std::ptrdiff_t>((a + 1) * S));
    r.mean_err = mean_of(v);
    r.sd_err = sd_of(v, r.mean_err);
    if (cfg.theory) r.theory_u = theory_u(Algorithm::kTwoPhase, r.alpha, xi);
  }
  return rows;
}

std::string nn_rows_to_csv(const std::vector<NNSweepRow>& rows) {
  std::ostringstream out;
  out << kNNSchema << '\n';
  out << "alpha,mean_err,sd_err,theory_u\n";
  for (const auto& r : rows)
    out << format_double(r.alpha) << ',' << format_double(r.mean_err) << ',' << format_double(r.sd_err) << ','
        << format_double(r.theory_u) << '\n';
  return out.str();
}

double crossing_alpha(const std::vector<double>& alphas, const std::vector<double>& values, double level) {
  if (alphas.size() != values.size()) throw std::invalid_argument("crossing_alpha: size mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] >= level)) continue;
    if (i == 0) return alphas[0];
    const double v0 = values[i - 1], v1 = values[i];
    const double w = (level - v0) / (v1 - v0);
    return alphas[i - 1] + w * (alphas[i] - alphas[i - 1]);
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace nem
