#include "nem/trace.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nem {

double TraceRecord::aux_value(const std::string& name) const {
  for (const auto& [key, value] : aux)
    if (key == name) return value;
  return std::numeric_limits<double>::quiet_NaN();
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string RunTrace::to_csv() const {
  std::ostringstream out;
  out << "step,t,radius_sq,u,aux\n";
  for (const auto& r : records_) {
    out << r.step << ',' << format_double(r.t) << ',' << format_double(r.radius_sq) << ','
        << format_double(r.u) << ',';
    for (std::size_t i = 0; i < r.aux.size(); ++i) {
      if (i) out << ';';
      out << r.aux[i].first << '=' << format_double(r.aux[i].second);
    }
    out << '\n';
  }
  return out.str();
}

namespace {

nlohmann::json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

double read_number(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  throw std::invalid_argument("trace: bad number '" + s + "'");
}

}  // namespace

std::string RunTrace::to_json() const {
  nlohmann::json records = nlohmann::json::array();
  for (const auto& r : records_) {
    nlohmann::json aux = nlohmann::json::array();
    for (const auto& [k, v] : r.aux) aux.push_back({k, number(v)});
    records.push_back({{"step", r.step},
                       {"t", number(r.t)},
                       {"radius_sq", number(r.radius_sq)},
                       {"u", number(r.u)},
                       {"aux", aux}});
  }
  nlohmann::json doc = {{"schema", "trace.v1"}, {"records", records}};
  return doc.dump();
}

RunTrace RunTrace::from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  if (doc.value("schema", "") != "trace.v1")
    throw std::invalid_argument("trace: unsupported schema");
  RunTrace trace;
  for (const auto& j : doc.at("records")) {
    TraceRecord r;
    r.step = j.at("step").get<int>();
    r.t = read_number(j.at("t"));
    r.radius_sq = read_number(j.at("radius_sq"));
    r.u = read_number(j.at("u"));
    for (const auto& kv : j.at("aux")) r.aux.emplace_back(kv.at(0).get<std::string>(), read_number(kv.at(1)));
    trace.add(std::move(r));
  }
  return trace;
}

}  // namespace nem
