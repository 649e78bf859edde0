#pragma once

#include <string>
#include <utility>
#include <vector>

namespace nem {

struct TraceRecord {
  int step = 0;
  double t = 0.0;
  double radius_sq = 0.0;
  double u = 0.0;  // H / n
  std::vector<std::pair<std::string, double>> aux;

  /// Value of a named diagnostic, or NaN when absent.
  double aux_value(const std::string& name) const;
};

/// Per-step record of an algorithm run.
class RunTrace {
 public:
  void add(TraceRecord record) { records_.push_back(std::move(record)); }
  const std::vector<TraceRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const TraceRecord& back() const { return records_.back(); }
  const TraceRecord& operator[](std::size_t i) const { return records_[i]; }

  /// Columns step,t,radius_sq,u,aux with aux written as name=value;name=value.
  std::string to_csv() const;
  /// JSON object {"schema": "trace.v1", "records": [...]}.
  std::string to_json() const;
  static RunTrace from_json(const std::string& text);

 private:
  std::vector<TraceRecord> records_;
};

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

}  // namespace nem
