#include "experiments.hpp"

#include <Eigen/Core>
#include <fftw3.h>

#include <cmath>
#include <cstdio>

namespace displab {

bool Report::all_pass() const { return failed() == 0; }

int Report::passed() const {
  int n = 0;
  for (const auto& c : checks) n += c.pass;
  return n;
}

int Report::failed() const { return int(checks.size()) - passed(); }

std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12e", v);
  return buf;
}

std::string fmt_int(long long v) { return std::to_string(v); }

namespace {

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

// JSON has no NaN or infinity; those become null.
json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

// Every real in a report carries 12 significant digits, matching the CSV cells.
void round_reals(json& j) {
  if (j.is_number_float()) {
    const double v = j.get<double>();
    j = std::isfinite(v) ? json(std::stod(fmt_real(v))) : json(nullptr);
  } else if (j.is_structured()) {
    for (auto& child : j) round_reals(child);
  }
}

}  // namespace

std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += csv_cell(cells[i]);
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& r : t.rows) line(r);
  return out;
}

json to_json(const Report& r) {
  json j;
  j["experiment"] = r.experiment;
  j["config"] = config_to_json(r.config);
  json checks = json::array();
  for (const auto& c : r.checks)
    checks.push_back({{"name", c.name},
                      {"pass", c.pass},
                      {"value", real_or_null(c.value)},
                      {"threshold", real_or_null(c.threshold)},
                      {"detail", c.detail}});
  j["checks"] = checks;
  j["passed"] = r.passed();
  j["failed"] = r.failed();
  j["all_pass"] = r.all_pass();
  j["summary"] = r.summary;
  j["seconds"] = r.seconds;
  j["versions"] = versions_json();
  round_reals(j);
  return j;
}

std::string versions_string() {
  const auto v = versions_json();
  return "displab " + v["displab"].get<std::string>() + ", Eigen " + v["eigen"].get<std::string>() + ", " +
         v["fftw"].get<std::string>() + ", " + v["compiler"].get<std::string>();
}

json versions_json() {
  json v;
  v["displab"] = "1.0.0";
  v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  v["fftw"] = std::string(fftw_version);
#if defined(__clang__)
  v["compiler"] = "clang " __clang_version__;
#elif defined(__GNUC__)
  v["compiler"] = "gcc " __VERSION__;
#else
  v["compiler"] = "unknown";
#endif
  v["cxx_standard"] = long(__cplusplus);
  return v;
}

}  // namespace displab
