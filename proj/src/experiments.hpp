#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace displab {

using json = nlohmann::json;

// Bad keys, types or values in a config. Maps to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Tolerances {
  double transference_margin = 0.1;
  double refinement_rel = 0.01;  // Nt vs 2 Nt
  double lp_slack = 0.05;
  double far_field_factor = 10;
};

// Fully resolved experiment configuration. Optional fields are "auto" until
// resolve() fills them in for the chosen experiment.
struct Config {
  std::string experiment;
  std::string phase = "schrodinger";
  int dim = 1;
  std::optional<int> N;
  std::optional<double> L;
  std::vector<double> R;
  double T_max = 1;
  std::optional<int> Nt;
  std::optional<double> nt_factor;
  std::optional<int> nt_min, nt_max;
  int restarts = 4;
  std::optional<int> rounds;
  std::uint64_t seed = 7;
  std::string mode = "local";
  std::string output;
  bool force = false;
  int k = 3;          // non-stationary derivative order
  double s = 0.25;    // lp-summation
  double eps = 0.2;
  int k_max = 6;
  int trials = 8;
  double width = 1;   // convergence Gaussian width
  Tolerances tol;
};

extern const std::vector<std::string> kExperiments;

// Keys accepted in a config object; anything else is a schema error.
const std::vector<std::string>& config_keys();

// Validates a config object (from a file or assembled from flags) and merges it
// over the defaults. Throws ConfigError.
Config config_from_json(const json& j, bool require_file_keys);

// Fills every "auto" field for the experiment and checks value ranges.
Config resolve(Config c);

json config_to_json(const Config& c);

struct Check {
  std::string name;  // invariant or acceptance criterion instantiated
  bool pass = false;
  double value = 0;
  double threshold = 0;
  std::string detail;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

struct Report {
  std::string experiment;
  Config config;
  std::vector<Check> checks;
  Table table;
  json summary = json::object();
  double seconds = 0;

  bool all_pass() const;
  int passed() const;
  int failed() const;
};

// Cell formatting shared by every CSV: reals as %.12e.
std::string fmt_real(double v);
std::string fmt_int(long long v);

std::string to_csv(const Table& t);
json to_json(const Report& r);

using Progress = void (*)(const std::string&);

Report run_experiment(const Config& resolved, Progress progress = nullptr);

Report run_verify(const Config& c, Progress progress = nullptr);
Report run_kernel_decay(const Config& c, Progress progress = nullptr);
Report run_nonstationary(const Config& c, Progress progress = nullptr);
Report run_scaling(const Config& c, Progress progress = nullptr);
Report run_transference(const Config& c, Progress progress = nullptr);
Report run_lp_summation(const Config& c, Progress progress = nullptr);
Report run_convergence(const Config& c, Progress progress = nullptr);

struct ConvergenceRow {
  double delta = 0;
  double value = 0;     // || sup_{0<t<=delta} |T_t f - f| ||_{L^2(B(0,1))}
  double relative = 0;  // value / ||f||_2
  int nodes = 0;
};

// Shared with the acceptance binary. Nodes t_j = j * 2^-8 / nt0 nest across
// every delta = 2^-1 .. 2^-8.
std::vector<ConvergenceRow> convergence_rows(const std::string& phase, int dim, int N, double L, double width,
                                             int nt0, bool zero_data = false);

std::string versions_string();
json versions_json();

}  // namespace displab
