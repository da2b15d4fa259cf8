// displab: experiment runner for dispersive maximal estimates.
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 bad config or flags,
// 3 aliasing budget violated (override with --force), 4 file I/O failure.

#include "experiments.hpp"

#include "CLI11.hpp"
#include "dispersive/estimator.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using displab::json;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kConfig = 2, kAliasing = 3, kIo = 4 };

bool g_quiet = false;

void progress(const std::string& msg) {
  if (!g_quiet) std::cerr << "  " << msg << '\n';
}

struct Flags {
  std::string config_path;
  std::string phase, mode, output, R;
  int dim = 0, N = 0, Nt = 0, nt_min = 0, nt_max = 0, restarts = 0, rounds = 0, k = 0, k_max = 0, trials = 0;
  double L = 0, T_max = 0, nt_factor = 0, s = 0, eps = 0, width = 0;
  std::uint64_t seed = 0;
  bool force = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  sub->add_option("--phase", f.phase, "schrodinger | wave | airy | fractional:a=<a>");
  sub->add_option("--dim", f.dim, "spatial dimension (1 or 2)");
  sub->add_option("--N", f.N, "points per axis (power of two); auto by default");
  sub->add_option("--L", f.L, "torus side; auto from the aliasing budget by default");
  sub->add_option("--R", f.R, "comma-separated frequency scales, e.g. 4,8,16");
  sub->add_option("--T-max", f.T_max, "time horizon");
  sub->add_option("--Nt", f.Nt, "time nodes; auto by default");
  sub->add_option("--nt-factor", f.nt_factor, "Nt = factor * ceil(T (2R)^a), clamped");
  sub->add_option("--nt-min", f.nt_min, "lower clamp for the automatic Nt");
  sub->add_option("--nt-max", f.nt_max, "upper clamp for the automatic Nt");
  sub->add_option("--restarts", f.restarts, "restarts of the alternating maximization");
  sub->add_option("--rounds", f.rounds, "alternation rounds per restart");
  sub->add_option("--seed", f.seed, "base seed");
  sub->add_option("--mode", f.mode, "local | global (scaling)");
  sub->add_option("--output", f.output, "output directory (default $DISPLAB_OUTPUT_DIR or .)");
  sub->add_flag("--force", f.force, "accept grid overrides that break the aliasing budget");
  sub->add_option("--k", f.k, "derivative order of the non-stationary probe");
  sub->add_option("--s", f.s, "Sobolev index for lp-summation");
  sub->add_option("--eps", f.eps, "epsilon for lp-summation");
  sub->add_option("--k-max", f.k_max, "largest Littlewood-Paley level");
  sub->add_option("--trials", f.trials, "random draws per level");
  sub->add_option("--width", f.width, "Gaussian width for convergence");
}

// Flags given on the command line, as config keys.
json flag_json(CLI::App* sub, const Flags& f) {
  json j = json::object();
  auto given = [&](const char* name) { return sub->count(name) > 0; };
  if (given("--phase")) j["phase"] = f.phase;
  if (given("--dim")) j["dim"] = f.dim;
  if (given("--N")) j["N"] = f.N;
  if (given("--L")) j["L"] = f.L;
  if (given("--R")) {
    json arr = json::array();
    std::stringstream ss(f.R);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        size_t used = 0;
        const double v = std::stod(item, &used);
        if (used != item.size()) throw std::invalid_argument(item);
        arr.push_back(v);
      } catch (const std::exception&) {
        throw displab::ConfigError("--R expects comma-separated numbers, got '" + f.R + "'");
      }
    }
    j["R"] = arr;
  }
  if (given("--T-max")) j["T_max"] = f.T_max;
  if (given("--Nt")) j["Nt"] = f.Nt;
  if (given("--nt-factor")) j["nt_factor"] = f.nt_factor;
  if (given("--nt-min")) j["nt_min"] = f.nt_min;
  if (given("--nt-max")) j["nt_max"] = f.nt_max;
  if (given("--restarts")) j["restarts"] = f.restarts;
  if (given("--rounds")) j["rounds"] = f.rounds;
  if (given("--seed")) j["seed"] = f.seed;
  if (given("--mode")) j["mode"] = f.mode;
  if (given("--output")) j["output"] = f.output;
  if (f.force) j["force"] = true;
  if (given("--k")) j["k"] = f.k;
  if (given("--s")) j["s"] = f.s;
  if (given("--eps")) j["eps"] = f.eps;
  if (given("--k-max")) j["k_max"] = f.k_max;
  if (given("--trials")) j["trials"] = f.trials;
  if (given("--width")) j["width"] = f.width;
  return j;
}

displab::Config load_config(const std::string& experiment, CLI::App* sub, const Flags& f) {
  json j = json::object();
  if (!f.config_path.empty()) {
    std::ifstream in(f.config_path);
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw displab::ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    displab::config_from_json(j, true);
    if (j.at("experiment") != experiment)
      throw displab::ConfigError("config is for experiment '" + j.at("experiment").get<std::string>() +
                                 "', not '" + experiment + "'");
  }
  j.update(flag_json(sub, f));
  j["experiment"] = experiment;
  return displab::resolve(displab::config_from_json(j, false));
}

// Echo auto-resolved grids and node counts; budget violations surface here, before any output.
void print_plan(const displab::Config& c) {
  using namespace dispersive;
  const auto phase = parse_phase<double>(c.phase, c.dim);
  if (c.experiment == "scaling" || c.experiment == "transference") {
    SweepBudget<double> b;
    b.t_max = c.T_max;
    b.side_length = c.L;
    b.points_per_axis = c.N;
    b.force = c.force;
    for (double R : c.R) {
      const auto g = sweep_grid(c.dim, phase, R, b);
      const int nt = c.Nt ? *c.Nt : time_node_count(phase, R, c.T_max, *c.nt_factor, *c.nt_min, *c.nt_max);
      progress("R = " + std::to_string(R) + ": L = " + std::to_string(g.length) + ", N = " + std::to_string(g.n) +
               ", Nt = " + std::to_string(nt));
    }
  } else if (c.experiment == "convergence") {
    progress("L = " + std::to_string(*c.L) + ", N = " + std::to_string(*c.N) +
             ", node spacing = 2^-8 / " + std::to_string(*c.Nt));
  }
}

void write_file(const fs::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::ios_base::failure("cannot open " + p.string() + " for writing");
  out << body;
  out.close();
  if (!out) throw std::ios_base::failure("failed writing " + p.string());
}

int run(const std::string& experiment, CLI::App* sub, const Flags& f) {
  displab::Config c;
  try {
    c = load_config(experiment, sub, f);
  } catch (const displab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }
  if (c.output.empty()) {
    const char* env = std::getenv("DISPLAB_OUTPUT_DIR");
    c.output = env && *env ? env : ".";
  }
  progress("displab " + experiment + " (" + displab::versions_string() + ")");

  displab::Report rep;
  try {
    print_plan(c);
    rep = displab::run_experiment(c, progress);
  } catch (const dispersive::AliasingError& e) {
    std::cerr << "aliasing budget: " << e.what() << " (use --force to override)\n";
    return kAliasing;
  } catch (const displab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    const fs::path dir(c.output);
    fs::create_directories(dir);
    write_file(dir / (experiment + ".csv"), displab::to_csv(rep.table));
    write_file(dir / (experiment + ".json"), displab::to_json(rep).dump(2) + "\n");
    progress("wrote " + (dir / (experiment + ".csv")).string() + " and " + (dir / (experiment + ".json")).string());
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }

  for (const auto& ch : rep.checks)
    std::cout << (ch.pass ? "PASS  " : "FAIL  ") << ch.name << "  (value " << displab::fmt_real(ch.value)
              << ", threshold " << displab::fmt_real(ch.threshold) << ")\n";
  std::cout << rep.passed() << " passed, " << rep.failed() << " failed in " << rep.seconds << " s\n";
  return rep.all_pass() ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical experiments on maximal estimates for dispersive propagators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", displab::versions_string());
  app.add_flag("-q,--quiet", g_quiet, "suppress progress on stderr");

  Flags flags;
  std::vector<std::pair<std::string, CLI::App*>> subs;
  const std::map<std::string, std::string> help{
      {"verify", "fast invariant suite over every module"},
      {"kernel-decay", "log-log decay of the truncated kernel K(z)"},
      {"nonstationary", "integration-by-parts probes: linear phase and far field"},
      {"scaling", "maximal-norm scaling sweep over R (local or global)"},
      {"transference", "local and global sweeps with the transference assertion"},
      {"lp-summation", "per-level decay of weighted Littlewood-Paley pieces"},
      {"convergence", "sup_{0<t<delta} |T_t f - f| on B(0,1) as delta shrinks"}};
  for (const auto& name : displab::kExperiments) {
    CLI::App* sub = app.add_subcommand(name, help.at(name));
    add_flags(sub, flags);
    subs.emplace_back(name, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }
  for (auto& [name, sub] : subs)
    if (sub->parsed()) return run(name, sub, flags);
  return kConfig;
}
