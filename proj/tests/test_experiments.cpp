#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "experiments.hpp"

#include <cmath>
#include <numbers>

using namespace displab;

namespace {

Config resolved(json j) { return resolve(config_from_json(j, true)); }

}  // namespace

TEST_CASE("config parsing and validation") {
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}}, true), ConfigError);
  CHECK_NOTHROW(config_from_json(json{{"experiment", "verify"}}, false));
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}, {"phase", "wave"}, {"colour", 1}}, true),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}, {"phase", "wave"}, {"dim", 1.5}}, true),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}, {"phase", 2}}, true), ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}, {"phase", "wave"}, {"R", "4,8"}}, true),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json(json::array(), false), ConfigError);
  CHECK_THROWS_AS(
      config_from_json(json{{"experiment", "verify"}, {"phase", "wave"}, {"tolerances", {{"slack", 1.0}}}}, true),
      ConfigError);
  CHECK_THROWS_AS(config_from_json(json{{"experiment", "verify"}, {"phase", "wave"}, {"seed", -1}}, true),
                  ConfigError);

  auto c = config_from_json(json{{"experiment", "scaling"},
                                 {"phase", "fractional:a=1.5"},
                                 {"R", {2, 4}},
                                 {"tolerances", {{"lp_slack", 0.1}}}},
                            true);
  CHECK(c.phase == "fractional:a=1.5");
  CHECK(c.R == std::vector<double>{2, 4});
  CHECK(c.tol.lp_slack == 0.1);
  CHECK(c.tol.transference_margin == 0.1);

  auto bad = [](json j) { return resolved(std::move(j)); };
  CHECK_THROWS_AS(bad({{"experiment", "nope"}, {"phase", "wave"}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "verify"}, {"phase", "quartic"}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "verify"}, {"phase", "wave"}, {"dim", 3}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "verify"}, {"phase", "airy"}, {"dim", 2}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "scaling"}, {"phase", "wave"}, {"N", 48}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "scaling"}, {"phase", "wave"}, {"R", {4, 6}}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "scaling"}, {"phase", "wave"}, {"R", {8, 4}}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "scaling"}, {"phase", "wave"}, {"R", {4}}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "scaling"}, {"phase", "wave"}, {"mode", "both"}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "verify"}, {"phase", "wave"}, {"T_max", 0}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "verify"}, {"phase", "wave"}, {"eps", -0.1}}), ConfigError);
  CHECK_THROWS_AS(bad({{"experiment", "nonstationary"}, {"phase", "wave"}, {"dim", 2}}), ConfigError);
}

TEST_CASE("auto fields resolve per experiment") {
  auto s = resolved({{"experiment", "scaling"}, {"phase", "schrodinger"}});
  CHECK(s.R == std::vector<double>{4, 8, 16, 32, 64});
  CHECK(*s.nt_factor == 0.5);
  CHECK(*s.rounds == 6);
  CHECK(!s.L);
  CHECK(!s.N);

  auto w = resolved({{"experiment", "transference"}, {"phase", "wave"}});
  CHECK(*w.nt_factor == 8);

  auto a = resolved({{"experiment", "scaling"}, {"phase", "airy"}, {"mode", "global"}});
  CHECK(a.R == std::vector<double>{4, 8, 16, 32});
  CHECK(*a.nt_factor == 1.0 / 128);
  CHECK(*a.nt_min == 1024);
  CHECK(*a.nt_max == 2048);
  CHECK(*a.rounds == 0);

  auto cv = resolved({{"experiment", "convergence"}, {"phase", "schrodinger"}});
  CHECK(*cv.N == 4096);
  CHECK(*cv.L == doctest::Approx(64 * std::numbers::pi));
  CHECK(*cv.Nt == 64);

  auto ns = resolved({{"experiment", "nonstationary"}, {"phase", "schrodinger"}});
  CHECK(ns.R == std::vector<double>{4, 8, 16});

  auto echo = config_to_json(s);
  CHECK(echo["L"] == "auto");
  CHECK(echo["Nt"] == "auto");
  CHECK(echo["nt_factor"] == 0.5);
}

TEST_CASE("formatting") {
  CHECK(fmt_real(1.0 / 3) == "3.333333333333e-01");
  CHECK(fmt_real(-2.5e-300) == "-2.500000000000e-300");
  CHECK(fmt_real(std::nan("")) == "nan");
  CHECK(fmt_real(-INFINITY) == "-inf");
  CHECK(fmt_int(-42) == "-42");
  Table t{{"a", "b"}, {{"x,y", "say \"hi\""}, {"1", "2"}}};
  CHECK(to_csv(t) == "a,b\n\"x,y\",\"say \"\"hi\"\"\"\n1,2\n");

  Report r;
  r.experiment = "verify";
  r.config = resolved({{"experiment", "verify"}, {"phase", "wave"}});
  r.checks = {Check{"one", true, 1.0 / 3, 1, ""}, Check{"two", false, std::nan(""), 0, "x"}};
  CHECK(r.passed() == 1);
  CHECK(r.failed() == 1);
  CHECK(!r.all_pass());
  auto j = to_json(r);
  CHECK(j["checks"][0]["value"].get<double>() == std::stod("3.333333333333e-01"));
  CHECK(j["checks"][1]["value"].is_null());
  CHECK(j["all_pass"] == false);
  CHECK(j["versions"]["eigen"].get<std::string>().size() >= 5);
}

TEST_CASE("kernel-decay report") {
  auto c = resolved({{"experiment", "kernel-decay"}, {"phase", "schrodinger"}});
  auto r = run_experiment(c);
  CHECK(r.table.rows.size() == 16);
  CHECK(r.all_pass());
  CHECK(r.table.header == std::vector<std::string>{"experiment", "phase", "a", "dim", "t", "z", "kernel_abs", "panels"});
  CHECK(r.table.rows.front()[5] == fmt_real(10.0));
  CHECK(r.table.rows.back()[5] == fmt_real(100.0));
  CHECK(to_csv(run_experiment(c).table) == to_csv(r.table));
}

TEST_CASE("scaling report: columns, running slope, determinism") {
  auto c = resolved({{"experiment", "scaling"},
                     {"phase", "schrodinger"},
                     {"R", {2, 4, 8}},
                     {"restarts", 1},
                     {"rounds", 1},
                     {"seed", 11}});
  auto r = run_experiment(c);
  REQUIRE(r.table.rows.size() == 3);
  CHECK(r.table.header ==
        std::vector<std::string>{"experiment", "phase", "a", "dim", "mode", "R", "norm", "slope_running", "seed"});
  CHECK(r.table.rows[0][7] == "nan");
  const double n2 = std::stod(r.table.rows[0][6]), n4 = std::stod(r.table.rows[1][6]);
  CHECK(std::stod(r.table.rows[1][7]) == doctest::Approx(std::log(n4 / n2) / std::log(2.0)).epsilon(1e-10));
  CHECK(r.table.rows[2][8] == "13");
  CHECK(r.summary["local"]["points"].size() == 3);
  CHECK(to_csv(run_experiment(c).table) == to_csv(r.table));

  auto g = c;
  g.mode = "global";
  auto rg = run_experiment(g);
  for (const auto& row : rg.table.rows) CHECK(std::stod(row[6]) >= 1 - 1e-8);
}

TEST_CASE("transference report carries both sweeps") {
  auto c = resolved({{"experiment", "transference"},
                     {"phase", "wave"},
                     {"R", {2, 4, 8}},
                     {"restarts", 1},
                     {"rounds", 1}});
  auto r = run_experiment(c);
  CHECK(r.table.rows.size() == 6);
  CHECK(r.summary.contains("transference"));
  CHECK(r.summary.contains("a1_log_gap_max"));
  bool has_a1 = false;
  for (const auto& ch : r.checks) has_a1 = has_a1 || ch.name.find("a = 1") != std::string::npos;
  CHECK(has_a1);
}

TEST_CASE("lp-summation report") {
  auto c = resolved({{"experiment", "lp-summation"}, {"phase", "schrodinger"}, {"k_max", 3}, {"trials", 2}});
  auto r = run_experiment(c);
  CHECK(r.table.rows.size() == 3);
  CHECK(r.summary["exponent"].get<double>() == doctest::Approx(0.7));
}

TEST_CASE("convergence rows") {
  auto zero = convergence_rows("schrodinger", 1, 256, 16 * std::numbers::pi, 1.0, 4, true);
  REQUIRE(zero.size() == 8);
  for (const auto& r : zero) {
    CHECK(r.value == 0);
    CHECK(r.relative == 0);
  }
  auto rows = convergence_rows("schrodinger", 1, 1024, 32 * std::numbers::pi, 1.0, 8);
  REQUIRE(rows.size() == 8);
  for (size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].delta == std::ldexp(1.0, -1 - int(i)));
    CHECK(rows[i].nodes == 8 << (7 - i));
    if (i > 0) CHECK(rows[i].value <= rows[i - 1].value);
  }
  // For small delta, sup_{t<=delta} |T_t f - f| ~ delta |phi(D) f| = delta |f''| pointwise, and
  // ||f''||_{L^2(-1,1)} = (int_{-1}^{1} (x^2 - 1)^2 e^{-x^2} dx)^{1/2} = 0.96762414 for f = e^{-x^2/2}.
  const double oracle = std::ldexp(0.96762414, -8);
  CHECK(rows.back().value == doctest::Approx(oracle).epsilon(0.01));
  CHECK(rows.back().relative == doctest::Approx(oracle / std::pow(std::numbers::pi, 0.25)).epsilon(0.01));
}
