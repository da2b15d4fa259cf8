#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dispersive/phase.hpp"

#include <random>

using namespace dispersive;

TEST_CASE("builtin values and gradients") {
  auto s = builtin_phase<double>("schrodinger", 2);
  CHECK(s(make_point(1.0, 0.0)) == doctest::Approx(1.0));
  CHECK(s.grad(make_point(1.0, 0.0))(0) == doctest::Approx(2.0));
  CHECK(s.grad(make_point(1.0, 0.0))(1) == doctest::Approx(0.0));

  auto w = builtin_phase<double>("wave", 2);
  CHECK(w(make_point(3.0, 4.0)) == doctest::Approx(5.0));
  CHECK(w.grad(make_point(3.0, 4.0))(0) == doctest::Approx(0.6));
  CHECK(w.grad(make_point(3.0, 4.0))(1) == doctest::Approx(0.8));

  auto a = builtin_phase<double>("airy", 1);
  CHECK(a(make_point(-2.0)) == doctest::Approx(-8.0));
  CHECK(a.grad(make_point(-2.0))(0) == doctest::Approx(12.0));

  CHECK(s(make_point(0.0, 0.0)) == 0.0);
  CHECK(w(make_point(0.0)) == 0.0);
}

TEST_CASE("builtin errors and parsing") {
  CHECK_THROWS_AS(builtin_phase<double>("klein-gordon", 1), std::invalid_argument);
  CHECK_THROWS_AS(builtin_phase<double>("airy", 2), std::invalid_argument);
  CHECK_THROWS_AS(builtin_phase<double>("fractional", 1, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(builtin_phase<double>("wave", 3), std::invalid_argument);

  auto f = parse_phase<double>("fractional:a=1.5", 2);
  CHECK(f.degree == 1.5);
  CHECK(f(make_point(4.0, 0.0)) == doctest::Approx(8.0));
  CHECK(parse_phase<double>("schrodinger", 1).degree == 2.0);
  CHECK_THROWS_AS(parse_phase<double>("fractional:b=2", 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_phase<double>("fractional:a=x", 1), std::invalid_argument);
  CHECK_THROWS_AS(parse_phase<double>("wave:a=2", 1), std::invalid_argument);
}

TEST_CASE("homogeneity") {
  for (const char* name : {"wave", "schrodinger"})
    for (int dim : {1, 2}) CHECK(check_homogeneity(builtin_phase<double>(name, dim), 1000, 3) < 1e-12);
  CHECK(check_homogeneity(builtin_phase<double>("airy", 1), 1000, 3) < 1e-12);
  CHECK(check_homogeneity(builtin_phase<double>("fractional", 2, 1.5), 1000, 3) < 1e-9);

  auto a = builtin_phase<double>("airy", 1);
  CHECK(a(make_point(2.0)) == 8 * a(make_point(1.0)));

  PhaseFn<double> bad = builtin_phase<double>("schrodinger", 1);
  bad.eval = [](const Point<double>& xi) { return xi.squaredNorm() + 1; };
  CHECK(check_homogeneity(bad, 100, 1) > 0.1);
  CHECK_THROWS_AS(check_homogeneity(bad, 0, 1), std::invalid_argument);
}

TEST_CASE("derived constants") {
  auto s = derived_constants(builtin_phase<double>("schrodinger", 2));
  CHECK(s.m == 2.0);
  CHECK(s.M == 2.0);
  CHECK(s.kappa == 32.0);
  auto w = derived_constants(builtin_phase<double>("wave", 1));
  CHECK(w.m == 1.0);
  CHECK(w.kappa == 4.0);
  auto a = derived_constants(builtin_phase<double>("airy", 1));
  CHECK(a.m == 3.0);
  CHECK(a.M == 3.0);
  CHECK(a.kappa == 192.0);

  // Sampled path for a user phase agrees with the closed form.
  PhaseFn<double> user = builtin_phase<double>("fractional", 2, 1.5);
  user.closed_form.reset();
  auto u = derived_constants(user, 1024);
  CHECK(std::abs(u.m - 1.5) < 1e-9);
  CHECK(std::abs(u.M - 1.5) < 1e-9);
  CHECK(u.kappa / u.M == std::pow(4.0, 1.5));
  CHECK_THROWS_AS(derived_constants(user, 10), std::invalid_argument);

  PhaseFn<double> flat = user;
  flat.grad = [](const Point<double>& xi) -> Point<double> { return Point<double>::Zero(xi.size()); };
  CHECK_THROWS_AS(derived_constants(flat), std::domain_error);
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> logr(std::log(0.1), std::log(10.0)), ang(0, 2 * std::numbers::pi);
  std::vector<PhaseFn<double>> phases{builtin_phase<double>("wave", 2), builtin_phase<double>("schrodinger", 2),
                                      builtin_phase<double>("fractional", 2, 1.5),
                                      builtin_phase<double>("airy", 1), builtin_phase<double>("schrodinger", 1)};
  for (const auto& p : phases)
    for (int s = 0; s < 100; ++s) {
      const double r = std::exp(logr(rng)), th = ang(rng);
      const Point<double> xi = p.dim == 1 ? make_point(th < std::numbers::pi ? r : -r)
                                          : make_point(r * std::cos(th), r * std::sin(th));
      const Point<double> g = p.grad(xi);
      const double d = 1e-6 * r;
      Point<double> fd(p.dim);
      for (int a = 0; a < p.dim; ++a) {
        Point<double> up = xi, dn = xi;
        up(a) += d;
        dn(a) -= d;
        fd(a) = (p.eval(up) - p.eval(dn)) / (2 * d);
      }
      CHECK((fd - g).norm() <= 1e-6 * g.norm());
    }
}

TEST_CASE("derivative bounds") {
  auto s = check_derivative_bounds(builtin_phase<double>("schrodinger", 2));
  CHECK(s.derivative_bound_consts[2] == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(s.min_grad == doctest::Approx(2.0));
  CHECK(s.bounded);

  auto w = check_derivative_bounds(builtin_phase<double>("wave", 1));
  CHECK(w.derivative_bound_consts[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(w.bounded);

  auto a = check_derivative_bounds(builtin_phase<double>("airy", 1));
  CHECK(a.derivative_bound_consts[2] == doctest::Approx(6.0).epsilon(1e-4));
  CHECK(a.min_grad == 3.0);
  CHECK(a.homogeneity_dev < 1e-12);
  for (const auto& [order, c] : a.derivative_bound_consts) {
    CHECK(std::isfinite(c));
    CHECK(c >= 0);
  }

  // |xi|^2 + |xi|^4 labelled degree 2: the order-0 ratio grows with |xi|.
  PhaseFn<double> grow = builtin_phase<double>("schrodinger", 1);
  grow.eval = [](const Point<double>& xi) { return xi.squaredNorm() + std::pow(xi.squaredNorm(), 2); };
  CHECK_FALSE(check_derivative_bounds(grow).bounded);
}

TEST_CASE("velocity spread") {
  CHECK(velocity_spread(builtin_phase<double>("schrodinger", 1)) == 4.0);
  CHECK(velocity_spread(builtin_phase<double>("wave", 2)) == 2.0);
  CHECK(velocity_spread(builtin_phase<double>("airy", 1)) == 3.0);
  PhaseFn<double> user = builtin_phase<double>("schrodinger", 2);
  user.closed_form_slope_range.reset();
  CHECK(velocity_spread(user) == doctest::Approx(4.0));
}
