#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dispersive/norms.hpp"
#include "dispersive/propagator.hpp"
#include "test_support.hpp"

#include <random>

using namespace dispersive;
using C = std::complex<double>;
constexpr double pi = std::numbers::pi;

namespace {

Field<double> field_of(const Grid<double>& g, const RVector<double>& v) { return {g, Side::space, v.cast<C>()}; }

// Fixed random spectrum on |xi| <= 3 for side 32, sampled on any N.
Field<double> smooth_random(const Grid<double>& g, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  Field<double> f{g, Side::space, CVector<double>::Zero(g.size())};
  const double dk = 2 * pi / g.length;
  for (int k = -15; k <= 15; ++k) {
    const C c(n(rng), n(rng));
    for (Index i = 0; i < g.size(); ++i) f.values[i] += c * std::polar(1.0, k * dk * g.position(i)(0));
  }
  return f;
}

// Time per unit cell of x, drawn from the node set.
TimeField<double> cell_times(const Grid<double>& g, const TimeGrid<double>& tg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, tg.count() - 1);
  std::vector<int> per_cell(size_t(g.length));
  for (auto& j : per_cell) j = pick(rng);
  std::vector<int> idx(g.size());
  for (Index i = 0; i < g.size(); ++i) {
    const double x = g.position(i)(0) + g.length / 2;
    idx[i] = per_cell[size_t(std::floor(x)) % per_cell.size()];
  }
  return TimeField<double>::from_nodes(g, tg, idx);
}

}  // namespace

TEST_CASE("Sobolev norm") {
  for (int dim : {1, 2}) {
    auto g = make_grid(dim, dim == 1 ? 256 : 32, 12.0);
    auto f = test::random_space_field(g, 3);
    const double l2 = restrict_norm(f, Region<double>::all(), 2.0);
    CHECK(std::abs(sobolev_norm(f, 0.0) / l2 - 1) < 1e-12);
    double prev = 0;
    for (double s : {-1.0, -0.5, 0.0, 0.25, 1.0, 2.0}) {
      const double v = sobolev_norm(f, s);
      CHECK(v >= prev);
      prev = v;
    }
  }
  auto gt = make_grid(1, 16, 2 * pi / std::sqrt(3.0));
  auto tone = test::tone(gt, 1);
  CHECK(sobolev_norm(tone, 1.0) == doctest::Approx(2 * l2_norm(tone)).epsilon(1e-12));
  CHECK_THROWS_AS(sobolev_norm(tone, std::numeric_limits<double>::infinity()), std::invalid_argument);
}

TEST_CASE("HL maximal function: constants and pointwise bounds") {
  for (int dim : {1, 2}) {
    auto g = make_grid(dim, dim == 1 ? 256 : 32, 16.0);
    // |1.5 + 2i| = 2.5 exactly.
    Field<double> c{g, Side::space, CVector<double>::Constant(g.size(), C(1.5, 2.0))};
    auto M = hl_maximal(c);
    CHECK((M.array() == 2.5).all());

    auto f = test::random_space_field(g, 5), h = test::random_space_field(g, 6);
    auto Mf = hl_maximal(f), Mh = hl_maximal(h);
    CHECK((Mf.array() >= f.values.cwiseAbs().array()).all());
    Field<double> scaled{g, Side::space, C(0, -2) * f.values};
    CHECK(hl_maximal(scaled) == 2 * Mf);
    Field<double> sum{g, Side::space, f.values + h.values};
    CHECK((hl_maximal(sum).array() <= (Mf + Mh).array() * (1 + 1e-12)).all());
  }
  auto g = make_grid(1, 64, 8.0);
  CHECK_THROWS_AS(hl_maximal(forward_transform(test::random_space_field(g, 1))), std::invalid_argument);
}

TEST_CASE("HL maximal function of a unit spike") {
  auto g = make_grid(1, 1024, 64.0);
  RVector<double> v = RVector<double>::Zero(g.size());
  v[0] = 1 / g.spacing();
  auto M = hl_maximal(field_of(g, v));
  for (Index i = 0; i < g.size(); ++i) {
    const double x = std::abs(g.position(i)(0));
    if (x < 4 * g.spacing() || x > g.length / 4) continue;
    const double ref = 1 / (2 * x);
    CHECK(M[i] <= 2 * ref);
    CHECK(M[i] >= ref / 2);
  }
}

TEST_CASE("HL maximal L2 bound") {
  auto g = make_grid(1, 512, 32.0);
  double worst = 0;
  for (int s = 0; s < 100; ++s) {
    auto f = test::random_space_field(g, 200 + s);
    worst = std::max(worst, l2_norm(field_of(g, hl_maximal(f))) / l2_norm(f));
  }
  CHECK(worst >= 1.0);
  CHECK(worst <= 4.0);
}

TEST_CASE("Lp ratio reports") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = make_grid(1, 256, 32.0);
  auto f = test::random_space_field(g, 8);
  CHECK(lp_ratio_report(f, f, 2.0, Region<double>::all()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(lp_ratio_report(f, f, 1.0, Region<double>::all()) == doctest::Approx(1.0).epsilon(1e-15));

  auto tg = TimeGrid<double>::from_nodes({0.0, 0.5, 1.0}, 1.0);
  for (int s = 0; s < 10; ++s) {
    auto h = test::random_space_field(g, 50 + s);
    auto r = apply_R_lowfreq(h, cell_times(g, tg, s), tg, phase);
    CHECK(lp_ratio_report(r, h, 2.0, Region<double>::all()) <= 1 + 1e-10);
  }

  // L^1 boundedness of R_{t(x)}: the max ratio over 50 draws is stable when N doubles.
  double worst[2] = {0, 0};
  for (int level = 0; level < 2; ++level) {
    auto gg = make_grid(1, level == 0 ? 256 : 512, 32.0);
    for (int s = 0; s < 50; ++s) {
      auto h = smooth_random(gg, 70 + s);
      auto r = apply_R_lowfreq(h, cell_times(gg, tg, 900 + s), tg, phase);
      worst[level] = std::max(worst[level], lp_ratio_report(r, h, 1.0, Region<double>::all()));
    }
  }
  CHECK(std::isfinite(worst[0]));
  CHECK(std::abs(worst[1] / worst[0] - 1) < 0.1);

  auto zero = Field<double>::zeros(g, Side::space);
  CHECK_THROWS_AS(lp_ratio_report(f, zero, 2.0, Region<double>::all()), std::invalid_argument);
  auto other = make_grid(1, 128, 32.0);
  CHECK_THROWS_AS(lp_ratio_report(test::random_space_field(other, 1), f, 2.0, Region<double>::all()),
                  std::invalid_argument);
}

TEST_CASE("HL maximal matches direct averaging") {
  for (int dim : {1, 2}) {
    auto g = make_grid(dim, dim == 1 ? 64 : 16, 8.0);
    auto f = test::random_space_field(g, 13);
    auto M = hl_maximal(f);
    const Index n = g.n;
    for (Index p = 0; p < g.size(); ++p) {
      double best = std::abs(f.values[p]);
      for (Index w = 2; w <= n / 2; w *= 2) {
        double s = 0;
        int cnt = 0;
        for (Index q = 0; q < g.size(); ++q) {
          Index d2 = 0;
          for (int a = 0; a < dim; ++a) {
            Index d = std::abs(g.axis_index(p, a) - g.axis_index(q, a));
            d = std::min(d, n - d);
            d2 += d * d;
          }
          if (d2 < w * w) {
            s += std::abs(f.values[q]);
            ++cnt;
          }
        }
        best = std::max(best, s / cnt);
      }
      CHECK(M[p] == doctest::Approx(best).epsilon(1e-12));
    }
  }
}
