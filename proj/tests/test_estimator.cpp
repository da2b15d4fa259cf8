#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "dispersive/estimator.hpp"
#include "test_support.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

using namespace dispersive;
using C = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
constexpr double pi = std::numbers::pi;

namespace {

// Columns: op applied to class basis vectors, scaled to the operator's norms.
CMatrix dense_operator(ClassOperator<double>& op, const std::vector<int>& node) {
  const Index n = op.dimension();
  const double dk = 1 / op.grid().length, h = op.grid().cell_volume();
  CMatrix A(op.grid().size(), n);
  for (Index k = 0; k < n; ++k) {
    CVector<double> e = CVector<double>::Zero(n);
    e[k] = 1;
    A.col(k) = op.apply(e, node) * std::sqrt(h / dk);
  }
  return A;
}

double top_singular_value(const CMatrix& A) { return Eigen::JacobiSVD<CMatrix>(A).singularValues()(0); }

}  // namespace

TEST_CASE("class operator adjoint and modes") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = make_grid(1, 256, 24.0);
  auto tg = TimeGrid<double>::uniform(1.0, 40);
  auto tf = random_time_field(g, tg, 3);
  const auto node = snap_indices(tf, tg);
  ClassOperator<double> ex(g, phase, InputClass<double>{2.0}, Region<double>::ball(3.0), tg, MultiplierMode::exact);
  ClassOperator<double> rec(g, phase, InputClass<double>{2.0}, Region<double>::ball(3.0), tg,
                            MultiplierMode::recurrence);
  const auto F = random_class_vector<double>(ex.dimension(), 1);
  const auto u = ex.apply(F, node);
  CHECK(test::rel_diff(rec.apply(F, node), u) < 1e-12);

  // <A F, v>_{L^2(space)} = <F, A* v> in the class inner product.
  CVector<double> v = test::random_space_field(g, 2).values;
  const C lhs = v.dot(u) * g.cell_volume();
  const C rhs = ex.adjoint(v, node).dot(F) / g.length;
  CHECK(std::abs(lhs - rhs) < 1e-12 * std::abs(lhs));
  CHECK(test::rel_diff(rec.adjoint(v, node), ex.adjoint(v, node)) < 1e-12);

  // Class round trip and norm.
  auto f = ex.to_field(F);
  CHECK(test::rel_diff(ex.from_field(f), F) < 1e-12);
  CHECK(ex.norm(F) == doctest::Approx(l2_norm(f)).epsilon(1e-12));
  for (Index k = 0; k < ex.dimension(); ++k) {
    const double r = g.wavenumber_norm(ex.support()[k]);
    CHECK(r >= 1.0);
    CHECK(r <= 4.0);
  }
}

TEST_CASE("linearized operator norm") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = make_grid(1, 256, 8 * pi);
  auto tg = TimeGrid<double>::from_nodes({0.0, 0.5, 1.0}, 1.0);
  auto zero = TimeField<double>::constant(g, 0.0, 1.0);

  auto iso = linearized_opnorm(zero, tg, phase, InputClass<double>{1.0}, Region<double>::all(), 200, 1e-10, 5);
  CHECK(std::abs(iso.value - 1) < 1e-8);

  auto ball = linearized_opnorm(zero, tg, phase, InputClass<double>{1.0}, Region<double>::ball(1.0), 500, 1e-12, 5);
  CHECK(ball.value < 1);
  const double again = linearized_ratio(ball.witness, ball.witness_tfield, tg, phase, Region<double>::ball(1.0));
  CHECK(std::abs(again / ball.value - 1) < 1e-8);
  for (size_t i = 1; i < ball.history.size(); ++i) CHECK(ball.history[i] >= ball.history[i - 1] * (1 - 1e-12));
}

TEST_CASE("power iteration matches a dense SVD on a 16-point grid") {
  for (const char* name : {"schrodinger", "wave"}) {
    const auto phase = builtin_phase<double>(name, 1);
    auto g = make_grid(1, 16, 16.0);
    auto tg = TimeGrid<double>::uniform(1.0, 4);
    for (int seed = 0; seed < 5; ++seed) {
      auto tf = random_time_field(g, tg, 100 + seed);
      const auto node = snap_indices(tf, tg);
      for (auto region : {Region<double>::all(), Region<double>::ball(3.0)}) {
        ClassOperator<double> op(g, phase, InputClass<double>{1.0}, region, tg, MultiplierMode::exact);
        const double svd = top_singular_value(dense_operator(op, node));
        auto est = linearized_opnorm(tf, tg, phase, InputClass<double>{1.0}, region, 5000, 1e-14, seed);
        CHECK(std::abs(est.value / svd - 1) < 1e-8);
        CHECK(std::abs(linearized_ratio(est.witness, est.witness_tfield, tg, phase, region) / est.value - 1) < 1e-8);
      }
    }
  }
}

TEST_CASE("maximal estimate: single node reduces to an isometry") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = make_grid(1, 256, 32.0);
  auto tg = TimeGrid<double>::uniform(0.7, 1);
  auto est = maximal_opnorm(g, 1.0, phase, Region<double>::all(), tg, MaximalOptions<double>{}, 3);
  CHECK(std::abs(est.value - 1) < 1e-8);
}

TEST_CASE("alternating maximization is monotone and witness-verified") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = budget_grid(1, phase, 4.0, 1.0);
  auto tg = TimeGrid<double>::uniform(1.0, time_node_count(phase, 4.0, 1.0, 0.5));
  for (int seed = 0; seed < 20; ++seed) {
    MaximalOptions<double> opt;
    opt.restarts = 2;
    opt.rounds = 4;
    auto region = seed % 2 ? Region<double>::ball(1.0) : Region<double>::all();
    auto est = maximal_opnorm(g, 4.0, phase, region, tg, opt, 1000 + seed);
    for (size_t r = 0; r < est.run_starts.size(); ++r) {
      const size_t end = r + 1 < est.run_starts.size() ? est.run_starts[r + 1] : est.history.size();
      for (size_t i = est.run_starts[r] + 1; i < end; ++i) CHECK(est.history[i] >= est.history[i - 1] - 1e-9);
    }
    CHECK(std::abs(maximal_ratio(est.witness, tg, phase, region) / est.value - 1) < 1e-8);
    if (region.kind == RegionKind::all) CHECK(est.value >= 1 - 1e-8);
  }
}

TEST_CASE("alternating maximization against exhaustive search over argmax patterns") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  auto g = make_grid(1, 16, 16.0);
  auto tg = TimeGrid<double>::from_nodes({0.5, 1.0}, 1.0);
  ClassOperator<double> op(g, phase, InputClass<double>{1.0}, Region<double>::all(), tg, MultiplierMode::exact);
  const CMatrix A0 = dense_operator(op, std::vector<int>(16, 0));
  const CMatrix A1 = dense_operator(op, std::vector<int>(16, 1));
  double brute = 0;
  for (unsigned p = 0; p < (1u << 16); ++p) {
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(A0.cols(), A0.cols());
    for (int x = 0; x < 16; ++x) {
      const auto row = ((p >> x) & 1u) ? A1.row(x) : A0.row(x);
      G += row.adjoint() * row;
    }
    brute = std::max(brute, std::sqrt(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(G).eigenvalues().maxCoeff()));
  }
  auto est = alternating_maximize(op, phase, 1.0, MaximalOptions<double>{}, 7);
  MESSAGE("brute " << brute << " alternating " << est.value);
  CHECK(brute > 1.0);
  CHECK(est.value <= brute * (1 + 1e-10));
  CHECK(std::abs(est.value / brute - 1) < 5e-2);
}

TEST_CASE("scaling fits and transference") {
  std::vector<std::pair<double, double>> pts;
  for (double R : {4.0, 8.0, 16.0, 32.0}) pts.emplace_back(R, 3 * std::pow(R, 0.25));
  auto fit = fit_scaling(pts);
  CHECK(fit.slope == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(std::exp(fit.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.max_residual < 1e-12);
  CHECK(fit.dropped == 1);
  // The dropped point does not influence the fit.
  pts[0].second = 100;
  CHECK(fit_scaling(pts).slope == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(fit_scaling(pts, false).slope < 0.25);
  CHECK_THROWS_AS(fit_scaling(std::vector<std::pair<double, double>>{{1.0, 1.0}}), std::invalid_argument);

  auto mk = [](double slope) {
    ScalingFit<double> f;
    for (double R : {4.0, 8.0, 16.0}) f.points.emplace_back(R, std::pow(R, slope));
    f.slope = slope;
    return f;
  };
  CHECK(transference_report(mk(0.25), mk(0.5), 2.0).pass);
  CHECK(transference_report(mk(0.4), mk(0.4), 1.0).pass);
  CHECK_FALSE(transference_report(mk(0.25), mk(2 * 0.25 + 0.5), 2.0).pass);
  auto other = mk(0.5);
  other.points.pop_back();
  CHECK_THROWS_AS(transference_report(mk(0.25), other, 2.0), std::invalid_argument);
}

TEST_CASE("scaling sweep plumbing") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  SweepBudget<double> b;
  b.nt_factor = 0.5;
  b.search.restarts = 2;
  b.search.rounds = 2;
  CHECK_THROWS_AS(scaling_sweep(phase, 1, {4.0, 6.0}, SweepMode::local, b), std::invalid_argument);
  CHECK_THROWS_AS(scaling_sweep(phase, 1, {8.0, 4.0}, SweepMode::local, b), std::invalid_argument);
  b.side_length = 20.0;
  CHECK_THROWS_AS(scaling_sweep(phase, 1, {2.0, 4.0}, SweepMode::global, b), AliasingError);
  b.force = true;
  CHECK_NOTHROW(sweep_grid(1, phase, 4.0, b));
  b.side_length.reset();
  b.force = false;

  int calls = 0;
  auto res = scaling_sweep(phase, 1, {1.0, 2.0, 4.0}, SweepMode::global, b,
                           [&](const SweepPoint<double>&) { ++calls; });
  CHECK(calls == 3);
  CHECK(res.points.size() == 3);
  for (const auto& p : res.points) {
    CHECK(p.norm >= 1 - 1e-8);
    CHECK(std::abs(p.witness_norm / p.norm - 1) < 1e-8);
    CHECK(p.refined_norm > 0);
    CHECK(p.grid.length >= required_side_length(phase, p.R, 1.0));
  }
  // Same seed, same numbers.
  auto again = scaling_sweep(phase, 1, {1.0, 2.0, 4.0}, SweepMode::global, b);
  for (size_t i = 0; i < 3; ++i) CHECK(again.points[i].norm == res.points[i].norm);
}

TEST_CASE("Littlewood-Paley summation pieces") {
  const auto phase = builtin_phase<double>("schrodinger", 1);
  // Constant time field, exponent 0: unimodular multiplier on P_1 f.
  auto g = budget_grid(1, phase, 2.0, 1.0);
  auto tg = TimeGrid<double>::uniform(1.0, 8);
  for (int s = 0; s < 5; ++s) {
    auto pk = project(random_annulus_field(g, 2.0, s), 1);
    auto tf = TimeField<double>::constant(g, tg.nodes[size_t(s)], 1.0);
    CHECK(l2_norm(apply_T_weighted(pk, tf, tg, phase, 0.0)) / l2_norm(pk) <= 1 + 1e-10);
  }

  // Tone at |xi| = 2^k: ratio <2^k>^{-w}.
  auto gt = make_grid(1, 64, 2 * pi);
  for (int k = 1; k <= 4; ++k) {
    auto tone = test::tone(gt, k == 0 ? 1 : (1 << k));
    auto tf = random_time_field(gt, tg, 5);
    const double w = 0.7;
    const double r = l2_norm(apply_T_weighted(tone, tf, tg, phase, w)) / l2_norm(tone);
    CHECK(r == doctest::Approx(std::pow(1 + std::ldexp(1.0, 2 * k), -w / 2)).epsilon(1e-12));
  }

  auto rep = lp_summation_check(phase, 0.25, 0.2, 4, tg, 11, 4);
  CHECK(rep.levels.size() == 4);
  CHECK(rep.exponent == doctest::Approx(0.7));
  CHECK(rep.slope <= -0.15);
  CHECK(rep.pass);
  CHECK_THROWS_AS(lp_summation_check(phase, 0.25, 0.0, 4, tg, 1), std::invalid_argument);
}
