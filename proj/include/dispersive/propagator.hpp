#pragma once

#include "dispersive/grid.hpp"
#include "dispersive/lpdecomp.hpp"
#include "dispersive/phase.hpp"
#include "dispersive/quadrature.hpp"
#include "dispersive/slice_engine.hpp"

#include <functional>

namespace dispersive {

template <typename Scalar>
struct MaximalResult {
  Grid<Scalar> grid;
  RVector<Scalar> sup_field;  // max_j |T_{t_j} f|
  TimeField<Scalar> argmax_tfield;
  std::vector<int> argmax_node;  // ties resolved to the smallest node index
};

template <typename Scalar>
using RadialWeight = std::function<Scalar(Scalar)>;

namespace detail {

template <typename Scalar>
std::vector<Index> all_indices(const Grid<Scalar>& g) {
  std::vector<Index> idx(g.size());
  for (Index i = 0; i < g.size(); ++i) idx[i] = i;
  return idx;
}

template <typename Scalar>
SliceEngine<Scalar> full_engine(const Grid<Scalar>& g, const PhaseFn<Scalar>& phase, std::vector<Scalar> times) {
  auto idx = all_indices(g);
  const RVector<Scalar> phi = phase_on_nodes(phase, g, idx);
  return SliceEngine<Scalar>(g, std::move(idx), phi, std::move(times), MultiplierMode::exact);
}

// w(|xi|) fhat(xi) as a vector over all grid nodes.
template <typename Scalar>
CVector<Scalar> weighted_spectrum(const Field<Scalar>& f, const RadialWeight<Scalar>& weight) {
  Field<Scalar> F = to_frequency(f);
  if (weight)
    for (Index i = 0; i < F.grid.size(); ++i) F.values[i] *= weight(F.grid.wavenumber_norm(i));
  return F.values;
}

// Shared gather pipeline: output(x) = [T_{t(x)} (w(D) f)](x).
template <typename Scalar>
Field<Scalar> gather(const Field<Scalar>& f, const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                     const PhaseFn<Scalar>& phase, const RadialWeight<Scalar>& weight) {
  if (!(tf.grid == f.grid)) throw std::invalid_argument("time field and data live on different grids");
  const std::vector<int> node = snap_indices(tf, tg);
  std::vector<char> used(tg.count(), 0);
  for (int j : node) used[j] = 1;
  std::vector<int> nodes;
  for (int j = 0; j < tg.count(); ++j)
    if (used[j]) nodes.push_back(j);
  auto engine = full_engine(f.grid, phase, tg.nodes);
  Field<Scalar> out = Field<Scalar>::zeros(f.grid, Side::space);
  engine.forward(weighted_spectrum(f, weight), nodes, [&](int j, const CVector<Scalar>& u) {
    for (Index x = 0; x < u.size(); ++x)
      if (node[x] == j) out.values[x] = u[x];
  });
  return out;
}

}  // namespace detail

// T_t f = inverse_transform(e^{i t phi} fhat).
template <typename Scalar>
Field<Scalar> apply_T(const Field<Scalar>& f, Scalar t, const PhaseFn<Scalar>& phase) {
  if (!std::isfinite(t)) throw std::invalid_argument("time must be finite");
  auto engine = detail::full_engine(f.grid, phase, std::vector<Scalar>{t});
  Field<Scalar> out = Field<Scalar>::zeros(f.grid, Side::space);
  engine.forward_all(to_frequency(f).values, [&](int, const CVector<Scalar>& u) { out.values = u; });
  return out;
}

template <typename Scalar>
Field<Scalar> apply_T_linearized(const Field<Scalar>& f, const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                                 const PhaseFn<Scalar>& phase) {
  return detail::gather(f, tf, tg, phase, RadialWeight<Scalar>());
}

template <typename Scalar>
MaximalResult<Scalar> maximal_function(const Field<Scalar>& f, const TimeGrid<Scalar>& tg,
                                       const PhaseFn<Scalar>& phase) {
  const Grid<Scalar>& g = f.grid;
  MaximalResult<Scalar> res{g, RVector<Scalar>::Constant(g.size(), Scalar(-1)), {}, std::vector<int>(g.size(), 0)};
  auto engine = detail::full_engine(g, phase, tg.nodes);
  engine.forward_all(to_frequency(f).values, [&](int j, const CVector<Scalar>& u) {
    for (Index x = 0; x < u.size(); ++x) {
      const Scalar a = std::abs(u[x]);
      if (a > res.sup_field[x]) {
        res.sup_field[x] = a;
        res.argmax_node[x] = j;
      }
    }
  });
  res.argmax_tfield = TimeField<Scalar>::from_nodes(g, tg, res.argmax_node);
  return res;
}

// R_{t(x)} f: the gather pipeline with the extra multiplier cutoff(|xi|), chi by default.
template <typename Scalar>
Field<Scalar> apply_R_lowfreq(const Field<Scalar>& f, const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                              const PhaseFn<Scalar>& phase,
                              const RadialWeight<Scalar>& cutoff = [](Scalar r) { return chi_radial(r); }) {
  return detail::gather(f, tf, tg, phase, cutoff);
}

// Gather pipeline with the extra multiplier <xi>^{-exponent}.
template <typename Scalar>
Field<Scalar> apply_T_weighted(const Field<Scalar>& f, const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                               const PhaseFn<Scalar>& phase, Scalar exponent) {
  if (!(exponent >= 0)) throw std::invalid_argument("weight exponent must be >= 0");
  return detail::gather(f, tf, tg, phase, RadialWeight<Scalar>([exponent](Scalar r) {
                          return std::pow(1 + r * r, -exponent / 2);
                        }));
}

// ---------------------------------------------------------------------------
// Budgets

class AliasingError : public std::runtime_error {
 public:
  AliasingError(const std::string& what, double required) : std::runtime_error(what), required_length(required) {}
  double required_length;
};

template <typename Scalar>
struct BudgetParams {
  Scalar data_support = 2;  // diameter of the region the data is meant to live on
  Scalar margin = 16;
};

// L >= data_support + spread (2R)^{a-1} T_max + margin, spread the width of
// the range of phase slopes on the unit sphere.
template <typename Scalar>
Scalar required_side_length(const PhaseFn<Scalar>& phase, Scalar R_max, Scalar T_max,
                            const BudgetParams<Scalar>& bp = {}) {
  const Scalar travel = velocity_spread(phase) * std::pow(2 * R_max, phase.degree - 1) * T_max;
  return bp.data_support + travel + bp.margin;
}

template <typename Scalar>
void check_aliasing_budget(const Grid<Scalar>& g, const PhaseFn<Scalar>& phase, Scalar R_max, Scalar T_max,
                           const BudgetParams<Scalar>& bp = {}) {
  const Scalar need = required_side_length(phase, R_max, T_max, bp);
  if (g.length < need)
    throw AliasingError("torus side " + std::to_string(double(g.length)) + " is below the aliasing budget; need L >= " +
                            std::to_string(double(need)),
                        double(need));
  if (!(g.nyquist() > 2 * R_max))
    throw AliasingError("grid Nyquist frequency does not exceed 2R = " + std::to_string(double(2 * R_max)),
                        double(need));
}

// Smallest power-of-two N >= 16 resolving |xi| <= 2R on a side that meets the budget.
template <typename Scalar>
Grid<Scalar> budget_grid(int dim, const PhaseFn<Scalar>& phase, Scalar R_max, Scalar T_max,
                         const BudgetParams<Scalar>& bp = {}) {
  const Scalar L = required_side_length(phase, R_max, T_max, bp);
  int n = 16;
  while (!(std::numbers::pi_v<Scalar> * n / L > 2 * R_max)) n *= 2;
  return make_grid<Scalar>(dim, n, L);
}

// Nt = clamp(ceil(factor * ceil(T_max (2R)^a)), nt_min, nt_max); factor 8 keeps the
// phase increment between nodes at 1/8 radian over A(R).
template <typename Scalar>
int time_node_count(const PhaseFn<Scalar>& phase, Scalar R_max, Scalar T_max, Scalar factor = 8, int nt_min = 1,
                    int nt_max = 1 << 20) {
  const Scalar base = std::ceil(T_max * std::pow(2 * R_max, phase.degree));
  const long long nt = static_cast<long long>(std::ceil(factor * base));
  return int(std::clamp<long long>(nt, nt_min, nt_max));
}

// ---------------------------------------------------------------------------
// Direct quadrature probes

template <typename Scalar>
struct KernelValue {
  std::complex<Scalar> value;
  int panels = 0;
};

// K(z) = (2 pi)^{-dim} integral cutoff(|xi|) e^{i z.xi + i t phi(xi)} dxi, cutoff supported in |xi| <= 2.
// 2D uses polar coordinates with the trapezoid rule in angle.
template <typename Scalar>
KernelValue<Scalar> kernel_quadrature(const Point<Scalar>& z, Scalar t, const PhaseFn<Scalar>& phase,
                                      const RadialWeight<Scalar>& cutoff = [](Scalar r) { return chi_radial(r); },
                                      Scalar rel_tol = Scalar(1e-8)) {
  using C = std::complex<Scalar>;
  const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
  if (z.size() != phase.dim) throw std::invalid_argument("kernel point dimension does not match phase");
  if (phase.dim == 1) {
    auto f = [&](Scalar xi) -> C {
      const Scalar w = cutoff(std::abs(xi));
      if (w == 0) return C(0);
      return w * std::polar(Scalar(1), z(0) * xi + t * phase(make_point(xi)));
    };
    const std::vector<Scalar> breaks{-2, -1, 0, 1, 2};
    auto r = adaptive_gauss<Scalar>(f, breaks, rel_tol);
    return {r.value / two_pi, r.panels};
  }
  // Angular resolution grows with |z| + t max|grad phi| on |xi| <= 2.
  std::complex<Scalar> prev(0);
  for (int n_theta = 64, level = 0; level < 10; n_theta *= 2, ++level) {
    auto radial = [&](Scalar r) -> C {
      const Scalar w = cutoff(r);
      if (w == 0 || r == 0) return C(0);
      C acc(0);
      for (int k = 0; k < n_theta; ++k) {
        const Scalar th = two_pi * k / n_theta;
        const Point<Scalar> xi = make_point(r * std::cos(th), r * std::sin(th));
        acc += std::polar(Scalar(1), z.dot(xi) + t * phase(xi));
      }
      return w * r * acc * (two_pi / n_theta);
    };
    auto res = adaptive_gauss<Scalar>(radial, std::vector<Scalar>{0, 1, 2}, rel_tol);
    if (level > 0 && std::abs(res.value - prev) <= rel_tol * std::abs(res.value) + Scalar(1e-14) * res.abs_integral)
      return {res.value / (two_pi * two_pi), res.panels};
    prev = res.value;
  }
  throw std::runtime_error("angular quadrature did not converge");
}

// Smooth bump F, supported in [breaks.front(), breaks.back()] and smooth
// between consecutive breaks; derivatives up to order 6.
template <typename Scalar>
struct BumpSpec {
  std::string name;
  std::vector<Scalar> breaks;
  std::function<Jet<Scalar, 6>(Scalar)> jet;  // Taylor jet of F at xi

  Scalar derivative(Scalar xi, int k) const {
    if (k < 0 || k > 6) throw std::invalid_argument("bump derivatives available up to order 6");
    return jet(xi).derivative(k);
  }
};

// theta2 = lambda on the positive half-line, supported in [1/2, 2].
template <typename Scalar>
BumpSpec<Scalar> theta2_bump() {
  return {"theta2", {Scalar(0.5), 1, 2},
          [](Scalar xi) { return theta_split().theta2(Jet<Scalar, 6>::variable(xi)); }};
}

// theta = theta1 + theta2 + theta3 on the line, supported in 1/4 <= |xi| <= 4.
template <typename Scalar>
BumpSpec<Scalar> theta_bump() {
  return {"theta",
          {-4, -2, -1, Scalar(-0.5), Scalar(-0.25), Scalar(0.25), Scalar(0.5), 1, 2, 4},
          [](Scalar xi) { return theta_split().theta(Jet<Scalar, 6>::variable(xi)); }};
}

namespace detail {

// Jet of sign(x)^odd |x|^b about x0 != 0: |x0|^b sum_k binom(b, k) (e / x0)^k.
template <typename Scalar>
Jet<Scalar, 6> power_jet(Scalar x0, Scalar b, bool odd) {
  Jet<Scalar, 6> j;
  Scalar coef = std::pow(std::abs(x0), b) * (odd && x0 < 0 ? -1 : 1);
  for (int k = 0; k <= 6; ++k) {
    j.c(k) = coef;
    coef *= (b - k) / ((k + 1) * x0);
  }
  return j;
}

template <typename Scalar, int K>
Jet<Scalar, K> differentiate(const Jet<Scalar, K>& a) {
  Jet<Scalar, K> r;
  for (int k = 0; k < K; ++k) r.c(k) = (k + 1) * a.c(k + 1);
  return r;
}

}  // namespace detail

// Phase family Phi_p(xi) with gradient; the probe needs |Phi_p'| bounded below on the bump.
template <typename Scalar>
struct PhaseFamily {
  std::string name;
  std::function<Scalar(Scalar, Scalar)> phi;   // (xi, p)
  std::function<Scalar(Scalar, Scalar)> dphi;  // (xi, p)
  // Optional Taylor jet of Phi_p' at xi; lets the probe integrate by parts exactly.
  std::function<Jet<Scalar, 6>(Scalar, Scalar)> dphi_jet;
};

template <typename Scalar>
PhaseFamily<Scalar> linear_phase_family() {
  return {"linear", [](Scalar xi, Scalar v) { return v * xi; }, [](Scalar, Scalar v) { return v; },
          [](Scalar, Scalar v) { return Jet<Scalar, 6>(v); }};
}

// Phi(xi) = d xi + rho phi(xi): the far-field phase of T_rho at separation d.
template <typename Scalar>
PhaseFamily<Scalar> far_field_family(const PhaseFn<Scalar>& phase, Scalar rho) {
  if (phase.dim != 1) throw std::invalid_argument("far-field family is one-dimensional");
  PhaseFamily<Scalar> fam{"far_field", [phase, rho](Scalar xi, Scalar d) { return d * xi + rho * phase(make_point(xi)); },
                          [phase, rho](Scalar xi, Scalar d) { return d + rho * phase.grad(make_point(xi))(0); },
                          {}};
  // Built-ins have closed-form derivatives off the origin (the bump avoids it).
  if (phase.name == "airy") {
    fam.dphi_jet = [rho](Scalar xi, Scalar d) {
      const auto x = Jet<Scalar, 6>::variable(xi);
      return Jet<Scalar, 6>(d) + Jet<Scalar, 6>(3 * rho) * x * x;
    };
  } else if (phase.name == "wave" || phase.name == "schrodinger" || phase.name == "fractional") {
    const Scalar a = phase.degree;
    fam.dphi_jet = [rho, a](Scalar xi, Scalar d) {
      return Jet<Scalar, 6>(d) + Jet<Scalar, 6>(rho * a) * detail::power_jet(xi, a - 1, true);
    };
  }
  return fam;
}

template <typename Scalar>
struct DecayRow {
  Scalar param = 0;
  Scalar min_grad = 0;
  Scalar integral_abs = 0;
  Scalar bound = 0;  // sum_{j<=k} integral |F^{(j)}| |Phi'|^{-k}
  Scalar ratio = 0;  // integral_abs / bound
};

template <typename Scalar>
struct DecayReport {
  int k = 0;
  std::vector<DecayRow<Scalar>> rows;
  Scalar fitted_exponent = 0;  // -slope of log|I| against log min|Phi'|
  Scalar max_ratio = 0;
};

template <typename Scalar>
Scalar loglog_slope(const std::vector<Scalar>& x, const std::vector<Scalar>& y) {
  const Index n = Index(x.size());
  if (n < 2) throw std::invalid_argument("slope fit needs at least two points");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> A(n, 2);
  RVector<Scalar> b(n);
  for (Index i = 0; i < n; ++i) {
    A(i, 0) = std::log(x[i]);
    A(i, 1) = 1;
    b[i] = std::log(y[i]);
  }
  return A.colPivHouseholderQr().solve(b)(0);
}

// |integral F e^{i Phi_p}| and the integration-by-parts bound for each parameter p (1D).
// With ibp_order = m > 0 the integral is evaluated as i^m integral G_m e^{i Phi_p},
// G_m = (d/dxi (1/Phi_p'))^m F, which is exact since F vanishes to all orders at the
// ends of its support; quadrature round-off then scales with integral |G_m| instead of
// integral |F|, which matters once |integral| is far below 1e-15.
template <typename Scalar>
DecayReport<Scalar> nonstationary_decay_probe(const BumpSpec<Scalar>& F, const PhaseFamily<Scalar>& family, int k,
                                              const std::vector<Scalar>& params, int ibp_order = 0) {
  if (k < 0 || k > 6) throw std::invalid_argument("derivative order k must be in [0, 6]");
  if (ibp_order < 0 || ibp_order > 6) throw std::invalid_argument("integration-by-parts order must be in [0, 6]");
  if (ibp_order > 0 && !family.dphi_jet) throw std::invalid_argument("phase family has no derivative jets");
  DecayReport<Scalar> rep;
  rep.k = k;
  std::vector<Scalar> xs, ys;
  for (Scalar p : params) {
    DecayRow<Scalar> row;
    row.param = p;
    // Gradient floor on the support, sampled densely.
    row.min_grad = std::numeric_limits<Scalar>::infinity();
    const Scalar lo = F.breaks.front(), hi = F.breaks.back();
    for (int q = 0; q <= 8192; ++q) {
      const Scalar xi = lo + (hi - lo) * q / 8192;
      if (F.derivative(xi, 0) != 0) row.min_grad = std::min(row.min_grad, std::abs(family.dphi(xi, p)));
    }
    if (!(row.min_grad > 0)) throw std::domain_error("phase gradient vanishes on the bump support");
    auto integrand = [&](Scalar xi) {
      Jet<Scalar, 6> g = F.jet(xi);
      if (ibp_order > 0) {
        const Jet<Scalar, 6> dp = family.dphi_jet(xi, p);
        for (int m = 0; m < ibp_order; ++m) g = detail::differentiate(g / dp);
      }
      return g.value() * std::polar(Scalar(1), family.phi(xi, p));
    };
    row.integral_abs = std::abs(adaptive_gauss<Scalar>(integrand, F.breaks, Scalar(1e-10), Scalar(1e-15)).value);
    Scalar bound = 0;
    for (int j = 0; j <= k; ++j) {
      auto term = [&](Scalar xi) {
        return std::complex<Scalar>(std::abs(F.derivative(xi, j)) * std::pow(std::abs(family.dphi(xi, p)), -Scalar(k)));
      };
      bound += adaptive_gauss<Scalar>(term, F.breaks, Scalar(1e-8)).value.real();
    }
    row.bound = bound;
    row.ratio = row.integral_abs / bound;
    rep.max_ratio = std::max(rep.max_ratio, row.ratio);
    xs.push_back(row.min_grad);
    ys.push_back(row.integral_abs);
    rep.rows.push_back(row);
  }
  rep.fitted_exponent = params.size() >= 2 ? -loglog_slope(xs, ys) : Scalar(0);
  return rep;
}

}  // namespace dispersive
