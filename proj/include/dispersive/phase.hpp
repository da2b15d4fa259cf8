#pragma once

#include "dispersive/grid.hpp"

#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>

namespace dispersive {

template <typename Scalar>
struct PhaseConstants {
  Scalar m = 0;      // min |grad phi| on the unit sphere
  Scalar M = 0;      // max |grad phi| on the unit sphere
  Scalar kappa = 0;  // 4^a M
};

template <typename Scalar>
struct PhaseFn {
  std::string name;
  Scalar degree = 1;
  int dim = 1;
  std::function<Scalar(const Point<Scalar>&)> eval;
  std::function<Point<Scalar>(const Point<Scalar>&)> grad;
  std::optional<PhaseConstants<Scalar>> closed_form;
  // Per-axis range of d(phi)/d(xi_axis) over the unit sphere, as [lo, hi].
  // Known for built-ins; sampled otherwise.
  std::optional<std::pair<Scalar, Scalar>> closed_form_slope_range;

  // phi(0) := 0 for every phase.
  Scalar operator()(const Point<Scalar>& xi) const {
    if (xi.squaredNorm() == 0) return 0;
    return eval(xi);
  }
};

template <typename Scalar>
struct PhaseCheckReport {
  Scalar homogeneity_dev = 0;
  std::map<int, Scalar> derivative_bound_consts;
  Scalar min_grad = 0;
  bool bounded = true;
};

namespace detail {

template <typename Scalar>
PhaseFn<Scalar> power_phase(const std::string& name, Scalar a, int dim) {
  PhaseFn<Scalar> p;
  p.name = name;
  p.degree = a;
  p.dim = dim;
  p.eval = [a](const Point<Scalar>& xi) { return std::pow(xi.norm(), a); };
  p.grad = [a](const Point<Scalar>& xi) -> Point<Scalar> {
    const Scalar r = xi.norm();
    if (r == 0) return Point<Scalar>::Zero(xi.size());
    return (a * std::pow(r, a - 2)) * xi;
  };
  p.closed_form = PhaseConstants<Scalar>{a, a, std::pow(Scalar(4), a) * a};
  p.closed_form_slope_range = std::make_pair(-a, a);
  return p;
}

}  // namespace detail

// Built-ins: wave |xi|, schrodinger |xi|^2, fractional |xi|^a (a >= 1), airy xi^3 (1D).
template <typename Scalar = double>
PhaseFn<Scalar> builtin_phase(const std::string& name, int dim, Scalar a = 0) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("phase dimension must be 1 or 2");
  if (name == "wave") return detail::power_phase<Scalar>("wave", 1, dim);
  if (name == "schrodinger") return detail::power_phase<Scalar>("schrodinger", 2, dim);
  if (name == "fractional") {
    if (!(a >= 1)) throw std::invalid_argument("fractional phase requires a >= 1");
    return detail::power_phase<Scalar>("fractional", a, dim);
  }
  if (name == "airy") {
    if (dim != 1) throw std::invalid_argument("airy phase is only defined in dimension 1");
    PhaseFn<Scalar> p;
    p.name = "airy";
    p.degree = 3;
    p.dim = 1;
    p.eval = [](const Point<Scalar>& xi) { return xi(0) * xi(0) * xi(0); };
    p.grad = [](const Point<Scalar>& xi) { return make_point<Scalar>(3 * xi(0) * xi(0)); };
    p.closed_form = PhaseConstants<Scalar>{3, 3, 64 * Scalar(3)};
    // Every packet moves the same way: slope 3 xi^2 >= 0.
    p.closed_form_slope_range = std::make_pair(Scalar(0), Scalar(3));
    return p;
  }
  throw std::invalid_argument("unknown phase '" + name + "'");
}

// Accepts "wave", "schrodinger", "airy", "fractional:a=1.5".
template <typename Scalar = double>
PhaseFn<Scalar> parse_phase(const std::string& spec, int dim) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) return builtin_phase<Scalar>(spec, dim);
  const std::string head = spec.substr(0, colon);
  const std::string tail = spec.substr(colon + 1);
  if (head != "fractional" || tail.rfind("a=", 0) != 0)
    throw std::invalid_argument("cannot parse phase '" + spec + "'");
  Scalar a;
  try {
    a = static_cast<Scalar>(std::stod(tail.substr(2)));
  } catch (const std::exception&) {
    throw std::invalid_argument("cannot parse degree in phase '" + spec + "'");
  }
  return builtin_phase<Scalar>("fractional", dim, a);
}

template <typename Scalar>
std::string phase_label(const PhaseFn<Scalar>& p) {
  if (p.name == "fractional") return "fractional:a=" + std::to_string(double(p.degree));
  return p.name;
}

// Unit-sphere samples: {-1, 1} in 1D, equispaced angles in 2D.
template <typename Scalar>
std::vector<Point<Scalar>> sphere_points(int dim, int samples) {
  std::vector<Point<Scalar>> pts;
  if (dim == 1) return {make_point<Scalar>(-1), make_point<Scalar>(1)};
  for (int k = 0; k < samples; ++k) {
    const Scalar th = 2 * std::numbers::pi_v<Scalar> * k / samples;
    pts.push_back(make_point<Scalar>(std::cos(th), std::sin(th)));
  }
  return pts;
}

template <typename Scalar>
Scalar check_homogeneity(const PhaseFn<Scalar>& phase, int sample_count, std::uint64_t rng_seed) {
  if (sample_count < 1) throw std::invalid_argument("sample_count must be >= 1");
  std::mt19937_64 rng(rng_seed);
  std::uniform_real_distribution<double> logu(std::log(0.1), std::log(10.0));
  std::normal_distribution<double> gauss;
  Scalar worst = 0;
  for (int s = 0; s < sample_count; ++s) {
    Point<Scalar> xi(phase.dim);
    do {
      for (int a = 0; a < phase.dim; ++a) xi(a) = Scalar(gauss(rng));
    } while (xi.norm() == 0);
    xi *= Scalar(std::exp(logu(rng))) / xi.norm();
    const Scalar r = Scalar(std::exp(logu(rng)));
    const Scalar ra = std::pow(r, phase.degree);
    const Scalar lhs = phase.eval(Point<Scalar>(r * xi));
    const Scalar rhs = ra * phase.eval(xi);
    const Scalar dev =
        std::abs(lhs - rhs) / (std::abs(rhs) + std::numeric_limits<Scalar>::epsilon());
    worst = std::max(worst, dev);
  }
  return worst;
}

template <typename Scalar>
PhaseConstants<Scalar> derived_constants(const PhaseFn<Scalar>& phase, int sphere_samples = 1024,
                                         Scalar tolerance = Scalar(1e-9)) {
  if (sphere_samples < 64) throw std::invalid_argument("sphere_samples must be >= 64");
  PhaseConstants<Scalar> c;
  if (phase.closed_form) {
    c = *phase.closed_form;
  } else {
    c.m = std::numeric_limits<Scalar>::infinity();
    for (const auto& w : sphere_points<Scalar>(phase.dim, sphere_samples)) {
      const Scalar g = phase.grad(w).norm();
      c.m = std::min(c.m, g);
      c.M = std::max(c.M, g);
    }
  }
  if (!(c.m > tolerance))
    throw std::domain_error("phase '" + phase.name + "' has vanishing gradient on the unit sphere");
  c.kappa = std::pow(Scalar(4), phase.degree) * c.M;
  return c;
}

// Width of the per-axis slope range of phi over the unit sphere. Wave packets
// at frequency xi travel with velocity -grad phi(xi), so over A(R) the spread
// of positions after time T is at most this times (2R)^{a-1} T.
template <typename Scalar>
Scalar velocity_spread(const PhaseFn<Scalar>& phase, int sphere_samples = 1024) {
  if (phase.closed_form_slope_range)
    return phase.closed_form_slope_range->second - phase.closed_form_slope_range->first;
  Scalar worst = 0;
  for (int a = 0; a < phase.dim; ++a) {
    Scalar lo = 0, hi = 0;
    for (const auto& w : sphere_points<Scalar>(phase.dim, sphere_samples)) {
      const Scalar g = phase.grad(w)(a);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    worst = std::max(worst, hi - lo);
  }
  return worst;
}

namespace detail {

template <typename Scalar>
Scalar fd_derivative(const PhaseFn<Scalar>& p, const Point<Scalar>& xi, int i, int j, int order,
                     Scalar d) {
  auto at = [&](Scalar si, Scalar sj) {
    Point<Scalar> q = xi;
    if (order >= 1) q(i) += si * d;
    if (order == 2) q(j) += sj * d;
    return p.eval(q);
  };
  if (order == 0) return p.eval(xi);
  if (order == 1) return (at(1, 0) - at(-1, 0)) / (2 * d);
  if (i == j) {
    Point<Scalar> up = xi, dn = xi;
    up(i) += d;
    dn(i) -= d;
    return (p.eval(up) - 2 * p.eval(xi) + p.eval(dn)) / (d * d);
  }
  return (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4 * d * d);
}

}  // namespace detail

// C_alpha = sup |d^alpha phi(xi)| |xi|^{|alpha|-a} over shells 10^-2..10^2,
// central differences with step 1e-4 |xi|. A ratio that varies by more than a
// factor 10 across shells is reported as unbounded.
template <typename Scalar>
PhaseCheckReport<Scalar> check_derivative_bounds(const PhaseFn<Scalar>& phase, int max_order = 2) {
  if (max_order < 0 || max_order > 2) throw std::invalid_argument("max_order must be in [0, 2]");
  PhaseCheckReport<Scalar> rep;
  rep.homogeneity_dev = check_homogeneity(phase, 256, 0);
  rep.min_grad = std::numeric_limits<Scalar>::infinity();
  for (const auto& w : sphere_points<Scalar>(phase.dim, 1024))
    rep.min_grad = std::min(rep.min_grad, phase.grad(w).norm());

  const int shells = 4, per_shell = 8;
  const auto dirs = sphere_points<Scalar>(phase.dim, 64);
  for (int order = 0; order <= max_order; ++order) {
    Scalar overall = 0, shell_lo = std::numeric_limits<Scalar>::infinity(), shell_hi = 0;
    for (int s = 0; s < shells; ++s) {
      Scalar shell_max = 0;
      for (int q = 0; q <= per_shell; ++q) {
        const Scalar r = std::pow(Scalar(10), Scalar(-2) + s + Scalar(q) / per_shell);
        for (const auto& w : dirs) {
          const Point<Scalar> xi = r * w;
          const Scalar d = Scalar(1e-4) * r;
          const Scalar scale = std::pow(r, Scalar(order) - phase.degree);
          for (int i = 0; i < (order == 0 ? 1 : phase.dim); ++i)
            for (int j = (order == 2 ? i : 0); j < (order == 2 ? phase.dim : 1); ++j) {
              const Scalar v = std::abs(detail::fd_derivative(phase, xi, i, j, order, d)) * scale;
              if (!std::isfinite(v)) {
                rep.bounded = false;
                continue;
              }
              shell_max = std::max(shell_max, v);
            }
        }
      }
      overall = std::max(overall, shell_max);
      shell_lo = std::min(shell_lo, shell_max);
      shell_hi = std::max(shell_hi, shell_max);
    }
    rep.derivative_bound_consts[order] = overall;
    // Shells where the derivative vanishes identically (e.g. order 2 of the
    // wave phase in 1D) carry no growth information.
    if (shell_hi > Scalar(1e-6) && shell_hi > 10 * shell_lo) rep.bounded = false;
  }
  return rep;
}

// phi sampled at the given frequency nodes of a grid.
template <typename Scalar>
RVector<Scalar> phase_on_nodes(const PhaseFn<Scalar>& phase, const Grid<Scalar>& g,
                               const std::vector<Index>& nodes) {
  if (phase.dim != g.dim) throw std::invalid_argument("phase and grid dimensions differ");
  RVector<Scalar> out(Index(nodes.size()));
  for (size_t k = 0; k < nodes.size(); ++k) {
    out[Index(k)] = phase(g.wavenumber(nodes[k]));
    if (!std::isfinite(out[Index(k)]))
      throw std::domain_error("phase '" + phase.name + "' is not finite at a grid frequency");
  }
  return out;
}

}  // namespace dispersive
