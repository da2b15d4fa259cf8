#pragma once

#include "dispersive/grid.hpp"
#include "dispersive/jet.hpp"

#include <cmath>

namespace dispersive {

// h(t) = exp(-1/t) for t > 0, else 0.
template <typename T>
T smooth_step(const T& t) {
  using std::exp;
  if (t <= T(0)) return T(0);
  return exp(T(-1) / t);
}

// Radial profiles take r = |xi| (any sign is folded). T may be a Jet.
template <typename T>
T chi_radial(const T& r_in) {
  using std::abs;
  const T r = abs(r_in);
  if (r <= T(1)) return T(1);
  if (r >= T(2)) return T(0);
  const T a = smooth_step(T(2) - r);
  const T b = smooth_step(r - T(1));
  return a / (a + b);
}

// lambda(xi) = chi(xi) - chi(2 xi), supported in 1/2 <= |xi| <= 2.
template <typename T>
T lambda_radial(const T& r) {
  return chi_radial(r) - chi_radial(T(2) * r);
}

template <typename T>
T psi_radial(int k, const T& r) {
  if (k < 0) throw std::invalid_argument("psi_k requires k >= 0");
  if (k == 0) return chi_radial(r);
  return lambda_radial(r * T(std::ldexp(1.0, -k)));
}

template <typename Scalar>
Scalar chi(const Point<Scalar>& xi) {
  return chi_radial(xi.norm());
}

template <typename Scalar>
Scalar lambda_fn(const Point<Scalar>& xi) {
  return lambda_radial(xi.norm());
}

template <typename Scalar>
Scalar psi_k(int k, const Point<Scalar>& xi) {
  return psi_radial(k, xi.norm());
}

// theta = theta1 + theta2 + theta3 with theta1 = lambda(2.), theta2 = lambda,
// theta3 = lambda(./2); equal to one on A(1), supported in 1/4 < |xi| < 4.
struct ThetaSplit {
  template <typename T>
  T theta1(const T& r) const {
    return lambda_radial(T(2) * r);
  }
  template <typename T>
  T theta2(const T& r) const {
    return lambda_radial(r);
  }
  template <typename T>
  T theta3(const T& r) const {
    return lambda_radial(r * T(0.5));
  }
  template <typename T>
  T theta(const T& r) const {
    return theta1(r) + theta2(r) + theta3(r);
  }
};

inline ThetaSplit theta_split() { return {}; }

// Smallest K with 2^K >= the largest grid |xi|, so that sum_{k<=K} psi_k = 1 on the grid.
template <typename Scalar>
int lp_truncation(const Grid<Scalar>& g) {
  const Scalar kmax = g.nyquist() * (g.dim == 2 ? std::sqrt(Scalar(2)) : Scalar(1));
  int K = 0;
  while (std::ldexp(Scalar(1), K) < kmax) ++K;
  return K;
}

// P_k f, returned on the same side as f.
template <typename Scalar>
Field<Scalar> project(const Field<Scalar>& f, int k) {
  if (k < 0) throw std::invalid_argument("projection index must be >= 0");
  Field<Scalar> F = to_frequency(f);
  for (Index i = 0; i < F.grid.size(); ++i) F.values[i] *= psi_radial(k, F.grid.wavenumber_norm(i));
  return f.side == Side::frequency ? F : inverse_transform(F);
}

}  // namespace dispersive
