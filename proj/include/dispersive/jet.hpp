#pragma once

#include <Eigen/Core>

#include <cmath>

namespace dispersive {

// Truncated Taylor series c_0 + c_1 e + ... + c_K e^K about a point, so that
// f^{(k)}(x) = k! c_k. Enough arithmetic to push the cutoff functions through.
template <typename Scalar, int K>
struct Jet {
  Eigen::Matrix<Scalar, K + 1, 1> c = Eigen::Matrix<Scalar, K + 1, 1>::Zero();

  Jet() = default;
  Jet(Scalar v) { c(0) = v; }  // NOLINT: implicit promotion of constants

  static Jet variable(Scalar x) {
    Jet j(x);
    if (K >= 1) j.c(1) = 1;
    return j;
  }

  Scalar value() const { return c(0); }
  Scalar derivative(int k) const {
    Scalar f = 1;
    for (int i = 2; i <= k; ++i) f *= i;
    return f * c(k);
  }

  Jet operator-() const {
    Jet r;
    r.c = -c;
    return r;
  }
  Jet& operator+=(const Jet& o) {
    c += o.c;
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    c -= o.c;
    return *this;
  }
  Jet& operator*=(const Jet& o) { return *this = *this * o; }
  Jet& operator/=(const Jet& o) { return *this = *this / o; }

  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r;
    for (int i = 0; i <= K; ++i)
      for (int j = 0; i + j <= K; ++j) r.c(i + j) += a.c(i) * b.c(j);
    return r;
  }
  friend Jet operator/(const Jet& a, const Jet& b) {
    // q * b = a solved order by order.
    Jet q;
    for (int k = 0; k <= K; ++k) {
      Scalar s = a.c(k);
      for (int j = 1; j <= k; ++j) s -= b.c(j) * q.c(k - j);
      q.c(k) = s / b.c(0);
    }
    return q;
  }

  friend bool operator<(const Jet& a, const Jet& b) { return a.value() < b.value(); }
  friend bool operator>(const Jet& a, const Jet& b) { return a.value() > b.value(); }
  friend bool operator<=(const Jet& a, const Jet& b) { return a.value() <= b.value(); }
  friend bool operator>=(const Jet& a, const Jet& b) { return a.value() >= b.value(); }
};

template <typename Scalar, int K>
Jet<Scalar, K> exp(const Jet<Scalar, K>& a) {
  // e' = a' e
  Jet<Scalar, K> e;
  e.c(0) = std::exp(a.c(0));
  for (int k = 1; k <= K; ++k) {
    Scalar s = 0;
    for (int j = 1; j <= k; ++j) s += j * a.c(j) * e.c(k - j);
    e.c(k) = s / k;
  }
  return e;
}

template <typename Scalar, int K>
Jet<Scalar, K> abs(const Jet<Scalar, K>& a) {
  return a.value() < 0 ? -a : a;
}

template <typename T>
auto value_of(const T& x) {
  if constexpr (requires { x.value(); })
    return x.value();
  else
    return x;
}

}  // namespace dispersive
