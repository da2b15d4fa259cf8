#pragma once

#include "dispersive/grid.hpp"

#include <Eigen/Eigenvalues>

#include <map>
#include <mutex>

namespace dispersive {

template <typename Scalar>
struct GaussLegendreRule {
  RVector<Scalar> nodes;    // on [-1, 1]
  RVector<Scalar> weights;  // sum to 2
};

// Golub-Welsch: eigen-decomposition of the Legendre Jacobi matrix.
template <typename Scalar>
GaussLegendreRule<Scalar> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("Gauss-Legendre order must be >= 1");
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> J =
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const Scalar b = k / std::sqrt(Scalar(4) * k * k - 1);
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<decltype(J)> es(J);
  GaussLegendreRule<Scalar> rule;
  rule.nodes = es.eigenvalues();
  rule.weights = 2 * es.eigenvectors().row(0).transpose().array().square();
  return rule;
}

template <typename Scalar>
const GaussLegendreRule<Scalar>& cached_gauss_legendre(int n) {
  static std::map<int, GaussLegendreRule<Scalar>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre<Scalar>(n)).first;
  return it->second;
}

template <typename Scalar>
struct QuadratureResult {
  std::complex<Scalar> value;
  Scalar abs_integral = 0;  // integral of |integrand|, the cancellation scale
  int panels = 0;
  int levels = 0;
};

// Composite Gauss-Legendre on [breaks[i], breaks[i+1]] with `panels` equal
// panels per segment.
template <typename Scalar, typename Fn>
QuadratureResult<Scalar> composite_gauss(const Fn& f, const std::vector<Scalar>& breaks, int panels,
                                         int order) {
  const auto& rule = cached_gauss_legendre<Scalar>(order);
  QuadratureResult<Scalar> res{std::complex<Scalar>(0), 0, panels, 0};
  for (size_t s = 0; s + 1 < breaks.size(); ++s) {
    const Scalar width = (breaks[s + 1] - breaks[s]) / panels;
    for (int p = 0; p < panels; ++p) {
      const Scalar mid = breaks[s] + (p + Scalar(0.5)) * width;
      const Scalar half = width / 2;
      for (Index q = 0; q < rule.nodes.size(); ++q) {
        const std::complex<Scalar> v = f(mid + half * rule.nodes[q]);
        res.value += rule.weights[q] * half * v;
        res.abs_integral += rule.weights[q] * half * std::abs(v);
      }
    }
  }
  return res;
}

// Doubles the panel count until |I_2n - I_n| <= rel_tol |I_2n| + abs_tol * integral |f|.
template <typename Scalar, typename Fn>
QuadratureResult<Scalar> adaptive_gauss(const Fn& f, const std::vector<Scalar>& breaks,
                                        Scalar rel_tol = Scalar(1e-8), Scalar abs_tol = Scalar(1e-14),
                                        int order = 16, int start_panels = 4, int max_levels = 14) {
  auto prev = composite_gauss<Scalar>(f, breaks, start_panels, order);
  for (int level = 1, panels = 2 * start_panels; level <= max_levels; ++level, panels *= 2) {
    auto cur = composite_gauss<Scalar>(f, breaks, panels, order);
    if (std::abs(cur.value - prev.value) <= rel_tol * std::abs(cur.value) + abs_tol * cur.abs_integral) {
      cur.levels = level;
      return cur;
    }
    prev = cur;
  }
  throw std::runtime_error("adaptive quadrature did not converge after " + std::to_string(max_levels) +
                           " doublings");
}

}  // namespace dispersive
