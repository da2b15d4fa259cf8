#pragma once

#include "dispersive/grid.hpp"

namespace dispersive {

// (2 pi)^{-dim/2} || <xi>^s fhat ||_2 on the grid.
template <typename Scalar>
Scalar sobolev_norm(const Field<Scalar>& f, Scalar s) {
  if (!std::isfinite(s)) throw std::invalid_argument("Sobolev exponent must be finite");
  Field<Scalar> F = to_frequency(f);
  if (s != 0)
    for (Index i = 0; i < F.grid.size(); ++i) {
      const Scalar r2 = F.grid.wavenumber(i).squaredNorm();
      F.values[i] *= std::pow(1 + r2, s / 2);
    }
  return l2_norm(F);
}

// Mf(x) = max over r in {h, 2h, 4h, ..., L/2} of the mean of |f| over the grid
// cells at distance < r from x (r = h is the cell itself).
template <typename Scalar>
RVector<Scalar> hl_maximal(const Field<Scalar>& f) {
  if (f.side != Side::space) throw std::invalid_argument("hl_maximal expects a space-side field");
  const Grid<Scalar>& g = f.grid;
  const Index n = g.n;
  const RVector<Scalar> a = f.values.cwiseAbs();
  RVector<Scalar> best = a;

  if (g.dim == 1) {
    // Prefix sums over two periods make every wrapped window contiguous.
    RVector<Scalar> pre(2 * n + 1);
    pre[0] = 0;
    for (Index i = 0; i < 2 * n; ++i) pre[i + 1] = pre[i] + a[i % n];
    for (Index w = 2; w <= n / 2; w *= 2) {
      const Index half = w - 1;  // offsets |d| < w
      const Scalar cnt = Scalar(2 * half + 1);
      for (Index i = 0; i < n; ++i) {
        const Index lo = ((i - half) % n + n) % n;
        const Scalar s = pre[lo + 2 * half + 1] - pre[lo];
        best[i] = std::max(best[i], s / cnt);
      }
    }
    return best;
  }

  // 2D disks assembled from per-row prefix sums.
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> pre(n, 2 * n + 1);
  for (Index r = 0; r < n; ++r) {
    pre(r, 0) = 0;
    for (Index c = 0; c < 2 * n; ++c) pre(r, c + 1) = pre(r, c) + a[r * n + (c % n)];
  }
  for (Index w = 2; w <= n / 2; w *= 2) {
    std::vector<Index> half_width(w);
    Index cnt = 0;
    for (Index dy = 0; dy < w; ++dy) {
      Index hw = 0;
      while ((hw + 1) * (hw + 1) + dy * dy < w * w) ++hw;
      half_width[dy] = hw;
      cnt += (dy == 0 ? 1 : 2) * (2 * hw + 1);
    }
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) {
        Scalar s = 0;
        for (Index dy = -(w - 1); dy <= w - 1; ++dy) {
          const Index rr = ((r + dy) % n + n) % n;
          const Index hw = half_width[std::abs(dy)];
          const Index lo = ((c - hw) % n + n) % n;
          s += pre(rr, lo + 2 * hw + 1) - pre(rr, lo);
        }
        best[r * n + c] = std::max(best[r * n + c], s / Scalar(cnt));
      }
  }
  return best;
}

// ||op_output||_{L^p(region)} / ||input||_{L^p(all)}.
template <typename Scalar>
Scalar lp_ratio_report(const Field<Scalar>& op_output, const Field<Scalar>& input, Scalar p,
                       const Region<Scalar>& region) {
  if (!(op_output.grid == input.grid)) throw std::invalid_argument("fields live on different grids");
  const Scalar den = restrict_norm(to_space(input), Region<Scalar>::all(), p);
  if (!(den > 0)) throw std::invalid_argument("input has zero norm");
  return restrict_norm(to_space(op_output), region, p) / den;
}

}  // namespace dispersive
