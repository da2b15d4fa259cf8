#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace dispersive {

using Index = Eigen::Index;

template <typename Scalar>
using CVector = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <typename Scalar>
using RVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
// At most two coordinates; never heap-allocates.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, 0, 2, 1>;

inline bool is_power_of_two(long long n) { return n > 0 && (n & (n - 1)) == 0; }

template <typename Scalar>
Point<Scalar> make_point(Scalar x) {
  Point<Scalar> p(1);
  p << x;
  return p;
}

template <typename Scalar>
Point<Scalar> make_point(Scalar x, Scalar y) {
  Point<Scalar> p(2);
  p << x, y;
  return p;
}

// Periodic lattice on [-L/2, L/2)^dim. Nodes are stored in FFT order: flat
// index i along an axis sits at signed_index(i) * h, so x = 0 is index 0 and
// no fftshift is ever needed. In 2D the flat index is i0 * N + i1.
template <typename Scalar>
struct Grid {
  int dim = 1;
  int n = 16;
  Scalar length = 2 * std::numbers::pi_v<Scalar>;

  Scalar spacing() const { return length / n; }
  Scalar freq_spacing() const { return 2 * std::numbers::pi_v<Scalar> / length; }
  Scalar nyquist() const { return std::numbers::pi_v<Scalar> / spacing(); }
  Scalar cell_volume() const { return dim == 1 ? spacing() : spacing() * spacing(); }
  Index size() const { return dim == 1 ? Index(n) : Index(n) * n; }

  int signed_index(Index i) const { return i < n / 2 ? int(i) : int(i) - n; }
  Index axis_index(Index flat, int axis) const {
    if (dim == 1) return flat;
    return axis == 0 ? flat / n : flat % n;
  }
  Index flat_index(Index i0, Index i1) const { return dim == 1 ? i0 : i0 * n + i1; }

  Point<Scalar> position(Index flat) const { return lattice_point(flat, spacing()); }
  Point<Scalar> wavenumber(Index flat) const { return lattice_point(flat, freq_spacing()); }
  Scalar position_norm(Index flat) const { return position(flat).norm(); }
  Scalar wavenumber_norm(Index flat) const { return wavenumber(flat).norm(); }

  bool operator==(const Grid& o) const { return dim == o.dim && n == o.n && length == o.length; }

 private:
  Point<Scalar> lattice_point(Index flat, Scalar step) const {
    Point<Scalar> p(dim);
    for (int a = 0; a < dim; ++a) p(a) = signed_index(axis_index(flat, a)) * step;
    return p;
  }
};

enum class Side { space, frequency };

template <typename Scalar>
struct Field {
  Grid<Scalar> grid;
  Side side = Side::space;
  CVector<Scalar> values;

  static Field zeros(const Grid<Scalar>& g, Side s) {
    return Field{g, s, CVector<Scalar>::Zero(g.size())};
  }
};

enum class RegionKind { ball, annulus, all };

template <typename Scalar>
struct Region {
  RegionKind kind = RegionKind::all;
  Point<Scalar> center;
  Scalar inner = 0;
  Scalar outer = 0;

  static Region all() { return Region{}; }
  static Region ball(Scalar radius) { return Region{RegionKind::ball, Point<Scalar>(), 0, radius}; }
  static Region ball(Scalar radius, const Point<Scalar>& c) {
    return Region{RegionKind::ball, c, 0, radius};
  }
  static Region annulus(Scalar lo, Scalar hi) {
    if (!(lo < hi) || lo < 0) throw std::invalid_argument("annulus requires 0 <= inner < outer");
    return Region{RegionKind::annulus, Point<Scalar>(), lo, hi};
  }
  // A(R) = {R/2 <= |xi| <= 2R}
  static Region dyadic_annulus(Scalar R) { return annulus(R / 2, 2 * R); }

  // Closed membership test on a point given relative to the center.
  bool contains_offset(const Point<Scalar>& d) const {
    if (kind == RegionKind::all) return true;
    const Scalar r2 = d.squaredNorm();
    if (kind == RegionKind::ball) return r2 <= outer * outer;
    return r2 >= inner * inner && r2 <= outer * outer;
  }
};

// Minimum-image offset of node `flat` from point c on the torus.
template <typename Scalar>
Point<Scalar> torus_offset(const Grid<Scalar>& g, Index flat, const Point<Scalar>& c) {
  Point<Scalar> d = g.position(flat);
  if (c.size() == 0) return d;
  for (int a = 0; a < g.dim; ++a) {
    d(a) -= c(a);
    d(a) -= g.length * std::round(d(a) / g.length);
  }
  return d;
}

template <typename Scalar>
void check_region_fits(const Grid<Scalar>& g, const Region<Scalar>& r) {
  if (r.kind == RegionKind::all) return;
  if (r.center.size() != 0 && r.center.size() != g.dim)
    throw std::invalid_argument("region center dimension does not match grid");
  if (r.outer > g.length / 2)
    throw std::invalid_argument("region radius " + std::to_string(double(r.outer)) +
                                " exceeds half the torus side " + std::to_string(double(g.length / 2)));
}

// Space-side membership mask.
template <typename Scalar>
std::vector<char> region_mask(const Grid<Scalar>& g, const Region<Scalar>& r) {
  check_region_fits(g, r);
  std::vector<char> mask(g.size(), 1);
  if (r.kind == RegionKind::all) return mask;
  for (Index i = 0; i < g.size(); ++i) mask[i] = r.contains_offset(torus_offset(g, i, r.center));
  return mask;
}

// Frequency-side membership, e.g. the A(R) input class.
template <typename Scalar>
std::vector<Index> frequency_support(const Grid<Scalar>& g, const Region<Scalar>& r) {
  std::vector<Index> idx;
  for (Index i = 0; i < g.size(); ++i)
    if (r.contains_offset(g.wavenumber(i))) idx.push_back(i);
  return idx;
}

template <typename Scalar>
Grid<Scalar> make_grid(int dim, int n, Scalar length) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("grid dimension must be 1 or 2");
  if (n < 16 || !is_power_of_two(n))
    throw std::invalid_argument("points per axis must be a power of two >= 16, got " + std::to_string(n));
  if (!(length > 0) || !std::isfinite(length)) throw std::invalid_argument("side length must be positive");
  return Grid<Scalar>{dim, n, length};
}

namespace detail {

template <typename Scalar>
Eigen::FFT<Scalar>& fft_engine() {
  thread_local Eigen::FFT<Scalar> engine;
  return engine;
}

// Unnormalized forward DFT, or 1/N-normalized inverse, along every axis.
// src and dst must not alias.
template <typename Scalar>
void dft(const std::complex<Scalar>* src, std::complex<Scalar>* dst, int dim, int n, bool inverse) {
  using C = std::complex<Scalar>;
  auto& fft = fft_engine<Scalar>();
  auto run = [&](C* d, const C* s) {
    if (inverse)
      fft.inv(d, s, n);
    else
      fft.fwd(d, s, n);
  };
  if (dim == 1) {
    run(dst, src);
    return;
  }
  thread_local CVector<Scalar> col_in, col_out;
  if (col_in.size() != n) {
    col_in.resize(n);
    col_out.resize(n);
  }
  for (int r = 0; r < n; ++r) run(dst + Index(r) * n, src + Index(r) * n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < n; ++r) col_in[r] = dst[Index(r) * n + c];
    run(col_out.data(), col_in.data());
    for (int r = 0; r < n; ++r) dst[Index(r) * n + c] = col_out[r];
  }
}

template <typename Scalar>
void dft_inplace(CVector<Scalar>& data, int dim, int n, bool inverse) {
  CVector<Scalar> out(data.size());
  dft(data.data(), out.data(), dim, n, inverse);
  data.swap(out);
}

}  // namespace detail

// fhat(xi) = integral f(x) e^{-i x.xi} dx, approximated by h^dim * DFT.
template <typename Scalar>
Field<Scalar> forward_transform(const Field<Scalar>& f) {
  if (f.side != Side::space) throw std::invalid_argument("forward_transform expects a space-side field");
  Field<Scalar> out{f.grid, Side::frequency, f.values};
  detail::dft_inplace(out.values, f.grid.dim, f.grid.n, false);
  out.values *= f.grid.cell_volume();
  return out;
}

// f(x) = (2 pi)^{-dim} integral fhat(xi) e^{i x.xi} dxi; exact inverse of forward_transform.
template <typename Scalar>
Field<Scalar> inverse_transform(const Field<Scalar>& F) {
  if (F.side != Side::frequency) throw std::invalid_argument("inverse_transform expects a frequency-side field");
  Field<Scalar> out{F.grid, Side::space, F.values};
  detail::dft_inplace(out.values, F.grid.dim, F.grid.n, true);
  out.values /= F.grid.cell_volume();
  return out;
}

template <typename Scalar>
Field<Scalar> to_frequency(const Field<Scalar>& f) {
  return f.side == Side::frequency ? f : forward_transform(f);
}

template <typename Scalar>
Field<Scalar> to_space(const Field<Scalar>& f) {
  return f.side == Side::space ? f : inverse_transform(f);
}

// f_R(z) = f(Rz). Same samples, carried by a grid of side L/R, so the
// frequency lattice is R times coarser-spaced and supp fhat_R = R supp fhat.
template <typename Scalar>
Field<Scalar> dilate(const Field<Scalar>& f, Scalar R) {
  if (f.side != Side::space) throw std::invalid_argument("dilate expects a space-side field");
  if (!(R > 0)) throw std::invalid_argument("dilation factor must be positive");
  int e = 0;
  const Scalar m = std::frexp(R, &e);
  if (m != Scalar(0.5)) throw std::invalid_argument("dilation factor must be a power of two");
  Grid<Scalar> g = f.grid;
  g.length = f.grid.length / R;
  return Field<Scalar>{g, Side::space, f.values};
}

// (tau_h f)(x) = f(x + h) as a cyclic shift; h must lie on the lattice of f's side.
template <typename Scalar>
Field<Scalar> translate(const Field<Scalar>& f, const Point<Scalar>& shift) {
  const Grid<Scalar>& g = f.grid;
  if (shift.size() != g.dim) throw std::invalid_argument("shift dimension does not match grid");
  const Scalar step = f.side == Side::space ? g.spacing() : g.freq_spacing();
  long long k[2] = {0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const Scalar q = shift(a) / step;
    const Scalar r = std::round(q);
    if (std::abs(q - r) > Scalar(1e-9) * std::max<Scalar>(1, std::abs(q)))
      throw std::invalid_argument("translation is not a multiple of the grid spacing");
    k[a] = ((static_cast<long long>(r) % g.n) + g.n) % g.n;
  }
  Field<Scalar> out{g, f.side, CVector<Scalar>(g.size())};
  if (g.dim == 1) {
    for (Index i = 0; i < g.n; ++i) out.values[i] = f.values[(i + k[0]) % g.n];
  } else {
    for (Index i0 = 0; i0 < g.n; ++i0)
      for (Index i1 = 0; i1 < g.n; ++i1)
        out.values[i0 * g.n + i1] = f.values[((i0 + k[0]) % g.n) * g.n + (i1 + k[1]) % g.n];
  }
  return out;
}

// (sum over region nodes of |f|^p h^dim)^{1/p}; p = infinity gives the max.
template <typename Scalar>
Scalar restrict_norm(const Field<Scalar>& f, const Region<Scalar>& region, Scalar p) {
  if (f.side != Side::space) throw std::invalid_argument("restrict_norm expects a space-side field");
  if (!(p >= 1)) throw std::invalid_argument("norm exponent must be >= 1");
  const auto mask = region_mask(f.grid, region);
  const bool sup = std::isinf(p);
  Scalar acc = 0;
  for (Index i = 0; i < f.grid.size(); ++i) {
    if (!mask[i]) continue;
    const Scalar v = std::abs(f.values[i]);
    if (sup)
      acc = std::max(acc, v);
    else if (p == 2)
      acc += v * v;
    else
      acc += std::pow(v, p);
  }
  if (sup) return acc;
  acc *= f.grid.cell_volume();
  return p == 2 ? std::sqrt(acc) : std::pow(acc, 1 / p);
}

template <typename Scalar>
Scalar l2_norm(const Field<Scalar>& f) {
  if (f.side == Side::space) return std::sqrt(f.values.squaredNorm() * f.grid.cell_volume());
  const Scalar dk = f.grid.freq_spacing() / (2 * std::numbers::pi_v<Scalar>);
  return std::sqrt(f.values.squaredNorm() * (f.grid.dim == 1 ? dk : dk * dk));
}

}  // namespace dispersive
