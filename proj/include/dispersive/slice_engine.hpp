#pragma once

#include "dispersive/grid.hpp"

#include <algorithm>

namespace dispersive {

// Nodes t_j = j T_max / Nt, j = 1..Nt, unless built from an explicit list.
template <typename Scalar>
struct TimeGrid {
  std::vector<Scalar> nodes;
  Scalar t_max = 1;

  static TimeGrid uniform(Scalar t_max, int count) {
    if (count < 1) throw std::invalid_argument("time grid needs at least one node");
    if (!(t_max > 0)) throw std::invalid_argument("time grid requires T_max > 0");
    TimeGrid tg;
    tg.t_max = t_max;
    tg.nodes.resize(count);
    for (int j = 1; j <= count; ++j) tg.nodes[j - 1] = t_max * j / count;
    return tg;
  }

  static TimeGrid from_nodes(std::vector<Scalar> nodes, Scalar t_max) {
    if (nodes.empty()) throw std::invalid_argument("time grid needs at least one node");
    for (size_t j = 0; j < nodes.size(); ++j) {
      if (!(nodes[j] >= 0) || nodes[j] > t_max) throw std::invalid_argument("time node outside [0, T_max]");
      if (j > 0 && !(nodes[j] > nodes[j - 1])) throw std::invalid_argument("time nodes must increase strictly");
    }
    return TimeGrid{std::move(nodes), t_max};
  }

  int count() const { return int(nodes.size()); }

  // Index of the node equal to t (to 1e-12 T_max), or -1.
  int locate(Scalar t) const {
    const Scalar tol = Scalar(1e-12) * std::max<Scalar>(t_max, 1);
    auto it = std::lower_bound(nodes.begin(), nodes.end(), t - tol);
    if (it != nodes.end() && std::abs(*it - t) <= tol) return int(it - nodes.begin());
    return -1;
  }
};

template <typename Scalar>
struct TimeField {
  Grid<Scalar> grid;
  RVector<Scalar> values;
  Scalar t_max = 1;

  static TimeField constant(const Grid<Scalar>& g, Scalar t, Scalar t_max) {
    return TimeField{g, RVector<Scalar>::Constant(g.size(), t), t_max};
  }
  static TimeField from_nodes(const Grid<Scalar>& g, const TimeGrid<Scalar>& tg, const std::vector<int>& idx) {
    TimeField tf{g, RVector<Scalar>(g.size()), tg.t_max};
    for (Index i = 0; i < g.size(); ++i) tf.values[i] = tg.nodes[idx[i]];
    return tf;
  }
};

// Node index per grid point; throws when a value is off the node set.
template <typename Scalar>
std::vector<int> snap_indices(const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg) {
  if (tf.values.size() != tf.grid.size()) throw std::invalid_argument("time field size does not match its grid");
  std::vector<int> idx(tf.values.size());
  for (Index i = 0; i < tf.values.size(); ++i) {
    const Scalar v = tf.values[i];
    if (!(v >= 0) || v > tf.t_max * (1 + Scalar(1e-12)))
      throw std::invalid_argument("time field value outside [0, T_max]");
    idx[i] = tg.locate(v);
    if (idx[i] < 0) throw std::invalid_argument("time field value is not a time-grid node");
  }
  return idx;
}

enum class MultiplierMode {
  exact,       // cos/sin of t_j phi at every node
  recurrence,  // exact at block starts, one complex product per node otherwise
};

// Evaluates u_j = T_{t_j} F for a frequency vector F living on a fixed set of
// support nodes, and the adjoint sum_j conj(e^{i t_j phi}) (h^dim DFT)(1_{S_j} g).
template <typename Scalar>
class SliceEngine {
 public:
  using C = std::complex<Scalar>;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  SliceEngine(const Grid<Scalar>& g, std::vector<Index> support, const RVector<Scalar>& phi,
              std::vector<Scalar> times, MultiplierMode mode = MultiplierMode::exact, int block = 32)
      : grid_(g), support_(std::move(support)), phi_(phi.array()), times_(std::move(times)), mode_(mode),
        block_(std::max(1, block)) {
    if (Index(support_.size()) != phi_.size()) throw std::invalid_argument("support and phase sizes differ");
    spec_ = CVector<Scalar>::Zero(g.size());
    space_.resize(g.size());
    cur_re_.resize(phi_.size());
    cur_im_.resize(phi_.size());
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const std::vector<Index>& support() const { return support_; }
  const std::vector<Scalar>& times() const { return times_; }
  int node_count() const { return int(times_.size()); }

  // Calls visit(j, u) for each j in `nodes` (ascending), u the space-side slice.
  template <typename Visit>
  void forward(const CVector<Scalar>& F, const std::vector<int>& nodes, Visit&& visit) {
    check_vector(F);
    const Array fr = F.real().array(), fi = F.imag().array();
    const Scalar inv_vol = 1 / grid_.cell_volume();
    cur_node_ = -2;
    for (int j : nodes) {
      advance_to(j);
      const Array pr = fr * cur_re_ - fi * cur_im_;
      const Array pi = fr * cur_im_ + fi * cur_re_;
      for (Index k = 0; k < Index(support_.size()); ++k) spec_[support_[k]] = C(pr[k], pi[k]);
      detail::dft(spec_.data(), space_.data(), grid_.dim, grid_.n, true);
      space_ *= inv_vol;
      visit(j, static_cast<const CVector<Scalar>&>(space_));
    }
  }

  template <typename Visit>
  void forward_all(const CVector<Scalar>& F, Visit&& visit) {
    forward(F, all_nodes(), std::forward<Visit>(visit));
  }

  // node_of_point[x] selects the slice feeding point x; -1 drops the point.
  CVector<Scalar> adjoint(const CVector<Scalar>& g, const std::vector<int>& node_of_point) {
    if (g.size() != grid_.size() || Index(node_of_point.size()) != grid_.size())
      throw std::invalid_argument("adjoint input size does not match grid");
    // Counting sort of points by node, so each slice touches only its points.
    std::vector<Index> start(times_.size() + 1, 0);
    for (int j : node_of_point)
      if (j >= 0) ++start[j + 1];
    for (size_t j = 0; j < times_.size(); ++j) start[j + 1] += start[j];
    std::vector<Index> order(start.back());
    {
      std::vector<Index> fill(start.begin(), start.end() - 1);
      for (Index x = 0; x < Index(node_of_point.size()); ++x)
        if (node_of_point[x] >= 0) order[fill[node_of_point[x]]++] = x;
    }
    std::vector<int> used;
    for (size_t j = 0; j < times_.size(); ++j)
      if (start[j + 1] > start[j]) used.push_back(int(j));

    Array acc_re = Array::Zero(phi_.size()), acc_im = Array::Zero(phi_.size());
    Array gr(phi_.size()), gi(phi_.size());
    CVector<Scalar> masked = CVector<Scalar>::Zero(grid_.size());
    const Scalar vol = grid_.cell_volume();
    cur_node_ = -2;
    for (int j : used) {
      for (Index q = start[j]; q < start[j + 1]; ++q) masked[order[q]] = g[order[q]];
      detail::dft(masked.data(), space_.data(), grid_.dim, grid_.n, false);
      for (Index q = start[j]; q < start[j + 1]; ++q) masked[order[q]] = C(0);
      for (Index k = 0; k < Index(support_.size()); ++k) {
        gr[k] = space_[support_[k]].real();
        gi[k] = space_[support_[k]].imag();
      }
      advance_to(j);
      // conj(c) * g
      acc_re += cur_re_ * gr + cur_im_ * gi;
      acc_im += cur_re_ * gi - cur_im_ * gr;
    }
    CVector<Scalar> out(phi_.size());
    out.real() = (acc_re * vol).matrix();
    out.imag() = (acc_im * vol).matrix();
    return out;
  }

  std::vector<int> all_nodes() const {
    std::vector<int> n(times_.size());
    for (size_t j = 0; j < n.size(); ++j) n[j] = int(j);
    return n;
  }

 private:
  void check_vector(const CVector<Scalar>& F) const {
    if (F.size() != Index(support_.size())) throw std::invalid_argument("frequency vector does not match support");
  }

  void advance_to(int j) {
    const bool step_ok = mode_ == MultiplierMode::recurrence && cur_node_ == j - 1 && j % block_ != 0;
    if (step_ok) {
      const Scalar dt = times_[j] - times_[j - 1];
      if (dt != step_dt_) {
        step_dt_ = dt;
        step_re_ = (phi_ * dt).cos();
        step_im_ = (phi_ * dt).sin();
      }
      const Array nr = cur_re_ * step_re_ - cur_im_ * step_im_;
      cur_im_ = cur_re_ * step_im_ + cur_im_ * step_re_;
      cur_re_ = nr;
    } else {
      cur_re_ = (phi_ * times_[j]).cos();
      cur_im_ = (phi_ * times_[j]).sin();
    }
    cur_node_ = j;
  }

  Grid<Scalar> grid_;
  std::vector<Index> support_;
  Array phi_;
  std::vector<Scalar> times_;
  MultiplierMode mode_;
  int block_;

  CVector<Scalar> spec_, space_;
  Array cur_re_, cur_im_, step_re_, step_im_;
  Scalar step_dt_ = -1;
  int cur_node_ = -2;
};

}  // namespace dispersive
