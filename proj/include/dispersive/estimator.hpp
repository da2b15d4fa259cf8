#pragma once

#include "dispersive/grid.hpp"
#include "dispersive/lpdecomp.hpp"
#include "dispersive/phase.hpp"
#include "dispersive/propagator.hpp"
#include "dispersive/slice_engine.hpp"

#include <chrono>
#include <optional>
#include <random>
#include <type_traits>

namespace dispersive {

// Inputs with fhat supported on the grid nodes of {R/2 <= |xi| <= 2R}.
template <typename Scalar>
struct InputClass {
  Scalar R = 1;
  Region<Scalar> annulus() const { return Region<Scalar>::dyadic_annulus(R); }
  std::vector<Index> support(const Grid<Scalar>& g) const { return frequency_support(g, annulus()); }
};

template <typename Scalar>
struct OpNormEstimate {
  Scalar value = 0;
  int iterations = 0;
  bool converged = false;
  Field<Scalar> witness;
  TimeField<Scalar> witness_tfield;
  std::vector<Scalar> history;     // Rayleigh quotients or alternation objectives
  std::vector<size_t> run_starts;  // history offsets where each restart begins
};

template <typename Scalar>
struct ScalingFit {
  std::vector<std::pair<Scalar, Scalar>> points;  // (R, norm)
  Scalar slope = 0;
  Scalar intercept = 0;
  Scalar max_residual = 0;
  int dropped = 0;  // leading points excluded from the fit
};

// f -> 1_region T_{t(x)} f on a fixed input class, with its adjoint. Frequency
// vectors hold fhat on the class support only.
template <typename Scalar>
class ClassOperator {
 public:
  ClassOperator(const Grid<Scalar>& g, const PhaseFn<Scalar>& phase, const InputClass<Scalar>& cls,
                const Region<Scalar>& region, const TimeGrid<Scalar>& tg,
                MultiplierMode mode = MultiplierMode::recurrence)
      : grid_(g),
        tg_(tg),
        support_(cls.support(g)),
        mask_(region_mask(g, region)),
        engine_(g, support_, phase_on_nodes(phase, g, support_), tg.nodes, mode) {
    if (support_.empty()) throw std::invalid_argument("input class has no grid frequencies");
    for (Index x = 0; x < g.size(); ++x)
      if (mask_[x]) region_points_.push_back(x);
  }

  const Grid<Scalar>& grid() const { return grid_; }
  const TimeGrid<Scalar>& time_grid() const { return tg_; }
  const std::vector<Index>& support() const { return support_; }
  const std::vector<Index>& region_points() const { return region_points_; }
  Index dimension() const { return Index(support_.size()); }

  Scalar norm(const CVector<Scalar>& F) const {
    const Scalar dk = 1 / grid_.length;
    return std::sqrt(F.squaredNorm() * (grid_.dim == 1 ? dk : dk * dk));
  }

  Scalar region_norm(const CVector<Scalar>& u) const {
    Scalar s = 0;
    for (Index x : region_points_) s += std::norm(u[x]);
    return std::sqrt(s * grid_.cell_volume());
  }

  // Space field from a class vector.
  Field<Scalar> to_field(const CVector<Scalar>& F) const {
    Field<Scalar> Fh = Field<Scalar>::zeros(grid_, Side::frequency);
    for (Index k = 0; k < dimension(); ++k) Fh.values[support_[k]] = F[k];
    return inverse_transform(Fh);
  }

  CVector<Scalar> from_field(const Field<Scalar>& f) const {
    const Field<Scalar> Fh = to_frequency(f);
    CVector<Scalar> F(dimension());
    for (Index k = 0; k < dimension(); ++k) F[k] = Fh.values[support_[k]];
    return F;
  }

  // u(x) = T_{t_{node[x]}} F(x) on region points, zero elsewhere.
  CVector<Scalar> apply(const CVector<Scalar>& F, const std::vector<int>& node) {
    std::vector<char> used(tg_.count(), 0);
    for (Index x : region_points_) used[node[x]] = 1;
    std::vector<int> nodes;
    for (int j = 0; j < tg_.count(); ++j)
      if (used[j]) nodes.push_back(j);
    CVector<Scalar> out = CVector<Scalar>::Zero(grid_.size());
    engine_.forward(F, nodes, [&](int j, const CVector<Scalar>& u) {
      for (Index x : region_points_)
        if (node[x] == j) out[x] = u[x];
    });
    return out;
  }

  CVector<Scalar> adjoint(const CVector<Scalar>& u, const std::vector<int>& node) {
    std::vector<int> sel(grid_.size(), -1);
    for (Index x : region_points_) sel[x] = node[x];
    return engine_.adjoint(u, sel);
  }

  struct MaximalPass {
    Scalar objective = 0;    // ||sup_j |T_j F| ||_{L^2(region)} / ||F||
    std::vector<int> node;   // argmax per point (0 outside the region)
    CVector<Scalar> values;  // T_{argmax} F on region points
  };

  MaximalPass maximal(const CVector<Scalar>& F) {
    MaximalPass mp;
    mp.node.assign(grid_.size(), 0);
    mp.values = CVector<Scalar>::Zero(grid_.size());
    std::vector<Scalar> best(region_points_.size(), Scalar(-1));
    engine_.forward_all(F, [&](int j, const CVector<Scalar>& u) {
      for (size_t q = 0; q < region_points_.size(); ++q) {
        const Index x = region_points_[q];
        const Scalar a = std::norm(u[x]);
        if (a > best[q]) {
          best[q] = a;
          mp.node[x] = j;
          mp.values[x] = u[x];
        }
      }
    });
    mp.objective = region_norm(mp.values) / norm(F);
    return mp;
  }

 private:
  Grid<Scalar> grid_;
  TimeGrid<Scalar> tg_;
  std::vector<Index> support_;
  std::vector<char> mask_;
  std::vector<Index> region_points_;
  SliceEngine<Scalar> engine_;
};

template <typename Scalar>
CVector<Scalar> random_class_vector(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  CVector<Scalar> v(n);
  for (Index k = 0; k < n; ++k) v[k] = std::complex<Scalar>(Scalar(gauss(rng)), Scalar(gauss(rng)));
  return v;
}

template <typename Scalar>
struct PowerOptions {
  int max_iter = 200;
  Scalar tol = Scalar(1e-6);
};

// Top singular value of F -> 1_region T_{t(x)} F by power iteration on the
// normal operator, starting from `start` (or a seeded random class vector).
template <typename Scalar>
OpNormEstimate<Scalar> power_iterate(ClassOperator<Scalar>& op, const std::vector<int>& node,
                                     const PowerOptions<Scalar>& opt, std::uint64_t seed,
                                     std::optional<CVector<Scalar>> start = std::nullopt) {
  CVector<Scalar> F = start ? *start : random_class_vector<Scalar>(op.dimension(), seed);
  F /= op.norm(F);
  OpNormEstimate<Scalar> est;
  CVector<Scalar> best_F = F;
  est.run_starts.push_back(0);
  Scalar prev = -1;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const CVector<Scalar> u = op.apply(F, node);
    const Scalar q = op.region_norm(u);
    est.history.push_back(q);
    est.iterations = it;
    if (q >= est.value) {
      est.value = q;
      best_F = F;
    }
    if (prev >= 0 && std::abs(q - prev) <= opt.tol * std::max<Scalar>(q, std::numeric_limits<Scalar>::min())) {
      est.converged = true;
      break;
    }
    prev = q;
    CVector<Scalar> G = op.adjoint(u, node);
    const Scalar gn = op.norm(G);
    if (!(gn > 0)) {
      est.converged = true;
      break;
    }
    F = G / gn;
  }
  est.witness = op.to_field(best_F);
  est.witness_tfield = TimeField<Scalar>::from_nodes(op.grid(), op.time_grid(), node);
  return est;
}

template <typename Scalar>
OpNormEstimate<Scalar> linearized_opnorm(const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                                         const PhaseFn<Scalar>& phase, const InputClass<Scalar>& cls,
                                         const Region<Scalar>& region, int max_iter = 200,
                                         Scalar tol = Scalar(1e-6), std::uint64_t seed = 0) {
  const std::vector<int> node = snap_indices(tf, tg);
  ClassOperator<Scalar> op(tf.grid, phase, cls, region, tg, MultiplierMode::exact);
  return power_iterate(op, node, PowerOptions<Scalar>{max_iter, tol}, seed);
}

// ||1_region T_{tf} f||_2 / ||f||_2 through the public propagator, independent of the estimator.
template <typename Scalar>
Scalar linearized_ratio(const Field<Scalar>& f, const TimeField<Scalar>& tf, const TimeGrid<Scalar>& tg,
                        const PhaseFn<Scalar>& phase, const Region<Scalar>& region) {
  return restrict_norm(apply_T_linearized(f, tf, tg, phase), region, Scalar(2)) / l2_norm(to_space(f));
}

// ||sup_j |T_j f| ||_{L^2(region)} / ||f||_2 through the public propagator.
template <typename Scalar>
Scalar maximal_ratio(const Field<Scalar>& f, const TimeGrid<Scalar>& tg, const PhaseFn<Scalar>& phase,
                     const Region<Scalar>& region) {
  const auto mr = maximal_function(f, tg, phase);
  Field<Scalar> s{f.grid, Side::space, mr.sup_field.template cast<std::complex<Scalar>>()};
  return restrict_norm(s, region, Scalar(2)) / l2_norm(to_space(f));
}

template <typename Scalar>
struct ProbeSpec {
  std::vector<Scalar> widths;   // Gaussian widths in frequency; empty means a default dyadic ladder
  std::vector<Scalar> centers;  // as multiples of R
  std::vector<Scalar> focus;    // focus times as fractions of T_max
  bool full_annulus = true;     // also the unwindowed chirp 1_{A(R)} e^{-i delta phi}
  int random_probes = 1;
};

template <typename Scalar>
struct MaximalOptions {
  int restarts = 4;
  int rounds = 6;
  Scalar round_tol = Scalar(1e-5);  // stop a restart once a round gains less than this, relatively
  Scalar restart_noise = Scalar(0.05);
  ProbeSpec<Scalar> probes;
};

template <typename Scalar>
struct Probe {
  std::string label;
  CVector<Scalar> F;
  Scalar objective = 0;
};

// Chirped packets fhat = exp(-|xi - xi0|^2 / (2 w^2)) e^{-i delta phi(xi)} 1_{A(R)}:
// they refocus near time delta and realize the dispersive growth of the sup.
template <typename Scalar>
std::vector<Probe<Scalar>> chirp_probes(const ClassOperator<Scalar>& op, const PhaseFn<Scalar>& phase, Scalar R,
                                        const ProbeSpec<Scalar>& spec, std::uint64_t seed) {
  const Grid<Scalar>& g = op.grid();
  std::vector<Scalar> widths = spec.widths;
  if (widths.empty())
    for (Scalar w = std::exp2(std::floor(std::log2(Scalar(0.5) / std::sqrt(R)))); w <= R; w *= 2) widths.push_back(w);
  const std::vector<Scalar> centers = spec.centers.empty() ? std::vector<Scalar>{1, Scalar(1.5)} : spec.centers;
  const std::vector<Scalar> focus = spec.focus.empty() ? std::vector<Scalar>{Scalar(0.5)} : spec.focus;
  const Scalar T = op.time_grid().t_max;
  std::vector<Probe<Scalar>> out;
  auto add = [&](const std::string& label, auto&& amp, Scalar delta) {
    Probe<Scalar> p{label, CVector<Scalar>(op.dimension()), 0};
    for (Index k = 0; k < op.dimension(); ++k) {
      const Point<Scalar> xi = g.wavenumber(op.support()[k]);
      p.F[k] = amp(xi) * std::polar(Scalar(1), -delta * phase(xi));
    }
    out.push_back(std::move(p));
  };
  for (Scalar d : focus) {
    const Scalar delta = d * T;
    for (Scalar c : centers)
      for (Scalar w : widths) {
        Point<Scalar> xi0 = Point<Scalar>::Zero(g.dim);
        xi0(0) = c * R;
        add("packet w=" + std::to_string(double(w)) + " xi0=" + std::to_string(double(c * R)) +
                " delta=" + std::to_string(double(delta)),
            [&](const Point<Scalar>& xi) { return std::exp(-(xi - xi0).squaredNorm() / (2 * w * w)); }, delta);
      }
    if (spec.full_annulus)
      add("chirp delta=" + std::to_string(double(delta)), [](const Point<Scalar>&) { return Scalar(1); }, delta);
  }
  for (int r = 0; r < spec.random_probes; ++r)
    out.push_back(Probe<Scalar>{"random seed=" + std::to_string(seed + r),
                                random_class_vector<Scalar>(op.dimension(), seed + 1000003ULL * (r + 1)), 0});
  return out;
}

// Alternating maximization of ||sup_j |T_{t_j} f| ||_{L^2(region)} / ||f|| over the class.
// Each round takes the argmax time field, then one power step of the linearized
// operator at that field; both half-steps can only raise the objective.
template <typename Scalar>
OpNormEstimate<Scalar> alternating_maximize(ClassOperator<Scalar>& op, const PhaseFn<Scalar>& phase, Scalar R,
                                            const MaximalOptions<Scalar>& opt, std::uint64_t seed,
                                            std::vector<Probe<Scalar>>* probe_log = nullptr) {
  auto probes = chirp_probes(op, phase, R, opt.probes, seed);
  for (auto& p : probes) p.objective = op.maximal(p.F).objective;
  std::vector<size_t> order(probes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return probes[a].objective > probes[b].objective; });

  OpNormEstimate<Scalar> best;
  CVector<Scalar> best_F;
  std::vector<int> best_node;
  auto consider = [&](Scalar v, const CVector<Scalar>& F, const std::vector<int>& node) {
    if (v > best.value) {
      best.value = v;
      best_F = F;
      best_node = node;
    }
  };

  const int restarts = std::max(1, std::min<int>(opt.restarts, int(order.size())));
  bool all_converged = true;
  for (int r = 0; r < restarts; ++r) {
    CVector<Scalar> F = probes[order[r]].F;
    if (r > 0 && opt.restart_noise > 0) {
      CVector<Scalar> noise = random_class_vector<Scalar>(op.dimension(), seed + 7919ULL * r);
      F = F / op.norm(F) + opt.restart_noise * noise / op.norm(noise);
    }
    F /= op.norm(F);
    auto mp = op.maximal(F);
    best.run_starts.push_back(best.history.size());
    best.history.push_back(mp.objective);
    consider(mp.objective, F, mp.node);
    bool converged = opt.rounds == 0;
    for (int round = 0; round < opt.rounds; ++round) {
      const CVector<Scalar> G = op.adjoint(mp.values, mp.node);
      const Scalar gn = op.norm(G);
      if (!(gn > 0)) {
        converged = true;
        break;
      }
      F = G / gn;
      const Scalar prev = mp.objective;
      mp = op.maximal(F);
      best.history.push_back(mp.objective);
      ++best.iterations;
      consider(mp.objective, F, mp.node);
      if (mp.objective - prev <= opt.round_tol * mp.objective) {
        converged = true;
        break;
      }
    }
    all_converged = all_converged && converged;
  }
  best.converged = all_converged;
  best.witness = op.to_field(best_F);
  best.witness_tfield = TimeField<Scalar>::from_nodes(op.grid(), op.time_grid(), best_node);
  if (probe_log) {
    for (size_t i : order) probe_log->push_back(probes[i]);
  }
  return best;
}

template <typename Scalar>
OpNormEstimate<Scalar> maximal_opnorm(const Grid<Scalar>& g, Scalar R, const PhaseFn<Scalar>& phase,
                                      const Region<Scalar>& region, const TimeGrid<Scalar>& tg,
                                      const MaximalOptions<Scalar>& opt, std::uint64_t seed) {
  ClassOperator<Scalar> op(g, phase, InputClass<Scalar>{R}, region, tg, MultiplierMode::recurrence);
  return alternating_maximize(op, phase, R, opt, seed);
}

// Least squares of log norm against log R, dropping the smallest R when at least
// three points are available.
template <typename Scalar>
ScalingFit<Scalar> fit_scaling(const std::vector<std::pair<Scalar, Scalar>>& points, bool drop_smallest = true) {
  ScalingFit<Scalar> fit;
  fit.points = points;
  fit.dropped = (drop_smallest && points.size() >= 3) ? 1 : 0;
  const Index n = Index(points.size()) - fit.dropped;
  if (n < 2) throw std::invalid_argument("scaling fit needs at least two points");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> A(n, 2);
  RVector<Scalar> b(n);
  for (Index i = 0; i < n; ++i) {
    A(i, 0) = std::log(points[size_t(i + fit.dropped)].first);
    A(i, 1) = 1;
    b[i] = std::log(points[size_t(i + fit.dropped)].second);
  }
  const Eigen::Matrix<Scalar, 2, 1> c = A.colPivHouseholderQr().solve(b);
  fit.slope = c(0);
  fit.intercept = c(1);
  fit.max_residual = (A * c - b).cwiseAbs().maxCoeff();
  return fit;
}

template <typename Scalar>
struct TransferenceReport {
  Scalar slope_local = 0;
  Scalar slope_global = 0;
  Scalar a = 1;
  Scalar margin = Scalar(0.1);
  Scalar bound = 0;  // a * slope_local + margin
  bool pass = false;
};

template <typename Scalar>
TransferenceReport<Scalar> transference_report(const ScalingFit<Scalar>& local, const ScalingFit<Scalar>& global,
                                               Scalar a, Scalar margin = Scalar(0.1)) {
  if (local.points.size() != global.points.size())
    throw std::invalid_argument("local and global fits use different R lists");
  for (size_t i = 0; i < local.points.size(); ++i)
    if (local.points[i].first != global.points[i].first)
      throw std::invalid_argument("local and global fits use different R lists");
  TransferenceReport<Scalar> rep{local.slope, global.slope, a, margin, a * local.slope + margin, false};
  rep.pass = rep.slope_global <= rep.bound;
  return rep;
}

enum class SweepMode { local, global };

inline std::string to_string(SweepMode m) { return m == SweepMode::local ? "local" : "global"; }

template <typename Scalar>
struct SweepBudget {
  Scalar t_max = 1;
  Scalar nt_factor = 8;
  int nt_min = 1;
  int nt_max = 1 << 20;
  BudgetParams<Scalar> aliasing;
  MaximalOptions<Scalar> search;
  std::uint64_t seed = 0;
  bool refinement_check = true;  // re-evaluate the witness on 2 Nt nodes
  std::optional<Scalar> side_length;  // override; still checked against the budget
  std::optional<int> points_per_axis;  // override of the automatic N; same check
  bool force = false;                 // accept an override that breaks the budget
};

template <typename Scalar>
struct SweepPoint {
  Scalar R = 0;
  Grid<Scalar> grid;
  int nt = 0;
  Scalar norm = 0;
  Scalar witness_norm = 0;   // recomputed through the public propagator
  Scalar refined_norm = 0;   // witness on 2 Nt nested nodes
  Scalar refinement_rel = 0;
  int iterations = 0;
  bool converged = false;
  double seconds = 0;
  OpNormEstimate<Scalar> estimate;
};

template <typename Scalar>
struct SweepResult {
  SweepMode mode = SweepMode::local;
  std::vector<SweepPoint<Scalar>> points;
  ScalingFit<Scalar> fit;
};

template <typename Scalar>
Region<Scalar> sweep_region(SweepMode mode) {
  return mode == SweepMode::local ? Region<Scalar>::ball(1) : Region<Scalar>::all();
}

template <typename Scalar>
Grid<Scalar> sweep_grid(int dim, const PhaseFn<Scalar>& phase, Scalar R, const SweepBudget<Scalar>& b) {
  if (!b.side_length && !b.points_per_axis) return budget_grid(dim, phase, R, b.t_max, b.aliasing);
  const Scalar L = b.side_length ? *b.side_length : required_side_length(phase, R, b.t_max, b.aliasing);
  int n = 16;
  if (b.points_per_axis)
    n = *b.points_per_axis;
  else
    while (!(std::numbers::pi_v<Scalar> * n / L > 2 * R)) n *= 2;
  Grid<Scalar> g = make_grid<Scalar>(dim, n, L);
  if (!b.force) check_aliasing_budget(g, phase, R, b.t_max, b.aliasing);
  return g;
}

template <typename Scalar>
SweepPoint<Scalar> sweep_point(const PhaseFn<Scalar>& phase, int dim, Scalar R, SweepMode mode,
                               const SweepBudget<Scalar>& b, std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  SweepPoint<Scalar> pt;
  pt.R = R;
  pt.grid = sweep_grid(dim, phase, R, b);
  pt.nt = time_node_count(phase, R, b.t_max, b.nt_factor, b.nt_min, b.nt_max);
  const TimeGrid<Scalar> tg = TimeGrid<Scalar>::uniform(b.t_max, pt.nt);
  const Region<Scalar> region = sweep_region<Scalar>(mode);
  pt.estimate = maximal_opnorm(pt.grid, R, phase, region, tg, b.search, seed);
  pt.norm = pt.estimate.value;
  pt.iterations = pt.estimate.iterations;
  pt.converged = pt.estimate.converged;
  pt.witness_norm = maximal_ratio(pt.estimate.witness, tg, phase, region);
  if (b.refinement_check) {
    ClassOperator<Scalar> fine(pt.grid, phase, InputClass<Scalar>{R}, region,
                               TimeGrid<Scalar>::uniform(b.t_max, 2 * pt.nt), MultiplierMode::recurrence);
    pt.refined_norm = fine.maximal(fine.from_field(pt.estimate.witness)).objective;
    pt.refinement_rel = (pt.refined_norm - pt.norm) / pt.norm;
  }
  pt.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return pt;
}

// Per-R maximal estimates over A(R) with a log-log fit. Local mode: region B(0,1);
// global mode: the whole torus. Both take the sup over (0, T_max].
template <typename Scalar, typename Progress = std::nullptr_t>
SweepResult<Scalar> scaling_sweep(const PhaseFn<Scalar>& phase, int dim, const std::vector<Scalar>& R_list,
                                  SweepMode mode, const SweepBudget<Scalar>& b, Progress progress = nullptr) {
  if (R_list.empty()) throw std::invalid_argument("R list is empty");
  for (size_t i = 0; i < R_list.size(); ++i) {
    int e = 0;
    if (std::frexp(R_list[i], &e) != Scalar(0.5)) throw std::invalid_argument("R values must be powers of two");
    if (i > 0 && !(R_list[i] > R_list[i - 1])) throw std::invalid_argument("R values must be ascending");
  }
  // Budget violations surface before any work is done.
  for (Scalar R : R_list) sweep_grid(dim, phase, R, b);
  SweepResult<Scalar> res;
  res.mode = mode;
  std::vector<std::pair<Scalar, Scalar>> pts;
  for (size_t i = 0; i < R_list.size(); ++i) {
    res.points.push_back(sweep_point(phase, dim, R_list[i], mode, b, b.seed + i));
    pts.emplace_back(R_list[i], res.points.back().norm);
    if constexpr (!std::is_same_v<Progress, std::nullptr_t>) progress(res.points.back());
  }
  res.fit = fit_scaling(pts);
  return res;
}

template <typename Scalar>
struct LpLevel {
  int k = 0;
  Scalar ratio = 0;  // max over trials of ||TT P_k f|| / ||P_k f||
  Scalar log2_ratio = 0;
  Grid<Scalar> grid;
};

template <typename Scalar>
struct LpSummationReport {
  Scalar s = 0, eps = 0, exponent = 0;
  std::vector<LpLevel<Scalar>> levels;
  Scalar slope = 0;      // fitted d log2(ratio_k) / dk
  Scalar intercept = 0;  // fitted C
  Scalar slack = Scalar(0.05);
  bool pass = false;     // slope <= -eps + slack
};

template <typename Scalar>
Field<Scalar> random_annulus_field(const Grid<Scalar>& g, Scalar R, std::uint64_t seed) {
  const auto idx = frequency_support(g, Region<Scalar>::dyadic_annulus(R));
  const CVector<Scalar> v = random_class_vector<Scalar>(Index(idx.size()), seed);
  Field<Scalar> F = Field<Scalar>::zeros(g, Side::frequency);
  for (size_t k = 0; k < idx.size(); ++k) F.values[idx[k]] = v[Index(k)];
  return inverse_transform(F);
}

template <typename Scalar>
TimeField<Scalar> random_time_field(const Grid<Scalar>& g, const TimeGrid<Scalar>& tg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, tg.count() - 1);
  std::vector<int> idx(g.size());
  for (auto& j : idx) j = pick(rng);
  return TimeField<Scalar>::from_nodes(g, tg, idx);
}

// Geometric decay of the weighted pieces: ratio_k = max over seeded random
// f in A(2^k) and random time fields of ||TT_{t(x)} P_k f||_2 / ||P_k f||_2,
// TT carrying the multiplier <xi>^{-(a s + eps)}.
template <typename Scalar>
LpSummationReport<Scalar> lp_summation_check(const PhaseFn<Scalar>& phase, Scalar s, Scalar eps, int k_max,
                                             const TimeGrid<Scalar>& tg, std::uint64_t seed, int trials = 8,
                                             const BudgetParams<Scalar>& bp = {}) {
  if (!(eps > 0)) throw std::invalid_argument("eps must be positive");
  if (!(s >= 0)) throw std::invalid_argument("s must be nonnegative");
  if (k_max < 2) throw std::invalid_argument("k_max must be at least 2");
  LpSummationReport<Scalar> rep;
  rep.s = s;
  rep.eps = eps;
  rep.exponent = phase.degree * s + eps;
  std::vector<Scalar> ks, ys;
  for (int k = 1; k <= k_max; ++k) {
    const Scalar R = std::ldexp(Scalar(1), k);
    LpLevel<Scalar> lv;
    lv.k = k;
    lv.grid = budget_grid(phase.dim, phase, R, tg.t_max, bp);
    for (int tr = 0; tr < trials; ++tr) {
      const std::uint64_t sd = seed + 1000ULL * k + tr;
      const Field<Scalar> pk = project(random_annulus_field(lv.grid, R, sd), k);
      const TimeField<Scalar> tf = random_time_field(lv.grid, tg, sd ^ 0x9e3779b97f4a7c15ULL);
      const Scalar r = l2_norm(apply_T_weighted(pk, tf, tg, phase, rep.exponent)) / l2_norm(pk);
      lv.ratio = std::max(lv.ratio, r);
    }
    lv.log2_ratio = std::log2(lv.ratio);
    ks.push_back(Scalar(k));
    ys.push_back(lv.log2_ratio);
    rep.levels.push_back(lv);
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> A(Index(ks.size()), 2);
  RVector<Scalar> b(Index(ks.size()));
  for (Index i = 0; i < A.rows(); ++i) {
    A(i, 0) = ks[size_t(i)];
    A(i, 1) = 1;
    b[i] = ys[size_t(i)];
  }
  const Eigen::Matrix<Scalar, 2, 1> c = A.colPivHouseholderQr().solve(b);
  rep.slope = c(0);
  rep.intercept = c(1);
  rep.pass = rep.slope <= -eps + rep.slack;
  return rep;
}

}  // namespace dispersive
