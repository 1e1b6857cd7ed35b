#pragma once

// Deterministic global maximization of the steering functional over the
// four measurement angles, and the min-max solver used for the steering
// radius. Both are coarse grid + Nelder-Mead refinement from the best cells.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "steerkit/steer_functional.hpp"

namespace steerkit {

struct OptimizerConfig {
  /// Points over alpha in [0, pi); beta uses twice as many over [0, 2 pi).
  /// Even values put the coordinate axes on the grid.
  int grid_per_angle = 18;
  int top_k = 8;
  int refine_max_iters = 400;
  double refine_tol = 1e-10;
  /// Nonzero seeds jitter the refinement starts by a fraction of a grid step.
  unsigned seed = 0;
  /// Worker count for grid evaluation; 0 reads STEERKIT_THREADS, then
  /// falls back to the hardware concurrency.
  int threads = 0;

  // min-max solver
  int minmax_grid = 21;
  double minmax_box = 2.0;
  int minmax_max_iters = 2000;

  void validate() const {
    if (grid_per_angle < 4)
      throw Error(ErrorCode::InvalidArgument, "grid_per_angle must be >= 4", grid_per_angle);
    if (top_k < 1) throw Error(ErrorCode::InvalidArgument, "top_k must be >= 1", top_k);
    if (minmax_grid < 3)
      throw Error(ErrorCode::InvalidArgument, "minmax_grid must be >= 3", minmax_grid);
    if (!(minmax_box > 0))
      throw Error(ErrorCode::InvalidArgument, "minmax_box must be positive", minmax_box);
  }
};

enum class Method { numeric, analytic_xstate, closed_form_family };

constexpr std::string_view to_string(Method m) {
  switch (m) {
    case Method::numeric: return "numeric";
    case Method::analytic_xstate: return "analytic_xstate";
    case Method::closed_form_family: return "closed_form_family";
  }
  return "unknown";
}

struct SteeringResult {
  double s = 0;
  Direction direction = Direction::AtoB;
  /// (alpha0, beta0, alpha1, beta1)
  std::array<double, 4> angles{};
  Method method = Method::numeric;
  std::optional<std::array<double, 3>> deltas;
  /// S1 - S2 at the reported angles, before clamping at 0.
  double objective_at_opt = 0;
};

namespace detail {

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("STEERKIT_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs body(begin, end, worker) over [0, count) split into contiguous
/// chunks; the caller combines per-worker results in worker order.
template <class Body>
void parallel_chunks(std::size_t count, int workers, Body&& body) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(count)));
  if (workers == 1) {
    body(std::size_t{0}, count, 0);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (int w = 0; w < workers; ++w) {
    const std::size_t begin = std::min(count, chunk * w);
    const std::size_t end = std::min(count, begin + chunk);
    pool.emplace_back([&body, begin, end, w] { body(begin, end, w); });
  }
  for (auto& t : pool) t.join();
}

/// Candidate ordering: larger score first, then smaller index.
struct Candidate {
  double score;
  std::size_t index;
  bool operator<(const Candidate& o) const {
    return score != o.score ? score > o.score : index < o.index;
  }
};

/// Bounded best-first list.
class TopList {
 public:
  explicit TopList(std::size_t capacity) : capacity_(capacity) {}

  void offer(double score, std::size_t index) {
    const Candidate c{score, index};
    if (items_.size() == capacity_ && !(c < items_.back())) return;
    items_.insert(std::upper_bound(items_.begin(), items_.end(), c), c);
    if (items_.size() > capacity_) items_.pop_back();
  }

  const std::vector<Candidate>& items() const { return items_; }

 private:
  std::size_t capacity_;
  std::vector<Candidate> items_;
};

}  // namespace detail

template <std::size_t N>
struct SimplexResult {
  std::array<double, N> x{};
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
};

/// Nelder-Mead minimization. Non-finite values are treated as +infinity,
/// so callers reject infeasible points by returning NaN or infinity. The
/// search restarts from the incumbent with a fresh simplex until a restart
/// no longer improves it (at most `restarts` times).
template <std::size_t N, class F>
SimplexResult<N> nelder_mead(F&& f, std::array<double, N> start, double step, int max_iters,
                             double tol, int restarts = 3) {
  using Point = std::array<double, N>;
  auto eval = [&](const Point& p) {
    const double v = f(p);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  SimplexResult<N> best;
  best.x = start;
  best.value = eval(start);

  for (int round = 0; round <= restarts; ++round) {
    std::array<Point, N + 1> pts;
    std::array<double, N + 1> vals;
    pts[0] = best.x;
    vals[0] = best.value;
    for (std::size_t i = 0; i < N; ++i) {
      pts[i + 1] = best.x;
      pts[i + 1][i] += step;
      vals[i + 1] = eval(pts[i + 1]);
    }

    std::array<std::size_t, N + 1> order;
    int it = 0;
    for (; it < max_iters; ++it) {
      for (std::size_t i = 0; i <= N; ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t l, std::size_t r) { return vals[l] < vals[r]; });
      const std::size_t lo = order[0], hi = order[N], second = order[N - 1];

      double size = 0;
      for (std::size_t i = 0; i <= N; ++i)
        for (std::size_t d = 0; d < N; ++d)
          size = std::max(size, std::abs(pts[i][d] - pts[lo][d]));
      if (size < tol) break;

      Point centroid{};
      for (std::size_t i = 0; i <= N; ++i) {
        if (i == hi) continue;
        for (std::size_t d = 0; d < N; ++d) centroid[d] += pts[i][d] / N;
      }
      auto along = [&](double t) {
        Point p;
        for (std::size_t d = 0; d < N; ++d) p[d] = centroid[d] + t * (pts[hi][d] - centroid[d]);
        return p;
      };

      const Point reflected = along(-1.0);
      const double fr = eval(reflected);
      if (fr < vals[lo]) {
        const Point expanded = along(-2.0);
        const double fe = eval(expanded);
        if (fe < fr) {
          pts[hi] = expanded;
          vals[hi] = fe;
        } else {
          pts[hi] = reflected;
          vals[hi] = fr;
        }
        continue;
      }
      if (fr < vals[second]) {
        pts[hi] = reflected;
        vals[hi] = fr;
        continue;
      }
      const bool outside = fr < vals[hi];
      const Point contracted = along(outside ? -0.5 : 0.5);
      const double fc = eval(contracted);
      if (fc < (outside ? fr : vals[hi])) {
        pts[hi] = contracted;
        vals[hi] = fc;
        continue;
      }
      for (std::size_t i = 0; i <= N; ++i) {
        if (i == lo) continue;
        for (std::size_t d = 0; d < N; ++d) pts[i][d] = pts[lo][d] + 0.5 * (pts[i][d] - pts[lo][d]);
        vals[i] = eval(pts[i]);
      }
    }
    best.iterations += it;

    std::size_t lo = 0;
    for (std::size_t i = 1; i <= N; ++i)
      if (vals[i] < vals[lo]) lo = i;
    const bool improved = vals[lo] < best.value;
    if (vals[lo] <= best.value) {
      best.value = vals[lo];
      best.x = pts[lo];
    }
    if (!improved) break;
    step *= 0.25;
    if (step < tol) break;
  }
  return best;
}

namespace detail {

inline std::array<double, 4> canonical_angles(const Vector3& n0, const Vector3& n1) {
  const auto d0 = MeasurementDirection::from_vector(n0);
  const auto d1 = MeasurementDirection::from_vector(n1);
  return {d0.alpha, d0.beta, d1.alpha, d1.beta};
}

inline Vector3 direction_vector(double alpha, double beta) {
  return MeasurementDirection{alpha, beta}.n();
}

// Simple deterministic generator for the optional start jitter.
inline double jitter_unit(unsigned seed, std::size_t k) {
  std::uint64_t z = (static_cast<std::uint64_t>(seed) << 32) ^ (k + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) / static_cast<double>(1ULL << 53) - 0.5;
}

}  // namespace detail

/// Maximizes S1 - S2 over both measurement directions. The alpha0 range is
/// halved using the n -> -n symmetry of the functional. Ties resolve to the
/// lexicographically smallest angle tuple.
inline SteeringResult maximize_steerability(const SteeringMap& map, const OptimizerConfig& cfg = {},
                                            const Tolerances& tol = {}) {
  cfg.validate();
  const int g = cfg.grid_per_angle;
  const double step = std::numbers::pi / g;

  struct GridDir {
    double alpha, beta;
    detail::ObservableTerms terms;
  };
  std::vector<GridDir> dirs;
  dirs.reserve(static_cast<std::size_t>(g) * 2 * g);
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < 2 * g; ++j) {
      const double alpha = i * step, beta = j * step;
      dirs.push_back({alpha, beta, detail::terms(map, detail::direction_vector(alpha, beta), tol)});
    }
  const std::size_t per_row = static_cast<std::size_t>(2 * g);
  const std::size_t first_count = static_cast<std::size_t>(g / 2 + 1) * per_row;  // alpha0 <= pi/2
  const std::size_t second_count = dirs.size();

  // Keep more than top_k so that near-duplicate cells can be skipped.
  const std::size_t pool_size = static_cast<std::size_t>(cfg.top_k) * 16;
  const int workers = detail::worker_count(cfg.threads);
  std::vector<detail::TopList> partial(static_cast<std::size_t>(std::max(1, workers)),
                                       detail::TopList(pool_size));
  detail::parallel_chunks(first_count, workers, [&](std::size_t begin, std::size_t end, int w) {
    auto& top = partial[static_cast<std::size_t>(w)];
    for (std::size_t d0 = begin; d0 < end; ++d0)
      for (std::size_t d1 = 0; d1 < second_count; ++d1)
        top.offer(detail::functional(dirs[d0].terms, dirs[d1].terms), d0 * second_count + d1);
  });
  detail::TopList merged(pool_size);
  for (const auto& p : partial)
    for (const auto& c : p.items()) merged.offer(c.score, c.index);

  struct Incumbent {
    double value;
    std::array<double, 4> angles;
  };
  auto better = [](const Incumbent& l, const Incumbent& r) {
    return l.value != r.value ? l.value > r.value : l.angles < r.angles;
  };

  const auto& cands = merged.items();
  if (cands.empty() || cands.front().score <= kSharpBiasedSentinel) {
    SteeringResult r;
    r.direction = map.direction;
    r.objective_at_opt = kSharpBiasedSentinel;
    return r;
  }

  auto cell_angles = [&](std::size_t index) {
    const auto& a = dirs[index / second_count];
    const auto& b = dirs[index % second_count];
    return std::array<double, 4>{a.alpha, a.beta, b.alpha, b.beta};
  };
  auto objective = [&](const std::array<double, 4>& p) {
    return steering_objective(map, detail::direction_vector(p[0], p[1]),
                              detail::direction_vector(p[2], p[3]), tol);
  };

  Incumbent best{cands.front().score, cell_angles(cands.front().index)};

  // Diverse starts: skip cells whose directions are both within ~1.5 grid
  // steps (up to sign) of an already chosen start.
  const double near = std::cos(1.5 * step);
  std::vector<std::array<Vector3, 2>> chosen;
  std::size_t k = 0;
  for (const auto& c : cands) {
    if (static_cast<int>(chosen.size()) >= cfg.top_k) break;
    if (c.score <= kSharpBiasedSentinel) break;
    const auto a = cell_angles(c.index);
    const Vector3 n0 = detail::direction_vector(a[0], a[1]);
    const Vector3 n1 = detail::direction_vector(a[2], a[3]);
    bool duplicate = false;
    for (const auto& prev : chosen)
      if (std::abs(prev[0].dot(n0)) > near && std::abs(prev[1].dot(n1)) > near) duplicate = true;
    if (duplicate) continue;
    chosen.push_back({n0, n1});

    auto start = a;
    if (cfg.seed != 0)
      for (std::size_t d = 0; d < 4; ++d) start[d] += 0.25 * step * detail::jitter_unit(cfg.seed, 4 * k + d);
    ++k;

    auto res = nelder_mead<4>([&](const std::array<double, 4>& p) {
      const double v = objective(p);
      return v <= kSharpBiasedSentinel ? std::numeric_limits<double>::infinity() : -v;
    }, start, 0.5 * step, cfg.refine_max_iters, cfg.refine_tol);
    if (!std::isfinite(res.value)) continue;

    const Vector3 r0 = detail::direction_vector(res.x[0], res.x[1]);
    const Vector3 r1 = detail::direction_vector(res.x[2], res.x[3]);
    const auto angles = detail::canonical_angles(r0, r1);
    Incumbent cand{objective(angles), angles};
    if (better(cand, best)) best = cand;
  }

  SteeringResult out;
  out.direction = map.direction;
  out.angles = best.angles;
  out.method = Method::numeric;
  out.objective_at_opt = best.value;
  out.s = std::max(best.value, 0.0);
  return out;
}

inline SteeringResult maximize_steerability(const DensityMatrix& rho, Direction direction,
                                            const OptimizerConfig& cfg = {},
                                            const Tolerances& tol = {}) {
  return maximize_steerability(compute_map(rho, direction, tol), cfg, tol);
}

// ---------------------------------------------------------------------------
// min over (z1, z3, Z) of max over four branches

struct MinMaxResult {
  Vector3 point = Vector3::Zero();
  double value = std::numeric_limits<double>::infinity();
  std::size_t skipped_probes = 0;
  bool expanded = false;
};

/// Minimizes the pointwise maximum of four branch functions over a box
/// [-box, box]^3. Probes where any branch is non-finite are skipped and
/// counted. If the optimum lies on the box boundary the search is repeated
/// once on the doubled box.
template <class F>
MinMaxResult minimize_max(F&& branches, const OptimizerConfig& cfg = {}) {
  cfg.validate();
  std::size_t skipped = 0;
  auto pointwise = [&](const Vector3& z, bool count) {
    const std::array<double, 4> b = branches(z);
    double m = -std::numeric_limits<double>::infinity();
    for (double v : b) {
      if (!std::isfinite(v)) {
        if (count) ++skipped;
        return std::numeric_limits<double>::infinity();
      }
      m = std::max(m, v);
    }
    return m;
  };

  auto solve = [&](double box) {
    const int n = cfg.minmax_grid;
    const double h = 2 * box / (n - 1);
    detail::TopList top(static_cast<std::size_t>(cfg.top_k) * 16);
    std::size_t index = 0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l, ++index) {
          const Vector3 z(-box + i * h, -box + j * h, -box + l * h);
          const double v = pointwise(z, true);
          if (std::isfinite(v)) top.offer(-v, index);
        }
    MinMaxResult res;
    if (top.items().empty()) return res;
    auto at = [&](std::size_t idx) {
      const int i = static_cast<int>(idx / (n * n)), j = static_cast<int>((idx / n) % n),
                l = static_cast<int>(idx % n);
      return Vector3(-box + i * h, -box + j * h, -box + l * h);
    };
    res.point = at(top.items().front().index);
    res.value = -top.items().front().score;

    std::vector<Vector3> chosen;
    for (const auto& c : top.items()) {
      if (static_cast<int>(chosen.size()) >= cfg.top_k) break;
      const Vector3 z = at(c.index);
      bool duplicate = false;
      for (const auto& p : chosen)
        if ((p - z).cwiseAbs().maxCoeff() <= 1.5 * h) duplicate = true;
      if (duplicate) continue;
      chosen.push_back(z);
      auto r = nelder_mead<3>(
          [&](const std::array<double, 3>& p) { return pointwise(Vector3(p[0], p[1], p[2]), false); },
          std::array<double, 3>{z.x(), z.y(), z.z()}, 0.5 * h, cfg.minmax_max_iters,
          cfg.refine_tol);
      if (r.value < res.value) {
        res.value = r.value;
        res.point = Vector3(r.x[0], r.x[1], r.x[2]);
      }
    }
    return res;
  };

  double box = cfg.minmax_box;
  MinMaxResult res = solve(box);
  const double h = 2 * box / (cfg.minmax_grid - 1);
  if (std::isfinite(res.value) && res.point.cwiseAbs().maxCoeff() >= box - 0.5 * h) {
    MinMaxResult wider = solve(2 * box);
    if (wider.value < res.value) res = wider;
    res.expanded = true;
  }
  res.skipped_probes = skipped;
  if (!std::isfinite(res.value))
    throw Error(ErrorCode::NonFiniteObjective, "no finite probe in the min-max search box");
  return res;
}

}  // namespace steerkit
