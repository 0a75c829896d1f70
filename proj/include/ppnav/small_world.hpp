#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "edge_oracle.hpp"
#include "errors.hpp"
#include "model.hpp"
#include "point_process.hpp"
#include "rng.hpp"
#include "vec.hpp"

namespace ppnav {

enum class NavMode { toward_origin, directed };

inline constexpr std::size_t npos = std::size_t(-1);

template <std::size_t D>
struct NeighborDraw {
  std::vector<std::size_t> existing;  // realized atoms that are neighbors
  std::vector<Vec<D>> fresh;          // new neighbor points, not yet realized
  std::uint64_t rounds = 0;           // rejection rounds used, 1 = first draw
  std::size_t candidates = 0;         // dominating-intensity draws
  std::size_t in_region = 0;          // of which inside the search region
};

struct NavDiagnostics {
  std::uint64_t total_rounds = 0;
  std::uint64_t max_rounds = 0;
  std::uint64_t candidates = 0;
  std::uint64_t in_region = 0;
  std::uint64_t shell_steps = 0;
  std::uint64_t exact_far_products = 0;
};

// Lazily built small-world environment around a single navigation path.
// Index 0 of the realized set is O; the start point, when different from O,
// is index 1. Fresh neighbor points are appended as they are drawn.
//
// Every fresh neighbor of X_k lies outside the next search region (it is
// farther from O than X_{k+1}, or behind it in the directed mode), so the
// only realized atoms ever needing coin flips are the Palm atoms.
template <std::size_t D>
class NavState {
 public:
  struct Options {
    std::uint64_t max_rounds = 1'000'000;
    std::size_t exact_window = 64;
    double shell_threshold = 4096.0;
  };

  NavState(const ModelParams& p, NavMode mode, const Vec<D>& start, std::uint64_t seed, Options opt)
      : params_(p), rm_(p), mode_(mode), opt_(opt), key_(stream_key(seed, "navstate")),
        oracle_(derive_key(key_, 0xC0)) {
    p.validate();
    require(p.d == int(D), "model dimension does not match the point dimension");
    require(all_finite(start), "start point must be finite");
    require(mode == NavMode::toward_origin || p.beta > p.d, "directed navigation needs beta > d");
    require(opt.max_rounds >= 1, "max_rounds must be at least 1");
    realized_.push_back(Vec<D>{});
    created_.push_back(-1);
    if (start != Vec<D>{}) {
      realized_.push_back(start);
      created_.push_back(-1);
      path_.push_back(1);
    } else {
      path_.push_back(0);
    }
    palm_count_ = realized_.size();
  }

  NavState(const ModelParams& p, NavMode mode, const Vec<D>& start, std::uint64_t seed)
      : NavState(p, mode, start, seed, Options{}) {}

  const ModelParams& params() const { return params_; }
  NavMode mode() const { return mode_; }
  const std::vector<Vec<D>>& realized() const { return realized_; }
  int created_step(std::size_t i) const { return created_.at(i); }
  const std::vector<std::size_t>& path() const { return path_; }
  std::size_t current() const { return path_.back(); }
  const Vec<D>& current_point() const { return realized_[current()]; }
  std::size_t step_index() const { return path_.size() - 1; }
  bool absorbed() const { return mode_ == NavMode::toward_origin && current() == 0; }
  const NavDiagnostics& diagnostics() const { return diag_; }
  EdgeOracle& oracle() { return oracle_; }

  // Radius beyond which the directed neighbor mass is below 1e-12 (reported only;
  // sampling uses the exact closed-form inverse over the whole space).
  double truncation_radius() const { return rm_.tail_radius(1e-12); }

  bool in_region(const Vec<D>& y) const {
    const Vec<D>& x = current_point();
    if (mode_ == NavMode::toward_origin) return norm2(y) < norm2(x);
    return y[0] > x[0];
  }

  // Exact thinning factor lambda_k(y) = prod_{l<k} (1 - f(|y - X_l|)).
  double lambda(const Vec<D>& y) const {
    double lam = 1.0;
    for (std::size_t l = 0; l + 1 < path_.size(); ++l) lam *= 1.0 - params_.f(dist(y, realized_[path_[l]]));
    return lam;
  }

  // Expected number of dominating candidates for the current step.
  double dominating_mass() const {
    if (mode_ == NavMode::directed) return rm_.total();
    return rm_(2.0 * norm(current_point()));
  }

  // Full neighbor set of the current point, conditioned on being nonempty.
  NeighborDraw<D> draw_neighbors() {
    check_live();
    Rng rng = step_rng();
    const Vec<D> x = current_point();
    const std::size_t cur = current();
    const double M = dominating_mass();
    NeighborDraw<D> draw;
    for (std::uint64_t r = 0; r < opt_.max_rounds; ++r) {
      draw.existing.clear();
      draw.fresh.clear();
      oracle_.set_round(cur, r);
      for (std::size_t j = 0; j < palm_count_; ++j) {
        if (j == cur || !in_region(realized_[j])) continue;
        if (oracle_.coin(cur, j, r) < params_.f(dist(x, realized_[j]))) draw.existing.push_back(j);
      }
      const std::uint64_t n = poisson(rng, M);
      for (std::uint64_t i = 0; i < n; ++i) {
        const double rad = rm_.inverse(uniform01(rng) * M);
        const Vec<D> y = x + rad * unit_direction<D>(rng);
        ++draw.candidates;
        if (!in_region(y)) continue;
        ++draw.in_region;
        if (lambda_accept(y, rng)) draw.fresh.push_back(y);
      }
      if (!draw.existing.empty() || !draw.fresh.empty()) {
        draw.rounds = r + 1;
        note(draw.rounds, draw.candidates, draw.in_region);
        return draw;
      }
    }
    throw ConditioningFailure(conditioning_message(M));
  }

  // Realizes the draw and moves to the selected neighbor.
  std::size_t commit(const NeighborDraw<D>& draw) {
    const std::size_t base = realized_.size();
    for (const auto& y : draw.fresh) {
      realized_.push_back(y);
      created_.push_back(int(step_index()));
    }
    std::vector<std::size_t> cand = draw.existing;
    for (std::size_t i = 0; i < draw.fresh.size(); ++i) cand.push_back(base + i);
    const std::size_t next = select(cand);
    path_.push_back(next);
    return next;
  }

  // One navigation step; the shell sampler replaces the full draw when the
  // dominating mass is large (toward-origin only).
  std::size_t advance() {
    check_live();
    if (mode_ == NavMode::toward_origin && dominating_mass() > opt_.shell_threshold) return shell_step();
    return commit(draw_neighbors());
  }

 private:
  void check_live() const {
    if (absorbed()) throw InputError("navigation already absorbed at O");
  }

  Rng step_rng() const { return Rng(derive_key(key_, 0x5354, step_index())); }

  void note(std::uint64_t rounds, std::size_t cand, std::size_t inreg) {
    diag_.total_rounds += rounds;
    diag_.max_rounds = std::max(diag_.max_rounds, rounds);
    diag_.candidates += cand;
    diag_.in_region += inreg;
  }

  std::string conditioning_message(double mass) const {
    return "conditioning failure: no neighbor after " + std::to_string(opt_.max_rounds) +
           " rounds at step " + std::to_string(step_index()) + ", |X| = " +
           std::to_string(norm(current_point())) + ", dominating mass = " + std::to_string(mass);
  }

  std::size_t select(const std::vector<std::size_t>& cand) const {
    std::size_t best = npos;
    for (auto j : cand) {
      if (best == npos) {
        best = j;
        continue;
      }
      const auto& y = realized_[j];
      const auto& b = realized_[best];
      if (mode_ == NavMode::toward_origin) {
        const double a2 = norm2(y), b2 = norm2(b);
        if (a2 < b2 || (a2 == b2 && j < best)) best = j;
      } else {
        if (y[0] > b[0] || (y[0] == b[0] && j < best)) best = j;
      }
    }
    return best;
  }

  // Accepts y with probability lambda_k(y). The last `exact_window` path points
  // are always evaluated; older ones only when a union bound cannot decide.
  bool lambda_accept(const Vec<D>& y, Rng& rng) {
    const double U = uniform01(rng);
    const std::size_t k = step_index();
    const std::size_t J = opt_.exact_window;
    const std::size_t first_near = k > J ? k - J : 0;
    double lam = 1.0;
    for (std::size_t l = first_near; l < k; ++l) lam *= 1.0 - params_.f(dist(y, realized_[path_[l]]));
    if (U >= lam) return false;
    if (first_near == 0) return true;
    const Vec<D>& xk = realized_[path_[k]];
    const Vec<D>& xj = realized_[path_[first_near]];
    const double gap = mode_ == NavMode::toward_origin ? norm(xj) - norm(xk) : xk[0] - xj[0];
    const double B = gap > 0.0 ? double(first_near) * params_.f(gap) : 1.0;
    if (U < lam * (1.0 - B)) return true;
    ++diag_.exact_far_products;
    for (std::size_t l = 0; l < first_near; ++l) lam *= 1.0 - params_.f(dist(y, realized_[path_[l]]));
    return U < lam;
  }

  // Toward-origin step that only needs the neighbor of least norm: fresh
  // points are drawn shell by shell from O outward under the bound
  // f(|X| - r_outer) and the first shell holding a neighbor decides.
  std::size_t shell_step() {
    Rng rng = step_rng();
    const Vec<D> X = current_point();
    const std::size_t cur = current();
    const double x = norm(X);
    const double vol = unit_ball_volume(int(D));
    const double rc = params_.r_c();
    const double r0 = std::pow(1.0 / (params_.f(x) * vol), 1.0 / double(D));
    ++diag_.shell_steps;
    std::size_t cand_count = 0, inreg_count = 0;
    for (std::uint64_t r = 0; r < opt_.max_rounds; ++r) {
      oracle_.set_round(cur, r);
      std::size_t best_existing = npos;
      for (std::size_t j = 0; j < palm_count_; ++j) {
        if (j == cur || !in_region(realized_[j])) continue;
        if (oracle_.coin(cur, j, r) < params_.f(dist(X, realized_[j]))) {
          if (best_existing == npos || norm2(realized_[j]) < norm2(realized_[best_existing]))
            best_existing = j;
        }
      }
      double a = 0.0, b = std::min(x, r0);
      std::vector<Vec<D>> shell;
      for (;;) {
        if (best_existing != npos && norm2(realized_[best_existing]) <= a * a) {
          note(r + 1, cand_count, inreg_count);
          path_.push_back(best_existing);
          return best_existing;
        }
        const double p = x - b > 0.0 ? params_.f(x - b) : 1.0;
        const double shell_vol = vol * (std::pow(b, double(D)) - std::pow(a, double(D)));
        const std::uint64_t n = poisson(rng, p * shell_vol);
        shell.clear();
        const double ad = std::pow(a, double(D)), bd = std::pow(b, double(D));
        for (std::uint64_t i = 0; i < n; ++i) {
          const double rad = std::pow(ad + uniform01(rng) * (bd - ad), 1.0 / double(D));
          const Vec<D> y = rad * unit_direction<D>(rng);
          ++cand_count;
          if (!in_region(y)) continue;
          ++inreg_count;
          if (uniform01(rng) * p >= params_.f(dist(y, X))) continue;
          if (!lambda_accept(y, rng)) continue;
          shell.push_back(y);
        }
        const bool existing_here = best_existing != npos && norm2(realized_[best_existing]) < b * b;
        if (!shell.empty() || existing_here) {
          note(r + 1, cand_count, inreg_count);
          NeighborDraw<D> draw;
          draw.fresh = std::move(shell);
          if (best_existing != npos) draw.existing.push_back(best_existing);
          return commit(draw);
        }
        if (b >= x) break;
        a = b;
        b = b + std::min(b, 0.5 * (x - b));
        if (x - b <= rc) b = x;
      }
    }
    throw ConditioningFailure(conditioning_message(dominating_mass()));
  }

  ModelParams params_;
  RadialMass rm_;
  NavMode mode_;
  Options opt_;
  std::uint64_t key_;
  EdgeOracle oracle_;
  std::vector<Vec<D>> realized_;
  std::vector<int> created_;
  std::size_t palm_count_ = 0;
  std::vector<std::size_t> path_;
  NavDiagnostics diag_;
};

// k-d tree over a fixed point set, used by the dense small-world oracle.
template <std::size_t D>
class KdTree {
 public:
  struct Node {
    Vec<D> lo, hi;
    std::uint32_t begin = 0, end = 0;
    std::int32_t left = -1, right = -1;
  };

  KdTree() = default;
  explicit KdTree(const std::vector<Vec<D>>& pts, std::size_t leaf = 16) : pts_(&pts), leaf_(leaf) {
    perm_.resize(pts.size());
    std::iota(perm_.begin(), perm_.end(), std::uint32_t(0));
    if (!pts.empty()) build(0, std::uint32_t(pts.size()));
  }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::uint32_t>& perm() const { return perm_; }

  static double box_dist2(const Node& nd, const Vec<D>& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < D; ++i) {
      double t = 0.0;
      if (q[i] < nd.lo[i]) t = nd.lo[i] - q[i];
      else if (q[i] > nd.hi[i]) t = q[i] - nd.hi[i];
      s += t * t;
    }
    return s;
  }

 private:
  std::int32_t build(std::uint32_t b, std::uint32_t e) {
    const auto& P = *pts_;
    Node nd;
    nd.begin = b;
    nd.end = e;
    nd.lo = nd.hi = P[perm_[b]];
    for (std::uint32_t i = b; i < e; ++i)
      for (std::size_t k = 0; k < D; ++k) {
        nd.lo[k] = std::min(nd.lo[k], P[perm_[i]][k]);
        nd.hi[k] = std::max(nd.hi[k], P[perm_[i]][k]);
      }
    const std::int32_t id = std::int32_t(nodes_.size());
    nodes_.push_back(nd);
    if (e - b > leaf_) {
      std::size_t axis = 0;
      for (std::size_t k = 1; k < D; ++k)
        if (nd.hi[k] - nd.lo[k] > nd.hi[axis] - nd.lo[axis]) axis = k;
      const std::uint32_t mid = b + (e - b) / 2;
      std::nth_element(perm_.begin() + b, perm_.begin() + mid, perm_.begin() + e,
                       [&](std::uint32_t u, std::uint32_t v) {
                         return P[u][axis] < P[v][axis] || (P[u][axis] == P[v][axis] && u < v);
                       });
      const auto l = build(b, mid);
      const auto r = build(mid, e);
      nodes_[id].left = l;
      nodes_[id].right = r;
    }
    return id;
  }

  const std::vector<Vec<D>>* pts_ = nullptr;
  std::size_t leaf_ = 16;
  std::vector<std::uint32_t> perm_;
  std::vector<Node> nodes_;
};

// Fully realized small-world graph on a point set that contains O. Coins of
// distinct nodes are disjoint (a node only flips against points of smaller
// norm), so each node's neighbor set is drawn independently from its own
// stream, and conditioning on a nonempty set is done per node given N.
template <std::size_t D>
class DenseSmallWorld {
 public:
  DenseSmallWorld(const PointSet<D>& ps, const ModelParams& p, std::uint64_t seed,
                  std::uint64_t max_rounds = 1'000'000)
      : pts_(ps.points), params_(p), key_(stream_key(seed, "dense-sw")), max_rounds_(max_rounds),
        tree_(pts_) {
    p.validate();
    require(p.d == int(D), "model dimension does not match the point dimension");
    for (std::size_t i = 0; i < pts_.size(); ++i)
      if (pts_[i] == Vec<D>{}) {
        origin_ = i;
        break;
      }
    require(origin_ != npos, "dense small-world needs O in the point set");
  }

  DenseSmallWorld(const DenseSmallWorld&) = delete;
  DenseSmallWorld& operator=(const DenseSmallWorld&) = delete;

  std::size_t origin() const { return origin_; }
  const std::vector<Vec<D>>& points() const { return pts_; }

  // Neighbors of node i inside B(O,|X_i|) for one rejection round, ascending.
  std::vector<std::size_t> neighbors(std::size_t i, std::uint64_t round) const {
    std::vector<std::size_t> out;
    if (i == origin_) return out;
    Rng rng(derive_key(key_, i, round));
    const Vec<D>& X = pts_[i];
    const double x2 = norm2(X);
    const auto& nodes = tree_.nodes();
    const auto& perm = tree_.perm();
    std::vector<std::int32_t> stack{0};
    auto flip = [&](std::uint32_t j, double scale) {
      const auto& Y = pts_[j];
      if (!(norm2(Y) < x2)) return;
      if (uniform01(rng) * scale < params_.f(dist(X, Y))) out.push_back(j);
    };
    while (!stack.empty()) {
      const auto& nd = nodes[std::size_t(stack.back())];
      stack.pop_back();
      if (KdTree<D>::box_dist2(nd, Vec<D>{}) >= x2) continue;
      const double p = params_.f(std::sqrt(KdTree<D>::box_dist2(nd, X)));
      if (!(p > 0.0)) continue;
      const std::uint32_t cnt = nd.end - nd.begin;
      if (nd.left < 0) {
        for (std::uint32_t k = nd.begin; k < nd.end; ++k) flip(perm[k], 1.0);
      } else if (double(cnt) * p <= 4.0) {
        std::uint64_t pos = nd.begin + geometric_failures(rng, p);
        while (pos < nd.end) {
          flip(perm[pos], p);
          const auto g = geometric_failures(rng, p);
          if (g >= nd.end) break;
          pos += 1 + g;
        }
      } else {
        stack.push_back(nd.right);
        stack.push_back(nd.left);
      }
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Navigation image A(X_i): least-norm neighbor, rejection until nonempty.
  std::size_t next(std::size_t i) const {
    if (i == origin_) return i;
    for (std::uint64_t r = 0; r < max_rounds_; ++r) {
      const auto nb = neighbors(i, r);
      if (nb.empty()) continue;
      std::size_t best = nb[0];
      for (auto j : nb) {
        const double a = norm2(pts_[j]), b = norm2(pts_[best]);
        if (a < b || (a == b && j < best)) best = j;
      }
      return best;
    }
    throw ConditioningFailure("conditioning failure at node " + std::to_string(i) + " after " +
                              std::to_string(max_rounds_) + " rounds");
  }

 private:
  std::vector<Vec<D>> pts_;
  ModelParams params_;
  std::uint64_t key_;
  std::uint64_t max_rounds_;
  std::size_t origin_ = npos;
  KdTree<D> tree_;
};

}  // namespace ppnav
