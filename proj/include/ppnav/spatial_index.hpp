#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "point_process.hpp"

namespace ppnav {

// Uniform grid over the bounding box of a window, cell size about 1.
// Points outside the box (e.g. O for an off-center window) go to an overflow list.
template <std::size_t D>
class SpatialIndex {
 public:
  SpatialIndex() = default;

  explicit SpatialIndex(const PointSet<D>& ps) : SpatialIndex(ps.points, ps.window) {}

  SpatialIndex(std::span<const Vec<D>> pts, const Window<D>& w) : pts_(pts.begin(), pts.end()) {
    const double R = std::max(w.outer, 1e-9);
    for (std::size_t i = 0; i < D; ++i) lo_[i] = w.center[i] - R;
    const std::size_t n = pts_.size();
    h_ = 1.0;
    const double cap = 4.0 * double(n) + 64.0;
    for (;;) {
      m_ = std::max<std::int64_t>(1, std::int64_t(std::ceil(2.0 * R / h_)));
      if (std::pow(double(m_), double(D)) <= cap) break;
      h_ *= 1.25;
    }
    ncells_ = 1;
    for (std::size_t i = 0; i < D; ++i) ncells_ *= std::size_t(m_);
    start_.assign(ncells_ + 1, 0);
    std::vector<std::int64_t> cell_of(n, -1);
    for (std::size_t j = 0; j < n; ++j) {
      const auto c = cell_id(pts_[j]);
      if (c < 0) {
        overflow_.push_back(j);
      } else {
        cell_of[j] = c;
        ++start_[std::size_t(c) + 1];
      }
    }
    for (std::size_t c = 0; c < ncells_; ++c) start_[c + 1] += start_[c];
    items_.resize(start_[ncells_]);
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (cell_of[j] >= 0) items_[fill[std::size_t(cell_of[j])]++] = j;
  }

  std::size_t size() const { return pts_.size(); }
  const Vec<D>& point(std::size_t i) const { return pts_[i]; }
  double cell_size() const { return h_; }

  // Indices with |P - center| < r, ascending.
  std::vector<std::size_t> query_ball(const Vec<D>& center, double r) const {
    std::vector<std::size_t> out;
    if (!(r > 0.0) || pts_.empty()) return out;
    const double r2 = r * r;
    for (auto j : overflow_)
      if (dist2(pts_[j], center) < r2) out.push_back(j);
    std::array<std::int64_t, D> a{}, b{};
    for (std::size_t i = 0; i < D; ++i) {
      a[i] = std::max<std::int64_t>(0, coord(center[i] - r, i));
      b[i] = std::min<std::int64_t>(m_ - 1, coord(center[i] + r, i));
      if (a[i] > b[i]) {
        std::sort(out.begin(), out.end());
        return out;
      }
    }
    std::array<std::int64_t, D> c = a;
    for (;;) {
      const std::size_t id = linear(c);
      for (std::size_t k = start_[id]; k < start_[id + 1]; ++k) {
        const auto j = items_[k];
        if (dist2(pts_[j], center) < r2) out.push_back(j);
      }
      std::size_t i = 0;
      while (i < D) {
        if (++c[i] <= b[i]) break;
        c[i] = a[i];
        ++i;
      }
      if (i == D) break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  // Nearest point to `center` among those accepted by `in_region(index, point)`.
  // Ties go to the lowest index. Expanding ring search over grid cells.
  template <class Pred>
  std::optional<std::size_t> nearest_in_region(const Vec<D>& center, Pred&& in_region) const {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_j = std::numeric_limits<std::size_t>::max();
    auto consider = [&](std::size_t j) {
      if (!in_region(j, pts_[j])) return;
      const double d2 = dist2(pts_[j], center);
      if (d2 < best || (d2 == best && j < best_j)) {
        best = d2;
        best_j = j;
      }
    };
    for (auto j : overflow_) consider(j);
    std::array<std::int64_t, D> cc{};
    std::int64_t reach = 0, first = 0;
    for (std::size_t i = 0; i < D; ++i) {
      cc[i] = coord(center[i], i);
      reach = std::max({reach, cc[i], m_ - 1 - cc[i]});
      first = std::max({first, -cc[i], cc[i] - (m_ - 1)});
    }
    for (std::int64_t L = first; L <= reach + 1; ++L) {
      visit_ring(cc, L, [&](std::size_t id) {
        for (std::size_t k = start_[id]; k < start_[id + 1]; ++k) consider(items_[k]);
      });
      const double lb = double(L) * h_;
      if (best_j != std::numeric_limits<std::size_t>::max() && best < lb * lb) break;
    }
    if (best_j == std::numeric_limits<std::size_t>::max()) return std::nullopt;
    return best_j;
  }

 private:
  std::int64_t coord(double x, std::size_t i) const {
    const double t = std::floor((x - lo_[i]) / h_);
    if (t < -1e15) return std::int64_t(-1e15);
    if (t > 1e15) return std::int64_t(1e15);
    return std::int64_t(t);
  }

  std::int64_t cell_id(const Vec<D>& p) const {
    std::array<std::int64_t, D> c{};
    for (std::size_t i = 0; i < D; ++i) {
      c[i] = coord(p[i], i);
      if (c[i] < 0 || c[i] >= m_) return -1;
    }
    return std::int64_t(linear(c));
  }

  std::size_t linear(const std::array<std::int64_t, D>& c) const {
    std::size_t id = 0;
    for (std::size_t i = D; i-- > 0;) id = id * std::size_t(m_) + std::size_t(c[i]);
    return id;
  }

  // Cells at Chebyshev distance exactly L from cc, clipped to the grid.
  template <class F>
  void visit_ring(const std::array<std::int64_t, D>& cc, std::int64_t L, F&& fn) const {
    std::array<std::int64_t, D> c{};
    auto rec = [&](auto&& self, std::size_t dim, bool on_face) -> void {
      if (dim == D) {
        if (on_face) fn(linear(c));
        return;
      }
      const std::int64_t lo = cc[dim] - L, hi = cc[dim] + L;
      const bool last = dim + 1 == D;
      if (last && !on_face) {
        for (std::int64_t v : {lo, hi}) {
          if (v < 0 || v >= m_) continue;
          c[dim] = v;
          self(self, dim + 1, true);
          if (L == 0) break;
        }
        return;
      }
      for (std::int64_t v = std::max<std::int64_t>(lo, 0); v <= std::min<std::int64_t>(hi, m_ - 1); ++v) {
        c[dim] = v;
        self(self, dim + 1, on_face || v == lo || v == hi);
      }
    };
    rec(rec, 0, false);
  }

  std::vector<Vec<D>> pts_;
  Vec<D> lo_{};
  double h_ = 1.0;
  std::int64_t m_ = 1;
  std::size_t ncells_ = 1;
  std::vector<std::size_t> start_;
  std::vector<std::size_t> items_;
  std::vector<std::size_t> overflow_;
};

}  // namespace ppnav
