#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rvlevy/cadlag.hpp"

namespace rvlevy {

/// Result of the J1 search: the distance bound and the time change lambda
/// (acting on the time axis of y, with values on the time axis of x) that
/// attains it.
struct J1Match {
  double distance = 0.0;
  TimeChange time_change;
};

namespace detail {

struct J1Node {
  double s;  // time on x's axis
  double u;  // time on y's axis, lambda(u) = s
};

class J1Segments {
 public:
  static constexpr double kCoincide = 1e-13;

  J1Segments(const CadlagPath& x, const CadlagPath& y, double scale)
      : x_(x), y_(y), scale_(scale), d_(x.dim()), xa_(d_), xb_(d_), ya_(d_),
        yb_(d_) {}

  /// sup of scale * |x(lambda(u)) - y(u)| over u in [a.u, b.u) with lambda
  /// linear from a to b, including left limits at b.u (and the values at 1
  /// when b is the terminal node). Returns early once `limit` is exceeded.
  double cost(const J1Node& a, const J1Node& b, double limit) {
    const double du = b.u - a.u;
    const double ds = b.s - a.s;
    double worst = 0.0;
    auto check = [&](std::span<const double> p, std::span<const double> q) {
      worst = std::max(worst, scale_ * distance(p, q));
      return worst > limit;
    };

    x_.eval(a.s, xa_);
    y_.eval(a.u, ya_);
    if (check(xa_, ya_)) return worst;

    const auto xg = x_.grid();
    const auto yg = y_.grid();
    std::size_t ix = static_cast<std::size_t>(
        std::upper_bound(xg.begin(), xg.end(), a.s) - xg.begin());
    std::size_t iy = static_cast<std::size_t>(
        std::upper_bound(yg.begin(), yg.end(), a.u) - yg.begin());

    while (true) {
      const bool x_open = ix < xg.size() && xg[ix] < b.s;
      const bool y_open = iy < yg.size() && yg[iy] < b.u;
      if (!x_open && !y_open) break;
      const double ux =
          x_open ? a.u + (xg[ix] - a.s) * du / ds
                 : std::numeric_limits<double>::infinity();
      const double uy = y_open ? yg[iy] : std::numeric_limits<double>::infinity();
      if (x_open && y_open && std::abs(ux - uy) <= kCoincide) {
        // Shared breakpoint: compare right values and left limits pairwise.
        if (check(x_.value(ix), y_.value(iy))) return worst;
        x_.left_limit(ix, xa_);
        y_.left_limit(iy, ya_);
        if (check(xa_, ya_)) return worst;
        ++ix;
        ++iy;
      } else if (ux < uy) {
        // x grid point against the continuous part of y.
        y_.interpolate(iy - 1, ux, ya_);
        if (check(x_.value(ix), ya_)) return worst;
        if (x_.jump_at(ix)) {
          x_.left_limit(ix, xa_);
          if (check(xa_, ya_)) return worst;
        }
        ++ix;
      } else {
        const double s = a.s + (uy - a.u) * ds / du;
        x_.interpolate(ix - 1, s, xa_);
        if (check(xa_, y_.value(iy))) return worst;
        if (y_.jump_at(iy)) {
          y_.left_limit(iy, ya_);
          if (check(xa_, ya_)) return worst;
        }
        ++iy;
      }
    }

    x_.eval_left(b.s, xa_);
    y_.eval_left(b.u, ya_);
    if (check(xa_, ya_)) return worst;
    if (b.s == 1.0 && b.u == 1.0) {
      x_.eval(1.0, xb_);
      y_.eval(1.0, yb_);
      check(xb_, yb_);
    }
    return worst;
  }

 private:
  const CadlagPath& x_;
  const CadlagPath& y_;
  double scale_;
  std::size_t d_;
  std::vector<double> xa_, xb_, ya_, yb_;
};

}  // namespace detail

/// Approximate Skorokhod J1 distance
///   d(x, y) = inf_lambda max(|lambda - id|_inf, |x o lambda - y|_inf)
/// over piecewise-linear time changes. Breakpoints pair a jump time of x
/// with a jump time of y (or a point beside it), or fix a jump time or one
/// of the dyadic points k 2^{-refinement}.
/// The identity belongs to the search family, so the result never exceeds
/// the uniform distance. Path differences are multiplied by `path_scale`,
/// which evaluates d(s x, s y) without copying the paths.
inline J1Match j1_match(const CadlagPath& x, const CadlagPath& y,
                        unsigned refinement = 3, double path_scale = 1.0) {
  using detail::J1Node;
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  if (refinement > 16) throw std::domain_error("refinement too large");

  constexpr double kSide = 1e-9;
  detail::J1Segments segments(x, y, path_scale);
  const J1Node start{0.0, 0.0};
  const J1Node finish{1.0, 1.0};
  const double inf = std::numeric_limits<double>::infinity();
  const double uniform = segments.cost(start, finish, inf);

  std::vector<J1Node> nodes;
  nodes.push_back(start);
  for (const Jump& jx : x.jumps())
    if (jx.time < 1.0) nodes.push_back({jx.time, jx.time});
  for (const Jump& jy : y.jumps())
    if (jy.time < 1.0) nodes.push_back({jy.time, jy.time});
  for (const Jump& jx : x.jumps()) {
    if (jx.time >= 1.0) continue;
    for (const Jump& jy : y.jumps()) {
      if (jy.time >= 1.0) continue;
      if (!(std::abs(jx.time - jy.time) < uniform)) continue;
      nodes.push_back({jx.time, jy.time});
      // A jump placed immediately beside its partner, for when two jumps
      // compete for the same one.
      if (jy.time - kSide > 0.0) nodes.push_back({jx.time, jy.time - kSide});
      if (jy.time + kSide < 1.0) nodes.push_back({jx.time, jy.time + kSide});
      if (jx.time - kSide > 0.0) nodes.push_back({jx.time - kSide, jy.time});
      if (jx.time + kSide < 1.0) nodes.push_back({jx.time + kSide, jy.time});
    }
  }
  const std::size_t dyadic = std::size_t{1} << refinement;
  for (std::size_t k = 1; k < dyadic; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(dyadic);
    nodes.push_back({t, t});
  }
  std::sort(nodes.begin() + 1, nodes.end(), [](const J1Node& a, const J1Node& b) {
    return a.u < b.u || (a.u == b.u && a.s < b.s);
  });
  nodes.erase(std::unique(nodes.begin() + 1, nodes.end(),
                          [](const J1Node& a, const J1Node& b) {
                            return a.u == b.u && a.s == b.s;
                          }),
              nodes.end());
  nodes.push_back(finish);

  const std::size_t n = nodes.size();
  std::vector<double> best(n, inf);
  std::vector<std::size_t> prev(n, 0);
  best[0] = 0.0;
  for (std::size_t q = 1; q < n; ++q) {
    const J1Node& b = nodes[q];
    const double distortion = std::abs(b.s - b.u);
    if (q == n - 1) {
      best[q] = uniform;
      prev[q] = 0;
    }
    for (std::size_t p = 0; p < q; ++p) {
      const J1Node& a = nodes[p];
      if (!(a.s < b.s && a.u < b.u)) continue;
      if (q == n - 1 && p == 0) continue;
      const double lower = std::max(best[p], distortion);
      if (lower >= best[q]) continue;
      const double c = segments.cost(a, b, best[q]);
      const double total = std::max(lower, c);
      if (total < best[q]) {
        best[q] = total;
        prev[q] = p;
      }
    }
  }

  std::vector<double> breakpoints, images;
  for (std::size_t k = n - 1;; k = prev[k]) {
    breakpoints.push_back(nodes[k].u);
    images.push_back(nodes[k].s);
    if (k == 0) break;
  }
  std::reverse(breakpoints.begin(), breakpoints.end());
  std::reverse(images.begin(), images.end());
  return {best[n - 1], TimeChange(std::move(breakpoints), std::move(images))};
}

inline double j1_distance(const CadlagPath& x, const CadlagPath& y,
                          unsigned refinement = 3, double path_scale = 1.0) {
  return j1_match(x, y, refinement, path_scale).distance;
}

}  // namespace rvlevy
