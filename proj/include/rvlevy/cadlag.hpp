#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace rvlevy {

/// A discontinuity of a path: x_t - x_{t-} = size.
struct Jump {
  double time = 1.0;
  std::vector<double> size;

  friend bool operator==(const Jump&, const Jump&) = default;
};

/// Whether the value at a grid time is the right limit (càdlàg) or whether
/// the path stands for a left-continuous (càglàd) process whose value at t is
/// the left limit of the stored right-continuous version.
enum class Continuity { right, left };

namespace detail {

inline double norm(std::span<const double> v) noexcept {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

inline double distance(std::span<const double> a,
                       std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

inline bool all_zero(std::span<const double> v) noexcept {
  return std::all_of(v.begin(), v.end(), [](double c) { return c == 0.0; });
}

}  // namespace detail

/// Right-continuous path with left limits on [0, 1].
///
/// Stored as values (right limits) on a strictly increasing grid that starts
/// at 0 and ends at 1, plus an explicit list of jumps. Every jump time is a
/// grid time. Between consecutive grid times the path is the linear
/// interpolation from the value at the left grid time to the left limit at
/// the right one. Immutable after construction.
class CadlagPath {
 public:
  CadlagPath(std::size_t dim, std::vector<double> grid,
             std::vector<double> values, std::vector<Jump> jumps = {},
             Continuity continuity = Continuity::right)
      : dim_(dim),
        grid_(std::move(grid)),
        values_(std::move(values)),
        jumps_(std::move(jumps)),
        continuity_(continuity) {
    validate();
  }

  /// The zero path on the grid {0, 1}.
  static CadlagPath zero(std::size_t dim) {
    return CadlagPath(dim, {0.0, 1.0}, std::vector<double>(2 * dim, 0.0));
  }

  /// size * 1_[time, 1].
  static CadlagPath step(std::vector<double> size, double time) {
    const std::size_t d = size.size();
    if (!(time > 0.0 && time <= 1.0))
      throw std::domain_error("step time must lie in (0, 1]");
    std::vector<double> grid = {0.0};
    std::vector<double> values(d, 0.0);
    if (time < 1.0) {
      grid.push_back(time);
      values.insert(values.end(), size.begin(), size.end());
    }
    grid.push_back(1.0);
    values.insert(values.end(), size.begin(), size.end());
    std::vector<Jump> jumps = {Jump{time, std::move(size)}};
    return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps));
  }

  /// Samples `f(t, out)` on the uniform grid with `steps` intervals.
  template <class F>
  static CadlagPath sample(std::size_t dim, std::size_t steps, F&& f,
                           Continuity continuity = Continuity::right) {
    if (steps < 1) throw std::domain_error("grid needs at least one step");
    std::vector<double> grid(steps + 1);
    std::vector<double> values((steps + 1) * dim);
    for (std::size_t i = 0; i <= steps; ++i) {
      grid[i] = i == steps ? 1.0 : static_cast<double>(i) / steps;
      f(grid[i], std::span<double>(values.data() + i * dim, dim));
    }
    return CadlagPath(dim, std::move(grid), std::move(values), {}, continuity);
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return grid_.size(); }
  std::span<const double> grid() const noexcept { return grid_; }
  double time(std::size_t i) const noexcept { return grid_[i]; }
  std::span<const Jump> jumps() const noexcept { return jumps_; }
  Continuity continuity() const noexcept { return continuity_; }
  std::span<const double> raw_values() const noexcept { return values_; }

  std::span<const double> value(std::size_t i) const noexcept {
    return {values_.data() + i * dim_, dim_};
  }

  /// Jump recorded at grid index i, or nullptr.
  const Jump* jump_at(std::size_t i) const noexcept {
    const int j = jump_index_[i];
    return j < 0 ? nullptr : &jumps_[static_cast<std::size_t>(j)];
  }

  /// Jump recorded at time t, or nullptr.
  const Jump* jump_at_time(double t) const noexcept {
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    if (it == grid_.end() || *it != t) return nullptr;
    return jump_at(static_cast<std::size_t>(it - grid_.begin()));
  }

  /// x_{t_i -}; at index 0 this is x_0.
  void left_limit(std::size_t i, std::span<double> out) const noexcept {
    const auto v = value(i);
    const Jump* j = jump_at(i);
    for (std::size_t k = 0; k < dim_; ++k)
      out[k] = j ? v[k] - j->size[k] : v[k];
  }

  /// Index i with grid[i] <= t < grid[i+1] (the last interval is closed).
  std::size_t interval(double t) const noexcept {
    if (t <= 0.0) return 0;
    if (t >= 1.0) return grid_.size() - 2;
    auto it = std::upper_bound(grid_.begin(), grid_.end(), t);
    return static_cast<std::size_t>(it - grid_.begin()) - 1;
  }

  /// Right value x_t.
  void eval(double t, std::span<double> out) const noexcept {
    if (t >= 1.0) {
      const auto v = value(grid_.size() - 1);
      std::copy(v.begin(), v.end(), out.begin());
      return;
    }
    interpolate(interval(t), t, out);
  }

  /// Left limit x_{t-} (x_0 at t = 0).
  void eval_left(double t, std::span<double> out) const noexcept {
    if (t <= 0.0) {
      const auto v = value(0);
      std::copy(v.begin(), v.end(), out.begin());
      return;
    }
    auto it = std::lower_bound(grid_.begin(), grid_.end(), t);
    const auto i = static_cast<std::size_t>(it - grid_.begin());
    if (it != grid_.end() && *it == t) {
      left_limit(i, out);
      return;
    }
    interpolate(i - 1, t, out);
  }

  /// Value under the path's own convention: x_t for càdlàg, x_{t-} for
  /// càglàd.
  void at(double t, std::span<double> out) const noexcept {
    if (continuity_ == Continuity::left)
      eval_left(t, out);
    else
      eval(t, out);
  }

  /// Linear interpolation inside interval i (continuous part only).
  void interpolate(std::size_t i, double t,
                   std::span<double> out) const noexcept {
    const double t0 = grid_[i];
    const double t1 = grid_[i + 1];
    const double w = (t - t0) / (t1 - t0);
    const auto v0 = value(i);
    const auto v1 = value(i + 1);
    const Jump* j = jump_at(i + 1);
    for (std::size_t k = 0; k < dim_; ++k) {
      const double end = j ? v1[k] - j->size[k] : v1[k];
      out[k] = w == 0.0 ? v0[k] : v0[k] + w * (end - v0[k]);
    }
  }

  CadlagPath with_continuity(Continuity c) const {
    CadlagPath copy = *this;
    copy.continuity_ = c;
    return copy;
  }

  friend bool operator==(const CadlagPath& a, const CadlagPath& b) {
    return a.dim_ == b.dim_ && a.grid_ == b.grid_ && a.values_ == b.values_ &&
           a.jumps_ == b.jumps_ && a.continuity_ == b.continuity_;
  }

 private:
  void validate() {
    if (dim_ == 0) throw std::domain_error("path dimension must be positive");
    if (grid_.size() < 2)
      throw std::domain_error("path grid needs at least two points");
    if (grid_.front() != 0.0 || grid_.back() != 1.0)
      throw std::domain_error("path grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < grid_.size(); ++i)
      if (!(grid_[i] > grid_[i - 1]))
        throw std::domain_error("path grid must be strictly increasing");
    if (values_.size() != grid_.size() * dim_)
      throw std::domain_error("path values do not match grid and dimension");
    for (double v : values_)
      if (!std::isfinite(v)) throw std::domain_error("path value not finite");
    jump_index_.assign(grid_.size(), -1);
    for (std::size_t j = 0; j < jumps_.size(); ++j) {
      const Jump& jump = jumps_[j];
      if (jump.size.size() != dim_)
        throw std::domain_error("jump size has wrong dimension");
      if (!(jump.time > 0.0 && jump.time <= 1.0))
        throw std::domain_error("jump time must lie in (0, 1]");
      if (j > 0 && !(jump.time > jumps_[j - 1].time))
        throw std::domain_error("jump times must be strictly increasing");
      auto it = std::lower_bound(grid_.begin(), grid_.end(), jump.time);
      if (it == grid_.end() || *it != jump.time)
        throw std::domain_error("jump time missing from grid");
      jump_index_[static_cast<std::size_t>(it - grid_.begin())] =
          static_cast<int>(j);
    }
  }

  std::size_t dim_;
  std::vector<double> grid_;
  std::vector<double> values_;
  std::vector<Jump> jumps_;
  Continuity continuity_;
  std::vector<int> jump_index_;
};

/// Strictly increasing piecewise-linear bijection of [0, 1] with
/// breakpoints[i] -> images[i].
class TimeChange {
 public:
  TimeChange() : breakpoints_{0.0, 1.0}, images_{0.0, 1.0} {}

  TimeChange(std::vector<double> breakpoints, std::vector<double> images)
      : breakpoints_(std::move(breakpoints)), images_(std::move(images)) {
    if (breakpoints_.size() != images_.size() || breakpoints_.size() < 2)
      throw std::domain_error("time change needs matching breakpoint lists");
    if (breakpoints_.front() != 0.0 || breakpoints_.back() != 1.0 ||
        images_.front() != 0.0 || images_.back() != 1.0)
      throw std::domain_error("time change must fix 0 and 1");
    for (std::size_t i = 1; i < breakpoints_.size(); ++i)
      if (!(breakpoints_[i] > breakpoints_[i - 1]) ||
          !(images_[i] > images_[i - 1]))
        throw std::domain_error("time change must be strictly increasing");
  }

  static TimeChange identity() { return {}; }

  double operator()(double t) const noexcept {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
    const auto i = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    const double w =
        (t - breakpoints_[i]) / (breakpoints_[i + 1] - breakpoints_[i]);
    return images_[i] + w * (images_[i + 1] - images_[i]);
  }

  TimeChange inverse() const { return {images_, breakpoints_}; }

  /// sup_t |lambda(t) - t|, attained at a breakpoint.
  double distortion() const noexcept {
    double d = 0.0;
    for (std::size_t i = 0; i < breakpoints_.size(); ++i)
      d = std::max(d, std::abs(images_[i] - breakpoints_[i]));
    return d;
  }

  std::span<const double> breakpoints() const noexcept { return breakpoints_; }
  std::span<const double> images() const noexcept { return images_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> images_;
};

/// Sorted union of two grids.
inline std::vector<double> merge_grids(std::span<const double> a,
                                       std::span<const double> b) {
  std::vector<double> out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// |x|_inf = sup_t |x_t|, including left limits.
inline double sup_norm(const CadlagPath& x) {
  std::vector<double> left(x.dim());
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s = std::max(s, detail::norm(x.value(i)));
    if (x.jump_at(i)) {
      x.left_limit(i, left);
      s = std::max(s, detail::norm(left));
    }
  }
  return s;
}

/// sup_t |x_t - y_t| over [0, 1].
inline double uniform_distance(const CadlagPath& x, const CadlagPath& y) {
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  const auto grid = merge_grids(x.grid(), y.grid());
  const std::size_t d = x.dim();
  std::vector<double> a(d), b(d);
  double s = 0.0;
  for (double t : grid) {
    x.eval(t, a);
    y.eval(t, b);
    s = std::max(s, detail::distance(a, b));
    if (t > 0.0) {
      x.eval_left(t, a);
      y.eval_left(t, b);
      s = std::max(s, detail::distance(a, b));
    }
  }
  return s;
}

/// Time of the first jump of maximal norm; 1 when the path has no jumps.
inline double largest_jump_time(const CadlagPath& x) {
  double best = 0.0;
  double tau = 1.0;
  for (const Jump& j : x.jumps()) {
    const double n = detail::norm(j.size);
    if (n > best) {
      best = n;
      tau = j.time;
    }
  }
  return tau;
}

/// Jump of maximal norm (first on ties), or nullptr.
inline const Jump* largest_jump(const CadlagPath& x) {
  const Jump* out = nullptr;
  double best = 0.0;
  for (const Jump& j : x.jumps()) {
    const double n = detail::norm(j.size);
    if (n > best) {
      best = n;
      out = &j;
    }
  }
  return out;
}

/// Delta x_tau * 1_[tau, 1] with tau the largest-jump time; zero path when x
/// has no jumps.
inline CadlagPath one_step_approx(const CadlagPath& x) {
  const Jump* j = largest_jump(x);
  if (!j) return CadlagPath::zero(x.dim());
  return CadlagPath::step(j->size, j->time);
}

/// Largest p such that some grid times t_0 < ... < t_p satisfy
/// |x_{t_i} - x_{t_{i-1}}| > gamma for every i.
inline std::size_t gamma_oscillation(const CadlagPath& x, double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("gamma must be positive");
  const std::size_t n = x.size();
  // chain[j]: longest admissible chain ending at grid index j.
  std::vector<std::size_t> chain(n, 0);
  std::size_t best = 0;
  for (std::size_t j = 1; j < n; ++j) {
    const auto xj = x.value(j);
    for (std::size_t i = 0; i < j; ++i) {
      if (chain[i] + 1 <= chain[j]) continue;
      if (detail::distance(xj, x.value(i)) > gamma) chain[j] = chain[i] + 1;
    }
    best = std::max(best, chain[j]);
  }
  return best;
}

/// Componentwise product y x on the merged grid. At a common time t the
/// product jumps by y_{t-} dx + dy x_{t-} + dy dx; vanishing jumps are
/// dropped.
inline CadlagPath cw_product(const CadlagPath& y, const CadlagPath& x) {
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  const std::size_t d = x.dim();
  auto grid = merge_grids(x.grid(), y.grid());
  std::vector<double> values(grid.size() * d);
  std::vector<Jump> jumps;
  std::vector<double> xv(d), yv(d), xl(d), yl(d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    x.eval(t, xv);
    y.eval(t, yv);
    for (std::size_t k = 0; k < d; ++k) values[i * d + k] = yv[k] * xv[k];
    if (t == 0.0) continue;
    const Jump* jx = x.jump_at_time(t);
    const Jump* jy = y.jump_at_time(t);
    if (!jx && !jy) continue;
    x.eval_left(t, xl);
    y.eval_left(t, yl);
    std::vector<double> size(d);
    for (std::size_t k = 0; k < d; ++k) {
      const double dx = jx ? jx->size[k] : 0.0;
      const double dy = jy ? jy->size[k] : 0.0;
      size[k] = yl[k] * dx + dy * xl[k] + dy * dx;
    }
    if (!detail::all_zero(size)) jumps.push_back(Jump{t, std::move(size)});
  }
  return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps));
}

/// a x + b y on the merged grid.
inline CadlagPath linear_combination(double a, const CadlagPath& x, double b,
                                     const CadlagPath& y) {
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  const std::size_t d = x.dim();
  auto grid = merge_grids(x.grid(), y.grid());
  std::vector<double> values(grid.size() * d);
  std::vector<double> xv(d), yv(d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    x.eval(grid[i], xv);
    y.eval(grid[i], yv);
    for (std::size_t k = 0; k < d; ++k)
      values[i * d + k] = a * xv[k] + b * yv[k];
  }
  std::vector<Jump> jumps;
  auto xi = x.jumps().begin();
  auto yi = y.jumps().begin();
  while (xi != x.jumps().end() || yi != y.jumps().end()) {
    const double tx = xi != x.jumps().end() ? xi->time : 2.0;
    const double ty = yi != y.jumps().end() ? yi->time : 2.0;
    const double t = std::min(tx, ty);
    std::vector<double> size(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      if (tx == t) size[k] += a * xi->size[k];
      if (ty == t) size[k] += b * yi->size[k];
    }
    if (tx == t) ++xi;
    if (ty == t) ++yi;
    if (!detail::all_zero(size)) jumps.push_back(Jump{t, std::move(size)});
  }
  return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps),
                    x.continuity());
}

/// s * x.
inline CadlagPath scaled(const CadlagPath& x, double s) {
  std::vector<double> values(x.raw_values().begin(), x.raw_values().end());
  for (double& v : values) v *= s;
  std::vector<Jump> jumps(x.jumps().begin(), x.jumps().end());
  for (Jump& j : jumps)
    for (double& c : j.size) c *= s;
  return CadlagPath(x.dim(), std::vector<double>(x.grid().begin(),
                                                 x.grid().end()),
                    std::move(values), std::move(jumps), x.continuity());
}

// Serialization: {d, grid, values: [[...]], jumps: [{t, size}]}.

inline void to_json(nlohmann::json& j, const CadlagPath& x) {
  nlohmann::json values = nlohmann::json::array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto v = x.value(i);
    values.push_back(std::vector<double>(v.begin(), v.end()));
  }
  nlohmann::json jumps = nlohmann::json::array();
  for (const Jump& jp : x.jumps())
    jumps.push_back({{"t", jp.time}, {"size", jp.size}});
  j = {{"d", x.dim()},
       {"grid", std::vector<double>(x.grid().begin(), x.grid().end())},
       {"values", std::move(values)},
       {"jumps", std::move(jumps)}};
  if (x.continuity() == Continuity::left) j["convention"] = "caglad";
}

inline CadlagPath path_from_json(const nlohmann::json& j) {
  const auto d = j.at("d").get<std::size_t>();
  auto grid = j.at("grid").get<std::vector<double>>();
  std::vector<double> values;
  values.reserve(grid.size() * d);
  for (const auto& row : j.at("values")) {
    auto r = row.get<std::vector<double>>();
    if (r.size() != d) throw std::domain_error("path row has wrong dimension");
    values.insert(values.end(), r.begin(), r.end());
  }
  std::vector<Jump> jumps;
  for (const auto& jp : j.at("jumps"))
    jumps.push_back(
        Jump{jp.at("t").get<double>(), jp.at("size").get<std::vector<double>>()});
  const auto convention = j.value("convention", std::string("cadlag"));
  return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps),
                    convention == "caglad" ? Continuity::left
                                           : Continuity::right);
}

/// One row per grid time: t, x1, ..., xd. Values print with 17 significant
/// digits so the file round-trips exactly.
inline void write_csv(std::ostream& os, const CadlagPath& x,
                      const std::string& label = "x") {
  os << "t";
  for (std::size_t k = 0; k < x.dim(); ++k) os << ',' << label << k + 1;
  os << '\n';
  char buf[32];
  for (std::size_t i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", x.time(i));
    os << buf;
    for (double v : x.value(i)) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace rvlevy
