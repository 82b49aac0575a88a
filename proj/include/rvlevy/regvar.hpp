#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rvlevy/cadlag.hpp"
#include "rvlevy/parallel.hpp"
#include "rvlevy/rng.hpp"

namespace rvlevy {

struct SpectralAtom {
  std::vector<double> direction;
  double weight = 0.0;

  friend bool operator==(const SpectralAtom&, const SpectralAtom&) = default;
};

/// Limit measure mu on punctured d-space in polar form:
/// mu{x : |x| > r, x/|x| in A} = c r^{-alpha} sigma(A), with sigma a finite
/// atom list on the unit sphere.
class RegVarMeasure {
 public:
  RegVarMeasure(double alpha, double c, std::vector<SpectralAtom> spectral)
      : alpha_(alpha), c_(c), spectral_(std::move(spectral)) {
    if (!(alpha_ > 0.0) || !std::isfinite(alpha_))
      throw std::domain_error("alpha must be positive");
    if (!(c_ > 0.0) || !std::isfinite(c_))
      throw std::domain_error("intensity c must be positive");
    if (spectral_.empty())
      throw std::domain_error("spectral measure needs at least one atom");
    const std::size_t d = spectral_.front().direction.size();
    if (d == 0) throw std::domain_error("spectral direction is empty");
    double total = 0.0;
    for (const auto& a : spectral_) {
      if (a.direction.size() != d)
        throw std::domain_error("spectral directions differ in dimension");
      if (!(a.weight >= 0.0))
        throw std::domain_error("spectral weight must be nonnegative");
      if (std::abs(detail::norm(a.direction) - 1.0) > 1e-12)
        throw std::domain_error("spectral direction must have unit norm");
      total += a.weight;
    }
    if (std::abs(total - 1.0) > 1e-12)
      throw std::domain_error("spectral weights must sum to 1");
  }

  /// d = 1 with mass p_plus on +1 and 1 - p_plus on -1.
  static RegVarMeasure univariate(double alpha, double c, double p_plus = 1.0) {
    std::vector<SpectralAtom> atoms;
    if (p_plus > 0.0) atoms.push_back({{1.0}, p_plus});
    if (p_plus < 1.0) atoms.push_back({{-1.0}, 1.0 - p_plus});
    return RegVarMeasure(alpha, c, std::move(atoms));
  }

  double alpha() const noexcept { return alpha_; }
  double intensity() const noexcept { return c_; }
  std::size_t dim() const noexcept {
    return spectral_.front().direction.size();
  }
  std::span<const SpectralAtom> spectral() const noexcept { return spectral_; }

  friend bool operator==(const RegVarMeasure&, const RegVarMeasure&) = default;

 private:
  double alpha_;
  double c_;
  std::vector<SpectralAtom> spectral_;
};

using DirectionPredicate = std::function<bool(std::span<const double>)>;

/// Directions with positive inner product against `normal`.
inline DirectionPredicate half_space(std::vector<double> normal) {
  return [n = std::move(normal)](std::span<const double> dir) {
    double s = 0.0;
    for (std::size_t k = 0; k < n.size(); ++k) s += n[k] * dir[k];
    return s > 0.0;
  };
}

/// sigma(A) for the set of directions accepted by `pred` (all when empty).
inline double spectral_mass(const RegVarMeasure& m,
                            const DirectionPredicate& pred = {}) {
  double s = 0.0;
  for (const auto& a : m.spectral())
    if (!pred || pred(a.direction)) s += a.weight;
  return s;
}

/// mu{x : |x| > r, x/|x| in A} = c r^{-alpha} sigma(A).
inline double mu_tail(const RegVarMeasure& m, double r,
                      const DirectionPredicate& pred = {}) {
  if (!(r > 0.0)) throw std::domain_error("radius must be positive");
  return m.intensity() * std::pow(r, -m.alpha()) * spectral_mass(m, pred);
}

/// a(n) = (c n)^{1/alpha}, the exact 1/n tail quantile of mu.
struct ScalingSequence {
  double alpha = 1.0;
  double intensity = 1.0;

  static ScalingSequence of(const RegVarMeasure& m) {
    return {m.alpha(), m.intensity()};
  }
};

inline double scaling(const ScalingSequence& seq, std::uint64_t n) {
  if (n < 1) throw std::domain_error("scaling index must be >= 1");
  return std::pow(seq.intensity * static_cast<double>(n), 1.0 / seq.alpha);
}

enum class SetKind { sup_norm, endpoint, running_sup, radial_cone };

/// Path sets bounded away from the zero path for which m and m* have closed
/// (or one-dimensional) forms.
///
///  - sup_norm:    {z : |z|_inf > level}
///  - endpoint:    {z : <w, z_t> > level}
///  - running_sup: {z : sup_{s <= t} <w, z_s> > level}
///  - radial_cone: {z : |z_1| > level, z_1/|z_1| in A}
///
/// w is `projection` (defaults to the first coordinate axis).
struct SetDescriptor {
  SetKind kind = SetKind::sup_norm;
  double level = 1.0;
  double time = 1.0;
  std::vector<double> projection;
  DirectionPredicate direction;

  static SetDescriptor sup_norm_exceedance(double u) {
    return {SetKind::sup_norm, u, 1.0, {}, {}};
  }
  static SetDescriptor endpoint_exceedance(double t, double u,
                                           std::vector<double> w = {}) {
    return {SetKind::endpoint, u, t, std::move(w), {}};
  }
  static SetDescriptor running_sup_exceedance(double t, double u,
                                              std::vector<double> w = {}) {
    return {SetKind::running_sup, u, t, std::move(w), {}};
  }
  static SetDescriptor radial_cone(double r, DirectionPredicate pred = {}) {
    return {SetKind::radial_cone, r, 1.0, {}, std::move(pred)};
  }

  /// The set s * B.
  SetDescriptor scaled(double s) const {
    SetDescriptor out = *this;
    out.level *= s;
    return out;
  }

  /// Largest step time v for which v * 1_[v,1] can enter the set.
  double time_horizon() const noexcept {
    return kind == SetKind::endpoint || kind == SetKind::running_sup ? time
                                                                     : 1.0;
  }
};

namespace detail {

inline void check_set(const SetDescriptor& set, std::size_t dim) {
  if (!(set.level > 0.0))
    throw std::domain_error("set must be bounded away from the zero path");
  switch (set.kind) {
    case SetKind::sup_norm:
    case SetKind::radial_cone:
      return;
    case SetKind::endpoint:
    case SetKind::running_sup:
      if (!(set.time >= 0.0 && set.time <= 1.0))
        throw std::domain_error("functional time must lie in [0, 1]");
      if (!set.projection.empty() && set.projection.size() != dim)
        throw std::domain_error("projection has wrong dimension");
      return;
  }
  throw std::invalid_argument("unsupported set kind");
}

/// mu{x : y x 1_[v,1] in B} / (c level^{-alpha}) for a step time v inside
/// the set's time horizon. Homogeneity reduces the mass to a weighted sum
/// over spectral atoms of |y theta|^alpha restricted to the admissible
/// directions.
inline double step_shape(const RegVarMeasure& m, const SetDescriptor& set,
                         std::span<const double> y) {
  const double alpha = m.alpha();
  const std::size_t d = m.dim();
  double total = 0.0;
  std::vector<double> prod(d);
  for (const auto& atom : m.spectral()) {
    if (atom.weight == 0.0) continue;
    for (std::size_t k = 0; k < d; ++k) prod[k] = y[k] * atom.direction[k];
    double radial = 0.0;
    switch (set.kind) {
      case SetKind::sup_norm:
        radial = norm(prod);
        break;
      case SetKind::radial_cone: {
        radial = norm(prod);
        if (radial > 0.0 && set.direction) {
          std::vector<double> unit(prod);
          for (double& c : unit) c /= radial;
          if (!set.direction(unit)) radial = 0.0;
        }
        break;
      }
      case SetKind::endpoint:
      case SetKind::running_sup: {
        double s = 0.0;
        if (set.projection.empty()) {
          s = prod[0];
        } else {
          for (std::size_t k = 0; k < d; ++k) s += set.projection[k] * prod[k];
        }
        radial = s > 0.0 ? s : 0.0;
        break;
      }
    }
    if (radial > 0.0) total += atom.weight * std::pow(radial, alpha);
  }
  return total;
}

/// int_0^h shape(Y_v) dv by the trapezoid rule on the path grid.
inline double integrate_shape(const RegVarMeasure& m, const SetDescriptor& set,
                              const CadlagPath& y, double horizon) {
  const std::size_t d = y.dim();
  std::vector<double> a(d), b(d);
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < y.size(); ++i) {
    const double t0 = y.time(i);
    if (t0 >= horizon) break;
    const double t1 = std::min(y.time(i + 1), horizon);
    const auto v0 = y.value(i);
    std::copy(v0.begin(), v0.end(), a.begin());
    if (t1 == y.time(i + 1))
      y.left_limit(i + 1, b);
    else
      y.interpolate(i, t1, b);
    integral += 0.5 * (t1 - t0) * (step_shape(m, set, a) + step_shape(m, set, b));
  }
  return integral;
}

template <class Sampler>
auto draw(Sampler& sampler, std::uint64_t seed, std::uint64_t replicate,
          StreamTag tag) {
  if constexpr (std::is_invocable_v<Sampler&, Rng&>) {
    Rng rng = make_stream(seed, replicate, tag);
    return sampler(rng);
  } else {
    return sampler(seed, replicate);
  }
}

}  // namespace detail

/// Monte Carlo mean with its standard error.
struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

inline McEstimate to_estimate(const MeanAccumulator& acc) {
  const double se =
      acc.n > 0 ? std::sqrt(acc.variance() / static_cast<double>(acc.n)) : 0.0;
  return {acc.mean, se, acc.n};
}

/// m(B) = int_0^1 mu{y : y 1_[t,1] in B} dt for the Lévy limit measure.
inline double m_eval(const RegVarMeasure& m, const SetDescriptor& set) {
  detail::check_set(set, m.dim());
  const std::vector<double> ones(m.dim(), 1.0);
  return m.intensity() * std::pow(set.level, -m.alpha()) *
         detail::step_shape(m, set, ones) * set.time_horizon();
}

/// m*(B) = E mu{x : Y_V x 1_[V,1] in B} with V uniform on [0, 1).
///
/// `sampler(seed, replicate)` (or `sampler(rng)`) returns a path of Y. For
/// each path the mu-mass is exact and V is integrated out on the path grid,
/// so only the law of Y contributes Monte Carlo noise.
template <class PathSampler>
McEstimate mstar_eval(const RegVarMeasure& m, PathSampler sampler,
                      const SetDescriptor& set, std::size_t n_mc,
                      std::uint64_t seed) {
  if (n_mc == 0) throw std::domain_error("n_mc must be positive");
  detail::check_set(set, m.dim());
  const double scale = m.intensity() * std::pow(set.level, -m.alpha());
  const double horizon = set.time_horizon();
  auto acc = block_reduce(
      n_mc, [] { return MeanAccumulator{}; },
      [&](std::size_t begin, std::size_t end, MeanAccumulator& a) {
        for (std::size_t r = begin; r < end; ++r) {
          const CadlagPath y =
              detail::draw(sampler, seed, r, StreamTag::integrand);
          if (y.dim() != m.dim())
            throw std::domain_error("integrand dimension mismatch");
          a.add(scale * detail::integrate_shape(m, set, y, horizon));
        }
      },
      [](MeanAccumulator& into, const MeanAccumulator& from) {
        into.merge(from);
      });
  return to_estimate(acc);
}

/// Monte Carlo estimate of E(Y^alpha) for a nonnegative scalar sampler.
template <class ScalarSampler>
McEstimate breiman_constant(ScalarSampler sampler, double alpha,
                            std::size_t n_mc, std::uint64_t seed) {
  if (!(alpha > 0.0)) throw std::domain_error("alpha must be positive");
  if (n_mc == 0) throw std::domain_error("n_mc must be positive");
  auto acc = block_reduce(
      n_mc, [] { return MeanAccumulator{}; },
      [&](std::size_t begin, std::size_t end, MeanAccumulator& a) {
        for (std::size_t r = begin; r < end; ++r) {
          const double y = detail::draw(sampler, seed, r, StreamTag::multiplier);
          if (y < 0.0) throw std::domain_error("multiplier must be nonnegative");
          a.add(std::pow(y, alpha));
        }
      },
      [](MeanAccumulator& into, const MeanAccumulator& from) {
        into.merge(from);
      });
  return to_estimate(acc);
}

// Serialization: {alpha, c, spectral: [{dir: [...], w}]}.

inline void to_json(nlohmann::json& j, const RegVarMeasure& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.spectral())
    atoms.push_back({{"dir", a.direction}, {"w", a.weight}});
  j = {{"alpha", m.alpha()}, {"c", m.intensity()}, {"spectral", atoms}};
}

inline std::vector<SpectralAtom> spectral_from_json(const nlohmann::json& j) {
  std::vector<SpectralAtom> atoms;
  for (const auto& a : j)
    atoms.push_back({a.at("dir").get<std::vector<double>>(),
                     a.at("w").get<double>()});
  return atoms;
}

inline RegVarMeasure measure_from_json(const nlohmann::json& j) {
  return RegVarMeasure(j.at("alpha").get<double>(), j.at("c").get<double>(),
                       spectral_from_json(j.at("spectral")));
}

}  // namespace rvlevy
