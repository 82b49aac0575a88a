#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rvlevy/cadlag.hpp"
#include "rvlevy/regvar.hpp"
#include "rvlevy/rng.hpp"

namespace rvlevy {

/// Generating data of a regularly varying Lévy process X = X~ + J.
///
/// J is compound Poisson with rate `big_jump_intensity` and jumps
/// Z = R Theta, where P(R > r) = r^{-alpha} on [1, inf) and Theta is drawn
/// from the spectral atoms. X~ is Brownian motion with covariance
/// diffusion diffusion^T plus drift. The induced limit measure has
/// c = big_jump_intensity.
struct LevyModel {
  std::size_t dim = 1;
  double big_jump_intensity = 1.0;
  double alpha = 1.5;
  std::vector<SpectralAtom> spectral{{{1.0}, 1.0}};
  std::vector<double> diffusion{0.0};  // row-major d x d
  std::vector<double> drift{0.0};

  void validate() const {
    if (dim == 0) throw std::domain_error("model dimension must be positive");
    if (!(big_jump_intensity > 0.0) || !std::isfinite(big_jump_intensity))
      throw std::domain_error("big-jump intensity must be positive");
    if (diffusion.size() != dim * dim)
      throw std::domain_error("diffusion must be a d x d matrix");
    if (drift.size() != dim) throw std::domain_error("drift must have length d");
    for (double v : diffusion)
      if (!std::isfinite(v)) throw std::domain_error("diffusion not finite");
    for (double v : drift)
      if (!std::isfinite(v)) throw std::domain_error("drift not finite");
    const RegVarMeasure m = induced_measure();
    if (m.dim() != dim)
      throw std::domain_error("spectral directions must have dimension d");
  }

  RegVarMeasure induced_measure() const {
    return RegVarMeasure(alpha, big_jump_intensity, spectral);
  }

  bool has_gaussian_part() const noexcept {
    return std::any_of(diffusion.begin(), diffusion.end(),
                       [](double v) { return v != 0.0; });
  }

  static LevyModel univariate(double intensity, double alpha, double sigma = 0.0,
                              double drift = 0.0, double p_plus = 1.0) {
    LevyModel m;
    m.dim = 1;
    m.big_jump_intensity = intensity;
    m.alpha = alpha;
    const auto measure = RegVarMeasure::univariate(alpha, intensity, p_plus);
    m.spectral.assign(measure.spectral().begin(), measure.spectral().end());
    m.diffusion = {sigma};
    m.drift = {drift};
    return m;
  }
};

/// A big jump (time in (0, 1], |size| >= 1).
using JumpRecord = Jump;

struct SimConfig {
  std::size_t grid_size = 4096;
  std::uint64_t seed = 0;
  std::uint64_t replicate_index = 0;

  void validate() const {
    if (grid_size < 2) throw std::domain_error("grid_size must be >= 2");
  }
};

/// Compound Poisson points on (0, 1]: N ~ Poisson(lambda), sorted uniform
/// times, Pareto(alpha) radii, spectral directions.
inline std::vector<JumpRecord> simulate_big_jumps(const LevyModel& model,
                                                  const SimConfig& cfg) {
  Rng rng = make_stream(cfg.seed, cfg.replicate_index, StreamTag::jumps);
  std::poisson_distribution<std::size_t> count(model.big_jump_intensity);
  const std::size_t n = count(rng);
  std::vector<double> times(n);
  for (;;) {
    for (double& t : times) t = uniform_open_closed(rng);
    std::sort(times.begin(), times.end());
    if (std::adjacent_find(times.begin(), times.end()) == times.end()) break;
  }
  std::vector<JumpRecord> jumps;
  jumps.reserve(n);
  for (double t : times) {
    const double r = pareto(rng, model.alpha);
    const double pick = uniform01(rng);
    double cum = 0.0;
    const SpectralAtom* atom = &model.spectral.back();
    for (const auto& a : model.spectral) {
      cum += a.weight;
      if (pick < cum) {
        atom = &a;
        break;
      }
    }
    std::vector<double> size(atom->direction);
    for (double& c : size) c *= r;
    jumps.push_back(JumpRecord{t, std::move(size)});
  }
  return jumps;
}

/// Gaussian random walk with drift on the uniform grid; X~_0 = 0.
inline CadlagPath simulate_small_part(const LevyModel& model,
                                      const SimConfig& cfg) {
  cfg.validate();
  const std::size_t d = model.dim;
  const std::size_t steps = cfg.grid_size;
  const double h = 1.0 / static_cast<double>(steps);
  const bool gaussian = model.has_gaussian_part();
  Rng rng = make_stream(cfg.seed, cfg.replicate_index, StreamTag::small_part);
  std::normal_distribution<double> normal;
  const double root_h = std::sqrt(h);

  std::vector<double> grid(steps + 1);
  std::vector<double> values((steps + 1) * d, 0.0);
  std::vector<double> brownian(d, 0.0), z(d);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = i == steps ? 1.0 : static_cast<double>(i) * h;
    grid[i] = t;
    if (i > 0 && gaussian) {
      for (double& c : z) c = normal(rng);
      for (std::size_t r = 0; r < d; ++r) {
        double s = 0.0;
        for (std::size_t k = 0; k < d; ++k) s += model.diffusion[r * d + k] * z[k];
        brownian[r] += root_h * s;
      }
    }
    for (std::size_t k = 0; k < d; ++k)
      values[i * d + k] = model.drift[k] * t + brownian[k];
  }
  return CadlagPath(d, std::move(grid), std::move(values));
}

/// X = X~ + J. The result's jump list is `jumps`.
inline CadlagPath assemble_levy_path(const CadlagPath& small,
                                     std::vector<JumpRecord> jumps) {
  if (!small.jumps().empty())
    throw std::domain_error("small part must be continuous");
  const std::size_t d = small.dim();
  std::vector<double> times;
  times.reserve(jumps.size());
  for (const auto& j : jumps) {
    if (j.size.size() != d) throw std::domain_error("jump dimension mismatch");
    times.push_back(j.time);
  }
  if (!std::is_sorted(times.begin(), times.end()))
    throw std::domain_error("jump times must be sorted");
  auto grid = merge_grids(small.grid(), times);
  std::vector<double> values(grid.size() * d);
  std::vector<double> level(d, 0.0), v(d);
  std::size_t next = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    while (next < jumps.size() && jumps[next].time <= grid[i]) {
      for (std::size_t k = 0; k < d; ++k) level[k] += jumps[next].size[k];
      ++next;
    }
    small.eval(grid[i], v);
    for (std::size_t k = 0; k < d; ++k) values[i * d + k] = v[k] + level[k];
  }
  return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps));
}

inline CadlagPath simulate_levy(const LevyModel& model, const SimConfig& cfg) {
  return assemble_levy_path(simulate_small_part(model, cfg),
                            simulate_big_jumps(model, cfg));
}

// Integrands.

struct ConstantIntegrand {
  std::vector<double> value;
};

/// A deterministic integrand t -> y(t). The exponential and linear forms
/// serialize; custom callables do not.
struct DeterministicIntegrand {
  enum class Form { exponential, linear, custom };

  Form form = Form::exponential;
  std::vector<double> a;  // scale (exponential) or intercept (linear)
  std::vector<double> b;  // slope (linear)
  double rate = 1.0;      // y = a exp(-rate t)
  std::function<void(double, std::span<double>)> fn;

  static DeterministicIntegrand exponential(std::vector<double> scale,
                                            double rate) {
    return {Form::exponential, std::move(scale), {}, rate, {}};
  }
  static DeterministicIntegrand linear(std::vector<double> intercept,
                                       std::vector<double> slope) {
    return {Form::linear, std::move(intercept), std::move(slope), 0.0, {}};
  }
  static DeterministicIntegrand custom(
      std::size_t dim, std::function<void(double, std::span<double>)> f) {
    return {Form::custom, std::vector<double>(dim, 0.0), {}, 0.0, std::move(f)};
  }

  std::size_t dim() const noexcept { return a.size(); }

  void operator()(double t, std::span<double> out) const {
    switch (form) {
      case Form::exponential:
        for (std::size_t k = 0; k < a.size(); ++k)
          out[k] = a[k] * std::exp(-rate * t);
        return;
      case Form::linear:
        for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] + b[k] * t;
        return;
      case Form::custom:
        fn(t, out);
        return;
    }
  }
};

/// Y = exp(V) componentwise, V an Ornstein-Uhlenbeck process
/// dV = rate (level - V) dt + vol dB with V_0 = log(initial). An empty
/// `level` means level = log(initial), so vol = 0 gives the constant path.
struct ExpOuIntegrand {
  double rate = 1.0;
  double vol = 0.0;
  std::vector<double> initial{1.0};
  std::vector<double> level;
};

using IntegrandSpec =
    std::variant<ConstantIntegrand, DeterministicIntegrand, ExpOuIntegrand>;

inline std::size_t integrand_dim(const IntegrandSpec& spec) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantIntegrand>)
          return s.value.size();
        else if constexpr (std::is_same_v<T, DeterministicIntegrand>)
          return s.dim();
        else
          return s.initial.size();
      },
      spec);
}

inline void validate_integrand(const IntegrandSpec& spec) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantIntegrand>) {
          if (s.value.empty())
            throw std::domain_error("constant integrand is empty");
          for (double v : s.value)
            if (v == 0.0 || !std::isfinite(v))
              throw std::domain_error(
                  "constant integrand components must be nonzero");
        } else if constexpr (std::is_same_v<T, DeterministicIntegrand>) {
          if (s.a.empty())
            throw std::domain_error("deterministic integrand is empty");
          if (s.form == DeterministicIntegrand::Form::linear &&
              s.b.size() != s.a.size())
            throw std::domain_error("linear integrand slope has wrong length");
          if (s.form == DeterministicIntegrand::Form::custom && !s.fn)
            throw std::domain_error("custom integrand has no function");
        } else {
          if (s.initial.empty())
            throw std::domain_error("exp-OU integrand is empty");
          if (!(s.rate >= 0.0) || !(s.vol >= 0.0))
            throw std::domain_error("exp-OU rate and vol must be nonnegative");
          for (double v : s.initial)
            if (!(v > 0.0))
              throw std::domain_error("exp-OU initial values must be positive");
          if (!s.level.empty() && s.level.size() != s.initial.size())
            throw std::domain_error("exp-OU level has wrong length");
        }
      },
      spec);
}

/// Samples the integrand on the uniform grid of `cfg`. The path is flagged
/// càglàd: consumers read Y at a jump time of X through its left limit.
/// Noise comes from the integrand stream, independent of X.
inline CadlagPath simulate_integrand(const IntegrandSpec& spec,
                                     const SimConfig& cfg) {
  cfg.validate();
  validate_integrand(spec);
  const std::size_t d = integrand_dim(spec);
  const std::size_t steps = cfg.grid_size;

  CadlagPath path = std::visit(
      [&](const auto& s) -> CadlagPath {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantIntegrand>) {
          return CadlagPath::sample(
              d, steps,
              [&](double, std::span<double> out) {
                std::copy(s.value.begin(), s.value.end(), out.begin());
              },
              Continuity::left);
        } else if constexpr (std::is_same_v<T, DeterministicIntegrand>) {
          return CadlagPath::sample(
              d, steps, [&](double t, std::span<double> out) { s(t, out); },
              Continuity::left);
        } else {
          Rng rng =
              make_stream(cfg.seed, cfg.replicate_index, StreamTag::integrand);
          std::normal_distribution<double> normal;
          const double h = 1.0 / static_cast<double>(steps);
          const double decay = std::exp(-s.rate * h);
          const double shock =
              s.rate > 0.0
                  ? s.vol * std::sqrt(-std::expm1(-2.0 * s.rate * h) /
                                      (2.0 * s.rate))
                  : s.vol * std::sqrt(h);
          std::vector<double> v(d), level(d);
          for (std::size_t k = 0; k < d; ++k) {
            v[k] = std::log(s.initial[k]);
            level[k] = s.level.empty() ? v[k] : s.level[k];
          }
          bool first = true;
          return CadlagPath::sample(
              d, steps,
              [&](double, std::span<double> out) {
                for (std::size_t k = 0; k < d; ++k) {
                  if (!first) {
                    v[k] = level[k] + (v[k] - level[k]) * decay;
                    if (s.vol > 0.0) v[k] += shock * normal(rng);
                  }
                  out[k] = std::exp(v[k]);
                }
                first = false;
              },
              Continuity::left);
        }
      },
      spec);

  for (std::size_t k = 0; k < d; ++k) {
    double sup = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i)
      sup = std::max(sup, std::abs(path.value(i)[k]));
    if (!(sup > 0.0))
      throw std::domain_error("integrand component has zero sup norm");
  }
  return path;
}

/// Returns a `(seed, replicate) -> CadlagPath` sampler for the integrand.
inline auto integrand_sampler(IntegrandSpec spec, std::size_t grid_size) {
  return [spec = std::move(spec), grid_size](std::uint64_t seed,
                                             std::uint64_t replicate) {
    return simulate_integrand(spec, SimConfig{grid_size, seed, replicate});
  };
}

namespace detail {

/// Neumaier-compensated running sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) noexcept {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      carry += (sum - t) + x;
    else
      carry += (x - t) + sum;
    sum = t;
  }
  double value() const noexcept { return sum + carry; }
};

}  // namespace detail

/// (Y . X)_t = int_0^t Y_s dX_s, componentwise.
///
/// Each jump of X at tau contributes Y_{tau-} dX_tau; the continuous part of
/// X is integrated by the left-endpoint Riemann sum on the merged grid. The
/// result jumps exactly at the jump times of X with sizes Y_{tau-} dX_tau.
inline CadlagPath stochastic_integral(const CadlagPath& y, const CadlagPath& x) {
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  const std::size_t d = x.dim();
  auto grid = merge_grids(x.grid(), y.grid());
  const std::size_t n = grid.size();
  std::vector<double> values(n * d, 0.0);
  std::vector<Jump> jumps;
  jumps.reserve(x.jumps().size());

  std::vector<detail::CompensatedSum> acc(d);
  std::vector<double> y0(d), x0(d), x1(d), yl(d);
  x.eval(0.0, x0);
  std::size_t xi = 0;  // index of grid[i] in x's grid when shared
  for (std::size_t i = 1; i < n; ++i) {
    const double t0 = grid[i - 1];
    const double t1 = grid[i];
    y.at(t0, y0);
    while (xi + 1 < x.size() && x.time(xi + 1) <= t1) ++xi;
    const bool on_x_grid = x.time(xi) == t1;
    const Jump* jump = on_x_grid ? x.jump_at(xi) : nullptr;
    if (on_x_grid)
      x.left_limit(xi, x1);
    else
      x.interpolate(xi, t1, x1);
    for (std::size_t k = 0; k < d; ++k) acc[k].add(y0[k] * (x1[k] - x0[k]));
    if (jump) {
      y.eval_left(t1, yl);
      std::vector<double> size(d);
      for (std::size_t k = 0; k < d; ++k) {
        size[k] = yl[k] * jump->size[k];
        acc[k].add(size[k]);
      }
      jumps.push_back(Jump{t1, std::move(size)});
      const auto v = x.value(xi);
      std::copy(v.begin(), v.end(), x0.begin());
    } else {
      x0 = x1;
    }
    for (std::size_t k = 0; k < d; ++k) values[i * d + k] = acc[k].value();
  }
  return CadlagPath(d, std::move(grid), std::move(values), std::move(jumps));
}

/// Y_{tau-} dX_tau 1_[tau, 1] with tau the largest-jump time of X; the zero
/// path when X has no jumps.
inline CadlagPath one_jump_integral(const CadlagPath& y, const CadlagPath& x) {
  if (x.dim() != y.dim()) throw std::domain_error("dimension mismatch");
  const Jump* j = largest_jump(x);
  if (!j) return CadlagPath::zero(x.dim());
  std::vector<double> yl(x.dim());
  y.eval_left(j->time, yl);
  std::vector<double> size(x.dim());
  for (std::size_t k = 0; k < x.dim(); ++k) size[k] = yl[k] * j->size[k];
  return CadlagPath::step(std::move(size), j->time);
}

struct ThresholdSplit {
  std::vector<JumpRecord> big;
  std::vector<JumpRecord> small;
  std::size_t big_count = 0;
  double threshold = 0.0;
};

/// Splits jumps at a(n)^beta: `big` holds those with norm strictly above.
inline ThresholdSplit threshold_jumps(std::span<const JumpRecord> jumps,
                                      std::uint64_t n, double beta,
                                      const ScalingSequence& seq) {
  if (!(beta > 0.5 && beta < 1.0))
    throw std::domain_error("beta must lie in (1/2, 1)");
  ThresholdSplit out;
  out.threshold = std::pow(scaling(seq, n), beta);
  for (const auto& j : jumps) {
    if (detail::norm(j.size) > out.threshold)
      out.big.push_back(j);
    else
      out.small.push_back(j);
  }
  out.big_count = out.big.size();
  return out;
}

// Serialization.

inline void to_json(nlohmann::json& j, const LevyModel& m) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : m.spectral)
    atoms.push_back({{"dir", a.direction}, {"w", a.weight}});
  nlohmann::json diffusion = nlohmann::json::array();
  for (std::size_t r = 0; r < m.dim; ++r)
    diffusion.push_back(std::vector<double>(
        m.diffusion.begin() + static_cast<std::ptrdiff_t>(r * m.dim),
        m.diffusion.begin() + static_cast<std::ptrdiff_t>((r + 1) * m.dim)));
  j = {{"d", m.dim},           {"lambda", m.big_jump_intensity},
       {"alpha", m.alpha},     {"spectral", atoms},
       {"diffusion", diffusion}, {"drift", m.drift}};
}

inline LevyModel model_from_json(const nlohmann::json& j) {
  LevyModel m;
  m.dim = j.at("d").get<std::size_t>();
  m.big_jump_intensity = j.at("lambda").get<double>();
  m.alpha = j.at("alpha").get<double>();
  m.spectral = spectral_from_json(j.at("spectral"));
  m.diffusion.clear();
  if (j.contains("diffusion")) {
    for (const auto& row : j.at("diffusion")) {
      auto r = row.get<std::vector<double>>();
      m.diffusion.insert(m.diffusion.end(), r.begin(), r.end());
    }
  } else {
    m.diffusion.assign(m.dim * m.dim, 0.0);
  }
  m.drift = j.contains("drift") ? j.at("drift").get<std::vector<double>>()
                                : std::vector<double>(m.dim, 0.0);
  return m;
}

inline void to_json(nlohmann::json& j, const IntegrandSpec& spec) {
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ConstantIntegrand>) {
          j = {{"kind", "constant"}, {"value", s.value}};
        } else if constexpr (std::is_same_v<T, DeterministicIntegrand>) {
          switch (s.form) {
            case DeterministicIntegrand::Form::exponential:
              j = {{"kind", "deterministic"},
                   {"form", "exp"},
                   {"scale", s.a},
                   {"rate", s.rate}};
              return;
            case DeterministicIntegrand::Form::linear:
              j = {{"kind", "deterministic"},
                   {"form", "linear"},
                   {"intercept", s.a},
                   {"slope", s.b}};
              return;
            case DeterministicIntegrand::Form::custom:
              throw std::invalid_argument(
                  "custom deterministic integrands cannot be serialized");
          }
        } else {
          j = {{"kind", "exp_ou"},
               {"rate", s.rate},
               {"vol", s.vol},
               {"initial", s.initial}};
          if (!s.level.empty()) j["level"] = s.level;
        }
      },
      spec);
}

inline IntegrandSpec integrand_from_json(const nlohmann::json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant")
    return ConstantIntegrand{j.at("value").get<std::vector<double>>()};
  if (kind == "deterministic") {
    const auto form = j.at("form").get<std::string>();
    if (form == "exp")
      return DeterministicIntegrand::exponential(
          j.at("scale").get<std::vector<double>>(), j.at("rate").get<double>());
    if (form == "linear")
      return DeterministicIntegrand::linear(
          j.at("intercept").get<std::vector<double>>(),
          j.at("slope").get<std::vector<double>>());
    throw std::invalid_argument("unknown deterministic form '" + form + "'");
  }
  if (kind == "exp_ou") {
    ExpOuIntegrand s;
    s.rate = j.at("rate").get<double>();
    s.vol = j.at("vol").get<double>();
    s.initial = j.at("initial").get<std::vector<double>>();
    if (j.contains("level")) s.level = j.at("level").get<std::vector<double>>();
    return s;
  }
  throw std::invalid_argument("unknown integrand kind '" + kind + "'");
}

}  // namespace rvlevy
