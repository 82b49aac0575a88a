#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rvlevy/cadlag.hpp"
#include "rvlevy/j1.hpp"
#include "rvlevy/levy.hpp"
#include "rvlevy/parallel.hpp"
#include "rvlevy/regvar.hpp"
#include "rvlevy/rng.hpp"

namespace rvlevy {

/// Crude Monte Carlo exceedance estimate. An estimate with n = 0 (no
/// conditioning replicates) is undefined: p_hat and std_error are NaN.
struct TailEstimate {
  double level = 0.0;
  std::size_t n = 0;
  std::size_t hits = 0;
  double p_hat = 0.0;
  double std_error = 0.0;

  static TailEstimate from_counts(double level, std::size_t n, std::size_t hits) {
    if (hits > n) throw std::domain_error("hits exceed replicate count");
    TailEstimate e{level, n, hits, 0.0, 0.0};
    if (n == 0) {
      e.p_hat = e.std_error = std::numeric_limits<double>::quiet_NaN();
      return e;
    }
    const double nn = static_cast<double>(n);
    e.p_hat = static_cast<double>(hits) / nn;
    e.std_error = std::sqrt(e.p_hat * (1.0 - e.p_hat) / nn);
    return e;
  }

  bool defined() const noexcept { return n > 0; }
};

struct HillEstimate {
  std::size_t n = 0;
  std::size_t k = 0;
  double alpha_hat = 0.0;
  double std_error = 0.0;
};

/// Ratio of two correlated exceedance probabilities P(A)/P(B) estimated on
/// shared replicates.
struct RatioEstimate {
  double level = 0.0;
  std::size_t n = 0;
  std::size_t numerator_hits = 0;
  std::size_t denominator_hits = 0;
  double ratio = std::numeric_limits<double>::quiet_NaN();
  double std_error = std::numeric_limits<double>::quiet_NaN();

  bool defined() const noexcept { return denominator_hits > 0; }
};

namespace detail {

struct CountAccumulator {
  std::vector<std::size_t> counts;

  explicit CountAccumulator(std::size_t size = 0) : counts(size, 0) {}
  void merge(const CountAccumulator& o) {
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += o.counts[i];
  }
};

inline void check_levels(std::span<const double> levels) {
  if (levels.empty()) throw std::domain_error("levels must be nonempty");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (!(levels[i] > 0.0)) throw std::domain_error("levels must be positive");
    if (i > 0 && !(levels[i] > levels[i - 1]))
      throw std::domain_error("levels must be strictly increasing");
  }
}

template <class Body>
CountAccumulator count_replicates(std::size_t n, std::size_t slots, Body body) {
  return block_reduce(
      n, [slots] { return CountAccumulator(slots); },
      [&](std::size_t begin, std::size_t end, CountAccumulator& acc) {
        for (std::size_t r = begin; r < end; ++r) body(r, acc.counts);
      },
      [](CountAccumulator& into, const CountAccumulator& from) {
        into.merge(from);
      });
}

}  // namespace detail

/// Delta-method ratio estimate from counts of A, B and A-and-B.
inline RatioEstimate ratio_from_counts(double level, std::size_t n,
                                       std::size_t a_hits, std::size_t b_hits,
                                       std::size_t ab_hits) {
  RatioEstimate r;
  r.level = level;
  r.n = n;
  r.numerator_hits = a_hits;
  r.denominator_hits = b_hits;
  if (b_hits == 0 || n == 0) return r;
  const double nn = static_cast<double>(n);
  const double pa = static_cast<double>(a_hits) / nn;
  const double pb = static_cast<double>(b_hits) / nn;
  const double pab = static_cast<double>(ab_hits) / nn;
  r.ratio = pa / pb;
  const double var = (pa * (1.0 - pa) - 2.0 * r.ratio * (pab - pa * pb) +
                      r.ratio * r.ratio * pb * (1.0 - pb)) /
                     (nn * pb * pb);
  r.std_error = std::sqrt(std::max(var, 0.0));
  return r;
}

// Scalar samplers: callables Rng& -> double.

inline auto pareto_sampler(double alpha) {
  if (!(alpha > 0.0)) throw std::domain_error("alpha must be positive");
  return [alpha](Rng& rng) { return pareto(rng, alpha); };
}

/// exp(log_sd * N(0, 1)).
inline auto lognormal_sampler(double log_sd) {
  if (!(log_sd >= 0.0)) throw std::domain_error("log_sd must be nonnegative");
  return [log_sd](Rng& rng) {
    std::normal_distribution<double> normal;
    return std::exp(log_sd * normal(rng));
  };
}

inline auto constant_sampler(double value) {
  return [value](Rng&) { return value; };
}

/// P(S > u) by crude Monte Carlo on n replicates of `sampler`.
template <class Sampler>
TailEstimate tail_prob(Sampler sampler, double u, std::size_t n,
                       std::uint64_t seed) {
  if (!(u > 0.0)) throw std::domain_error("level must be positive");
  if (n == 0) throw std::domain_error("replicate count must be positive");
  const auto acc = detail::count_replicates(
      n, 1, [&](std::size_t r, std::vector<std::size_t>& c) {
        if (detail::draw(sampler, seed, r, StreamTag::auxiliary) > u) ++c[0];
      });
  return TailEstimate::from_counts(u, n, acc.counts[0]);
}

/// Exceedance estimates at every level from one shared replicate pool.
template <class Sampler>
std::vector<TailEstimate> tail_probs(Sampler sampler,
                                     std::span<const double> levels,
                                     std::size_t n, std::uint64_t seed) {
  detail::check_levels(levels);
  if (n == 0) throw std::domain_error("replicate count must be positive");
  const auto acc = detail::count_replicates(
      n, levels.size(), [&](std::size_t r, std::vector<std::size_t>& c) {
        const double s = detail::draw(sampler, seed, r, StreamTag::auxiliary);
        for (std::size_t i = 0; i < levels.size() && s > levels[i]; ++i) ++c[i];
      });
  std::vector<TailEstimate> out;
  for (std::size_t i = 0; i < levels.size(); ++i)
    out.push_back(TailEstimate::from_counts(levels[i], n, acc.counts[i]));
  return out;
}

/// Hill estimator on the k largest order statistics.
inline HillEstimate hill(std::span<const double> sample, std::size_t k) {
  const std::size_t n = sample.size();
  if (k < 1 || k >= n) throw std::domain_error("hill needs 1 <= k < n");
  std::vector<double> logs(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(sample[i] > 0.0))
      throw std::domain_error("hill needs strictly positive values");
    logs[i] = std::log(sample[i]);
  }
  // After the partition, logs[n-k-1] is the (k+1)-th largest value.
  const auto pivot = logs.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(logs.begin(), pivot, logs.end());
  const double base = *pivot;
  double sum = 0.0;
  for (auto it = pivot + 1; it != logs.end(); ++it) sum += *it - base;
  if (!(sum > 0.0)) throw std::domain_error("hill sample has no tail spread");
  HillEstimate h;
  h.n = n;
  h.k = k;
  h.alpha_hat = static_cast<double>(k) / sum;
  h.std_error = h.alpha_hat / std::sqrt(static_cast<double>(k));
  return h;
}

// One-big-jump curves.

enum class CurveTarget {
  levy_path,  // X against its largest jump
  integral,   // (Y . X) against Y_tau dX_tau 1_[tau,1]
  product     // Y X against Y dX_tau 1_[tau,1]; conjectural
};

enum class Conditioning {
  sup_norm,   // |W|_inf > u
  big_jump    // |approximation|_inf > u
};

struct ConditionalDistanceCurve {
  double epsilon = 0.0;
  CurveTarget target = CurveTarget::integral;
  Conditioning conditioning = Conditioning::sup_norm;
  std::vector<double> levels;
  std::vector<TailEstimate> conditional_probs;  // n = conditioning count

  bool conjectural() const noexcept { return target == CurveTarget::product; }
};

struct OneBigJumpCurves {
  ConditionalDistanceCurve by_sup;
  ConditionalDistanceCurve by_jump;
};

struct CurveSettings {
  double epsilon = 0.1;
  std::size_t grid_size = 4096;
  unsigned refinement = 3;
};

/// For each replicate forms W and its one-jump approximation W1 and
/// estimates P(d(W/u, W1/u) > epsilon | C_u) at every level, for C_u either
/// {|W|_inf > u} or {|W1|_inf > u}. All levels share one replicate pool.
/// `integrand` is ignored for CurveTarget::levy_path.
inline OneBigJumpCurves one_big_jump_curve(const LevyModel& model,
                                           const IntegrandSpec& integrand,
                                           CurveTarget target,
                                           std::span<const double> levels,
                                           std::size_t n, std::uint64_t seed,
                                           const CurveSettings& settings = {}) {
  model.validate();
  detail::check_levels(levels);
  if (!(settings.epsilon > 0.0)) throw std::domain_error("epsilon must be positive");
  if (n == 0) throw std::domain_error("replicate count must be positive");
  if (target != CurveTarget::levy_path) {
    validate_integrand(integrand);
    if (integrand_dim(integrand) != model.dim)
      throw std::domain_error("integrand dimension must match the model");
  }
  const std::size_t m = levels.size();
  const double eps = settings.epsilon;

  // Slots: [sup conditioning, sup hits, jump conditioning, jump hits] x m.
  const auto acc = detail::count_replicates(
      n, 4 * m, [&](std::size_t r, std::vector<std::size_t>& c) {
        const SimConfig cfg{settings.grid_size, seed, r};
        const CadlagPath x = simulate_levy(model, cfg);
        CadlagPath w = x, approx = CadlagPath::zero(model.dim);
        switch (target) {
          case CurveTarget::levy_path:
            approx = one_step_approx(x);
            break;
          case CurveTarget::integral: {
            const CadlagPath y = simulate_integrand(integrand, cfg);
            w = stochastic_integral(y, x);
            approx = one_jump_integral(y, x);
            break;
          }
          case CurveTarget::product: {
            const CadlagPath y = simulate_integrand(integrand, cfg);
            w = cw_product(y, x);
            approx = cw_product(y, one_step_approx(x));
            break;
          }
        }
        const double w_sup = sup_norm(w);
        const double approx_sup = sup_norm(approx);
        const double top = std::max(w_sup, approx_sup);
        if (!(top > levels[0])) return;
        const double uniform = uniform_distance(w, approx);
        for (std::size_t i = 0; i < m && top > levels[i]; ++i) {
          const double u = levels[i];
          const bool exceeds =
              uniform / u > eps && j1_distance(w, approx, settings.refinement, 1.0 / u) > eps;
          if (w_sup > u) {
            ++c[i];
            if (exceeds) ++c[m + i];
          }
          if (approx_sup > u) {
            ++c[2 * m + i];
            if (exceeds) ++c[3 * m + i];
          }
        }
      });

  OneBigJumpCurves out;
  out.by_sup = {eps, target, Conditioning::sup_norm,
                std::vector<double>(levels.begin(), levels.end()), {}};
  out.by_jump = {eps, target, Conditioning::big_jump,
                 std::vector<double>(levels.begin(), levels.end()), {}};
  for (std::size_t i = 0; i < m; ++i) {
    out.by_sup.conditional_probs.push_back(
        TailEstimate::from_counts(levels[i], acc.counts[i], acc.counts[m + i]));
    out.by_jump.conditional_probs.push_back(TailEstimate::from_counts(
        levels[i], acc.counts[2 * m + i], acc.counts[3 * m + i]));
  }
  return out;
}

/// Least-squares slope of defined estimates against log(level); nullopt
/// with fewer than two defined points.
inline std::optional<double> trend_slope(const ConditionalDistanceCurve& curve) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t k = 0;
  for (const auto& e : curve.conditional_probs) {
    if (!e.defined()) continue;
    const double lx = std::log(e.level);
    sx += lx;
    sy += e.p_hat;
    sxx += lx * lx;
    sxy += lx * e.p_hat;
    ++k;
  }
  if (k < 2) return std::nullopt;
  const double kk = static_cast<double>(k);
  const double denom = kk * sxx - sx * sx;
  if (!(denom > 0.0)) return std::nullopt;
  return (kk * sxy - sx * sy) / denom;
}

/// Index of the largest level whose estimate rests on at least `min_n`
/// conditioning replicates.
inline std::optional<std::size_t> largest_supported_level(
    std::span<const TailEstimate> estimates, std::size_t min_n) {
  for (std::size_t i = estimates.size(); i-- > 0;)
    if (estimates[i].n >= min_n) return i;
  return std::nullopt;
}

inline std::optional<std::size_t> largest_supported_level(
    std::span<const RatioEstimate> estimates, std::size_t min_hits) {
  for (std::size_t i = estimates.size(); i-- > 0;)
    if (estimates[i].denominator_hits >= min_hits) return i;
  return std::nullopt;
}

// Tail equivalence of running supremum and endpoint.

struct TailEquivalenceSettings {
  double t = 1.0;
  std::size_t grid_size = 4096;
  std::vector<double> projection;  // defaults to the first coordinate
};

namespace detail {

inline double project(std::span<const double> v, std::span<const double> w) {
  if (w.empty()) return v[0];
  double s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += w[k] * v[k];
  return s;
}

/// (sup_{s <= t} <w, z_s>, <w, z_t>), with left limits in the supremum.
inline std::pair<double, double> running_sup_and_endpoint(
    const CadlagPath& z, double t, std::span<const double> w) {
  std::vector<double> v(z.dim());
  double sup = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < z.size() && z.time(i) <= t; ++i) {
    sup = std::max(sup, project(z.value(i), w));
    if (i > 0) {
      z.left_limit(i, v);
      sup = std::max(sup, project(v, w));
    }
  }
  if (t > 0.0) {
    z.eval_left(t, v);
    sup = std::max(sup, project(v, w));
  }
  z.eval(t, v);
  const double end = project(v, w);
  return {std::max(sup, end), end};
}

}  // namespace detail

/// P(sup_{s<=t} <w, (Y.X)_s> > u) / P(<w, (Y.X)_t> > u) on shared replicates.
inline std::vector<RatioEstimate> tail_equivalence(
    const LevyModel& model, const IntegrandSpec& integrand,
    std::span<const double> levels, std::size_t n, std::uint64_t seed,
    const TailEquivalenceSettings& settings = {}) {
  model.validate();
  validate_integrand(integrand);
  detail::check_levels(levels);
  if (!(settings.t > 0.0 && settings.t <= 1.0))
    throw std::domain_error("t must lie in (0, 1]");
  if (n == 0) throw std::domain_error("replicate count must be positive");
  if (integrand_dim(integrand) != model.dim)
    throw std::domain_error("integrand dimension must match the model");
  if (!settings.projection.empty() && settings.projection.size() != model.dim)
    throw std::domain_error("projection has wrong dimension");
  const std::size_t m = levels.size();

  // Slots: [sup hits, endpoint hits] x m; endpoint hits imply sup hits.
  const auto acc = detail::count_replicates(
      n, 2 * m, [&](std::size_t r, std::vector<std::size_t>& c) {
        const SimConfig cfg{settings.grid_size, seed, r};
        const CadlagPath x = simulate_levy(model, cfg);
        const CadlagPath y = simulate_integrand(integrand, cfg);
        const CadlagPath w = stochastic_integral(y, x);
        const auto [sup, end] =
            detail::running_sup_and_endpoint(w, settings.t, settings.projection);
        for (std::size_t i = 0; i < m && sup > levels[i]; ++i) {
          ++c[i];
          if (end > levels[i]) ++c[m + i];
        }
      });
  std::vector<RatioEstimate> out;
  for (std::size_t i = 0; i < m; ++i)
    out.push_back(ratio_from_counts(levels[i], n, acc.counts[i],
                                    acc.counts[m + i], acc.counts[m + i]));
  return out;
}

/// P(<w, (Y.X)_t> > u) by crude Monte Carlo, all levels on shared replicates.
inline std::vector<TailEstimate> integral_endpoint_tails(
    const LevyModel& model, const IntegrandSpec& integrand,
    std::span<const double> levels, std::size_t n, std::uint64_t seed,
    const TailEquivalenceSettings& settings = {}) {
  model.validate();
  validate_integrand(integrand);
  if (!(settings.t > 0.0 && settings.t <= 1.0))
    throw std::domain_error("t must lie in (0, 1]");
  if (integrand_dim(integrand) != model.dim)
    throw std::domain_error("integrand dimension must match the model");
  auto endpoint = [&](std::uint64_t s, std::uint64_t r) {
    const SimConfig cfg{settings.grid_size, s, r};
    const CadlagPath w = stochastic_integral(simulate_integrand(integrand, cfg),
                                             simulate_levy(model, cfg));
    std::vector<double> v(w.dim());
    w.eval(settings.t, v);
    return detail::project(v, settings.projection);
  };
  return tail_probs(endpoint, levels, n, seed);
}

/// P(<w, (Y.X)_t> > u) predicted by the limit measure:
/// c u^{-alpha} int_0^t E mass(Y_s) ds, with the inner expectation by Monte
/// Carlo over Y and the time integral on the simulation grid.
inline McEstimate analytic_prediction(const RegVarMeasure& measure,
                                      const IntegrandSpec& integrand, double t,
                                      double u, std::size_t n_mc,
                                      std::uint64_t seed,
                                      std::size_t grid_size = 4096) {
  if (measure.dim() != 1)
    throw std::domain_error("analytic prediction needs a one-dimensional model");
  if (!(t > 0.0 && t <= 1.0)) throw std::domain_error("t must lie in (0, 1]");
  if (!(u > 0.0)) throw std::domain_error("level must be positive");
  return mstar_eval(measure, integrand_sampler(integrand, grid_size),
                    SetDescriptor::endpoint_exceedance(t, u), n_mc, seed);
}

/// P(Y X > u) / P(X > u) with Y and X independent and X shared across
/// levels.
template <class XSampler, class YSampler>
std::vector<RatioEstimate> breiman_ratio(XSampler x_sampler, YSampler y_sampler,
                                         std::span<const double> levels,
                                         std::size_t n, std::uint64_t seed) {
  detail::check_levels(levels);
  if (n == 0) throw std::domain_error("replicate count must be positive");
  const std::size_t m = levels.size();
  // Slots: [YX > u, X > u, both] x m.
  const auto acc = detail::count_replicates(
      n, 3 * m, [&](std::size_t r, std::vector<std::size_t>& c) {
        const double x = detail::draw(x_sampler, seed, r, StreamTag::jumps);
        const double y = detail::draw(y_sampler, seed, r, StreamTag::multiplier);
        if (y < 0.0) throw std::domain_error("multiplier must be nonnegative");
        const double yx = y * x;
        for (std::size_t i = 0; i < m; ++i) {
          const bool a = yx > levels[i];
          const bool b = x > levels[i];
          if (a) ++c[i];
          if (b) ++c[m + i];
          if (a && b) ++c[2 * m + i];
        }
      });
  std::vector<RatioEstimate> out;
  for (std::size_t i = 0; i < m; ++i)
    out.push_back(ratio_from_counts(levels[i], n, acc.counts[i], acc.counts[m + i],
                                    acc.counts[2 * m + i]));
  return out;
}

// Bound on sums with predictable weights.

/// Random sum sum_{k<=N} Y_k Z_k where Y_k may depend on Z_1..Z_{k-1}.
struct PredictableSum {
  std::function<std::size_t(Rng&)> count;
  std::function<double(Rng&)> jump;
  /// Y_k from the preceding jumps (size k - 1 span, k = 1, 2, ...).
  std::function<double(std::span<const double>)> weight;
};

struct SumBoundResult {
  double level = 0.0;
  TailEstimate lhs;  // P(sum Y_k Z_k > x)
  TailEstimate rhs;  // P(N max Y_k Z~_k > x), Z~ an independent copy
  double margin = 0.0;     // mean of 1{lhs} - 2 1{rhs}
  double std_error = 0.0;  // of the margin
  bool holds = false;      // margin <= 3 std_error
};

inline SumBoundResult predictable_sum_bound(const PredictableSum& sum, std::size_t n_trials,
                                   double x_level, std::uint64_t seed) {
  if (!sum.count || !sum.jump || !sum.weight)
    throw std::invalid_argument("predictable sum is incomplete");
  if (n_trials == 0) throw std::domain_error("trial count must be positive");
  struct Acc {
    std::size_t lhs = 0, rhs = 0;
    MeanAccumulator diff;
  };
  const Acc acc = block_reduce(
      n_trials, [] { return Acc{}; },
      [&](std::size_t begin, std::size_t end, Acc& a) {
        std::vector<double> z, weights;
        for (std::size_t r = begin; r < end; ++r) {
          Rng rng = make_stream(seed, r, StreamTag::jumps);
          Rng copy = make_stream(seed, r, StreamTag::auxiliary);
          const std::size_t count = sum.count(rng);
          z.clear();
          weights.clear();
          double total = 0.0, top = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < count; ++k) {
            const double y = sum.weight(std::span<const double>(z));
            const double zk = sum.jump(rng);
            z.push_back(zk);
            total += y * zk;
            top = std::max(top, y * sum.jump(copy));
          }
          const bool l = total > x_level;
          const bool h = count > 0 && static_cast<double>(count) * top > x_level;
          a.lhs += l;
          a.rhs += h;
          a.diff.add((l ? 1.0 : 0.0) - (h ? 2.0 : 0.0));
        }
      },
      [](Acc& into, const Acc& from) {
        into.lhs += from.lhs;
        into.rhs += from.rhs;
        into.diff.merge(from.diff);
      });
  SumBoundResult out;
  out.level = x_level;
  out.lhs = TailEstimate::from_counts(x_level, n_trials, acc.lhs);
  out.rhs = TailEstimate::from_counts(x_level, n_trials, acc.rhs);
  const auto est = to_estimate(acc.diff);
  out.margin = est.mean;
  out.std_error = est.std_error;
  out.holds = out.margin <= 3.0 * out.std_error;
  return out;
}

/// N ~ Poisson(mean).
inline std::function<std::size_t(Rng&)> poisson_count(double mean) {
  if (!(mean >= 0.0)) throw std::domain_error("Poisson mean must be nonnegative");
  return [mean](Rng& rng) {
    if (mean == 0.0) return std::size_t{0};
    std::poisson_distribution<std::size_t> d(mean);
    return d(rng);
  };
}

// Probability of two or more big jumps.

struct MultiJumpPoint {
  std::uint64_t n = 0;
  double threshold = 0.0;    // a(n)^beta
  double p_n = 0.0;          // P(|Z| > threshold)
  double closed_form = 0.0;  // n (1 - (1 + lambda p_n) e^{-lambda p_n})
  TailEstimate event;        // P(M_n >= 2) by Monte Carlo
  double estimate = 0.0;     // n * event.p_hat
  double std_error = 0.0;    // n * event.std_error
  double null_sd = 0.0;      // n * sqrt(p0 (1 - p0) / reps), p0 from the closed form
  bool agrees = false;       // |estimate - closed_form| <= 3 null_sd
};

/// n P(M_n >= 2) with M_n the number of jumps (rate lambda, Pareto radii
/// of the measure's index) larger than a(n)^beta.
inline std::vector<MultiJumpPoint> multi_jump_trend(const RegVarMeasure& measure,
                                               double lambda, double beta,
                                               std::span<const std::uint64_t> n_values,
                                               std::size_t reps, std::uint64_t seed) {
  if (!(beta > 0.5 && beta < 1.0))
    throw std::domain_error("beta must lie in (1/2, 1)");
  if (!(lambda >= 0.0)) throw std::domain_error("lambda must be nonnegative");
  if (reps == 0) throw std::domain_error("replicate count must be positive");
  const auto seq = ScalingSequence::of(measure);
  const double alpha = measure.alpha();
  std::vector<MultiJumpPoint> out;
  for (std::size_t idx = 0; idx < n_values.size(); ++idx) {
    MultiJumpPoint pt;
    pt.n = n_values[idx];
    pt.threshold = std::pow(scaling(seq, pt.n), beta);
    pt.p_n = std::min(1.0, std::pow(pt.threshold, -alpha));
    const double x = lambda * pt.p_n;
    const double p0 = -std::expm1(-x) - x * std::exp(-x);
    const double nn = static_cast<double>(pt.n);
    pt.closed_form = nn * p0;

    const auto count = poisson_count(lambda);
    const std::uint64_t stream_seed = seed ^ (0x9e3779b97f4a7c15ULL * (idx + 1));
    const auto acc = detail::count_replicates(
        reps, 1, [&](std::size_t r, std::vector<std::size_t>& c) {
          Rng rng = make_stream(stream_seed, r, StreamTag::jumps);
          const std::size_t jumps = count(rng);
          std::size_t big = 0;
          for (std::size_t k = 0; k < jumps; ++k)
            if (pareto(rng, alpha) > pt.threshold) ++big;
          if (big >= 2) ++c[0];
        });
    pt.event = TailEstimate::from_counts(2.0, reps, acc.counts[0]);
    pt.estimate = nn * pt.event.p_hat;
    pt.std_error = nn * pt.event.std_error;
    pt.null_sd = nn * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(reps));
    pt.agrees = std::abs(pt.estimate - pt.closed_form) <= 3.0 * pt.null_sd;
    out.push_back(pt);
  }
  return out;
}

// Serialization.

inline nlohmann::json to_json_value(const TailEstimate& e) {
  nlohmann::json j = {{"u", e.level}, {"n", e.n}, {"hits", e.hits}, {"defined", e.defined()}};
  if (e.defined()) {
    j["p_hat"] = e.p_hat;
    j["stderr"] = e.std_error;
  } else {
    j["p_hat"] = nullptr;
    j["stderr"] = nullptr;
  }
  return j;
}

inline nlohmann::json to_json_value(const RatioEstimate& e) {
  nlohmann::json j = {{"u", e.level},
                      {"n", e.n},
                      {"numerator_hits", e.numerator_hits},
                      {"denominator_hits", e.denominator_hits},
                      {"defined", e.defined()}};
  j["ratio"] = e.defined() ? nlohmann::json(e.ratio) : nlohmann::json(nullptr);
  j["stderr"] = e.defined() ? nlohmann::json(e.std_error) : nlohmann::json(nullptr);
  return j;
}

inline std::string to_string(CurveTarget t) {
  switch (t) {
    case CurveTarget::levy_path: return "levy_path";
    case CurveTarget::integral: return "integral";
    case CurveTarget::product: return "product";
  }
  return "unknown";
}

inline std::string to_string(Conditioning c) {
  return c == Conditioning::sup_norm ? "sup_norm" : "big_jump";
}

inline nlohmann::json to_json_value(const ConditionalDistanceCurve& c) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& e : c.conditional_probs) points.push_back(to_json_value(e));
  nlohmann::json j = {{"epsilon", c.epsilon},
                      {"target", to_string(c.target)},
                      {"conditioning", to_string(c.conditioning)},
                      {"conjectural", c.conjectural()},
                      {"points", points}};
  const auto slope = trend_slope(c);
  j["trend_slope"] = slope ? nlohmann::json(*slope) : nlohmann::json(nullptr);
  j["nonincreasing_trend"] = slope ? nlohmann::json(*slope <= 0.0) : nlohmann::json(nullptr);
  return j;
}

}  // namespace rvlevy
