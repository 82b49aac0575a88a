// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "j1_bruteforce.hpp"
#include "rvlevy/diagnostics.hpp"
#include "rvlevy/j1.hpp"
#include "rvlevy/levy.hpp"
#include "rvlevy/regvar.hpp"

using namespace rvlevy;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[violated: " << what << "] ";
    }
  }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Compound Poisson part recentred to mean zero: E R = alpha / (alpha - 1)
// for a Pareto radius, signed by the spectral weights.
LevyModel centred(double lambda, double alpha, double sigma, double p_plus) {
  const double mean_jump = alpha / (alpha - 1.0) * (2.0 * p_plus - 1.0);
  return LevyModel::univariate(lambda, alpha, sigma, -lambda * mean_jump, p_plus);
}

void homogeneity(Outcome& o) {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unit(0.1, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::vector<SpectralAtom> atoms;
    double total = 0.0;
    for (int a = 0; a < 4; ++a) {
      std::vector<double> dir{normal(rng), normal(rng), normal(rng)};
      const double len = std::hypot(dir[0], dir[1], dir[2]);
      for (double& v : dir) v /= len;
      atoms.push_back({dir, unit(rng)});
      total += atoms.back().weight;
    }
    double acc = 0.0;
    for (std::size_t a = 0; a + 1 < atoms.size(); ++a) acc += atoms[a].weight /= total;
    atoms.back().weight = 1.0 - acc;
    const RegVarMeasure m(0.5 + 2.5 * unit(rng), unit(rng) * 3.0, atoms);
    const auto cone = SetDescriptor::radial_cone(
        unit(rng) * 2.0, half_space({normal(rng), normal(rng), normal(rng)}));
    const double base = mu_tail(m, cone.level, cone.direction);
    for (double u : {0.5, 2.0, 10.0}) {
      const double scaled = m_eval(m, cone.scaled(u));
      const double expect = std::pow(u, -m.alpha()) * base;
      worst = std::max(worst, std::abs(scaled - expect) / std::max(1.0, base));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(worst <= 1e-12, "relative error <= 1e-12");
  o.require(elapsed < 1.0, "runtime < 1 s");
  o.detail << "max rel err " << worst << ", " << elapsed << " s";
}

void deterministic_integrand_tail(Outcome& o) {
  const auto model = centred(1.0, 1.5, 0.1, 1.0);
  const auto y = DeterministicIntegrand::exponential({1.0}, 1.0);
  const std::vector<double> levels{5.0, 10.0, 20.0};
  const auto tails = integral_endpoint_tails(model, y, levels, 1000000, 101, {1.0, 128, {}});
  const double shape = (1.0 - std::exp(-1.5)) / 1.5;
  std::vector<double> ratios;
  for (const auto& e : tails) {
    const double closed = shape * std::pow(e.level, -1.5);
    const auto predicted =
        analytic_prediction(model.induced_measure(), y, 1.0, e.level, 1, 0, 4096);
    o.require(std::abs(predicted.mean / closed - 1.0) < 1e-6,
              "prediction matches 0.51791 u^-1.5");
    ratios.push_back(e.p_hat / closed);
    o.detail << "u=" << e.level << " ratio " << ratios.back() << " (+-" << e.std_error / closed
             << "); ";
  }
  o.require(ratios.back() >= 0.8 && ratios.back() <= 1.2, "ratio at u=20 in [0.8, 1.2]");
  for (std::size_t i = 1; i < ratios.size(); ++i)
    o.require(std::abs(ratios[i] - 1.0) < std::abs(ratios[i - 1] - 1.0),
              "monotone approach to 1");
}

void tail_equivalence_limit(Outcome& o) {
  const auto model = centred(1.0, 1.5, 0.3, 1.0);
  const std::vector<double> levels{2, 5, 10, 20, 50, 100, 200, 400, 800};
  const auto ratios =
      tail_equivalence(model, ConstantIntegrand{{1.0}}, levels, 4000000, 303, {1.0, 128, {}});
  for (const auto& r : ratios) {
    o.require(!r.defined() || r.ratio >= 1.0, "ratio >= 1 at every level");
    o.detail << r.level << ":" << r.ratio << " ";
  }
  o.detail << "; ";
  const auto idx = largest_supported_level(std::span<const RatioEstimate>(ratios), 200);
  o.require(idx.has_value(), "some level has >= 200 denominator hits");
  if (idx) {
    const auto& r = ratios[*idx];
    o.detail << "u=" << r.level << " ratio " << r.ratio << " +- " << r.std_error << " ("
             << r.denominator_hits << " endpoint hits)";
    o.require(std::abs(r.ratio - 1.0) <= 3.0 * r.std_error, "within 3 stderr of 1");
  }
}

void one_big_jump(Outcome& o) {
  const auto model = centred(1.0, 1.5, 0.2, 0.7);
  const std::vector<double> levels{5, 10, 20, 50, 100, 200, 400};
  const CurveSettings settings{0.1, 128, 3};
  struct Case {
    const char* name;
    CurveTarget target;
    std::uint64_t seed;
  };
  for (const Case& c : {Case{"exp-OU integral", CurveTarget::integral, 404},
                        Case{"Levy path", CurveTarget::levy_path, 405}}) {
    const auto curves = one_big_jump_curve(model, ExpOuIntegrand{1.0, 0.3, {1.0}, {}}, c.target,
                                           levels, 1000000, c.seed, settings);
    for (const auto* curve : {&curves.by_sup, &curves.by_jump}) {
      const std::string tag = std::string(c.name) + "/" + to_string(curve->conditioning);
      const auto slope = trend_slope(*curve);
      o.require(slope && *slope <= 0.0, tag + " slope <= 0");
      const auto idx = largest_supported_level(
          std::span<const TailEstimate>(curve->conditional_probs), 200);
      o.require(idx.has_value(), tag + " has a level with >= 200 conditioning hits");
      if (!idx || !slope) continue;
      const auto& e = curve->conditional_probs[*idx];
      o.require(e.p_hat < 0.05, tag + " value < 0.05");
      o.detail << tag << ": slope " << *slope << ", u=" << e.level << " p=" << e.p_hat << " (n="
               << e.n << "); ";
    }
  }
}

void breiman(Outcome& o) {
  const std::vector<double> levels{2, 4, 8, 16, 32, 64};
  const auto constant = breiman_ratio(pareto_sampler(2.0), constant_sampler(2.0), levels,
                                      4000000, 505);
  double worst = 0.0;
  for (const auto& r : constant) {
    const double z = std::abs(r.ratio - 4.0) / r.std_error;
    worst = std::max(worst, z);
    o.require(r.defined() && z <= 3.0, "constant multiplier ratio within 3 stderr of 4");
  }
  o.detail << "Y=2: max |z| " << worst << "; ";

  const std::vector<double> wide{2, 5, 10, 20, 40, 60, 80, 100};
  const auto logn = breiman_ratio(pareto_sampler(2.0), lognormal_sampler(0.5), wide, 4000000, 506);
  // Denominator hits are the X-exceedances.
  const auto idx = largest_supported_level(std::span<const RatioEstimate>(logn), 500);
  o.require(idx.has_value(), "lognormal level with >= 500 X-exceedances");
  if (idx) {
    const auto& r = logn[*idx];
    const double target = std::exp(0.5);
    o.detail << "lognormal: u=" << r.level << " ratio " << r.ratio << " vs " << target << " ("
             << r.denominator_hits << " X-exceedances)";
    o.require(std::abs(r.ratio / target - 1.0) <= 0.10, "lognormal ratio within 10%");
  }
}

void hill_recovery(Outcome& o) {
  constexpr std::size_t n = 100000, k = 1000, reps = 200;
  std::vector<double> sample(n);
  for (double alpha : {0.8, 1.5, 3.0}) {
    std::size_t covered = 0;
    for (std::size_t r = 0; r < reps; ++r) {
      Rng rng = make_stream(606 + static_cast<std::uint64_t>(alpha * 10), r, StreamTag::auxiliary);
      for (double& v : sample) v = pareto(rng, alpha);
      const auto h = hill(sample, k);
      if (std::abs(h.alpha_hat - alpha) <= 3.0 * h.std_error) ++covered;
    }
    const double coverage = static_cast<double>(covered) / reps;
    o.detail << "alpha " << alpha << ": " << coverage * 100.0 << "%; ";
    o.require(coverage >= 0.95, "coverage >= 95%");
  }
}

void multi_jump(Outcome& o) {
  const std::vector<std::uint64_t> ns{100, 1000, 10000, 100000};
  const auto pts = multi_jump_trend(RegVarMeasure::univariate(1.5, 1.0), 1.0, 0.75, ns,
                                    10000000, 707);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& p = pts[i];
    if (i > 0) o.require(p.closed_form < pts[i - 1].closed_form, "closed form strictly decreasing");
    o.require(p.agrees, "MC within 3 stderr of closed form");
    o.detail << "n=" << p.n << " closed " << p.closed_form << " mc " << p.estimate << " (sd "
             << p.null_sd << "); ";
  }
}

void j1_oracle(Outcome& o) {
  std::mt19937_64 rng(808);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto fx = oracle::random_step(rng, 1, 3);
    const auto fy = oracle::random_step(rng, 1, 3);
    worst = std::max(worst, std::abs(j1_distance(fx.path(), fy.path()) -
                                     oracle::j1_bruteforce(fx, fy)));
  }
  o.require(worst <= 1e-3, "oracle agreement within 1e-3");
  std::size_t self = 0, bound = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto x = oracle::random_step(rng, 2, 3).path();
    const auto y = oracle::random_step(rng, 2, 3).path();
    if (j1_distance(x, x) != 0.0) ++self;
    if (j1_distance(x, y) > uniform_distance(x, y)) ++bound;
  }
  o.require(self == 0, "d(x, x) = 0");
  o.require(bound == 0, "d <= uniform distance");
  o.detail << "max oracle gap " << worst << ", self-distance failures " << self
           << ", bound failures " << bound;
}

void integral_correctness(Outcome& o) {
  const auto model = LevyModel::univariate(3.0, 1.2, 0.5, 0.3, 0.6);
  std::size_t jump_mismatch = 0;
  double worst = 0.0;
  for (std::uint64_t r = 0; r < 50; ++r) {
    const SimConfig cfg{512, 909, r};
    const auto x = simulate_levy(model, cfg);
    const auto w = stochastic_integral(simulate_integrand(ConstantIntegrand{{1.0}}, cfg), x);
    if (w.jumps().size() != x.jumps().size()) {
      ++jump_mismatch;
      continue;
    }
    for (std::size_t j = 0; j < x.jumps().size(); ++j)
      if (w.jumps()[j].time != x.jumps()[j].time || w.jumps()[j].size != x.jumps()[j].size)
        ++jump_mismatch;
    std::vector<double> v(1);
    for (std::size_t i = 0; i < x.size(); ++i) {
      w.eval(x.time(i), v);
      worst = std::max(worst, std::abs(v[0] - x.value(i)[0]));
    }
  }
  o.require(jump_mismatch == 0, "jumps reproduced bit-exactly");
  o.require(worst <= 1e-12, "grid values within 1e-12");

  // int_0^1 e^{-s} d(s) against the exact 1 - e^{-1}.
  const auto drift = LevyModel::univariate(1.0, 1.5, 0.0, 1.0);
  const auto y = DeterministicIntegrand::exponential({1.0}, 1.0);
  std::vector<double> errors;
  for (std::size_t n : {128u, 256u, 512u, 1024u}) {
    const SimConfig cfg{n, 1, 0};
    const auto w = stochastic_integral(simulate_integrand(y, cfg), simulate_small_part(drift, cfg));
    std::vector<double> v(1);
    w.eval(1.0, v);
    errors.push_back(std::abs(v[0] - (1.0 - std::exp(-1.0))));
  }
  o.detail << "max grid gap " << worst << "; orders";
  for (std::size_t i = 1; i < errors.size(); ++i) {
    const double order = std::log2(errors[i - 1] / errors[i]);
    o.detail << ' ' << order;
    o.require(std::abs(order - 1.0) <= 0.1, "first-order convergence");
  }
}

void predictable_sums(Outcome& o) {
  struct Case {
    double mean;
    bool dependent;
  };
  std::uint64_t seed = 1010;
  for (const Case& c : {Case{1.0, false}, Case{2.0, false}, Case{2.0, true}}) {
    PredictableSum sum{poisson_count(c.mean), pareto_sampler(1.5), {}};
    if (c.dependent)
      sum.weight = [](std::span<const double> z) {
        return z.empty() ? 1.0 : 1.0 + std::log(z.back());
      };
    else
      sum.weight = [](std::span<const double>) { return 1.0; };
    const auto r = predictable_sum_bound(sum, 1000000, 20.0, seed++);
    o.require(r.holds, "lhs <= 2 rhs within 3 stderr");
    o.detail << "Poisson(" << c.mean << (c.dependent ? ", dependent" : ", constant")
             << "): lhs " << r.lhs.p_hat << " 2rhs " << 2.0 * r.rhs.p_hat << " margin "
             << r.margin << " +- " << r.std_error << "; ";
  }
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<void(Outcome&)> check;
  };
  const std::vector<Criterion> criteria{
      {"limit measure homogeneity on radial cones", homogeneity},
      {"deterministic integrand tail vs c u^-alpha int E Y^alpha", deterministic_integrand_tail},
      {"running sup vs endpoint tail equivalence", tail_equivalence_limit},
      {"one-big-jump conditional distance curves", one_big_jump},
      {"Breiman ratio", breiman},
      {"Hill estimator coverage", hill_recovery},
      {"two-big-jump probability trend", multi_jump},
      {"J1 distance vs brute force", j1_oracle},
      {"stochastic integral correctness", integral_correctness},
      {"predictable sum bound", predictable_sums},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].check(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    std::printf("%s %2zu %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name,
                seconds_since(t0), o.detail.str().c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
