#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rvlevy/diagnostics.hpp"
#include "rvlevy/levy.hpp"
#include "rvlevy/regvar.hpp"

#ifndef RVLEVY_VERSION
#define RVLEVY_VERSION "0.1.0"
#endif

namespace rvlevy {

inline constexpr const char* kVersion = RVLEVY_VERSION;

enum class ExperimentKind { tails, breiman, one_big_jump, tail_equivalence, jump_bounds, paths };
enum class OutputFormat { csv, json };

inline std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::tails: return "tails";
    case ExperimentKind::breiman: return "breiman";
    case ExperimentKind::one_big_jump: return "one-big-jump";
    case ExperimentKind::tail_equivalence: return "tail-equivalence";
    case ExperimentKind::jump_bounds: return "jump-bounds";
    case ExperimentKind::paths: return "paths";
  }
  return "unknown";
}

struct MultiplierSpec {
  enum class Kind { constant, lognormal } kind = Kind::constant;
  double value = 1.0;
  double log_sd = 0.0;
};

struct SumBoundSpec {
  double poisson_mean = 2.0;
  double alpha = 1.5;
  bool dependent_weights = false;  // Y_k = 1 + log Z_{k-1}
  double x_level = 20.0;
  std::size_t trials = 1000000;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::tails;
  LevyModel model;
  IntegrandSpec integrand = ConstantIntegrand{{1.0}};
  std::vector<double> levels;
  double epsilon = 0.1;
  double t = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::size_t grid_size = 4096;
  std::string output_path = "results";
  OutputFormat format = OutputFormat::csv;

  std::size_t analytic_mc = 10000;  // tails
  double breiman_alpha = 2.0;       // breiman
  MultiplierSpec multiplier;
  CurveTarget target = CurveTarget::integral;  // one-big-jump
  unsigned refinement = 3;
  double beta = 0.75;  // jump-bounds
  std::vector<std::uint64_t> n_values{100, 1000, 10000, 100000};
  std::size_t reps = 1000000;
  std::vector<SumBoundSpec> sum_bound;
  std::size_t path_count = 3;  // paths

  nlohmann::json source;
};

/// Outcome of parsing and validating a config document. `errors` lists
/// every violation found; `config` is set only when there are none.
struct ValidationResult {
  std::optional<ExperimentConfig> config;
  std::vector<std::string> errors;

  bool ok() const noexcept { return errors.empty(); }
};

class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(std::vector<std::string> errors)
      : std::runtime_error(join(errors)), errors_(std::move(errors)) {}
  const std::vector<std::string>& errors() const noexcept { return errors_; }

 private:
  static std::string join(const std::vector<std::string>& e) {
    std::string s;
    for (const auto& x : e) s += (s.empty() ? "" : "; ") + x;
    return s;
  }
  std::vector<std::string> errors_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

class Collector {
 public:
  explicit Collector(std::vector<std::string>& out) : out_(out) {}

  void require(bool ok, const std::string& message) {
    if (!ok) out_.push_back(message);
  }

  // Runs `f`, recording any exception under `field`.
  template <class F>
  bool attempt(const std::string& field, F&& f) {
    try {
      f();
      return true;
    } catch (const std::exception& e) {
      out_.push_back(field + ": " + e.what());
      return false;
    }
  }

 private:
  std::vector<std::string>& out_;
};

inline std::optional<ExperimentKind> kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::tails, ExperimentKind::breiman, ExperimentKind::one_big_jump,
                 ExperimentKind::tail_equivalence, ExperimentKind::jump_bounds,
                 ExperimentKind::paths})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline bool needs_levels(ExperimentKind k) {
  return k == ExperimentKind::tails || k == ExperimentKind::breiman ||
         k == ExperimentKind::one_big_jump || k == ExperimentKind::tail_equivalence;
}

inline bool uses_model(ExperimentKind k) { return k != ExperimentKind::breiman; }

}  // namespace detail

/// Parses a config document and checks every invariant, collecting all
/// violations instead of stopping at the first.
inline ValidationResult validate_config(const nlohmann::json& doc) {
  ValidationResult result;
  auto& errors = result.errors;
  detail::Collector check(errors);
  if (!doc.is_object()) {
    errors.push_back("config must be a JSON object");
    return result;
  }
  ExperimentConfig cfg;
  cfg.source = doc;

  bool kind_ok = false;
  if (!doc.contains("experiment")) {
    errors.push_back("experiment: missing");
  } else {
    kind_ok = check.attempt("experiment", [&] {
      const auto name = doc.at("experiment").get<std::string>();
      const auto kind = detail::kind_from_string(name);
      if (!kind) throw std::invalid_argument("unknown experiment kind '" + name + "'");
      cfg.kind = *kind;
    });
  }

  auto optional_field = [&](const char* key, auto& target) {
    if (doc.contains(key))
      check.attempt(key, [&] { doc.at(key).get_to(target); });
  };
  optional_field("epsilon", cfg.epsilon);
  optional_field("t", cfg.t);
  optional_field("seed", cfg.seed);
  optional_field("grid_size", cfg.grid_size);
  optional_field("levels", cfg.levels);
  if (doc.contains("n")) {
    check.attempt("n", [&] { cfg.n = doc.at("n").get<std::size_t>(); });
  }

  if (doc.contains("output")) {
    check.attempt("output", [&] {
      const auto& o = doc.at("output");
      if (o.contains("path")) cfg.output_path = o.at("path").get<std::string>();
      if (o.contains("format")) {
        const auto f = o.at("format").get<std::string>();
        if (f == "csv")
          cfg.format = OutputFormat::csv;
        else if (f == "json")
          cfg.format = OutputFormat::json;
        else
          throw std::invalid_argument("format must be csv or json");
      }
    });
  }

  if (kind_ok && detail::uses_model(cfg.kind)) {
    if (!doc.contains("model"))
      errors.push_back("model: missing");
    else
      check.attempt("model", [&] {
        cfg.model = model_from_json(doc.at("model"));
        cfg.model.validate();
      });
  }
  if (doc.contains("integrand")) {
    check.attempt("integrand", [&] {
      cfg.integrand = integrand_from_json(doc.at("integrand"));
      validate_integrand(cfg.integrand);
      if (detail::uses_model(cfg.kind) && integrand_dim(cfg.integrand) != cfg.model.dim)
        throw std::domain_error("integrand dimension must match the model");
      // Positivity of deterministic integrands is a property of the grid
      // samples, so check it the same way a run would.
      if (!std::holds_alternative<ExpOuIntegrand>(cfg.integrand) && cfg.grid_size >= 2)
        simulate_integrand(cfg.integrand, SimConfig{cfg.grid_size, 0, 0});
    });
  } else {
    cfg.integrand = ConstantIntegrand{std::vector<double>(cfg.model.dim, 1.0)};
  }

  check.require(cfg.grid_size >= 2, "grid_size must be >= 2");
  check.require(cfg.epsilon > 0.0, "epsilon must be positive");
  check.require(cfg.t > 0.0 && cfg.t <= 1.0, "t must lie in (0, 1]");

  if (detail::needs_levels(cfg.kind)) {
    check.require(!cfg.levels.empty(), "levels must be nonempty");
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
      check.require(cfg.levels[i] > 0.0, "levels must be positive");
      if (i > 0) check.require(cfg.levels[i] > cfg.levels[i - 1], "levels must be strictly increasing");
    }
    check.require(cfg.n >= 1, "n must be a positive replicate count");
  }

  switch (cfg.kind) {
    case ExperimentKind::tails:
      if (doc.contains("analytic_mc"))
        check.attempt("analytic_mc", [&] { doc.at("analytic_mc").get_to(cfg.analytic_mc); });
      check.require(cfg.analytic_mc >= 1, "analytic_mc must be positive");
      break;
    case ExperimentKind::breiman: {
      if (!doc.contains("breiman")) {
        errors.push_back("breiman: missing");
        break;
      }
      check.attempt("breiman", [&] {
        const auto& b = doc.at("breiman");
        cfg.breiman_alpha = b.at("alpha").get<double>();
        const auto& m = b.at("multiplier");
        const auto kind = m.at("kind").get<std::string>();
        if (kind == "constant") {
          cfg.multiplier.kind = MultiplierSpec::Kind::constant;
          cfg.multiplier.value = m.at("value").get<double>();
        } else if (kind == "lognormal") {
          cfg.multiplier.kind = MultiplierSpec::Kind::lognormal;
          cfg.multiplier.log_sd = m.at("log_sd").get<double>();
        } else {
          throw std::invalid_argument("multiplier kind must be constant or lognormal");
        }
      });
      check.require(cfg.breiman_alpha > 0.0, "breiman alpha must be positive");
      check.require(cfg.multiplier.value >= 0.0, "multiplier value must be nonnegative");
      check.require(cfg.multiplier.log_sd >= 0.0, "multiplier log_sd must be nonnegative");
      break;
    }
    case ExperimentKind::one_big_jump:
      if (doc.contains("one_big_jump")) {
        check.attempt("one_big_jump", [&] {
          const auto& o = doc.at("one_big_jump");
          if (o.contains("target")) {
            const auto t = o.at("target").get<std::string>();
            if (t == "levy_path")
              cfg.target = CurveTarget::levy_path;
            else if (t == "integral")
              cfg.target = CurveTarget::integral;
            else if (t == "product")
              cfg.target = CurveTarget::product;
            else
              throw std::invalid_argument("target must be levy_path, integral or product");
          }
          if (o.contains("refinement")) cfg.refinement = o.at("refinement").get<unsigned>();
        });
      }
      check.require(cfg.refinement <= 16, "refinement must be at most 16");
      break;
    case ExperimentKind::jump_bounds: {
      if (!doc.contains("jump_bounds")) break;
      check.attempt("jump_bounds", [&] {
        const auto& l = doc.at("jump_bounds");
        if (l.contains("beta")) cfg.beta = l.at("beta").get<double>();
        if (l.contains("n_values")) cfg.n_values = l.at("n_values").get<std::vector<std::uint64_t>>();
        if (l.contains("reps")) cfg.reps = l.at("reps").get<std::size_t>();
        if (l.contains("sum_bound")) {
          for (const auto& e : l.at("sum_bound")) {
            SumBoundSpec s;
            if (e.contains("poisson_mean")) s.poisson_mean = e.at("poisson_mean").get<double>();
            if (e.contains("alpha")) s.alpha = e.at("alpha").get<double>();
            if (e.contains("weights")) {
              const auto w = e.at("weights").get<std::string>();
              if (w != "constant" && w != "dependent")
                throw std::invalid_argument("sum_bound weights must be constant or dependent");
              s.dependent_weights = w == "dependent";
            }
            if (e.contains("x")) s.x_level = e.at("x").get<double>();
            if (e.contains("trials")) s.trials = e.at("trials").get<std::size_t>();
            cfg.sum_bound.push_back(s);
          }
        }
      });
      check.require(cfg.beta > 0.5 && cfg.beta < 1.0, "beta must lie in (1/2, 1)");
      check.require(!cfg.n_values.empty(), "n_values must be nonempty");
      for (auto v : cfg.n_values) check.require(v >= 1, "n_values must be positive");
      check.require(cfg.reps >= 1, "reps must be positive");
      for (const auto& s : cfg.sum_bound) {
        check.require(s.poisson_mean >= 0.0, "sum_bound poisson_mean must be nonnegative");
        check.require(s.alpha > 0.0, "sum_bound alpha must be positive");
        check.require(s.x_level > 0.0, "sum_bound x must be positive");
        check.require(s.trials >= 1, "sum_bound trials must be positive");
      }
      break;
    }
    case ExperimentKind::tail_equivalence:
      break;
    case ExperimentKind::paths:
      if (doc.contains("count"))
        check.attempt("count", [&] { doc.at("count").get_to(cfg.path_count); });
      check.require(cfg.path_count >= 1, "count must be positive");
      break;
  }

  if (errors.empty()) result.config = std::move(cfg);
  return result;
}

/// Parses config text; a malformed document yields one error carrying the
/// parser's byte position.
inline ValidationResult validate_config_text(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    ValidationResult r;
    r.errors.push_back(std::string("parse error: ") + e.what());
    return r;
  }
  return validate_config(doc);
}

/// 64-bit FNV-1a of the canonical (sorted-key, compact) JSON serialization.
inline std::string config_hash(const nlohmann::json& doc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : doc.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// The seed override from RVLEVY_SEED, if set to a valid unsigned integer.
inline std::optional<std::uint64_t> seed_from_environment() {
  const char* v = std::getenv("RVLEVY_SEED");
  if (!v || !*v) return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (*end != '\0') throw ValidationError({"RVLEVY_SEED must be an unsigned integer"});
  return s;
}

struct RunManifest {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  double duration_seconds = 0.0;
  std::vector<std::string> outputs;
};

inline nlohmann::json to_json_value(const RunManifest& m) {
  return {{"config_hash", m.config_hash},
          {"seed", m.seed},
          {"version", m.version},
          {"duration_seconds", m.duration_seconds},
          {"outputs", m.outputs}};
}

// Tables.

/// A rectangular result table; empty cells mark undefined values.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<nlohmann::json>> rows;
};

namespace detail {

inline nlohmann::json number_or_null(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

inline std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

inline void write_table_csv(std::ostream& os, const Table& t, const std::string& hash,
                            std::uint64_t seed) {
  os << "# config_hash=" << hash << " seed=" << seed << " version=" << kVersion << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << detail::csv_cell(row[i]);
    os << '\n';
  }
}

inline nlohmann::json table_json(const Table& t, const std::string& hash, std::uint64_t seed) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json r = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size(); ++i) r[t.columns[i]] = row[i];
    rows.push_back(std::move(r));
  }
  return {{"config_hash", hash}, {"seed", seed}, {"version", kVersion},
          {"table", t.name},     {"rows", rows}};
}

// Experiments.

namespace detail {

inline std::vector<Table> run_tails(const ExperimentConfig& c, std::uint64_t seed) {
  const TailEquivalenceSettings settings{c.t, c.grid_size, {}};
  const auto tails = integral_endpoint_tails(c.model, c.integrand, c.levels, c.n, seed, settings);
  Table t{"tails",
          {"u", "estimate", "stderr", "n_conditioning", "hits", "analytic", "analytic_stderr",
           "ratio"},
          {}};
  const bool analytic = c.model.dim == 1;
  for (const auto& e : tails) {
    double a = NAN, ase = NAN;
    if (analytic) {
      const auto p = analytic_prediction(c.model.induced_measure(), c.integrand, c.t, e.level,
                                         c.analytic_mc, seed, c.grid_size);
      a = p.mean;
      ase = p.std_error;
    }
    t.rows.push_back({e.level, e.p_hat, e.std_error, e.n, e.hits, number_or_null(a),
                      number_or_null(ase), number_or_null(e.p_hat / a)});
  }
  return {t};
}

inline std::vector<Table> run_breiman(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<RatioEstimate> ratios;
  double target = 0.0;
  const auto x = pareto_sampler(c.breiman_alpha);
  if (c.multiplier.kind == MultiplierSpec::Kind::constant) {
    ratios = breiman_ratio(x, constant_sampler(c.multiplier.value), c.levels, c.n, seed);
    target = std::pow(c.multiplier.value, c.breiman_alpha);
  } else {
    ratios = breiman_ratio(x, lognormal_sampler(c.multiplier.log_sd), c.levels, c.n, seed);
    target = std::exp(0.5 * c.breiman_alpha * c.breiman_alpha * c.multiplier.log_sd *
                      c.multiplier.log_sd);
  }
  Table t{"breiman",
          {"u", "estimate", "stderr", "n_conditioning", "numerator_hits", "limit", "defined"},
          {}};
  for (const auto& r : ratios)
    t.rows.push_back({r.level, number_or_null(r.ratio), number_or_null(r.std_error),
                      r.denominator_hits, r.numerator_hits, target, r.defined()});
  return {t};
}

inline std::vector<Table> run_one_big_jump(const ExperimentConfig& c, std::uint64_t seed) {
  const auto curves = one_big_jump_curve(c.model, c.integrand, c.target, c.levels, c.n, seed,
                                         {c.epsilon, c.grid_size, c.refinement});
  Table t{"one_big_jump",
          {"conditioning", "u", "estimate", "stderr", "n_conditioning", "hits", "defined",
           "trend_slope", "nonincreasing_trend", "target", "conjectural"},
          {}};
  for (const auto* curve : {&curves.by_sup, &curves.by_jump}) {
    const auto slope = trend_slope(*curve);
    for (const auto& e : curve->conditional_probs)
      t.rows.push_back({to_string(curve->conditioning), e.level, number_or_null(e.p_hat),
                        number_or_null(e.std_error), e.n, e.hits, e.defined(),
                        slope ? nlohmann::json(*slope) : nlohmann::json(nullptr),
                        slope ? nlohmann::json(*slope <= 0.0) : nlohmann::json(nullptr),
                        to_string(curve->target), curve->conjectural()});
  }
  return {t};
}

inline std::vector<Table> run_tail_equivalence(const ExperimentConfig& c, std::uint64_t seed) {
  const auto ratios =
      tail_equivalence(c.model, c.integrand, c.levels, c.n, seed, {c.t, c.grid_size, {}});
  Table t{"tail_equivalence",
          {"u", "estimate", "stderr", "n_conditioning", "numerator_hits", "defined"},
          {}};
  for (const auto& r : ratios)
    t.rows.push_back({r.level, number_or_null(r.ratio), number_or_null(r.std_error),
                      r.denominator_hits, r.numerator_hits, r.defined()});
  return {t};
}

inline PredictableSum predictable_sum(const SumBoundSpec& s) {
  PredictableSum sum{poisson_count(s.poisson_mean), pareto_sampler(s.alpha), {}};
  if (s.dependent_weights)
    sum.weight = [](std::span<const double> z) { return z.empty() ? 1.0 : 1.0 + std::log(z.back()); };
  else
    sum.weight = [](std::span<const double>) { return 1.0; };
  return sum;
}

inline std::vector<Table> run_jump_bounds(const ExperimentConfig& c, std::uint64_t seed) {
  const auto pts = multi_jump_trend(c.model.induced_measure(), c.model.big_jump_intensity, c.beta,
                                 c.n_values, c.reps, seed);
  Table multi{"multi_jump",
            {"n", "threshold", "p_n", "closed_form", "estimate", "stderr", "null_sd", "hits",
             "agrees"},
            {}};
  for (const auto& p : pts)
    multi.rows.push_back({p.n, p.threshold, p.p_n, p.closed_form, p.estimate, p.std_error,
                        p.null_sd, p.event.hits, p.agrees});
  Table bound{"sum_bound",
            {"poisson_mean", "alpha", "weights", "x", "lhs", "lhs_stderr", "rhs", "rhs_stderr",
             "margin", "margin_stderr", "holds"},
            {}};
  for (std::size_t i = 0; i < c.sum_bound.size(); ++i) {
    const auto& s = c.sum_bound[i];
    const auto r = predictable_sum_bound(predictable_sum(s), s.trials, s.x_level, seed + i);
    bound.rows.push_back({s.poisson_mean, s.alpha, s.dependent_weights ? "dependent" : "constant",
                        s.x_level, r.lhs.p_hat, r.lhs.std_error, r.rhs.p_hat, r.rhs.std_error,
                        r.margin, r.std_error, r.holds});
  }
  std::vector<Table> out{multi};
  if (!c.sum_bound.empty()) out.push_back(bound);
  return out;
}

struct PathSet {
  std::uint64_t replicate;
  std::string series;
  CadlagPath path;
};

inline std::vector<PathSet> sample_paths(const ExperimentConfig& c, std::uint64_t seed) {
  std::vector<PathSet> out;
  for (std::uint64_t r = 0; r < c.path_count; ++r) {
    const SimConfig cfg{c.grid_size, seed, r};
    const CadlagPath x = simulate_levy(c.model, cfg);
    const CadlagPath y = simulate_integrand(c.integrand, cfg);
    out.push_back({r, "X", x});
    out.push_back({r, "Y", y});
    out.push_back({r, "W", stochastic_integral(y, x)});
    out.push_back({r, "W1", one_jump_integral(y, x)});
  }
  return out;
}

}  // namespace detail

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  bool paths_only = false;
};

/// Runs a validated config and writes its outputs plus manifest.json into
/// the output directory.
inline RunManifest run(const ExperimentConfig& c, const RunOptions& opts = {}) {
  namespace fs = std::filesystem;
  const auto start = std::chrono::steady_clock::now();
  RunManifest manifest;
  manifest.seed = opts.seed.value_or(c.seed);
  manifest.config_hash = config_hash(c.source);
  const fs::path dir = opts.out_dir.value_or(c.output_path);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());

  auto open = [&](const std::string& file, bool listed = true) {
    const fs::path p = dir / file;
    std::ofstream os(p, std::ios::binary);
    if (!os) throw IoError("cannot open '" + p.string() + "' for writing");
    if (listed) manifest.outputs.push_back(p.string());
    return os;
  };
  auto finish = [&](std::ofstream& os, const std::string& file) {
    os.flush();
    if (!os) throw IoError("failed writing '" + (dir / file).string() + "'");
  };

  const std::uint64_t seed = manifest.seed;
  if (opts.paths_only || c.kind == ExperimentKind::paths) {
    const auto paths = detail::sample_paths(c, seed);
    if (c.format == OutputFormat::csv) {
      const std::string file = "paths.csv";
      auto os = open(file);
      os << "# config_hash=" << manifest.config_hash << " seed=" << seed
         << " version=" << kVersion << '\n';
      const std::size_t d = paths.front().path.dim();
      os << "replicate,series,t";
      for (std::size_t k = 0; k < d; ++k) os << ",x" << k + 1;
      os << '\n';
      for (const auto& p : paths) {
        for (std::size_t i = 0; i < p.path.size(); ++i) {
          os << p.replicate << ',' << p.series << ',' << detail::csv_cell(p.path.time(i));
          for (double v : p.path.value(i)) os << ',' << detail::csv_cell(v);
          os << '\n';
        }
      }
      finish(os, file);
    } else {
      const std::string file = "paths.json";
      auto os = open(file);
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& p : paths)
        arr.push_back({{"replicate", p.replicate}, {"series", p.series}, {"path", p.path}});
      os << nlohmann::json{{"config_hash", manifest.config_hash},
                           {"seed", seed},
                           {"version", kVersion},
                           {"paths", arr}}
                .dump(2)
         << '\n';
      finish(os, file);
    }
  } else {
    std::vector<Table> tables;
    switch (c.kind) {
      case ExperimentKind::tails: tables = detail::run_tails(c, seed); break;
      case ExperimentKind::breiman: tables = detail::run_breiman(c, seed); break;
      case ExperimentKind::one_big_jump: tables = detail::run_one_big_jump(c, seed); break;
      case ExperimentKind::tail_equivalence: tables = detail::run_tail_equivalence(c, seed); break;
      case ExperimentKind::jump_bounds: tables = detail::run_jump_bounds(c, seed); break;
      case ExperimentKind::paths: break;
    }
    for (const auto& t : tables) {
      const std::string file = t.name + (c.format == OutputFormat::csv ? ".csv" : ".json");
      auto os = open(file);
      if (c.format == OutputFormat::csv)
        write_table_csv(os, t, manifest.config_hash, seed);
      else
        os << table_json(t, manifest.config_hash, seed).dump(2) << '\n';
      finish(os, file);
    }
  }

  manifest.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const std::string mfile = "manifest.json";
  auto os = open(mfile, false);
  os << to_json_value(manifest).dump(2) << '\n';
  finish(os, mfile);
  return manifest;
}

}  // namespace rvlevy
