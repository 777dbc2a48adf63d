// ============================================================================
// experiment.hpp -- JSON experiment specs, sweeps and CSV result tables
//
// A spec names a base scenario, one sweep axis (snr_db, K or gamma) and the
// schemes to compare. Every sweep point runs all schemes on shared draws and
// yields one CSV row per scheme. SNR is given in dB here and converted to a
// linear ratio before it reaches the library.
// ============================================================================
#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "coopsense/montecarlo.hpp"

namespace coopsense {

enum class SweepAxis { SnrDb, K, Gamma };

[[nodiscard]] constexpr const char* to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::SnrDb: return "snr_db";
    case SweepAxis::K: return "K";
    case SweepAxis::Gamma: return "gamma";
  }
  return "?";
}

enum class VoteConvention { N, NStar };

struct ExperimentSpec {
  std::string name;
  SweepAxis axis = SweepAxis::SnrDb;
  std::vector<double> sweep;
  std::vector<SchemeConfig> schemes;
  Scenario base;
  double snr_db = 0.0;  ///< used when the sweep is not over SNR
  VoteConvention vote_convention = VoteConvention::N;
  std::size_t vote_value = 1;  ///< n, or N* = K - n
  std::string output;
};

struct Diagnostic {
  std::string field;
  std::string message;
};

class spec_error : public std::runtime_error {
public:
  explicit spec_error(std::vector<Diagnostic> diags)
      : std::runtime_error(render(diags)), diagnostics_{std::move(diags)} {}

  [[nodiscard]] const std::vector<Diagnostic>& diagnostics() const noexcept { return diagnostics_; }

private:
  static std::string render(const std::vector<Diagnostic>& d) {
    std::string s;
    for (const auto& x : d) {
      if (!s.empty()) s += '\n';
      s += x.field + ": " + x.message;
    }
    return s;
  }
  std::vector<Diagnostic> diagnostics_;
};

[[nodiscard]] inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace detail {

using nlohmann::json;

class SpecReader {
public:
  std::vector<Diagnostic> diags;

  void fail(const std::string& field, const std::string& msg) { diags.push_back({field, msg}); }

  const json* child(const json& obj, const std::string& key, const std::string& path, bool required) {
    if (!obj.is_object()) return nullptr;
    auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(join(path, key), "missing required field");
      return nullptr;
    }
    return &*it;
  }

  std::optional<double> number(const json& obj, const std::string& key, const std::string& path, bool required) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number()) {
      fail(join(path, key), "must be a number");
      return std::nullopt;
    }
    const double x = v->get<double>();
    if (!std::isfinite(x)) {
      fail(join(path, key), "must be finite");
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::uint64_t> count(const json& obj, const std::string& key, const std::string& path, bool required,
                                     std::uint64_t min_value) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_number_integer() || (v->is_number_integer() && !v->is_number_unsigned() && v->get<std::int64_t>() < 0)) {
      fail(join(path, key), "must be a nonnegative integer");
      return std::nullopt;
    }
    const auto x = v->get<std::uint64_t>();
    if (x < min_value) {
      fail(join(path, key), "must be >= " + std::to_string(min_value));
      return std::nullopt;
    }
    return x;
  }

  std::optional<std::string> text(const json& obj, const std::string& key, const std::string& path, bool required) {
    const json* v = child(obj, key, path, required);
    if (!v) return std::nullopt;
    if (!v->is_string()) {
      fail(join(path, key), "must be a string");
      return std::nullopt;
    }
    return v->get<std::string>();
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline std::vector<double> read_sweep(SpecReader& r, const json& root, SweepAxis& axis) {
  std::vector<double> values;
  const json* sw = r.child(root, "sweep", "", true);
  if (!sw) return values;
  if (!sw->is_object()) {
    r.fail("sweep", "must be an object");
    return values;
  }
  if (auto a = r.text(*sw, "axis", "sweep", true)) {
    if (*a == "snr_db") axis = SweepAxis::SnrDb;
    else if (*a == "K") axis = SweepAxis::K;
    else if (*a == "gamma") axis = SweepAxis::Gamma;
    else r.fail("sweep.axis", "must be one of snr_db, K, gamma");
  }
  if (const json* v = r.child(*sw, "values", "sweep", false)) {
    if (!v->is_array()) {
      r.fail("sweep.values", "must be an array of numbers");
    } else {
      for (const auto& x : *v) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
          r.fail("sweep.values", "must contain only finite numbers");
          return {};
        }
        values.push_back(x.get<double>());
      }
    }
  } else {
    auto from = r.number(*sw, "from", "sweep", true);
    auto to = r.number(*sw, "to", "sweep", true);
    auto step = r.number(*sw, "step", "sweep", true);
    if (from && to && step) {
      if (!(*step > 0.0)) {
        r.fail("sweep.step", "must be > 0");
      } else if (*to < *from) {
        r.fail("sweep.to", "must be >= sweep.from");
      } else {
        // Index-based so the grid does not accumulate rounding.
        const auto count = static_cast<std::size_t>(std::floor((*to - *from) / *step + 1e-9)) + 1;
        for (std::size_t i = 0; i < count; ++i) values.push_back(*from + static_cast<double>(i) * *step);
      }
    }
  }
  if (values.empty() && r.diags.empty()) r.fail("sweep", "must contain at least one point");
  if (axis == SweepAxis::K) {
    for (double v : values) {
      if (v < 1.0 || v != std::floor(v)) {
        r.fail("sweep.values", "K sweep values must be positive integers");
        break;
      }
    }
  }
  return values;
}

struct SchemeEntry {
  SchemeConfig config;
  std::optional<double> weight_ratio;  // geometric weights, expanded once k is known
};

inline std::vector<SchemeEntry> read_schemes(SpecReader& r, const json& root) {
  std::vector<SchemeEntry> out;
  const json* arr = r.child(root, "schemes", "", true);
  if (!arr) return out;
  if (!arr->is_array() || arr->empty()) {
    r.fail("schemes", "must be a nonempty array");
    return out;
  }
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const json& item = (*arr)[i];
    const std::string path = "schemes[" + std::to_string(i) + "]";
    SchemeConfig sc;
    std::optional<double> weight_ratio;
    std::string kind;
    if (item.is_string()) {
      kind = item.get<std::string>();
    } else if (item.is_object()) {
      if (auto k = r.text(item, "kind", path, true)) kind = *k;
    } else {
      r.fail(path, "must be a scheme name or object");
      continue;
    }
    auto parsed = scheme_from_string(kind);
    if (!parsed) {
      if (!kind.empty()) r.fail(path, "unknown scheme '" + kind + "'");
      continue;
    }
    sc.kind = *parsed;
    if (item.is_object()) {
      if (auto g = r.count(item, "exponent", path, false, 1)) sc.exponent = static_cast<int>(*g);
      if (const json* w = r.child(item, "weights", path, false)) {
        if (!w->is_array()) {
          r.fail(path + ".weights", "must be an array of positive numbers");
        } else {
          for (const auto& x : *w) {
            if (!x.is_number() || !(x.get<double>() > 0.0)) {
              r.fail(path + ".weights", "must contain only positive numbers");
              sc.weights.clear();
              break;
            }
            sc.weights.push_back(x.get<double>());
          }
        }
      }
      if (auto ratio = r.number(item, "weight_ratio", path, false)) {
        if (!(*ratio > 0.0)) r.fail(path + ".weight_ratio", "must be > 0");
        else if (!sc.weights.empty()) r.fail(path + ".weight_ratio", "give either weights or weight_ratio");
        else weight_ratio = *ratio;
      }
    }
    out.push_back({std::move(sc), weight_ratio});
  }
  return out;
}

}  // namespace detail

/// Concrete scenario for one sweep point.
[[nodiscard]] inline Scenario scenario_at(const ExperimentSpec& spec, double sweep_value) {
  Scenario s = spec.base;
  double snr_db = spec.snr_db;
  switch (spec.axis) {
    case SweepAxis::SnrDb: snr_db = sweep_value; break;
    case SweepAxis::K: s.fusion.K = static_cast<std::size_t>(sweep_value); break;
    case SweepAxis::Gamma: s.detector.gamma = sweep_value; break;
  }
  if (spec.vote_convention == VoteConvention::NStar) {
    s.fusion.n = spec.vote_value <= s.fusion.K ? s.fusion.K - spec.vote_value : 0;
  } else {
    s.fusion.n = spec.vote_value;
  }
  s.detector.signal_variance =
      signal_variance_for_snr(db_to_linear(snr_db), s.noise.nominal_variance(), s.detector.channel_gain);
  return s;
}

/// Parses and fully validates a spec document. Throws spec_error listing
/// every problem found.
[[nodiscard]] inline ExperimentSpec parse_spec(const nlohmann::json& root) {
  using detail::SpecReader;
  SpecReader r;
  ExperimentSpec spec;
  if (!root.is_object()) throw spec_error(std::vector<Diagnostic>{{"<root>", "spec must be a JSON object"}});

  spec.name = r.text(root, "name", "", true).value_or("");
  spec.output = r.text(root, "output", "", false).value_or(spec.name.empty() ? "results.csv" : spec.name + ".csv");
  spec.sweep = detail::read_sweep(r, root, spec.axis);
  const auto entries = detail::read_schemes(r, root);

  const nlohmann::json* sc = r.child(root, "scenario", "", true);
  if (sc && !sc->is_object()) {
    r.fail("scenario", "must be an object");
    sc = nullptr;
  }
  if (sc) {
    auto& base = spec.base;
    if (auto t = r.count(*sc, "trials", "scenario", true, 1)) base.trials = *t;
    if (auto sd = r.count(*sc, "seed", "scenario", true, 0)) base.seed = *sd;
    if (auto truth = r.text(*sc, "truth", "scenario", false)) {
      if (*truth == "h0") base.truth = TruthMode::H0;
      else if (*truth == "h1") base.truth = TruthMode::H1;
      else if (*truth == "mixed") base.truth = TruthMode::Mixed;
      else if (*truth == "both") base.truth = TruthMode::Both;
      else r.fail("scenario.truth", "must be one of h0, h1, mixed, both");
    }
    if (auto v = r.number(*sc, "snr_db", "scenario", spec.axis != SweepAxis::SnrDb)) spec.snr_db = *v;

    // detector
    if (const auto* d = r.child(*sc, "detector", "scenario", true)) {
      const std::string p = "scenario.detector";
      if (auto k = r.count(*d, "k", p, true, 1)) base.detector.k = static_cast<std::size_t>(*k);
      if (auto u = r.number(*d, "u", p, true)) {
        if (*u > 0.0) base.detector.u = *u;
        else r.fail(p + ".u", "must be > 0");
      }
      if (auto g = r.number(*d, "gamma", p, spec.axis != SweepAxis::Gamma)) {
        if (*g >= 0.0) base.detector.gamma = *g;
        else r.fail(p + ".gamma", "must be >= 0");
      }
      if (auto h = r.number(*d, "channel_gain", p, false)) {
        if (*h != 0.0) base.detector.channel_gain = *h;
        else r.fail(p + ".channel_gain", "must be nonzero");
      }
      if (auto sig = r.text(*d, "signal", p, false)) {
        if (*sig == "deterministic") base.detector.signal = SignalModel::Deterministic;
        else if (*sig == "gaussian") base.detector.signal = SignalModel::Gaussian;
        else r.fail(p + ".signal", "must be deterministic or gaussian");
      }
    }

    // noise
    if (const auto* n = r.child(*sc, "noise", "scenario", true)) {
      const std::string p = "scenario.noise";
      auto nominal = r.number(*n, "nominal_variance", p, true);
      auto confidence = r.number(*n, "confidence", p, false);
      if (confidence && !(*confidence > 0.0 && *confidence < 1.0)) {
        r.fail(p + ".confidence", "must lie in (0,1)");
        confidence.reset();
      }
      if (nominal && !(*nominal > 0.0)) {
        r.fail(p + ".nominal_variance", "must be > 0");
        nominal.reset();
      }
      if (auto snaps = r.count(*n, "reference_snapshots", p, false, 2)) base.reference_snapshots = *snaps;
      if (auto draw = r.text(*n, "draw", p, false)) {
        if (*draw == "per_su") base.variance_draw = VarianceDraw::PerSu;
        else if (*draw == "per_component") base.variance_draw = VarianceDraw::PerComponent;
        else r.fail(p + ".draw", "must be per_su or per_component");
      }
      const auto* explicit_bracket = r.child(*n, "bracket", p, false);
      const bool calibrated = n->contains("spread") || n->contains("calibration_samples");
      if (nominal) {
        try {
          if (explicit_bracket) {
            if (!explicit_bracket->is_array() || explicit_bracket->size() != 2 || !(*explicit_bracket)[0].is_number() ||
                !(*explicit_bracket)[1].is_number()) {
              r.fail(p + ".bracket", "must be [low, high]");
            } else {
              const VarianceBracket b{(*explicit_bracket)[0].get<double>(), (*explicit_bracket)[1].get<double>()};
              base.noise = NoiseUncertaintyModel(*nominal, confidence.value_or(0.99), b, 2);
            }
          } else if (calibrated) {
            auto spread = r.number(*n, "spread", p, true);
            auto samples = r.count(*n, "calibration_samples", p, true, 2);
            auto working = r.number(*n, "working_confidence", p, false);
            if (working && !(*working > 0.0 && *working < 1.0)) {
              r.fail(p + ".working_confidence", "must lie in (0,1)");
            } else if (spread && *spread < 0.0) {
              r.fail(p + ".spread", "must be >= 0");
            } else if (spread && samples) {
              base.noise = NoiseUncertaintyModel::calibrated(*nominal, *spread, static_cast<std::size_t>(*samples),
                                                             confidence.value_or(0.99), working);
            }
          } else {
            base.noise = NoiseUncertaintyModel::exact(*nominal);
          }
        } catch (const domain_error& e) {
          r.fail(p, e.what());
        }
      }
    }

    // fusion
    if (const auto* f = r.child(*sc, "fusion", "scenario", true)) {
      const std::string p = "scenario.fusion";
      if (auto K = r.count(*f, "K", p, spec.axis != SweepAxis::K, 1)) base.fusion.K = static_cast<std::size_t>(*K);
      if (auto a = r.number(*f, "prior_h0", p, true)) {
        if (*a >= 0.0 && *a <= 1.0) base.fusion.prior_h0 = *a;
        else r.fail(p + ".prior_h0", "must lie in [0,1]");
      }
      if (auto q = r.number(*f, "report_error", p, false)) {
        if (*q >= 0.0 && *q <= 0.5) base.fusion.report_error = *q;
        else r.fail(p + ".report_error", "must lie in [0,0.5]");
      }
      const int given = static_cast<int>(f->contains("n")) + static_cast<int>(f->contains("n_star")) +
                        static_cast<int>(f->contains("rule"));
      if (given != 1) {
        r.fail(p + ".n", "give exactly one of n, n_star, rule");
      } else if (f->contains("n")) {
        if (auto n = r.count(*f, "n", p, true, 1)) spec.vote_value = static_cast<std::size_t>(*n);
        spec.vote_convention = VoteConvention::N;
      } else if (f->contains("n_star")) {
        if (auto n = r.count(*f, "n_star", p, true, 0)) spec.vote_value = static_cast<std::size_t>(*n);
        spec.vote_convention = VoteConvention::NStar;
      } else if (auto rule = r.text(*f, "rule", p, true)) {
        if (*rule == "or") {
          spec.vote_convention = VoteConvention::N;
          spec.vote_value = 1;
        } else if (*rule == "and") {
          spec.vote_convention = VoteConvention::NStar;
          spec.vote_value = 0;
        } else {
          r.fail(p + ".rule", "must be or / and");
        }
      }
    }
  }

  if (!r.diags.empty()) throw spec_error(std::move(r.diags));

  for (const auto& e : entries) {
    spec.schemes.push_back(e.config);
    if (e.weight_ratio) spec.schemes.back().weights = geometric_weights(spec.base.detector.k, *e.weight_ratio);
  }

  // Invariants that depend on the sweep point.
  for (double v : spec.sweep) {
    Scenario s = spec.base;
    const std::string where = std::string(" at sweep ") + to_string(spec.axis) + "=" + std::to_string(v);
    try {
      s = scenario_at(spec, v);
    } catch (const domain_error& e) {
      r.fail("scenario", e.what() + where);
      continue;
    }
    if (s.fusion.K < 1) r.fail("scenario.fusion.K", "must be >= 1" + where);
    if (s.fusion.n < 1 || s.fusion.n > s.fusion.K) {
      r.fail(spec.vote_convention == VoteConvention::N ? "scenario.fusion.n" : "scenario.fusion.n_star",
             "vote threshold must satisfy 1 <= n <= K" + where);
    }
    if (s.detector.gamma < 0.0) r.fail("scenario.detector.gamma", "must be >= 0" + where);
  }
  for (std::size_t i = 0; i < spec.schemes.size(); ++i) {
    const auto& w = spec.schemes[i].weights;
    if (!w.empty() && w.size() != spec.base.detector.k) {
      r.fail("schemes[" + std::to_string(i) + "].weights", "must have length k");
    }
  }
  if (!r.diags.empty()) throw spec_error(std::move(r.diags));
  return spec;
}

[[nodiscard]] inline ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw spec_error(std::vector<Diagnostic>{{"<file>", "cannot read " + path.string()}});
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw spec_error(std::vector<Diagnostic>{{"<file>", std::string("invalid JSON: ") + e.what()}});
  }
  return parse_spec(root);
}

struct ResultRow {
  double sweep_value = 0.0;
  ScenarioEstimate estimate;
};

inline constexpr const char* kCsvHeader =
    "sweep_value,scheme,pd,pd_lo,pd_hi,pf,pf_lo,pf_hi,qf,qm,qe,pd_analytic,pf_analytic,qe_analytic,"
    "steps_mean,trials,seed";

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace detail

[[nodiscard]] inline std::string csv_row(const ResultRow& row) {
  using detail::fmt_double;
  const auto& e = row.estimate;
  std::string s = fmt_double(row.sweep_value) + "," + to_string(e.scheme);
  auto rate = [&](const std::optional<RateEstimate>& r, bool with_interval) {
    if (r) {
      s += "," + fmt_double(r->point);
      if (with_interval) s += "," + fmt_double(r->lo) + "," + fmt_double(r->hi);
    } else {
      s += with_interval ? ",,," : ",";
    }
  };
  rate(e.pd, true);
  rate(e.pf, true);
  rate(e.qf, false);
  rate(e.qm, false);
  s += "," + (e.qe ? fmt_double(e.qe->point) : std::string{});
  s += "," + fmt_double(e.analytic.pd.value());
  s += "," + fmt_double(e.analytic.pf.value());
  s += "," + fmt_double(e.analytic.qe);
  s += "," + fmt_double(e.steps_mean);
  s += "," + std::to_string(e.trials);
  s += "," + std::to_string(e.seed);
  return s;
}

[[nodiscard]] inline std::string render_csv(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

/// Runs every sweep point; the seed override, when given, replaces the spec's.
[[nodiscard]] inline std::vector<ResultRow> run_sweep(const ExperimentSpec& spec,
                                                      std::optional<std::uint64_t> seed = std::nullopt,
                                                      unsigned workers = default_workers()) {
  std::vector<ResultRow> rows;
  for (double v : spec.sweep) {
    Scenario s = scenario_at(spec, v);
    if (seed) s.seed = *seed;
    for (auto& e : estimate_schemes(s, spec.schemes, workers)) rows.push_back({v, std::move(e)});
  }
  return rows;
}

/// Writes `content` next to `path` and renames it into place.
inline void write_atomically(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path);
}

}  // namespace coopsense
