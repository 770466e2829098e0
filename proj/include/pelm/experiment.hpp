#pragma once

// Experiment orchestration behind the CLI: configuration, the three-model by
// PINC-level protocol, and the files it writes.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pelm/ar.hpp"
#include "pelm/elm.hpp"
#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/kalman.hpp"
#include "pelm/pso_elm.hpp"
#include "pelm/report.hpp"
#include "pelm/series_data.hpp"

namespace pelm {

struct PincWeights {
  double pinc = 0.9;
  SharpnessWeights weights;
};

struct DataSource {
  /// Set: read this CSV. Unset: synthesize.
  std::optional<std::string> csv;
  int synth_days = 60;
  SynthProfile profile;
};

struct BaselineSettings {
  std::size_t ar_max_order = 16;
  std::size_t kalman_grid_points = 25;
  bool kalman_refine = true;
};

/// Every knob of one run. Defaults match configs/default.json.
struct ExperimentConfig {
  std::uint64_t seed = 2014;
  DataSource data;
  WindowConfig window;
  BandConfig band;
  /// Zero means "all samples before the test block".
  std::size_t train_len = 0;
  std::size_t test_len = 300;
  std::vector<double> pinc_levels{0.90, 0.95, 0.99};
  std::vector<PincWeights> sharpness_weights{
      {0.90, {6.0, 0.1}}, {0.95, {11.0, 0.1}}, {0.99, {12.0, 0.1}}};
  ObjectiveWeights objective_weights;
  ElmConfig elm;
  SwarmConfig pso;
  BaselineSettings baselines;

  const SharpnessWeights& weights_for(double pinc) const {
    for (const auto& pw : sharpness_weights)
      if (std::abs(pw.pinc - pinc) < 1e-9) return pw.weights;
    fail(ErrorKind::config, "no sharpness weights for pinc " + text::exact(pinc));
  }

  void validate() const {
    window.validate();
    band.validate();
    objective_weights.validate();
    pso.validate();
    require(test_len >= 1, ErrorKind::config, "split.test_len must be >= 1");
    require(!pinc_levels.empty(), ErrorKind::config, "pinc_levels is empty");
    require(data.synth_days >= 1 || data.csv, ErrorKind::config, "data.synth.days must be >= 1");
    for (double p : pinc_levels) {
      require(p > 0.0 && p < 1.0, ErrorKind::config, "pinc levels must lie in (0, 1)");
      weights_for(p).validate();
    }
  }

  /// Component seeds derived from the global seed.
  std::uint64_t synth_seed() const { return seed; }
  std::uint64_t elm_seed() const { return seed + 1; }
  std::uint64_t pso_seed() const { return seed + 2; }
};

// ---------------------------------------------------------------------------
// JSON config. Missing keys keep their defaults.

namespace detail {

template <class T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  using detail::read_opt;
  ExperimentConfig c;
  try {
    read_opt(j, "seed", c.seed);
    if (j.contains("data")) {
      const auto& d = j.at("data");
      if (d.contains("csv") && !d.at("csv").is_null()) c.data.csv = d.at("csv").get<std::string>();
      if (d.contains("synth")) {
        const auto& s = d.at("synth");
        read_opt(s, "days", c.data.synth_days);
        if (s.contains("profile")) {
          const auto& p = s.at("profile");
          auto& pr = c.data.profile;
          read_opt(p, "base_level", pr.base_level);
          read_opt(p, "diurnal_amplitude", pr.diurnal_amplitude);
          read_opt(p, "weekend_multiplier", pr.weekend_multiplier);
          read_opt(p, "noise_sd", pr.noise_sd);
          read_opt(p, "spike_probability", pr.spike_probability);
          read_opt(p, "spike_magnitude", pr.spike_magnitude);
          if (p.contains("start_date")) {
            const auto stamp = HourStamp::parse(p.at("start_date").get<std::string>() + "T00:00");
            require(stamp.has_value(), ErrorKind::config, "bad profile.start_date");
            const std::chrono::year_month_day ymd{
                std::chrono::sys_days{std::chrono::days{stamp->day_index()}}};
            pr.start_year = static_cast<int>(ymd.year());
            pr.start_month = static_cast<unsigned>(ymd.month());
            pr.start_day = static_cast<unsigned>(ymd.day());
          }
        }
      }
    }
    if (j.contains("window")) {
      read_opt(j.at("window"), "lag", c.window.lag);
      read_opt(j.at("window"), "horizon", c.window.horizon);
    }
    if (j.contains("band")) read_opt(j.at("band"), "rho_percent", c.band.rho_percent);
    if (j.contains("split")) {
      read_opt(j.at("split"), "train_len", c.train_len);
      read_opt(j.at("split"), "test_len", c.test_len);
    }
    read_opt(j, "pinc_levels", c.pinc_levels);
    if (j.contains("sharpness_weights")) {
      c.sharpness_weights.clear();
      for (const auto& e : j.at("sharpness_weights"))
        c.sharpness_weights.push_back(
            {e.at("pinc").get<double>(), {e.at("w1").get<double>(), e.at("w2").get<double>()}});
    }
    if (j.contains("objective_weights")) {
      read_opt(j.at("objective_weights"), "gamma", c.objective_weights.gamma);
      read_opt(j.at("objective_weights"), "lambda", c.objective_weights.lambda);
    }
    if (j.contains("elm")) {
      const auto& e = j.at("elm");
      read_opt(e, "hidden_count", c.elm.hidden_count);
      read_opt(e, "init_low", c.elm.init_low);
      read_opt(e, "init_high", c.elm.init_high);
      read_opt(e, "pinv_tol", c.elm.pinv_tol);
      read_opt(e, "standardize", c.elm.standardize);
      read_opt(e, "standardize_targets", c.elm.standardize_targets);
      if (e.contains("activation"))
        require(e.at("activation").get<std::string>() == "sigmoid", ErrorKind::config,
                "elm.activation: only 'sigmoid' is supported");
    }
    if (j.contains("pso")) {
      const auto& p = j.at("pso");
      read_opt(p, "particles", c.pso.particle_count);
      read_opt(p, "iterations", c.pso.iterations);
      read_opt(p, "inertia", c.pso.inertia);
      read_opt(p, "cognitive", c.pso.cognitive);
      read_opt(p, "social", c.pso.social);
      read_opt(p, "step", c.pso.step);
      read_opt(p, "v_max", c.pso.v_max);
      if (p.contains("init_spread") && !p.at("init_spread").is_null())
        c.pso.init_spread = p.at("init_spread").get<double>();
      read_opt(p, "early_stop_delta", c.pso.early_stop_delta);
      read_opt(p, "per_dimension_draws", c.pso.per_dimension_draws);
      if (p.contains("fitness_set")) {
        const auto s = p.at("fitness_set").get<std::string>();
        require(s == "train" || s == "holdout", ErrorKind::config,
                "pso.fitness_set must be 'train' or 'holdout'");
        c.pso.fitness_set = s == "train" ? FitnessSet::train : FitnessSet::holdout;
      }
    }
    if (j.contains("baselines")) {
      const auto& b = j.at("baselines");
      read_opt(b, "ar_max_order", c.baselines.ar_max_order);
      read_opt(b, "kalman_grid_points", c.baselines.kalman_grid_points);
      read_opt(b, "kalman_refine", c.baselines.kalman_refine);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, "config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// Commands

inline TimeSeries load_series(const ExperimentConfig& c) {
  if (c.data.csv) return load_csv(*c.data.csv);
  return synthesize(c.data.synth_days, c.synth_seed(), c.data.profile);
}

/// Writes the synthesized series; returns the row count.
inline std::size_t cmd_synth(const ExperimentConfig& c, const std::string& path) {
  const TimeSeries s = synthesize(c.data.synth_days, c.synth_seed(), c.data.profile);
  write_file(path, [&](std::ostream& out) { write_csv(out, s); });
  return s.size();
}

struct ModelOutcome {
  std::string model;
  double pinc = 0.0;
  IntervalForecast forecast;
  Evaluation evaluation;
  OutsideStats outside;
};

struct ExperimentResult {
  std::vector<ReportRow> rows;
  std::vector<ModelOutcome> outcomes;
  /// Swarm history per PINC level, in pinc_levels order.
  std::vector<std::vector<HistoryEntry>> pso_history;
  /// Untuned and tuned train-set objective per PINC level.
  std::vector<std::pair<double, double>> pso_objective;
  std::size_t train_samples = 0;
  std::size_t test_samples = 0;
};

inline std::string model_slug(const std::string& model) {
  if (model == "PSO-ELM") return "pso_elm";
  if (model == "AR") return "ar";
  return "kalman";
}

inline IntervalForecast make_forecast(IntervalBounds b, std::span<const double> actual,
                                      double pinc) {
  IntervalForecast f;
  f.lower = std::move(b.lower);
  f.upper = std::move(b.upper);
  f.actual.assign(actual.begin(), actual.end());
  f.pi = PiConfig::from_pinc(pinc);
  return f;
}

/// Runs the full protocol. When out_dir is non-empty every artifact is written
/// there.
inline ExperimentResult run_experiment(const ExperimentConfig& c,
                                       const std::filesystem::path& out_dir = {}) {
  c.validate();
  ExperimentResult res;

  const TimeSeries series = with_stage("data", [&] { return load_series(c); });
  const auto values = std::span<const double>(series.values());

  const auto [train_set, test_set] = with_stage("windowing", [&] {
    const SupervisedSet ds = make_supervised(series, c.window, c.band);
    require(c.test_len < ds.size(), ErrorKind::config,
            "split.test_len " + std::to_string(c.test_len) + " leaves no training samples");
    const std::size_t train_len = c.train_len ? c.train_len : ds.size() - c.test_len;
    return split(ds, SplitSpec{train_len, c.test_len});
  });
  res.train_samples = train_set.size();
  res.test_samples = test_set.size();

  // Baselines see the raw series up to the first test target.
  const std::size_t test_start = test_set.target_index.front();
  const auto base_train = values.first(test_start);
  const std::vector<double> actual(test_set.targets.data(),
                                   test_set.targets.data() + test_set.targets.size());

  ElmConfig elm_cfg = c.elm;
  elm_cfg.input_dim = c.window.lag;
  elm_cfg.output_dim = 2;
  elm_cfg.seed = c.elm_seed();
  const ElmModel elm = with_stage("elm", [&] { return train(train_set, elm_cfg); });

  const ArModel ar =
      with_stage("ar", [&] { return fit_ar(base_train, c.baselines.ar_max_order); });
  const KalmanFit kf = with_stage("kalman", [&] {
    KalmanGrid grid = default_kalman_grid(base_train, c.baselines.kalman_grid_points);
    grid.refine = c.baselines.kalman_refine;
    return kalman_fit(base_train, grid);
  });

  if (!out_dir.empty()) std::filesystem::create_directories(out_dir);
  auto out_path = [&](const std::string& name) { return (out_dir / name).string(); };

  for (double pinc : c.pinc_levels) {
    const std::string label = pinc_label(pinc);
    const PiConfig pi = PiConfig::from_pinc(pinc);
    const SharpnessWeights& w = c.weights_for(pinc);

    SwarmConfig pso_cfg = c.pso;
    pso_cfg.seed = c.pso_seed();
    const PsoElmResult tuned = with_stage("pso (pinc " + label + ")", [&] {
      return tune(train_set, elm, pso_cfg, pi, w, c.objective_weights);
    });
    res.pso_history.push_back(tuned.swarm.history);
    res.pso_objective.emplace_back(tuned.swarm.history.front().value.objective,
                                   tuned.swarm.global_best_value.objective);

    std::vector<std::pair<std::string, IntervalBounds>> bounds;
    with_stage("predict (pinc " + label + ")", [&] {
      bounds.emplace_back("PSO-ELM", predict(tuned.model, test_set.features));
      bounds.emplace_back("AR", ar_intervals(ar, values, actual.size(), pi.alpha));
      bounds.emplace_back("Kalman", kalman_intervals(base_train, values.subspan(test_start), kf,
                                                     pi.alpha));
    });

    for (auto& [model, b] : bounds) {
      ModelOutcome o;
      o.model = model;
      o.pinc = pinc;
      o.forecast = make_forecast(std::move(b), actual, pinc);
      o.evaluation = with_stage("evaluate " + model + " (pinc " + label + ")", [&] {
        return evaluate(o.forecast, w, c.objective_weights);
      });
      o.outside = outside_stats(o.forecast);
      res.rows.push_back(make_report_row(model, pinc, o.evaluation, c.objective_weights));
      if (!out_dir.empty())
        write_file(out_path("bounds_" + model_slug(model) + "_" + label + ".csv"),
                   [&](std::ostream& os) { write_bounds(os, o.forecast); });
      if (!out_dir.empty() && model == "PSO-ELM")
        write_file(out_path("outside_" + label + ".tsv"),
                   [&](std::ostream& os) { write_outside(os, o.outside); });
      res.outcomes.push_back(std::move(o));
    }

    if (!out_dir.empty()) {
      write_file(out_path("pso_history_" + label + ".csv"),
                 [&](std::ostream& os) { write_history(os, tuned.swarm.history); });
      write_file(out_path("model_" + label + ".json"),
                 [&](std::ostream& os) { os << to_json(tuned.model).dump(2) << '\n'; });
    }
  }

  if (!out_dir.empty())
    write_file(out_path("report.tsv"), [&](std::ostream& os) { write_report(os, res.rows); });
  return res;
}

/// Re-scores a bounds trace.
inline Evaluation cmd_eval(const std::string& bounds_path, double pinc, const SharpnessWeights& w,
                           const ObjectiveWeights& ow) {
  std::ifstream in(bounds_path, std::ios::binary);
  if (!in) fail(ErrorKind::data, "cannot open '" + bounds_path + "'");
  const IntervalForecast f = read_bounds(in, PiConfig::from_pinc(pinc), bounds_path);
  return evaluate(f, w, ow);
}

}  // namespace pelm
