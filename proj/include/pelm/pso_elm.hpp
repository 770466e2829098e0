#pragma once

// Swarm tuning of the ELM output weights against the interval objective.

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pelm/elm.hpp"
#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/pso.hpp"
#include "pelm/series_data.hpp"

namespace pelm {

/// Scores candidate output weights on a fixed evaluation set. The hidden
/// output matrix is computed once since only beta varies.
class IntervalFitness {
 public:
  IntervalFitness(const ElmModel& skeleton, const SupervisedSet& eval_set, PiConfig pi,
                  SharpnessWeights w, ObjectiveWeights ow)
      : scaler_(skeleton.scaler),
        hidden_count_(static_cast<std::size_t>(skeleton.hidden.weights.rows())),
        outputs_(skeleton.config.output_dim),
        h_(design_matrix(skeleton, eval_set.features)),
        weights_(w),
        objective_weights_(ow) {
    pi.validate();
    w.validate();
    ow.validate();
    require(eval_set.size() >= 1, ErrorKind::data, "fitness: empty evaluation set");
    forecast_.actual.assign(eval_set.targets.data(),
                            eval_set.targets.data() + eval_set.targets.size());
    forecast_.pi = pi;
  }

  std::size_t dimension() const { return hidden_count_ * outputs_; }

  FitnessValue operator()(std::span<const double> position) {
    require(position.size() == dimension(), ErrorKind::numeric,
            "fitness: position length " + std::to_string(position.size()) + " != " +
                std::to_string(dimension()));
    const Eigen::MatrixXd beta = unflatten(position, hidden_count_, outputs_);
    const Eigen::MatrixXd raw =
        (h_ * beta).unaryExpr([&](double z) { return scaler_.unscale_target(z); });
    IntervalBounds b = to_bounds(raw);
    forecast_.lower = std::move(b.lower);
    forecast_.upper = std::move(b.upper);
    for (std::size_t i = 0; i < forecast_.size(); ++i)
      require(std::isfinite(forecast_.lower[i]) && std::isfinite(forecast_.upper[i]),
              ErrorKind::numeric, "fitness: non-finite bound");
    FitnessValue v;
    v.aace = aace(picp(forecast_), forecast_.pi.pinc());
    v.sharpness = sharpness_mean(forecast_, weights_);
    v.objective = pelm::objective(v.aace, v.sharpness, objective_weights_);
    return v;
  }

 private:
  Scaler scaler_;
  std::size_t hidden_count_;
  std::size_t outputs_;
  Eigen::MatrixXd h_;
  SharpnessWeights weights_;
  ObjectiveWeights objective_weights_;
  IntervalForecast forecast_;
};

/// Objective F for one candidate, scored against eval_set's true targets.
inline double fitness(std::span<const double> position, const ElmModel& skeleton,
                      const SupervisedSet& eval_set, PiConfig pi, SharpnessWeights w,
                      ObjectiveWeights ow) {
  IntervalFitness f(skeleton, eval_set, pi, w, ow);
  return f(position).objective;
}

/// Samples the swarm scores against: the whole training set, or its last
/// quarter in holdout mode.
inline SupervisedSet fitness_samples(const SupervisedSet& train_set, FitnessSet mode) {
  if (mode == FitnessSet::train) return train_set;
  const std::size_t n = train_set.size();
  const std::size_t count = std::max<std::size_t>(1, n / 4);
  return train_set.rows(n - count, count);
}

struct PsoElmResult {
  ElmModel model;
  Swarm swarm;
};

inline PsoElmResult tune(const SupervisedSet& train_set, const ElmModel& model,
                         const SwarmConfig& cfg, PiConfig pi, SharpnessWeights w,
                         ObjectiveWeights ow, const SwarmObserver& observer = {}) {
  cfg.validate();
  require(model.output.beta.size() > 0, ErrorKind::config, "pso: model has no trained beta");
  IntervalFitness f(model, fitness_samples(train_set, cfg.fitness_set), pi, w, ow);
  const std::vector<double> seed = flatten(model.output.beta);
  PsoElmResult out{model, run_swarm(seed, cfg, f, observer)};
  out.model.output.beta = unflatten(out.swarm.global_best,
                                    static_cast<std::size_t>(model.output.beta.rows()),
                                    static_cast<std::size_t>(model.output.beta.cols()));
  return out;
}

}  // namespace pelm
