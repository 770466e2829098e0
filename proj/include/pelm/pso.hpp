#pragma once

// Global-best particle swarm with constant inertia:
//   v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x),  clamped to +/- v_max
//   x <- x + phi v
// Particle 0 starts exactly on the seed position, so the returned global best
// is never worse than the seed.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "pelm/error.hpp"
#include "pelm/random.hpp"

namespace pelm {

enum class FitnessSet { train, holdout };

struct SwarmConfig {
  std::size_t particle_count = 50;
  std::size_t iterations = 150;
  double inertia = 0.9;
  double cognitive = 1.0;
  double social = 1.0;
  double step = 0.5;
  double v_max = 2.0;
  /// Half-width of the uniform perturbation around the seed position.
  /// Unset means 0.5 * stddev(seed position).
  std::optional<double> init_spread;
  std::uint64_t seed = 0;
  /// Stop once one iteration improves the global best by less than this.
  /// Zero disables early stopping.
  double early_stop_delta = 0.0;
  FitnessSet fitness_set = FitnessSet::train;
  /// Draw r1, r2 per dimension instead of once per particle update.
  bool per_dimension_draws = false;

  void validate() const {
    require(particle_count >= 1, ErrorKind::config, "pso: particle_count must be >= 1");
    require(iterations >= 1, ErrorKind::config, "pso: iterations must be >= 1");
    require(v_max > 0.0 && std::isfinite(v_max), ErrorKind::config, "pso: v_max must be > 0");
    require(!init_spread || (*init_spread >= 0.0 && std::isfinite(*init_spread)),
            ErrorKind::config, "pso: init_spread must be >= 0");
    require(early_stop_delta >= 0.0, ErrorKind::config, "pso: early_stop_delta must be >= 0");
  }
};

/// Objective value with the two components that make it up.
struct FitnessValue {
  double objective = 0.0;
  double aace = 0.0;
  double sharpness = 0.0;
};

struct Particle {
  std::vector<double> position;
  std::vector<double> velocity;
  std::vector<double> best_position;
  FitnessValue best;
};

struct HistoryEntry {
  std::size_t iteration = 0;
  FitnessValue value;
};

struct Swarm {
  std::vector<Particle> particles;
  std::vector<double> global_best;
  FitnessValue global_best_value;
  /// Global best after initialization (iteration 0) and after each iteration.
  std::vector<HistoryEntry> history;
};

template <class F>
concept SwarmObjective = std::invocable<F&, std::span<const double>> &&
    (std::convertible_to<std::invoke_result_t<F&, std::span<const double>>, double> ||
     std::same_as<std::remove_cvref_t<std::invoke_result_t<F&, std::span<const double>>>,
                  FitnessValue>);

namespace detail {

template <class F>
FitnessValue score(F& f, std::span<const double> x) {
  using R = std::remove_cvref_t<std::invoke_result_t<F&, std::span<const double>>>;
  if constexpr (std::same_as<R, FitnessValue>) {
    return f(x);
  } else {
    return FitnessValue{static_cast<double>(f(x)), 0.0, 0.0};
  }
}

inline void check_dims(std::size_t a, std::size_t b, const char* what) {
  require(a == b, ErrorKind::numeric,
          std::string("pso: dimension mismatch in ") + what + " (" + std::to_string(a) +
              " vs " + std::to_string(b) + ")");
}

}  // namespace detail

inline double clamp_speed(double v, double v_max) { return std::clamp(v, -v_max, v_max); }

/// New velocity with per-dimension coefficients r1[d], r2[d].
inline std::vector<double> update_velocity(const Particle& p, std::span<const double> g_best,
                                           const SwarmConfig& cfg, std::span<const double> r1,
                                           std::span<const double> r2) {
  const std::size_t s = p.position.size();
  detail::check_dims(p.velocity.size(), s, "velocity");
  detail::check_dims(p.best_position.size(), s, "personal best");
  detail::check_dims(g_best.size(), s, "global best");
  detail::check_dims(r1.size(), s, "r1");
  detail::check_dims(r2.size(), s, "r2");
  std::vector<double> v(s);
  for (std::size_t d = 0; d < s; ++d) {
    const double raw = cfg.inertia * p.velocity[d] +
                       cfg.cognitive * r1[d] * (p.best_position[d] - p.position[d]) +
                       cfg.social * r2[d] * (g_best[d] - p.position[d]);
    v[d] = clamp_speed(raw, cfg.v_max);
  }
  return v;
}

/// New velocity with one scalar r1, r2 shared by all dimensions.
inline std::vector<double> update_velocity(const Particle& p, std::span<const double> g_best,
                                           const SwarmConfig& cfg, double r1, double r2) {
  const std::vector<double> r1v(p.position.size(), r1);
  const std::vector<double> r2v(p.position.size(), r2);
  return update_velocity(p, g_best, cfg, r1v, r2v);
}

inline std::vector<double> update_position(const Particle& p, const SwarmConfig& cfg) {
  detail::check_dims(p.velocity.size(), p.position.size(), "position");
  std::vector<double> x(p.position.size());
  for (std::size_t d = 0; d < x.size(); ++d) x[d] = p.position[d] + cfg.step * p.velocity[d];
  return x;
}

inline double default_init_spread(std::span<const double> seed_position) {
  if (seed_position.empty()) return 0.0;
  double mean = 0.0;
  for (double v : seed_position) mean += v;
  mean /= static_cast<double>(seed_position.size());
  double var = 0.0;
  for (double v : seed_position) var += (v - mean) * (v - mean);
  var /= static_cast<double>(seed_position.size());
  return 0.5 * std::sqrt(var);
}

/// Scatters particles around the seed and evaluates them. rng is advanced.
template <SwarmObjective F>
Swarm init_swarm(std::span<const double> seed_position, const SwarmConfig& cfg, Rng& rng,
                 F&& objective) {
  cfg.validate();
  for (double v : seed_position)
    require(std::isfinite(v), ErrorKind::numeric, "pso: non-finite seed position");
  const double spread = cfg.init_spread.value_or(default_init_spread(seed_position));
  const std::size_t s = seed_position.size();

  Swarm swarm;
  swarm.particles.resize(cfg.particle_count);
  for (std::size_t i = 0; i < cfg.particle_count; ++i) {
    Particle& p = swarm.particles[i];
    p.position.assign(seed_position.begin(), seed_position.end());
    if (i > 0)
      for (std::size_t d = 0; d < s; ++d) p.position[d] += rng.uniform(-spread, spread);
    p.velocity.resize(s);
    for (std::size_t d = 0; d < s; ++d) p.velocity[d] = rng.uniform(-cfg.v_max, cfg.v_max);
    p.best_position = p.position;
    p.best = detail::score(objective, p.position);
  }
  // Strict comparison: the lowest index wins ties.
  std::size_t best = 0;
  for (std::size_t i = 1; i < swarm.particles.size(); ++i)
    if (swarm.particles[i].best.objective < swarm.particles[best].best.objective) best = i;
  swarm.global_best = swarm.particles[best].best_position;
  swarm.global_best_value = swarm.particles[best].best;
  swarm.history.push_back({0, swarm.global_best_value});
  return swarm;
}

/// One synchronous iteration: every particle moves against the global best of
/// the previous iteration, then bests are reduced in particle-index order.
template <SwarmObjective F>
void step_swarm(Swarm& swarm, const SwarmConfig& cfg, Rng& rng, F&& objective,
                std::size_t iteration) {
  const std::size_t s = swarm.global_best.size();
  std::vector<double> r1(s), r2(s);
  for (Particle& p : swarm.particles) {
    if (cfg.per_dimension_draws) {
      for (std::size_t d = 0; d < s; ++d) r1[d] = rng.uniform01();
      for (std::size_t d = 0; d < s; ++d) r2[d] = rng.uniform01();
    } else {
      std::fill(r1.begin(), r1.end(), rng.uniform01());
      std::fill(r2.begin(), r2.end(), rng.uniform01());
    }
    p.velocity = update_velocity(p, swarm.global_best, cfg, r1, r2);
    p.position = update_position(p, cfg);
  }

  std::vector<FitnessValue> scores(swarm.particles.size());
  for (std::size_t i = 0; i < swarm.particles.size(); ++i)
    scores[i] = detail::score(objective, swarm.particles[i].position);

  for (std::size_t i = 0; i < swarm.particles.size(); ++i) {
    Particle& p = swarm.particles[i];
    if (scores[i].objective < p.best.objective) {
      p.best = scores[i];
      p.best_position = p.position;
    }
    if (p.best.objective < swarm.global_best_value.objective) {
      swarm.global_best_value = p.best;
      swarm.global_best = p.best_position;
    }
  }
  swarm.history.push_back({iteration, swarm.global_best_value});
}

using SwarmObserver = std::function<void(const Swarm&)>;

/// Full optimization from a seed position. The observer, when set, sees the
/// swarm after initialization and after every iteration.
template <SwarmObjective F>
Swarm run_swarm(std::span<const double> seed_position, const SwarmConfig& cfg, F&& objective,
                const SwarmObserver& observer = {}) {
  Rng rng(cfg.seed);
  Swarm swarm = init_swarm(seed_position, cfg, rng, objective);
  if (observer) observer(swarm);
  for (std::size_t it = 1; it <= cfg.iterations; ++it) {
    const double before = swarm.global_best_value.objective;
    step_swarm(swarm, cfg, rng, objective, it);
    if (observer) observer(swarm);
    if (cfg.early_stop_delta > 0.0 &&
        before - swarm.global_best_value.objective < cfg.early_stop_delta)
      break;
  }
  return swarm;
}

}  // namespace pelm
