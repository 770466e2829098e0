// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance            report every criterion, exit 0 once all have run
//   acceptance --strict   exit 1 if any criterion fails

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <string_view>
#include <sys/wait.h>
#include <vector>

#include "pelm/experiment.hpp"
#include "support.hpp"

using namespace pelm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// 1 ---------------------------------------------------------------------------

Outcome pinv_axioms() {
  Stopwatch clock;
  Rng rng(1001);
  double worst = 0.0;
  int deficient = 0;
  for (int i = 0; i < 200; ++i) {
    const auto rows = static_cast<Eigen::Index>(1 + rng.next_u64() % 50);
    const auto cols = static_cast<Eigen::Index>(1 + rng.next_u64() % 50);
    Eigen::MatrixXd a;
    if (i % 2) {
      const Eigen::Index full = std::min(rows, cols);
      const auto rank = static_cast<Eigen::Index>(rng.next_u64() % static_cast<std::uint64_t>(full));
      a = rank == 0 ? Eigen::MatrixXd::Zero(rows, cols)
                    : testing::low_rank_matrix(rng, rows, cols, rank);
      ++deficient;
    } else {
      a = testing::random_matrix(rng, rows, cols);
    }
    worst = std::max(worst, testing::penrose_error(a, pinv(a)));
  }
  const double t = clock.seconds();
  return {worst <= 1e-8 && t < 10.0,
          fmt("200 matrices (%d rank-deficient), max violation %.2e, %.2f s", deficient, worst, t)};
}

// 2 ---------------------------------------------------------------------------

Outcome zero_error_fit() {
  Stopwatch clock;
  Rng rng(2002);
  std::vector<double> v(30 + 14);
  for (auto& x : v) x = rng.uniform(100.0, 800.0);
  const SupervisedSet ds = make_supervised(v, WindowConfig{14, 1}, BandConfig{5.0});
  ElmConfig c;
  c.hidden_count = 30;
  c.seed = 2003;
  const ElmModel m = train(ds, c);
  const Eigen::MatrixXd h = design_matrix(m, ds.features);
  const double resid = testing::max_abs(h * m.output.beta - scaled_band_targets(m.scaler, ds));
  const double t = clock.seconds();
  return {ds.size() == 30 && resid <= 1e-6 && t < 1.0,
          fmt("N = K = 30, max |H beta - T| = %.2e, %.3f s", resid, t)};
}

// 3 ---------------------------------------------------------------------------

Outcome metrics_oracle() {
  Rng rng(3003);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto fx = testing::random_fixture(rng, 20);
    const double pinc = std::array{0.90, 0.95, 0.99}[static_cast<std::size_t>(i % 3)];
    const SharpnessWeights w{rng.uniform(1.0, 12.0), rng.uniform(0.0, 1.0)};
    const ObjectiveWeights ow{rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
    const IntervalForecast f{fx.lower, fx.upper, fx.actual, PiConfig::from_pinc(pinc)};
    const Evaluation e = evaluate(f, w, ow);
    const auto o = testing::oracle_metrics(fx.lower, fx.upper, fx.actual, f.pi.alpha, w.w1, w.w2,
                                           ow.gamma, ow.lambda);
    for (double d : {e.picp - o.picp, e.aace - o.aace, e.sharpness - o.sharpness,
                     e.objective - o.objective, e.mpil - o.mpil})
      worst = std::max(worst, std::abs(d));
  }
  return {worst <= 1e-9, fmt("100 fixtures of 20 points, max difference %.2e", worst)};
}

// 4 ---------------------------------------------------------------------------

Outcome report_identity(const ExperimentResult& run, const ExperimentConfig& cfg) {
  int bad = 0;
  for (const auto& r : run.rows) {
    const double rel = std::stod(r.reliability), sharp = std::stod(r.sharpness);
    if (r.objective != text::fixed(objective(rel, sharp, cfg.objective_weights), kReportDecimals))
      ++bad;
  }
  struct Ref {
    double reliability, sharpness;
    const char* objective;
  };
  int ref_bad = 0;
  for (const Ref& ref : {Ref{0.003, 0.180, "0.183"}, Ref{0.060, 0.264, "0.324"},
                         Ref{0.017, 0.043, "0.060"}}) {
    Evaluation e;
    e.aace = ref.reliability;
    e.sharpness = ref.sharpness;
    if (make_report_row("ref", 0.9, e, ObjectiveWeights{}, 3).objective != ref.objective) ++ref_bad;
  }
  return {bad == 0 && ref_bad == 0 && run.rows.size() == 9,
          fmt("%zu emitted rows, %d mismatches; 3 reference rows, %d mismatches", run.rows.size(),
              bad, ref_bad)};
}

// 5 ---------------------------------------------------------------------------

Outcome swarm_contracts() {
  Stopwatch clock;
  ExperimentConfig cfg;
  int history_bad = 0, speed_bad = 0, final_bad = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const TimeSeries s = synthesize(cfg.data.synth_days, seed, cfg.data.profile);
    const SupervisedSet ds = make_supervised(s, cfg.window, cfg.band);
    const auto [train_set, test_set] = split(ds, SplitSpec{ds.size() - cfg.test_len, cfg.test_len});
    ElmConfig ec = cfg.elm;
    ec.seed = seed + 1;
    const ElmModel m = train(train_set, ec);
    const double pinc = cfg.pinc_levels[seed % cfg.pinc_levels.size()];
    const PiConfig pi = PiConfig::from_pinc(pinc);
    const SharpnessWeights& w = cfg.weights_for(pinc);
    SwarmConfig sc = cfg.pso;
    sc.seed = seed + 2;
    bool fast = false;
    const PsoElmResult r = tune(train_set, m, sc, pi, w, cfg.objective_weights, [&](const Swarm& sw) {
      for (const auto& p : sw.particles)
        for (double v : p.velocity) fast = fast || std::abs(v) > sc.v_max;
    });
    speed_bad += fast;
    const auto& h = r.swarm.history;
    for (std::size_t i = 1; i < h.size(); ++i)
      if (h[i].value.objective > h[i - 1].value.objective) {
        ++history_bad;
        break;
      }
    const double start = fitness(flatten(m.output.beta), m, train_set, pi, w, cfg.objective_weights);
    const double end = fitness(flatten(r.model.output.beta), m, train_set, pi, w, cfg.objective_weights);
    final_bad += end > start;
  }

  SwarmConfig sphere_cfg;
  sphere_cfg.particle_count = 20;
  sphere_cfg.iterations = 150;
  sphere_cfg.seed = 7;
  sphere_cfg.init_spread = 5.0;
  const Swarm sphere = run_swarm(std::vector<double>{3.0, -4.0}, sphere_cfg,
                                 [](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; });
  const double best = sphere.global_best_value.objective;
  return {history_bad == 0 && speed_bad == 0 && final_bad == 0 && best < 1e-2,
          fmt("20 seeds: %d non-monotone histories, %d speed violations, %d F(final) > F(seed); "
              "sphere best %.2e; %.1f s",
              history_bad, speed_bad, final_bad, best, clock.seconds())};
}

// 6 ---------------------------------------------------------------------------

Outcome kalman_random_walk(std::string& detail) {
  Rng rng(6006);
  std::vector<double> y(900);
  double level = 500.0;
  for (auto& v : y) {
    level += 2.0 * rng.normal();
    v = level + 3.0 * rng.normal();
  }
  const auto train = std::span<const double>(y).first(600);
  const auto test = std::span<const double>(y).subspan(600);
  const KalmanFit fit = kalman_fit(train, default_kalman_grid(train));
  bool ok = true;
  detail += "Kalman random-walk PICP";
  for (double pinc : {0.90, 0.95, 0.99}) {
    const IntervalBounds b = kalman_intervals(train, test, fit, 1.0 - pinc);
    const IntervalForecast f{b.lower, b.upper, {test.begin(), test.end()}, PiConfig::from_pinc(pinc)};
    const double p = picp(f);
    ok = ok && std::abs(p - pinc) <= 0.05;
    detail += fmt(" %.3f", p);
  }
  return {ok, {}};
}

Outcome end_to_end(const ExperimentResult& run, double seconds) {
  std::string detail = "PSO-ELM PICP";
  bool coverage = true, widening = true;
  std::vector<double> widths;
  for (const auto& o : run.outcomes) {
    if (o.model != "PSO-ELM") continue;
    coverage = coverage && std::abs(o.evaluation.picp - o.pinc) <= 0.05;
    detail += fmt(" %.3f", o.evaluation.picp);
    widths.push_back(o.evaluation.mpil);
  }
  detail += "; MPIL";
  for (std::size_t i = 0; i < widths.size(); ++i) {
    detail += fmt(" %.1f", widths[i]);
    if (i > 0) widening = widening && widths[i] > widths[i - 1];
  }
  detail += "; ";
  const Outcome kalman = kalman_random_walk(detail);
  detail += fmt("; %.1f s", seconds);
  return {coverage && widening && kalman.pass && seconds < 60.0 && widths.size() == 3,
          detail + fmt(" [coverage %s, widening %s, kalman %s]", coverage ? "ok" : "miss",
                       widening ? "ok" : "miss", kalman.pass ? "ok" : "miss")};
}

// 7 ---------------------------------------------------------------------------

Outcome aace_arithmetic() {
  const double a = aace(0.87, 0.90), b = aace(0.95, 0.95);
  return {text::fixed(a, 3) == "0.030" && b == 0.0,
          fmt("aace(0.87, 0.90) = %s, aace(0.95, 0.95) = %s", text::fixed(a, 3).c_str(),
              text::exact(b).c_str())};
}

// 8 ---------------------------------------------------------------------------

Outcome determinism() {
  const auto dir = testing::scratch_dir("acceptance_determinism");
  for (const char* sub : {"a", "b"}) {
    const std::string cmd = std::string(PELM_CLI_PATH) + " run --seed 2014 --out " +
                            (dir / sub).string() + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0)
      return {false, std::string("run into ") + sub + " failed"};
  }
  int compared = 0, differ = 0;
  for (const auto& entry : std::filesystem::directory_iterator(dir / "a")) {
    const std::string name = entry.path().filename().string();
    if (name != "report.tsv" && name.rfind("bounds_", 0) != 0) continue;
    ++compared;
    differ += testing::slurp(entry.path()) != testing::slurp(dir / "b" / name);
  }
  return {compared == 10 && differ == 0,
          fmt("%d files compared (report + 9 bounds), %d differ", compared, differ)};
}

// 9 ---------------------------------------------------------------------------

Outcome normal_quantile_check() {
  const double ps[] = {0.90, 0.95, 0.975};
  const double expected[] = {1.2815516, 1.6448536, 1.9599640};
  double worst = 0.0, worst_ref = 0.0;
  std::string detail;
  for (int i = 0; i < 3; ++i) {
    const double q = normal_quantile(ps[i]);
    worst = std::max(worst, std::abs(q - expected[i]));
    worst_ref = std::max(worst_ref, std::abs(q - testing::quantile_by_bisection(ps[i])));
    detail += fmt("%s%.7f", i ? ", " : "", q);
  }
  return {worst <= 1e-6 && worst_ref <= 1e-6,
          detail + fmt(" (max gap %.1e to table, %.1e to bisection)", worst, worst_ref)};
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::string_view(argv[1]) == "--strict";

  // The shared end-to-end run backs criteria 4 and 6.
  const ExperimentConfig cfg;
  Stopwatch clock;
  const ExperimentResult run = run_experiment(cfg);
  const double run_seconds = clock.seconds();

  const std::vector<Criterion> criteria{
      {1, "pseudoinverse axioms", pinv_axioms},
      {2, "zero-error fit with K = N", zero_error_fit},
      {3, "metrics match scalar-loop oracle", metrics_oracle},
      {4, "report objective identity", [&] { return report_identity(run, cfg); }},
      {5, "swarm contracts", swarm_contracts},
      {6, "end-to-end behaviour", [&] { return end_to_end(run, run_seconds); }},
      {7, "coverage-error arithmetic", aace_arithmetic},
      {8, "run determinism", determinism},
      {9, "normal quantile", normal_quantile_check},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %d %s: %s -- %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu criteria, %d passed, %d failed\n", criteria.size(),
              static_cast<int>(criteria.size()) - failed, failed);
  return strict && failed ? 1 : 0;
}
