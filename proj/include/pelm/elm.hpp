#pragma once

// Extreme learning machine for interval prediction: a random, frozen
// sigmoid hidden layer and a linear two-column head (lower, upper) whose
// weights are solved in one shot with the pseudoinverse of the hidden output
// matrix.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "pelm/error.hpp"
#include "pelm/interval_metrics.hpp"
#include "pelm/linalg.hpp"
#include "pelm/random.hpp"
#include "pelm/series_data.hpp"

namespace pelm {

enum class Activation { sigmoid };

struct ElmConfig {
  std::size_t input_dim = 14;
  std::size_t hidden_count = 20;
  std::size_t output_dim = 2;
  Activation activation = Activation::sigmoid;
  double init_low = -1.0;
  double init_high = 1.0;
  std::uint64_t seed = 0;
  double pinv_tol = 1e-12;
  /// Standardize features with train-set statistics.
  bool standardize = true;
  /// Also standardize the band targets. Off by default: beta then stays in
  /// target units, which is the scale the swarm speed limit is meant for.
  bool standardize_targets = false;

  void validate() const {
    require(input_dim >= 1, ErrorKind::config, "elm: input_dim must be >= 1");
    require(hidden_count >= 1, ErrorKind::config, "elm: hidden_count must be >= 1");
    require(output_dim >= 1, ErrorKind::config, "elm: output_dim must be >= 1");
    require(std::isfinite(init_low) && std::isfinite(init_high) && init_low < init_high,
            ErrorKind::config, "elm: empty weight init range");
    require(pinv_tol >= 0.0, ErrorKind::config, "elm: negative pinv tolerance");
  }
};

struct HiddenLayer {
  Eigen::MatrixXd weights;  // K x n, row j is a_j
  Eigen::VectorXd biases;   // K
};

struct OutputWeights {
  Eigen::MatrixXd beta;  // K x m
};

/// Affine input/output standardization fitted on the training set.
struct Scaler {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_scale;
  double target_mean = 0.0;
  double target_scale = 1.0;

  static Scaler identity(std::size_t n) {
    Scaler s;
    s.feature_mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    s.feature_scale = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    return s;
  }

  static Scaler fit(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets,
                    bool with_targets) {
    auto spread = [](double var) { return var > 0.0 ? std::sqrt(var) : 1.0; };
    Scaler s;
    const double rows = static_cast<double>(features.rows());
    s.feature_mean = features.colwise().mean().transpose();
    s.feature_scale.resize(features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
      const double var = (features.col(j).array() - s.feature_mean(j)).square().sum() / rows;
      s.feature_scale(j) = spread(var);
    }
    if (with_targets) {
      s.target_mean = targets.mean();
      s.target_scale = spread((targets.array() - s.target_mean).square().mean());
    }
    return s;
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& features) const {
    return (features.rowwise() - feature_mean.transpose()).array().rowwise() /
           feature_scale.transpose().array();
  }
  double scale_target(double t) const { return (t - target_mean) / target_scale; }
  double unscale_target(double z) const { return z * target_scale + target_mean; }
};

struct ElmModel {
  ElmConfig config;
  Scaler scaler;
  HiddenLayer hidden;
  OutputWeights output;
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

inline HiddenLayer init_hidden(const ElmConfig& config) {
  config.validate();
  const auto k = static_cast<Eigen::Index>(config.hidden_count);
  const auto n = static_cast<Eigen::Index>(config.input_dim);
  Rng rng(config.seed);
  HiddenLayer h;
  h.weights.resize(k, n);
  h.biases.resize(k);
  for (Eigen::Index j = 0; j < k; ++j)
    for (Eigen::Index i = 0; i < n; ++i) h.weights(j, i) = rng.uniform(config.init_low, config.init_high);
  for (Eigen::Index j = 0; j < k; ++j) h.biases(j) = rng.uniform(config.init_low, config.init_high);
  return h;
}

/// H(i, j) = sigmoid(a_j . x_i + b_j).
inline Eigen::MatrixXd hidden_matrix(const HiddenLayer& hidden, const Eigen::MatrixXd& features) {
  require(features.cols() == hidden.weights.cols(), ErrorKind::numeric,
          "hidden_matrix: feature width " + std::to_string(features.cols()) + " != " +
              std::to_string(hidden.weights.cols()));
  Eigen::MatrixXd z = features * hidden.weights.transpose();
  z.rowwise() += hidden.biases.transpose();
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

/// Hidden output matrix for raw (unscaled) features.
inline Eigen::MatrixXd design_matrix(const ElmModel& model, const Eigen::MatrixXd& features) {
  return hidden_matrix(model.hidden, model.scaler.apply(features));
}

/// Band targets [lower, upper] in the model's scaled target space.
inline Eigen::MatrixXd scaled_band_targets(const Scaler& s, const SupervisedSet& set) {
  Eigen::MatrixXd t(static_cast<Eigen::Index>(set.size()), 2);
  for (Eigen::Index i = 0; i < t.rows(); ++i) {
    t(i, 0) = s.scale_target(set.band_lower(i));
    t(i, 1) = s.scale_target(set.band_upper(i));
  }
  return t;
}

inline ElmModel train(const SupervisedSet& train_set, const ElmConfig& config) {
  config.validate();
  require(config.output_dim == 2, ErrorKind::config,
          "elm: interval training needs output_dim = 2");
  require(train_set.size() >= 1, ErrorKind::data, "elm: empty training set");
  require(train_set.width() == config.input_dim, ErrorKind::numeric,
          "elm: feature width " + std::to_string(train_set.width()) + " != input_dim " +
              std::to_string(config.input_dim));

  ElmModel model;
  model.config = config;
  model.scaler = config.standardize
                     ? Scaler::fit(train_set.features, train_set.targets, config.standardize_targets)
                     : Scaler::identity(config.input_dim);
  model.hidden = init_hidden(config);

  const Eigen::MatrixXd h = design_matrix(model, train_set.features);
  require(h.allFinite(), ErrorKind::numeric, "elm: non-finite hidden output matrix");
  model.output.beta = pinv(h, config.pinv_tol) * scaled_band_targets(model.scaler, train_set);
  return model;
}

/// Head outputs in target units, columns in training order, no reordering.
inline Eigen::MatrixXd predict_raw(const ElmModel& model, const Eigen::MatrixXd& features) {
  require(model.output.beta.rows() == model.hidden.weights.rows(), ErrorKind::numeric,
          "predict: beta rows do not match hidden count");
  Eigen::MatrixXd out = design_matrix(model, features) * model.output.beta;
  return out.unaryExpr([&](double z) { return model.scaler.unscale_target(z); });
}

/// Turns two-column head outputs into ordered bounds (min, max) per row.
inline IntervalBounds to_bounds(const Eigen::MatrixXd& raw) {
  require(raw.cols() == 2, ErrorKind::numeric, "predict: interval head needs 2 outputs");
  IntervalBounds b;
  b.lower.resize(static_cast<std::size_t>(raw.rows()));
  b.upper.resize(b.lower.size());
  for (Eigen::Index i = 0; i < raw.rows(); ++i) {
    b.lower[static_cast<std::size_t>(i)] = std::min(raw(i, 0), raw(i, 1));
    b.upper[static_cast<std::size_t>(i)] = std::max(raw(i, 0), raw(i, 1));
  }
  return b;
}

inline IntervalBounds predict(const ElmModel& model, const Eigen::MatrixXd& features) {
  return to_bounds(predict_raw(model, features));
}

/// Row-major flattening: element (j, c) lands at j * m + c.
inline std::vector<double> flatten(const Eigen::MatrixXd& beta) {
  std::vector<double> out(static_cast<std::size_t>(beta.size()));
  for (Eigen::Index j = 0; j < beta.rows(); ++j)
    for (Eigen::Index c = 0; c < beta.cols(); ++c)
      out[static_cast<std::size_t>(j * beta.cols() + c)] = beta(j, c);
  return out;
}

inline Eigen::MatrixXd unflatten(std::span<const double> flat, std::size_t rows, std::size_t cols) {
  require(flat.size() == rows * cols, ErrorKind::numeric,
          "unflatten: length " + std::to_string(flat.size()) + " != " +
              std::to_string(rows) + "x" + std::to_string(cols));
  Eigen::MatrixXd beta(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t j = 0; j < rows; ++j)
    for (std::size_t c = 0; c < cols; ++c)
      beta(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = flat[j * cols + c];
  return beta;
}

// ---------------------------------------------------------------------------
// JSON. Matrices are {"rows", "cols", "data"} with data in row-major order.
// Doubles are written as shortest round-trip decimals, so load(save(m)) is
// bit-exact.

namespace detail {

inline nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", flatten(m)}};
}

inline Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  const auto rows = j.at("rows").get<std::size_t>();
  const auto cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  return unflatten(data, rows, cols);
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

inline Eigen::VectorXd from_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace detail

inline nlohmann::json to_json(const ElmModel& m) {
  using detail::matrix_json;
  using detail::to_vector;
  nlohmann::json j;
  j["config"] = {{"input_dim", m.config.input_dim},
                 {"hidden_count", m.config.hidden_count},
                 {"output_dim", m.config.output_dim},
                 {"activation", "sigmoid"},
                 {"init_low", m.config.init_low},
                 {"init_high", m.config.init_high},
                 {"seed", m.config.seed},
                 {"pinv_tol", m.config.pinv_tol},
                 {"standardize", m.config.standardize},
                 {"standardize_targets", m.config.standardize_targets}};
  j["scaler"] = {{"feature_mean", to_vector(m.scaler.feature_mean)},
                 {"feature_scale", to_vector(m.scaler.feature_scale)},
                 {"target_mean", m.scaler.target_mean},
                 {"target_scale", m.scaler.target_scale}};
  j["hidden_weights"] = matrix_json(m.hidden.weights);
  j["hidden_biases"] = to_vector(m.hidden.biases);
  j["beta"] = matrix_json(m.output.beta);
  return j;
}

inline ElmModel model_from_json(const nlohmann::json& j) {
  try {
    ElmModel m;
    const auto& c = j.at("config");
    m.config.input_dim = c.at("input_dim").get<std::size_t>();
    m.config.hidden_count = c.at("hidden_count").get<std::size_t>();
    m.config.output_dim = c.at("output_dim").get<std::size_t>();
    if (c.at("activation").get<std::string>() != "sigmoid")
      fail(ErrorKind::config, "unsupported activation");
    m.config.init_low = c.at("init_low").get<double>();
    m.config.init_high = c.at("init_high").get<double>();
    m.config.seed = c.at("seed").get<std::uint64_t>();
    m.config.pinv_tol = c.at("pinv_tol").get<double>();
    m.config.standardize = c.at("standardize").get<bool>();
    m.config.standardize_targets = c.value("standardize_targets", false);
    const auto& s = j.at("scaler");
    m.scaler.feature_mean = detail::from_vector(s.at("feature_mean").get<std::vector<double>>());
    m.scaler.feature_scale = detail::from_vector(s.at("feature_scale").get<std::vector<double>>());
    m.scaler.target_mean = s.at("target_mean").get<double>();
    m.scaler.target_scale = s.at("target_scale").get<double>();
    m.hidden.weights = detail::matrix_from_json(j.at("hidden_weights"));
    m.hidden.biases = detail::from_vector(j.at("hidden_biases").get<std::vector<double>>());
    m.output.beta = detail::matrix_from_json(j.at("beta"));

    const auto k = static_cast<Eigen::Index>(m.config.hidden_count);
    const auto n = static_cast<Eigen::Index>(m.config.input_dim);
    require(m.hidden.weights.rows() == k && m.hidden.weights.cols() == n &&
                m.hidden.biases.size() == k && m.output.beta.rows() == k &&
                m.output.beta.cols() == static_cast<Eigen::Index>(m.config.output_dim) &&
                m.scaler.feature_mean.size() == n && m.scaler.feature_scale.size() == n,
            ErrorKind::config, "model json: inconsistent dimensions");
    return m;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::config, std::string("model json: ") + e.what());
  }
}

}  // namespace pelm
