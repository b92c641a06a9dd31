// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssou/engine.hpp"

namespace ssou::learn {

enum class ModelKind { AR, CNN, GRU };

/**
 * @brief Architecture descriptor.
 *
 * Parameter layouts (flat, in this order):
 *  - AR(W):    w[0..W), b. Output j reads inputs j..j+W-1; w[tau-1] multiplies
 *              the input tau-1 steps before the target position.
 *  - CNN(W,f): K[f][W] (same tap order as AR), b1[f], u[f], b2.
 *  - GRU(d):   Wz, Wr, Wn (d each), Uz, Ur, Un (d x d row-major), bz, br, bn,
 *              v (d), c. 3d^2 + 7d + 1 values.
 */
struct ModelSpec {
  ModelKind kind = ModelKind::AR;
  int window = 1;
  int filters = 1;
  int hidden = 1;

  static ModelSpec ar(int window);
  static ModelSpec cnn(int window, int filters);
  static ModelSpec gru(int hidden);
  /// Inverse of id(): "AR(2)", "CNN(4,10)", "GRU(2)".
  static ModelSpec parse(std::string_view text);

  void validate() const;
  std::size_t parameter_count() const;
  /// First target position that enters the loss: W-1 for AR/CNN, 1 for GRU.
  std::size_t tau0() const;
  /// Targets that precede the first output (W-1 for AR/CNN, 0 for GRU).
  std::size_t lead() const;
  std::string id() const;
};

struct ModelState {
  ModelSpec spec;
  std::vector<double> params;
  std::vector<double> m;  ///< Adam first moment
  std::vector<double> v;  ///< Adam second moment
  std::uint64_t step = 0;
};

struct TrainConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t batch_size = 32;
  int epochs = 40;
  std::uint64_t seed = 0;
  double tau_h = 2.0;  ///< evaluation offset, time units
  unsigned workers = 1;

  void validate() const;
};

struct TrainResult {
  ModelState state;
  std::vector<double> loss_history;  ///< mean training loss per epoch
};

struct EvalReport {
  double error = 0.0;  ///< pooled misclassification rate
  double std_error = 0.0;  ///< spread of per-sequence error rates
  double sequence_error_min = 0.0;
  double sequence_error_median = 0.0;
  double sequence_error_max = 0.0;
  std::size_t n_sequences = 0;
  std::size_t n_tokens = 0;
};

/// Glorot-uniform weights, zero biases, zeroed optimizer state.
ModelState init_state(const ModelSpec& spec, std::uint64_t seed);

/// Predictions in (0, 1); length x.size() - spec.lead(). Throws ShapeError
/// when an AR/CNN input is shorter than its window.
std::vector<double> forward(const ModelState& state, std::span<const double> x);

/**
 * Mean squared error over target positions tau0..T-1, divided by T - tau0.
 * yhat is right-aligned with y, i.e. yhat[j] predicts y[j + T - yhat.size()].
 * Throws ShapeError for an empty range or a tau0 before the first prediction.
 */
double loss(std::span<const double> yhat, std::span<const std::uint8_t> y, std::size_t tau0);

/// Loss of one sequence and its exact gradient, written to `grad`.
double loss_and_gradient(const ModelState& state, std::span<const double> x,
                         std::span<const std::uint8_t> y, std::span<double> grad);
std::vector<double> backward(const ModelState& state, std::span<const double> x,
                             std::span<const std::uint8_t> y);

/// Bias-corrected Adam update; increments state.step.
void adam_step(ModelState& state, std::span<const double> gradient, const TrainConfig& config);

/**
 * @brief Mini-batch Adam over shuffled sequences.
 *
 * The batch gradient is the mean of per-sequence gradients, summed in
 * sequence order so the result does not depend on `workers`. Epoch e
 * shuffles with a stream derived from (seed, e). Throws TrainingFailure when
 * the loss stops being finite.
 */
TrainResult train(const ModelSpec& spec, const TrainConfig& config, const engine::Dataset& data);

/// sgn(x) with sgn(0) = +1.
std::vector<int> threshold_baseline(std::span<const double> x);

/// First token index included in the error: positions tau > ceil(tau_h / (s dt)).
std::size_t tau_h_index(double tau_h, int stride, double dt);

EvalReport evaluate(const ModelState& state, const engine::Dataset& test, double tau_h);
EvalReport evaluate_baseline(const engine::Dataset& test, double tau_h);

/// Binary checkpoint: "SSOUCKPT", u32 version, u32 kind, i32 W, f, d,
/// u64 step, u64 n, then n f64 each of params, m, v, all little-endian.
void write_checkpoint(std::ostream& out, const ModelState& state);
ModelState read_checkpoint(std::istream& in);

/// CSV with columns epoch,mean_loss.
void write_loss_history(std::ostream& out, std::span<const double> history);

}  // namespace ssou::learn
