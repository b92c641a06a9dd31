// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ssou/learners.hpp"
#include "ssou/parallel.hpp"

namespace ssou::learn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidParameter("learning_rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
    throw InvalidParameter("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0.0)) throw InvalidParameter("epsilon must be > 0");
  if (batch_size < 1) throw InvalidParameter("batch_size must be >= 1");
  if (epochs < 1) throw InvalidParameter("epochs must be >= 1");
  if (!(tau_h >= 0.0)) throw InvalidParameter("tau_h must be >= 0");
}

void adam_step(ModelState& state, std::span<const double> gradient, const TrainConfig& config) {
  if (gradient.size() != state.params.size()) throw ShapeError("gradient size mismatch");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t i = 0; i < gradient.size(); ++i) {
    const double g = gradient[i];
    state.m[i] = config.beta1 * state.m[i] + (1.0 - config.beta1) * g;
    state.v[i] = config.beta2 * state.v[i] + (1.0 - config.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    state.params[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.epsilon);
  }
}

TrainResult train(const ModelSpec& spec, const TrainConfig& config, const engine::Dataset& data) {
  config.validate();
  if (data.size() == 0) throw InvalidParameter("cannot train on an empty dataset");
  TrainResult result;
  result.state = init_state(spec, derive_seed(config.seed, 0x1417ULL));
  ModelState& state = result.state;
  const std::size_t n_params = state.params.size();

  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<double>> grads(config.batch_size, std::vector<double>(n_params));
  std::vector<double> losses(config.batch_size);
  std::vector<double> batch_grad(n_params);

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::mt19937_64 shuffle_rng(derive_seed(config.seed, 1, static_cast<std::uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t count = std::min(config.batch_size, order.size() - start);
      parallel_for(count, config.workers, [&](std::size_t b) {
        const std::size_t i = order[start + b];
        losses[b] = loss_and_gradient(state, data.inputs[i], data.targets[i], grads[b]);
      });
      std::fill(batch_grad.begin(), batch_grad.end(), 0.0);
      for (std::size_t b = 0; b < count; ++b) {
        epoch_loss += losses[b];
        for (std::size_t k = 0; k < n_params; ++k) batch_grad[k] += grads[b][k];
      }
      const double inv = 1.0 / static_cast<double>(count);
      for (double& g : batch_grad) g *= inv;
      if (!std::all_of(batch_grad.begin(), batch_grad.end(), [](double g) { return std::isfinite(g); }))
        throw TrainingFailure(epoch, "non-finite gradient");
      adam_step(state, batch_grad, config);
    }
    epoch_loss /= static_cast<double>(order.size());
    if (!std::isfinite(epoch_loss)) throw TrainingFailure(epoch, "non-finite loss");
    result.loss_history.push_back(epoch_loss);
  }
  return result;
}

std::size_t tau_h_index(double tau_h, int stride, double dt) {
  if (!(tau_h >= 0.0) || stride < 1 || !(dt > 0.0))
    throw InvalidParameter("tau_h >= 0, stride >= 1 and dt > 0 required");
  const double tokens = tau_h / (stride * dt);
  return static_cast<std::size_t>(std::ceil(tokens - 1e-9));
}

namespace {

// Mismatches over positions tau > tau_h_idx that also satisfy tau >= first.
template <class Predict>
EvalReport tally(const engine::Dataset& test, double tau_h, std::size_t first, Predict&& predict) {
  if (test.size() == 0) throw InvalidParameter("empty test set");
  const std::size_t skip = tau_h_index(tau_h, test.params.stride, test.params.dt);
  const std::size_t begin = std::max(first, skip + 1);
  EvalReport report;
  std::vector<double> per_sequence;
  per_sequence.reserve(test.size());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& y = test.targets[i];
    if (begin >= y.size()) continue;
    const std::vector<int> c_hat = predict(test.inputs[i]);
    const std::size_t lead = y.size() - c_hat.size();
    std::size_t seq_wrong = 0;
    for (std::size_t tau = begin; tau < y.size(); ++tau) {
      const int c = y[tau] ? 1 : -1;
      seq_wrong += c_hat[tau - lead] != c;
    }
    const std::size_t seq_tokens = y.size() - begin;
    wrong += seq_wrong;
    report.n_tokens += seq_tokens;
    per_sequence.push_back(static_cast<double>(seq_wrong) / static_cast<double>(seq_tokens));
  }
  if (report.n_tokens == 0) throw InvalidParameter("tau_h excludes every token");
  report.n_sequences = per_sequence.size();
  report.error = static_cast<double>(wrong) / static_cast<double>(report.n_tokens);
  const double n = static_cast<double>(per_sequence.size());
  const double mean = std::accumulate(per_sequence.begin(), per_sequence.end(), 0.0) / n;
  double ss = 0.0;
  for (double e : per_sequence) ss += (e - mean) * (e - mean);
  report.std_error = per_sequence.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  std::sort(per_sequence.begin(), per_sequence.end());
  report.sequence_error_min = per_sequence.front();
  report.sequence_error_max = per_sequence.back();
  report.sequence_error_median = per_sequence[per_sequence.size() / 2];
  return report;
}

}  // namespace

EvalReport evaluate(const ModelState& state, const engine::Dataset& test, double tau_h) {
  return tally(test, tau_h, state.spec.tau0(), [&](const std::vector<double>& x) {
    const auto yhat = forward(state, x);
    std::vector<int> c(yhat.size());
    std::transform(yhat.begin(), yhat.end(), c.begin(), [](double p) { return p >= 0.5 ? 1 : -1; });
    return c;
  });
}

EvalReport evaluate_baseline(const engine::Dataset& test, double tau_h) {
  return tally(test, tau_h, 0, [](const std::vector<double>& x) { return threshold_baseline(x); });
}

}  // namespace ssou::learn
