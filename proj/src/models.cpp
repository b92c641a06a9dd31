// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ssou/learners.hpp"

namespace ssou::learn {

namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

std::size_t as_size(int v) { return static_cast<std::size_t>(v); }

struct GruLayout {
  std::size_t d;
  std::size_t wz, wr, wn, uz, ur, un, bz, br, bn, v, c;

  explicit GruLayout(std::size_t hidden) : d(hidden) {
    wz = 0;
    wr = d;
    wn = 2 * d;
    uz = 3 * d;
    ur = uz + d * d;
    un = ur + d * d;
    bz = un + d * d;
    br = bz + d;
    bn = br + d;
    v = bn + d;
    c = v + d;
  }
};

struct GruTrace {
  std::vector<double> h;  ///< (T + 1) x d, row 0 is the zero initial state
  std::vector<double> z, r, n;  ///< T x d
  std::vector<double> out;
};

GruTrace gru_run(const GruLayout& L, std::span<const double> p, std::span<const double> x) {
  const std::size_t d = L.d;
  const std::size_t T = x.size();
  GruTrace tr;
  tr.h.assign((T + 1) * d, 0.0);
  tr.z.resize(T * d);
  tr.r.resize(T * d);
  tr.n.resize(T * d);
  tr.out.resize(T);
  std::vector<double> rh(d);
  for (std::size_t t = 0; t < T; ++t) {
    const double* h = &tr.h[t * d];
    double* z = &tr.z[t * d];
    double* r = &tr.r[t * d];
    double* n = &tr.n[t * d];
    for (std::size_t i = 0; i < d; ++i) {
      double az = p[L.wz + i] * x[t] + p[L.bz + i];
      double ar = p[L.wr + i] * x[t] + p[L.br + i];
      for (std::size_t j = 0; j < d; ++j) {
        az += p[L.uz + i * d + j] * h[j];
        ar += p[L.ur + i * d + j] * h[j];
      }
      z[i] = sigmoid(az);
      r[i] = sigmoid(ar);
    }
    for (std::size_t j = 0; j < d; ++j) rh[j] = r[j] * h[j];
    double* h_next = &tr.h[(t + 1) * d];
    double a = p[L.c];
    for (std::size_t i = 0; i < d; ++i) {
      double an = p[L.wn + i] * x[t] + p[L.bn + i];
      for (std::size_t j = 0; j < d; ++j) an += p[L.un + i * d + j] * rh[j];
      n[i] = std::tanh(an);
      h_next[i] = z[i] * h[i] + (1.0 - z[i]) * n[i];
      a += p[L.v + i] * h_next[i];
    }
    tr.out[t] = sigmoid(a);
  }
  return tr;
}

void check_input(const ModelSpec& spec, std::span<const double> x) {
  const std::size_t need = spec.kind == ModelKind::GRU ? 1 : as_size(spec.window);
  if (x.size() < need) {
    std::ostringstream msg;
    msg << spec.id() << " needs at least " << need << " input tokens, got " << x.size();
    throw ShapeError(msg.str());
  }
}

int parse_int(std::string_view s) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw InvalidParameter("bad integer '" + std::string(s) + "' in model id");
  return v;
}

}  // namespace

ModelSpec ModelSpec::ar(int window) { return {ModelKind::AR, window, 1, 1}; }
ModelSpec ModelSpec::cnn(int window, int filters) { return {ModelKind::CNN, window, filters, 1}; }
ModelSpec ModelSpec::gru(int hidden) { return {ModelKind::GRU, 1, 1, hidden}; }

ModelSpec ModelSpec::parse(std::string_view text) {
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')')
    throw InvalidParameter("model id must look like AR(2), CNN(4,10) or GRU(2): '" +
                           std::string(text) + "'");
  const auto name = text.substr(0, open);
  const auto args = text.substr(open + 1, text.size() - open - 2);
  ModelSpec spec;
  if (name == "AR") {
    spec = ar(parse_int(args));
  } else if (name == "GRU") {
    spec = gru(parse_int(args));
  } else if (name == "CNN") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw InvalidParameter("CNN id needs (W,f)");
    spec = cnn(parse_int(args.substr(0, comma)), parse_int(args.substr(comma + 1)));
  } else {
    throw InvalidParameter("unknown model kind '" + std::string(name) + "'");
  }
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (window < 1) throw InvalidParameter("window must be >= 1");
  if (filters < 1) throw InvalidParameter("filters must be >= 1");
  if (hidden < 1) throw InvalidParameter("hidden size must be >= 1");
}

std::size_t ModelSpec::parameter_count() const {
  const auto W = as_size(window);
  const auto f = as_size(filters);
  const auto d = as_size(hidden);
  switch (kind) {
    case ModelKind::AR: return W + 1;
    case ModelKind::CNN: return f * W + f + f + 1;
    case ModelKind::GRU: return 3 * d * d + 7 * d + 1;
  }
  return 0;
}

std::size_t ModelSpec::tau0() const { return kind == ModelKind::GRU ? 1 : as_size(window) - 1; }

std::size_t ModelSpec::lead() const { return kind == ModelKind::GRU ? 0 : as_size(window) - 1; }

std::string ModelSpec::id() const {
  switch (kind) {
    case ModelKind::AR: return "AR(" + std::to_string(window) + ")";
    case ModelKind::CNN: return "CNN(" + std::to_string(window) + "," + std::to_string(filters) + ")";
    case ModelKind::GRU: return "GRU(" + std::to_string(hidden) + ")";
  }
  return {};
}

ModelState init_state(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ModelState s;
  s.spec = spec;
  s.params.assign(spec.parameter_count(), 0.0);
  s.m.assign(s.params.size(), 0.0);
  s.v.assign(s.params.size(), 0.0);

  RandomStream rng(seed);
  auto glorot = [&](std::size_t offset, std::size_t count, double fan_in, double fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (std::size_t i = 0; i < count; ++i)
      s.params[offset + i] = limit * (2.0 * rng.uniform_open() - 1.0);
  };
  const double W = spec.window;
  const double f = spec.filters;
  const double d = spec.hidden;
  switch (spec.kind) {
    case ModelKind::AR:
      glorot(0, as_size(spec.window), W, W);
      break;
    case ModelKind::CNN: {
      const std::size_t nk = as_size(spec.filters) * as_size(spec.window);
      glorot(0, nk, W, W * f);
      glorot(nk + as_size(spec.filters), as_size(spec.filters), f, 1.0);
      break;
    }
    case ModelKind::GRU: {
      const GruLayout L(as_size(spec.hidden));
      glorot(L.wz, 3 * L.d, 1.0, 3.0 * d);
      glorot(L.uz, 3 * L.d * L.d, d, 3.0 * d);
      glorot(L.v, L.d, d, 1.0);
      break;
    }
  }
  return s;
}

std::vector<double> forward(const ModelState& state, std::span<const double> x) {
  const ModelSpec& spec = state.spec;
  check_input(spec, x);
  const auto& p = state.params;
  switch (spec.kind) {
    case ModelKind::AR: {
      const std::size_t W = as_size(spec.window);
      std::vector<double> out(x.size() - W + 1);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t t = j + W - 1;
        double a = p[W];
        for (std::size_t tau = 0; tau < W; ++tau) a += p[tau] * x[t - tau];
        out[j] = sigmoid(a);
      }
      return out;
    }
    case ModelKind::CNN: {
      const std::size_t W = as_size(spec.window);
      const std::size_t F = as_size(spec.filters);
      const std::size_t b1 = F * W, u = b1 + F, b2 = u + F;
      std::vector<double> out(x.size() - W + 1);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t t = j + W - 1;
        double a2 = p[b2];
        for (std::size_t f = 0; f < F; ++f) {
          double a1 = p[b1 + f];
          for (std::size_t tau = 0; tau < W; ++tau) a1 += p[f * W + tau] * x[t - tau];
          a2 += p[u + f] * std::max(a1, 0.0);
        }
        out[j] = sigmoid(a2);
      }
      return out;
    }
    case ModelKind::GRU:
      return gru_run(GruLayout(as_size(spec.hidden)), p, x).out;
  }
  return {};
}

double loss(std::span<const double> yhat, std::span<const std::uint8_t> y, std::size_t tau0) {
  const std::size_t T = y.size();
  if (yhat.size() > T) throw ShapeError("more predictions than targets");
  const std::size_t lead = T - yhat.size();
  if (tau0 >= T) throw ShapeError("empty loss range: tau0 >= sequence length");
  if (tau0 < lead) throw ShapeError("tau0 precedes the first prediction");
  double sum = 0.0;
  for (std::size_t tau = tau0; tau < T; ++tau) {
    const double e = yhat[tau - lead] - y[tau];
    sum += e * e;
  }
  return sum / static_cast<double>(T - tau0);
}

double loss_and_gradient(const ModelState& state, std::span<const double> x,
                         std::span<const std::uint8_t> y, std::span<double> grad) {
  const ModelSpec& spec = state.spec;
  check_input(spec, x);
  if (x.size() != y.size()) throw ShapeError("input and target lengths differ");
  if (grad.size() != state.params.size()) throw ShapeError("gradient buffer has wrong size");
  std::fill(grad.begin(), grad.end(), 0.0);
  const auto& p = state.params;
  const std::size_t T = y.size();
  const std::size_t tau0 = spec.tau0();
  const std::size_t lead = spec.lead();
  if (tau0 >= T) throw ShapeError("empty loss range: tau0 >= sequence length");
  const double scale = 2.0 / static_cast<double>(T - tau0);

  const std::vector<double> out = spec.kind == ModelKind::GRU ? std::vector<double>{} : forward(state, x);
  double total = 0.0;

  switch (spec.kind) {
    case ModelKind::AR: {
      const std::size_t W = as_size(spec.window);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t t = j + lead;
        if (t < tau0) continue;
        const double e = out[j] - y[t];
        total += e * e;
        const double g = scale * e * out[j] * (1.0 - out[j]);
        for (std::size_t tau = 0; tau < W; ++tau) grad[tau] += g * x[t - tau];
        grad[W] += g;
      }
      break;
    }
    case ModelKind::CNN: {
      const std::size_t W = as_size(spec.window);
      const std::size_t F = as_size(spec.filters);
      const std::size_t b1 = F * W, u = b1 + F, b2 = u + F;
      std::vector<double> a1(F);
      for (std::size_t j = 0; j < out.size(); ++j) {
        const std::size_t t = j + lead;
        if (t < tau0) continue;
        const double e = out[j] - y[t];
        total += e * e;
        const double g = scale * e * out[j] * (1.0 - out[j]);
        grad[b2] += g;
        for (std::size_t f = 0; f < F; ++f) {
          double a = p[b1 + f];
          for (std::size_t tau = 0; tau < W; ++tau) a += p[f * W + tau] * x[t - tau];
          grad[u + f] += g * std::max(a, 0.0);
          if (a <= 0.0) continue;
          const double ga = g * p[u + f];
          grad[b1 + f] += ga;
          for (std::size_t tau = 0; tau < W; ++tau) grad[f * W + tau] += ga * x[t - tau];
        }
      }
      break;
    }
    case ModelKind::GRU: {
      const GruLayout L(as_size(spec.hidden));
      const std::size_t d = L.d;
      const GruTrace tr = gru_run(L, p, x);
      std::vector<double> dh(d, 0.0), dh_prev(d), da_z(d), da_r(d), da_n(d), drh(d), rh(d);
      for (std::size_t t = T; t-- > 0;) {
        const double* h_prev = &tr.h[t * d];
        const double* h = &tr.h[(t + 1) * d];
        const double* z = &tr.z[t * d];
        const double* r = &tr.r[t * d];
        const double* n = &tr.n[t * d];
        if (t >= tau0) {
          const double e = tr.out[t] - y[t];
          total += e * e;
          const double g = scale * e * tr.out[t] * (1.0 - tr.out[t]);
          grad[L.c] += g;
          for (std::size_t i = 0; i < d; ++i) {
            grad[L.v + i] += g * h[i];
            dh[i] += g * p[L.v + i];
          }
        }
        for (std::size_t i = 0; i < d; ++i) {
          const double dz = dh[i] * (h_prev[i] - n[i]);
          const double dn = dh[i] * (1.0 - z[i]);
          dh_prev[i] = dh[i] * z[i];
          da_z[i] = dz * z[i] * (1.0 - z[i]);
          da_n[i] = dn * (1.0 - n[i] * n[i]);
        }
        for (std::size_t j = 0; j < d; ++j) {
          rh[j] = r[j] * h_prev[j];
          drh[j] = 0.0;
        }
        for (std::size_t i = 0; i < d; ++i) {
          grad[L.wn + i] += da_n[i] * x[t];
          grad[L.bn + i] += da_n[i];
          for (std::size_t j = 0; j < d; ++j) {
            grad[L.un + i * d + j] += da_n[i] * rh[j];
            drh[j] += p[L.un + i * d + j] * da_n[i];
          }
        }
        for (std::size_t j = 0; j < d; ++j) {
          da_r[j] = drh[j] * h_prev[j] * r[j] * (1.0 - r[j]);
          dh_prev[j] += drh[j] * r[j];
        }
        for (std::size_t i = 0; i < d; ++i) {
          grad[L.wz + i] += da_z[i] * x[t];
          grad[L.bz + i] += da_z[i];
          grad[L.wr + i] += da_r[i] * x[t];
          grad[L.br + i] += da_r[i];
          for (std::size_t j = 0; j < d; ++j) {
            grad[L.uz + i * d + j] += da_z[i] * h_prev[j];
            grad[L.ur + i * d + j] += da_r[i] * h_prev[j];
            dh_prev[j] += p[L.uz + i * d + j] * da_z[i] + p[L.ur + i * d + j] * da_r[i];
          }
        }
        dh.swap(dh_prev);
      }
      break;
    }
  }
  return total / static_cast<double>(T - tau0);
}

std::vector<double> backward(const ModelState& state, std::span<const double> x,
                             std::span<const std::uint8_t> y) {
  std::vector<double> grad(state.params.size());
  loss_and_gradient(state, x, y, grad);
  return grad;
}

std::vector<int> threshold_baseline(std::span<const double> x) {
  std::vector<int> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return v >= 0.0 ? 1 : -1; });
  return out;
}

}  // namespace ssou::learn
