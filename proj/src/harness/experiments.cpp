// SPDX-License-Identifier: Apache-2.0
#include "ssou/harness/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"
#include "ssou/engine.hpp"
#include "ssou/learners.hpp"
#include "ssou/parallel.hpp"
#include "ssou/statistics.hpp"
#include "ssou/theory.hpp"

namespace ssou::harness {

namespace {

namespace fs = std::filesystem;
using engine::SsouParams;

const double kNaN = std::nan("");

std::uint64_t resolve_seed(RunContext& ctx) {
  const std::uint64_t seed = ctx.seed ? *ctx.seed : ctx.config.get_u64("seed", kDefaultSeed);
  ctx.config.set("seed", std::to_string(seed));
  ctx.config.get_u64("seed", seed);
  ctx.config.set("full_scale", ctx.full_scale ? "true" : "false");
  ctx.config.get_bool("full_scale", false);
  return seed;
}

std::size_t scaled(const RunContext& ctx, const std::string& key, std::size_t desk, std::size_t full) {
  const long long v = ctx.config.get_int(key, static_cast<long long>(ctx.full_scale ? full : desk));
  if (v < 1) throw InvalidParameter("config key '" + key + "' must be >= 1");
  return static_cast<std::size_t>(v);
}

/// Process parameters shared by every experiment; k and kappa/D may be
/// overwritten per cell.
SsouParams base_params(const Config& cfg, double dt, double total_time, int stride) {
  SsouParams p;
  p.kappa = cfg.get_double("kappa", 2.0);
  p.diffusion = cfg.get_double("diffusion", 0.5);
  p.trap_center = cfg.get_double("trap_center", 1.0);
  p.dt = cfg.get_double("dt", dt);
  p.total_time = cfg.get_double("total_time", total_time);
  p.stride = static_cast<int>(cfg.get_int("stride", stride));
  p.burn_in = cfg.get_double("burn_in", 5.0);
  return p;
}

learn::TrainConfig train_config(const Config& cfg, unsigned workers) {
  learn::TrainConfig tc;
  tc.learning_rate = cfg.get_double("learning_rate", 1e-3);
  tc.beta1 = cfg.get_double("beta1", 0.9);
  tc.beta2 = cfg.get_double("beta2", 0.999);
  tc.epsilon = cfg.get_double("adam_epsilon", 1e-8);
  tc.batch_size = static_cast<std::size_t>(cfg.get_int("batch_size", 32));
  tc.epochs = static_cast<int>(cfg.get_int("epochs", 40));
  tc.tau_h = cfg.get_double("tau_h", 2.0);
  tc.workers = workers;
  tc.validate();
  return tc;
}

/// Seed for a named piece of a cell; independent of every other cell or model.
std::uint64_t tagged_seed(std::uint64_t master, const std::string& tag) {
  return derive_seed(master, fnv1a(tag));
}

std::string point_tag(const SsouParams& p) {
  return "k=" + std::to_string(p.memory_k) + " kappa=" + format_double(p.kappa) +
         " D=" + format_double(p.diffusion) + " C0=" + format_double(p.trap_center) +
         " dt=" + format_double(p.dt) + " T=" + format_double(p.total_time) +
         " burn=" + format_double(p.burn_in);
}

ResultRow row_for(std::size_t cell, const SsouParams& p) {
  ResultRow r;
  r.cell = cell;
  r.k = p.memory_k;
  r.kappa = p.kappa;
  r.diffusion = p.diffusion;
  r.stride = p.stride;
  r.coord_name = "-";
  r.model = "-";
  return r;
}

ResultRow with(ResultRow r, std::string model, std::string metric, double value, double std_error,
               std::size_t n, std::string status = "ok") {
  r.model = std::move(model);
  r.metric = std::move(metric);
  r.value = value;
  r.std_error = std_error;
  r.n_effective = n;
  r.status = std::move(status);
  return r;
}

ResultRow at(ResultRow r, std::string coord_name, double coord) {
  r.coord_name = std::move(coord_name);
  r.coord = coord;
  return r;
}

/// Train `spec` and report its test error; failures become a status row.
ResultRow train_and_score(const ResultRow& base, const learn::ModelSpec& spec,
                          learn::TrainConfig tc, std::uint64_t seed, const engine::Dataset& train,
                          const engine::Dataset& test, learn::EvalReport* report_out = nullptr,
                          const engine::Dataset* validation = nullptr,
                          learn::EvalReport* validation_out = nullptr) {
  tc.seed = seed;
  try {
    const auto trained = learn::train(spec, tc, train);
    const auto report = learn::evaluate(trained.state, test, tc.tau_h);
    if (report_out) *report_out = report;
    if (validation && validation_out) *validation_out = learn::evaluate(trained.state, *validation, tc.tau_h);
    return with(base, spec.id(), "error", report.error, report.std_error, report.n_tokens);
  } catch (const TrainingFailure&) {
    return with(base, spec.id(), "error", kNaN, 0.0, 0, "training-failure");
  }
}

void write_manifest(const RunContext& ctx, const std::string& name, const Provenance& prov,
                    const std::vector<std::string>& outputs, std::size_t cells, bool complete) {
  nlohmann::ordered_json m;
  m["experiment"] = name;
  m["config_hash"] = hex64(prov.config_hash);
  m["seed"] = prov.seed;
  m["code_version"] = prov.code_version;
  m["workers"] = ctx.workers;
  m["full_scale"] = ctx.full_scale;
  m["cells"] = cells;
  m["complete"] = complete;
  m["outputs"] = outputs;
  m["schema"] = "results.schema.json";
  m["config"] = ctx.config.values();
  std::ofstream out(ctx.out_dir / "manifest.json", std::ios::trunc);
  out << m.dump(2) << '\n';
  if (!out) throw Error("cannot write manifest.json");
}

void reject_unused(const Config& cfg) {
  const auto unused = cfg.unused_keys();
  if (unused.empty()) return;
  std::string list;
  for (const auto& k : unused) list += (list.empty() ? "" : ", ") + k;
  throw InvalidParameter("unknown config keys: " + list);
}

using CellFn = std::function<std::vector<ResultRow>(std::size_t)>;

/// Runs cells in order, committing each one before the next starts.
ExperimentResult run_cells(RunContext& ctx, const std::string& name, std::uint64_t seed,
                           std::size_t n_cells, const CellFn& cell) {
  reject_unused(ctx.config);
  fs::create_directories(ctx.out_dir);
  ExperimentResult result;
  result.experiment = name;
  result.provenance = {ctx.config.hash(), seed, code_version()};
  result.csv_path = ctx.out_dir / (name + ".csv");

  ResultWriter writer(result.csv_path, result.provenance);
  std::size_t next = writer.open();
  std::size_t fresh = 0;
  while (next < n_cells) {
    if (ctx.cell_limit && fresh >= *ctx.cell_limit) break;
    const auto rows = cell(next);
    writer.commit(rows);
    ++next;
    ++fresh;
  }
  result.complete = next >= n_cells;
  if (result.complete) writer.finish();
  write_manifest(ctx, name, result.provenance, {result.csv_path.filename().string()}, n_cells,
                 result.complete);
  result.rows = read_results_csv(result.csv_path);
  return result;
}

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i)
    v[i] = n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
  auto v = linspace(std::log(lo), std::log(hi), n);
  for (double& x : v) x = std::exp(x);
  return v;
}

std::vector<learn::ModelSpec> parse_models(const std::vector<std::string>& ids, bool* with_threshold) {
  std::vector<learn::ModelSpec> specs;
  *with_threshold = false;
  for (const auto& id : ids) {
    if (id == "threshold") {
      *with_threshold = true;
    } else {
      specs.push_back(learn::ModelSpec::parse(id));
    }
  }
  return specs;
}

}  // namespace

const char* code_version() { return SSOU_CODE_VERSION; }

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = {"generate",         "phase-diagram", "error-vs-k",
                                                 "nonmarkov",        "autocorr-check", "subsample-compare",
                                                 "gru-select",       "theory-table"};
  return names;
}

ExperimentResult run_experiment(std::string_view name, RunContext& ctx) {
  if (name == "generate") return run_generate(ctx);
  if (name == "phase-diagram") return run_phase_diagram(ctx);
  if (name == "error-vs-k") return run_error_vs_k(ctx);
  if (name == "nonmarkov") return run_nonmarkovianity_scan(ctx);
  if (name == "autocorr-check") return run_autocorr_check(ctx);
  if (name == "subsample-compare") return run_subsample_compare(ctx);
  if (name == "gru-select") return run_gru_select(ctx);
  if (name == "theory-table") return run_theory_table(ctx);
  throw InvalidParameter("unknown experiment '" + std::string(name) + "'");
}

ExperimentResult run_phase_diagram(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const std::string preset = cfg.get_string("preset", "fast-trap");
  double tk_lo = 0.1, tk_hi = 1.5;
  if (preset == "slow-trap") {
    tk_lo = 1.0 / 0.6;
    tk_hi = 1.0 / 0.1;
  } else if (preset != "fast-trap") {
    throw InvalidParameter("unknown phase-diagram preset '" + preset + "'");
  }
  tk_lo = cfg.get_double("t_kappa_min", tk_lo);
  tk_hi = cfg.get_double("t_kappa_max", tk_hi);
  const double td_lo = cfg.get_double("t_diff_min", 0.01);
  const double td_hi = cfg.get_double("t_diff_max", 10.5);
  const std::size_t grid = scaled(ctx, "grid", 8, 20);
  const auto ks = cfg.get_ints("k_values", "1,5");
  const auto spec = learn::ModelSpec::parse(cfg.get_string("model", "AR(2)"));
  const std::size_t n_train = scaled(ctx, "n_train", 5000, 50000);
  const std::size_t n_test = scaled(ctx, "n_test", 2000, 10000);
  SsouParams base = base_params(cfg, 0.01, 30.0, 30);
  const auto tc = train_config(cfg, ctx.workers);
  const auto t_kappa = linspace(tk_lo, tk_hi, grid);
  const auto t_diff = logspace(td_lo, td_hi, grid);

  return run_cells(ctx, "phase-diagram", seed, ks.size() * grid * grid, [&](std::size_t cell) {
    const int k = ks[cell / (grid * grid)];
    const double tk = t_kappa[(cell / grid) % grid];
    const double td = t_diff[cell % grid];
    SsouParams p = base;
    p.memory_k = k;
    p.kappa = 1.0 / tk;
    p.diffusion = p.trap_center * p.trap_center / (2.0 * td);
    const std::string tag = point_tag(p);
    const auto train = engine::make_dataset(p, n_train, tagged_seed(seed, "train " + tag), ctx.workers);
    const auto test = engine::make_dataset(p, n_test, tagged_seed(seed, "test " + tag), ctx.workers);

    const double chi = td / tk;
    const ResultRow r = at(row_for(cell, p), "t_diff_over_t_kappa", chi);
    std::vector<ResultRow> rows;
    rows.push_back(train_and_score(r, spec, tc, tagged_seed(seed, "model " + spec.id() + " " + tag),
                                   train, test));
    std::vector<double> tokens;
    tokens.reserve(train.size() * p.token_count());
    for (const auto& x : train.inputs) tokens.insert(tokens.end(), x.begin(), x.end());
    rows.push_back(with(r, "-", "sarle", stats::sarle_coefficient(tokens), 0.0, tokens.size()));
    if (k == 1) {
      const double zeta = tk;
      try {
        const double chi_star = theory::phase_boundary(zeta);
        rows.push_back(with(r, "theory", "chi_star", chi_star, 0.0, 0));
        rows.push_back(with(r, "theory", "bimodal", chi > chi_star ? 1.0 : 0.0, 0.0, 0));
      } catch (const NumericError&) {
        // zeta >= 1: the density is unimodal for every chi.
        rows.push_back(with(r, "theory", "chi_star", kNaN, 0.0, 0, "no-boundary"));
        rows.push_back(with(r, "theory", "bimodal", 0.0, 0.0, 0));
      }
    }
    return rows;
  });
}

ExperimentResult run_error_vs_k(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const auto ks = cfg.get_ints("k_values", "1,2,3,5,8,12,20");
  bool with_threshold = false;
  const auto specs = parse_models(
      cfg.get_list("models",
                   "threshold,AR(1),AR(2),AR(4),AR(8),CNN(1,10),CNN(2,10),CNN(4,10),CNN(8,10),"
                   "GRU(1),GRU(2),GRU(4)"),
      &with_threshold);
  const std::size_t n_train = scaled(ctx, "n_train", 5000, 50000);
  const std::size_t n_test = scaled(ctx, "n_test", 2000, 10000);
  const SsouParams base = base_params(cfg, 0.01, 30.0, 30);
  const auto tc = train_config(cfg, ctx.workers);

  return run_cells(ctx, "error-vs-k", seed, ks.size(), [&](std::size_t cell) {
    SsouParams p = base;
    p.memory_k = ks[cell];
    const std::string tag = point_tag(p);
    const auto train = engine::make_dataset(p, n_train, tagged_seed(seed, "train " + tag), ctx.workers);
    const auto test = engine::make_dataset(p, n_test, tagged_seed(seed, "test " + tag), ctx.workers);
    const ResultRow r = row_for(cell, p);
    std::vector<ResultRow> rows;
    rows.push_back(with(r, "theory", "variance_x",
                        theory::variance_x(p.memory_k, p.kappa, p.diffusion, p.trap_center), 0.0, 0));
    rows.push_back(with(r, "theory", "cov_xc", p.trap_center * theory::cov_xc(p.memory_k, p.kappa), 0.0, 0));
    if (with_threshold) {
      const auto rep = learn::evaluate_baseline(test, tc.tau_h);
      rows.push_back(with(r, "threshold", "error", rep.error, rep.std_error, rep.n_tokens));
    }
    for (const auto& spec : specs)
      rows.push_back(train_and_score(r, spec, tc, tagged_seed(seed, "model " + spec.id() + " " + tag),
                                     train, test));
    return rows;
  });
}

ExperimentResult run_nonmarkovianity_scan(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const auto ks = cfg.get_ints("k_values", "1,3,5");
  const std::size_t n = scaled(ctx, "n_trajectories", 20000, 100000);
  SsouParams base = base_params(cfg, 0.005, 40.0, 1);
  const double scan_dt = cfg.get_double("scan_dt", 0.05);
  const auto w1 = cfg.get_doubles("omega1", "0.5,1.5");
  const auto w2 = cfg.get_doubles("omega2", "0.5,1.5");
  if (w1.size() != 2 || w2.size() != 2) throw InvalidParameter("omega1/omega2 need two bounds");
  const double t2 = cfg.get_double("t2", 10.0);
  const double t3 = t2 + cfg.get_double("t3_minus_t2", 0.5);
  const double t1_step = cfg.get_double("t1_step", 0.1);
  const double t1_min = cfg.get_double("t1_min", 0.0);
  std::vector<double> t1_grid;
  for (long i = 0;; ++i) {
    const double t1 = t1_min + static_cast<double>(i) * t1_step;
    if (t1 > t2 - 0.5 * t1_step) break;
    t1_grid.push_back(std::round(t1 / scan_dt) * scan_dt);
  }
  const double ratio = scan_dt / base.dt;
  const auto factor = static_cast<std::size_t>(std::llround(ratio));
  if (factor < 1 || std::abs(ratio - static_cast<double>(factor)) > 1e-9)
    throw InvalidParameter("scan_dt must be a multiple of dt");

  return run_cells(ctx, "nonmarkov", seed, ks.size(), [&](std::size_t cell) {
    SsouParams p = base;
    p.memory_k = ks[cell];
    const std::uint64_t data_seed = tagged_seed(seed, "trajectories " + point_tag(p));
    std::vector<engine::Trajectory> ensemble(n);
    parallel_for(n, ctx.workers, [&](std::size_t i) {
      ensemble[i] = engine::decimate(engine::simulate(p, engine::trajectory_seed(data_seed, i)), factor);
    });
    const auto scan = stats::nonmarkovianity_scan(ensemble, {w1[0], w1[1]}, {w2[0], w2[1]}, t2, t3, t1_grid);
    std::vector<ResultRow> rows;
    const ResultRow r = row_for(cell, p);
    for (const auto& point : scan) {
      const ResultRow rr = at(r, "t2_minus_t1", t2 - point.t1);
      if (point.estimate) {
        rows.push_back(with(rr, "-", "M", point.estimate->value, point.estimate->std_error, point.hits));
      } else {
        rows.push_back(with(rr, "-", "M", kNaN, 0.0, point.hits, "insufficient-statistics"));
      }
    }
    return rows;
  });
}

ExperimentResult run_autocorr_check(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const auto ks = cfg.get_ints("k_values", "1,2,5");
  const std::size_t n = scaled(ctx, "n_trajectories", 5000, 50000);
  const SsouParams base = base_params(cfg, 0.01, 10.0, 1);
  const double lag_max = cfg.get_double("lag_max", 5.0);
  const double lag_step = cfg.get_double("lag_step", 0.25);
  const auto segment = static_cast<std::size_t>(cfg.get_int("psd_segment", 500));
  const double psd_lo = cfg.get_double("psd_omega_min", 0.5);
  const double psd_hi = cfg.get_double("psd_omega_max", 20.0);
  std::vector<double> lags;
  for (long i = 0; static_cast<double>(i) * lag_step <= lag_max + 1e-9; ++i)
    lags.push_back(static_cast<double>(i) * lag_step);

  return run_cells(ctx, "autocorr-check", seed, ks.size(), [&](std::size_t cell) {
    SsouParams p = base;
    p.memory_k = ks[cell];
    const auto ensemble =
        engine::simulate_ensemble(p, n, tagged_seed(seed, "trajectories " + point_tag(p)), ctx.workers);
    std::vector<std::vector<double>> latent;
    latent.reserve(ensemble.size());
    for (const auto& t : ensemble) latent.push_back(stats::latent_as_real(t));

    const auto cx = stats::empirical_autocorr(ensemble, lags);
    const auto cc = stats::empirical_autocorr(latent, p.dt, lags);
    const ResultRow r = row_for(cell, p);
    std::vector<ResultRow> rows;
    for (std::size_t i = 0; i < lags.size(); ++i) {
      const ResultRow rl = at(r, "lag", lags[i]);
      rows.push_back(with(rl, "-", "C_X", cx[i].value, cx[i].std_error, cx[i].n_effective));
      rows.push_back(with(rl, "theory", "C_X",
                          theory::x_autocorr(p.memory_k, p.kappa, p.diffusion, lags[i], p.trap_center),
                          0.0, 0));
      rows.push_back(with(rl, "-", "C_C", cc[i].value, cc[i].std_error, cc[i].n_effective));
      rows.push_back(with(rl, "theory", "C_C", theory::latent_autocorr(p.memory_k, lags[i], p.trap_center),
                          0.0, 0));
    }
    const auto cross = stats::ensemble_cross_moment(ensemble);
    rows.push_back(with(r, "-", "cov_xc", cross.value, cross.std_error, cross.n_effective));
    rows.push_back(with(r, "theory", "cov_xc", p.trap_center * theory::cov_xc(p.memory_k, p.kappa), 0.0, 0));

    const auto spectrum = stats::empirical_psd(ensemble, segment);
    for (std::size_t j = 0; j < spectrum.omega.size(); ++j) {
      const double w = spectrum.omega[j];
      if (w < psd_lo || w > psd_hi) continue;
      const ResultRow rw = at(r, "omega", w);
      rows.push_back(with(rw, "-", "S_X", spectrum.power[j].value, spectrum.power[j].std_error,
                          spectrum.power[j].n_effective));
      rows.push_back(with(rw, "theory", "S_X",
                          theory::psd_x(p.memory_k, p.kappa, p.diffusion, w, p.trap_center), 0.0, 0));
    }
    return rows;
  });
}

ExperimentResult run_subsample_compare(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const auto ks = cfg.get_ints("k_values", "1,2,3,5,8,12,20");
  const auto strides = cfg.get_ints("strides", "1,30");
  bool with_threshold = false;
  const auto specs = parse_models(cfg.get_list("models", "AR(1),AR(8)"), &with_threshold);
  const std::size_t n_train = scaled(ctx, "n_train", 5000, 50000);
  const std::size_t n_test = scaled(ctx, "n_test", 2000, 10000);
  const SsouParams base = base_params(cfg, 0.01, 30.0, 1);
  const auto tc = train_config(cfg, ctx.workers);

  return run_cells(ctx, "subsample-compare", seed, ks.size(), [&](std::size_t cell) {
    std::vector<ResultRow> rows;
    for (int s : strides) {
      SsouParams p = base;
      p.memory_k = ks[cell];
      p.stride = s;
      // The tag omits the stride, so every variant subsamples the same trajectories.
      const std::string tag = point_tag(p);
      const auto train = engine::make_dataset(p, n_train, tagged_seed(seed, "train " + tag), ctx.workers);
      const auto test = engine::make_dataset(p, n_test, tagged_seed(seed, "test " + tag), ctx.workers);
      const ResultRow r = row_for(cell, p);
      if (with_threshold) {
        const auto rep = learn::evaluate_baseline(test, tc.tau_h);
        rows.push_back(with(r, "threshold", "error", rep.error, rep.std_error, rep.n_tokens));
      }
      for (const auto& spec : specs)
        rows.push_back(train_and_score(
            r, spec, tc, tagged_seed(seed, "model " + spec.id() + " s=" + std::to_string(s) + " " + tag),
            train, test));
    }
    return rows;
  });
}

ExperimentResult run_gru_select(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const auto ks = cfg.get_ints("k_values", "1,2,3,5,8,12,20");
  const auto spec = learn::ModelSpec::parse(cfg.get_string("model", "GRU(1)"));
  const auto reference_ids = cfg.get_list("reference_models", "GRU(2)");
  const std::size_t n_seeds = scaled(ctx, "n_seeds", 5, 5);
  const std::size_t n_train = scaled(ctx, "n_train", 5000, 50000);
  const std::size_t n_val = scaled(ctx, "n_validation", 2000, 10000);
  const std::size_t n_test = scaled(ctx, "n_test", 2000, 10000);
  const SsouParams base = base_params(cfg, 0.01, 30.0, 30);
  const auto tc = train_config(cfg, ctx.workers);
  std::vector<learn::ModelSpec> references;
  for (const auto& id : reference_ids) references.push_back(learn::ModelSpec::parse(id));

  return run_cells(ctx, "gru-select", seed, ks.size(), [&](std::size_t cell) {
    SsouParams p = base;
    p.memory_k = ks[cell];
    const std::string tag = point_tag(p);
    const auto train = engine::make_dataset(p, n_train, tagged_seed(seed, "train " + tag), ctx.workers);
    const auto val = engine::make_dataset(p, n_val, tagged_seed(seed, "validation " + tag), ctx.workers);
    const auto test = engine::make_dataset(p, n_test, tagged_seed(seed, "test " + tag), ctx.workers);
    const ResultRow r = row_for(cell, p);
    std::vector<ResultRow> rows;

    std::vector<double> val_err, test_err;
    std::vector<learn::EvalReport> val_rep(n_seeds), test_rep(n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s) {
      const ResultRow rs = at(r, "seed_index", static_cast<double>(s));
      const auto row = train_and_score(
          rs, spec, tc, tagged_seed(seed, "model " + spec.id() + " init=" + std::to_string(s) + " " + tag),
          train, test, &test_rep[s], &val, &val_rep[s]);
      if (row.status != "ok") {
        rows.push_back(with(row, spec.id(), "test_error", kNaN, 0.0, 0, row.status));
        continue;
      }
      rows.push_back(with(rs, spec.id(), "validation_error", val_rep[s].error, val_rep[s].std_error,
                          val_rep[s].n_tokens));
      rows.push_back(with(rs, spec.id(), "test_error", test_rep[s].error, test_rep[s].std_error,
                          test_rep[s].n_tokens));
      val_err.push_back(val_rep[s].error);
      test_err.push_back(test_rep[s].error);
    }
    if (!val_err.empty()) {
      const auto best = static_cast<std::size_t>(
          std::min_element(val_err.begin(), val_err.end()) - val_err.begin());
      std::vector<double> sorted = test_err;
      std::sort(sorted.begin(), sorted.end());
      rows.push_back(with(at(r, "seed_index", static_cast<double>(best)), spec.id(),
                          "selected_validation_error", val_err[best], 0.0, val_err.size()));
      rows.push_back(with(at(r, "seed_index", static_cast<double>(best)), spec.id(),
                          "selected_test_error", test_err[best], 0.0, test_err.size()));
      rows.push_back(with(r, spec.id(), "median_test_error", sorted[sorted.size() / 2], 0.0, sorted.size()));
    }
    for (const auto& ref : references) {
      auto row = train_and_score(r, ref, tc, tagged_seed(seed, "model " + ref.id() + " " + tag), train, test);
      row.metric = "test_error";
      rows.push_back(row);
    }
    return rows;
  });
}

ExperimentResult run_theory_table(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  const double zeta_min = cfg.get_double("zeta_min", 0.01);
  const double zeta_max = cfg.get_double("zeta_max", 0.99);
  const std::size_t zeta_n = static_cast<std::size_t>(cfg.get_int("zeta_points", 99));
  const int k_max = static_cast<int>(cfg.get_int("k_max", 20));
  const auto curve_ks = cfg.get_ints("curve_k_values", "1,2,5");
  const double kappa = cfg.get_double("kappa", 2.0);
  const double diffusion = cfg.get_double("diffusion", 0.5);
  const double lag_max = cfg.get_double("lag_max", 5.0);
  const double lag_step = cfg.get_double("lag_step", 0.05);
  const auto omegas = logspace(cfg.get_double("omega_min", 0.01), cfg.get_double("omega_max", 1000.0),
                               static_cast<std::size_t>(cfg.get_int("omega_points", 121)));
  const auto zetas = linspace(zeta_min, zeta_max, zeta_n);

  return run_cells(ctx, "theory-table", seed, 3, [&](std::size_t cell) {
    std::vector<ResultRow> rows;
    ResultRow r;
    r.cell = cell;
    r.coord_name = "-";
    r.model = "theory";
    if (cell == 0) {
      r.k = 1;
      for (double z : zetas) {
        ResultRow rz = at(r, "zeta", z);
        rz.kappa = 1.0 / z;
        try {
          rows.push_back(with(rz, "theory", "chi_star", theory::phase_boundary(z), 0.0, 0));
        } catch (const NumericError&) {
          rows.push_back(with(rz, "theory", "chi_star", kNaN, 0.0, 0, "no-boundary"));
        }
      }
    } else if (cell == 1) {
      for (int k = 1; k <= k_max; ++k) {
        ResultRow rk = r;
        rk.k = k;
        rk.kappa = kappa;
        rk.diffusion = diffusion;
        rows.push_back(with(rk, "theory", "variance_x", theory::variance_x(k, kappa, diffusion), 0.0, 0));
        rows.push_back(with(rk, "theory", "cov_xc", theory::cov_xc(k, kappa), 0.0, 0));
      }
    } else {
      for (int k : curve_ks) {
        ResultRow rk = r;
        rk.k = k;
        rk.kappa = kappa;
        rk.diffusion = diffusion;
        for (long i = 0; static_cast<double>(i) * lag_step <= lag_max + 1e-9; ++i) {
          const double t = static_cast<double>(i) * lag_step;
          rows.push_back(with(at(rk, "lag", t), "theory", "C_X", theory::x_autocorr(k, kappa, diffusion, t), 0.0, 0));
          rows.push_back(with(at(rk, "lag", t), "theory", "C_C", theory::latent_autocorr(k, t), 0.0, 0));
        }
        for (double w : omegas) {
          rows.push_back(with(at(rk, "omega", w), "theory", "S_X", theory::psd_x(k, kappa, diffusion, w), 0.0, 0));
          rows.push_back(with(at(rk, "omega", w), "theory", "S_C", theory::psd_c(k, w), 0.0, 0));
        }
      }
    }
    return rows;
  });
}

ExperimentResult run_generate(RunContext& ctx) {
  const std::uint64_t seed = resolve_seed(ctx);
  const Config& cfg = ctx.config;
  SsouParams p = base_params(cfg, 0.01, 30.0, 30);
  p.memory_k = static_cast<int>(cfg.get_int("k", 1));
  const std::size_t n = scaled(ctx, "n_sequences", 100, 50000);
  reject_unused(cfg);
  fs::create_directories(ctx.out_dir);

  const auto data = engine::make_dataset(p, n, tagged_seed(seed, "dataset " + point_tag(p)), ctx.workers);
  ExperimentResult result;
  result.experiment = "generate";
  result.provenance = {cfg.hash(), seed, code_version()};
  result.csv_path = ctx.out_dir / "dataset.csv";
  std::ofstream out(result.csv_path, std::ios::trunc);
  engine::write_dataset_csv(out, data);
  if (!out) throw Error("cannot write " + result.csv_path.string());
  write_manifest(ctx, "generate", result.provenance, {"dataset.csv"}, 1, true);
  return result;
}

}  // namespace ssou::harness
