#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "logcorr/errors.hpp"
#include "logcorr/extremes.hpp"
#include "logcorr/functionals.hpp"
#include "logcorr/kernel.hpp"
#include "logcorr/martingale.hpp"
#include "logcorr/paths.hpp"
#include "logcorr/renewal.hpp"
#include "logcorr/sampler.hpp"
#include "logcorr/stats.hpp"

namespace logcorr::cli {

namespace {

std::string fixed(double v, int digits = 6) {
  if (!std::isfinite(v)) return format_double(v);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v + 0.0);
  return buf;
}

std::size_t count_of(const Config& c, const std::string& key, std::int64_t fallback) {
  const auto v = c.get_int(key, fallback);
  if (v < 1) throw ValidationError(key + " must be at least 1");
  return static_cast<std::size_t>(v);
}

KernelSpec make_kernel(const Config& c) {
  const auto d = c.get_int("kernel.d", 1);
  if (d != 1 && d != 2) throw ValidationError("kernel.d must be 1 or 2");
  const std::string profile = c.get_string("kernel.profile", "bump-autocorr");
  KernelSpec k = KernelSpec::bump_autocorr(static_cast<int>(d));
  if (profile != "bump-autocorr") {
    if (!std::filesystem::exists(profile)) throw ValidationError("kernel profile table not found: " + profile);
    k = KernelSpec::from_table_file(static_cast<int>(d), profile);
  }
  if (c.has("kernel.quadrature_tol")) k.set_quadrature_tolerance(c.get_double("kernel.quadrature_tol", 0.0));
  return k;
}

GridSpec make_grid(const Config& c, int d, std::int64_t default_n = 64) {
  GridSpec g;
  g.d = d;
  g.n = static_cast<int>(c.get_int("grid.n", default_n));
  g.R = c.get_double("grid.R", 1.0);
  g.embedding_factor = static_cast<int>(c.get_int("grid.embedding", 2));
  g.validate();
  return g;
}

FieldSampler make_sampler(const Context& ctx, std::int64_t default_n = 64) {
  const auto kernel = make_kernel(ctx.config);
  return FieldSampler(kernel, make_grid(ctx.config, kernel.dimension(), default_n),
                      ctx.config.get_double("schedule.delta", 0.05));
}

Box make_region(const Config& c, const GridSpec& g) {
  const double edge = std::min(1.0, g.R);
  const auto lo = c.get_list("region.lo", {0.0, 0.0});
  const auto hi = c.get_list("region.hi", {edge, edge});
  if (lo.size() < static_cast<std::size_t>(g.d) || hi.size() < static_cast<std::size_t>(g.d)) {
    throw ValidationError("region.lo and region.hi need one coordinate per dimension");
  }
  Box b;
  for (int i = 0; i < g.d; ++i) {
    b.lo[i] = lo[i];
    b.hi[i] = hi[i];
  }
  return b;
}

// Sites stop being resolved once e^t times the spacing reaches 1.
void note_regime(const Context& ctx, const FieldSampler& s, double t_final) {
  if (s.grid().size() > 1 && std::exp(t_final) * s.grid().spacing() >= 1.0) {
    ctx.warn("t=" + format_double(t_final) + " is past the grid crossover t=" + fixed(s.crossover(), 3) +
             "; site increments are independent from there on");
  }
}

Functional make_functional_from(const Context& ctx, const KernelSpec& kernel, double b, int n) {
  auto params = ctx.config.section("functional");
  const std::string name = params.count("name") ? params["name"] : "constant";
  params.erase("name");
  std::map<std::string, double> numeric;
  for (const auto& [k, v] : params) numeric[k] = parse_double("functional." + k, v);
  if (name == "flb") {
    numeric.emplace("b", b);
    numeric.emplace("n", static_cast<double>(n));
    numeric.emplace("seed", static_cast<double>(ctx.seed));
  }
  return make_functional(name, numeric, kernel);
}

Table estimator_table(std::vector<std::string> params) {
  Table t;
  t.columns.push_back("estimator");
  for (auto& p : params) t.columns.push_back(std::move(p));
  for (const char* c : {"estimate", "stderr", "n"}) t.columns.emplace_back(c);
  return t;
}

int cmd_sample(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  const double t = ctx.config.get_double("schedule.t_final", 1.0);
  const auto replicas = count_of(ctx.config, "run.replicas", 1);
  sampler.prepare(t);
  note_regime(ctx, sampler, t);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < replicas; ++r) {
    const auto state = sampler.sample_field(t, ctx.seed, r);
    Table table;
    table.meta = {{"t", t}, {"d", std::int64_t{g.d}}, {"R", g.R}, {"n", std::int64_t{g.n}}, {"seed", ctx.seed}};
    if (replicas > 1) table.meta.emplace_back("replica", std::uint64_t{r});
    for (int i = 0; i < g.d; ++i) table.columns.push_back("index_" + std::to_string(i));
    table.columns.emplace_back("y_value");
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto idx = g.indices(i);
      std::vector<Cell> row;
      for (int k = 0; k < g.d; ++k) row.emplace_back(std::int64_t{idx[k]});
      row.emplace_back(state.values[i]);
      table.add(std::move(row));
      top = std::max(top, state.values[i]);
    }
    ctx.emit(replicas > 1 ? "field_" + std::to_string(r) : "field", table);
  }
  ctx.summary("sample: " + std::to_string(replicas) + " field(s), " + std::to_string(g.size()) +
              " sites, t=" + format_double(t) + ", max=" + fixed(top) + ", a_t=" + fixed(centering(t, g.d)));
  return 0;
}

int cmd_martingale(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  const double critical = std::sqrt(2.0 * g.d);
  MeasureRequest req;
  req.gammas = ctx.config.get_list("martingale.gamma", {0.0, 1.0, critical});
  req.checkpoints = ctx.config.get_list("martingale.t", {1.0, 2.0, 4.0});
  req.region = make_region(ctx.config, g);
  req.validate(g);
  const auto replicas = count_of(ctx.config, "run.replicas", 1000);
  note_regime(ctx, sampler, req.checkpoints.back());
  const auto series = martingale_trajectory(sampler, req, replicas, ctx.seed, ctx.workers);

  Table table;
  table.columns = {"replica", "t", "gamma", "measure_kind", "value"};
  for (std::size_t r = 0; r < replicas; ++r) {
    for (std::size_t c = 0; c < req.checkpoints.size(); ++c) {
      for (std::size_t k = 0; k < req.gammas.size(); ++k) {
        table.add({std::uint64_t{r}, req.checkpoints[c], req.gammas[k], std::string("additive"),
                   series.additive_at(r, c, k)});
      }
      table.add({std::uint64_t{r}, req.checkpoints[c], critical, std::string("derivative"), series.derivative_at(r, c)});
    }
  }
  ctx.emit("martingale", table);

  const std::size_t last = req.checkpoints.size() - 1;
  std::string line = "martingale: t=" + format_double(req.checkpoints[last]);
  for (std::size_t k = 0; k < req.gammas.size(); ++k) {
    double s = 0.0;
    for (std::size_t r = 0; r < replicas; ++r) s += series.additive_at(r, last, k);
    line += " mean[M^" + format_double(req.gammas[k]) + "]=" + fixed(s / replicas, 4);
  }
  double s = 0.0;
  for (std::size_t r = 0; r < replicas; ++r) s += series.derivative_at(r, last);
  ctx.summary(line + " mean[M']=" + fixed(s / replicas, 4) + " lambda(A)=" + fixed(req.region.volume(g.d), 4));
  return 0;
}

int cmd_max_law(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  const auto checkpoints = ctx.config.get_list("max_law.t", {4.0});
  const auto replicas = count_of(ctx.config, "run.replicas", 1000);
  const auto bins = count_of(ctx.config, "max_law.bins", 40);
  const auto region = make_region(ctx.config, g);
  note_regime(ctx, sampler, *std::max_element(checkpoints.begin(), checkpoints.end()));
  const auto records = record_maxima(sampler, region, checkpoints, replicas, ctx.seed, ctx.workers);

  Table maxima;
  maxima.columns = {"replica", "t", "max", "centered", "running_max", "late_max", "terminal"};
  for (int i = 0; i < g.d; ++i) maxima.columns.push_back("site_" + std::to_string(i));
  for (const auto& r : records) {
    std::vector<Cell> row{r.replica, r.t, r.max, r.max - centering(r.t, g.d), r.running_max, r.late_max, r.terminal};
    for (int i = 0; i < g.d; ++i) row.emplace_back(r.site[i]);
    maxima.add(std::move(row));
  }
  ctx.emit("maxima", maxima);

  Table quantiles, histogram;
  quantiles.columns = {"t", "p", "value"};
  histogram.columns = {"t", "bin_lo", "bin_hi", "count"};
  std::string line = "max-law:";
  const std::vector<double> ps{0.05, 0.25, 0.5, 0.75, 0.95};
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    std::vector<double> centered;
    for (std::size_t r = 0; r < replicas; ++r) {
      const auto& rec = records[r * checkpoints.size() + c];
      centered.push_back(rec.max - centering(rec.t, g.d));
    }
    const auto stats = max_statistics(centered, bins);
    for (std::size_t i = 0; i < ps.size(); ++i) quantiles.add({checkpoints[c], ps[i], stats.quantiles[i]});
    for (std::size_t i = 0; i < stats.counts.size(); ++i) {
      histogram.add({checkpoints[c], stats.edges[i], stats.edges[i + 1], std::uint64_t{stats.counts[i]}});
    }
    line += " median(M_t-a_t)[t=" + format_double(checkpoints[c]) + "]=" + fixed(stats.median(), 4);
  }
  ctx.emit("quantiles", quantiles);
  ctx.emit("histogram", histogram);
  ctx.summary(line);
  return 0;
}

int cmd_tail(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  const double t = ctx.config.get_double("tail.t", 16.0);
  const auto rhos = ctx.config.get_list("tail.rho", {2.0, 2.5, 3.0});
  const auto replicas = count_of(ctx.config, "run.replicas", 10000);
  const std::string method = ctx.config.get_string("tail.estimator", "conditional");
  note_regime(ctx, sampler, t);

  TailEstimate est;
  if (method == "conditional") {
    est = tail_ratio_conditional(sampler, t, rhos, replicas, ctx.seed, ctx.workers);
  } else if (method == "binomial") {
    Box all;
    all.lo = {0.0, 0.0};
    all.hi = {g.R, g.R};
    const std::vector<double> at{t};
    const auto records = record_maxima(sampler, all, at, replicas, ctx.seed, ctx.workers);
    std::vector<double> maxima;
    for (const auto& r : records) maxima.push_back(r.max);
    est = tail_ratio(maxima, t, g.d, rhos);
  } else {
    throw ValidationError("tail.estimator must be conditional or binomial, got '" + method + "'");
  }

  Table table;
  table.columns = {"t", "rho", "p_hat", "stderr", "ratio", "censored"};
  for (const auto& p : est.points) table.add({est.t, p.rho, p.p_hat, p.stderr_, p.ratio, p.censored});
  ctx.emit("tail", table);
  ctx.summary("tail: t=" + format_double(t) + " n=" + std::to_string(est.n) + " estimator=" + method +
              " flatness=" + fixed(est.flatness, 4));
  if (est.all_censored()) throw CensoredResult("every tail point is censored");
  return 0;
}

int cmd_classify(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  PathEventSpec spec;
  spec.variant = parse_path_event(ctx.config.get_string("classify.event", "right_triangle"));
  spec.t = ctx.config.get_double("classify.t", 4.0);
  spec.alpha = ctx.config.get_double("classify.alpha", 1.0);
  spec.L = ctx.config.get_double("classify.L", 1.0);
  spec.l = ctx.config.get_double("classify.l", std::numbers::e);
  spec.D = ctx.config.get_double("classify.D", 1.0);
  spec.rho = ctx.config.get_double("classify.rho", 0.0);
  spec.d = g.d;
  spec.validate();
  const auto replicas = count_of(ctx.config, "run.replicas", 200);
  const std::vector<double> at{spec.t};
  const auto records = record_maxima(sampler, make_region(ctx.config, g), at, replicas, ctx.seed, ctx.workers);

  Table table;
  table.columns = {"replica", "t", "event", "centered_max", "in_event"};
  std::size_t hits = 0;
  for (const auto& r : records) {
    const bool in = classify_path_event(r.path, spec);
    hits += in ? 1 : 0;
    table.add({r.replica, r.t, to_string(spec.variant), r.max - centering(r.t, g.d), in});
  }
  ctx.emit("classify", table);
  ctx.summary("classify: event=" + to_string(spec.variant) + " t=" + format_double(spec.t) + " fraction=" +
              fixed(static_cast<double>(hits) / static_cast<double>(replicas), 4) + " (" + std::to_string(hits) +
              "/" + std::to_string(replicas) + ")");
  return 0;
}

int cmd_ballot(Context& ctx) {
  const bool exact = ctx.config.get_bool("ballot.exact", false);
  const auto xs = ctx.config.get_list("ballot.x", {1.0});
  const auto ts = ctx.config.get_list("ballot.t", {1.0});
  auto table = estimator_table({"x", "t"});
  std::vector<McEstimate> estimates;
  std::string name;
  if (exact) {
    name = "ballot_exact";
    for (double x : xs) {
      for (double t : ts) estimates.push_back({ballot_exact(x, t), 0.0, 0, false});
    }
  } else {
    name = "ballot_mc";
    PathConfig pc;
    pc.dt = ctx.config.get_double("ballot.dt", 1e-3);
    pc.horizon = *std::max_element(ts.begin(), ts.end());
    pc.crossing_correction = ctx.config.get_bool("ballot.crossing_correction", true);
    estimates = ballot_mc(xs, ts, pc, count_of(ctx.config, "ballot.paths", 100000), ctx.seed, ctx.workers);
  }
  bool all_censored = true;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < ts.size(); ++j) {
      const auto& e = estimates[i * ts.size() + j];
      table.add({name, xs[i], ts[j], e.estimate, e.stderr_, std::uint64_t{e.n}});
      all_censored = all_censored && e.censored;
    }
  }
  ctx.emit("ballot", table);
  std::string line = "ballot " + std::string(exact ? "exact" : "mc");
  if (estimates.size() == 1) {
    line += " x=" + format_double(xs[0]) + " t=" + format_double(ts[0]) + " estimate=" + fixed(estimates[0].estimate);
    if (!exact) line += " stderr=" + fixed(estimates[0].stderr_);
  } else {
    line += ": " + std::to_string(estimates.size()) + " estimates";
  }
  ctx.summary(line);
  if (!exact && all_censored) throw CensoredResult("every ballot estimate is censored");
  return 0;
}

int cmd_bessel(Context& ctx) {
  const double t = ctx.config.get_double("bessel.t", 1.0);
  const auto samples = count_of(ctx.config, "bessel.samples", 100000);
  const auto bins = static_cast<int>(count_of(ctx.config, "bessel.bins", 30));
  const auto r = bessel_marginal_check(t, samples, ctx.seed, bins, ctx.workers);
  auto table = estimator_table({"t", "bins", "chi_square", "dof", "pvalue"});
  table.add({std::string("bessel3_marginal"), t, std::int64_t{bins}, r.chi_square, r.dof, r.pvalue, r.mean, r.stderr_,
             std::uint64_t{samples}});
  ctx.emit("bessel", table);
  ctx.summary("bessel: t=" + format_double(t) + " chi2=" + fixed(r.chi_square, 3) + " dof=" + format_double(r.dof) +
              " p=" + fixed(r.pvalue, 4) + " mean=" + fixed(r.mean) + " exact_mean=" +
              fixed(2.0 * std::sqrt(2.0 * t / std::numbers::pi)));
  return 0;
}

int cmd_williams(Context& ctx) {
  const double x = ctx.config.get_double("williams.x", 1.0);
  const auto paths = count_of(ctx.config, "williams.paths", 20000);
  const double horizon = ctx.config.get_double("williams.horizon_factor", 1e8);
  const auto r = williams_minimum_check(x, paths, ctx.seed, ctx.workers, horizon);
  if (r.horizon_warning) {
    ctx.warn("the last step set the minimum on " + fixed(100.0 * r.late_fraction, 2) +
             "% of paths; raise williams.horizon_factor");
  }
  auto table = estimator_table({"x", "ks_statistic", "ks_pvalue", "late_fraction"});
  table.add({std::string("williams_minimum"), x, r.ks_statistic, r.ks_pvalue, r.late_fraction, r.mean, r.stderr_,
             std::uint64_t{paths}});
  ctx.emit("williams", table);
  ctx.summary("williams: x=" + format_double(x) + " KS=" + fixed(r.ks_statistic, 5) + " p=" + fixed(r.ks_pvalue, 4) +
              " mean=" + fixed(r.mean) + " exact_mean=" + fixed(0.5 * x));
  return 0;
}

int cmd_renewal(Context& ctx) {
  const std::string side = ctx.config.get_string("renewal.side", "lhs");
  RenewalConfig rc;
  rc.alpha = ctx.config.get_double("renewal.alpha", rc.alpha);
  rc.z = ctx.config.get_double("renewal.z", rc.z);
  rc.t = ctx.config.get_double("renewal.t", rc.t);
  rc.m = ctx.config.get_double("renewal.m", rc.m);
  rc.sigma = ctx.config.get_double("renewal.sigma", rc.sigma);
  rc.dt = ctx.config.get_double("renewal.dt", rc.dt);
  rc.paths = count_of(ctx.config, "renewal.paths", static_cast<std::int64_t>(rc.paths));
  rc.seed = ctx.seed;
  rc.workers = ctx.workers;
  const auto kernel = make_kernel(ctx.config);
  const auto f = make_functional_from(ctx, kernel, 0.5, 9);

  McEstimate e;
  std::string name;
  if (side == "lhs") {
    name = "renewal_lhs";
    e = renewal_lhs(f, rc);
  } else if (side == "rhs") {
    const std::string method = ctx.config.get_string("renewal.estimator", "joint");
    if (method == "joint") {
      name = "renewal_rhs";
      e = renewal_rhs(f, rc);
    } else if (method == "factorized") {
      if (ctx.config.get_string("functional.name", "constant") != "endpoint_indicator") {
        throw ValidationError("renewal.estimator=factorized needs functional.name=endpoint_indicator");
      }
      name = "renewal_rhs_factorized";
      e = renewal_rhs_factorized(ctx.config.get_double("functional.level", -0.5), rc,
                                 static_cast<int>(count_of(ctx.config, "renewal.nodes", 16)));
    } else {
      throw ValidationError("renewal.estimator must be joint or factorized, got '" + method + "'");
    }
  } else {
    throw ValidationError("renewal side must be lhs or rhs, got '" + side + "'");
  }
  auto table = estimator_table({"alpha", "z", "t", "m", "sigma", "functional"});
  table.add({name, rc.alpha, rc.z, rc.t, rc.m, rc.sigma, f.name, e.estimate, e.stderr_, std::uint64_t{e.n}});
  ctx.emit("renewal", table);
  ctx.summary("renewal " + side + ": F=" + f.name + " estimate=" + fixed(e.estimate) + " stderr=" + fixed(e.stderr_) +
              " n=" + std::to_string(e.n));
  if (e.censored) throw CensoredResult("renewal estimate is censored");
  return 0;
}

int cmd_cstar_fit(Context& ctx) {
  const auto sampler = make_sampler(ctx);
  const auto& g = sampler.grid();
  const std::string source = ctx.config.get_string("fit.source", "synthetic");
  const double t = ctx.config.get_double("fit.t", 4.0);
  const auto replicas = count_of(ctx.config, "run.replicas", 2000);
  const double z_min = ctx.config.get_double("fit.z_min", -2.0);
  const double z_max = ctx.config.get_double("fit.z_max", 2.0);
  const auto z_count = count_of(ctx.config, "fit.z_count", 41);
  if (!(z_max > z_min) || z_count < 2) throw ValidationError("fit.z grid needs z_max > z_min and z_count >= 2");
  std::vector<double> z(z_count);
  for (std::size_t i = 0; i < z_count; ++i) z[i] = z_min + (z_max - z_min) * i / (z_count - 1);

  MeasureRequest req;
  req.gammas = {0.0};
  req.checkpoints = {t};
  req.region = make_region(ctx.config, g);
  note_regime(ctx, sampler, t);
  const auto series = martingale_trajectory(sampler, req, replicas, ctx.seed, ctx.workers);
  const std::vector<double> mprime = series.derivative;

  std::vector<double> w;
  if (source == "synthetic") {
    const double c_true = ctx.config.get_double("fit.c_star", 1.0);
    const auto samples = count_of(ctx.config, "fit.samples", static_cast<std::int64_t>(replicas));
    w = synthetic_limit_law(mprime, c_true, g.d, samples, ctx.seed);
  } else if (source == "field") {
    const std::vector<double> at{t};
    for (const auto& r : record_maxima(sampler, req.region, at, replicas, ctx.seed, ctx.workers)) {
      w.push_back(r.max - centering(t, g.d));
    }
  } else {
    throw ValidationError("fit.source must be synthetic or field, got '" + source + "'");
  }
  const auto fit = fit_limit_law(w, mprime, z, g.d);

  Table cdf;
  cdf.columns = {"z", "empirical_cdf", "model_cdf"};
  for (std::size_t i = 0; i < fit.z.size(); ++i) cdf.add({fit.z[i], fit.empirical_cdf[i], fit.model_cdf[i]});
  ctx.emit("fit_cdf", cdf);
  std::ostringstream doc;
  doc << "{\n  \"c_star\": " << format_double(fit.c_star) << ",\n  \"residual\": " << format_double(fit.residual)
      << ",\n  \"n_max\": " << fit.n_max << ",\n  \"n_mprime\": " << fit.n_mprime << "\n}\n";
  ctx.emit_document("fit_summary", doc.str());
  ctx.summary("cstar-fit: source=" + source + " c_star=" + fixed(fit.c_star) + " residual=" + fixed(fit.residual, 8));
  return 0;
}

int cmd_c_m_sigma(Context& ctx) {
  CMSigmaConfig cc;
  cc.M = ctx.config.get_double("cms.M", cc.M);
  cc.sigma = ctx.config.get_double("cms.sigma", cc.sigma);
  cc.b = ctx.config.get_double("cms.b", cc.b);
  cc.dt = ctx.config.get_double("cms.dt", cc.dt);
  cc.n = static_cast<int>(ctx.config.get_int("cms.n", cc.n));
  cc.paths = count_of(ctx.config, "cms.paths", static_cast<std::int64_t>(cc.paths));
  cc.seed = ctx.seed;
  cc.workers = ctx.workers;
  const auto kernel = make_kernel(ctx.config);
  const auto f = make_functional_from(ctx, kernel, cc.b, cc.n);
  const auto e = constant_c_m_sigma(f, kernel, cc);
  auto table = estimator_table({"M", "sigma", "b", "functional"});
  table.add({std::string("c_m_sigma"), cc.M, cc.sigma, cc.b, f.name, e.estimate, e.stderr_, std::uint64_t{e.n}});
  ctx.emit("c_m_sigma", table);
  ctx.summary("c-m-sigma: F=" + f.name + " M=" + format_double(cc.M) + " sigma=" + format_double(cc.sigma) +
              " estimate=" + fixed(e.estimate) + " stderr=" + fixed(e.stderr_));
  if (e.censored) throw CensoredResult("C_{M,sigma} estimate is censored");
  return 0;
}

int cmd_selftest(Context& ctx) {
  Table table;
  table.columns = {"check", "value", "reference", "tolerance", "pass"};
  bool ok = true;
  auto record = [&](const std::string& name, double value, double reference, double tolerance, bool pass) {
    table.add({name, value, reference, tolerance, pass});
    *ctx.out << (pass ? "PASS " : "FAIL ") << name << " value=" << format_double(value)
             << " reference=" << format_double(reference) << '\n';
    ok = ok && pass;
  };
  const std::uint64_t seed = ctx.seed;
  const unsigned w = ctx.workers;

  const double b11 = ballot_exact(1.0, 1.0);
  record("ballot_exact", b11, 0.682689492137086, 1e-12, std::abs(b11 - 0.682689492137086) < 1e-12);

  const double whole = box_ballot_exact(1.0, 0.2, 2.0, 3.0);
  const double parts = box_ballot_exact(1.0, 0.2, 0.9, 3.0) + box_ballot_exact(1.0, 0.9, 2.0, 3.0);
  record("box_ballot_additivity", whole, parts, 1e-12, std::abs(whole - parts) < 1e-12);

  const std::vector<double> xs{1.0}, ts{1.0};
  const auto mc = ballot_mc(xs, ts, PathConfig{1e-2, 1.0, true}, 20000, seed, w)[0];
  record("ballot_mc", mc.estimate, b11, 3.0 * mc.stderr_, std::abs(mc.estimate - b11) <= 3.0 * mc.stderr_);

  const auto bes = bessel_marginal_check(1.0, 20000, seed, 30, w);
  record("bessel3_chi_square_p", bes.pvalue, 1e-3, 0.0, bes.pvalue > 1e-3);

  const auto wil = williams_minimum_check(1.0, 5000, seed, w);
  record("williams_ks_p", wil.ks_pvalue, 1e-3, 0.0, wil.ks_pvalue > 1e-3);

  const auto kernel = KernelSpec::bump_autocorr(1);
  const double var = cov_scale_integral(kernel, 0.0, 4.0, {0.0, 0.0});
  record("variance_equals_t", var, 4.0, 1e-8, std::abs(var - 4.0) < 1e-8);

  GridSpec grid;
  grid.n = 33;
  const FieldSampler sampler(kernel, grid, 0.1);
  MeasureRequest req;
  req.gammas = {1.0};
  req.checkpoints = {2.0};
  req.region = Box{{0.0, 0.0}, {1.0, 0.0}};
  const auto series = martingale_trajectory(sampler, req, 1000, seed, w);
  RunningStats m1;
  for (double v : series.additive) m1.add(v);
  record("additive_martingale_mean", m1.mean(), 1.0, 4.0 * m1.standard_error(),
         std::abs(m1.mean() - 1.0) <= 4.0 * m1.standard_error());

  RenewalConfig rc;
  rc.t = 64.0;
  rc.paths = 20000;
  rc.seed = seed;
  rc.workers = w;
  const double target = std::sqrt(2.0 / std::numbers::pi) / 2.0;
  const auto lhs = renewal_lhs(constant_functional(1.0), rc);
  record("renewal_lhs_constant", lhs.estimate, target, 0.1 * target, std::abs(lhs.estimate - target) < 0.1 * target);

  RandomStream rng(seed, 0, 0);
  std::vector<double> path{0.0};
  for (int i = 0; i < 64; ++i) path.push_back(path.back() + rng.normal());
  const auto twice = reverse_path(reverse_path(path));
  double gap = 0.0;
  for (std::size_t i = 0; i < path.size(); ++i) gap = std::max(gap, std::abs(twice[i] - path[i]));
  record("reversal_involution", gap, 0.0, 1e-12, gap < 1e-12);

  std::vector<double> mprime;
  for (double v : series.derivative) mprime.push_back(std::max(v, 0.0));
  std::vector<double> z;
  for (int i = 0; i <= 40; ++i) z.push_back(-2.0 + 0.1 * i);
  const auto fit = fit_limit_law(synthetic_limit_law(mprime, 1.0, 1, 20000, seed), mprime, z, 1);
  record("cstar_fit_synthetic", fit.c_star, 1.0, 0.1, std::abs(fit.c_star - 1.0) < 0.1);

  if (ctx.out_dir) ctx.emit("selftest", table);
  ctx.summary(std::string("selftest: ") + (ok ? "all checks passed" : "some checks failed"));
  return ok ? 0 : 1;
}

}  // namespace

void Context::emit(const std::string& name, const Table& table) const {
  if (!out_dir) {
    format == "json" ? write_json(table, *out) : write_csv(table, *out);
    return;
  }
  const auto path = *out_dir / (name + (format == "json" ? ".json" : ".csv"));
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write " + path.string());
  format == "json" ? write_json(table, file) : write_csv(table, file);
}

void Context::emit_document(const std::string& name, const std::string& json) const {
  if (!out_dir) {
    *out << json;
    return;
  }
  const auto path = *out_dir / (name + ".json");
  std::ofstream file(path, std::ios::binary);
  if (!file) throw ValidationError("cannot write " + path.string());
  file << json;
}

void Context::summary(const std::string& line) const { *(out_dir ? out : err) << line << '\n'; }

void Context::warn(const std::string& line) const { *err << "warning: " << line << '\n'; }

const std::map<std::string, CommandInfo>& command_table() {
  static const std::map<std::string, CommandInfo> table{
      {"sample", {"dump sampled fields on the grid", "sample", {{"t", "schedule.t_final"}}, "", cmd_sample}},
      {"martingale", {"additive and derivative martingale trajectories", "martingale", {}, "", cmd_martingale}},
      {"max-law", {"centered maxima, quantiles and histograms", "max_law", {}, "", cmd_max_law}},
      {"tail", {"right-tail ratio of the centered maximum", "tail", {}, "", cmd_tail}},
      {"classify", {"path events of the argmax trajectories", "classify", {}, "", cmd_classify}},
      {"ballot", {"ballot probabilities, exact or Monte Carlo", "ballot", {}, "", cmd_ballot}},
      {"bessel", {"Bessel-3 marginal chi-square check", "bessel", {}, "", cmd_bessel}},
      {"williams", {"Bessel-3 global minimum KS check", "williams", {}, "", cmd_williams}},
      {"renewal", {"renewal identity, lhs or rhs", "renewal", {}, "side", cmd_renewal}},
      {"cstar-fit", {"fit the limit-law constant", "fit", {}, "", cmd_cstar_fit}},
      {"c-m-sigma", {"C_{M,sigma} for a registered functional", "cms", {}, "", cmd_c_m_sigma}},
      {"selftest", {"quick oracle suite", "selftest", {}, "", cmd_selftest}},
  };
  return table;
}

std::string resolve_key(const CommandInfo& info, const std::string& name) {
  if (name.find('.') != std::string::npos) return name;
  if (const auto it = info.aliases.find(name); it != info.aliases.end()) return it->second;
  static const std::map<std::string, std::string> shared{
      {"replicas", "run.replicas"}, {"n", "grid.n"},           {"R", "grid.R"},
      {"d", "kernel.d"},            {"delta", "schedule.delta"}, {"profile", "kernel.profile"},
      {"functional", "functional.name"},
  };
  if (const auto it = shared.find(name); it != shared.end()) return it->second;
  return info.section + "." + name;
}

}  // namespace logcorr::cli
