#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "analytic.hpp"
#include "delaunay.hpp"
#include "navigators.hpp"
#include "parallel.hpp"
#include "plan.hpp"
#include "point_process.hpp"
#include "predicates.hpp"
#include "regeneration.hpp"
#include "report.hpp"
#include "spatial_index.hpp"
#include "stats.hpp"
#include "tree.hpp"

namespace ppnav {

namespace exp_detail {

inline ModelParams model_from(const Plan& p) {
  ModelParams m;
  m.d = int(p.integer("d", 2));
  m.beta = p.num("beta");
  m.c = p.num("c", 1.0);
  m.validate();
  return m;
}

inline std::uint64_t rep_seed(std::uint64_t master, std::string_view tag, std::uint64_t i) {
  return stream_key(master, tag, i);
}

template <std::size_t D>
Vec<D> random_start(double x, std::uint64_t master, std::uint64_t i) {
  Rng rng = Rng::stream(master, "start", i);
  return x * unit_direction<D>(rng);
}

// X_1 from a fresh environment.
template <std::size_t D>
Vec<D> first_step(const ModelParams& p, NavMode mode, const Vec<D>& start, std::uint64_t seed) {
  NavState<D> st(p, mode, start, seed);
  st.advance();
  return st.current_point();
}

inline std::set<std::string> keys(std::initializer_list<const char*> extra) {
  std::set<std::string> s{"op", "seed", "threads"};
  for (auto k : extra) s.insert(k);
  return s;
}

inline void stamp(EstimateReport& r, const Plan& plan, std::uint64_t seed, unsigned threads) {
  r.op = plan.str("op");
  r.provenance["seed"] = seed;
  r.provenance["threads"] = threads;
  r.provenance["plan"] = plan.text();
}

inline std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t j) {
  std::vector<double> c;
  for (const auto& r : rows) c.push_back(r[j]);
  return c;
}

inline void require_dim(int d, std::initializer_list<int> ok, const std::string& op) {
  for (int x : ok)
    if (x == d) return;
  throw InputError(op + ": unsupported dimension d = " + std::to_string(d));
}

}  // namespace exp_detail

struct RunContext {
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

// ---------------------------------------------------------------- ppp sanity

template <std::size_t D>
EstimateReport ppp_sanity_impl(const Plan& plan, const RunContext& ctx) {
  const double R = plan.num("radius", 10.0);
  const std::size_t n = plan.count("samples", 10000);
  require(n >= 2, "ppp_sanity needs at least 2 samples");
  const Window<D> w = Window<D>::ball(R);
  std::vector<double> counts(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    counts[i] = double(sample_ppp(w, exp_detail::rep_seed(ctx.seed, "ppp", i)).size());
  });
  EstimateReport r;
  const double m = mean(counts), se = std_error(counts), disp = dispersion_index(counts);
  r.estimate("mean_count", m, se, n);
  r.estimate("dispersion_index", disp, std::sqrt(2.0 / double(n - 1)), n);
  r.reference("expected_count", w.volume(), "window volume");
  r.compare("mean_count_within_se", "le", std::fabs(m - w.volume()) / se, plan.num("tol_se", 3.0), 0.0,
            "window volume");
  r.compare("dispersion_in_range", "range", disp, plan.num("dispersion_lo", 0.97), plan.num("dispersion_hi", 1.03),
            "poisson dispersion = 1");
  return r;
}

inline EstimateReport run_ppp_sanity(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"d", "radius", "samples", "tol_se", "dispersion_lo", "dispersion_hi"}));
  const int d = int(plan.integer("d", 2));
  exp_detail::require_dim(d, {2, 3}, "ppp_sanity");
  EstimateReport r = d == 2 ? ppp_sanity_impl<2>(plan, ctx) : ppp_sanity_impl<3>(plan, ctx);
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ------------------------------------------------------ progress distributions

template <std::size_t D>
void progress_tail_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const std::size_t n = plan.count("samples", 100000);
  const double t_lo = plan.num("t_lo", 5.0), t_hi = plan.num("t_hi", 50.0);
  const std::size_t g = plan.count("grid", 10);
  const double tol = plan.num("tol_rel", 0.15);
  std::vector<double> prog(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const auto x1 = exp_detail::first_step<D>(p, NavMode::directed, Vec<D>{}, exp_detail::rep_seed(ctx.seed, "ptail", i));
    prog[i] = x1[0];
  });
  std::sort(prog.begin(), prog.end());
  const auto K = progress_tail_constant(p);
  r.reference("K", K.K, "progress_tail_constant");
  r.reference("K_corrected", K.K_corrected, "progress_tail_constant");
  r.reference("Lambda0", K.Lambda0, "progress_tail_constant");
  r.estimate("mean_progress", mean(prog), std_error(prog), n);
  Curve c{"progress_tail", {"t", "tail_emp", "tail_se", "scaled_emp", "K", "scaled_exact"}, {}};
  double max_dev = 0.0, max_dev_corr = 0.0, max_z_exact = 0.0, sup_dev = 0.0, sup_dev_corr = 0.0;
  std::size_t empty = 0;
  const double k = p.beta - p.d;
  for (double t : log_grid(t_lo, t_hi, g)) {
    const double tail = empirical_tail(prog, t);
    const double se = binomial_se(tail, n);
    const double tk = std::pow(t, k);
    const double exact = progress_tail_exact(t, p);
    c.rows.push_back({t, tail, se, tk * tail, K.K, tk * exact});
    max_dev = std::max(max_dev, std::fabs(tk * tail / K.K - 1.0));
    max_dev_corr = std::max(max_dev_corr, std::fabs(tk * tail / K.K_corrected - 1.0));
    const double se_exact = binomial_se(exact, n);
    max_z_exact = std::max(max_z_exact, std::fabs(tail - exact) / se_exact);
    if (tail == 0.0) ++empty;
    if (tail * double(n) >= 100.0) {
      sup_dev = std::max(sup_dev, std::fabs(tk * tail / K.K - 1.0));
      sup_dev_corr = std::max(sup_dev_corr, std::fabs(tk * tail / K.K_corrected - 1.0));
    }
  }
  r.curves.push_back(std::move(c));
  r.compare("scaled_tail_level_vs_K", "le", max_dev, tol, tol, "progress_tail_constant");
  r.info["max_rel_dev_vs_K_corrected"] = max_dev_corr;
  r.info["max_z_vs_exact_tail"] = max_z_exact;
  r.info["grid_points_without_exceedances"] = empty;
  // restricted to grid points with at least 100 exceedances
  r.info["max_rel_dev_vs_K_supported"] = sup_dev;
  r.info["max_rel_dev_vs_K_corrected_supported"] = sup_dev_corr;
  r.provenance["truncation_radius"] = NavState<D>(p, NavMode::directed, Vec<D>{}, 0).truncation_radius();
}

template <std::size_t D>
void q_limit_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const std::size_t n = plan.count("samples", 10000);
  const double x = plan.num("x", 1e4);
  const double tol = plan.num("tol_ks", 0.05);
  const double a = contraction_exponent(p);
  std::vector<double> q(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const auto s = exp_detail::random_start<D>(x, ctx.seed, i);
    const auto x1 = exp_detail::first_step<D>(p, NavMode::toward_origin, s, exp_detail::rep_seed(ctx.seed, "qlim", i));
    q[i] = norm(x1) / std::pow(x, a);
  });
  const auto ks = ks_one_sample(q, [&](double s) { return 1.0 - q_limit_tail(std::max(s, 0.0), p); });
  r.estimate("mean_Q", mean(q), std_error(q), n);
  r.reference("alpha", a, "contraction exponent");
  r.compare("ks_vs_q_limit_tail", "le", ks.D, tol, tol, "q_limit_tail");
  r.info["ks_p_value"] = ks.p_value;
  if (p.d == 2) {
    const auto kc = ks_one_sample(q, [&](double s) { return 1.0 - q_limit_tail_corrected(std::max(s, 0.0), p); });
    r.info["ks_vs_corrected_law"] = kc.D;
    r.info["ks_vs_corrected_law_p"] = kc.p_value;
  }
  const auto ke = ks_one_sample(q, [&](double s) { return 1.0 - q_tail_exact(std::max(s, 0.0), p, x); });
  r.info["ks_vs_exact_first_step_law"] = ke.D;
  r.info["ks_vs_exact_first_step_law_p"] = ke.p_value;
  std::vector<double> sorted = q;
  std::sort(sorted.begin(), sorted.end());
  Curve c{"q_tail", {"s", "tail_emp", "q_limit_tail", "corrected", "exact"}, {}};
  for (double s : linear_grid(0.0, 2.0, 41))
    c.rows.push_back({s, empirical_tail(sorted, s), q_limit_tail(s, p),
                      p.d == 2 ? q_limit_tail_corrected(s, p) : std::nan(""), q_tail_exact(s, p, x)});
  r.curves.push_back(std::move(c));
}

template <std::size_t D>
void f_tilde_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const std::size_t n = plan.count("samples", 10000);
  const double x = plan.num("x", 1e4);
  const double band = plan.num("band_sigma", 3.0);
  std::vector<double> ps(n);
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const auto s = exp_detail::random_start<D>(x, ctx.seed, i);
    const auto x1 = exp_detail::first_step<D>(p, NavMode::toward_origin, s, exp_detail::rep_seed(ctx.seed, "ftil", i));
    ps[i] = scaled_progress(s, x1);
  });
  std::vector<double> sorted = ps;
  std::sort(sorted.begin(), sorted.end());
  Curve c{"f_tilde", {"s", "tail_emp", "tail_se", "f_tilde_tail"}, {}};
  double max_z = 0.0;
  for (double s : linear_grid(plan.num("t_lo", 0.05), plan.num("t_hi", 3.0), plan.count("grid", 30))) {
    const double e = empirical_tail(sorted, s), ref = f_tilde_tail(s, p);
    const double se = binomial_se(ref, n);
    c.rows.push_back({s, e, se, ref});
    max_z = std::max(max_z, std::fabs(e - ref) / se);
  }
  r.curves.push_back(std::move(c));
  r.compare("pointwise_z_vs_f_tilde", "le", max_z, band, band, "f_tilde_tail");
}

inline EstimateReport run_progress_distribution(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"regime", "d", "beta", "c", "samples", "x", "t_lo", "t_hi", "grid", "tol_rel",
                                     "tol_ks", "band_sigma"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2, 3}, "progress_distribution");
  const std::string regime = plan.str("regime");
  EstimateReport r;
  auto go = [&]<std::size_t D>() {
    if (regime == "progress-tail") {
      if (!(p.beta > p.d)) throw InputError("progress-tail regime needs beta > d");
      progress_tail_regime<D>(plan, ctx, p, r);
    } else if (regime == "q-limit") {
      require_subcritical(p);
      q_limit_regime<D>(plan, ctx, p, r);
    } else if (regime == "f-tilde") {
      require_critical(p);
      f_tilde_regime<D>(plan, ctx, p, r);
    } else {
      throw InputError("unknown progress regime '" + regime + "'");
    }
  };
  if (p.d == 2) go.template operator()<2>();
  else go.template operator()<3>();
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  r.provenance["regime"] = regime;
  return r;
}

// --------------------------------------------------------------- hop scaling

template <std::size_t D>
std::vector<double> hop_counts(const ModelParams& p, double x, std::size_t paths, const RunContext& ctx,
                               const std::string& tag, NavLimits lim = {}) {
  std::vector<double> h(paths);
  parallel_for(paths, ctx.threads, [&](std::size_t i) {
    const std::uint64_t s = exp_detail::rep_seed(ctx.seed, tag + std::to_string(x), i);
    const auto path = navigate_small_world<D>(p, exp_detail::random_start<D>(x, s, 0), NavMode::toward_origin, lim, s);
    if (path.termination != Termination::absorbed) throw RuntimeFailure("path did not reach O within the step limit");
    h[i] = double(path.H());
  });
  return h;
}

template <std::size_t D>
void hop_log_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const auto ladder = plan.list("ladder");
  const std::size_t paths = plan.count("paths", 200);
  const double tol = plan.num("tol_rel", 0.15);
  const MuTilde mt = mu_tilde(p);
  const double target = 1.0 / mt.value;
  r.reference("inverse_mu_tilde", target, "mu_tilde");
  r.provenance["mu_tilde_cutoff"] = mt.cutoff;
  r.provenance["mu_tilde_tail_bound"] = mt.tail_bound;
  r.info["mu_tilde"] = mt.value;
  r.info["mu_tilde_simpson"] = mt.simpson;
  r.info["mu_tilde_schemes_agree"] = mt.schemes_agree;
  Curve c{"hop_ratio", {"x", "H_mean", "H_se", "ratio", "ratio_se"}, {}};
  std::vector<double> dist_to_target;
  for (double x : ladder) {
    const auto h = hop_counts<D>(p, x, paths, ctx, "hlog");
    const double m = mean(h), se = std_error(h), L = std::log(x);
    c.rows.push_back({x, m, se, m / L, se / L});
    r.estimate("H_over_ln_x@" + format_double(x), m / L, se / L, paths);
    dist_to_target.push_back(std::fabs(m / L - target));
  }
  std::size_t viol = 0;
  for (std::size_t i = 1; i < dist_to_target.size(); ++i) viol += dist_to_target[i] > dist_to_target[i - 1];
  r.compare("ratio_at_top_vs_inverse_mu_tilde", "rel", c.rows.back()[3], target, tol, "mu_tilde");
  r.compare("monotone_approach_violations", "le", double(viol), 0.0, 0.0, "mu_tilde");
  r.curves.push_back(std::move(c));
}

template <std::size_t D>
void hop_loglog_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const auto ladder = plan.list("ladder");
  const std::size_t ns = plan.count("contraction_samples", 1000);
  const std::size_t paths = plan.count("paths", 0);
  const double a = contraction_exponent(p);
  const double slope_tol = plan.num("slope_tol", 0.05);
  std::vector<double> lx, ly;
  std::size_t absorbed = 0;
  Curve c{"contraction", {"x", "mean_ln_x1", "se"}, {}};
  for (double x : ladder) {
    std::vector<double> v(ns);
    parallel_for(ns, ctx.threads, [&](std::size_t i) {
      const std::uint64_t s = exp_detail::rep_seed(ctx.seed, "contr" + format_double(x), i);
      v[i] = norm(exp_detail::first_step<D>(p, NavMode::toward_origin, exp_detail::random_start<D>(x, s, 0), s));
    });
    std::vector<double> logs;
    for (double y : v) {
      if (y == 0.0) {
        ++absorbed;
        continue;
      }
      lx.push_back(std::log(x));
      ly.push_back(std::log(y));
      logs.push_back(std::log(y));
    }
    c.rows.push_back({x, mean(logs), std_error(logs)});
  }
  const auto fit = ols(lx, ly);
  r.regressions.push_back({"ln_x1_on_ln_x", fit.slope, fit.intercept, fit.slope_se, fit.r2, fit.n});
  r.reference("alpha", a, "contraction exponent 1-(d-beta)/2");
  r.reference("loglog_limit", loglog_limit(p.d, p.beta), "loglog_limit");
  r.compare("contraction_slope", "abs", fit.slope, a, slope_tol, "loglog_limit");
  r.info["first_steps_absorbed_at_O"] = absorbed;
  r.curves.push_back(std::move(c));
  if (paths > 0) {
    const double eps = plan.num("eps", 0.2);
    Curve hc{"hop_ratio", {"x", "H_mean", "H_se", "ratio", "shell_fraction"}, {}};
    for (double x : ladder) {
      const double ll = std::log(std::log(x));
      if (!(ll > 0.0)) continue;
      const auto h = hop_counts<D>(p, x, paths, ctx, "hll");
      // x within [exp(alpha^{-(1-eps)H}), exp(alpha^{-(1+eps)H})]
      std::size_t in = 0;
      for (double k : h)
        in += x >= loglog_ball_radius((1.0 - eps) * k, p) && x <= loglog_ball_radius((1.0 + eps) * k, p);
      hc.rows.push_back({x, mean(h), std_error(h), mean(h) / ll, double(in) / double(h.size())});
    }
    r.info["H_ratio_is_informational"] = true;
    r.curves.push_back(std::move(hc));
  }
}

template <std::size_t D>
void hop_linear_regime(const Plan& plan, const RunContext& ctx, const ModelParams& p, EstimateReport& r) {
  const auto ladder = plan.list("ladder");
  const std::size_t paths = plan.count("paths", 100);
  const double tol = plan.num("tol_rel", 0.1);
  Curve c{"hop_ratio", {"x", "H_mean", "H_se", "H_over_x"}, {}};
  std::vector<double> hm;
  for (double x : ladder) {
    const auto h = hop_counts<D>(p, x, paths, ctx, "hlin");
    hm.push_back(mean(h));
    c.rows.push_back({x, mean(h), std_error(h), mean(h) / x});
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < ladder.size(); ++i)
    worst = std::max(worst, std::fabs((hm[i] / hm[i - 1]) / (ladder[i] / ladder[i - 1]) - 1.0));
  r.compare("successive_H_ratio_vs_x_ratio", "le", worst, tol, tol, "linear scaling");
  if (plan.count("regen_steps", 0) > 0 && p.beta > p.d) {
    const auto tr = coupled_walk<D>(p, CouplingMode::directed, Vec<D>{}, plan.count("regen_steps", 0),
                                    exp_detail::rep_seed(ctx.seed, "hlin-regen", 0));
    const auto cs = regen_analysis(tr, 99, ctx.seed);
    r.reference("inverse_mu_prime", 1.0 / cs.mu_hat, "regen_analysis");
    r.info["H_over_x_at_top"] = c.rows.back()[3];
  }
  r.curves.push_back(std::move(c));
}

inline EstimateReport run_hop_scaling(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"regime", "d", "beta", "c", "ladder", "paths", "tol_rel", "contraction_samples",
                                     "slope_tol", "regen_steps", "eps"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2, 3}, "hop_scaling");
  const std::string regime = plan.str("regime");
  auto ladder = plan.list("ladder");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] > ladder[i - 1])) throw InputError("ladder must be increasing");
  EstimateReport r;
  auto go = [&]<std::size_t D>() {
    if (regime == "log") {
      require_critical(p);
      hop_log_regime<D>(plan, ctx, p, r);
    } else if (regime == "loglog") {
      require_subcritical(p);
      hop_loglog_regime<D>(plan, ctx, p, r);
    } else if (regime == "linear") {
      if (!(p.beta > p.d + 2)) throw InputError("linear regime needs beta > d + 2");
      hop_linear_regime<D>(plan, ctx, p, r);
    } else {
      throw InputError("unknown hop regime '" + regime + "'");
    }
  };
  if (p.d == 2) go.template operator()<2>();
  else go.template operator()<3>();
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  r.provenance["regime"] = regime;
  return r;
}

// ------------------------------------------------------- regen consistency

inline EstimateReport run_regen_consistency(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"d", "beta", "c", "steps", "se_mult", "min_regen_fraction", "perms"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2}, "regen_consistency");
  if (!(p.beta > p.d)) throw InputError("directed coupling needs beta > d");
  const auto tr = coupled_walk<2>(p, CouplingMode::directed, Vec<2>{}, plan.count("steps", 100000),
                                  exp_detail::rep_seed(ctx.seed, "regen", 0));
  const auto cs = regen_analysis(tr, plan.count("perms", 999), ctx.seed);
  EstimateReport r;
  r.estimate("mu_prime_regen", cs.mu_hat, cs.mu_se, cs.length.size());
  r.estimate("mean_directed_progress", cs.plain_mean, cs.plain_se, tr.steps());
  r.estimate("regen_fraction", cs.regen_fraction, binomial_se(cs.regen_fraction, tr.steps()), tr.steps());
  const double k = plan.num("se_mult", 2.0);
  r.compare("mu_prime_vs_plain_mean_in_se", "le", std::fabs(cs.mu_hat - cs.plain_mean) / cs.mu_se, k, k,
            "regen_analysis");
  r.compare("regen_fraction", "ge", cs.regen_fraction, plan.num("min_regen_fraction", 0.05), 0.0, "regen_analysis");
  r.info["cycles"] = cs.length.size();
  r.info["lag1_p_length"] = cs.lag1_p_length;
  r.info["lag1_p_progress"] = cs.lag1_p_progress;
  if (!tr.tag.empty()) r.info["tag"] = tr.tag;
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  r.provenance["truncation_radius"] = RadialMass(p).tail_radius(1e-12);
  return r;
}

// ------------------------------------------------------------- queue tails

inline EstimateReport run_queue_tails(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"runs", "alpha", "p_zero", "tau_p", "cap", "theta_tmin", "theta_min_count",
                                     "m_tmin", "m_min_count", "theta_slope_max", "m_slope_max"}));
  QueueParams qp;
  qp.alpha = plan.num("alpha", 3.0);
  qp.p_zero = plan.num("p_zero", 0.5);
  qp.tau_p = plan.num("tau_p", 0.5);
  qp.validate();
  const std::size_t runs = plan.count("runs", 1000000);
  const std::size_t cap = plan.count("cap", 1000000);
  Rng rng = Rng::stream(ctx.seed, "queue");
  std::vector<double> theta, M;
  std::size_t censored = 0;
  for (std::size_t i = 0; i < runs; ++i) {
    const auto t = giginf_cycle(qp, cap, rng, &M);
    if (t) theta.push_back(double(*t));
    else ++censored;
  }
  // pooled workloads over complete cycles estimate the stationary law (cycle formula)
  const auto ft = tail_exponent(theta, plan.num("theta_tmin", 2.0), 20, 1000, plan.count("theta_min_count", 100));
  const auto fm = tail_exponent(M, plan.num("m_tmin", 2.0), 20, 1000, plan.count("m_min_count", 5000));
  EstimateReport r;
  r.estimate("mean_theta", mean(theta), std_error(theta), theta.size());
  r.regressions.push_back({"theta_tail", ft.fit.slope, ft.fit.intercept, ft.fit.slope_se, ft.fit.r2, ft.fit.n});
  r.regressions.push_back({"M_tail", fm.fit.slope, fm.fit.intercept, fm.fit.slope_se, fm.fit.r2, fm.fit.n});
  r.reference("theta_bound_exponent", 2.0 - qp.alpha, "queue tail bound 2-alpha");
  r.reference("M_bound_exponent", 1.0 - qp.alpha, "stationary workload bound 1-alpha");
  r.compare("theta_slope", "le", ft.fit.slope, plan.num("theta_slope_max", -0.8), 0.0, "queue tail bound 2-alpha");
  r.compare("M_slope", "le", fm.fit.slope, plan.num("m_slope_max", -1.8), 0.0, "stationary workload bound 1-alpha");
  Curve ct{"theta_tail", {"t", "tail"}, {}}, cm{"M_tail", {"t", "tail"}, {}};
  for (std::size_t i = 0; i < ft.t.size(); ++i) ct.rows.push_back({ft.t[i], ft.tail[i]});
  for (std::size_t i = 0; i < fm.t.size(); ++i) cm.rows.push_back({fm.t[i], fm.tail[i]});
  r.curves.push_back(std::move(ct));
  r.curves.push_back(std::move(cm));
  r.info["censored"] = censored;
  r.info["pooled_workloads"] = M.size();
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ----------------------------------------------------------- shape profile

struct SandwichCounts {
  std::size_t pairs = 0;
  std::size_t violations = 0;
};

// Per k in [k_lo, k_hi]: violated when some point of B(O,(1-eps)k mu) needs
// more than k hops or some point within k hops lies beyond (1+eps)k mu.
inline SandwichCounts sandwich_check(const NavTree& t, const std::vector<Vec<2>>& pts, double mu, double eps,
                                     std::size_t k_lo, std::size_t k_hi) {
  const std::size_t H = t.max_h();
  std::vector<double> min_norm(H + 2, std::numeric_limits<double>::infinity()), max_norm(H + 1, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i == t.root) continue;
    const double r = norm(pts[i]);
    min_norm[t.h[i]] = std::min(min_norm[t.h[i]], r);
    max_norm[t.h[i]] = std::max(max_norm[t.h[i]], r);
  }
  for (std::size_t h = H; h-- > 0;) min_norm[h] = std::min(min_norm[h], min_norm[h + 1]);  // suffix min over >= h
  for (std::size_t h = 1; h <= H; ++h) max_norm[h] = std::max(max_norm[h], max_norm[h - 1]);
  SandwichCounts sc;
  for (std::size_t k = k_lo; k <= k_hi; ++k) {
    ++sc.pairs;
    const double inner = k + 1 <= H ? min_norm[k + 1] : std::numeric_limits<double>::infinity();
    const double outer = max_norm[std::min(k, H)];
    if (inner < (1.0 - eps) * double(k) * mu || outer > (1.0 + eps) * double(k) * mu) ++sc.violations;
  }
  return sc;
}

inline EstimateReport run_shape_profile(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"d", "beta", "c", "radius", "trees", "k_min", "eps", "guard", "tol_rel",
                                     "viol_frac", "regen_steps"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2}, "shape_profile");
  if (!(p.beta > p.d + 2)) throw InputError("shape profile needs the linear regime beta > d + 2");
  const double R = plan.num("radius", 300.0), eps = plan.num("eps", 0.2), guard = plan.num("guard", 0.8);
  const std::size_t trees = plan.count("trees", 20), k_min = plan.count("k_min", 20);
  const auto tr = coupled_walk<2>(p, CouplingMode::directed, Vec<2>{}, plan.count("regen_steps", 100000),
                                  exp_detail::rep_seed(ctx.seed, "shape-regen", 0));
  const auto cs = regen_analysis(tr, 99, ctx.seed);
  const double mu = cs.mu_hat;
  const auto k_max = std::size_t(std::floor(guard * R / ((1.0 + eps) * mu)));
  if (k_max < k_min || k_min == 0)
    throw InputError("boundary guard leaves no k-range: k_max = " + std::to_string(k_max));
  std::vector<std::vector<double>> ratio(trees);
  std::vector<SandwichCounts> sw(trees);
  // trees run one after another; each build is parallel inside
  for (std::size_t i = 0; i < trees; ++i) {
    const std::uint64_t s = exp_detail::rep_seed(ctx.seed, "shape-tree", i);
    const auto ps = palm_add(sample_ppp(Window<2>::ball(R), s), {Vec<2>{}});
    DenseSmallWorld<2> g(ps, p, s);
    const NavTree t = build_small_world_tree(g, ctx.threads);
    const auto prof = tree_ball_profile(t);
    for (std::size_t k = k_min; k <= k_max; ++k) {
      const double cnt = double(prof[std::min(k, prof.size() - 1)]);
      ratio[i].push_back(cnt / (unit_ball_volume(2) * double(k) * double(k)));
    }
    sw[i] = sandwich_check(t, ps.points, mu, eps, k_min, k_max);
  }
  const double target = mu * mu;
  Curve c{"profile", {"k", "ratio_mean", "ratio_se", "mu_prime_sq"}, {}};
  double worst = 0.0;
  for (std::size_t j = 0; j + k_min <= k_max; ++j) {
    std::vector<double> col;
    for (std::size_t i = 0; i < trees; ++i) col.push_back(ratio[i][j]);
    const double m = mean(col);
    c.rows.push_back({double(k_min + j), m, trees > 1 ? std_error(col) : 0.0, target});
    worst = std::max(worst, std::fabs(m / target - 1.0));
  }
  std::size_t pairs = 0, viol = 0;
  for (const auto& s : sw) {
    pairs += s.pairs;
    viol += s.violations;
  }
  EstimateReport r;
  r.estimate("mu_prime", mu, cs.mu_se, cs.length.size());
  r.reference("mu_prime_sq", target, "regen_analysis");
  r.compare("profile_vs_mu_prime_sq", "le", worst, plan.num("tol_rel", 0.2), plan.num("tol_rel", 0.2),
            "regen_analysis");
  r.compare("sandwich_violation_fraction", "le", double(viol) / double(pairs), plan.num("viol_frac", 0.05), 0.0,
            "regen_analysis");
  r.info["k_min"] = k_min;
  r.info["k_max"] = k_max;
  r.info["sandwich_pairs"] = pairs;
  r.info["sandwich_violations"] = viol;
  r.curves.push_back(std::move(c));
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ----------------------------------------------------------- deviation tail

inline EstimateReport run_deviation_tail(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"d", "beta", "c", "ladder", "paths", "gamma", "slope_max", "cone_radius",
                                     "cone_gamma"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2}, "deviation_tail");
  if (!(p.beta > p.d + 2)) throw InputError("deviation tail needs the linear regime beta > d + 2");
  const auto ladder = plan.list("ladder");
  const std::size_t paths = plan.count("paths", 200);
  const double gamma = plan.num("gamma", 0.9);
  Curve c{"deviation", {"x", "median_delta", "p_exceed", "p_se"}, {}};
  std::vector<double> lx, lm, pe;
  std::size_t lemma_viol = 0;
  double max_resid = 0.0;
  for (double x : ladder) {
    std::vector<double> delta(paths);
    std::vector<std::size_t> lv(paths);
    std::vector<double> rs(paths);
    parallel_for(paths, ctx.threads, [&](std::size_t i) {
      const std::uint64_t s = exp_detail::rep_seed(ctx.seed, "dev" + format_double(x), i);
      const auto start = exp_detail::random_start<2>(x, s, 0);
      const auto path = navigate_small_world<2>(p, start, NavMode::toward_origin, NavLimits{}, s);
      delta[i] = path_metrics<2>(path.points).Delta;
      const Vec<2> e1 = (1.0 / x) * start;
      const auto td = transverse_decomposition(path.points, e1, Vec<2>{-e1[1], e1[0]}, 1e-9 * x);
      lv[i] = td.lemma_violations;
      rs[i] = td.max_residual;
    });
    for (std::size_t i = 0; i < paths; ++i) {
      lemma_viol += lv[i];
      max_resid = std::max(max_resid, rs[i]);
    }
    std::size_t ex = 0;
    for (double d : delta) ex += d >= std::pow(x, gamma);
    const double pr = double(ex) / double(paths);
    const double md = median(delta);
    c.rows.push_back({x, md, pr, binomial_se(pr, paths)});
    if (md > 0.0) {
      lx.push_back(std::log(x));
      lm.push_back(std::log(md));
    }
    pe.push_back(pr);
  }
  const auto fit = ols(lx, lm);
  std::size_t incr = 0;
  for (std::size_t i = 1; i < pe.size(); ++i) incr += pe[i] > pe[i - 1];
  EstimateReport r;
  r.regressions.push_back({"ln_median_delta_on_ln_x", fit.slope, fit.intercept, fit.slope_se, fit.r2, fit.n});
  r.compare("median_delta_exponent", "le", fit.slope, plan.num("slope_max", 0.9), 0.0, "sublinear deviation");
  r.compare("exceedance_nonincreasing_violations", "le", double(incr), 0.0, 0.0, "deviation tail bound");
  r.info["lemma_violations"] = lemma_viol;
  r.info["max_recursion_residual"] = max_resid;
  if (plan.has("cone_radius")) {
    const double cg = plan.num("cone_gamma", gamma);
    const std::uint64_t s = exp_detail::rep_seed(ctx.seed, "cone", 0);
    const auto ps = palm_add(sample_ppp(Window<2>::ball(plan.num("cone_radius")), s), {Vec<2>{}});
    DenseSmallWorld<2> g(ps, p, s);
    const auto t = build_small_world_tree(g, ctx.threads);
    const auto bad = offspring_cone_check(t, ps.points, cg);
    std::size_t far_bad = 0;
    for (auto i : bad) far_bad += norm(ps[i]) >= 0.5 * plan.num("cone_radius");
    r.estimate("cone_violation_fraction", double(bad.size()) / double(ps.size() - 1), 0.0, ps.size() - 1);
    r.info["cone_violations"] = bad.size();
    r.info["cone_violations_outer_half"] = far_bad;
  }
  r.curves.push_back(std::move(c));
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ------------------------------------------------------ local limit compare

inline EstimateReport run_local_limit_compare(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"d", "beta", "c", "x", "samples", "perms", "alpha_level", "self_test"}));
  const ModelParams p = exp_detail::model_from(plan);
  exp_detail::require_dim(p.d, {2}, "local_limit_compare");
  if (!(p.beta > p.d)) throw InputError("local limit comparison needs beta > d");
  const double x = plan.num("x", 1e4);
  const std::size_t n = plan.count("samples", 400);
  const bool self = plan.integer("self_test", 0) != 0;
  std::vector<Vec<2>> a(n), b(n);
  // directed samples reflected so that e1 maps to -e1, the direction toward O from x e1
  auto directed = [&](std::uint64_t s) {
    const auto y = exp_detail::first_step<2>(p, NavMode::directed, Vec<2>{}, s);
    return Vec<2>{-y[0], y[1]};
  };
  parallel_for(n, ctx.threads, [&](std::size_t i) {
    const std::uint64_t sa = exp_detail::rep_seed(ctx.seed, "ll-a", i), sb = exp_detail::rep_seed(ctx.seed, "ll-b", i);
    if (self) {
      a[i] = directed(sa);
    } else {
      const Vec<2> X{x, 0.0};
      a[i] = exp_detail::first_step<2>(p, NavMode::toward_origin, X, sa) - X;
    }
    b[i] = directed(sb);
  });
  Rng rng = Rng::stream(ctx.seed, "ll-perm");
  const auto et = energy_test(a, b, plan.count("perms", 199), rng);
  EstimateReport r;
  r.estimate("energy_statistic", et.statistic, 0.0, 2 * n);
  r.estimate("p_value", et.p_value, 0.0, plan.count("perms", 199));
  r.compare("not_rejected", "ge", et.p_value, plan.num("alpha_level", 0.01), 0.0, "two-sample energy test");
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ------------------------------------------------------------ exactness suite

struct ExactnessCounts {
  std::size_t checked = 0;
  std::size_t failures = 0;
};

// Empty circumcircle of every triangle against every point, exact predicates.
inline ExactnessCounts delaunay_bruteforce(const Triangulation& t) {
  ExactnessCounts ec;
  const auto& P = t.points;
  for (const auto& tri : t.triangles) {
    ++ec.checked;
    bool bad = geom::orient(P[tri[0]], P[tri[1]], P[tri[2]]) <= 0;
    for (std::size_t q = 0; q < P.size() && !bad; ++q) {
      if (q == tri[0] || q == tri[1] || q == tri[2]) continue;
      if (geom::incircle(P[tri[0]], P[tri[1]], P[tri[2]], P[q]) > 0) bad = true;
    }
    ec.failures += bad;
  }
  // Euler count for a triangulated point set: 2n - 2 - h triangles
  if (t.triangles.size() != 2 * P.size() - 2 - t.hull.size()) ++ec.failures;
  return ec;
}

inline EstimateReport run_exactness(const Plan& plan, const RunContext& ctx) {
  plan.restrict_to(exp_detail::keys({"delaunay_sets", "delaunay_points", "query_trials", "residual_max",
                                     "path_radius", "paths", "beta", "c", "lazy_dense_x", "lazy_dense_samples",
                                     "alpha_level", "rotation_sets"}));
  EstimateReport r;
  // Delaunay vs brute force
  {
    const std::size_t sets = plan.count("delaunay_sets", 5), npts = plan.count("delaunay_points", 1000);
    ExactnessCounts ec;
    for (std::size_t s = 0; s < sets; ++s) {
      Rng rng = Rng::stream(ctx.seed, "del", s);
      std::vector<Vec<2>> pts(npts);
      for (auto& q : pts) q = {uniform01(rng), uniform01(rng)};
      const auto t = triangulate(pts);
      const auto e = delaunay_bruteforce(t);
      ec.checked += e.checked;
      ec.failures += e.failures;
    }
    r.estimate("delaunay_triangles_checked", double(ec.checked));
    r.compare("delaunay_empty_circumcircle_failures", "le", double(ec.failures), 0.0, 0.0, "brute force");
  }
  // query_ball vs linear scan
  {
    const auto ps = sample_ppp(Window<2>::ball(30.0), exp_detail::rep_seed(ctx.seed, "qb", 0));
    const SpatialIndex<2> idx(ps);
    Rng rng = Rng::stream(ctx.seed, "qb-centers");
    std::size_t bad = 0;
    const std::size_t trials = plan.count("query_trials", 1000);
    for (std::size_t t = 0; t < trials; ++t) {
      const Vec<2> cen{80.0 * uniform01(rng) - 40.0, 80.0 * uniform01(rng) - 40.0};
      const double rad = 20.0 * uniform01(rng);
      std::vector<std::size_t> lin;
      for (std::size_t i = 0; i < ps.size(); ++i)
        if (dist2(ps[i], cen) < rad * rad) lin.push_back(i);
      if (idx.query_ball(cen, rad) != lin) ++bad;
    }
    r.compare("query_ball_mismatches", "le", double(bad), 0.0, 0.0, "linear scan");
  }
  // recursion residual and pathwise transverse inequality, radial and small-world paths
  {
    ModelParams p;
    p.d = 2;
    p.beta = plan.num("beta", 4.0);
    p.c = plan.num("c", 1.0);
    const double R = plan.num("path_radius", 60.0);
    const std::size_t np = plan.count("paths", 200);
    double max_resid = 0.0;
    std::size_t lemma = 0, rot_bad = 0, rot_checked = 0;
    const auto ps = palm_add(sample_ppp(Window<2>::ball(R), exp_detail::rep_seed(ctx.seed, "paths", 0)), {Vec<2>{}});
    const SpatialIndex<2> idx(ps);
    PointSet<2> rot = ps;
    for (auto& q : rot.points) q = Vec<2>{-q[1], q[0]};
    const SpatialIndex<2> ridx(rot);
    const auto tri = triangulate(ps);
    const auto rtri = triangulate(rot.points);
    for (std::size_t i = 0; i < np; ++i) {
      const std::size_t s = 1 + (i * 7919) % (ps.size() - 1);
      const Vec<2> X = ps[s];
      const double x = norm(X);
      if (x == 0.0) continue;
      const Vec<2> e1 = (1.0 / x) * X, e2{-e1[1], e1[0]};
      auto check = [&](const std::vector<Vec<2>>& pts) {
        const auto td = transverse_decomposition(pts, e1, e2, 1e-9 * x);
        max_resid = std::max(max_resid, td.max_residual);
        lemma += td.lemma_violations;
      };
      const auto rp = navigate_radial(ps, idx, s, NavMode::toward_origin, NavLimits{});
      check(rp.points);
      const auto sp = navigate_small_world<2>(p, X, NavMode::toward_origin, NavLimits{},
                                              exp_detail::rep_seed(ctx.seed, "sw", i));
      check(sp.points);
      // rotation by a quarter turn is exact in floating point
      const auto rrp = navigate_radial(rot, ridx, s, NavMode::toward_origin, NavLimits{});
      ++rot_checked;
      rot_bad += rrp.indices != rp.indices;
      const auto cp = navigate_compass(tri, s, NavMode::toward_origin, NavLimits{});
      const auto rcp = navigate_compass(rtri, s, NavMode::toward_origin, NavLimits{});
      ++rot_checked;
      rot_bad += rcp.indices != cp.indices;
    }
    r.compare("recursion_residual", "le", max_resid, plan.num("residual_max", 1e-9), 0.0, "transverse recursion");
    r.compare("transverse_bound_violations", "le", double(lemma), 0.0, 0.0, "V_k <= S_k + M_k");
    r.compare("rotation_equivariance_failures", "le", double(rot_bad), 0.0, 0.0, "quarter-turn rotation");
    r.info["rotation_paths_checked"] = rot_checked;
  }
  // lazy vs dense small-world: first-step progress and hop count at small |X_0|
  {
    ModelParams p;
    p.d = 2;
    p.beta = plan.num("beta", 4.0);
    p.c = plan.num("c", 1.0);
    const double x = plan.num("lazy_dense_x", 20.0);
    const std::size_t n = plan.count("lazy_dense_samples", 400);
    std::vector<double> pa(n), pb(n), ha(n), hb(n);
    const Vec<2> X{x, 0.0};
    parallel_for(n, ctx.threads, [&](std::size_t i) {
      const std::uint64_t sa = exp_detail::rep_seed(ctx.seed, "lazy", i), sb = exp_detail::rep_seed(ctx.seed, "dense", i);
      const auto lp = navigate_small_world<2>(p, X, NavMode::toward_origin, NavLimits{}, sa);
      pa[i] = x - norm(lp.points[1]);
      ha[i] = double(lp.H());
      const auto ps = palm_add(sample_ppp(Window<2>::ball(x * 1.01), sb), {Vec<2>{}, X});
      DenseSmallWorld<2> g(ps, p, sb);
      const auto dp = navigate_dense(g, 1, NavLimits{});
      pb[i] = x - norm(dp.points[1]);
      hb[i] = double(dp.H());
    });
    const auto kp = ks_two_sample(pa, pb);
    const auto kh = ks_two_sample(ha, hb);
    const double level = plan.num("alpha_level", 0.01);
    r.compare("lazy_dense_progress_ks_p", "ge", kp.p_value, level, 0.0, "two-sample KS");
    r.compare("lazy_dense_hops_ks_p", "ge", kh.p_value, level, 0.0, "two-sample KS");
    r.info["lazy_mean_H"] = mean(ha);
    r.info["dense_mean_H"] = mean(hb);
    r.info["lazy_mean_progress"] = mean(pa);
    r.info["dense_mean_progress"] = mean(pb);
  }
  exp_detail::stamp(r, plan, ctx.seed, ctx.threads);
  return r;
}

// ---------------------------------------------------------------- dispatch

using ExperimentFn = EstimateReport (*)(const Plan&, const RunContext&);

inline const std::map<std::string, ExperimentFn>& experiment_registry() {
  static const std::map<std::string, ExperimentFn> reg{
      {"ppp_sanity", run_ppp_sanity},
      {"progress_distribution", run_progress_distribution},
      {"hop_scaling", run_hop_scaling},
      {"regen_consistency", run_regen_consistency},
      {"queue_tails", run_queue_tails},
      {"shape_profile", run_shape_profile},
      {"deviation_tail", run_deviation_tail},
      {"local_limit_compare", run_local_limit_compare},
      {"exactness", run_exactness},
  };
  return reg;
}

inline EstimateReport run_plan(const Plan& plan, RunContext ctx) {
  const std::string op = plan.str("op");
  const auto& reg = experiment_registry();
  auto it = reg.find(op);
  if (it == reg.end()) throw InputError("unknown experiment op '" + op + "'");
  if (plan.has("seed")) ctx.seed = plan.count("seed", ctx.seed);
  if (plan.has("threads") && ctx.threads == 0) ctx.threads = unsigned(plan.count("threads", 1));
  if (ctx.threads == 0) ctx.threads = 1;
  return it->second(plan, ctx);
}

}  // namespace ppnav
