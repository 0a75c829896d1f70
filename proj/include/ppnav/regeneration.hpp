#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "csv.hpp"
#include "errors.hpp"
#include "navigators.hpp"
#include "rng.hpp"
#include "small_world.hpp"
#include "stats.hpp"

namespace ppnav {

enum class CouplingMode { directed, radial, scaled };

inline std::string to_string(CouplingMode m) {
  switch (m) {
    case CouplingMode::directed: return "directed";
    case CouplingMode::radial: return "radial";
    case CouplingMode::scaled: return "scaled";
  }
  return "?";
}

inline CouplingMode parse_coupling_mode(const std::string& s) {
  if (s == "directed") return CouplingMode::directed;
  if (s == "radial") return CouplingMode::radial;
  if (s == "scaled") return CouplingMode::scaled;
  throw InputError("unknown coupling mode '" + s + "'");
}

// Farthest distance from its center of a PPP with intensity f(|x - X|) over
// the whole space (beta > d): P(rho <= r) = exp(-(m_inf - m(r))).
inline double sample_outer_radius(const RadialMass& rm, Rng& rng) {
  const double arg = rm.total() + std::log(uniform_pos(rng));
  if (!(arg > 0.0)) return 0.0;
  return rm.inverse(arg);
}

// Least norm of a PPP with intensity f(|x - X|) restricted to B(O,|X|); |X|
// when that set is empty. Drawn shell by shell from O outward.
template <std::size_t D>
double sample_inner_radius(const ModelParams& p, const Vec<D>& X, Rng& rng) {
  const double x = norm(X);
  if (x == 0.0) return 0.0;
  const double vol = unit_ball_volume(int(D));
  const double r0 = std::pow(1.0 / (p.f(x) * vol), 1.0 / double(D));
  double a = 0.0, b = std::min(x, r0);
  for (;;) {
    const double bound = x - b > 0.0 ? p.f(x - b) : 1.0;
    const double ad = std::pow(a, double(D)), bd = std::pow(b, double(D));
    const std::uint64_t n = poisson(rng, bound * vol * (bd - ad));
    double best = std::numeric_limits<double>::infinity();
    for (std::uint64_t i = 0; i < n; ++i) {
      const double rad = std::pow(ad + uniform01(rng) * (bd - ad), 1.0 / double(D));
      const Vec<D> y = rad * unit_direction<D>(rng);
      if (uniform01(rng) * bound < p.f(dist(y, X))) best = std::min(best, rad);
    }
    if (best < std::numeric_limits<double>::infinity()) return best;
    if (b >= x) return x;
    a = b;
    b = b + std::min(b, 0.5 * (x - b));
    if (x - b <= p.r_c()) b = x;
  }
}

template <std::size_t D>
struct RegenTrace {
  CouplingMode mode = CouplingMode::directed;
  ModelParams params;
  std::vector<Vec<D>> x;      // X_0 .. X_n
  std::vector<double> rho;    // rho_k of the auxiliary process at X_k
  std::vector<double> y, z, w;
  std::vector<bool> regen;    // W_k == 0
  std::vector<std::size_t> times;  // regenerative times, theta_0 = 0 first
  bool absorbed = false;
  std::string tag;  // "no-theory" in the band d < beta <= d+1

  std::size_t steps() const { return x.empty() ? 0 : x.size() - 1; }

  // Coordinate whose increments are the per-step progress of the mode.
  double level(std::size_t k) const {
    if (mode == CouplingMode::directed) return x[k][0];
    if (mode == CouplingMode::radial) return -norm(x[k]);
    return -std::log(norm(x[k]));
  }
};

// Runs the navigator for `steps` steps (or until absorption) alongside the
// auxiliary processes and the Y/Z/W recursions of the chosen coupling.
template <std::size_t D>
RegenTrace<D> coupled_walk(const ModelParams& p, CouplingMode mode, const Vec<D>& start, std::size_t steps,
                           std::uint64_t seed) {
  p.validate();
  RegenTrace<D> tr;
  tr.mode = mode;
  tr.params = p;
  if (mode == CouplingMode::directed) {
    if (!(p.beta > p.d)) throw InputError("directed coupling needs beta > d");
    require(start == Vec<D>{}, "directed coupling starts at O");
  } else if (mode == CouplingMode::radial) {
    if (!(p.beta > p.d)) throw InputError("radial coupling needs beta > d");
    require(norm(start) > 0.0, "radial coupling needs a start away from O");
  } else {
    if (!(p.beta <= p.d && p.beta > p.d - 2)) throw InputError("scaled coupling needs d-2 < beta <= d");
    require(norm(start) > 0.0, "scaled coupling needs a start away from O");
  }
  if (p.beta > p.d && p.beta <= p.d + 1) tr.tag = "no-theory";
  const RadialMass rm(p);
  const std::uint64_t rkey = stream_key(seed, "regen-aux");
  NavState<D> st(p, mode == CouplingMode::directed ? NavMode::directed : NavMode::toward_origin, start, seed);

  auto aux = [&](std::size_t k, const Vec<D>& X) {
    Rng rng(derive_key(rkey, k));
    if (mode == CouplingMode::scaled) return norm(X) - sample_inner_radius(p, X, rng);
    return sample_outer_radius(rm, rng);
  };

  tr.x.push_back(st.current_point());
  tr.rho.push_back(aux(0, tr.x[0]));
  if (mode == CouplingMode::directed) {
    tr.y.push_back(0.0);
    tr.z.push_back(0.0);
  } else {
    tr.y.push_back(norm(start));
    tr.z.push_back(norm(start));
  }
  tr.w.push_back(0.0);
  tr.regen.push_back(true);
  tr.times.push_back(0);

  for (std::size_t k = 1; k <= steps; ++k) {
    if (st.absorbed()) {
      tr.absorbed = true;
      break;
    }
    st.advance();
    const Vec<D> X = st.current_point();
    const Vec<D>& prev = tr.x.back();
    double y, z, w;
    if (mode == CouplingMode::directed) {
      const double u = X[0];
      y = std::max(u, prev[0] + tr.rho.back());
      z = std::max(tr.z.back(), y);
      w = z - u;
    } else {
      const double xn = norm(X);
      y = std::max(0.0, std::min(norm(prev) - tr.rho.back(), xn));
      z = std::min(tr.z.back(), y);
      if (mode == CouplingMode::radial) w = xn - z;
      else w = xn == 0.0 ? 0.0 : (z == 0.0 ? std::numeric_limits<double>::infinity() : std::log(xn / z));
    }
    tr.x.push_back(X);
    tr.rho.push_back(st.absorbed() ? 0.0 : aux(k, X));
    tr.y.push_back(y);
    tr.z.push_back(z);
    tr.w.push_back(w);
    const bool r = w == 0.0;
    tr.regen.push_back(r);
    if (r) tr.times.push_back(k);
  }
  if (st.absorbed()) tr.absorbed = true;
  return tr;
}

struct CycleStats {
  std::vector<double> length, progress;
  double mu_hat = 0.0;        // sum progress / sum length
  double mu_se = 0.0;         // delta-method standard error of the ratio
  double plain_mean = 0.0;    // (level_n - level_0) / n
  double plain_se = 0.0;      // batch means over the whole walk
  double regen_fraction = 0.0;
  double lag1_p_length = 1.0;
  double lag1_p_progress = 1.0;
};

template <std::size_t D>
CycleStats regen_analysis(const RegenTrace<D>& tr, std::size_t perms = 999, std::uint64_t seed = 0) {
  if (tr.times.size() < 3) throw InsufficientData("regeneration analysis needs at least 2 complete cycles");
  CycleStats cs;
  for (std::size_t i = 0; i + 1 < tr.times.size(); ++i) {
    const std::size_t a = tr.times[i], b = tr.times[i + 1];
    cs.length.push_back(double(b - a));
    cs.progress.push_back(tr.level(b) - tr.level(a));
  }
  const double sl = std::accumulate(cs.length.begin(), cs.length.end(), 0.0);
  const double sp = std::accumulate(cs.progress.begin(), cs.progress.end(), 0.0);
  cs.mu_hat = sp / sl;
  const double n = double(cs.length.size());
  std::vector<double> resid;
  for (std::size_t i = 0; i < cs.length.size(); ++i) resid.push_back(cs.progress[i] - cs.mu_hat * cs.length[i]);
  cs.mu_se = std::sqrt(variance(resid) / n) / (sl / n);

  const std::size_t steps = tr.steps();
  std::vector<double> inc;
  for (std::size_t k = 0; k < steps; ++k) inc.push_back(tr.level(k + 1) - tr.level(k));
  cs.plain_mean = (tr.level(steps) - tr.level(0)) / double(steps);
  if (inc.size() >= 20) cs.plain_se = batch_means(inc, 20).se;
  std::size_t nr = 0;
  for (std::size_t k = 1; k < tr.regen.size(); ++k) nr += tr.regen[k];
  cs.regen_fraction = steps ? double(nr) / double(steps) : 0.0;
  Rng rng = Rng::stream(seed, "regen-perm");
  cs.lag1_p_length = lag1_permutation_pvalue(cs.length, perms, rng);
  cs.lag1_p_progress = lag1_permutation_pvalue(cs.progress, perms, rng);
  return cs;
}

template <std::size_t D>
void write_trace_csv(std::ostream& os, const RegenTrace<D>& tr) {
  CsvWriter w(os);
  w.field("k");
  for (std::size_t i = 0; i < D; ++i) w.field("x" + std::to_string(i));
  w.field("rho").field("y").field("z").field("w").field("is_regen");
  w.end_row();
  for (std::size_t k = 0; k < tr.x.size(); ++k) {
    w.field(k);
    for (double c : tr.x[k]) w.field(c);
    w.field(tr.rho[k]).field(tr.y[k]).field(tr.z[k]).field(tr.w[k]).field(int(tr.regen[k]));
    w.end_row();
  }
}

// GI/GI/inf largest residual service recursion W_n = max(W_{n-1} - tau, sigma).
enum class ServiceLaw { pareto, constant, uniform, zero };
enum class ArrivalLaw { bernoulli, constant };

struct QueueParams {
  ServiceLaw service = ServiceLaw::pareto;
  double alpha = 3.0;       // Pareto exponent, P(sigma > t | sigma > 0) = t^-alpha for t >= 1
  double p_zero = 0.5;      // P(sigma = 0)
  double service_value = 1.0;  // constant value or uniform upper bound
  ArrivalLaw arrival = ArrivalLaw::bernoulli;
  double tau_p = 0.5;       // P(tau = 1)
  double tau_value = 1.0;   // constant interarrival
  double y0 = 0.0;          // initial workload

  void validate() const {
    require(p_zero >= 0.0 && p_zero <= 1.0, "p_zero must lie in [0,1]");
    require(tau_p >= 0.0 && tau_p <= 1.0, "tau_p must lie in [0,1]");
    require(alpha > 0.0, "alpha must be positive");
    require(y0 >= 0.0, "initial workload must be nonnegative");
    require(service_value >= 0.0 && tau_value >= 0.0, "queue values must be nonnegative");
  }

  double sigma(Rng& r) const {
    switch (service) {
      case ServiceLaw::zero: return 0.0;
      case ServiceLaw::constant: return uniform01(r) < p_zero ? 0.0 : service_value;
      case ServiceLaw::uniform: return uniform01(r) < p_zero ? 0.0 : service_value * uniform01(r);
      case ServiceLaw::pareto:
        if (uniform01(r) < p_zero) return 0.0;
        return std::pow(uniform_pos(r), -1.0 / alpha);
    }
    return 0.0;
  }

  double tau(Rng& r) const {
    if (arrival == ArrivalLaw::constant) return tau_value;
    return uniform01(r) < tau_p ? 1.0 : 0.0;
  }
};

struct QueueRun {
  std::vector<double> w;  // W_0 .. W_n
  std::optional<std::size_t> theta;  // first n >= 1 with W_n = 0; empty when censored
};

inline QueueRun giginf_simulate(const QueueParams& qp, std::size_t n, Rng& rng) {
  qp.validate();
  require(n >= 1, "queue simulation needs n >= 1");
  QueueRun run;
  run.w.reserve(n + 1);
  run.w.push_back(qp.y0);
  for (std::size_t i = 1; i <= n; ++i) {
    const double tau = qp.tau(rng);
    const double sigma = qp.sigma(rng);
    const double w = std::max(run.w.back() - tau, sigma);
    run.w.push_back(w);
    if (w == 0.0 && !run.theta) run.theta = i;
  }
  return run;
}

// Runs until the first emptying time (or the cap), returning theta and the
// visited workloads W_0 .. W_{theta-1}.
inline std::optional<std::size_t> giginf_cycle(const QueueParams& qp, std::size_t cap, Rng& rng,
                                               std::vector<double>* visited = nullptr) {
  double w = qp.y0;
  for (std::size_t i = 1; i <= cap; ++i) {
    if (visited) visited->push_back(w);
    w = std::max(w - qp.tau(rng), qp.sigma(rng));
    if (w == 0.0) return i;
  }
  return std::nullopt;
}

inline void write_queue_csv(std::ostream& os, const QueueRun& run) {
  CsvWriter w(os);
  w.field("n").field("w");
  w.end_row();
  for (std::size_t i = 0; i < run.w.size(); ++i) {
    w.field(i).field(run.w[i]);
    w.end_row();
  }
}

template <std::size_t D>
nlohmann::ordered_json regen_summary(const RegenTrace<D>& tr, const std::optional<CycleStats>& cs) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(tr.mode);
  j["steps"] = tr.steps();
  j["absorbed"] = tr.absorbed;
  if (!tr.tag.empty()) j["tag"] = tr.tag;
  j["theta"] = tr.times;
  if (cs) {
    j["cycles"] = cs->length.size();
    j["mu_hat"] = cs->mu_hat;
    j["mu_se"] = cs->mu_se;
    j["plain_mean"] = cs->plain_mean;
    j["plain_se"] = cs->plain_se;
    j["regen_fraction"] = cs->regen_fraction;
    j["lag1_p_length"] = cs->lag1_p_length;
    j["lag1_p_progress"] = cs->lag1_p_progress;
  }
  return j;
}

}  // namespace ppnav
