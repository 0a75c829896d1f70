#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <ppnav/ppnav.hpp>

#ifndef PPNAV_VERSION
#define PPNAV_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using namespace ppnav;

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw RuntimeFailure("sha256 digest failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw RuntimeFailure("cannot read back " + p.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct Common {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out_dir;
  std::string stem;
  std::string plan;  // experiment plan; a config file elsewhere
  std::string config;
};

struct Run {
  fs::path dir;
  std::vector<fs::path> files;

  void write(const std::string& name, const std::string& text) {
    const auto p = dir / name;
    write_text_file(p, text);
    files.push_back(p);
  }
};

void add_common(CLI::App* sub, Common& c, const std::string& stem) {
  c.stem = stem;
  sub->add_option("--seed", c.seed, "master seed")->capture_default_str();
  sub->add_option("--threads", c.threads, "worker threads (0 = all cores)")->capture_default_str();
  sub->add_option("--out-dir", c.out_dir, "output directory (default $PPNAV_OUT_DIR or .)");
  sub->add_option("--out", c.stem, "output file stem")->capture_default_str();
  sub->add_option("--config", c.config, "key=value file mirroring the flags");
}

ModelParams model(int d, double beta, double c) {
  ModelParams p;
  p.d = d;
  p.beta = beta;
  p.c = c;
  p.validate();
  return p;
}

NavMode parse_mode(const std::string& s) {
  if (s == "toward-origin") return NavMode::toward_origin;
  if (s == "directed") return NavMode::directed;
  throw InputError("unknown navigation mode '" + s + "'");
}

template <std::size_t D>
Vec<D> parse_point(const std::string& s) {
  std::vector<double> v;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      v.push_back(parse_double(trim(item)));
    } catch (const std::exception&) {
      throw InputError("bad coordinate '" + item + "' in '" + s + "'");
    }
  }
  if (v.size() != D) throw InputError("point '" + s + "' needs " + std::to_string(D) + " coordinates");
  Vec<D> p{};
  for (std::size_t i = 0; i < D; ++i) p[i] = v[i];
  return p;
}

template <std::size_t D>
Window<D> parse_window(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(trim(item));
  auto num = [&](const std::string& x) {
    try {
      return parse_double(x);
    } catch (const std::exception&) {
      throw InputError("bad window '" + s + "'");
    }
  };
  Window<D> w;
  if (parts.size() == 2 && parts[0] == "ball") w = Window<D>::ball(num(parts[1]));
  else if (parts.size() == 3 && parts[0] == "annulus") w = Window<D>::annulus(num(parts[1]), num(parts[2]));
  else throw InputError("window must be ball:R or annulus:r:R, got '" + s + "'");
  w.validate();
  return w;
}

template <class F>
decltype(auto) with_dim(int d, F&& f, bool allow3 = true) {
  if (d == 2) return f.template operator()<2>();
  if (d == 3 && allow3) return f.template operator()<3>();
  throw InputError("unsupported dimension d = " + std::to_string(d));
}

std::string to_csv(const std::function<void(std::ostream&)>& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

// Builds the toward-origin navigation tree on a Palm window around O.
struct TreeOpts {
  std::string kind = "radial";
  int d = 2;
  double beta = 3.0, c = 1.0, radius = 30.0;
};

template <std::size_t D>
std::pair<NavTree, std::vector<Vec<D>>> make_tree(const TreeOpts& o, std::uint64_t seed, unsigned threads) {
  const auto ps = palm_add(sample_ppp(Window<D>::ball(o.radius), seed), {Vec<D>{}});
  if (o.kind == "radial") {
    const SpatialIndex<D> idx(ps);
    return {build_radial_tree(ps, idx, threads), ps.points};
  }
  if (o.kind == "small-world") {
    DenseSmallWorld<D> g(ps, model(o.d, o.beta, o.c), seed);
    return {build_small_world_tree(g, threads), ps.points};
  }
  if (o.kind == "compass") {
    if constexpr (D == 2) {
      const auto tri = triangulate(ps);
      return {build_compass_tree(tri, threads), ps.points};
    } else {
      throw InputError("compass navigation needs d = 2");
    }
  }
  throw InputError("unknown tree kind '" + o.kind + "'");
}

std::vector<double> parse_list(const std::string& s) {
  Plan p;
  p.set("v", s);
  return p.list("v");
}

// --config / --plan pre-scan: file keys become flags placed before the
// command-line ones, so flags given on the command line win.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  if (args.size() < 2) return args;
  const std::string sub = args[1];
  const CLI::App* sc = nullptr;
  for (const auto* s : app.get_subcommands({}))
    if (s->get_name() == sub) sc = s;
  if (!sc) return args;
  std::vector<std::string> rest;
  std::string cfg;
  for (std::size_t i = 2; i < args.size(); ++i) {
    const std::string& a = args[i];
    const bool is_cfg = a == "--config" || (a == "--plan" && sub != "experiment");
    const bool is_cfg_eq = a.rfind("--config=", 0) == 0 || (sub != "experiment" && a.rfind("--plan=", 0) == 0);
    if (is_cfg) {
      if (i + 1 >= args.size()) throw InputError(a + " needs a file argument");
      cfg = args[++i];
    } else if (is_cfg_eq) {
      cfg = a.substr(a.find('=') + 1);
    } else {
      rest.push_back(a);
    }
  }
  if (cfg.empty()) return args;
  const Plan p = Plan::load(cfg);
  std::vector<std::string> out{args[0], sub};
  for (const auto& k : p.keys()) {
    if (k == "config" || k == "plan" || !sc->get_option_no_throw("--" + k))
      throw InputError("unknown config key '" + k + "' in " + cfg);
    out.push_back("--" + k + "=" + p.str(k));
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

nlohmann::ordered_json resolved_options(const CLI::App* sub) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto* o : sub->get_options()) {
    if (o->get_name() == "--help" || o->get_lnames().empty()) continue;
    const std::string name = o->get_lnames().front();
    if (name == "config" || (name == "plan" && sub->get_name() != "experiment")) continue;
    if (o->count() > 0) {
      const auto r = o->reduced_results();
      if (r.size() == 1) j[name] = r.front();
      else j[name] = r;
    } else {
      j[name] = o->get_default_str();
    }
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Navigation on Poisson point processes: sampling, navigation trees, analytic references, experiments",
               "ppnav"};
  app.set_version_flag("--version", std::string(PPNAV_VERSION));
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  Common common;

  // sample
  auto* s_sample = app.add_subcommand("sample", "sample a Poisson point process in a window");
  int sample_d = 2;
  std::string sample_window = "ball:10";
  bool sample_palm = false;
  s_sample->add_option("--d", sample_d, "dimension")->capture_default_str();
  s_sample->add_option("--window", sample_window, "ball:R or annulus:r:R")->capture_default_str();
  s_sample->add_flag("--palm-origin", sample_palm, "add an atom at O");

  // navigate
  auto* s_nav = app.add_subcommand("navigate", "run one navigation path");
  std::string nav_kind = "small-world", nav_mode = "toward-origin", nav_start;
  int nav_d = 2;
  double nav_beta = 3.0, nav_c = 1.0, nav_window = 0.0;
  std::size_t nav_max_steps = 10'000'000;
  s_nav->add_option("--kind", nav_kind, "radial, compass or small-world")
      ->check(CLI::IsMember({"radial", "compass", "small-world"}))
      ->capture_default_str();
  s_nav->add_option("--mode", nav_mode, "toward-origin or directed")
      ->check(CLI::IsMember({"toward-origin", "directed"}))
      ->capture_default_str();
  s_nav->add_option("--start", nav_start, "start point, comma separated")->required();
  s_nav->add_option("--d", nav_d, "dimension")->capture_default_str();
  s_nav->add_option("--beta", nav_beta, "connection exponent")->capture_default_str();
  s_nav->add_option("--c", nav_c, "connection scale")->capture_default_str();
  s_nav->add_option("--window-radius", nav_window, "ball window for radial/compass (0 = 2|start| + 10)")
      ->capture_default_str();
  s_nav->add_option("--max-steps", nav_max_steps, "step limit")->capture_default_str();

  // tree and render share the tree construction flags
  TreeOpts tree_o, render_o;
  auto tree_flags = [](CLI::App* s, TreeOpts& o) {
    s->add_option("--kind", o.kind, "radial, compass or small-world")
        ->check(CLI::IsMember({"radial", "compass", "small-world"}))
        ->capture_default_str();
    s->add_option("--d", o.d, "dimension")->capture_default_str();
    s->add_option("--beta", o.beta, "connection exponent (small-world)")->capture_default_str();
    s->add_option("--c", o.c, "connection scale (small-world)")->capture_default_str();
    s->add_option("--radius", o.radius, "ball window radius")->capture_default_str();
  };
  auto* s_tree = app.add_subcommand("tree", "build the navigation tree of a Palm window");
  tree_flags(s_tree, tree_o);
  auto* s_render = app.add_subcommand("render", "render a d=2 navigation tree as SVG");
  tree_flags(s_render, render_o);
  SvgStyle svg_style;
  s_render->add_option("--size", svg_style.size, "canvas side in px")->capture_default_str();
  s_render->add_option("--stroke", svg_style.stroke, "edge stroke width")->capture_default_str();

  // analytic
  auto* s_an = app.add_subcommand("analytic", "evaluate analytic reference quantities");
  std::string an_q = "progress-tail-constant", an_s = "0.5";
  int an_d = 2;
  double an_beta = 5.0, an_c = 1.0, an_x = 1e4, an_theta = 0.1, an_u = 0.5;
  s_an->add_option("--quantity", an_q, "quantity to evaluate")
      ->check(CLI::IsMember({"progress-tail-constant", "progress-tail-exact", "q-limit-tail", "q-tail-exact",
                             "f-tilde-tail", "mu-tilde", "chord-points", "loglog-limit"}))
      ->capture_default_str();
  s_an->add_option("--d", an_d, "dimension")->capture_default_str();
  s_an->add_option("--beta", an_beta, "connection exponent")->capture_default_str();
  s_an->add_option("--c", an_c, "connection scale")->capture_default_str();
  s_an->add_option("--s", an_s, "argument list, comma separated")->capture_default_str();
  s_an->add_option("--x", an_x, "|X| for finite-|X| laws")->capture_default_str();
  s_an->add_option("--theta", an_theta, "chord angle")->capture_default_str();
  s_an->add_option("--u", an_u, "chord offset")->capture_default_str();

  // regen
  auto* s_regen = app.add_subcommand("regen", "coupled walk with regeneration times");
  std::string regen_mode = "directed";
  int regen_d = 2;
  double regen_beta = 5.0, regen_c = 1.0, regen_start = 100.0;
  std::size_t regen_steps = 10000, regen_perms = 999;
  bool regen_analyze = false;
  s_regen->add_option("--mode", regen_mode, "directed, radial or scaled")
      ->check(CLI::IsMember({"directed", "radial", "scaled"}))
      ->capture_default_str();
  s_regen->add_option("--d", regen_d, "dimension")->capture_default_str();
  s_regen->add_option("--beta", regen_beta, "connection exponent")->capture_default_str();
  s_regen->add_option("--c", regen_c, "connection scale")->capture_default_str();
  s_regen->add_option("--steps", regen_steps, "walk length")->capture_default_str();
  s_regen->add_option("--start-norm", regen_start, "|X_0| for radial/scaled coupling")->capture_default_str();
  s_regen->add_option("--perms", regen_perms, "permutations for lag-1 tests")->capture_default_str();
  s_regen->add_flag("--analyze", regen_analyze, "add cycle statistics");

  // queue
  auto* s_q = app.add_subcommand("queue", "G/G/inf workload recursion");
  QueueParams qp;
  std::string q_service = "pareto", q_arrival = "bernoulli";
  std::size_t q_n = 1000;
  s_q->add_option("--service", q_service, "pareto, constant, uniform or zero")
      ->check(CLI::IsMember({"pareto", "constant", "uniform", "zero"}))
      ->capture_default_str();
  s_q->add_option("--alpha", qp.alpha, "Pareto exponent")->capture_default_str();
  s_q->add_option("--p-zero", qp.p_zero, "P(sigma = 0)")->capture_default_str();
  s_q->add_option("--service-value", qp.service_value, "constant/uniform service scale")->capture_default_str();
  s_q->add_option("--arrival", q_arrival, "bernoulli or constant")
      ->check(CLI::IsMember({"bernoulli", "constant"}))
      ->capture_default_str();
  s_q->add_option("--tau-p", qp.tau_p, "P(tau = 1)")->capture_default_str();
  s_q->add_option("--tau-value", qp.tau_value, "constant interarrival")->capture_default_str();
  s_q->add_option("--y0", qp.y0, "initial workload")->capture_default_str();
  s_q->add_option("--n", q_n, "steps")->capture_default_str();

  // experiment
  auto* s_exp = app.add_subcommand("experiment", "run an experiment plan and emit its report");
  std::vector<std::string> exp_set;
  bool exp_no_csv = false;
  s_exp->add_option("--plan", common.plan, "plan file")->required();
  s_exp->add_option("--set", exp_set, "override a plan key, key=value")->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  s_exp->add_flag("--no-csv", exp_no_csv, "skip curve CSV files");

  const std::vector<std::pair<CLI::App*, std::string>> subs{
      {s_sample, "points"}, {s_nav, "path"},  {s_tree, "tree"},   {s_render, "tree"},
      {s_an, "analytic"},   {s_regen, "regen"}, {s_q, "queue"}, {s_exp, ""}};
  for (auto& [s, stem] : subs) add_common(s, common, stem);
  // each add_common resets the stem; the chosen subcommand sets it below
  common.stem.clear();
  for (auto* s : {s_sample, s_nav, s_tree, s_render, s_an, s_regen, s_q})
    s->add_option("--plan", common.config, "alias of --config");

  std::vector<std::string> args(argv, argv + argc);
  try {
    args = expand_config(app, args);
    std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
    app.parse(std::move(rev));
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    std::cout << PPNAV_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "ppnav: error[input]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ppnav: error[input]: " << e.what() << "\n";
    return 1;
  }

  CLI::App* sub = app.get_subcommands().front();
  if (common.stem.empty())
    for (auto& [s, stem] : subs)
      if (s == sub) common.stem = stem;
  const auto t0 = std::chrono::steady_clock::now();
  const std::string started = utc_now();

  try {
    Run run;
    std::string dir = common.out_dir;
    if (dir.empty()) {
      const char* env = std::getenv("PPNAV_OUT_DIR");
      dir = env && *env ? env : ".";
    }
    run.dir = dir;
    std::error_code ec;
    fs::create_directories(run.dir, ec);
    if (ec || !fs::is_directory(run.dir)) throw RuntimeFailure("cannot create output directory " + dir);
    const unsigned threads = common.threads == 0 ? default_threads() : common.threads;
    nlohmann::ordered_json extra = nlohmann::ordered_json::object();
    const std::string& stem = common.stem;

    if (sub == s_sample) {
      with_dim(sample_d, [&]<std::size_t D>() {
        auto ps = sample_ppp(parse_window<D>(sample_window), common.seed);
        if (sample_palm) ps = palm_add(ps, {Vec<D>{}});
        run.write(stem + ".csv", to_csv([&](std::ostream& os) { write_points_csv(os, ps); }));
        extra["count"] = ps.size();
        return 0;
      });
    } else if (sub == s_nav) {
      with_dim(nav_d, [&]<std::size_t D>() {
        const Vec<D> start = parse_point<D>(nav_start);
        const NavMode mode = parse_mode(nav_mode);
        const NavLimits lim{nav_max_steps};
        Path<D> path;
        if (nav_kind == "small-world") {
          path = navigate_small_world<D>(model(nav_d, nav_beta, nav_c), start, mode, lim, common.seed);
        } else {
          const double R = nav_window > 0.0 ? nav_window : 2.0 * norm(start) + 10.0;
          std::vector<Vec<D>> atoms{Vec<D>{}};
          if (start != Vec<D>{}) atoms.push_back(start);
          const auto ps = palm_add(sample_ppp(Window<D>::ball(R), common.seed), atoms);
          const std::size_t s0 = start == Vec<D>{} ? 0 : 1;
          if (nav_kind == "radial") {
            const SpatialIndex<D> idx(ps);
            path = navigate_radial(ps, idx, s0, mode, lim);
          } else if constexpr (D == 2) {
            path = navigate_compass(triangulate(ps), s0, mode, lim);
          } else {
            throw InputError("compass navigation needs d = 2");
          }
        }
        run.write(stem + ".csv", to_csv([&](std::ostream& os) { write_path_csv(os, path); }));
        run.write(stem + ".json", path_sidecar(path).dump(2) + "\n");
        extra["H"] = path.H();
        extra["termination"] = to_string(path.termination);
        return 0;
      });
    } else if (sub == s_tree) {
      with_dim(tree_o.d, [&]<std::size_t D>() {
        const auto tp = make_tree<D>(tree_o, common.seed, threads);
        const auto& t = tp.first;
        const auto& pts = tp.second;
        run.write(stem + ".csv", to_csv([&](std::ostream& os) { write_tree_csv(os, t); }));
        PointSet<D> ps;
        ps.points = pts;
        run.write(stem + ".points.csv", to_csv([&](std::ostream& os) { write_points_csv(os, ps); }));
        nlohmann::ordered_json j;
        j["nodes"] = t.size();
        j["root"] = t.root;
        j["max_h"] = t.max_h();
        j["ball_profile"] = tree_ball_profile(t);
        run.write(stem + ".json", j.dump(2) + "\n");
        extra["nodes"] = t.size();
        return 0;
      });
    } else if (sub == s_render) {
      if (render_o.d != 2) throw InputError("render needs d = 2, got d = " + std::to_string(render_o.d));
      const auto tp = make_tree<2>(render_o, common.seed, threads);
      run.write(stem + ".svg", render_tree_svg(tp.first, tp.second, svg_style));
      extra["segments"] = tp.first.size() - 1;
    } else if (sub == s_an) {
      const ModelParams p = model(an_d, an_beta, an_c);
      nlohmann::ordered_json j;
      j["quantity"] = an_q;
      j["d"] = an_d;
      j["beta"] = an_beta;
      j["c"] = an_c;
      auto table = [&](auto&& fn) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (double s : parse_list(an_s)) rows.push_back({{"s", s}, {"value", num(fn(s))}});
        j["values"] = rows;
      };
      if (an_q == "progress-tail-constant") {
        const auto k = progress_tail_constant(p);
        j["K"] = k.K;
        j["K_corrected"] = k.K_corrected;
        j["Lambda0"] = k.Lambda0;
        j["error"] = k.error;
        j["converged"] = k.converged;
      } else if (an_q == "mu-tilde") {
        const auto m = mu_tilde(p);
        j["mu_tilde"] = m.value;
        j["error"] = m.error;
        j["simpson"] = m.simpson;
        j["cutoff"] = m.cutoff;
        j["tail_bound"] = m.tail_bound;
        j["converged"] = m.converged;
        j["schemes_agree"] = m.schemes_agree;
      } else if (an_q == "loglog-limit") {
        j["limit"] = loglog_limit(an_d, an_beta);
        j["alpha"] = contraction_exponent(p);
      } else if (an_q == "chord-points") {
        const auto [a, b] = chord_points(an_theta, an_u);
        j["A"] = a;
        j["B"] = b;
      } else if (an_q == "progress-tail-exact") {
        table([&](double t) { return progress_tail_exact(t, p); });
      } else if (an_q == "q-limit-tail") {
        table([&](double s) { return q_limit_tail(s, p); });
      } else if (an_q == "q-tail-exact") {
        table([&](double s) { return q_tail_exact(s, p, an_x); });
        j["x"] = an_x;
      } else if (an_q == "f-tilde-tail") {
        table([&](double s) { return f_tilde_tail(s, p); });
      }
      const std::string text = j.dump(2) + "\n";
      std::cout << text;
      run.write(stem + ".json", text);
    } else if (sub == s_regen) {
      with_dim(regen_d, [&]<std::size_t D>() {
        const ModelParams p = model(regen_d, regen_beta, regen_c);
        const CouplingMode mode = parse_coupling_mode(regen_mode);
        Vec<D> start{};
        if (mode != CouplingMode::directed) start[0] = regen_start;
        const auto tr = coupled_walk<D>(p, mode, start, regen_steps, common.seed);
        std::optional<CycleStats> cs;
        if (regen_analyze) cs = regen_analysis(tr, regen_perms, common.seed);
        run.write(stem + ".csv", to_csv([&](std::ostream& os) { write_trace_csv(os, tr); }));
        run.write(stem + ".json", regen_summary(tr, cs).dump(2) + "\n");
        extra["regenerations"] = tr.times.size();
        return 0;
      });
    } else if (sub == s_q) {
      qp.service = q_service == "pareto"     ? ServiceLaw::pareto
                   : q_service == "constant" ? ServiceLaw::constant
                   : q_service == "uniform"  ? ServiceLaw::uniform
                                             : ServiceLaw::zero;
      qp.arrival = q_arrival == "constant" ? ArrivalLaw::constant : ArrivalLaw::bernoulli;
      Rng rng = Rng::stream(common.seed, "queue");
      const auto qr = giginf_simulate(qp, q_n, rng);
      run.write(stem + ".csv", to_csv([&](std::ostream& os) { write_queue_csv(os, qr); }));
      nlohmann::ordered_json j;
      j["n"] = q_n;
      j["theta"] = qr.theta ? nlohmann::ordered_json(*qr.theta) : nlohmann::ordered_json(nullptr);
      run.write(stem + ".json", j.dump(2) + "\n");
    } else if (sub == s_exp) {
      Plan plan = Plan::load(common.plan);
      for (const auto& kv : exp_set) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw InputError("--set expects key=value, got '" + kv + "'");
        plan.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
      }
      if (s_exp->get_option("--seed")->count() > 0) plan.set("seed", std::to_string(common.seed));
      RunContext ctx;
      ctx.seed = plan.has("seed") ? plan.count("seed", 1) : common.seed;
      ctx.threads = threads;
      const auto r = run_plan(plan, ctx);
      if (common.stem.empty()) common.stem = r.op;
      const std::string st = common.stem;
      for (const auto& p : emit_report(r, run.dir, st, !exp_no_csv)) run.files.push_back(p);
      common.seed = ctx.seed;
      extra["pass"] = r.all_pass();
      std::cout << st << ": " << (r.all_pass() ? "all comparisons pass" : "some comparisons fail") << "\n";
      for (const auto& c : r.comparisons)
        std::cout << "  " << (c.pass ? "PASS " : "FAIL ") << c.name << " observed=" << format_double(c.observed)
                  << " reference=" << format_double(c.reference) << " rule=" << c.rule << "\n";
    }

    nlohmann::ordered_json m;
    m["schema"] = "ppnav.manifest/1";
    m["tool"] = "ppnav";
    m["version"] = PPNAV_VERSION;
    m["command"] = sub->get_name();
    m["argv"] = std::vector<std::string>(args.begin() + 1, args.end());
    m["config"] = resolved_options(sub);
    m["seed"] = common.seed;
    m["threads"] = threads;
    m["started_utc"] = started;
    m["wall_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    m["summary"] = extra;
    m["outputs"] = nlohmann::ordered_json::array();
    for (const auto& f : run.files) {
      const std::string data = read_file(f);
      m["outputs"].push_back({{"path", f.filename().string()}, {"bytes", data.size()}, {"sha256", sha256_hex(data)}});
    }
    const std::string mstem = common.stem.empty() ? sub->get_name() : common.stem;
    write_text_file(run.dir / (mstem + ".manifest.json"), m.dump(2) + "\n");
    return 0;
  } catch (const InputError& e) {
    std::cerr << "ppnav: error[input]: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "ppnav: error[input]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "ppnav: error[runtime]: " << e.what() << "\n";
    return 2;
  }
}
