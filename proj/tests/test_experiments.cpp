#include <gtest/gtest.h>

#include <ppnav/experiments.hpp>

using namespace ppnav;

namespace {

std::string body(EstimateReport r) {
  r.provenance.erase("threads");
  return dump_report(r);
}

EstimateReport run(const std::string& text, unsigned threads = 1, std::uint64_t seed = 1) {
  return run_plan(Plan::parse(text), RunContext{seed, threads});
}

const char* small_plans[] = {
    "op=ppp_sanity\nd=2\nradius=5\nsamples=200\n",
    "op=progress_distribution\nregime=progress-tail\nd=2\nbeta=5\nsamples=2000\n",
    "op=progress_distribution\nregime=q-limit\nd=2\nbeta=1\nx=100\nsamples=300\n",
    "op=progress_distribution\nregime=f-tilde\nd=2\nbeta=2\nx=100\nsamples=300\n",
    "op=hop_scaling\nregime=log\nd=2\nbeta=2\nladder=1e2,1e3\npaths=20\n",
    "op=hop_scaling\nregime=loglog\nd=2\nbeta=1\nladder=1e2,1e3,1e4\ncontraction_samples=50\n",
    "op=hop_scaling\nregime=linear\nd=2\nbeta=5\nladder=50,100\npaths=10\n",
    "op=regen_consistency\nd=2\nbeta=5\nsteps=2000\nperms=19\n",
    "op=queue_tails\nruns=20000\nalpha=3\ntheta_min_count=10\nm_min_count=50\n",
    "op=shape_profile\nd=2\nbeta=6\nradius=40\ntrees=2\nk_min=5\nregen_steps=2000\n",
    "op=deviation_tail\nd=2\nbeta=6\nladder=1e2,3e2\npaths=10\ncone_radius=20\n",
    "op=local_limit_compare\nd=2\nbeta=5\nx=200\nsamples=60\nperms=19\n",
    "op=exactness\ndelaunay_sets=1\ndelaunay_points=200\nquery_trials=5\npaths=3\nlazy_dense_samples=40\nrotation_sets=1\n",
};

}  // namespace

TEST(Registry, NamesEveryOp) {
  const auto& reg = experiment_registry();
  for (const char* op : {"ppp_sanity", "progress_distribution", "hop_scaling", "regen_consistency", "queue_tails",
                         "shape_profile", "deviation_tail", "local_limit_compare", "exactness"})
    EXPECT_EQ(reg.count(op), 1u) << op;
}

TEST(RunPlan, InputErrors) {
  EXPECT_THROW(run("op=nope\n"), InputError);
  EXPECT_THROW(run("op=ppp_sanity\nradius=5\nsamples=10\nbogus=1\n"), InputError);
  EXPECT_THROW(run("op=hop_scaling\nregime=log\nbeta=2\nladder=1e3,1e2\npaths=2\n"), InputError);
  EXPECT_THROW(run("op=progress_distribution\nregime=q-limit\nbeta=3\nx=100\nsamples=10\n"), InputError);
  EXPECT_THROW(run("op=progress_distribution\nregime=sideways\nbeta=3\n"), InputError);
}

TEST(RunPlan, PlanSeedOverridesContext) {
  const std::string p = "op=ppp_sanity\nd=2\nradius=5\nsamples=50\nseed=9\n";
  EXPECT_EQ(dump_report(run(p, 1, 1)), dump_report(run(p, 1, 2)));
  EXPECT_EQ(run(p).provenance["seed"], 9);
}

TEST(RunPlan, EveryOpIsDeterministicAndThreadInvariant) {
  for (const char* text : small_plans) {
    SCOPED_TRACE(text);
    const auto a = run(text, 1), b = run(text, 1), c = run(text, 3);
    EXPECT_EQ(dump_report(a), dump_report(b));
    EXPECT_EQ(body(a), body(c));
    EXPECT_FALSE(a.comparisons.empty());
    EXPECT_EQ(a.provenance["plan"], Plan::parse(text).text());
  }
}

TEST(RunPlan, SeedChangesSamples) {
  const std::string p = "op=ppp_sanity\nd=2\nradius=5\nsamples=50\n";
  EXPECT_NE(body(run(p, 1, 1)), body(run(p, 1, 2)));
}

TEST(Exactness, SmallRunPasses) {
  const auto r = run(small_plans[12]);
  for (const auto& c : r.comparisons)
    if (c.name.find("lazy") == std::string::npos) EXPECT_TRUE(c.pass) << c.name;
}

TEST(SandwichCheck, HandTree) {
  // chain O <- 1 <- 2 <- 3 at norms 1, 2, 3: ball k is the disc of radius k
  const std::vector<Vec<2>> pts{{0, 0}, {1, 0}, {2, 0}, {3, 0}};
  const std::vector<std::size_t> par{0, 0, 1, 2};
  const auto t = build_tree(4, 0, [&](std::size_t i) { return par[i]; });
  const auto s = sandwich_check(t, pts, 1.0, 0.2, 1, 3);
  EXPECT_EQ(s.violations, 0u);
  EXPECT_EQ(s.pairs, 3u);
  EXPECT_EQ(sandwich_check(t, pts, 0.5, 0.2, 1, 3).violations, 3u);
}
