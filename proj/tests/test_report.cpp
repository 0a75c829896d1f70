#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <ppnav/plan.hpp>
#include <ppnav/report.hpp>
#include <ppnav/svg.hpp>

using namespace ppnav;

TEST(Csv, ShortestRoundTrip) {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 12345.678, -0.0})
    EXPECT_EQ(parse_double(format_double(x)), x);
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(HUGE_VAL), "inf");
  EXPECT_EQ(parse_double("-inf"), -HUGE_VAL);
  EXPECT_THROW(parse_double("1.5x"), std::invalid_argument);
}

TEST(Rules, Semantics) {
  EXPECT_TRUE(evaluate_rule("rel", 1.1, 1.0, 0.15));
  EXPECT_FALSE(evaluate_rule("rel", 1.2, 1.0, 0.15));
  EXPECT_TRUE(evaluate_rule("abs", 0.52, 0.5, 0.05));
  EXPECT_TRUE(evaluate_rule("le", -0.9, -0.8, 0));
  EXPECT_FALSE(evaluate_rule("ge", 0.01, 0.05, 0));
  EXPECT_TRUE(evaluate_rule("range", 1.0, 0.97, 1.03));
  EXPECT_FALSE(evaluate_rule("range", 1.04, 0.97, 1.03));
  EXPECT_FALSE(evaluate_rule("le", std::nan(""), 1.0, 0));
  EXPECT_THROW(evaluate_rule("about", 1, 1, 1), InputError);
}

TEST(Report, JsonRoundTripKeepsInfinities) {
  EstimateReport r;
  r.op = "demo";
  r.estimate("m", 1.5, 0.25, 10);
  r.regressions.push_back({"fit", -3, 1, 0.1, 0.99, 7});
  r.reference("K", 0.5, "progress_tail_constant");
  r.compare("c", "le", HUGE_VAL, 1.0, 0.0, "x");
  r.curves.push_back({"curve", {"a", "b"}, {{1, 2}, {3, HUGE_VAL}}});
  r.info["note"] = "n";
  const std::string text = dump_report(r);
  const auto back = report_from_json(json::parse(text));
  EXPECT_EQ(dump_report(back), text);
  EXPECT_FALSE(back.all_pass());
  EXPECT_TRUE(std::isinf(back.curves[0].rows[1][1]));
  EXPECT_NEAR(back.estimates[0].ci_hi, 1.5 + 1.96 * 0.25, 1e-15);
  EXPECT_NE(back.find("c"), nullptr);
  EXPECT_THROW(report_from_json(json{{"schema", "other"}}), InputError);
}

TEST(Report, EmitWritesJsonAndCurves) {
  const auto dir = std::filesystem::temp_directory_path() / "ppnav_test_emit";
  std::filesystem::create_directories(dir);
  EstimateReport r;
  r.op = "demo";
  r.curves.push_back({"tail", {"t", "p"}, {{1, 0.5}}});
  const auto paths = emit_report(r, dir, "run");
  ASSERT_EQ(paths.size(), 2u);
  std::ifstream f(dir / "run.tail.csv");
  std::stringstream ss;
  ss << f.rdbuf();
  EXPECT_EQ(ss.str(), "t,p\n1,0.5\n");
  EXPECT_EQ(emit_report(r, dir, "run", false).size(), 1u);
  EXPECT_THROW(emit_report(r, "/proc/ppnav-denied", "x"), RuntimeFailure);
  std::filesystem::remove_all(dir);
}

TEST(Plan, Parse) {
  const auto p = Plan::parse("# c\nop = queue-tails\nruns=10 # trailing\nladder=1e2, 1e3\n");
  EXPECT_EQ(p.str("op"), "queue-tails");
  EXPECT_EQ(p.count("runs", 0), 10u);
  EXPECT_EQ(p.list("ladder"), (std::vector<double>{100, 1000}));
  EXPECT_EQ(p.num("missing", 2.5), 2.5);
  EXPECT_EQ(p.text(), "op=queue-tails\nruns=10\nladder=1e2, 1e3\n");
  EXPECT_THROW(p.str("missing"), InputError);
  EXPECT_THROW(p.restrict_to({"op", "runs"}), InputError);
  EXPECT_NO_THROW(p.restrict_to({"op", "runs", "ladder"}));
}

TEST(Plan, Errors) {
  EXPECT_THROW(Plan::parse("novalue\n"), InputError);
  EXPECT_THROW(Plan::parse("a=1\na=2\n"), InputError);
  EXPECT_THROW(Plan::parse("=1\n"), InputError);
  EXPECT_THROW(Plan::parse("a=x\n").num("a"), InputError);
  EXPECT_THROW(Plan::parse("a=1.5\n").integer("a"), InputError);
  EXPECT_THROW(Plan::parse("a=-1\n").count("a", 0), InputError);
  EXPECT_THROW(Plan::load("/nonexistent/plan.cfg"), InputError);
}

TEST(Svg, OneLinePerEdge) {
  const std::vector<Vec<2>> pts{{0, 0}, {1, 0}, {2, 1}};
  const std::vector<std::size_t> par{0, 0, 1};
  const auto t = build_tree(3, 0, [&](std::size_t i) { return par[i]; });
  const std::string s = render_tree_svg(t, pts);
  std::size_t lines = 0;
  for (auto pos = s.find("<line"); pos != std::string::npos; pos = s.find("<line", pos + 1)) ++lines;
  EXPECT_EQ(lines, 2u);
  EXPECT_NE(s.find("<circle"), std::string::npos);
  EXPECT_EQ(s.rfind("</svg>"), s.size() - 7);
}
