#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "stablab/config.hpp"
#include "stablab/experiments.hpp"

using namespace stablab;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

std::string csv_of(const std::vector<ResultRow>& rows) {
  std::ostringstream out;
  write_csv(rows, out);
  return out.str();
}

}  // namespace

TEST(ParseConfig, ConvexExample) {
  const auto c = parse_config("experiment = convex_lower\nn = 10\nT = 100\nalpha = 0.05\nM = 20000");
  EXPECT_EQ(c.experiment, "convex_lower");
  EXPECT_EQ(c.n, 10u);
  EXPECT_EQ(c.T, 100u);
  EXPECT_DOUBLE_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.M, 20000u);
  EXPECT_EQ(c.seed, 0u);
  EXPECT_DOUBLE_EQ(c.c, 0.99);
}

TEST(ParseConfig, Prop1HypothesisNamed) {
  const auto msg = error_of("experiment = prop1\nd = 11\nn = 20");
  EXPECT_NE(msg.find("n ≥ 2d"), std::string::npos) << msg;
  EXPECT_NE(msg.find("'n'"), std::string::npos) << msg;
}

TEST(ParseConfig, EmptyFileListsRequiredKeys) {
  const auto msg = error_of("");
  EXPECT_NE(msg.find("required keys"), std::string::npos) << msg;
  EXPECT_NE(msg.find("experiment"), std::string::npos) << msg;
  EXPECT_NE(msg.find("convex_lower"), std::string::npos) << msg;
}

TEST(ParseConfig, Rejections) {
  EXPECT_NE(error_of("experiment = convex_lower\nn = 10\nT = 5\nfoo = 1").find("unknown key 'foo'"),
            std::string::npos);
  EXPECT_NE(error_of("experiment = convex_lower\nn = 10").find("missing required key 'T'"), std::string::npos);
  EXPECT_NE(error_of("experiment = convex_lower\nn = 10\nn = 11\nT = 3").find("more than once"), std::string::npos);
  EXPECT_NE(error_of("experiment = convex_lower\nn = ten\nT = 3").find("'n'"), std::string::npos);
  EXPECT_NE(error_of("experiment = bogus").find("unknown experiment"), std::string::npos);
  EXPECT_NE(error_of("experiment = nonconvex_decreasing\nn = 10\nT = 100\na = 0.5").find("'a'"), std::string::npos);
  EXPECT_NE(error_of("experiment = convex_lower\nn = 10\nT = 100\nsampler = shuffle").find("sampler"),
            std::string::npos);
  try {
    parse_config("experiment = convex_lower\nn = 10\nT = 100\nd = 2");
    FAIL() << "K >= d accepted";
  } catch (const ConfigError& e) {
    EXPECT_FALSE(e.key().empty());
  }
}

TEST(ParseConfig, CommentsAndDefaults) {
  const auto c = parse_config("# header\nexperiment = nonconvex_decreasing  # trailing\n\nn = 10\nT = 1000\n");
  EXPECT_EQ(c.t0, 10u);
  EXPECT_DOUBLE_EQ(c.beta, 0.5);
  EXPECT_EQ(c.M, 5000u);
  const auto p = parse_config("experiment = prop1\nd = 11\nn = 22");
  EXPECT_DOUBLE_EQ(p.mu, 1.0 / (22.0 * 22.0 * 22.0 * 22.0));
}

TEST(RenderConfig, RoundTripsEveryExperiment) {
  for (const auto& name : experiment_names()) {
    std::string text = "experiment = " + name + "\n";
    if (name == "prop1") text += "d = 11\nn = 22\n";
    else if (name == "datadep_convex") text += "n = 40\nd = 10\nT = 200\nmu = 0.0025\n";
    else if (name == "oracle_crosscheck") text += "n = 3\nT = 7\nseed = 18446744073709551615\n";
    else if (name != "table1_sweep") text += "n = 7\nT = 33\nseed = 18446744073709551615\nalpha = 0.1\n";
    text += "sampler = permutation\noutput = out dir/x.csv\nworkers = 3\n";
    const auto c = parse_config(text);
    EXPECT_EQ(parse_config(render_config(c)), c) << name;
  }
}

TEST(Csv, HeaderIsStable) {
  EXPECT_EQ(std::string(kCsvHeader),
            "experiment,n,T,schedule,trials,mean_divergence,stderr,stability_estimate,bound_lower,bound_upper,"
            "bound_names,verdict,wall_time_ms,seed");
  std::ostringstream out;
  write_csv({}, out);
  EXPECT_EQ(out.str(), std::string(kCsvHeader) + "\n");
}

TEST(Csv, RowFormatting) {
  ResultRow r;
  r.experiment = "x";
  r.n = 3;
  r.T = 7;
  r.schedule = "constant(0.1)";
  r.trials = 5;
  r.mean_divergence = 0.25;
  r.bound_lower = 0.125;
  r.bound_names = {"a", "b"};
  r.measured = 0.25;
  finish_row(r, 0.01);
  const auto text = csv_of({r});
  const auto line = text.substr(text.find('\n') + 1);
  EXPECT_NE(line.find("x,3,7,"), std::string::npos) << line;
  EXPECT_NE(line.find(",0.125,,"), std::string::npos) << line;
  EXPECT_NE(line.find(",pass,"), std::string::npos) << line;
}

TEST(Verdict, ToleranceRule) {
  ResultRow r;
  r.measured = 1.0;
  r.bound_lower = 1.02;
  finish_row(r, 0.01);
  EXPECT_TRUE(r.verdict);
  EXPECT_DOUBLE_EQ(r.tolerance, 0.03);
  r.bound_lower = 1.04;
  finish_row(r, 0.01);
  EXPECT_FALSE(r.verdict);
  r.bound_lower.reset();
  r.bound_upper = 1.0 - 1e-13;
  finish_row(r, std::nullopt);
  EXPECT_TRUE(r.verdict);
  EXPECT_EQ(r.tolerance_kind, "exact");
  r.side_conditions = false;
  finish_row(r, std::nullopt);
  EXPECT_FALSE(r.verdict);
}

TEST(Experiments, CsvIsByteIdenticalAcrossWorkerCounts) {
  for (const std::string text : {"experiment = nonconvex_decreasing\nn = 10\nT = 200\nM = 300\n",
                                 "experiment = convex_lower\nn = 10\nT = 50\nM = 400\n",
                                 "experiment = permutation_vs_uniform\nn = 10\nT = 100\nM = 200\n"}) {
    auto c = parse_config(text);
    const auto one = csv_of(run_experiment(c));
    c.workers = 3;
    const auto three = csv_of(run_experiment(c));
    const auto again = csv_of(run_experiment(c));
    EXPECT_EQ(one, three);
    EXPECT_EQ(three, again);
  }
}

TEST(Experiments, TimingOnlyWhenRequested) {
  auto c = parse_config("experiment = strongly_convex_lower\nn = 10\nT = 60\nM = 100\n");
  EXPECT_FALSE(run_experiment(c).front().wall_time_ms.has_value());
  c.record_timing = true;
  EXPECT_TRUE(run_experiment(c).front().wall_time_ms.has_value());
}

TEST(Experiments, OracleCrosscheckExample) {
  const auto rows = run_experiment(parse_config("experiment = oracle_crosscheck\nn = 3\nT = 7\n"));
  ASSERT_FALSE(rows.empty());
  for (const auto& r : rows) EXPECT_TRUE(r.verdict) << verdict_line(r);
}

TEST(Experiments, EnvSeedOverride) {
  auto c = parse_config("experiment = convex_lower\nn = 10\nT = 10\n");
  ::setenv("STABLAB_SEED", "1234", 1);
  apply_env_overrides(c);
  ::unsetenv("STABLAB_SEED");
  EXPECT_EQ(c.seed, 1234u);
}
