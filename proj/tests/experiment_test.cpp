#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "stablecorr/errors.hpp"
#include "stablecorr/experiment.hpp"

namespace stablecorr {
namespace {

namespace fs = std::filesystem;

std::string slurp(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name)
{
    const auto dir = fs::temp_directory_path() / "stablecorr_experiment_test";
    fs::create_directories(dir);
    return dir / name;
}

TEST(ExperimentConfigTest, JsonRoundTrip)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::cor3;
    c.n_min = c.n_max = 3;
    c.k = 2;
    c.q_values = {0.7, 2.0};
    c.p_range = std::pair{-2.9, -2.1};
    c.norms = {NormFamily::euclidean};
    c.trials = 9;
    c.seed = 123;
    c.output = "out/x";
    const auto back = experiment_config_from_json(Json::parse(to_json(c).dump()));
    EXPECT_EQ(to_json(back), to_json(c));
    EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"mode": "thm1", "bogus": 1})")),
                 InvalidArgument);
    EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"mode": "thm2"})")), InvalidArgument);
    EXPECT_THROW(experiment_config_from_json(Json::parse(R"({"norms": ["sup"]})")), InvalidArgument);
    EXPECT_EQ(experiment_config_from_json(Json::parse(R"({"mode": "oracle-crosscheck"})")).mode,
              ExperimentMode::oracle_crosscheck);
}

TEST(ExperimentConfigTest, ValidationRejectsBeforeAnyTrial)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::cor3;
    c.n_min = c.n_max = 2;
    c.p_range = std::pair{-1.5, -0.5};
    c.output = scratch("rejected").string();
    fs::remove(c.output + ".jsonl");
    EXPECT_THROW(run_experiment(c), InvalidArgument);
    EXPECT_FALSE(fs::exists(c.output + ".jsonl"));

    c.p_range.reset();
    c.p_values = {-1.0};  // boundary of the open window
    EXPECT_THROW(validate(c), InvalidArgument);
    c.p_values = {-1.5};
    EXPECT_NO_THROW(validate(c));
    c.n_max = 3;  // no p lies in both windows
    EXPECT_THROW(validate(c), InvalidArgument);

    ExperimentConfig t;
    t.mode = ExperimentMode::thm1;
    t.p_values = {0.5};
    EXPECT_THROW(validate(t), InvalidArgument);
    t.p_values.clear();
    t.k = 2;  // n_min = 2
    EXPECT_THROW(validate(t), InvalidArgument);
    t.k.reset();
    t.p_range = std::pair{-1.0, -0.5};
    t.p_values = {-0.7};
    EXPECT_THROW(validate(t), InvalidArgument);

    ExperimentConfig l;
    l.p_values = {1.2};
    l.q_values = {1.0};
    EXPECT_THROW(validate(l), InvalidArgument);
    l.q_values = {2.0};
    EXPECT_NO_THROW(validate(l));
    l.trials = 0;
    EXPECT_THROW(validate(l), InvalidArgument);

    ExperimentConfig p;
    p.mode = ExperimentMode::pd;
    p.n_max = 4;
    EXPECT_THROW(validate(p), InvalidArgument);
}

TEST(ExperimentTest, InequalitySweepHasNoFailures)
{
    ExperimentConfig c;
    c.trials = 4000;
    c.seed = 5;
    const auto report = run_experiment(c);
    ASSERT_EQ(report.records.size(), 4000u);
    EXPECT_EQ(report.failures, 0u);
    EXPECT_EQ(report.skipped, 0u);
    EXPECT_GE(report.min_margin, -1e-10);
    // q = 2 trials include the reversed powers.
    EXPECT_EQ(report.records[3].config.at("q"), Json(2.0));
    EXPECT_EQ(report.records[3].details.at("checks"), Json(8));
}

TEST(ExperimentTest, ExactComparisonForwardAndReversed)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::prop1;
    c.trials = 200;
    c.seed = 8;
    const auto report = run_experiment(c);
    EXPECT_EQ(report.failures, 0u);
    for (const auto& r : report.records)
        EXPECT_LE(*r.lhs, *r.rhs * (1.0 + 1e-10));

    c.q_values = {2.0};
    c.p_values = {2.5, 4.0};
    c.trials = 50;
    const auto reversed = run_experiment(c);
    EXPECT_EQ(reversed.failures, 0u);
    for (const auto& r : reversed.records) {
        EXPECT_TRUE(r.details.at("reversed").get<bool>());
        EXPECT_GE(*r.lhs, *r.rhs * (1.0 - 1e-10));
    }
}

TEST(ExperimentTest, OutputIsByteIdenticalAcrossRunsAndWorkers)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::prop1;
    c.trials = 600;
    c.seed = 77;
    c.workers = 1;
    c.output = scratch("a").string();
    const auto first = run_experiment(c);
    c.workers = 3;
    c.output = scratch("b").string();
    run_experiment(c);
    const auto a = slurp(scratch("a").string() + ".jsonl");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(scratch("b").string() + ".jsonl"));
    EXPECT_EQ(slurp(scratch("a").string() + ".csv"), slurp(scratch("b").string() + ".csv"));

    const auto csv = slurp(scratch("a").string() + ".csv");
    EXPECT_EQ(csv.rfind("trial,n,k,q,p,family,lhs,rhs,margin,tolerance,passed,skipped\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), 601u);
    const auto summary = Json::parse(slurp(scratch("a").string() + ".summary.json"));
    EXPECT_EQ(summary.at("failures"), Json(0));
    EXPECT_EQ(summary.at("config").at("mode"), Json("prop1"));
    EXPECT_FALSE(summary.at("generator").get<std::string>().empty());
    EXPECT_EQ(first.records.size(), 600u);
}

TEST(ExperimentTest, McComparisonSmallRun)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::thm1;
    c.trials = 8;
    c.samples = 20000;
    c.seed = 3;
    const auto report = run_experiment(c);
    EXPECT_EQ(report.failures, 0u);
    ASSERT_EQ(report.records.size(), 8u);
    for (std::size_t t = 0; t < 8; ++t) {
        const auto& r = report.records[t];
        const double n = r.config.at("n").get<double>();
        const double p = r.config.at("p").get<double>();
        EXPECT_GT(p, -n);
        EXPECT_LT(p, 0.0);
        if (r.config.at("family") == Json("max_abs"))
            EXPECT_LT(p, -n + 1.0);
        EXPECT_TRUE(r.rhs.has_value());
        EXPECT_GT(r.tolerance, 0.0);
    }
    // Families cycle fastest, then q.
    EXPECT_EQ(report.records[1].config.at("family"), Json("l1"));
    EXPECT_EQ(report.records[4].config.at("q"), Json(1.0));
}

TEST(ExperimentTest, MaxAbsWindowAndPdModes)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::cor3;
    c.n_min = c.n_max = 3;
    c.k = 2;
    c.trials = 3;
    c.samples = 20000;
    c.seed = 4;
    const auto cor = run_experiment(c);
    EXPECT_EQ(cor.failures, 0u);
    for (const auto& r : cor.records) {
        EXPECT_EQ(r.config.at("family"), Json("max_abs"));
        EXPECT_EQ(r.config.at("k"), Json(2));
    }

    ExperimentConfig p;
    p.mode = ExperimentMode::pd;
    p.n_min = p.n_max = 2;
    p.trials = 2;
    const auto pd = run_experiment(p);
    EXPECT_EQ(pd.failures, 0u);
    EXPECT_EQ(pd.records[0].details.at("verdict"), Json("consistent_with_pd"));
}

TEST(ExperimentTest, OracleCrossCheckReplaysComparisonTrials)
{
    ExperimentConfig c;
    c.mode = ExperimentMode::oracle_crosscheck;
    c.n_max = 3;
    c.trials = 1;
    c.samples = 200000;
    c.seed = 11;
    const auto report = run_experiment(c);
    EXPECT_EQ(report.failures, 0u);
    ASSERT_FALSE(report.records.empty());
    const auto& r = report.records.back();
    EXPECT_FALSE(r.skipped.has_value());
    EXPECT_EQ(r.config.at("n"), Json(2));

    ExperimentConfig t = c;
    t.mode = ExperimentMode::thm1;
    t.trials = r.trial + 1;
    t.norms = c.norms;
    const auto replay = run_experiment(t);
    EXPECT_EQ(replay.records[r.trial].config, r.config);
    EXPECT_EQ(replay.records[r.trial].details.at("y"), r.details.at("y"));
}

}  // namespace
}  // namespace stablecorr
