#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stablecorr/json_io.hpp"
#include "stablecorr/verify.hpp"

namespace stablecorr {

enum class ExperimentMode
{
    lemma1,
    prop1,
    thm1,
    cor3,
    pd,
    oracle_crosscheck
};

std::string to_string(ExperimentMode mode);
ExperimentMode experiment_mode_from_string(const std::string& name);

struct ExperimentConfig
{
    ExperimentMode mode = ExperimentMode::lemma1;
    std::size_t n_min = 2;
    std::size_t n_max = 3;
    std::optional<std::size_t> k;  // uniform on 1..n-1 when absent
    std::vector<double> q_values = {0.5, 1.0, 1.5, 2.0};
    // Either a closed range drawn uniformly or a list drawn with equal
    // probability. Without both, each mode uses its default window.
    std::optional<std::pair<double, double>> p_range;
    std::vector<double> p_values;
    std::vector<NormFamily> norms = {NormFamily::max_abs, NormFamily::l1, NormFamily::euclidean,
                                     NormFamily::lr_subspace};
    std::size_t trials = 100;
    std::size_t samples = 1000000;
    std::uint64_t seed = 0;
    std::size_t max_dim = 16;  // lemma1 vector length
    std::string output;        // file stem; empty writes nothing
    std::size_t workers = 0;   // 0: default_workers()
    bool oracle = false;       // thm1: cross-check n = 2 trials with oracle2d
};

Json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys are rejected.
ExperimentConfig experiment_config_from_json(const Json& j);

// Throws InvalidArgument when a range violates the mode's preconditions.
void validate(const ExperimentConfig& config);

struct TrialRecord
{
    std::size_t trial = 0;
    Json config;  // n, k, q, p, family and the drawn objects
    std::optional<double> lhs;
    std::optional<double> rhs;
    double margin = 0.0;
    double tolerance = 0.0;  // the trial fails when margin < -tolerance
    bool passed = true;
    std::optional<std::string> skipped;
    Json details;
};

Json to_json(const TrialRecord& record);

struct VerificationReport
{
    ExperimentMode mode = ExperimentMode::lemma1;
    std::vector<TrialRecord> records;
    double min_margin = 0.0;  // over evaluated trials
    std::size_t failures = 0;
    std::size_t skipped = 0;
    double runtime_seconds = 0.0;
    std::string generator;

    bool passed() const noexcept { return failures == 0; }
};

Json summary_json(const VerificationReport& report, const ExperimentConfig& config);

// Runs the trials of the mode. Trial t draws its configuration from
// make_engine({seed, t}, 0) and its Monte Carlo streams from
// Seed{seed, 1000000 + t}, so records depend only on (config, t).
//
// oracle_crosscheck replays the thm1 trial stream with the same config and
// cross-checks the first `trials` two-dimensional configurations that the
// oracle accepts.
//
// With a nonempty output stem, writes <stem>.jsonl (one record per line),
// <stem>.csv (one row per trial) and <stem>.summary.json. The first two are
// byte-identical across runs and worker counts.
VerificationReport run_experiment(const ExperimentConfig& config);

void write_jsonl(const VerificationReport& report, std::ostream& out);
void write_csv(const VerificationReport& report, std::ostream& out);

}  // namespace stablecorr
