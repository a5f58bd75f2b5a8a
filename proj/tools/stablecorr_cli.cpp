#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stablecorr/errors.hpp"
#include "stablecorr/experiment.hpp"
#include "stablecorr/fourier_pd.hpp"
#include "stablecorr/json_io.hpp"
#include "stablecorr/moments.hpp"
#include "stablecorr/oracle2d.hpp"
#include "stablecorr/sampling.hpp"

using namespace stablecorr;

namespace {

enum ExitCode
{
    kPass = 0,
    kFail = 1,
    kUsage = 2,
    kNumerical = 3
};

Json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw InvalidArgument("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

struct SampleArgs
{
    std::string rep;
    std::size_t count = 1000;
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::string out;
    bool binary = false;
};

int run_sample(const SampleArgs& a)
{
    const auto rep = spectral_rep_from_json(read_json(a.rep));
    const auto batch = sample_batch(rep, a.count, {a.seed, a.stream});
    if (a.binary) {
        if (a.out.empty())
            throw InvalidArgument("--binary needs --out");
        write_binary(batch, a.out);
    } else if (a.out.empty()) {
        write_csv(batch, std::cout);
    } else {
        std::ofstream out(a.out);
        if (!out)
            throw ResourceError("cannot write " + a.out);
        write_csv(batch, out);
    }
    return kPass;
}

struct CfArgs
{
    std::string rep;
    std::size_t count = 100000;
    std::size_t points = 20;
    std::uint64_t seed = 0;
};

// Empirical against analytic characteristic function at random frequencies
// where the analytic value lies in [e^-4, e^-0.04].
int run_cf_check(const CfArgs& a)
{
    const auto rep = spectral_rep_from_json(read_json(a.rep));
    const auto batch = sample_batch(rep, a.count, {a.seed, 0});
    Engine engine = make_engine({a.seed, 1}, 0);
    std::normal_distribution<double> normal;
    const double tol = 4.0 / std::sqrt(static_cast<double>(a.count));
    Json points = Json::array();
    bool ok = true;
    for (std::size_t m = 0; m < a.points; ++m) {
        Vector xi(rep.dim());
        for (double& v : xi)
            v = normal(engine);
        const double s = scale_q(rep, xi);
        if (s == 0.0)
            continue;
        const double t = 0.2 + 1.8 * uniform_open(engine);
        for (double& v : xi)
            v *= t / s;
        double emp = 0.0;
        for (std::size_t i = 0; i < batch.rows(); ++i)
            emp += std::cos(dot(batch.point(i), xi));
        emp /= static_cast<double>(batch.rows());
        const double exact = char_fn(rep, xi);
        const double diff = std::abs(emp - exact);
        ok = ok && diff <= tol;
        points.push_back({{"xi", xi}, {"empirical", emp}, {"exact", exact}, {"diff", diff}});
    }
    print({{"rep_hash", rep.hash()}, {"samples", a.count}, {"tolerance", tol}, {"passed", ok},
           {"points", points}});
    return ok ? kPass : kFail;
}

struct MomentArgs
{
    std::optional<double> p;
    std::optional<double> q;
    std::string rep;
    std::string function;
    std::size_t samples = 1000000;
    std::uint64_t seed = 0;
    std::string estimator = "auto";
};

int run_moments(const MomentArgs& a)
{
    if (a.p && a.q) {
        const StableIndex q(*a.q);
        const double closed = c_pq(*a.p, q);
        const double oracle = c_pq_oracle(*a.p, q);
        print({{"p", *a.p},
               {"q", *a.q},
               {"c_pq", number(closed)},
               {"oracle", number(oracle)},
               {"relative_error", number(std::abs(closed - oracle) / std::abs(oracle))}});
        return kPass;
    }
    if (a.rep.empty() || a.function.empty())
        throw InvalidArgument("moments needs --p and --q, or --rep and --function");
    const auto rep = spectral_rep_from_json(read_json(a.rep));
    const auto f = homogeneous_from_json(read_json(a.function));
    EstimatorRequest req;
    if (a.estimator == "plain")
        req.mode = EstimatorRequest::Mode::plain;
    else if (a.estimator == "mom")
        req.mode = EstimatorRequest::Mode::median_of_means;
    Json out = {{"mc", to_json(mc_expectation(f, rep, a.samples, {a.seed, 0}, req))}};
    if (const auto* levy = std::get_if<LevyNorm>(&f.base()); levy && f.exponent() > 0.0 &&
                                                           levy->measure.exponent() == f.exponent())
        out["exact"] = number(levy_expectation(rep, levy->measure, f.exponent()));
    print(out);
    return kPass;
}

struct VerifyArgs
{
    std::string mode;
    std::string config;
    std::optional<std::size_t> n_min, n_max, k, trials, samples, max_dim, workers;
    std::optional<std::uint64_t> seed;
    std::vector<double> q, p_range, p_values;
    std::vector<std::string> norms;
    std::optional<std::string> output;
    bool oracle = false;
};

int run_verify(const VerifyArgs& a)
{
    ExperimentConfig c = a.config.empty() ? ExperimentConfig{} : experiment_config_from_json(read_json(a.config));
    c.mode = experiment_mode_from_string(a.mode);
    if (a.n_min)
        c.n_min = *a.n_min;
    if (a.n_max)
        c.n_max = *a.n_max;
    if (a.k)
        c.k = *a.k;
    if (a.trials)
        c.trials = *a.trials;
    if (a.samples)
        c.samples = *a.samples;
    if (a.max_dim)
        c.max_dim = *a.max_dim;
    if (a.workers)
        c.workers = *a.workers;
    if (a.seed)
        c.seed = *a.seed;
    if (!a.q.empty())
        c.q_values = a.q;
    if (!a.p_range.empty()) {
        c.p_range = std::pair{a.p_range[0], a.p_range[1]};
        c.p_values.clear();
    }
    if (!a.p_values.empty()) {
        c.p_values = a.p_values;
        c.p_range.reset();
    }
    if (!a.norms.empty()) {
        c.norms.clear();
        for (const auto& s : a.norms)
            c.norms.push_back(norm_family_from_string(s));
    }
    if (a.output)
        c.output = *a.output;
    if (a.oracle)
        c.oracle = true;

    const auto report = run_experiment(c);
    print(summary_json(report, c));
    return report.passed() ? kPass : kFail;
}

struct PdArgs
{
    std::string function;
    std::string norm = "max_abs";
    std::size_t n = 2;
    std::optional<double> p;
    bool away = false;
};

int run_pd_check(const PdArgs& a)
{
    std::optional<HomogeneousFn> f;
    if (!a.function.empty()) {
        f = homogeneous_from_json(read_json(a.function));
    } else {
        if (!a.p)
            throw InvalidArgument("pd-check needs --function or --p");
        switch (norm_family_from_string(a.norm)) {
        case NormFamily::max_abs:
            f = max_abs_power(a.n, *a.p);
            break;
        case NormFamily::l1:
            f = l1_power(a.n, *a.p);
            break;
        case NormFamily::euclidean:
            f = euclidean_power(a.n, *a.p);
            break;
        case NormFamily::lr_subspace:
            throw InvalidArgument("give lr_subspace norms through --function");
        }
    }
    const PdMode mode = a.away ? PdMode::away_from_origin : PdMode::full_space;
    const auto report = pd_check(*f, default_family(f->dim(), mode), mode);
    Json out = to_json(report);
    out["function"] = to_json(*f);
    print(out);
    return report.verdict == PdVerdict::violation ? kFail : kPass;
}

struct OracleArgs
{
    std::string rep;
    std::string function;
    std::size_t resolution = 1024;
    double spacing = 0.0;
    std::string out;
};

int run_oracle(const OracleArgs& a)
{
    const auto rep = spectral_rep_from_json(read_json(a.rep));
    GridSpec spec;
    spec.resolution = a.resolution;
    spec.spacing = a.spacing;
    Json out = {{"rep_hash", rep.hash()}};
    if (a.function.empty()) {
        const auto field = density_2d(rep, spec);
        out["resolution"] = field.resolution;
        out["spacing"] = field.spacing;
        out["mass"] = field.mass;
        out["clipped_mass"] = field.clipped_mass;
        out["origin_value"] = field.origin_value;
        if (!a.out.empty())
            write_density(field, a.out);
    } else {
        const auto f = homogeneous_from_json(read_json(a.function));
        const auto fields = refined_density(rep, spec);
        const auto r = oracle_expectation(f, fields);
        out["value"] = number(r.value);
        out["error"] = number(r.error);
        out["extrapolation"] = number(r.extrapolation);
        out["resolution"] = r.resolution;
        out["spacing"] = r.spacing;
        if (!a.out.empty())
            write_density(fields.doubled, a.out);
    }
    print(out);
    return kPass;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Stable random vectors, homogeneous moments and decoupling comparisons"};
    app.require_subcommand(1);
    int code = kPass;

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Draw samples of a spectral representation");
    sample->add_option("--rep", sa.rep, "Representation JSON")->required();
    sample->add_option("--count", sa.count, "Number of draws");
    sample->add_option("--seed", sa.seed);
    sample->add_option("--stream", sa.stream);
    sample->add_option("--out", sa.out, "Output path (CSV unless --binary); stdout by default");
    sample->add_flag("--binary", sa.binary, "float64 rows plus a JSON header");
    sample->callback([&] { code = run_sample(sa); });

    CfArgs ca;
    auto* cf = app.add_subcommand("cf-check", "Empirical against analytic characteristic function");
    cf->add_option("--rep", ca.rep, "Representation JSON")->required();
    cf->add_option("--count", ca.count);
    cf->add_option("--points", ca.points);
    cf->add_option("--seed", ca.seed);
    cf->callback([&] { code = run_cf_check(ca); });

    MomentArgs ma;
    auto* moments = app.add_subcommand("moments", "c_pq and its oracle, or E f(X) by Monte Carlo");
    moments->add_option("--p", ma.p);
    moments->add_option("--q", ma.q);
    moments->add_option("--rep", ma.rep, "Representation JSON");
    moments->add_option("--function", ma.function, "Homogeneous function JSON");
    moments->add_option("--samples", ma.samples);
    moments->add_option("--seed", ma.seed);
    moments->add_option("--estimator", ma.estimator)->check(CLI::IsMember({"auto", "plain", "mom"}));
    moments->callback([&] { code = run_moments(ma); });

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Run a randomized verification experiment");
    verify->add_option("mode", va.mode)
        ->required()
        ->check(CLI::IsMember({"lemma1", "prop1", "thm1", "cor3", "pd", "oracle-crosscheck"}));
    verify->add_option("--config", va.config, "Experiment config JSON; flags override it");
    verify->add_option("--n-min", va.n_min);
    verify->add_option("--n-max", va.n_max);
    verify->add_option("--k", va.k);
    verify->add_option("--q", va.q);
    verify->add_option("--p-range", va.p_range)->expected(2);
    verify->add_option("--p-values", va.p_values);
    verify->add_option("--norms", va.norms);
    verify->add_option("--trials", va.trials);
    verify->add_option("--samples", va.samples);
    verify->add_option("--seed", va.seed);
    verify->add_option("--max-dim", va.max_dim);
    verify->add_option("--output", va.output, "Stem for .jsonl, .csv and .summary.json");
    verify->add_option("--workers", va.workers);
    verify->add_flag("--oracle", va.oracle, "Cross-check two-dimensional thm1 trials");
    verify->callback([&] { code = run_verify(va); });

    PdArgs pa;
    auto* pd = app.add_subcommand("pd-check", "Numerical positive-definiteness check");
    pd->add_option("--function", pa.function, "Homogeneous function JSON");
    pd->add_option("--norm", pa.norm)->check(CLI::IsMember({"max_abs", "l1", "euclidean"}));
    pd->add_option("--n", pa.n);
    pd->add_option("--p", pa.p);
    pd->add_flag("--away-from-origin", pa.away);
    pd->callback([&] { code = run_pd_check(pa); });

    OracleArgs oa;
    auto* oracle = app.add_subcommand("oracle", "Two-dimensional density and expectation by FFT");
    oracle->add_option("--rep", oa.rep, "Representation JSON")->required();
    oracle->add_option("--function", oa.function, "Homogeneous function JSON");
    oracle->add_option("--resolution", oa.resolution);
    oracle->add_option("--spacing", oa.spacing);
    oracle->add_option("--out", oa.out, "Stem for the exported density");
    oracle->callback([&] { code = run_oracle(oa); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kPass : kUsage;
    } catch (const NumericalFailure& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kUsage;
    }
    return code;
}
