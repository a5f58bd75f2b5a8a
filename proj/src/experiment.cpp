#include "stablecorr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "stablecorr/errors.hpp"
#include "stablecorr/fourier_pd.hpp"
#include "stablecorr/sampling.hpp"

namespace stablecorr {
namespace {

constexpr std::uint64_t kMcStreamOffset = 1000000;
constexpr std::size_t kTrialChunk = 256;

std::size_t draw_index(Engine& engine, std::size_t lo, std::size_t hi)
{
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine);
}

double draw_log_uniform(Engine& engine, double lo, double hi)
{
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * uniform_open(engine));
}

// Default p window of the mode, shrunk by 5% at each end.
std::pair<double, double> interior(double lo, double hi)
{
    const double pad = 0.05 * (hi - lo);
    return {lo + pad, hi - pad};
}

double draw_p(const ExperimentConfig& c, Engine& engine, std::pair<double, double> window)
{
    if (!c.p_values.empty())
        return c.p_values[draw_index(engine, 0, c.p_values.size() - 1)];
    const auto [lo, hi] = c.p_range ? *c.p_range : window;
    return lo + (hi - lo) * uniform_open(engine);
}

std::vector<double> lemma_powers(const ExperimentConfig& c, double q)
{
    if (!c.p_values.empty())
        return c.p_values;
    std::vector<double> ps = {q / 4.0, q / 2.0, q};
    if (q == 2.0)
        ps.insert(ps.end(), {2.5, 3.0, 4.0});
    return ps;
}

std::string generator_description(ExperimentMode mode)
{
    switch (mode) {
    case ExperimentMode::lemma1:
        return "x, y with standard Cauchy entries, length uniform on 1..max_dim, jointly rescaled so "
               "that |x|^q + |y|^q is log-uniform on [1e-2, 10]";
    case ExperimentMode::prop1:
        return "1-8 atoms with standard Cauchy entries, weights log-uniform on [1/4, 4]; gamma has "
               "1-4 pairs {xi, xi with block v negated} of uniform unit directions; k uniform on 1..n-1";
    case ExperimentMode::pd:
        return "norm families cycled per trial; Euclidean weights log-uniform on [1/4, 4]; L_r rows "
               "in v-negated pairs of uniform unit vectors, r in {0.5, 1, 1.5, 2}; default test family";
    default:
        return "n-8 atoms with standard Cauchy entries, weights log-uniform on [1/4, 4]; k uniform "
               "on 1..n-1; norm families cycled per trial; Euclidean weights log-uniform on [1/4, 4]; "
               "L_r rows in v-negated pairs of uniform unit vectors, r in {0.5, 1, 1.5, 2}";
    }
}

void check_p(bool ok, const std::string& what)
{
    if (!ok)
        throw InvalidArgument("p " + what);
}

// Every p the config can draw satisfies pred.
template <class Pred>
bool all_p(const ExperimentConfig& c, Pred pred)
{
    if (!c.p_values.empty())
        return std::all_of(c.p_values.begin(), c.p_values.end(), pred);
    if (c.p_range)
        return pred(c.p_range->first) && pred(c.p_range->second);
    return true;
}

struct Check
{
    std::string name;
    double p = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
};

TrialRecord lemma1_trial(const ExperimentConfig& c, std::size_t t)
{
    Engine engine = make_engine({c.seed, t}, 0);
    const StableIndex q(c.q_values[t % c.q_values.size()]);
    const std::size_t size = draw_index(engine, 1, c.max_dim);
    const auto x0 = random_lq_vector(engine, size, q);
    const auto y0 = random_lq_vector(engine, size, q);
    const double mass = x0.norm_q_power() + y0.norm_q_power();
    const double target = draw_log_uniform(engine, 1e-2, 10.0);
    const double lambda = mass > 0.0 ? std::pow(target / mass, 1.0 / q.value()) : 1.0;
    Vector xv = x0.values(), yv = y0.values();
    for (double& v : xv)
        v *= lambda;
    for (double& v : yv)
        v *= lambda;
    const DiscreteLqVector x(xv, q), y(yv, q);

    std::vector<Check> checks;
    const double sides = 2.0 * (x.norm_q_power() + y.norm_q_power());
    checks.push_back({"parallelogram", q.value(), check_parallelogram_q(x, y), 1e-10 * sides});
    checks.push_back({"exp", q.value(), check_exp_ineq(x, y), 1e-12});
    for (double p : lemma_powers(c, q.value()))
        checks.push_back({"power", p, check_power_ineq(x, y, p), 1e-10 * power_ineq_scale(x, y, p)});

    TrialRecord r;
    r.trial = t;
    r.config = {{"q", q.value()}, {"size", size}};
    const Check* worst = nullptr;
    double worst_ratio = std::numeric_limits<double>::infinity();
    for (const auto& ch : checks) {
        const double tol = std::max(ch.tolerance, std::numeric_limits<double>::min());
        const double ratio = ch.margin / tol;
        if (ratio < worst_ratio || !worst) {
            worst_ratio = ratio;
            worst = &ch;
        }
        if (ch.margin < -ch.tolerance)
            r.passed = false;
    }
    // Vectors are reproducible from (seed, trial); only the binding check is kept.
    r.margin = worst->margin;
    r.tolerance = worst->tolerance;
    r.details = {{"checks", checks.size()},
                 {"worst", worst->name},
                 {"p", worst->p},
                 {"reversed", worst->name == "power" && power_regime_reversed(worst->p, q)}};
    return r;
}

TrialRecord prop1_trial(const ExperimentConfig& c, std::size_t t)
{
    Engine engine = make_engine({c.seed, t}, 0);
    const StableIndex q(c.q_values[t % c.q_values.size()]);
    const std::size_t n = draw_index(engine, c.n_min, c.n_max);
    const BlockSplit split = c.k ? BlockSplit(*c.k) : random_split(engine, n);
    const auto rep = random_heavy_rep(engine, n, q, 1, 8);
    const double p = draw_p(c, engine, {0.0, q.value()});
    const auto gamma = random_block_symmetric_measure(engine, n, split, p, draw_index(engine, 1, 4));
    const auto res = verify_prop1(rep, split, gamma, p);

    TrialRecord r;
    r.trial = t;
    r.config = {{"n", n},
                {"k", split.k()},
                {"q", q.value()},
                {"p", p},
                {"rep", to_json(rep)},
                {"gamma", to_json(gamma)}};
    r.lhs = res.ex;
    r.rhs = res.ey;
    r.margin = std::min(res.margin, res.margin_sum);
    r.tolerance = 1e-10 * res.scale;
    r.passed = res.passed;
    r.details = to_json(res);
    return r;
}

struct Thm1Draw
{
    std::size_t n;
    BlockSplit split;
    double q;
    NormFamily family;
    double p;
    SpectralRep rep;
    HomogeneousFn f;
};

Thm1Draw draw_thm1(const ExperimentConfig& c, std::size_t t, bool cor3)
{
    Engine engine = make_engine({c.seed, t}, 0);
    // Families cycle fastest, then q, so consecutive trials cover every pair.
    const std::size_t families = cor3 ? 1 : c.norms.size();
    const StableIndex q(c.q_values[(t / families) % c.q_values.size()]);
    const std::size_t n = draw_index(engine, c.n_min, c.n_max);
    const BlockSplit split = c.k ? BlockSplit(*c.k) : random_split(engine, n);
    const NormFamily family = cor3 ? NormFamily::max_abs : c.norms[t % families];
    const double dn = static_cast<double>(n);
    const auto window = family == NormFamily::max_abs ? interior(-dn, -dn + 1.0) : interior(-dn, 0.0);
    const double p = draw_p(c, engine, window);
    auto rep = random_heavy_rep(engine, n, q, n, 8);
    auto f = random_norm_power(engine, family, n, split, p);
    return {n, split, q.value(), family, p, std::move(rep), std::move(f)};
}

Json thm1_config(const Thm1Draw& d)
{
    return {{"n", d.n},
            {"k", d.split.k()},
            {"q", d.q},
            {"p", d.p},
            {"family", to_string(d.family)},
            {"rep", to_json(d.rep)},
            {"f", to_json(d.f)}};
}

TrialRecord thm1_trial(const ExperimentConfig& c, std::size_t t, bool cor3, std::size_t workers)
{
    const auto d = draw_thm1(c, t, cor3);
    Thm1Options opts;
    opts.oracle = c.oracle && d.n == 2;
    opts.workers = workers;
    const Seed seed{c.seed, kMcStreamOffset + t};
    const auto res = cor3 ? verify_cor3(d.rep, d.split, d.p, c.samples, seed, opts)
                          : verify_thm1(d.rep, d.split, d.f, c.samples, seed, opts);
    TrialRecord r;
    r.trial = t;
    r.config = thm1_config(d);
    if (res.x)
        r.lhs = res.x->value;
    r.rhs = res.y.value;
    r.margin = res.margin;
    r.tolerance = 3.0 * res.combined_uncertainty;
    r.passed = res.passed && (!res.oracle || res.oracle->passed);
    r.details = to_json(res);
    return r;
}

TrialRecord pd_trial(const ExperimentConfig& c, std::size_t t, std::size_t workers)
{
    Engine engine = make_engine({c.seed, t}, 0);
    const std::size_t n = draw_index(engine, c.n_min, c.n_max);
    const BlockSplit split = c.k ? BlockSplit(*c.k) : random_split(engine, n);
    const NormFamily family = c.norms[t % c.norms.size()];
    const double dn = static_cast<double>(n);
    const double p = draw_p(c, engine, interior(-dn, -dn + 1.0));
    const auto f = random_norm_power(engine, family, n, split, p);
    PdOptions po;
    po.workers = workers;
    const auto report = pd_check(f, default_family(n, PdMode::full_space), PdMode::full_space, po);

    TrialRecord r;
    r.trial = t;
    r.config = {{"n", n}, {"k", split.k()}, {"p", p}, {"family", to_string(family)}, {"f", to_json(f)}};
    r.margin = report.min_action;
    r.tolerance = 0.0;
    r.passed = report.verdict == PdVerdict::consistent_with_pd;
    r.details = to_json(report);
    return r;
}

std::vector<TrialRecord> oracle_trials(const ExperimentConfig& c, std::size_t workers)
{
    std::vector<TrialRecord> out;
    std::size_t accepted = 0;
    const std::size_t cap = 50 * c.trials;
    for (std::size_t t = 0; accepted < c.trials; ++t) {
        if (t == cap)
            throw InvalidArgument("too few two-dimensional configurations accepted by the oracle");
        const auto d = draw_thm1(c, t, false);
        if (d.n != 2)
            continue;
        Thm1Options opts;
        opts.oracle = true;
        opts.workers = workers;
        const auto res =
            verify_thm1(d.rep, d.split, d.f, c.samples, Seed{c.seed, kMcStreamOffset + t}, opts);
        TrialRecord r;
        r.trial = t;
        r.config = thm1_config(d);
        r.details = to_json(res);
        if (!res.oracle) {
            r.skipped = res.oracle_skipped.value_or("oracle not run");
            out.push_back(std::move(r));
            continue;
        }
        const auto& o = *res.oracle;
        r.lhs = o.ex;
        r.rhs = o.ey;
        r.margin = o.margin;
        r.tolerance = o.error;
        r.passed = o.passed;
        out.push_back(std::move(r));
        ++accepted;
    }
    return out;
}

template <class Fn>
std::vector<TrialRecord> parallel_trials(std::size_t trials, std::size_t workers, Fn fn)
{
    std::vector<TrialRecord> out(trials);
    const std::size_t chunks = (trials + kTrialChunk - 1) / kTrialChunk;
    parallel_chunks(chunks, workers, [&](std::size_t ch) {
        const std::size_t end = std::min(trials, (ch + 1) * kTrialChunk);
        for (std::size_t t = ch * kTrialChunk; t < end; ++t)
            out[t] = fn(t);
    });
    return out;
}

std::string csv_number(double x)
{
    std::ostringstream s;
    s.precision(17);
    s << x;
    return s.str();
}

std::string csv_field(const Json& config, const char* key)
{
    if (!config.contains(key))
        return "";
    const Json& v = config.at(key);
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_unsigned())
        return std::to_string(v.get<std::uint64_t>());
    if (v.is_number())
        return csv_number(v.get<double>());
    return "";
}

const std::vector<std::string> kConfigKeys = {"mode",   "n_min",    "n_max",   "k",      "q",
                                              "p_range", "p_values", "norms",   "trials", "samples",
                                              "seed",   "max_dim",  "output",  "workers", "oracle"};

}  // namespace

std::string to_string(ExperimentMode mode)
{
    switch (mode) {
    case ExperimentMode::lemma1:
        return "lemma1";
    case ExperimentMode::prop1:
        return "prop1";
    case ExperimentMode::thm1:
        return "thm1";
    case ExperimentMode::cor3:
        return "cor3";
    case ExperimentMode::pd:
        return "pd";
    case ExperimentMode::oracle_crosscheck:
        return "oracle-crosscheck";
    }
    return "unknown";
}

ExperimentMode experiment_mode_from_string(const std::string& name)
{
    for (auto m : {ExperimentMode::lemma1, ExperimentMode::prop1, ExperimentMode::thm1, ExperimentMode::cor3,
                   ExperimentMode::pd, ExperimentMode::oracle_crosscheck})
        if (to_string(m) == name)
            return m;
    throw InvalidArgument("unknown mode '" + name + "'");
}

Json to_json(const ExperimentConfig& c)
{
    Json norms = Json::array();
    for (auto f : c.norms)
        norms.push_back(to_string(f));
    return {{"mode", to_string(c.mode)},
            {"n_min", c.n_min},
            {"n_max", c.n_max},
            {"k", c.k ? Json(*c.k) : Json(nullptr)},
            {"q", c.q_values},
            {"p_range", c.p_range ? Json{c.p_range->first, c.p_range->second} : Json(nullptr)},
            {"p_values", c.p_values},
            {"norms", norms},
            {"trials", c.trials},
            {"samples", c.samples},
            {"seed", c.seed},
            {"max_dim", c.max_dim},
            {"output", c.output},
            {"workers", c.workers},
            {"oracle", c.oracle}};
}

ExperimentConfig experiment_config_from_json(const Json& j)
{
    if (!j.is_object())
        throw InvalidArgument("experiment config must be a JSON object");
    for (const auto& [key, value] : j.items())
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end())
            throw InvalidArgument("unknown config key '" + key + "'");
    ExperimentConfig c;
    try {
        if (j.contains("mode"))
            c.mode = experiment_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("n_min"))
            c.n_min = j.at("n_min").get<std::size_t>();
        if (j.contains("n_max"))
            c.n_max = j.at("n_max").get<std::size_t>();
        if (j.contains("k") && !j.at("k").is_null())
            c.k = j.at("k").get<std::size_t>();
        if (j.contains("q"))
            c.q_values = j.at("q").get<std::vector<double>>();
        if (j.contains("p_range") && !j.at("p_range").is_null()) {
            const auto r = j.at("p_range").get<std::vector<double>>();
            if (r.size() != 2)
                throw InvalidArgument("p_range needs two numbers");
            c.p_range = std::pair{r[0], r[1]};
        }
        if (j.contains("p_values"))
            c.p_values = j.at("p_values").get<std::vector<double>>();
        if (j.contains("norms")) {
            c.norms.clear();
            for (const auto& s : j.at("norms"))
                c.norms.push_back(norm_family_from_string(s.get<std::string>()));
        }
        if (j.contains("trials"))
            c.trials = j.at("trials").get<std::size_t>();
        if (j.contains("samples"))
            c.samples = j.at("samples").get<std::size_t>();
        if (j.contains("seed"))
            c.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("max_dim"))
            c.max_dim = j.at("max_dim").get<std::size_t>();
        if (j.contains("output"))
            c.output = j.at("output").get<std::string>();
        if (j.contains("workers"))
            c.workers = j.at("workers").get<std::size_t>();
        if (j.contains("oracle"))
            c.oracle = j.at("oracle").get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed experiment config: ") + e.what());
    }
    return c;
}

void validate(const ExperimentConfig& c)
{
    if (c.trials == 0)
        throw InvalidArgument("trials must be positive");
    if (c.q_values.empty())
        throw InvalidArgument("at least one q is needed");
    for (double q : c.q_values)
        StableIndex{q};
    if (c.p_range && !c.p_values.empty())
        throw InvalidArgument("give either p_range or p_values, not both");
    if (c.p_range && !(c.p_range->first <= c.p_range->second))
        throw InvalidArgument("p_range is empty");
    for (double p : c.p_values)
        if (!std::isfinite(p))
            throw InvalidArgument("p values must be finite");

    const auto m = c.mode;
    if (m == ExperimentMode::lemma1) {
        if (c.max_dim == 0)
            throw InvalidArgument("max_dim must be positive");
        for (double q : c.q_values)
            check_p(all_p(c, [&](double p) { return power_regime_valid(p, StableIndex(q)); }),
                    "outside 0 < p <= q (or q = 2, p > 2)");
        return;
    }

    if (c.n_min < 2 || c.n_max < c.n_min)
        throw InvalidArgument("dimension range must satisfy 2 <= n_min <= n_max");
    if (c.k && (*c.k == 0 || *c.k >= c.n_min))
        throw InvalidArgument("k must satisfy 1 <= k < n for every n in range");
    const bool mc = m == ExperimentMode::thm1 || m == ExperimentMode::cor3 ||
                    m == ExperimentMode::oracle_crosscheck;
    if (mc && c.samples < 64)
        throw InvalidArgument("at least 64 samples are needed");
    if ((m == ExperimentMode::thm1 || m == ExperimentMode::pd || m == ExperimentMode::oracle_crosscheck) &&
        c.norms.empty())
        throw InvalidArgument("at least one norm family is needed");

    const double lo = static_cast<double>(c.n_min);
    const double hi = static_cast<double>(c.n_max);
    switch (m) {
    case ExperimentMode::prop1:
        for (double q : c.q_values)
            check_p(all_p(c, [&](double p) { return power_regime_valid(p, StableIndex(q)); }),
                    "outside 0 < p <= q (or q = 2, p > 2)");
        break;
    case ExperimentMode::thm1:
        check_p(all_p(c, [&](double p) { return p > -lo && p < 0.0; }), "outside (-n, 0)");
        break;
    case ExperimentMode::oracle_crosscheck:
        if (c.n_min > 2 || c.n_max < 2)
            throw InvalidArgument("oracle cross-check needs n = 2 in range");
        check_p(all_p(c, [&](double p) { return p > -2.0 && p < 0.0; }), "outside (-2, 0)");
        break;
    case ExperimentMode::cor3:
        check_p(all_p(c, [&](double p) { return p > -lo && p < -hi + 1.0; }),
                "outside the open window (-n, -n+1)");
        break;
    case ExperimentMode::pd:
        if (c.n_max > 3)
            throw InvalidArgument("pd checks are available for n in {2, 3}");
        check_p(all_p(c, [&](double p) { return p > -lo && p < 0.0; }), "outside (-n, 0)");
        break;
    case ExperimentMode::lemma1:
        break;
    }
}

Json to_json(const TrialRecord& r)
{
    return {{"trial", r.trial},
            {"config", r.config},
            {"lhs", r.lhs ? number(*r.lhs) : Json(nullptr)},
            {"rhs", r.rhs ? number(*r.rhs) : Json(nullptr)},
            {"margin", number(r.margin)},
            {"tolerance", number(r.tolerance)},
            {"passed", r.passed},
            {"skipped", r.skipped ? Json(*r.skipped) : Json(nullptr)},
            {"details", r.details}};
}

Json summary_json(const VerificationReport& report, const ExperimentConfig& config)
{
    return {{"mode", to_string(report.mode)},
            {"config", to_json(config)},
            {"trials", report.records.size()},
            {"failures", report.failures},
            {"skipped", report.skipped},
            {"min_margin", number(report.min_margin)},
            {"runtime_seconds", report.runtime_seconds},
            {"generator", report.generator},
            {"passed", report.passed()}};
}

void write_jsonl(const VerificationReport& report, std::ostream& out)
{
    for (const auto& r : report.records)
        out << to_json(r).dump() << '\n';
}

void write_csv(const VerificationReport& report, std::ostream& out)
{
    out << "trial,n,k,q,p,family,lhs,rhs,margin,tolerance,passed,skipped\n";
    for (const auto& r : report.records) {
        out << r.trial << ',' << csv_field(r.config, "n") << ',' << csv_field(r.config, "k") << ','
            << csv_field(r.config, "q") << ',' << csv_field(r.config, "p") << ','
            << csv_field(r.config, "family") << ',' << (r.lhs ? csv_number(*r.lhs) : "") << ','
            << (r.rhs ? csv_number(*r.rhs) : "") << ',' << csv_number(r.margin) << ','
            << csv_number(r.tolerance) << ',' << (r.passed ? 1 : 0) << ',' << (r.skipped ? 1 : 0)
            << '\n';
    }
}

VerificationReport run_experiment(const ExperimentConfig& config)
{
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    const std::size_t workers = config.workers == 0 ? default_workers() : config.workers;

    VerificationReport report;
    report.mode = config.mode;
    report.generator = generator_description(config.mode);
    switch (config.mode) {
    case ExperimentMode::lemma1:
        report.records = parallel_trials(config.trials, workers,
                                         [&](std::size_t t) { return lemma1_trial(config, t); });
        break;
    case ExperimentMode::prop1:
        report.records = parallel_trials(config.trials, workers,
                                         [&](std::size_t t) { return prop1_trial(config, t); });
        break;
    case ExperimentMode::pd:
        report.records = parallel_trials(config.trials, workers,
                                         [&](std::size_t t) { return pd_trial(config, t, 1); });
        break;
    case ExperimentMode::thm1:
    case ExperimentMode::cor3:
        for (std::size_t t = 0; t < config.trials; ++t)
            report.records.push_back(thm1_trial(config, t, config.mode == ExperimentMode::cor3, workers));
        break;
    case ExperimentMode::oracle_crosscheck:
        report.records = oracle_trials(config, workers);
        break;
    }

    report.min_margin = std::numeric_limits<double>::infinity();
    for (const auto& r : report.records) {
        if (r.skipped) {
            ++report.skipped;
            continue;
        }
        report.min_margin = std::min(report.min_margin, r.margin);
        if (!r.passed)
            ++report.failures;
    }
    report.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (!config.output.empty()) {
        auto open = [](const std::string& path) {
            std::ofstream out(path, std::ios::binary);
            if (!out)
                throw ResourceError("cannot write " + path);
            return out;
        };
        {
            auto out = open(config.output + ".jsonl");
            write_jsonl(report, out);
        }
        {
            auto out = open(config.output + ".csv");
            write_csv(report, out);
        }
        auto out = open(config.output + ".summary.json");
        out << summary_json(report, config).dump(2) << '\n';
        if (!out)
            throw ResourceError("write to " + config.output + " failed");
    }
    return report;
}

}  // namespace stablecorr
