#include "stablecorr/json_io.hpp"

#include <cmath>
#include <limits>

namespace stablecorr {
namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const Json& field(const Json& j, const char* key)
{
    if (!j.is_object() || !j.contains(key))
        throw InvalidArgument(std::string("missing field '") + key + "'");
    return j.at(key);
}

Vector vector_from(const Json& j)
{
    if (!j.is_array())
        throw InvalidArgument("expected an array of numbers");
    Vector v;
    for (const auto& x : j) {
        if (!x.is_number())
            throw InvalidArgument("expected an array of numbers");
        v.push_back(x.get<double>());
    }
    return v;
}

Json optional_number(const std::optional<double>& x) { return x ? number(*x) : Json(nullptr); }

}  // namespace

Json number(double x)
{
    if (std::isfinite(x))
        return x;
    if (std::isnan(x))
        return "nan";
    return x > 0 ? "inf" : "-inf";
}

double parse_number(const Json& j)
{
    if (j.is_number())
        return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf")
            return std::numeric_limits<double>::infinity();
        if (s == "-inf")
            return -std::numeric_limits<double>::infinity();
        if (s == "nan")
            return std::numeric_limits<double>::quiet_NaN();
    }
    throw InvalidArgument("expected a number");
}

Json to_json(const Seed& seed) { return {{"seed", seed.seed}, {"stream_id", seed.stream_id}}; }

Seed seed_from_json(const Json& j)
{
    Seed s;
    s.seed = field(j, "seed").get<std::uint64_t>();
    if (j.contains("stream_id"))
        s.stream_id = j.at("stream_id").get<std::uint64_t>();
    return s;
}

Json to_json(const SpectralRep& rep)
{
    Json atoms = Json::array();
    for (const auto& a : rep.atoms())
        atoms.push_back({{"weight", a.weight}, {"direction", a.direction}});
    return {{"n", rep.dim()}, {"q", rep.q()}, {"atoms", atoms}};
}

SpectralRep spectral_rep_from_json(const Json& j)
{
    try {
        std::vector<Atom> atoms;
        for (const auto& a : field(j, "atoms"))
            atoms.push_back({field(a, "weight").get<double>(), vector_from(field(a, "direction"))});
        return SpectralRep(field(j, "n").get<std::size_t>(), StableIndex(field(j, "q").get<double>()),
                           std::move(atoms));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed representation: ") + e.what());
    }
}

Json to_json(const LevyMeasure& gamma)
{
    Json entries = Json::array();
    for (const auto& e : gamma.entries())
        entries.push_back({{"weight", e.weight}, {"direction", e.direction}});
    return {{"exponent", gamma.exponent()}, {"entries", entries}};
}

LevyMeasure levy_measure_from_json(const Json& j)
{
    try {
        std::vector<LevyEntry> entries;
        for (const auto& e : field(j, "entries"))
            entries.push_back({field(e, "weight").get<double>(), vector_from(field(e, "direction"))});
        return LevyMeasure(field(j, "exponent").get<double>(), std::move(entries));
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed Levy measure: ") + e.what());
    }
}

Json to_json(const HomogeneousFn& f)
{
    Json norm = std::visit(
        overloaded{
            [](const DiscreteLrNorm& b) -> Json { return {{"kind", "lr"}, {"rows", b.rows}, {"r", b.r}}; },
            [](const MaxAbsNorm& b) -> Json { return {{"kind", "max_abs"}, {"n", b.n}}; },
            [](const EuclideanNorm& b) -> Json { return {{"kind", "euclidean"}, {"weights", b.weights}}; },
            [](const LevyNorm& b) -> Json { return {{"kind", "levy"}, {"measure", to_json(b.measure)}}; },
        },
        f.base());
    Json j = {{"norm", norm}, {"p", f.exponent()}};
    j["block_k"] = f.declared_block_symmetry() ? Json(*f.declared_block_symmetry()) : Json(nullptr);
    return j;
}

HomogeneousFn homogeneous_from_json(const Json& j)
{
    try {
        const Json& norm = field(j, "norm");
        const auto kind = field(norm, "kind").get<std::string>();
        NormDescriptor base;
        if (kind == "lr") {
            std::vector<Vector> rows;
            for (const auto& r : field(norm, "rows"))
                rows.push_back(vector_from(r));
            base = DiscreteLrNorm{std::move(rows), field(norm, "r").get<double>()};
        } else if (kind == "max_abs") {
            base = MaxAbsNorm{field(norm, "n").get<std::size_t>()};
        } else if (kind == "euclidean") {
            base = EuclideanNorm{vector_from(field(norm, "weights"))};
        } else if (kind == "levy") {
            base = LevyNorm{levy_measure_from_json(field(norm, "measure"))};
        } else {
            throw InvalidArgument("unknown norm kind '" + kind + "'");
        }
        std::optional<std::size_t> k;
        if (j.contains("block_k") && !j.at("block_k").is_null())
            k = j.at("block_k").get<std::size_t>();
        return HomogeneousFn(std::move(base), field(j, "p").get<double>(), k);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidArgument(std::string("malformed function: ") + e.what());
    }
}

Json to_json(const MCEstimate& est)
{
    return {{"value", number(est.value)},
            {"std_error", optional_number(est.std_error)},
            {"deviation_bound", optional_number(est.deviation_bound)},
            {"n_samples", est.n_samples},
            {"estimator", to_string(est.estimator)},
            {"blocks", est.blocks},
            {"rep_hash", est.rep_hash},
            {"seed", to_json(est.seed)},
            {"tail", est.tail ? Json{{"index", number(est.tail->index)},
                                     {"threshold", number(est.tail->threshold)},
                                     {"replaced", est.tail->replaced},
                                     {"hill_ratio", number(est.tail->hill_ratio)}}
                              : Json(nullptr)}};
}

Json to_json(const TestFunction& phi)
{
    Json shape = std::visit(
        overloaded{
            [](const GaussianTest& g) -> Json {
                return {{"kind", "gaussian"}, {"center", g.center}, {"sigma", g.sigma}};
            },
            [](const BumpTest& b) -> Json {
                return {{"kind", "bump"}, {"center", b.center}, {"radius", b.radius}, {"power", b.power}};
            },
        },
        phi.shape);
    shape["scale"] = phi.scale;
    return shape;
}

Json to_json(const PDReport& report)
{
    return {{"min_action", number(report.min_action)},
            {"witness", to_json(report.witness)},
            {"verdict", to_string(report.verdict)},
            {"quadrature_error_bound", number(report.quadrature_error_bound)},
            {"evaluated", report.evaluated},
            {"mode", to_string(report.mode)},
            {"family", report.family}};
}

Json to_json(const Prop1Result& r)
{
    return {{"ex", number(r.ex)},         {"ey", number(r.ey)},
            {"ex_minus", number(r.ex_minus)}, {"margin", number(r.margin)},
            {"margin_sum", number(r.margin_sum)}, {"scale", number(r.scale)},
            {"reversed", r.reversed},     {"normalized", r.normalized},
            {"passed", r.passed}};
}

Json to_json(const Thm1Result& r)
{
    Json j;
    j["x"] = r.x ? to_json(*r.x) : Json(nullptr);
    j["y"] = to_json(r.y);
    j["margin"] = number(r.margin);
    j["combined_uncertainty"] = number(r.combined_uncertainty);
    j["passed"] = r.passed;
    j["certificate"] = r.certificate ? Json(*r.certificate) : Json(nullptr);
    j["flags"] = r.flags;
    if (r.oracle) {
        const auto& o = *r.oracle;
        j["oracle"] = {{"ex", number(o.ex)},         {"ey", number(o.ey)},
                       {"ex_error", number(o.ex_error)}, {"ey_error", number(o.ey_error)},
                       {"margin", number(o.margin)}, {"error", number(o.error)},
                       {"agrees_with_mc", o.agrees_with_mc}, {"passed", o.passed}};
    } else {
        j["oracle"] = nullptr;
    }
    j["oracle_skipped"] = r.oracle_skipped ? Json(*r.oracle_skipped) : Json(nullptr);
    return j;
}

}  // namespace stablecorr
