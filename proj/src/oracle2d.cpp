#include "stablecorr/oracle2d.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>

#include <fftw3.h>
#include <json.hpp>

#include "stablecorr/moments.hpp"
#include "stablecorr/quadrature.hpp"
#include "stablecorr/sampling.hpp"

namespace stablecorr {
namespace {

constexpr double kPi = std::numbers::pi;
// -log(1e-12): char_fn is below 1e-12 once the q-form exceeds this.
constexpr double kCutoff = 27.631021115928547;

std::mutex fftw_planner_mutex;

struct FormRange
{
    double min;
    double max;
};

// Extremes of the q-form on the unit circle. Cusps of |(a, xi)|^q sit at
// directions orthogonal to an atom, so those are always candidates.
FormRange form_range(const SpectralRep& rep)
{
    std::vector<double> angles;
    constexpr int kSamples = 4096;
    for (int i = 0; i < kSamples; ++i)
        angles.push_back(kPi * i / kSamples);
    for (const auto& atom : rep.atoms())
        angles.push_back(std::atan2(atom.direction[0], -atom.direction[1]));
    FormRange out{INFINITY, 0.0};
    for (double t : angles) {
        const double xi[2] = {std::cos(t), std::sin(t)};
        const double v = q_form(rep, xi);
        out.min = std::min(out.min, v);
        out.max = std::max(out.max, v);
    }
    return out;
}

void require_plane(const SpectralRep& rep)
{
    if (rep.dim() != 2)
        throw InvalidArgument("density inversion is implemented for n = 2 only");
    if (rep.rank() < 2)
        throw InvalidArgument("rank-one representation has no planar density; use the 1-D reduction");
}

FormRange checked_range(const SpectralRep& rep)
{
    const auto range = form_range(rep);
    if (!(range.min > 0.0) || range.max / range.min > 1e6)
        throw InvalidArgument("q-form condition number above 1e6; use the 1-D reduction");
    return range;
}

// Integral of fn over [0, 2 pi], split at `cuts`; the substitution
// t = a + len (3u^2 - 2u^3) on each piece flattens cusps at the ends.
QuadratureResult circle_integral(const std::function<double(double)>& fn, const std::vector<double>& cuts)
{
    std::vector<double> pts = {0.0, 2.0 * kPi};
    for (double base : cuts)
        for (double t : {base, base + kPi, base - kPi, base + 2.0 * kPi, base - 2.0 * kPi})
            if (t > 0.0 && t < 2.0 * kPi)
                pts.push_back(t);
    std::sort(pts.begin(), pts.end());
    QuadratureOptions qo;
    qo.rel_tol = 1e-11;
    QuadratureResult out;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double a = pts[i];
        const double len = pts[i + 1] - a;
        if (len < 1e-14)
            continue;
        const auto r = integrate(
            [&](double u) { return fn(a + len * u * u * (3.0 - 2.0 * u)) * 6.0 * len * u * (1.0 - u); },
            0.0, 1.0, qo);
        out.value += r.value;
        out.error += r.error;
    }
    return out;
}

// Angles of the lines orthogonal to the given vectors.
std::vector<double> orthogonal_angles(const std::vector<Vector>& normals)
{
    std::vector<double> out;
    for (const auto& c : normals)
        out.push_back(std::atan2(c[1], c[0]) + 0.5 * kPi);
    return out;
}

// Integrals of f(theta), f(theta) theta_a theta_b over the circle.
struct CircleMoments
{
    double m0 = 0.0;
    std::array<double, 3> m2{};  // (00, 01, 11)
    double error = 0.0;
};

CircleMoments circle_moments(const HomogeneousFn& f)
{
    const auto cuts = orthogonal_angles(kink_normals(f));
    CircleMoments out;
    for (int k = 0; k < 4; ++k) {
        const auto r = circle_integral(
            [&](double t) {
                const double x[2] = {std::cos(t), std::sin(t)};
                const double w = k == 0 ? 1.0 : k == 1 ? x[0] * x[0] : k == 2 ? x[0] * x[1] : x[1] * x[1];
                return evaluate(f, x) * w;
            },
            cuts);
        if (k == 0)
            out.m0 = r.value;
        else
            out.m2[k - 1] = r.value;
        out.error += r.error;
    }
    return out;
}

// p(0) = (2 pi)^-2 int_0^{2 pi} Gamma(2/q) / (q Q(theta)^(2/q)) dtheta.
double exact_origin_value(const SpectralRep& rep)
{
    std::vector<Vector> dirs;
    for (const auto& atom : rep.atoms())
        dirs.push_back(atom.direction);
    const double q = rep.q();
    const double g = std::tgamma(2.0 / q) / q;
    const auto r = circle_integral(
        [&](double t) {
            const double x[2] = {std::cos(t), std::sin(t)};
            return g * std::pow(q_form(rep, x), -2.0 / q);
        },
        orthogonal_angles(dirs));
    return r.value / (4.0 * kPi * kPi);
}

// int_0^inf r^k exp(-r^2 / (2 s^2)) dr
double gaussian_radial(double k, double s)
{
    return std::pow(2.0, 0.5 * (k - 1.0)) * std::pow(s, k + 1.0) * std::tgamma(0.5 * (k + 1.0));
}

}  // namespace

double automatic_spacing(const SpectralRep& rep, std::size_t resolution)
{
    require_plane(rep);
    const auto range = checked_range(rep);
    const double q = rep.q();
    const double window = std::pow(kCutoff / range.min, 1.0 / q);
    const double narrow = std::pow(range.min, 1.0 / q);
    const double wide = std::pow(range.max, 1.0 / q);
    const double nyquist = kPi / window;
    if (q < 2.0)
        return nyquist;
    return std::min(nyquist, std::max(narrow / 40.0, 24.0 * wide / static_cast<double>(resolution)));
}

DensityField density_2d(const SpectralRep& rep, const GridSpec& spec)
{
    require_plane(rep);
    const auto range = checked_range(rep);
    const std::size_t m = spec.resolution;
    if (m < 16 || m % 4 != 0)
        throw InvalidArgument("grid resolution must be a multiple of 4 and at least 16");
    const double h = spec.spacing > 0.0 ? spec.spacing : automatic_spacing(rep, m);
    const double q = rep.q();
    const double window = std::pow(kCutoff / range.min, 1.0 / q);
    if (kPi / h < window * (1.0 - 1e-12))
        throw InvalidArgument("grid spacing too coarse: char_fn not negligible at the Nyquist frequency");
    if (q == 2.0 && 0.5 * h * static_cast<double>(m) < 12.0 * std::sqrt(range.max))
        throw NumericalFailure("Gaussian law does not fit in the grid; increase the resolution");

    const std::size_t workers = spec.workers == 0 ? default_workers() : spec.workers;
    const double dxi = 2.0 * kPi / (h * static_cast<double>(m));
    const double norm = dxi * dxi / (4.0 * kPi * kPi);
    const std::size_t half = m / 2;
    const std::size_t cols = half + 1;

    double* input = static_cast<double*>(fftw_malloc(sizeof(double) * m * m));
    auto* output = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m * cols));
    if (input == nullptr || output == nullptr) {
        fftw_free(input);
        fftw_free(output);
        throw ResourceError("cannot allocate FFT buffers");
    }
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex);
        plan = fftw_plan_dft_r2c_2d(static_cast<int>(m), static_cast<int>(m), input, output,
                                    FFTW_ESTIMATE);
    }

    // Samples of char_fn with the (-1)^(k1+k2) shift that centres the output.
    std::vector<std::array<double, 4>> moments(m, {0.0, 0.0, 0.0, 0.0});
    const double window2 = window * window;
    parallel_chunks(m, workers, [&](std::size_t k1) {
        const double x1 = (static_cast<double>(k1) - static_cast<double>(half)) * dxi;
        auto& mom = moments[k1];
        double xi[2] = {x1, 0.0};
        for (std::size_t k2 = 0; k2 < m; ++k2) {
            xi[1] = (static_cast<double>(k2) - static_cast<double>(half)) * dxi;
            double v = 0.0;
            if (xi[0] * xi[0] + xi[1] * xi[1] <= window2)
                v = std::exp(-q_form(rep, xi));
            mom[0] += v;
            mom[1] += v * xi[0] * xi[0];
            mom[2] += v * xi[0] * xi[1];
            mom[3] += v * xi[1] * xi[1];
            input[k1 * m + k2] = ((k1 + k2) % 2 == 0) ? v : -v;
        }
    });
    fftw_execute(plan);
    {
        std::lock_guard lock(fftw_planner_mutex);
        fftw_destroy_plan(plan);
    }

    DensityField field{rep, rep.hash(), m, h, std::vector<double>(m * m), 0.0, 0.0, 0.0, 0.0, 0.0, {}};
    for (std::size_t j1 = 0; j1 < m; ++j1) {
        for (std::size_t j2 = 0; j2 < m; ++j2) {
            double re;
            if (j2 < cols)
                re = output[j1 * cols + j2][0];
            else
                re = output[((m - j1) % m) * cols + (m - j2)][0];
            const double sign = ((j1 + j2) % 2 == 0) ? 1.0 : -1.0;
            field.values[j1 * m + j2] = norm * sign * re;
        }
    }
    fftw_free(input);
    fftw_free(output);

    double sum = 0.0, m0 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (const auto& mom : moments) {
        m0 += mom[0];
        h00 += mom[1];
        h01 += mom[2];
        h11 += mom[3];
    }
    field.origin_value = norm * m0;
    field.origin_alias = field.origin_value - exact_origin_value(rep);
    field.origin_hessian = {-norm * h00, -norm * h01, -norm * h11};

    const double cell = h * h;
    double clipped = 0.0;
    double lowest = 0.0;
    for (double& v : field.values) {
        lowest = std::min(lowest, v);
        if (v < 0.0) {
            clipped -= v * cell;
            v = 0.0;
        }
        sum += v * cell;
    }
    field.min_value = lowest;
    field.clipped_mass = clipped;
    field.mass = sum;
    if (clipped > 1e-4)
        throw NumericalFailure("negative ringing mass " + std::to_string(clipped) + " exceeds 1e-4");

    double asym = 0.0;
    for (std::size_t j1 = 1; j1 < m; ++j1)
        for (std::size_t j2 = 1; j2 < m; ++j2)
            asym = std::max(asym, std::abs(field.at(j1, j2) - field.at(m - j1, m - j2)));
    field.asymmetry = asym;
    return field;
}

OracleResult oracle_expectation(const HomogeneousFn& f, const DensityField& field)
{
    if (f.dim() != 2)
        throw DimensionMismatch("oracle needs a function on R^2");
    const double p = f.exponent();
    if (p <= -2.0)
        throw NonexistentExpectation("f(x) = O(|x|^p) with p <= -2 is not integrable at the origin in R^2");
    if (!expectation_exists(f, field.rep))
        throw NonexistentExpectation("E f(X) is infinite for this exponent and index");

    const std::size_t m = field.resolution;
    const std::size_t half = m / 2;
    const double h = field.spacing;
    const auto range = form_range(field.rep);
    const double s = std::max(0.25 * std::pow(range.min, 1.0 / field.rep.q()), 4.0 * h);
    const double inv = 1.0 / (2.0 * s * s);
    const double p0 = field.origin_value;
    const auto& hs = field.origin_hessian;
    // Quadratic part of the subtracted term, corrected for the Gaussian damping.
    const double c00 = hs[0] + p0 / (s * s);
    const double c01 = hs[1];
    const double c11 = hs[2] + p0 / (s * s);

    std::vector<std::array<double, 2>> rows(m, {0.0, 0.0});
    parallel_chunks(m, default_workers(), [&](std::size_t i) {
        const double x0 = field.coordinate(i);
        const bool even_i = ((i + half) % 2) == 0;
        double fine = 0.0;
        double coarse = 0.0;
        double x[2] = {x0, 0.0};
        for (std::size_t j = 0; j < m; ++j) {
            if (i == half && j == half)
                continue;
            x[1] = field.coordinate(j);
            const double r2 = x[0] * x[0] + x[1] * x[1];
            const double taylor =
                (p0 + 0.5 * (c00 * x[0] * x[0] + 2.0 * c01 * x[0] * x[1] + c11 * x[1] * x[1])) *
                std::exp(-r2 * inv);
            const double v = evaluate(f, x) * (field.at(i, j) - taylor);
            fine += v;
            if (even_i && ((j + half) % 2) == 0)
                coarse += v;
        }
        rows[i] = {fine, coarse};
    });
    double fine = 0.0;
    double coarse = 0.0;
    for (const auto& r : rows) {
        fine += r[0];
        coarse += r[1];
    }
    fine *= h * h;
    coarse *= 4.0 * h * h;

    const auto cm = circle_moments(f);
    const double smooth = p0 * cm.m0 * gaussian_radial(p + 1.0, s) +
                          0.5 * (c00 * cm.m2[0] + 2.0 * c01 * cm.m2[1] + c11 * cm.m2[2]) *
                              gaussian_radial(p + 3.0, s);
    // Mass folded in by periodization, spread as if uniform over the grid.
    const double reach = 0.5 * field.extent();
    const double folded = std::abs(field.origin_alias) * cm.m0 * std::pow(reach, p + 2.0) / (p + 2.0);

    OracleResult out;
    out.value = fine + smooth;
    out.error = std::abs(fine - coarse) + 2.0 * folded +
                cm.error * (p0 * gaussian_radial(p + 1.0, s) + std::abs(c00 + c11) * gaussian_radial(p + 3.0, s));
    out.resolution = m;
    out.spacing = h;
    return out;
}

RefinedDensity refined_density(const SpectralRep& rep, const GridSpec& spec)
{
    GridSpec base = spec;
    if (base.spacing <= 0.0)
        base.spacing = automatic_spacing(rep, base.resolution);
    GridSpec doubled = base;
    doubled.resolution *= 2;
    return {density_2d(rep, base), density_2d(rep, doubled)};
}

OracleResult oracle_expectation(const HomogeneousFn& f, const RefinedDensity& fields)
{
    const auto coarse = oracle_expectation(f, fields.base);
    auto fine = oracle_expectation(f, fields.doubled);
    const double q = fields.doubled.rep.q();
    if (q < 2.0) {
        // Truncation error decays like extent^(p - q).
        const double step = (fine.value - coarse.value) / (std::pow(2.0, q - f.exponent()) - 1.0);
        fine.value += step;
        fine.extrapolation = step;
        fine.error += std::abs(step);
    } else {
        fine.error += std::abs(fine.value - coarse.value);
    }
    return fine;
}

OracleResult adaptive_oracle(const HomogeneousFn& f, const SpectralRep& rep, GridSpec spec, double rel_error,
                             std::size_t max_resolution)
{
    for (;;) {
        const auto o = oracle_expectation(f, refined_density(rep, spec));
        if (o.error <= rel_error * std::abs(o.value) || 2 * spec.resolution > max_resolution)
            return o;
        spec.resolution *= 2;
    }
}

void write_density(const DensityField& field, const std::filesystem::path& stem)
{
    auto bin = stem;
    bin += ".bin";
    auto header = stem;
    header += ".json";
    std::ofstream out(bin, std::ios::binary);
    if (!out)
        throw ResourceError("cannot open " + bin.string());
    out.write(reinterpret_cast<const char*>(field.values.data()),
              static_cast<std::streamsize>(field.values.size() * sizeof(double)));
    if (!out)
        throw ResourceError("write failed: " + bin.string());

    nlohmann::json j;
    j["data"] = bin.filename().string();
    j["dtype"] = "float64";
    j["layout"] = "row-major; value[i][j] at x = ((i - M/2) h, (j - M/2) h)";
    j["resolution"] = field.resolution;
    j["spacing"] = field.spacing;
    j["extent"] = field.extent();
    j["rep_hash"] = field.rep_hash;
    j["q"] = field.rep.q();
    j["mass"] = field.mass;
    j["clipped_mass"] = field.clipped_mass;
    j["min_value"] = field.min_value;
    std::ofstream hout(header);
    if (!hout)
        throw ResourceError("cannot open " + header.string());
    hout << j.dump(2) << '\n';
}

}  // namespace stablecorr
