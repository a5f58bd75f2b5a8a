#include "stablecorr/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

#include <Eigen/Dense>

namespace stablecorr {

StableIndex::StableIndex(double q) : q_(q)
{
    if (!(q > 0.0 && q <= 2.0))
        throw InvalidArgument("stability index must satisfy 0 < q <= 2, got " + std::to_string(q));
}

BlockSplit::BlockSplit(std::size_t k) : k_(k)
{
    if (k < 1)
        throw InvalidArgument("block split requires k >= 1");
}

void BlockSplit::validate(std::size_t n) const
{
    if (k_ >= n)
        throw InvalidArgument("invalid block split: k=" + std::to_string(k_) + " must be < n=" +
                              std::to_string(n));
}

double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += a[i] * b[i];
    return s;
}

namespace {

bool all_zero(std::span<const double> v)
{
    return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

double abs_pow(double x, double q)
{
    x = std::abs(x);
    if (q == 2.0)
        return x * x;
    if (q == 1.0)
        return x;
    return std::pow(x, q);
}

void check_dim(const SpectralRep& rep, std::span<const double> xi)
{
    if (xi.size() != rep.dim())
        throw DimensionMismatch("vector of dimension " + std::to_string(xi.size()) +
                                " does not match representation dimension " +
                                std::to_string(rep.dim()));
}

}  // namespace

SpectralRep::SpectralRep(std::size_t n, StableIndex q, std::vector<Atom> atoms)
    : n_(n), q_(q), atoms_(std::move(atoms))
{
    if (n_ < 1)
        throw InvalidArgument("representation dimension must be positive");
    if (atoms_.empty())
        throw InvalidArgument("representation needs at least one atom");
    bool any_nonzero = false;
    for (const auto& atom : atoms_) {
        if (atom.direction.size() != n_)
            throw DimensionMismatch("atom direction has dimension " +
                                    std::to_string(atom.direction.size()) + ", expected " +
                                    std::to_string(n_));
        if (!(atom.weight > 0.0) || !std::isfinite(atom.weight))
            throw InvalidArgument("atom weights must be positive and finite");
        for (double x : atom.direction)
            if (!std::isfinite(x))
                throw InvalidArgument("atom directions must be finite");
        any_nonzero = any_nonzero || !all_zero(atom.direction);
    }
    if (!any_nonzero)
        throw InvalidArgument("representation is identically zero");
}

std::size_t matrix_rank(std::span<const Vector> rows, std::size_t n)
{
    if (rows.empty() || n == 0)
        return 0;
    Eigen::MatrixXd a(rows.size(), n);
    for (std::size_t j = 0; j < rows.size(); ++j)
        for (std::size_t i = 0; i < n; ++i)
            a(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = rows[j][i];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    const double tol = 1e-12 * s(0) * static_cast<double>(std::max(a.rows(), a.cols()));
    std::size_t r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > tol)
            ++r;
    return r;
}

std::size_t SpectralRep::rank() const
{
    std::vector<Vector> rows;
    rows.reserve(atoms_.size());
    for (const auto& atom : atoms_)
        rows.push_back(atom.direction);
    return matrix_rank(rows, n_);
}

std::string SpectralRep::hash() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint64_t word) {
        for (int b = 0; b < 8; ++b) {
            h ^= (word >> (8 * b)) & 0xffU;
            h *= 0x100000001b3ULL;
        }
    };
    mix(n_);
    mix(std::bit_cast<std::uint64_t>(q_.value()));
    mix(atoms_.size());
    for (const auto& atom : atoms_) {
        mix(std::bit_cast<std::uint64_t>(atom.weight));
        for (double x : atom.direction)
            mix(std::bit_cast<std::uint64_t>(x));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

SpectralRep SpectralRep::canonical() const
{
    std::vector<Atom> out;
    out.reserve(atoms_.size());
    for (const auto& atom : atoms_) {
        double norm = std::sqrt(dot(atom.direction, atom.direction));
        if (norm == 0.0)
            continue;
        Vector unit(atom.direction);
        for (double& x : unit)
            x /= norm;
        out.push_back({atom.weight * std::pow(norm, q()), std::move(unit)});
    }
    return SpectralRep(n_, q_, std::move(out));
}

double q_form(const SpectralRep& rep, std::span<const double> xi)
{
    check_dim(rep, xi);
    const double q = rep.q();
    double s = 0.0;
    for (const auto& atom : rep.atoms())
        s += atom.weight * abs_pow(dot(atom.direction, xi), q);
    return s;
}

double scale_q(const SpectralRep& rep, std::span<const double> xi)
{
    const double s = q_form(rep, xi);
    const double q = rep.q();
    if (q == 1.0)
        return s;
    if (q == 2.0)
        return std::sqrt(s);
    return std::pow(s, 1.0 / q);
}

double char_fn(const SpectralRep& rep, std::span<const double> xi)
{
    return std::exp(-q_form(rep, xi));
}

SpectralRep decouple(const SpectralRep& rep, BlockSplit split)
{
    const std::size_t n = rep.dim();
    const std::size_t k = split.k();
    split.validate(n);
    std::vector<Atom> out;
    out.reserve(2 * rep.atom_count());
    for (const auto& atom : rep.atoms()) {
        Vector first(n, 0.0);
        Vector second(n, 0.0);
        std::copy_n(atom.direction.begin(), k, first.begin());
        std::copy(atom.direction.begin() + k, atom.direction.end(), second.begin() + k);
        if (!all_zero(first))
            out.push_back({atom.weight, std::move(first)});
        if (!all_zero(second))
            out.push_back({atom.weight, std::move(second)});
    }
    return SpectralRep(n, rep.index(), std::move(out));
}

SpectralRep reflect(const SpectralRep& rep, BlockSplit split)
{
    split.validate(rep.dim());
    std::vector<Atom> out(rep.atoms().begin(), rep.atoms().end());
    for (auto& atom : out)
        for (std::size_t i = split.k(); i < rep.dim(); ++i)
            atom.direction[i] = -atom.direction[i];
    return SpectralRep(rep.dim(), rep.index(), std::move(out));
}

SpectralRep marginal_block(const SpectralRep& rep, IndexRange range)
{
    if (range.begin >= range.end || range.end > rep.dim())
        throw InvalidArgument("invalid coordinate range [" + std::to_string(range.begin) + ", " +
                              std::to_string(range.end) + ") for dimension " +
                              std::to_string(rep.dim()));
    std::vector<Atom> out;
    for (const auto& atom : rep.atoms()) {
        Vector part(atom.direction.begin() + static_cast<std::ptrdiff_t>(range.begin),
                    atom.direction.begin() + static_cast<std::ptrdiff_t>(range.end));
        if (!all_zero(part))
            out.push_back({atom.weight, std::move(part)});
    }
    if (out.empty())
        throw InvalidArgument("marginal is degenerate (point mass at the origin)");
    return SpectralRep(range.end - range.begin, rep.index(), std::move(out));
}

}  // namespace stablecorr
