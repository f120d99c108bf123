#pragma once

#include "errors.hpp"
#include "frames.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace gfmodes {

enum class RotorClass { ProlateSymmetric, OblateSymmetric, Spherical, Asymmetric, Linear };

inline const char* rotor_class_name(RotorClass c)
{
    switch (c) {
    case RotorClass::ProlateSymmetric: return "prolate-symmetric";
    case RotorClass::OblateSymmetric: return "oblate-symmetric";
    case RotorClass::Spherical: return "spherical";
    case RotorClass::Asymmetric: return "asymmetric";
    case RotorClass::Linear: return "linear";
    }
    return "unknown";
}

/// Rotational constants in cm^-1 with a >= b >= c. A linear rotor has a = +inf.
struct RotorSpec {
    double a_const = 0.0;
    double b_const = 0.0;
    double c_const = 0.0;
    RotorClass classification = RotorClass::Asymmetric;
};

struct SymTopState {
    int j = 0;
    int k = 0;
    int m = 0;
};

enum class Parity { EPlus, EMinus, OPlus, OMinus };

inline const char* parity_name(Parity p)
{
    switch (p) {
    case Parity::EPlus: return "E+";
    case Parity::EMinus: return "E-";
    case Parity::OPlus: return "O+";
    case Parity::OMinus: return "O-";
    }
    return "?";
}

/// (|J,k,0> + sign |J,-k,0>) / sqrt(2); k = 0 is the plain |J,0,0>.
struct WangLabel {
    int k = 0;
    int sign = 1;
};

struct AsymTopBlock {
    int j = 0;
    Parity parity_class = Parity::EPlus;
    std::vector<WangLabel> basis;
    Eigen::MatrixXd hmatrix;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
};

struct RotorLevel {
    int j = 0;
    Parity parity_class = Parity::EPlus;
    int index = 0; // position within its block, ascending energy
    double energy = 0.0;
    int degeneracy = 1;
};

struct FrobeniusSolution {
    double energy = 0.0;
    std::vector<double> coefficients; // a_0 .. a_nmax with a_0 = 1
    double next_coefficient = 0.0;    // a_{nmax+1}, zero when the series truncates
    int n_max = 0;
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
};

namespace detail {

inline bool nearly_equal(double x, double y)
{
    return std::abs(x - y) <= 1e-9 * std::max(std::abs(x), std::abs(y));
}

inline void check_state(int j, int k, int m)
{
    if (j < 0 || std::abs(k) > j || std::abs(m) > j)
        throw Error(Errc::InvalidQuantumNumbers,
            "need |k|, |m| <= J, got J=" + std::to_string(j) + " k=" + std::to_string(k) + " m=" + std::to_string(m));
}

/// Constant multiplying k^2 in the symmetric-top energy, replacing A for oblate tops.
inline double unique_constant(const RotorSpec& s)
{
    switch (s.classification) {
    case RotorClass::ProlateSymmetric: return s.a_const;
    case RotorClass::OblateSymmetric: return s.c_const;
    case RotorClass::Spherical:
    case RotorClass::Linear: return s.b_const;
    case RotorClass::Asymmetric: break;
    }
    throw Error(Errc::NotSymmetricTop, "rotor is asymmetric");
}

inline double factorial(int n)
{
    double f = 1.0;
    for (int i = 2; i <= n; ++i)
        f *= i;
    return f;
}

} // namespace detail

inline RotorSpec classify(double a, double b, double c)
{
    std::array<double, 3> v{a, b, c};
    for (double x : v)
        if (std::isnan(x) || x < 0.0 || x == -std::numeric_limits<double>::infinity())
            throw Error(Errc::NonPositiveConstant, "rotational constants must be positive");
    std::sort(v.begin(), v.end(), std::greater<>());
    RotorSpec s;
    // a zero or infinite constant marks the vanishing moment of a linear rotor
    const int undefined = static_cast<int>(std::count_if(v.begin(), v.end(),
        [](double x) { return x == 0.0 || std::isinf(x); }));
    if (undefined > 0) {
        double b1 = 0.0, b2 = 0.0;
        int n = 0;
        for (double x : v)
            if (x != 0.0 && !std::isinf(x))
                (n++ == 0 ? b1 : b2) = x;
        if (undefined != 1 || !detail::nearly_equal(b1, b2))
            throw Error(Errc::NonPositiveConstant, "only a linear rotor may have an undefined constant");
        s.a_const = std::numeric_limits<double>::infinity();
        s.b_const = b1;
        s.c_const = b2;
        s.classification = RotorClass::Linear;
        return s;
    }
    s.a_const = v[0];
    s.b_const = v[1];
    s.c_const = v[2];
    const bool ab = detail::nearly_equal(v[0], v[1]);
    const bool bc = detail::nearly_equal(v[1], v[2]);
    if (ab && bc)
        s.classification = RotorClass::Spherical;
    else if (bc)
        s.classification = RotorClass::ProlateSymmetric;
    else if (ab)
        s.classification = RotorClass::OblateSymmetric;
    else
        s.classification = RotorClass::Asymmetric;
    return s;
}

/// E = B J(J+1) + (X - B) k^2 with X = A (prolate) or C (oblate).
inline double symmetric_top_energy(const RotorSpec& s, int j, int k)
{
    detail::check_state(j, k, 0);
    if (s.classification == RotorClass::Linear && k != 0)
        throw Error(Errc::InvalidQuantumNumbers, "linear rotor has k = 0 only");
    const double x = detail::unique_constant(s);
    return s.b_const * j * (j + 1) + (x - s.b_const) * k * k;
}

/// Truncated power series solution of the symmetric-top polar equation.
inline FrobeniusSolution frobenius_solve(const RotorSpec& s, int k, int m, int j_target)
{
    if (j_target < 0)
        throw Error(Errc::InvalidQuantumNumbers, "J must be non-negative");
    const int p = std::abs(k - m), q = std::abs(k + m);
    const int n_max = j_target - (p + q) / 2;
    if (n_max < 0)
        throw Error(Errc::NegativeNmax, "no terminating series for these k, m at this J");
    const double x = detail::unique_constant(s);

    FrobeniusSolution sol;
    sol.n_max = n_max;
    sol.alpha = 1.0 + p;
    sol.beta = sol.alpha + 1.0 + q;
    sol.gamma = sol.beta * n_max + static_cast<double>(n_max) * (n_max - 1);
    const double delta = sol.gamma + sol.beta * (sol.beta - 2.0) / 4.0;
    sol.energy = s.b_const * delta + (x - s.b_const) * k * k;

    double an = 1.0;
    sol.coefficients.push_back(an);
    for (int n = 0; n <= n_max; ++n) {
        const double num = static_cast<double>(n) * (n - 1) + sol.beta * n - sol.gamma;
        an *= num / ((n + 1.0) * (n + sol.alpha));
        if (n < n_max)
            sol.coefficients.push_back(an);
        else
            sol.next_coefficient = an;
    }
    return sol;
}

/// Normalized symmetric-top eigenfunction as an explicit finite sum.
inline std::complex<double> wavefunction_value(const SymTopState& st, const EulerAngles& e)
{
    const int j = st.j, k = st.k, m = st.m;
    detail::check_state(j, k, m);
    using detail::factorial;
    const double norm = std::sqrt(factorial(j + m) * factorial(j - m) * factorial(j + k) * factorial(j - k)
        * (2 * j + 1) / (8.0 * std::numbers::pi * std::numbers::pi));
    const double ch = std::cos(0.5 * e.theta), sh = -std::sin(0.5 * e.theta);
    double sum = 0.0;
    for (int sg = std::max(0, k - m); sg <= std::min(j - m, j + k); ++sg) {
        const double sign = sg % 2 == 0 ? 1.0 : -1.0;
        sum += sign * std::pow(ch, 2 * j + k - m - 2 * sg) * std::pow(sh, m - k + 2 * sg)
            / (factorial(sg) * factorial(j - m - sg) * factorial(m - k + sg) * factorial(j + k - sg));
    }
    return norm * sum * std::polar(1.0, m * e.phi + k * e.chi);
}

enum class LadderFamily { JSquared, Jz, JRho3, SpaceRaise, SpaceLower, MoleculePlus, MoleculeMinus };

/// <bra_k, bra_m | op | ket_k, ket_m> in units of hbar (hbar^2 for J^2).
struct LadderElement {
    LadderFamily family;
    int bra_k, bra_m, ket_k, ket_m;
    double value;
};

/// <J,k-+1|J^+-_m|J,k>: J^+_m lowers k, J^-_m raises it.
inline double molecule_ladder(int j, int k, int sign)
{
    const double v = j * (j + 1.0) - k * (k - static_cast<double>(sign));
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

/// <J,m+-1|J^+-_s|J,m>
inline double space_ladder(int j, int m, int sign)
{
    const double v = j * (j + 1.0) - m * (m + static_cast<double>(sign));
    return v > 0.0 ? std::sqrt(v) : 0.0;
}

/// Every nonzero element of the five operator families for one J.
inline std::vector<LadderElement> ladder_matrix_elements(int j)
{
    if (j < 0)
        throw Error(Errc::InvalidQuantumNumbers, "J must be non-negative");
    std::vector<LadderElement> out;
    for (int k = -j; k <= j; ++k) {
        for (int m = -j; m <= j; ++m) {
            out.push_back({LadderFamily::JSquared, k, m, k, m, j * (j + 1.0)});
            if (k != 0)
                out.push_back({LadderFamily::Jz, k, m, k, m, static_cast<double>(k)});
            if (m != 0)
                out.push_back({LadderFamily::JRho3, k, m, k, m, static_cast<double>(m)});
            if (m < j)
                out.push_back({LadderFamily::SpaceRaise, k, m + 1, k, m, space_ladder(j, m, +1)});
            if (m > -j)
                out.push_back({LadderFamily::SpaceLower, k, m - 1, k, m, space_ladder(j, m, -1)});
            if (k > -j)
                out.push_back({LadderFamily::MoleculePlus, k - 1, m, k, m, molecule_ladder(j, k, +1)});
            if (k < j)
                out.push_back({LadderFamily::MoleculeMinus, k + 1, m, k, m, molecule_ladder(j, k, -1)});
        }
    }
    return out;
}

/// Molecule-fixed operators on |J,k>, basis index k + J.
struct MoleculeFrameOperators {
    Eigen::MatrixXd j_plus;
    Eigen::MatrixXd j_minus;
    Eigen::MatrixXd jz;
    Eigen::MatrixXcd jx;
    Eigen::MatrixXcd jy;
};

inline MoleculeFrameOperators molecule_frame_operators(int j)
{
    if (j < 0)
        throw Error(Errc::InvalidQuantumNumbers, "J must be non-negative");
    const int n = 2 * j + 1;
    MoleculeFrameOperators ops;
    ops.j_plus = Eigen::MatrixXd::Zero(n, n);
    ops.j_minus = Eigen::MatrixXd::Zero(n, n);
    ops.jz = Eigen::MatrixXd::Zero(n, n);
    for (int k = -j; k <= j; ++k) {
        ops.jz(k + j, k + j) = k;
        if (k > -j)
            ops.j_plus(k - 1 + j, k + j) = molecule_ladder(j, k, +1);
        if (k < j)
            ops.j_minus(k + 1 + j, k + j) = molecule_ladder(j, k, -1);
    }
    const std::complex<double> i(0.0, 1.0);
    ops.jx = 0.5 * (ops.j_plus + ops.j_minus).cast<std::complex<double>>();
    ops.jy = ((ops.j_plus - ops.j_minus).cast<std::complex<double>>()) / (2.0 * i);
    return ops;
}

/// Rigid-rotor Hamiltonian in |J,k,0>, k = -J..J, in cm^-1.
inline Eigen::MatrixXd asymmetric_hamiltonian(const RotorSpec& s, int j)
{
    if (j < 0)
        throw Error(Errc::InvalidQuantumNumbers, "J must be non-negative");
    if (s.classification == RotorClass::Linear) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(2 * j + 1, 2 * j + 1);
        h(j, j) = s.b_const * j * (j + 1);
        return h;
    }
    const MoleculeFrameOperators ops = molecule_frame_operators(j);
    const int n = 2 * j + 1;
    const double bc = 0.5 * (s.b_const + s.c_const);
    Eigen::MatrixXd h = bc * j * (j + 1) * Eigen::MatrixXd::Identity(n, n)
        + (s.a_const - bc) * ops.jz * ops.jz
        + 0.25 * (s.b_const - s.c_const) * (ops.j_plus * ops.j_plus + ops.j_minus * ops.j_minus);
    return 0.5 * (h + h.transpose());
}

namespace detail {

inline Parity parity_of(const WangLabel& w)
{
    const bool even = w.k % 2 == 0;
    if (w.sign > 0)
        return even ? Parity::EPlus : Parity::OPlus;
    return even ? Parity::EMinus : Parity::OMinus;
}

/// Columns are the Wang combinations in the order k = 0, 1+, 1-, 2+, 2-, ...
inline Eigen::MatrixXd wang_transform(int j, std::vector<WangLabel>& labels)
{
    const int n = 2 * j + 1;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, n);
    labels.clear();
    x(j, 0) = 1.0;
    labels.push_back({0, 1});
    int col = 1;
    const double r = 1.0 / std::sqrt(2.0);
    for (int k = 1; k <= j; ++k) {
        for (int sign : {1, -1}) {
            x(k + j, col) = r;
            x(-k + j, col) = sign * r;
            labels.push_back({k, sign});
            ++col;
        }
    }
    return x;
}

} // namespace detail

/// Largest Hamiltonian element coupling different parity classes after the Wang transform.
inline double cross_block_residual(const Eigen::MatrixXd& h, int j)
{
    std::vector<WangLabel> labels;
    const Eigen::MatrixXd x = detail::wang_transform(j, labels);
    const Eigen::MatrixXd hw = x.transpose() * h * x;
    double worst = 0.0;
    for (size_t a = 0; a < labels.size(); ++a)
        for (size_t b = 0; b < labels.size(); ++b)
            if (detail::parity_of(labels[a]) != detail::parity_of(labels[b]))
                worst = std::max(worst, std::abs(hw(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b))));
    return worst;
}

/// Parity blocks of a single-J Hamiltonian; empty blocks are omitted.
inline std::vector<AsymTopBlock> wang_blocks(const Eigen::MatrixXd& h, int j)
{
    if (j < 0 || h.rows() != 2 * j + 1 || h.cols() != 2 * j + 1)
        throw Error(Errc::DimensionMismatch, "Hamiltonian size differs from 2J+1");
    std::vector<WangLabel> labels;
    const Eigen::MatrixXd x = detail::wang_transform(j, labels);
    const Eigen::MatrixXd hw = x.transpose() * h * x;
    std::vector<AsymTopBlock> out;
    for (Parity p : {Parity::EPlus, Parity::EMinus, Parity::OPlus, Parity::OMinus}) {
        std::vector<Eigen::Index> idx;
        AsymTopBlock blk;
        blk.j = j;
        blk.parity_class = p;
        for (size_t c = 0; c < labels.size(); ++c)
            if (detail::parity_of(labels[c]) == p) {
                idx.push_back(static_cast<Eigen::Index>(c));
                blk.basis.push_back(labels[c]);
            }
        if (idx.empty())
            continue;
        const auto d = static_cast<Eigen::Index>(idx.size());
        blk.hmatrix.resize(d, d);
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b)
                blk.hmatrix(a, b) = hw(idx[a], idx[b]);
        blk.hmatrix = 0.5 * (blk.hmatrix + blk.hmatrix.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(blk.hmatrix);
        blk.eigenvalues = es.eigenvalues();
        blk.eigenvectors = es.eigenvectors();
        out.push_back(std::move(blk));
    }
    return out;
}

/// All levels for J = 0..j_max, ascending within each J; m-degeneracy 2J+1 is recorded.
inline std::vector<RotorLevel> asymmetric_levels(const RotorSpec& s, int j_max)
{
    if (j_max < 0)
        throw Error(Errc::InvalidQuantumNumbers, "j_max must be non-negative");
    std::vector<RotorLevel> out;
    for (int j = 0; j <= j_max; ++j) {
        std::vector<RotorLevel> lv;
        if (s.classification == RotorClass::Linear) {
            lv.push_back({j, Parity::EPlus, 0, s.b_const * j * (j + 1), 2 * j + 1});
        } else {
            for (const auto& blk : wang_blocks(asymmetric_hamiltonian(s, j), j))
                for (Eigen::Index i = 0; i < blk.eigenvalues.size(); ++i)
                    lv.push_back({j, blk.parity_class, static_cast<int>(i), blk.eigenvalues(i), 2 * j + 1});
        }
        std::stable_sort(lv.begin(), lv.end(), [](const RotorLevel& a, const RotorLevel& b) { return a.energy < b.energy; });
        out.insert(out.end(), lv.begin(), lv.end());
    }
    return out;
}

} // namespace gfmodes
