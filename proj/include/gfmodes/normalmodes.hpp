#pragma once

#include "constants.hpp"
#include "errors.hpp"
#include "molecule.hpp"
#include "quadform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <optional>
#include <vector>

namespace gfmodes {

struct ForceField {
    SymMatrix f;
    // f_ijk flattened as (i * n + j) * n + k; kept for callers, unused by the harmonic solve
    std::optional<std::vector<double>> cubic;
};

struct NormalModeResult {
    Eigen::VectorXd lambdas;        // ascending
    Eigen::VectorXd frequencies;    // sqrt(lambda), negative for unstable modes
    Eigen::MatrixXd L;              // S = L Q
    Eigen::MatrixXd l;              // 3N x count, empty until with_cartesian
    Eigen::MatrixXd cart_displacements; // column s is the Cartesian image of Q_s
    UnitMode units = UnitMode::Natural;
};

inline Eigen::VectorXd frequencies_cm(const Eigen::VectorXd& lambdas, UnitMode mode)
{
    const double conv = mode == UnitMode::Spectroscopic ? wavenumber_per_sqrt_lambda() : 1.0;
    Eigen::VectorXd out(lambdas.size());
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        const double l = lambdas(i);
        out(i) = l >= -1e-10 ? conv * std::sqrt(std::max(l, 0.0)) : -conv * std::sqrt(-l);
    }
    return out;
}

inline NormalModeResult solve(const SymMatrix& g, const ForceField& ff, UnitMode units = UnitMode::Natural)
{
    if (g.dim() != ff.f.dim())
        throw Error(Errc::DimensionMismatch, "G and F have different dimensions");
    if (!is_positive_definite(g))
        throw Error(Errc::NotPositiveDefinite, "G is not positive definite");
    const SymMatrix ginv = matrix_power(g, -1.0);
    const PairDiagonalization pd = simultaneous_diagonalize(ginv, ff.f);
    NormalModeResult res;
    res.lambdas = pd.lambdas;
    res.L = pd.beta;
    res.units = units;
    res.frequencies = frequencies_cm(res.lambdas, units);
    return res;
}

/// l = M^-1/2 B^T G^-1 L for an internal-coordinate B matrix.
inline Eigen::MatrixXd l_matrix(const NormalModeResult& res, const BMatrix& b, const MassMatrix& masses)
{
    if (b.rows.cols() != masses.diagonal.size() || b.rows.rows() != res.L.rows())
        throw Error(Errc::DimensionMismatch, "B, masses and L do not agree");
    const SymMatrix g = build_g_matrix(b, masses);
    const Eigen::MatrixXd ginv_l = g.matrix().ldlt().solve(res.L);
    return masses.diagonal.cwiseSqrt().cwiseInverse().asDiagonal() * b.rows.transpose() * ginv_l;
}

/// Per-mode Cartesian displacement vectors M^-1/2 l, one column per mode.
inline Eigen::MatrixXd cartesian_displacements(const NormalModeResult& res, const BMatrix& b, const MassMatrix& masses)
{
    return masses.diagonal.cwiseSqrt().cwiseInverse().asDiagonal() * l_matrix(res, b, masses);
}

inline NormalModeResult with_cartesian(NormalModeResult res, const BMatrix& b, const MassMatrix& masses)
{
    res.l = l_matrix(res, b, masses);
    res.cart_displacements = masses.diagonal.cwiseSqrt().cwiseInverse().asDiagonal() * res.l;
    return res;
}

inline std::vector<Molecule> mode_animation(const Molecule& mol, const Eigen::VectorXd& mode, double amplitude, int frames)
{
    if (frames < 2)
        throw Error(Errc::InvalidArgument, "animation needs at least two frames");
    if (!(amplitude > 0.0))
        throw Error(Errc::InvalidArgument, "amplitude must be positive");
    if (mode.size() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "mode vector length differs from 3N");
    std::vector<Molecule> out;
    out.reserve(frames);
    for (int t = 0; t < frames; ++t) {
        const double s = t == 0 ? 0.0 : std::sin(2.0 * std::numbers::pi * t / frames);
        out.push_back(mol.displaced(amplitude * s * mode));
    }
    return out;
}

} // namespace gfmodes
