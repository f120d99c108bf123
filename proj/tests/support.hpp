#pragma once

#include <gfmodes/gfmodes.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace testing_support {

inline Eigen::MatrixXd random_orthogonal(int n, std::mt19937& rng)
{
    std::normal_distribution<double> nd;
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a(i, j) = nd(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    return qr.householderQ();
}

/// Symmetric positive definite with eigenvalues drawn from [lo, hi].
inline Eigen::MatrixXd random_spd(int n, std::mt19937& rng, double lo = 0.5, double hi = 5.0)
{
    std::uniform_real_distribution<double> ud(lo, hi);
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i)
        d(i) = ud(rng);
    const Eigen::MatrixXd q = random_orthogonal(n, rng);
    Eigen::MatrixXd m = q * d.asDiagonal() * q.transpose();
    return 0.5 * (m + m.transpose());
}

inline gfmodes::Molecule water()
{
    using gfmodes::Atom;
    return gfmodes::Molecule({
        Atom{"O", 15.995, {0.0, 0.0, 0.1173}},
        Atom{"H", 1.008, {0.0, 0.7572, -0.4692}},
        Atom{"H", 1.008, {0.0, -0.7572, -0.4692}},
    });
}

inline gfmodes::InternalCoordinateSet water_coordinates()
{
    return {gfmodes::BondStretch{0, 1}, gfmodes::BondStretch{0, 2}, gfmodes::AngleBend{1, 0, 2}};
}

inline gfmodes::SymMatrix water_force_field()
{
    Eigen::Matrix3d f;
    f << 8.4, -0.1, 0.25, -0.1, 8.4, 0.25, 0.25, 0.25, 0.7;
    return gfmodes::SymMatrix(f);
}

/// Water normal modes with the l matrix attached.
inline gfmodes::NormalModeResult water_modes()
{
    const auto mol = water();
    const auto b = gfmodes::build_b_matrix(mol, water_coordinates());
    const auto mm = gfmodes::mass_matrix(mol);
    const auto g = gfmodes::build_g_matrix(b, mm);
    return gfmodes::with_cartesian(gfmodes::solve(g, {water_force_field(), std::nullopt}), b, mm);
}

// Independent internal-coordinate values for finite-difference checks.
inline double dist(const Eigen::Vector3d& a, const Eigen::Vector3d& b) { return (a - b).norm(); }

inline double angle(const Eigen::Vector3d& a, const Eigen::Vector3d& apex, const Eigen::Vector3d& c)
{
    const Eigen::Vector3d u = a - apex, v = c - apex;
    return std::atan2(u.cross(v).norm(), u.dot(v));
}

inline double dihedral(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1, const Eigen::Vector3d& p2,
    const Eigen::Vector3d& p3)
{
    const Eigen::Vector3d b1 = p1 - p0, b2 = p2 - p1, b3 = p3 - p2;
    const Eigen::Vector3d n1 = b1.cross(b2), n2 = b2.cross(b3);
    return std::atan2(b2.norm() * b1.dot(n2), n1.dot(n2));
}

/// Nodes and weights of n-point Gauss-Legendre quadrature on [-1, 1].
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n)
{
    std::vector<double> x(static_cast<size_t>(n)), w(static_cast<size_t>(n));
    const auto legendre = [n](double z, double& dp) {
        double p0 = 1.0, p1 = z;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (z * p1 - p0) / (z * z - 1);
        return p1;
    };
    for (int i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            const double step = legendre(z, dp) / dp;
            z -= step;
            if (std::abs(step) < 1e-16)
                break;
        }
        legendre(z, dp);
        x[static_cast<size_t>(i)] = z;
        w[static_cast<size_t>(i)] = 2.0 / ((1 - z * z) * dp * dp);
    }
    return {x, w};
}

} // namespace testing_support
