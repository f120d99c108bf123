#pragma once

#include "errors.hpp"
#include "molecule.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace gfmodes {

struct EulerAngles {
    double phi = 0.0;
    double theta = 0.0;
    double chi = 0.0;
};

namespace detail {

inline double wrap_2pi(double x)
{
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double r = std::fmod(x, two_pi);
    if (r < 0)
        r += two_pi;
    return r >= two_pi ? 0.0 : r;
}

inline void gimbal_guard(double theta, double tol)
{
    if (std::abs(std::sin(theta)) <= tol)
        throw Error(Errc::GimbalSingularity, "sin(theta) vanishes");
}

} // namespace detail

/// Same rotation with phi, chi in [0, 2pi) and theta in [0, pi].
inline EulerAngles wrapped(EulerAngles e)
{
    double th = detail::wrap_2pi(e.theta);
    if (th > std::numbers::pi) {
        th = 2.0 * std::numbers::pi - th;
        e.phi += std::numbers::pi;
        e.chi += std::numbers::pi;
    }
    return {detail::wrap_2pi(e.phi), th, detail::wrap_2pi(e.chi)};
}

/// Space-fixed to body-fixed rotation in the z-y-z' convention.
inline Eigen::Matrix3d rotation_zyz(const EulerAngles& e)
{
    const double sp = std::sin(e.phi), cp = std::cos(e.phi);
    const double st = std::sin(e.theta), ct = std::cos(e.theta);
    const double sc = std::sin(e.chi), cc = std::cos(e.chi);
    Eigen::Matrix3d r;
    r << ct * cp * cc - sp * sc, ct * sp * cc + cp * sc, -st * cc,
        -ct * cp * sc - sp * cc, -ct * sp * sc + cp * cc, st * sc,
        st * cp, st * sp, ct;
    return r;
}

/// Angles of a proper rotation matrix, inverse of rotation_zyz.
inline EulerAngles euler_from_rotation(const Eigen::Matrix3d& r)
{
    const double ct = std::clamp(r(2, 2), -1.0, 1.0);
    const double st = std::hypot(r(2, 0), r(2, 1));
    EulerAngles e;
    if (st > 1e-12) {
        e.theta = std::atan2(st, ct);
        e.phi = std::atan2(r(2, 1), r(2, 0));
        e.chi = std::atan2(r(1, 2), -r(0, 2));
    } else if (ct > 0) {
        e.theta = 0.0;
        e.phi = std::atan2(r(0, 1), r(0, 0));
    } else {
        e.theta = std::numbers::pi;
        e.phi = std::atan2(-r(0, 1), -r(0, 0));
    }
    return wrapped(e);
}

/// Body-frame angular velocity from the Euler rates (theta', phi', chi').
inline Eigen::Vector3d omega_from_euler_rates(const EulerAngles& e, const Eigen::Vector3d& rates)
{
    const double st = std::sin(e.theta), ct = std::cos(e.theta);
    const double sc = std::sin(e.chi), cc = std::cos(e.chi);
    Eigen::Matrix3d m;
    m << sc, -st * cc, 0.0,
        cc, st * sc, 0.0,
        0.0, ct, 1.0;
    return m * rates;
}

/// (theta', phi', chi') from the body-frame angular velocity.
inline Eigen::Vector3d euler_rates_from_omega(const EulerAngles& e, const Eigen::Vector3d& omega)
{
    detail::gimbal_guard(e.theta, 1e-10);
    const double st = std::sin(e.theta), ct = std::cos(e.theta);
    const double sc = std::sin(e.chi), cc = std::cos(e.chi);
    Eigen::Matrix3d m;
    m << sc, cc, 0.0,
        -cc / st, sc / st, 0.0,
        ct / st * cc, -ct / st * sc, 1.0;
    return m * omega;
}

/// Momentum transformation for angles plus vibrational coordinates.
/// momenta_from_angular maps (M_x, M_y, M_z, P...) to (p_theta, p_phi, p_chi, P...),
/// angular_from_momenta is its inverse.
struct AMatrix {
    Eigen::MatrixXd momenta_from_angular;
    Eigen::MatrixXd angular_from_momenta;

    Eigen::Matrix3d euler_block() const { return momenta_from_angular.topLeftCorner<3, 3>(); }
    Eigen::Matrix3d inverse_euler_block() const { return angular_from_momenta.topLeftCorner<3, 3>(); }
};

namespace detail {

inline Eigen::Matrix3d a_euler(const EulerAngles& e)
{
    const double st = std::sin(e.theta), ct = std::cos(e.theta);
    const double sc = std::sin(e.chi), cc = std::cos(e.chi);
    Eigen::Matrix3d a;
    a << sc, cc, 0.0,
        -st * cc, st * sc, ct,
        0.0, 0.0, 1.0;
    return a;
}

inline Eigen::Matrix3d a_euler_inverse(const EulerAngles& e)
{
    const double st = std::sin(e.theta), ct = std::cos(e.theta);
    const double sc = std::sin(e.chi), cc = std::cos(e.chi);
    Eigen::Matrix3d m;
    m << sc, -cc / st, ct / st * cc,
        cc, sc / st, -ct / st * sc,
        0.0, 0.0, 1.0;
    return m;
}

} // namespace detail

/// tau is 3 x n_vib with tau(alpha, k) the vibrational angular momentum coefficient of P_k.
inline AMatrix build_a_matrix(const EulerAngles& e, const Eigen::MatrixXd& tau)
{
    detail::gimbal_guard(e.theta, 1e-10);
    if (tau.rows() != 3 && tau.size() != 0)
        throw Error(Errc::DimensionMismatch, "tau must have three rows");
    const Eigen::Index nv = tau.size() == 0 ? 0 : tau.cols();
    const Eigen::Index n = 3 + nv;
    const Eigen::Matrix3d a = detail::a_euler(e);
    AMatrix out;
    out.momenta_from_angular = Eigen::MatrixXd::Identity(n, n);
    out.angular_from_momenta = Eigen::MatrixXd::Identity(n, n);
    out.momenta_from_angular.topLeftCorner<3, 3>() = a;
    out.angular_from_momenta.topLeftCorner<3, 3>() = detail::a_euler_inverse(e);
    if (nv > 0) {
        out.momenta_from_angular.topRightCorner(3, nv) = a * tau;
        out.angular_from_momenta.topRightCorner(3, nv) = -tau;
    }
    return out;
}

/// Left side of the Podolsky condition for the Euler-angle momenta,
/// -cos(t)/sin(t)^2 + (1/sin t) sum_ij a^{ji} d_i (sum_k a_kj), by central differences.
inline double podolsky_condition_residual(const EulerAngles& e)
{
    detail::gimbal_guard(e.theta, 1e-6);
    constexpr double h = 1e-6;
    auto column_sums = [](double th, double ph, double ch) -> Eigen::RowVector3d {
        return detail::a_euler({ph, th, ch}).colwise().sum();
    };
    // rows: derivative with respect to theta, phi, chi
    std::array<Eigen::RowVector3d, 3> d;
    d[0] = (column_sums(e.theta + h, e.phi, e.chi) - column_sums(e.theta - h, e.phi, e.chi)) / (2 * h);
    d[1] = (column_sums(e.theta, e.phi + h, e.chi) - column_sums(e.theta, e.phi - h, e.chi)) / (2 * h);
    d[2] = (column_sums(e.theta, e.phi, e.chi + h) - column_sums(e.theta, e.phi, e.chi - h)) / (2 * h);
    const Eigen::Matrix3d ainv = detail::a_euler_inverse(e);
    double acc = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            acc += ainv(j, i) * d[i](j);
    const double st = std::sin(e.theta);
    return -std::cos(e.theta) / (st * st) + acc / st;
}

struct EckartResult {
    EulerAngles angles;
    Eigen::Matrix3d rotation; // rotated = rotation * displaced
    Eigen::VectorXd geometry; // rotated displaced geometry, flattened
};

/// sum_i m_i a_i x rho_i for a reference and displaced geometry, both flattened.
inline Eigen::Vector3d eckart_residual(const Molecule& mol, const Eigen::VectorXd& geometry)
{
    if (mol.dimensionality() != 3 || geometry.size() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "Eckart residual needs a 3D geometry of length 3N");
    const Molecule eq = center_of_mass_shift(mol);
    Eigen::Vector3d s = Eigen::Vector3d::Zero();
    for (int i = 0; i < mol.size(); ++i) {
        const Eigen::Vector3d a = eq.atom(i).position;
        s += eq.atom(i).mass * a.cross(geometry.segment<3>(3 * i) - a);
    }
    return s;
}

/// Rotates a displaced geometry into the Eckart frame of the equilibrium structure.
inline EckartResult eckart_rotate(const Molecule& mol, const Eigen::VectorXd& displaced)
{
    if (mol.dimensionality() != 3 || displaced.size() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "Eckart rotation needs a 3D geometry of length 3N");
    if (!displaced.allFinite())
        throw Error(Errc::InvalidArgument, "displaced geometry is not finite");
    const Molecule eq = center_of_mass_shift(mol);
    const int n = mol.size();

    Eigen::Vector3d com = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i)
        com += eq.atom(i).mass * displaced.segment<3>(3 * i);
    com /= mol.total_mass();

    Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
    double base = 0.0;
    for (int i = 0; i < n; ++i) {
        const double m = eq.atom(i).mass;
        const Eigen::Vector3d a = eq.atom(i).position;
        const Eigen::Vector3d r = displaced.segment<3>(3 * i) - com;
        s += m * r * a.transpose();
        base += m * (a.squaredNorm() + r.squaredNorm());
    }
    Eigen::Matrix4d nmat;
    nmat << s(0, 0) + s(1, 1) + s(2, 2), s(1, 2) - s(2, 1), s(2, 0) - s(0, 2), s(0, 1) - s(1, 0),
        s(1, 2) - s(2, 1), s(0, 0) - s(1, 1) - s(2, 2), s(0, 1) + s(1, 0), s(2, 0) + s(0, 2),
        s(2, 0) - s(0, 2), s(0, 1) + s(1, 0), -s(0, 0) + s(1, 1) - s(2, 2), s(1, 2) + s(2, 1),
        s(0, 1) - s(1, 0), s(2, 0) + s(0, 2), s(1, 2) + s(2, 1), -s(0, 0) - s(1, 1) + s(2, 2);
    // profile matrix: its eigenvalues are the weighted squared deviations of each quaternion
    const Eigen::Matrix4d profile = base * Eigen::Matrix4d::Identity() - 2.0 * nmat;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> es(profile);
    if (es.info() != Eigen::Success)
        throw Error(Errc::NoConvergence, "quaternion eigenproblem failed");
    const Eigen::Vector4d ev = es.eigenvalues();
    if (ev(1) - ev(0) <= 1e-12 * std::max(base, 1e-300))
        throw Error(Errc::NoConvergence, "Eckart rotation is not unique for this geometry");
    const Eigen::Vector4d q = es.eigenvectors().col(0);

    const double q0 = q(0), q1 = q(1), q2 = q(2), q3 = q(3);
    Eigen::Matrix3d u;
    u << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, 2 * (q1 * q2 - q0 * q3), 2 * (q1 * q3 + q0 * q2),
        2 * (q2 * q1 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3, 2 * (q2 * q3 - q0 * q1),
        2 * (q3 * q1 - q0 * q2), 2 * (q3 * q2 + q0 * q1), q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;

    EckartResult out;
    out.rotation = u;
    out.angles = euler_from_rotation(u);
    out.geometry.resize(3 * n);
    for (int i = 0; i < n; ++i)
        out.geometry.segment<3>(3 * i) = u * (displaced.segment<3>(3 * i) - com);
    return out;
}

} // namespace gfmodes
