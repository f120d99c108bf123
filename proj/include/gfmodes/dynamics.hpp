#pragma once

#include "errors.hpp"
#include "normalmodes.hpp"
#include "quadform.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace gfmodes {

struct InitialConditions {
    Eigen::VectorXd kappa;    // displacement at t = 0
    Eigen::VectorXd beta_vel; // velocity at t = 0
};

struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd positions;  // one row per time
    Eigen::MatrixXd velocities; // one row per time
};

struct ModeCoefficients {
    Eigen::VectorXd a; // cosine amplitudes
    Eigen::VectorXd b; // sine amplitudes
};

namespace detail {

inline double zero_lambda_tol(const Eigen::VectorXd& lambdas)
{
    return 1e-10 * std::max(1.0, lambdas.size() ? lambdas.cwiseAbs().maxCoeff() : 0.0);
}

inline void check_ic(const NormalModeResult& modes, const SymMatrix& metric, const InitialConditions& ic)
{
    const Eigen::Index n = modes.L.rows();
    if (metric.dim() != n || ic.kappa.size() != n || ic.beta_vel.size() != n)
        throw Error(Errc::DimensionMismatch, "initial conditions do not match the mode basis");
    if (!ic.kappa.allFinite() || !ic.beta_vel.allFinite())
        throw Error(Errc::InvalidArgument, "initial conditions are not finite");
}

} // namespace detail

/// alpha(t) = sum_k xi_k [ (xi_k, T kappa) cos w t + (xi_k, T beta) / w sin w t ],
/// with T the kinetic metric and xi_k the columns of L. Zero modes drift linearly.
inline Trajectory trajectory_closed_form(const NormalModeResult& modes, const SymMatrix& metric,
    const InitialConditions& ic, const std::vector<double>& times)
{
    detail::check_ic(modes, metric, ic);
    const double tol = detail::zero_lambda_tol(modes.lambdas);
    for (Eigen::Index k = 0; k < modes.lambdas.size(); ++k)
        if (modes.lambdas(k) < -tol)
            throw Error(Errc::NegativeLambda, "unstable mode; use the numerical integrator");

    const Eigen::VectorXd p0 = modes.L.transpose() * (metric.matrix() * ic.kappa);
    const Eigen::VectorXd v0 = modes.L.transpose() * (metric.matrix() * ic.beta_vel);
    const Eigen::Index n = modes.L.rows(), nm = modes.L.cols();

    Trajectory tr;
    tr.times = times;
    tr.positions.resize(static_cast<Eigen::Index>(times.size()), n);
    tr.velocities.resize(static_cast<Eigen::Index>(times.size()), n);
    for (size_t it = 0; it < times.size(); ++it) {
        const double t = times[it];
        Eigen::VectorXd q(nm), qd(nm);
        for (Eigen::Index k = 0; k < nm; ++k) {
            const double lam = modes.lambdas(k);
            if (std::abs(lam) <= tol) {
                q(k) = p0(k) + v0(k) * t;
                qd(k) = v0(k);
            } else {
                const double w = std::sqrt(lam);
                q(k) = p0(k) * std::cos(w * t) + v0(k) / w * std::sin(w * t);
                qd(k) = -p0(k) * w * std::sin(w * t) + v0(k) * std::cos(w * t);
            }
        }
        tr.positions.row(static_cast<Eigen::Index>(it)) = (modes.L * q).transpose();
        tr.velocities.row(static_cast<Eigen::Index>(it)) = (modes.L * qd).transpose();
    }
    return tr;
}

/// Q_k(t) = A_k cos w_k t + B_k sin w_k t with A_k = (xi_k, T kappa), B_k = (xi_k, T beta) / w_k.
inline ModeCoefficients normal_coordinate_coefficients(const NormalModeResult& modes, const SymMatrix& metric,
    const InitialConditions& ic)
{
    detail::check_ic(modes, metric, ic);
    const double tol = detail::zero_lambda_tol(modes.lambdas);
    ModeCoefficients c;
    c.a = modes.L.transpose() * (metric.matrix() * ic.kappa);
    c.b = modes.L.transpose() * (metric.matrix() * ic.beta_vel);
    for (Eigen::Index k = 0; k < c.b.size(); ++k) {
        if (modes.lambdas(k) <= tol)
            throw Error(Errc::ZeroFrequencyMode, "mode " + std::to_string(k) + " has no oscillation frequency");
        c.b(k) /= std::sqrt(modes.lambdas(k));
    }
    return c;
}

/// x(t) = L Q(t) from the normal-coordinate amplitudes.
inline Eigen::VectorXd reconstruct(const NormalModeResult& modes, const ModeCoefficients& c, double t)
{
    Eigen::VectorXd q(c.a.size());
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        const double w = std::sqrt(modes.lambdas(k));
        q(k) = c.a(k) * std::cos(w * t) + c.b(k) * std::sin(w * t);
    }
    return modes.L * q;
}

inline double harmonic_energy(const SymMatrix& g_inv, const SymMatrix& f, const Eigen::VectorXd& x, const Eigen::VectorXd& v)
{
    return 0.5 * v.dot(g_inv.matrix() * v) + 0.5 * x.dot(f.matrix() * x);
}

struct State {
    Eigen::VectorXd x;
    Eigen::VectorXd v;
};

/// Classical fourth-order Runge-Kutta for g_inv x'' + f x = 0.
inline State rk4_oracle(const SymMatrix& g_inv, const SymMatrix& f, const InitialConditions& ic, double t_end, double dt)
{
    if (!(dt > 0.0) || !(t_end >= 0.0))
        throw Error(Errc::InvalidArgument, "need dt > 0 and t_end >= 0");
    const Eigen::Index n = g_inv.dim();
    if (f.dim() != n || ic.kappa.size() != n || ic.beta_vel.size() != n)
        throw Error(Errc::DimensionMismatch, "RK4 inputs have inconsistent dimensions");

    const Eigen::MatrixXd acc = -g_inv.matrix().ldlt().solve(f.matrix());
    const auto steps = static_cast<long>(std::ceil(t_end / dt - 1e-12));
    const double h = steps > 0 ? t_end / static_cast<double>(steps) : 0.0;

    State s{ic.kappa, ic.beta_vel};
    const double e0 = harmonic_energy(g_inv, f, s.x, s.v);
    for (long i = 0; i < steps; ++i) {
        const Eigen::VectorXd k1x = s.v, k1v = acc * s.x;
        const Eigen::VectorXd k2x = s.v + 0.5 * h * k1v, k2v = acc * (s.x + 0.5 * h * k1x);
        const Eigen::VectorXd k3x = s.v + 0.5 * h * k2v, k3v = acc * (s.x + 0.5 * h * k2x);
        const Eigen::VectorXd k4x = s.v + h * k3v, k4v = acc * (s.x + h * k3x);
        s.x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        s.v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    }
    const double e1 = harmonic_energy(g_inv, f, s.x, s.v);
    if (std::abs(e1 - e0) > 1e-3 * std::max(std::abs(e0), 1e-300) && e0 != 0.0)
        throw Error(Errc::StepTooLarge, "energy drift exceeds 1e-3 relative");
    return s;
}

} // namespace gfmodes
