#pragma once

#include "constants.hpp"
#include "errors.hpp"
#include "molecule.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <vector>

namespace gfmodes {

/// Levi-Civita symbol on axes 0, 1, 2.
inline int levi_civita(int a, int b, int c)
{
    return (a - b) * (b - c) * (c - a) / 2;
}

struct CoriolisData {
    std::array<Eigen::MatrixXd, 3> zeta; // zeta[alpha](k, l)
    std::vector<Eigen::Matrix3d> a_coeff; // one 3x3 tensor per mode, empty unless requested

    Eigen::Index modes() const { return zeta[0].rows(); }

    /// tau(alpha, s) = sum_k zeta[alpha](k, s) q_k
    Eigen::MatrixXd tau(const Eigen::VectorXd& q) const
    {
        if (q.size() != modes())
            throw Error(Errc::DimensionMismatch, "normal coordinate vector has the wrong length");
        Eigen::MatrixXd t(3, modes());
        for (int a = 0; a < 3; ++a)
            t.row(a) = q.transpose() * zeta[a];
        return t;
    }
};

struct SumRuleReport {
    double rule1 = 0.0;
    double rule2 = 0.0;
    double rule3 = 0.0; // literal reading, reported only
};

struct EckartReport {
    Eigen::VectorXd translational; // per mode, norm of sum_i sqrt(m_i) l_ik
    Eigen::VectorXd rotational;    // per mode, largest asymmetry of sum_i sqrt(m_i) r_ia l_ibk
    double max_translational = 0.0;
    double max_rotational = 0.0;
};

namespace detail {

inline void check_l(const Molecule& mol, const Eigen::MatrixXd& l)
{
    if (mol.dimensionality() != 3 || l.rows() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "l must have 3N rows for a 3D molecule");
}

inline Eigen::Matrix3d pseudo_inverse(const Eigen::Matrix3d& m)
{
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
    const Eigen::Vector3d ev = es.eigenvalues();
    const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
    Eigen::Vector3d inv = Eigen::Vector3d::Zero();
    for (int i = 0; i < 3; ++i)
        if (std::abs(ev(i)) > 1e-10 * scale)
            inv(i) = 1.0 / ev(i);
    return es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
}

} // namespace detail

/// C^a_kl = sum_i (l_ik x l_il)^a for an l matrix with atom-major rows.
inline CoriolisData coriolis_constants(const Eigen::MatrixXd& l)
{
    if (l.rows() % 3 != 0)
        throw Error(Errc::DimensionMismatch, "l must have 3N rows");
    const Eigen::Index n = l.cols();
    if ((l.transpose() * l - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff() > 1e-8)
        throw Error(Errc::NonOrthonormalL, "columns of l are not orthonormal");
    const Eigen::Index atoms = l.rows() / 3;
    CoriolisData cd;
    for (auto& z : cd.zeta)
        z = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        for (Eigen::Index m = k + 1; m < n; ++m) {
            Eigen::Vector3d c = Eigen::Vector3d::Zero();
            for (Eigen::Index i = 0; i < atoms; ++i)
                c += l.col(k).segment<3>(3 * i).cross(l.col(m).segment<3>(3 * i));
            for (int a = 0; a < 3; ++a) {
                cd.zeta[a](k, m) = c(a);
                cd.zeta[a](m, k) = -c(a);
            }
        }
    }
    return cd;
}

/// a_k^{ab} = dI_ab / dQ_k at equilibrium.
inline std::vector<Eigen::Matrix3d> interaction_coefficients(const Molecule& mol, const Eigen::MatrixXd& l)
{
    detail::check_l(mol, l);
    const Molecule eq = center_of_mass_shift(mol);
    std::vector<Eigen::Matrix3d> out(static_cast<size_t>(l.cols()), Eigen::Matrix3d::Zero());
    for (Eigen::Index k = 0; k < l.cols(); ++k) {
        Eigen::Matrix3d& a = out[static_cast<size_t>(k)];
        for (int al = 0; al < 3; ++al) {
            for (int be = al; be < 3; ++be) {
                double s = 0.0;
                for (int i = 0; i < mol.size(); ++i) {
                    const Eigen::Vector3d r = eq.atom(i).position;
                    const Eigen::Vector3d li = l.col(k).segment<3>(3 * i);
                    double t = 0.0;
                    for (int g = 0; g < 3; ++g)
                        for (int h = 0; h < 3; ++h)
                            for (int d = 0; d < 3; ++d)
                                t += levi_civita(al, g, d) * levi_civita(be, h, d) * (r(g) * li(h) + li(g) * r(h));
                    s += std::sqrt(eq.atom(i).mass) * t;
                }
                a(al, be) = s;
                a(be, al) = s;
            }
        }
    }
    return out;
}

inline CoriolisData coriolis_data(const Molecule& mol, const Eigen::MatrixXd& l)
{
    CoriolisData cd = coriolis_constants(l);
    cd.a_coeff = interaction_coefficients(mol, l);
    return cd;
}

/// Largest residuals of the zeta / interaction-coefficient sum rules.
inline SumRuleReport sum_rule_residuals(const CoriolisData& cd, const Molecule& mol, const Eigen::MatrixXd& l)
{
    detail::check_l(mol, l);
    const Eigen::Index n = l.cols();
    if (cd.modes() != n)
        throw Error(Errc::DimensionMismatch, "Coriolis data and l disagree on the mode count");
    const std::vector<Eigen::Matrix3d> a = cd.a_coeff.empty() ? interaction_coefficients(mol, l) : cd.a_coeff;
    const Molecule eq = center_of_mass_shift(mol);
    const Eigen::Matrix3d iinv = detail::pseudo_inverse(inertia_tensor(eq));
    const int na = mol.size();
    auto lc = [&](int i, int ax, Eigen::Index k) { return l(3 * i + ax, k); };
    auto r = [&](int i, int ax) { return eq.atom(i).position(ax); };
    auto m = [&](int i) { return eq.atom(i).mass; };

    SumRuleReport rep;
    for (int al = 0; al < 3; ++al)
        for (int be = 0; be < 3; ++be)
            for (Eigen::Index k = 0; k < n; ++k)
                for (Eigen::Index q = 0; q < n; ++q) {
                    double lhs = 0.0;
                    for (Eigen::Index s = 0; s < n; ++s)
                        lhs += cd.zeta[al](k, s) * cd.zeta[be](q, s);
                    double rhs = (al == be && k == q) ? 1.0 : 0.0;
                    for (int i = 0; i < na; ++i)
                        rhs -= lc(i, be, k) * lc(i, al, q);
                    for (int g = 0; g < 3; ++g)
                        for (int d = 0; d < 3; ++d)
                            rhs -= 0.25 * a[k](al, g) * iinv(g, d) * a[q](d, be);
                    rep.rule1 = std::max(rep.rule1, std::abs(lhs - rhs));
                }

    double r2sum = 0.0;
    for (int i = 0; i < na; ++i)
        r2sum += m(i) * eq.atom(i).position.squaredNorm();
    Eigen::Matrix3d mrr = Eigen::Matrix3d::Zero();
    for (int i = 0; i < na; ++i)
        mrr += m(i) * eq.atom(i).position * eq.atom(i).position.transpose();
    for (int al = 0; al < 3; ++al)
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga)
                for (int de = 0; de < 3; ++de) {
                    double lhs = 0.0;
                    for (Eigen::Index k = 0; k < n; ++k)
                        lhs += a[k](al, be) * a[k](ga, de);
                    double t = (al == be && ga == de ? r2sum : 0.0) - (al == be ? mrr(ga, de) : 0.0)
                        - (ga == de ? mrr(al, be) : 0.0) + (al == ga ? mrr(be, de) : 0.0);
                    for (int ep = 0; ep < 3; ++ep)
                        for (int et = 0; et < 3; ++et)
                            for (int xi = 0; xi < 3; ++xi)
                                for (int th = 0; th < 3; ++th) {
                                    const int e = levi_civita(al, ep, et) * levi_civita(ga, xi, th);
                                    if (e != 0)
                                        t -= e * mrr(be, ep) * mrr(de, xi) * iinv(et, th);
                                }
                    rep.rule2 = std::max(rep.rule2, std::abs(lhs - 4.0 * t));
                }

    for (int al = 0; al < 3; ++al)
        for (int be = 0; be < 3; ++be)
            for (int ga = 0; ga < 3; ++ga)
                for (Eigen::Index k = 0; k < n; ++k) {
                    double lhs = 0.0;
                    for (Eigen::Index q = 0; q < n; ++q)
                        lhs += cd.zeta[al](k, q) * a[q](be, ga);
                    double rhs = 0.0;
                    for (int ep = 0; ep < 3; ++ep) {
                        rhs += 0.5 * levi_civita(al, be, ga) * a[k](ep, ep);
                        rhs -= levi_civita(al, be, ep) * a[k](ep, ga);
                    }
                    for (int ep = 0; ep < 3; ++ep)
                        for (int xi = 0; xi < 3; ++xi)
                            for (int de = 0; de < 3; ++de)
                                for (int i = 0; i < na; ++i)
                                    rhs -= levi_civita(be, de, ep) * m(i) * r(i, de) * r(i, ga) * iinv(ep, ga) * a[k](xi, al);
                    rep.rule3 = std::max(rep.rule3, std::abs(lhs - rhs));
                }
    return rep;
}

inline EckartReport eckart_conditions_check(const Molecule& mol, const Eigen::MatrixXd& l)
{
    detail::check_l(mol, l);
    const Molecule eq = center_of_mass_shift(mol);
    EckartReport rep;
    rep.translational.resize(l.cols());
    rep.rotational.resize(l.cols());
    for (Eigen::Index k = 0; k < l.cols(); ++k) {
        Eigen::Vector3d t = Eigen::Vector3d::Zero();
        Eigen::Matrix3d s = Eigen::Matrix3d::Zero();
        for (int i = 0; i < mol.size(); ++i) {
            const double sm = std::sqrt(eq.atom(i).mass);
            const Eigen::Vector3d li = l.col(k).segment<3>(3 * i);
            t += sm * li;
            s += sm * eq.atom(i).position * li.transpose();
        }
        rep.translational(k) = t.norm();
        rep.rotational(k) = (s - s.transpose()).cwiseAbs().maxCoeff();
        rep.max_translational = std::max(rep.max_translational, rep.translational(k));
        rep.max_rotational = std::max(rep.max_rotational, rep.rotational(k));
    }
    return rep;
}

/// Inertia tensors of the vibrating molecule as functions of the normal coordinates.
struct InertiaExpansion {
    Eigen::Matrix3d i0;
    std::vector<Eigen::Matrix3d> a_coeff;

    Eigen::Matrix3d i_dprime(const Eigen::VectorXd& q) const
    {
        check(q);
        Eigen::Matrix3d out = i0;
        for (size_t k = 0; k < a_coeff.size(); ++k)
            out += 0.5 * a_coeff[k] * q(static_cast<Eigen::Index>(k));
        return out;
    }

    Eigen::Matrix3d i_prime(const Eigen::VectorXd& q) const
    {
        const Eigen::Matrix3d idp = i_dprime(q);
        return idp * i0.ldlt().solve(idp);
    }

    /// mu = (I'')^-1 I0 (I'')^-1
    Eigen::Matrix3d mu(const Eigen::VectorXd& q) const
    {
        const Eigen::Matrix3d idp = i_dprime(q);
        const double scale = i0.cwiseAbs().maxCoeff();
        if (std::abs(idp.determinant()) <= 1e-12 * scale * scale * scale)
            throw Error(Errc::SingularInertia, "I'' is singular");
        const Eigen::Matrix3d x = idp.partialPivLu().solve(Eigen::Matrix3d::Identity());
        return x * i0 * x;
    }

private:
    void check(const Eigen::VectorXd& q) const
    {
        if (q.size() != static_cast<Eigen::Index>(a_coeff.size()))
            throw Error(Errc::DimensionMismatch, "normal coordinate vector has the wrong length");
    }
};

inline InertiaExpansion make_inertia_expansion(const Molecule& mol, const Eigen::MatrixXd& l)
{
    InertiaExpansion ie;
    ie.i0 = inertia_tensor(mol);
    ie.a_coeff = interaction_coefficients(mol, l);
    return ie;
}

/// U = -(hbar^2 / 8) Tr mu; natural units take hbar = 1 with amu and Angstrom.
inline double watson_u(const InertiaExpansion& ie, const Eigen::VectorXd& q, UnitMode units = UnitMode::Spectroscopic)
{
    const double tr = ie.mu(q).trace();
    return units == UnitMode::Natural ? -tr / 8.0 : -rotational_kappa() * tr / 4.0;
}

} // namespace gfmodes
