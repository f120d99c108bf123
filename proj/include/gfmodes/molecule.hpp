#pragma once

#include "constants.hpp"
#include "errors.hpp"
#include "quadform.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace gfmodes {

struct Atom {
    std::string label;
    double mass = 0.0; // amu
    Eigen::Vector3d position = Eigen::Vector3d::Zero(); // Angstrom
};

/// Point masses moving in 1, 2 or 3 dimensions. Cartesian displacement
/// vectors are atom-major: index = atom * dimensionality + axis.
class Molecule {
public:
    Molecule() = default;

    explicit Molecule(std::vector<Atom> atoms, int dimensionality = 3)
        : atoms_(std::move(atoms)), dim_(dimensionality)
    {
        if (dim_ < 1 || dim_ > 3)
            throw Error(Errc::InvalidDimensionality, "dimensionality must be 1, 2 or 3");
        if (atoms_.empty())
            throw Error(Errc::InvalidArgument, "molecule has no atoms");
        for (const auto& a : atoms_) {
            if (!(a.mass > 0.0) || !std::isfinite(a.mass))
                throw Error(Errc::NonPositiveMass, "atom " + a.label + " has non-positive mass");
            if (!a.position.allFinite())
                throw Error(Errc::InvalidArgument, "atom " + a.label + " has non-finite position");
            for (int ax = dim_; ax < 3; ++ax)
                if (a.position(ax) != 0.0)
                    throw Error(Errc::InvalidArgument,
                        "atom " + a.label + " has a coordinate outside the active dimensions");
        }
        for (size_t i = 0; i < atoms_.size(); ++i)
            for (size_t j = i + 1; j < atoms_.size(); ++j)
                if ((atoms_[i].position - atoms_[j].position).norm() < 1e-8)
                    throw Error(Errc::DuplicateAtomPosition,
                        "atoms " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
    }

    const std::vector<Atom>& atoms() const { return atoms_; }
    const Atom& atom(int i) const { return atoms_.at(i); }
    int size() const { return static_cast<int>(atoms_.size()); }
    int dimensionality() const { return dim_; }
    int cartesian_dim() const { return size() * dim_; }

    double total_mass() const
    {
        double m = 0.0;
        for (const auto& a : atoms_)
            m += a.mass;
        return m;
    }

    Eigen::Vector3d center_of_mass() const
    {
        Eigen::Vector3d c = Eigen::Vector3d::Zero();
        for (const auto& a : atoms_)
            c += a.mass * a.position;
        return c / total_mass();
    }

    /// Active Cartesian coordinates flattened atom-major.
    Eigen::VectorXd flat_positions() const
    {
        Eigen::VectorXd x(cartesian_dim());
        for (int i = 0; i < size(); ++i)
            for (int ax = 0; ax < dim_; ++ax)
                x(i * dim_ + ax) = atoms_[i].position(ax);
        return x;
    }

    /// Copy with every active coordinate moved by `delta`.
    Molecule displaced(const Eigen::VectorXd& delta) const
    {
        if (delta.size() != cartesian_dim())
            throw Error(Errc::DimensionMismatch, "displacement length differs from 3N");
        std::vector<Atom> moved = atoms_;
        for (int i = 0; i < size(); ++i)
            for (int ax = 0; ax < dim_; ++ax)
                moved[i].position(ax) += delta(i * dim_ + ax);
        return Molecule(std::move(moved), dim_);
    }

private:
    std::vector<Atom> atoms_;
    int dim_ = 3;
};

struct BondStretch {
    int i, j;
};

/// Valence angle i-j-k with its apex at j.
struct AngleBend {
    int i, j, k;
};

/// Dihedral about the j-k bond.
struct Torsion {
    int i, j, k, l;
};

struct CartesianDisplacement {
    int atom;
    int axis;
};

/// Linear combination of Cartesian displacements, weights indexed like the Cartesian vector.
struct LinearCombination {
    Eigen::VectorXd weights;
};

using InternalCoordinate = std::variant<BondStretch, AngleBend, Torsion, CartesianDisplacement, LinearCombination>;
using InternalCoordinateSet = std::vector<InternalCoordinate>;

enum class RowKind { Internal, Translation, Rotation };

struct BMatrix {
    Eigen::MatrixXd rows; // one row per coordinate, 3N columns
    std::vector<RowKind> kinds;
};

struct MassMatrix {
    Eigen::VectorXd diagonal; // each atomic mass repeated once per active axis
};

struct InertiaData {
    Eigen::Matrix3d tensor;
    Eigen::Vector3d moments;       // ascending
    Eigen::Matrix3d axes;          // columns are principal axes, right handed
    Eigen::Vector3d constants;     // cm^-1, A >= B >= C, +inf where undefined
    std::array<bool, 3> defined{}; // false for a vanishing moment
};

inline MassMatrix mass_matrix(const Molecule& mol)
{
    MassMatrix m;
    m.diagonal.resize(mol.cartesian_dim());
    for (int i = 0; i < mol.size(); ++i)
        for (int ax = 0; ax < mol.dimensionality(); ++ax)
            m.diagonal(i * mol.dimensionality() + ax) = mol.atom(i).mass;
    return m;
}

inline Molecule center_of_mass_shift(const Molecule& mol)
{
    const Eigen::Vector3d c = mol.center_of_mass();
    std::vector<Atom> atoms = mol.atoms();
    for (auto& a : atoms) {
        a.position -= c;
        for (int ax = mol.dimensionality(); ax < 3; ++ax)
            a.position(ax) = 0.0;
    }
    return Molecule(std::move(atoms), mol.dimensionality());
}

namespace detail {

inline void check_atom(const Molecule& mol, int i)
{
    if (i < 0 || i >= mol.size())
        throw Error(Errc::IndexOutOfRange, "atom index " + std::to_string(i) + " out of range");
}

inline void add_gradient(Eigen::Ref<Eigen::RowVectorXd> row, const Molecule& mol, int atom, const Eigen::Vector3d& g)
{
    const int d = mol.dimensionality();
    for (int ax = 0; ax < d; ++ax)
        row(atom * d + ax) += g(ax);
}

inline Eigen::RowVectorXd b_row(const Molecule& mol, const BondStretch& c)
{
    check_atom(mol, c.i);
    check_atom(mol, c.j);
    const Eigen::Vector3d r = mol.atom(c.i).position - mol.atom(c.j).position;
    const double len = r.norm();
    if (len < 1e-6)
        throw Error(Errc::DegenerateGeometry, "zero-length bond");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(mol.cartesian_dim());
    add_gradient(row, mol, c.i, r / len);
    add_gradient(row, mol, c.j, -r / len);
    return row;
}

inline Eigen::RowVectorXd b_row(const Molecule& mol, const AngleBend& c)
{
    check_atom(mol, c.i);
    check_atom(mol, c.j);
    check_atom(mol, c.k);
    const Eigen::Vector3d u = mol.atom(c.i).position - mol.atom(c.j).position;
    const Eigen::Vector3d v = mol.atom(c.k).position - mol.atom(c.j).position;
    const double lu = u.norm(), lv = v.norm();
    if (lu < 1e-6 || lv < 1e-6)
        throw Error(Errc::DegenerateGeometry, "zero-length bend arm");
    const Eigen::Vector3d eu = u / lu, ev = v / lv;
    const double cs = eu.dot(ev);
    const double sn = eu.cross(ev).norm();
    if (sn < 1e-6)
        throw Error(Errc::DegenerateGeometry, "collinear bend arms");
    const Eigen::Vector3d gi = (cs * eu - ev) / (lu * sn);
    const Eigen::Vector3d gk = (cs * ev - eu) / (lv * sn);
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(mol.cartesian_dim());
    add_gradient(row, mol, c.i, gi);
    add_gradient(row, mol, c.k, gk);
    add_gradient(row, mol, c.j, -gi - gk);
    return row;
}

inline Eigen::RowVectorXd b_row(const Molecule& mol, const Torsion& c)
{
    check_atom(mol, c.i);
    check_atom(mol, c.j);
    check_atom(mol, c.k);
    check_atom(mol, c.l);
    const Eigen::Vector3d f = mol.atom(c.i).position - mol.atom(c.j).position;
    const Eigen::Vector3d g = mol.atom(c.j).position - mol.atom(c.k).position;
    const Eigen::Vector3d h = mol.atom(c.l).position - mol.atom(c.k).position;
    const Eigen::Vector3d a = f.cross(g);
    const Eigen::Vector3d b = h.cross(g);
    const double gn = g.norm();
    const double a2 = a.squaredNorm(), b2 = b.squaredNorm();
    if (gn < 1e-6 || a2 < 1e-12 * f.squaredNorm() * g.squaredNorm() || b2 < 1e-12 * h.squaredNorm() * g.squaredNorm())
        throw Error(Errc::DegenerateGeometry, "torsion with collinear atoms");
    const Eigen::Vector3d gi = -gn / a2 * a;
    const Eigen::Vector3d gl = gn / b2 * b;
    const Eigen::Vector3d ta = f.dot(g) / (a2 * gn) * a;
    const Eigen::Vector3d tb = h.dot(g) / (b2 * gn) * b;
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(mol.cartesian_dim());
    add_gradient(row, mol, c.i, gi);
    add_gradient(row, mol, c.j, -gi + ta - tb);
    add_gradient(row, mol, c.k, -gl - ta + tb);
    add_gradient(row, mol, c.l, gl);
    return row;
}

inline Eigen::RowVectorXd b_row(const Molecule& mol, const CartesianDisplacement& c)
{
    check_atom(mol, c.atom);
    if (c.axis < 0 || c.axis >= mol.dimensionality())
        throw Error(Errc::IndexOutOfRange, "axis outside the active dimensions");
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(mol.cartesian_dim());
    row(c.atom * mol.dimensionality() + c.axis) = 1.0;
    return row;
}

inline Eigen::RowVectorXd b_row(const Molecule& mol, const LinearCombination& c)
{
    if (c.weights.size() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "combination weights differ from 3N");
    return c.weights.transpose();
}

inline Eigen::Index numerical_rank(const Eigen::MatrixXd& m)
{
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const Eigen::VectorXd s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0.0)
        return 0;
    Eigen::Index r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-10 * s(0))
            ++r;
    return r;
}

} // namespace detail

inline BMatrix build_b_matrix(const Molecule& mol, const InternalCoordinateSet& coords)
{
    BMatrix b;
    b.rows.resize(static_cast<Eigen::Index>(coords.size()), mol.cartesian_dim());
    for (size_t r = 0; r < coords.size(); ++r) {
        b.rows.row(static_cast<Eigen::Index>(r))
            = std::visit([&](const auto& c) { return detail::b_row(mol, c); }, coords[r]);
        b.kinds.push_back(RowKind::Internal);
    }
    if (!coords.empty() && detail::numerical_rank(b.rows) < b.rows.rows())
        throw Error(Errc::RankDeficient, "internal coordinates are redundant");
    return b;
}

/// Appends translation rows and mass-weighted orthonormal rotation rows.
inline BMatrix extend_b_matrix(const BMatrix& b, const Molecule& mol)
{
    if (b.rows.cols() != mol.cartesian_dim())
        throw Error(Errc::DimensionMismatch, "B matrix columns differ from 3N");
    const Molecule eq = center_of_mass_shift(mol);
    const int d = mol.dimensionality();
    const int ncart = mol.cartesian_dim();
    const MassMatrix mm = mass_matrix(mol);
    const double mtot = mol.total_mass();

    std::vector<Eigen::RowVectorXd> extra;
    std::vector<RowKind> kinds;
    for (int ax = 0; ax < d; ++ax) {
        Eigen::RowVectorXd t = Eigen::RowVectorXd::Zero(ncart);
        for (int i = 0; i < mol.size(); ++i)
            t(i * d + ax) = mol.atom(i).mass / std::sqrt(mtot);
        extra.push_back(t);
        kinds.push_back(RowKind::Translation);
    }

    std::vector<int> rot_axes;
    if (d == 3)
        rot_axes = {0, 1, 2};
    else if (d == 2)
        rot_axes = {2};
    std::vector<Eigen::RowVectorXd> rot;
    const Eigen::VectorXd minv = mm.diagonal.cwiseInverse();
    for (int gax : rot_axes) {
        const Eigen::Vector3d e = Eigen::Vector3d::Unit(gax);
        Eigen::RowVectorXd r = Eigen::RowVectorXd::Zero(ncart);
        double scale = 0.0;
        for (int i = 0; i < mol.size(); ++i) {
            const Eigen::Vector3d disp = e.cross(eq.atom(i).position);
            for (int ax = 0; ax < d; ++ax)
                r(i * d + ax) = eq.atom(i).mass * disp(ax);
            scale += eq.atom(i).mass * eq.atom(i).position.squaredNorm();
        }
        for (const auto& q : rot)
            r -= (r.cwiseProduct(minv.transpose())).dot(q) * q;
        const double norm = std::sqrt(r.cwiseProduct(minv.transpose()).dot(r));
        if (scale == 0.0 || norm <= 1e-8 * std::sqrt(scale))
            continue;
        rot.push_back(r / norm);
    }
    for (const auto& r : rot) {
        extra.push_back(r);
        kinds.push_back(RowKind::Rotation);
    }

    BMatrix out;
    out.rows.resize(b.rows.rows() + static_cast<Eigen::Index>(extra.size()), ncart);
    out.rows.topRows(b.rows.rows()) = b.rows;
    for (size_t k = 0; k < extra.size(); ++k)
        out.rows.row(b.rows.rows() + static_cast<Eigen::Index>(k)) = extra[k];
    out.kinds = b.kinds;
    out.kinds.insert(out.kinds.end(), kinds.begin(), kinds.end());
    if (detail::numerical_rank(out.rows) < std::min(out.rows.rows(), out.rows.cols()))
        throw Error(Errc::RankDeficient, "augmented B matrix is singular");
    return out;
}

/// G = B M^-1 B^T.
inline SymMatrix build_g_matrix(const BMatrix& b, const MassMatrix& masses)
{
    if (b.rows.cols() != masses.diagonal.size())
        throw Error(Errc::DimensionMismatch, "B matrix columns differ from the mass vector");
    if (b.rows.rows() < 1)
        throw Error(Errc::DimensionMismatch, "B matrix has no rows");
    return SymMatrix(b.rows * masses.diagonal.cwiseInverse().asDiagonal() * b.rows.transpose());
}

inline Eigen::Matrix3d inertia_tensor(const Molecule& mol)
{
    const Eigen::Vector3d c = mol.center_of_mass();
    Eigen::Matrix3d t = Eigen::Matrix3d::Zero();
    for (const auto& a : mol.atoms()) {
        const Eigen::Vector3d r = a.position - c;
        t += a.mass * (r.squaredNorm() * Eigen::Matrix3d::Identity() - r * r.transpose());
    }
    return t;
}

inline InertiaData inertia(const Molecule& mol)
{
    InertiaData d;
    d.tensor = inertia_tensor(mol);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(d.tensor);
    d.moments = es.eigenvalues();
    d.axes = es.eigenvectors();
    if (d.axes.determinant() < 0)
        d.axes.col(2) = -d.axes.col(2);
    const double scale = std::max(d.moments.cwiseAbs().maxCoeff(), 1e-300);
    for (int i = 0; i < 3; ++i) {
        d.defined[i] = d.moments(i) > 1e-10 * scale;
        d.constants(i) = d.defined[i] ? rotational_kappa() / d.moments(i)
                                      : std::numeric_limits<double>::infinity();
    }
    return d;
}

} // namespace gfmodes
