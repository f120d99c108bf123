#pragma once

#include "errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace gfmodes {

/// Real symmetric matrix. The input is symmetrized on construction.
class SymMatrix {
public:
    SymMatrix() = default;

    explicit SymMatrix(const Eigen::MatrixXd& m)
    {
        if (m.rows() != m.cols())
            throw Error(Errc::DimensionMismatch, "symmetric matrix must be square");
        if (m.rows() < 1)
            throw Error(Errc::DimensionMismatch, "symmetric matrix must have dimension >= 1");
        if (!m.allFinite())
            throw Error(Errc::InvalidArgument, "matrix has non-finite entries");
        m_ = 0.5 * (m + m.transpose());
    }

    Eigen::Index dim() const { return m_.rows(); }
    const Eigen::MatrixXd& matrix() const { return m_; }
    double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

private:
    Eigen::MatrixXd m_;
};

/// Result of diagonalizing a pair of quadratic forms (g, gt).
/// Columns of beta satisfy beta^T g beta = 1 and beta^T gt beta = diag(lambdas).
struct PairDiagonalization {
    Eigen::MatrixXd beta;
    Eigen::VectorXd lambdas;
    std::vector<int> multiplicities; // one entry per distinct eigenvalue, ascending
};

namespace detail {

inline constexpr double kZeroEigen = 1e-12;
inline constexpr double kDegenerate = 1e-8;

inline bool is_integer(double x)
{
    return std::abs(x - std::round(x)) < 1e-12;
}

inline double max_abs(const Eigen::VectorXd& v)
{
    return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

inline void fix_sign(Eigen::Ref<Eigen::VectorXd> v)
{
    const double tol = 1e-12 * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > tol) {
            if (v(i) < 0)
                v = -v;
            return;
        }
    }
}

inline Eigen::Index first_significant(const Eigen::VectorXd& v)
{
    const double tol = 1e-8 * std::max(v.cwiseAbs().maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) > tol)
            return i;
    return v.size();
}

} // namespace detail

/// a^gamma through the symmetric eigendecomposition.
inline SymMatrix matrix_power(const SymMatrix& a, double gamma)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a.matrix());
    if (es.info() != Eigen::Success)
        throw Error(Errc::NoConvergence, "eigendecomposition failed");
    Eigen::VectorXd lam = es.eigenvalues();
    const bool integral = detail::is_integer(gamma);
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        double l = lam(i);
        if (std::abs(l) < detail::kZeroEigen) {
            if (gamma <= 0)
                throw Error(Errc::SingularNonPositivePower, "zero eigenvalue raised to a non-positive power");
            lam(i) = 0.0;
        } else if (l < 0) {
            if (!integral)
                throw Error(Errc::NegativeEigenvalueNonIntegerPower, "negative eigenvalue with non-integer power");
            lam(i) = std::pow(l, std::round(gamma));
        } else {
            lam(i) = std::pow(l, gamma);
        }
    }
    const Eigen::MatrixXd& v = es.eigenvectors();
    return SymMatrix(v * lam.asDiagonal() * v.transpose());
}

inline bool is_positive_definite(const SymMatrix& a)
{
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a.matrix());
    if (ldlt.info() != Eigen::Success)
        return false;
    const Eigen::VectorXd d = ldlt.vectorD();
    const double scale = detail::max_abs(d);
    if (scale == 0.0)
        return false;
    return d.minCoeff() > detail::kZeroEigen * scale;
}

/// Modified Gram-Schmidt in the inner product (x, y) = x^T metric y.
/// Input vectors are the columns of `vectors`.
inline Eigen::MatrixXd gram_schmidt_metric(const Eigen::MatrixXd& vectors, const SymMatrix& metric)
{
    if (vectors.rows() != metric.dim())
        throw Error(Errc::DimensionMismatch, "vector length differs from metric dimension");
    if (!is_positive_definite(metric))
        throw Error(Errc::NotPositiveDefinite, "metric is not positive definite");
    const Eigen::MatrixXd& g = metric.matrix();
    Eigen::MatrixXd out(vectors.rows(), vectors.cols());
    for (Eigen::Index k = 0; k < vectors.cols(); ++k) {
        Eigen::VectorXd v = vectors.col(k);
        const double norm0 = std::sqrt(std::max(v.dot(g * v), 0.0));
        // two passes keep the result orthogonal to working precision
        for (int pass = 0; pass < 2; ++pass)
            for (Eigen::Index j = 0; j < k; ++j)
                v -= out.col(j).dot(g * v) * out.col(j);
        const double norm = std::sqrt(std::max(v.dot(g * v), 0.0));
        if (norm0 == 0.0 || norm <= 1e-10 * norm0)
            throw Error(Errc::DependentInput, "input vectors are linearly dependent");
        out.col(k) = v / norm;
    }
    return out;
}

/// Simultaneous diagonalization of the positive definite form g and the form gt.
inline PairDiagonalization simultaneous_diagonalize(const SymMatrix& g, const SymMatrix& gt)
{
    if (g.dim() != gt.dim())
        throw Error(Errc::DimensionMismatch, "forms have different dimensions");
    if (!is_positive_definite(g))
        throw Error(Errc::NotPositiveDefinite, "reference form is not positive definite");

    const Eigen::MatrixXd gmh = matrix_power(g, -0.5).matrix();
    const Eigen::MatrixXd w = gmh * gt.matrix() * gmh;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (w + w.transpose()));
    if (es.info() != Eigen::Success)
        throw Error(Errc::NoConvergence, "eigendecomposition failed");

    PairDiagonalization out;
    out.lambdas = es.eigenvalues();
    out.beta = gmh * es.eigenvectors();

    const Eigen::Index n = g.dim();
    const double scale = std::max(detail::max_abs(out.lambdas), 1e-300);
    Eigen::Index start = 0;
    while (start < n) {
        Eigen::Index end = start + 1;
        while (end < n && out.lambdas(end) - out.lambdas(end - 1) <= detail::kDegenerate * scale)
            ++end;
        const Eigen::Index size = end - start;
        out.multiplicities.push_back(static_cast<int>(size));
        if (size > 1) {
            Eigen::MatrixXd block = out.beta.middleCols(start, size);
            for (Eigen::Index c = 0; c < size; ++c)
                detail::fix_sign(block.col(c));
            std::vector<Eigen::Index> order(size);
            std::iota(order.begin(), order.end(), 0);
            std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
                return detail::first_significant(block.col(a)) < detail::first_significant(block.col(b));
            });
            Eigen::MatrixXd sorted(block.rows(), size);
            Eigen::VectorXd lam(size);
            for (Eigen::Index c = 0; c < size; ++c) {
                sorted.col(c) = block.col(order[c]);
                lam(c) = out.lambdas(start + order[c]);
            }
            out.beta.middleCols(start, size) = gram_schmidt_metric(sorted, g);
            out.lambdas.segment(start, size) = lam;
        }
        start = end;
    }
    for (Eigen::Index c = 0; c < n; ++c)
        detail::fix_sign(out.beta.col(c));
    return out;
}

} // namespace gfmodes
