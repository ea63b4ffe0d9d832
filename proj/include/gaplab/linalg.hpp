// Copyright 2026 The gaplab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense complex linear algebra for states on C^D = C^{d_a} (x) C^{d_b}.
//
// Composite index convention: basis vector |i>_a |k>_b sits at i * d_b + k.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaplab/rng.hpp"

namespace gaplab {

using cplx = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HilbertDim {
    std::size_t d_a = 1;
    std::size_t d_b = 1;

    HilbertDim() = default;
    HilbertDim(std::size_t a, std::size_t b) : d_a(a), d_b(b) {
        if (a == 0 || b == 0) throw DimensionError("HilbertDim: factors must be positive");
    }
    static HilbertDim flat(std::size_t D) { return {D, 1}; }

    [[nodiscard]] std::size_t D() const { return d_a * d_b; }
    bool operator==(const HilbertDim&) const = default;
};

inline void require_dim(std::size_t actual, const HilbertDim& shape, const char* what) {
    if (actual != shape.D()) {
        throw DimensionError(std::string(what) + ": dimension " + std::to_string(actual) +
                             " does not match shape " + std::to_string(shape.d_a) + "x" +
                             std::to_string(shape.d_b));
    }
}

/// Unit vector (or, with on_sphere() false, an ambient vector) with a bipartite shape.
class PureState {
public:
    static constexpr double kNormTolerance = 1e-12;

    PureState(Vector amplitudes, HilbertDim shape) : amp_(std::move(amplitudes)), shape_(shape) {
        require_dim(static_cast<std::size_t>(amp_.size()), shape_, "PureState");
        if (std::abs(amp_.norm() - 1.0) > kNormTolerance) {
            throw NumericalError("PureState: vector is not normalized");
        }
    }

    static PureState normalized(Vector v, HilbertDim shape) {
        const double n = v.norm();
        if (!(n > 0.0)) throw NumericalError("PureState: cannot normalize the zero vector");
        v /= n;
        return PureState(std::move(v), shape);
    }

    static PureState ambient(Vector v, HilbertDim shape) {
        PureState s;
        s.amp_ = std::move(v);
        s.shape_ = shape;
        s.on_sphere_ = false;
        require_dim(static_cast<std::size_t>(s.amp_.size()), shape, "PureState");
        return s;
    }

    static PureState product(const Vector& phi_a, const Vector& chi_b) {
        Vector v(phi_a.size() * chi_b.size());
        for (Eigen::Index i = 0; i < phi_a.size(); ++i)
            v.segment(i * chi_b.size(), chi_b.size()) = phi_a(i) * chi_b;
        return normalized(std::move(v), {static_cast<std::size_t>(phi_a.size()),
                                         static_cast<std::size_t>(chi_b.size())});
    }

    const Vector& amplitudes() const { return amp_; }
    const HilbertDim& shape() const { return shape_; }
    bool on_sphere() const { return on_sphere_; }
    std::size_t dim() const { return static_cast<std::size_t>(amp_.size()); }

private:
    PureState() = default;
    Vector amp_;
    HilbertDim shape_;
    bool on_sphere_ = true;
};

namespace detail {

/// Make the first non-negligible component of v real and positive.
inline void fix_phase(Eigen::Ref<Vector> v) {
    const double scale = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > 1e-8 * scale) {
            v *= std::conj(v(i)) / a;
            v(i) = cplx(a, 0.0);
            return;
        }
    }
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

inline bool is_diagonal(const Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            if (i != j && m(i, j) != cplx(0.0, 0.0)) return false;
    return true;
}

}  // namespace detail

/// Hermitian, positive, unit-trace operator carrying its spectral decomposition.
///
/// Eigenvalues are stored in descending order. The eigenbasis is either dense
/// (a D x D unitary, columns are eigenvectors) or a permutation of the
/// computational basis, which keeps diagonal states of large dimension cheap:
/// nothing of size D x D is materialized unless matrix() or basis() is called.
class DensityMatrix {
public:
    static constexpr double kHermitianTolerance = 1e-12;
    static constexpr double kTraceTolerance = 1e-10;
    static constexpr double kNegativeClamp = 1e-12;

    /// Diagonal state diag(p) in the computational basis.
    static DensityMatrix diagonal(std::span<const double> p, HilbertDim shape) {
        require_dim(p.size(), shape, "DensityMatrix::diagonal");
        std::vector<std::size_t> perm(p.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::stable_sort(perm.begin(), perm.end(),
                         [&](std::size_t i, std::size_t j) { return p[i] > p[j]; });
        DensityMatrix rho;
        rho.shape_ = shape;
        rho.p_.resize(static_cast<Eigen::Index>(p.size()));
        for (std::size_t k = 0; k < perm.size(); ++k) rho.p_(static_cast<Eigen::Index>(k)) = p[perm[k]];
        rho.perm_ = std::move(perm);
        rho.finish_spectrum();
        return rho;
    }

    static DensityMatrix maximally_mixed(HilbertDim shape) {
        std::vector<double> p(shape.D(), 1.0 / static_cast<double>(shape.D()));
        return diagonal(p, shape);
    }

    /// Spectrum p with eigenvectors given as the columns of basis (must be unitary).
    static DensityMatrix from_spectrum(std::span<const double> p, const Matrix& basis, HilbertDim shape) {
        require_dim(p.size(), shape, "DensityMatrix::from_spectrum");
        if (basis.rows() != static_cast<Eigen::Index>(p.size()) || basis.cols() != basis.rows())
            throw DimensionError("DensityMatrix::from_spectrum: basis has wrong size");
        const Matrix gram = basis.adjoint() * basis;
        if (detail::max_abs(gram - Matrix::Identity(basis.rows(), basis.cols())) > 1e-10)
            throw NumericalError("DensityMatrix::from_spectrum: basis is not unitary");
        std::vector<std::size_t> order(p.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t i, std::size_t j) { return p[i] > p[j]; });
        DensityMatrix rho;
        rho.shape_ = shape;
        rho.p_.resize(static_cast<Eigen::Index>(p.size()));
        rho.basis_ = Matrix(basis.rows(), basis.cols());
        for (std::size_t k = 0; k < order.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            rho.p_(kk) = p[order[k]];
            rho.basis_->col(kk) = basis.col(static_cast<Eigen::Index>(order[k]));
            detail::fix_phase(rho.basis_->col(kk));
        }
        rho.finish_spectrum();
        return rho;
    }

    /// Diagonalizes a Hermitian unit-trace matrix.
    static DensityMatrix from_matrix(const Matrix& m, HilbertDim shape) {
        if (m.rows() != m.cols()) throw DimensionError("DensityMatrix: matrix is not square");
        require_dim(static_cast<std::size_t>(m.rows()), shape, "DensityMatrix::from_matrix");
        if (detail::max_abs(m - m.adjoint()) > kHermitianTolerance)
            throw NumericalError("DensityMatrix: matrix is not Hermitian");
        if (detail::is_diagonal(m)) {
            std::vector<double> p(static_cast<std::size_t>(m.rows()));
            for (Eigen::Index i = 0; i < m.rows(); ++i) p[static_cast<std::size_t>(i)] = m(i, i).real();
            DensityMatrix rho = diagonal(p, shape);
            rho.matrix_ = m;
            return rho;
        }
        const Matrix h = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(h);
        if (es.info() != Eigen::Success) throw NumericalError("DensityMatrix: eigensolver failed");
        const Eigen::Index n = h.rows();
        DensityMatrix rho;
        rho.shape_ = shape;
        rho.p_ = es.eigenvalues().reverse();
        rho.basis_ = es.eigenvectors().rowwise().reverse();
        for (Eigen::Index k = 0; k < n; ++k) detail::fix_phase(rho.basis_->col(k));
        rho.matrix_ = h;
        rho.finish_spectrum();
        return rho;
    }

    static DensityMatrix pure(const PureState& psi) {
        const Eigen::Index n = psi.amplitudes().size();
        // Complete psi to an orthonormal basis via QR of [psi | I].
        Matrix seed(n, n);
        seed.col(0) = psi.amplitudes();
        if (n > 1) seed.rightCols(n - 1) = Matrix::Identity(n, n).leftCols(n - 1);
        Eigen::HouseholderQR<Matrix> qr(seed);
        Matrix q = qr.householderQ();
        q.col(0) = psi.amplitudes();
        std::vector<double> p(static_cast<std::size_t>(n), 0.0);
        p[0] = 1.0;
        // Gram-Schmidt the remaining columns against psi for exact orthogonality.
        for (Eigen::Index k = 1; k < n; ++k) {
            for (Eigen::Index j = 0; j < k; ++j) q.col(k) -= q.col(j).dot(q.col(k)) * q.col(j);
            q.col(k).normalize();
        }
        return from_spectrum(p, q, psi.shape());
    }

    const HilbertDim& shape() const { return shape_; }
    std::size_t dim() const { return static_cast<std::size_t>(p_.size()); }
    const RealVector& eigenvalues() const { return p_; }
    double norm() const { return p_(0); }
    double purity() const { return p_.squaredNorm(); }
    bool has_dense_basis() const { return basis_.has_value(); }
    /// Only meaningful when !has_dense_basis(): eigenvector k is e_{permutation()[k]}.
    const std::vector<std::size_t>& permutation() const { return perm_; }

    std::size_t rank(double tol = 0.0) const {
        return static_cast<std::size_t>((p_.array() > tol).count());
    }

    Vector eigenvector(std::size_t k) const {
        if (basis_) return basis_->col(static_cast<Eigen::Index>(k));
        Vector v = Vector::Zero(p_.size());
        v(static_cast<Eigen::Index>(perm_[k])) = 1.0;
        return v;
    }

    Matrix basis() const {
        if (basis_) return *basis_;
        Matrix u = Matrix::Zero(p_.size(), p_.size());
        for (std::size_t k = 0; k < perm_.size(); ++k)
            u(static_cast<Eigen::Index>(perm_[k]), static_cast<Eigen::Index>(k)) = 1.0;
        return u;
    }

    /// Maps eigenbasis coordinates c_n to the computational basis: sum_n c_n |n>.
    Vector to_computational(const Vector& c) const {
        if (basis_) return (*basis_) * c;
        Vector v(c.size());
        for (std::size_t k = 0; k < perm_.size(); ++k)
            v(static_cast<Eigen::Index>(perm_[k])) = c(static_cast<Eigen::Index>(k));
        return v;
    }

    /// Inverse of to_computational: c_n = <n|v>.
    Vector to_eigen(const Vector& v) const {
        if (basis_) return basis_->adjoint() * v;
        Vector c(v.size());
        for (std::size_t k = 0; k < perm_.size(); ++k)
            c(static_cast<Eigen::Index>(k)) = v(static_cast<Eigen::Index>(perm_[k]));
        return c;
    }

    Matrix matrix() const {
        if (matrix_) return *matrix_;
        if (!basis_) {
            Matrix m = Matrix::Zero(p_.size(), p_.size());
            for (std::size_t k = 0; k < perm_.size(); ++k) {
                const auto i = static_cast<Eigen::Index>(perm_[k]);
                m(i, i) = p_(static_cast<Eigen::Index>(k));
            }
            return m;
        }
        return (*basis_) * p_.cast<cplx>().asDiagonal() * basis_->adjoint();
    }

    /// <v| rho |v> without forming the matrix.
    double expectation(const Vector& v) const {
        const Vector c = to_eigen(v);
        return (p_.array() * c.cwiseAbs2().array()).sum();
    }

private:
    DensityMatrix() = default;

    void finish_spectrum() {
        for (Eigen::Index i = 0; i < p_.size(); ++i) {
            if (p_(i) < -kNegativeClamp)
                throw NumericalError("DensityMatrix: eigenvalue " + std::to_string(p_(i)) + " is negative");
            if (p_(i) < 0.0) p_(i) = 0.0;
        }
        if (std::abs(p_.sum() - 1.0) > kTraceTolerance)
            throw NumericalError("DensityMatrix: trace " + std::to_string(p_.sum()) + " differs from 1");
    }

    HilbertDim shape_;
    RealVector p_;
    std::optional<Matrix> basis_;
    std::vector<std::size_t> perm_;
    std::optional<Matrix> matrix_;
};

/// Bounded operator with its operator norm cached.
class Observable {
public:
    explicit Observable(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols()) throw DimensionError("Observable: matrix is not square");
        norm_ = m_.size() == 0 ? 0.0 : Eigen::BDCSVD<Matrix>(m_).singularValues()(0);
    }

    static Observable diagonal(const RealVector& d) { return Observable(Matrix(d.cast<cplx>().asDiagonal())); }

    const Matrix& matrix() const { return m_; }
    double norm() const { return norm_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    bool is_hermitian(double tol = 1e-10) const {
        return detail::max_abs(m_ - m_.adjoint()) <= tol * std::max(1.0, norm_);
    }

    /// <psi|B|psi>
    cplx expectation(const Vector& psi) const { return psi.dot(m_ * psi); }

private:
    Matrix m_;
    double norm_ = 0.0;
};

// ---------------------------------------------------------------------------
// Partial trace over b

/// tr_b |psi><psi| for an arbitrary (possibly unnormalized) vector.
inline Matrix partial_trace_b(const Vector& psi, const HilbertDim& shape) {
    require_dim(static_cast<std::size_t>(psi.size()), shape, "partial_trace_b");
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> m(psi.data(), static_cast<Eigen::Index>(shape.d_a),
                               static_cast<Eigen::Index>(shape.d_b));
    return m * m.adjoint();
}

/// tr_b of a D x D operator.
inline Matrix partial_trace_b(const Matrix& rho, const HilbertDim& shape) {
    if (rho.rows() != rho.cols()) throw DimensionError("partial_trace_b: matrix is not square");
    require_dim(static_cast<std::size_t>(rho.rows()), shape, "partial_trace_b");
    const auto da = static_cast<Eigen::Index>(shape.d_a);
    const auto db = static_cast<Eigen::Index>(shape.d_b);
    Matrix out = Matrix::Zero(da, da);
    for (Eigen::Index i = 0; i < da; ++i)
        for (Eigen::Index j = 0; j < da; ++j) out(i, j) = rho.block(i * db, j * db, db, db).trace();
    return out;
}

inline DensityMatrix partial_trace_b(const PureState& psi) {
    const auto da = psi.shape().d_a;
    return DensityMatrix::from_matrix(partial_trace_b(psi.amplitudes(), psi.shape()), HilbertDim::flat(da));
}

/// tr_b rho as a matrix; uses the spectral decomposition so no D x D product is formed.
inline Matrix partial_trace_b_matrix(const DensityMatrix& rho) {
    const auto& shape = rho.shape();
    const auto da = static_cast<Eigen::Index>(shape.d_a);
    const auto db = static_cast<Eigen::Index>(shape.d_b);
    Matrix out = Matrix::Zero(da, da);
    const auto& p = rho.eigenvalues();
    if (!rho.has_dense_basis()) {
        const auto& perm = rho.permutation();
        for (std::size_t k = 0; k < perm.size(); ++k) {
            const auto i = static_cast<Eigen::Index>(perm[k]) / db;
            out(i, i) += p(static_cast<Eigen::Index>(k));
        }
        return out;
    }
    for (Eigen::Index n = 0; n < p.size(); ++n) {
        if (p(n) == 0.0) continue;
        out.noalias() += p(n) * partial_trace_b(Vector(rho.eigenvector(static_cast<std::size_t>(n))), shape);
    }
    return 0.5 * (out + out.adjoint());
}

inline DensityMatrix partial_trace_b(const DensityMatrix& rho) {
    return DensityMatrix::from_matrix(partial_trace_b_matrix(rho), HilbertDim::flat(rho.shape().d_a));
}

// ---------------------------------------------------------------------------
// Norms and spectral functionals

inline RealVector singular_values(const Matrix& m) {
    if (m.size() == 0) return RealVector();
    return Eigen::BDCSVD<Matrix>(m).singularValues();
}

/// ||M||_tr = sum of singular values.
inline double trace_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : singular_values(m).sum(); }

/// Trace norm of a Hermitian matrix via |eigenvalues|; the input is not checked.
inline double trace_norm_hermitian(const Matrix& h) {
    if (h.size() == 0) return 0.0;
    if (h.rows() == 1) return std::abs(h(0, 0).real());
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

inline double operator_norm(const Matrix& m) { return m.size() == 0 ? 0.0 : singular_values(m)(0); }

inline double hs_norm(const Matrix& m) { return m.norm(); }

inline double purity(const DensityMatrix& rho) { return rho.purity(); }

inline double entropy_of_spectrum(const RealVector& p) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
        if (p(i) > 0.0) s -= p(i) * std::log(p(i));
    return s;
}

inline double von_neumann_entropy(const DensityMatrix& rho) { return entropy_of_spectrum(rho.eigenvalues()); }

/// Entropy of a Hermitian positive matrix; tiny negative eigenvalues are treated as zero.
inline double von_neumann_entropy(const Matrix& h) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    return entropy_of_spectrum(es.eigenvalues().cwiseMax(0.0));
}

// ---------------------------------------------------------------------------
// Random matrices

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// R-diagonal phases divided out.
inline Matrix haar_unitary(std::size_t D, Stream& rng) {
    if (D == 0) throw DimensionError("haar_unitary: D must be positive");
    const auto n = static_cast<Eigen::Index>(D);
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix& r = qr.matrixQR();
    for (Eigen::Index j = 0; j < n; ++j) {
        const cplx d = r(j, j);
        const double a = std::abs(d);
        q.col(j) *= (a > 0.0 ? d / a : cplx(1.0, 0.0));
    }
    return q;
}

/// GUE matrix scaled so the limiting semicircle has radius 1 (E tr H^2 / D = 1/4).
inline Matrix gue_hamiltonian(std::size_t D, Stream& rng) {
    if (D == 0) throw DimensionError("gue_hamiltonian: D must be positive");
    const auto n = static_cast<Eigen::Index>(D);
    Matrix g(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.complex_normal();
    const double scale = 1.0 / std::sqrt(2.0 * static_cast<double>(D));
    Matrix h = 0.5 * scale * (g + g.adjoint());
    return h;
}

// ---------------------------------------------------------------------------
// Unitary evolution through the spectral decomposition of H

class Evolution {
public:
    explicit Evolution(const Observable& h) {
        if (!h.is_hermitian()) throw NumericalError("Evolution: Hamiltonian is not Hermitian");
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (h.matrix() + h.matrix().adjoint()));
        if (es.info() != Eigen::Success) throw NumericalError("Evolution: eigensolver failed");
        energies_ = es.eigenvalues();
        v_ = es.eigenvectors();
    }

    const RealVector& energies() const { return energies_; }
    const Matrix& eigenvectors() const { return v_; }
    std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }

    Vector phases(double t) const {
        Vector ph(energies_.size());
        for (Eigen::Index i = 0; i < energies_.size(); ++i) ph(i) = std::polar(1.0, -energies_(i) * t);
        return ph;
    }

    /// U_t = exp(-i H t)
    Matrix unitary(double t) const { return v_ * phases(t).asDiagonal() * v_.adjoint(); }

    Vector apply(const Vector& psi, double t) const {
        if (psi.size() != energies_.size()) throw DimensionError("Evolution: state dimension mismatch");
        return v_ * phases(t).cwiseProduct(v_.adjoint() * psi);
    }

    Matrix apply(const Matrix& rho, double t) const {
        const Matrix u = unitary(t);
        return u * rho * u.adjoint();
    }

    DensityMatrix apply(const DensityMatrix& rho, double t) const {
        const Matrix u = unitary(t);
        const RealVector& p = rho.eigenvalues();
        std::vector<double> pv(p.data(), p.data() + p.size());
        return DensityMatrix::from_spectrum(pv, u * rho.basis(), rho.shape());
    }

private:
    RealVector energies_;
    Matrix v_;
};

inline Vector evolve(const Vector& psi, const Observable& h, double t) { return Evolution(h).apply(psi, t); }

inline DensityMatrix evolve(const DensityMatrix& rho, const Observable& h, double t) {
    return Evolution(h).apply(rho, t);
}

}  // namespace gaplab
