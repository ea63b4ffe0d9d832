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

// Samplers and densities for measures on the unit sphere of C^D (and the real
// sphere, for von Mises-Fisher).
//
// G(rho):   mean-zero complex Gaussian with covariance rho.
// GA(rho):  G(rho) reweighted by ||psi||^2.
// GAP(rho): GA(rho) pushed forward to the sphere by psi -> psi / ||psi||.

#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gaplab/linalg.hpp"
#include "gaplab/rng.hpp"

namespace gaplab {

/// Draws an index with probability proportional to weights (cumulative table + binary search).
class DiscreteDistribution {
public:
    DiscreteDistribution() = default;
    explicit DiscreteDistribution(const RealVector& w) : cdf_(static_cast<std::size_t>(w.size())) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (w(i) < 0.0) throw NumericalError("DiscreteDistribution: negative weight");
            acc += w(i);
            cdf_[static_cast<std::size_t>(i)] = acc;
        }
        if (!(acc > 0.0)) throw NumericalError("DiscreteDistribution: all weights are zero");
        total_ = acc;
    }

    std::size_t operator()(Stream& rng) const {
        const double u = rng.uniform() * total_;
        auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        std::size_t k = static_cast<std::size_t>(it - cdf_.begin());
        if (k >= cdf_.size()) k = cdf_.size() - 1;
        // Skip zero-weight atoms that share a cumulative value.
        while (k > 0 && cdf_[k] == (k == 0 ? 0.0 : cdf_[k - 1])) --k;
        return k;
    }

    std::size_t size() const { return cdf_.size(); }

private:
    std::vector<double> cdf_;
    double total_ = 0.0;
};

/// G / GA / GAP sampler for a fixed rho. Coefficients are drawn in rho's
/// eigenbasis and rotated once; for diagonal rho the rotation is a permutation.
class GaussianFamily {
public:
    explicit GaussianFamily(DensityMatrix rho)
        : rho_(std::move(rho)), sqrt_p_(rho_.eigenvalues().cwiseSqrt()), pick_(rho_.eigenvalues()) {}

    const DensityMatrix& rho() const { return rho_; }

    /// Z_n with E|Z_n|^2 = p_n, in the eigenbasis.
    Vector gaussian_coeffs(Stream& rng) const {
        const auto n = static_cast<Eigen::Index>(rho_.dim());
        Vector c(n);
        for (Eigen::Index i = 0; i < n; ++i) c(i) = sqrt_p_(i) * rng.complex_normal();
        return c;
    }

    /// Exact GA(rho) draw. ||psi||^2 G = sum_n p_n (|Z_n|^2 / p_n) G, a p-mixture of
    /// G with coordinate n size-biased; size-biasing Exp(p_n) gives Gamma(2, p_n).
    Vector ga_coeffs(Stream& rng) const {
        Vector c = gaussian_coeffs(rng);
        const std::size_t k = pick_(rng);
        const double p = rho_.eigenvalues()(static_cast<Eigen::Index>(k));
        const double r2 = p * (rng.exponential() + rng.exponential());
        c(static_cast<Eigen::Index>(k)) = std::sqrt(r2) * rng.phase();
        return c;
    }

    Vector gap_coeffs(Stream& rng) const {
        Vector c = ga_coeffs(rng);
        c /= c.norm();
        return c;
    }

    Vector gaussian(Stream& rng) const { return rho_.to_computational(gaussian_coeffs(rng)); }
    Vector ga(Stream& rng) const { return rho_.to_computational(ga_coeffs(rng)); }
    Vector gap(Stream& rng) const {
        Vector v = rho_.to_computational(gap_coeffs(rng));
        v /= v.norm();
        return v;
    }

private:
    DensityMatrix rho_;
    RealVector sqrt_p_;
    DiscreteDistribution pick_;
};

inline Vector sample_gaussian(const DensityMatrix& rho, Stream& rng) { return GaussianFamily(rho).gaussian(rng); }
inline Vector sample_ga(const DensityMatrix& rho, Stream& rng) { return GaussianFamily(rho).ga(rng); }
inline PureState sample_gap(const DensityMatrix& rho, Stream& rng) {
    return PureState::normalized(GaussianFamily(rho).gap(rng), rho.shape());
}

inline Vector uniform_sphere_vector(std::size_t D, Stream& rng) {
    if (D == 0) throw DimensionError("sample_uniform_sphere: D must be positive");
    Vector v(static_cast<Eigen::Index>(D));
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
    v /= v.norm();
    return v;
}

inline PureState sample_uniform_sphere(HilbertDim shape, Stream& rng) {
    return PureState::normalized(uniform_sphere_vector(shape.D(), rng), shape);
}

// ---------------------------------------------------------------------------
// GAP density relative to the uniform measure on S(C^D)

/// log of (D / det rho) <psi|rho^{-1}|psi>^{-D-1}. Requires full rank.
inline double log_gap_density(const Vector& psi, const DensityMatrix& rho) {
    const RealVector& p = rho.eigenvalues();
    if (static_cast<std::size_t>(psi.size()) != rho.dim()) throw DimensionError("gap_density: dimension mismatch");
    if (!(p(p.size() - 1) > 0.0)) throw NumericalError("gap_density: rho is singular");
    const Vector c = rho.to_eigen(psi);
    double quad = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) quad += std::norm(c(i)) / p(i);
    const double D = static_cast<double>(p.size());
    return std::log(D) - p.array().log().sum() - (D + 1.0) * std::log(quad);
}

inline double gap_density(const PureState& psi, const DensityMatrix& rho) {
    return std::exp(log_gap_density(psi.amplitudes(), rho));
}

/// Rank-n approximation: keeps p_1..p_{n-1} and puts the tail weight on eigenvector n.
inline DensityMatrix truncate_density(const DensityMatrix& rho, std::size_t n) {
    const std::size_t D = rho.dim();
    if (n < 1 || n > D) throw std::invalid_argument("truncate_density: n must lie in [1, D]");
    const RealVector& p = rho.eigenvalues();
    std::vector<double> q(D, 0.0);
    for (std::size_t m = 0; m + 1 < n; ++m) q[m] = p(static_cast<Eigen::Index>(m));
    double tail = 0.0;
    for (std::size_t m = n - 1; m < D; ++m) tail += p(static_cast<Eigen::Index>(m));
    q[n - 1] = tail;
    if (!rho.has_dense_basis()) {
        std::vector<double> diag(D, 0.0);
        const auto& perm = rho.permutation();
        for (std::size_t k = 0; k < D; ++k) diag[perm[k]] = q[k];
        return DensityMatrix::diagonal(diag, rho.shape());
    }
    return DensityMatrix::from_spectrum(q, rho.basis(), rho.shape());
}

// ---------------------------------------------------------------------------
// Delta mixture sum_n p_n delta_{|n>}

enum class AtomBasis { Eigen, HaarRandom };

struct DeltaDraw {
    std::size_t atom = 0;
    Vector psi;
};

/// Atoms are rho's eigenvectors, or (HaarRandom) those eigenvectors rotated by
/// one Haar unitary W drawn at construction; the measure's density matrix is
/// then W rho W^*.
class DeltaMixture {
public:
    DeltaMixture(const DensityMatrix& rho, AtomBasis basis, Stream& rng)
        : rho_(basis == AtomBasis::Eigen ? rho : rotate(rho, rng)), pick_(rho_.eigenvalues()) {}

    const DensityMatrix& rho() const { return rho_; }

    DeltaDraw operator()(Stream& rng) const {
        const std::size_t k = pick_(rng);
        return {k, rho_.eigenvector(k)};
    }

private:
    static DensityMatrix rotate(const DensityMatrix& rho, Stream& rng) {
        const Matrix w = haar_unitary(rho.dim(), rng);
        const RealVector& p = rho.eigenvalues();
        std::vector<double> pv(p.data(), p.data() + p.size());
        return DensityMatrix::from_spectrum(pv, w * rho.basis(), rho.shape());
    }

    DensityMatrix rho_;
    DiscreteDistribution pick_;
};

inline DeltaDraw sample_delta_mixture(const DensityMatrix& rho, AtomBasis basis, Stream& rng) {
    DeltaMixture mix(rho, basis, rng);
    return mix(rng);
}

// ---------------------------------------------------------------------------
// von Mises-Fisher on the real sphere S^{D-1}

/// Exact draw with density proportional to exp(kappa <mu, x>) (Wood's rejection
/// sampler for t = <mu, x>, tangent direction uniform).
inline RealVector sample_vmf(const RealVector& mu, double kappa, Stream& rng) {
    const auto D = mu.size();
    if (D < 1) throw DimensionError("sample_vmf: empty mean direction");
    if (std::abs(mu.norm() - 1.0) > 1e-12) throw std::invalid_argument("sample_vmf: mu must be a unit vector");
    if (kappa < 0.0) throw std::invalid_argument("sample_vmf: kappa must be nonnegative");
    if (D == 1) {
        // S^0 = {+-1}; P(x = mu) = e^k / (e^k + e^-k).
        const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * kappa));
        return rng.uniform() < p_plus ? RealVector(mu) : RealVector(-mu);
    }
    const double m = static_cast<double>(D - 1);
    const double b = m / (std::sqrt(4.0 * kappa * kappa + m * m) + 2.0 * kappa);
    const double x0 = (1.0 - b) / (1.0 + b);
    const double c = kappa * x0 + m * std::log(1.0 - x0 * x0);
    double w = 0.0;
    for (;;) {
        const double z = rng.beta(0.5 * m, 0.5 * m);
        w = (1.0 - (1.0 + b) * z) / (1.0 - (1.0 - b) * z);
        const double u = rng.uniform_open0();
        if (kappa * w + m * std::log(1.0 - x0 * w) - c >= std::log(u)) break;
    }
    RealVector v(D);
    double tn = 0.0;
    do {
        for (Eigen::Index i = 0; i < D; ++i) v(i) = rng.normal();
        v -= v.dot(mu) * mu;
        tn = v.norm();
    } while (!(tn > 1e-300));
    v /= tn;
    RealVector x = w * mu + std::sqrt(std::max(0.0, 1.0 - w * w)) * v;
    x /= x.norm();
    return x;
}

// ---------------------------------------------------------------------------
// Conditional wave function

struct ConditionalSample {
    std::size_t basis_index = 0;  // 0-based M
    PureState psi_a;
    std::vector<double> born_weights;
};

struct BornDecomposition {
    std::vector<double> weights;  // ||_b<m|psi>||^2
    Matrix partials;              // column m is _b<m|psi> (unnormalized)
};

/// Partial inner products with the columns of the ONB basis_b (a d_b x d_b unitary).
inline BornDecomposition born_decomposition(const PureState& psi, const Matrix& basis_b) {
    const auto& shape = psi.shape();
    const auto da = static_cast<Eigen::Index>(shape.d_a);
    const auto db = static_cast<Eigen::Index>(shape.d_b);
    if (basis_b.rows() != db || basis_b.cols() != db)
        throw DimensionError("conditional_wavefunction: basis must be d_b x d_b");
    using RowMat = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<const RowMat> m(psi.amplitudes().data(), da, db);
    BornDecomposition out;
    out.partials = m * basis_b.conjugate();
    const RealVector w = out.partials.colwise().squaredNorm().transpose();
    out.weights.assign(w.data(), w.data() + w.size());
    return out;
}

inline ConditionalSample conditional_wavefunction(const PureState& psi, const Matrix& basis_b, Stream& rng) {
    BornDecomposition dec = born_decomposition(psi, basis_b);
    const auto w = Eigen::Map<const RealVector>(dec.weights.data(), static_cast<Eigen::Index>(dec.weights.size()));
    const double total = w.sum();
    if (!(total > 1e-300)) throw NumericalError("conditional_wavefunction: all Born weights vanish");
    const std::size_t m = DiscreteDistribution(w)(rng);
    std::vector<double> born(dec.weights.size());
    for (std::size_t i = 0; i < born.size(); ++i) born[i] = dec.weights[i] / total;
    return ConditionalSample{m,
                             PureState::normalized(dec.partials.col(static_cast<Eigen::Index>(m)),
                                                   HilbertDim::flat(psi.shape().d_a)),
                             std::move(born)};
}

// ---------------------------------------------------------------------------
// Tagged measure description

enum class MeasureKind { Gaussian, GaussianAdjusted, GAP, UniformSphere, DeltaMixture, VonMisesFisher };

inline std::string to_string(MeasureKind k) {
    switch (k) {
        case MeasureKind::Gaussian: return "gaussian";
        case MeasureKind::GaussianAdjusted: return "ga";
        case MeasureKind::GAP: return "gap";
        case MeasureKind::UniformSphere: return "uniform";
        case MeasureKind::DeltaMixture: return "delta";
        case MeasureKind::VonMisesFisher: return "vmf";
    }
    return "?";
}

inline std::optional<MeasureKind> measure_kind_from_string(const std::string& s) {
    for (auto k : {MeasureKind::Gaussian, MeasureKind::GaussianAdjusted, MeasureKind::GAP, MeasureKind::UniformSphere,
                   MeasureKind::DeltaMixture, MeasureKind::VonMisesFisher})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// A measure ready for sampling. Complex-sphere kinds return vectors in C^D;
/// the VMF kind returns a real unit vector embedded as a complex vector with
/// zero imaginary part.
class MeasureSpec {
public:
    static MeasureSpec gaussian(DensityMatrix rho) { return {MeasureKind::Gaussian, std::move(rho)}; }
    static MeasureSpec ga(DensityMatrix rho) { return {MeasureKind::GaussianAdjusted, std::move(rho)}; }
    static MeasureSpec gap(DensityMatrix rho) { return {MeasureKind::GAP, std::move(rho)}; }
    static MeasureSpec uniform(HilbertDim shape) {
        return {MeasureKind::UniformSphere, DensityMatrix::maximally_mixed(shape)};
    }
    static MeasureSpec delta(const DensityMatrix& rho, AtomBasis basis, Stream& setup_rng) {
        MeasureSpec m(MeasureKind::DeltaMixture, rho);
        m.delta_ = std::make_shared<DeltaMixture>(rho, basis, setup_rng);
        return m;
    }
    static MeasureSpec vmf(RealVector mu, double kappa) {
        if (std::abs(mu.norm() - 1.0) > 1e-12) throw std::invalid_argument("vmf: mu must be a unit vector");
        if (kappa < 0.0) throw std::invalid_argument("vmf: kappa must be nonnegative");
        MeasureSpec m(MeasureKind::VonMisesFisher,
                      DensityMatrix::maximally_mixed(HilbertDim::flat(static_cast<std::size_t>(mu.size()))));
        m.mu_ = std::move(mu);
        m.kappa_ = kappa;
        return m;
    }

    MeasureKind kind() const { return kind_; }
    double kappa() const { return kappa_; }
    const RealVector& mu() const { return mu_; }

    /// Density matrix of the measure (for G/GA/GAP/uniform/delta). For VMF this
    /// is only the dimension carrier and carries no statistical meaning.
    const DensityMatrix& rho() const { return delta_ ? delta_->rho() : family_->rho(); }
    bool on_sphere() const { return kind_ != MeasureKind::Gaussian && kind_ != MeasureKind::GaussianAdjusted; }

    Vector draw(Stream& rng) const {
        switch (kind_) {
            case MeasureKind::Gaussian: return family_->gaussian(rng);
            case MeasureKind::GaussianAdjusted: return family_->ga(rng);
            case MeasureKind::GAP: return family_->gap(rng);
            case MeasureKind::UniformSphere: return uniform_sphere_vector(family_->rho().dim(), rng);
            case MeasureKind::DeltaMixture: return (*delta_)(rng).psi;
            case MeasureKind::VonMisesFisher: return sample_vmf(mu_, kappa_, rng).cast<cplx>();
        }
        return {};
    }

    /// Atom index for delta mixtures (also advances rng identically to draw()).
    std::size_t draw_atom(Stream& rng) const {
        if (!delta_) throw std::logic_error("draw_atom: not a delta mixture");
        return (*delta_)(rng).atom;
    }

private:
    MeasureSpec(MeasureKind k, DensityMatrix rho)
        : kind_(k), family_(std::make_shared<const GaussianFamily>(std::move(rho))) {}

    MeasureKind kind_;
    std::shared_ptr<const GaussianFamily> family_;
    std::shared_ptr<const DeltaMixture> delta_;
    RealVector mu_;
    double kappa_ = 0.0;
};

/// Running (1/N) sum |psi><psi|.
class DensityAccumulator {
public:
    explicit DensityAccumulator(std::size_t D) : sum_(Matrix::Zero(static_cast<Eigen::Index>(D), static_cast<Eigen::Index>(D))) {}
    void add(const Vector& psi, double weight = 1.0) {
        sum_.noalias() += weight * psi * psi.adjoint();
        total_ += weight;
    }
    void merge(const DensityAccumulator& o) {
        sum_ += o.sum_;
        total_ += o.total_;
    }
    Matrix mean() const { return sum_ / total_; }
    double total_weight() const { return total_; }

private:
    Matrix sum_;
    double total_ = 0.0;
};

}  // namespace gaplab
