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

#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "gaplab/linalg.hpp"
#include "test_support.hpp"

namespace gaplab {
namespace {

using testing::ginibre;
using testing::max_abs;
using testing::random_dm_matrix;
using testing::random_hermitian;
using testing::random_unit;

// Independent index oracle: (rho_a)_{ij} = sum_k rho_{(i,k),(j,k)}.
Matrix partial_trace_oracle(const Matrix& rho, std::size_t da, std::size_t db) {
    Matrix out = Matrix::Zero(static_cast<Eigen::Index>(da), static_cast<Eigen::Index>(da));
    for (std::size_t i = 0; i < da; ++i)
        for (std::size_t j = 0; j < da; ++j)
            for (std::size_t k = 0; k < db; ++k)
                out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) +=
                    rho(static_cast<Eigen::Index>(i * db + k), static_cast<Eigen::Index>(j * db + k));
    return out;
}

// Trace norm from the eigenvalues of M^* M (no SVD routine involved).
double trace_norm_oracle(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m.adjoint() * m, Eigen::EigenvaluesOnly);
    double s = 0.0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) s += std::sqrt(std::max(0.0, es.eigenvalues()(i)));
    return s;
}

TEST(PartialTrace, ProductStateGivesFirstFactor) {
    Stream rng(11);
    const Vector phi = random_unit(3, rng);
    const Vector chi = random_unit(5, rng);
    const PureState psi = PureState::product(phi, chi);
    const DensityMatrix ra = partial_trace_b(psi);
    EXPECT_LT(max_abs(ra.matrix() - phi * phi.adjoint()), 1e-12);
    EXPECT_EQ(ra.dim(), 3u);
}

TEST(PartialTrace, MaximallyMixedMarginal) {
    const DensityMatrix rho = DensityMatrix::maximally_mixed(HilbertDim(3, 7));
    const Matrix ra = partial_trace_b(rho).matrix();
    EXPECT_LT(max_abs(ra - Matrix::Identity(3, 3) / 3.0), 1e-14);
}

TEST(PartialTrace, MatchesIndexOracle) {
    Stream rng(12);
    for (auto [da, db] : {std::pair<std::size_t, std::size_t>{2, 2}, {3, 4}, {4, 2}}) {
        const Matrix rho = random_dm_matrix(da * db, rng);
        const HilbertDim shape(da, db);
        EXPECT_LT(max_abs(partial_trace_b(rho, shape) - partial_trace_oracle(rho, da, db)), 1e-13);
        const DensityMatrix dm = DensityMatrix::from_matrix(rho, shape);
        EXPECT_LT(max_abs(partial_trace_b(dm).matrix() - partial_trace_oracle(rho, da, db)), 1e-12);
    }
}

TEST(PartialTrace, PureStateMatchesDensityRoute) {
    Stream rng(13);
    const Vector v = random_unit(12, rng);
    const HilbertDim shape(3, 4);
    EXPECT_LT(max_abs(partial_trace_b(v, shape) - partial_trace_oracle(v * v.adjoint(), 3, 4)), 1e-14);
}

TEST(PartialTrace, LinearAndTracePreserving) {
    Stream rng(14);
    const HilbertDim shape(3, 5);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix r1 = random_dm_matrix(15, rng), r2 = random_dm_matrix(15, rng);
        const double a = rng.uniform(), b = rng.uniform();
        const Matrix lhs = partial_trace_b(Matrix(a * r1 + b * r2), shape);
        const Matrix rhs = a * partial_trace_b(r1, shape) + b * partial_trace_b(r2, shape);
        EXPECT_LT(max_abs(lhs - rhs), 1e-10);
        EXPECT_NEAR(partial_trace_b(r1, shape).trace().real(), r1.trace().real(), 1e-10);
    }
}

TEST(PartialTrace, RejectsWrongDimension) {
    const Matrix m = Matrix::Identity(6, 6);
    EXPECT_THROW(partial_trace_b(m, HilbertDim(4, 2)), DimensionError);
    EXPECT_THROW(HilbertDim(0, 3), DimensionError);
}

TEST(TraceNorm, DensityMatrixHasUnitTraceNorm) {
    Stream rng(21);
    for (int rep = 0; rep < 10; ++rep) EXPECT_NEAR(trace_norm(random_dm_matrix(6, rng)), 1.0, 1e-12);
}

TEST(TraceNorm, DiagonalSigns) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = -1.0;
    EXPECT_NEAR(trace_norm(m), 2.0, 1e-15);
    EXPECT_NEAR(trace_norm_hermitian(m), 2.0, 1e-15);
}

TEST(TraceNorm, MatchesIndependentOracle) {
    Stream rng(22);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix m = ginibre(8, rng);
        EXPECT_NEAR(trace_norm(m), trace_norm_oracle(m), 1e-10);
        const Matrix h = random_hermitian(8, rng);
        EXPECT_NEAR(trace_norm_hermitian(h), trace_norm_oracle(h), 1e-10);
    }
}

TEST(TraceNorm, TriangleAndUnitaryInvariance) {
    Stream rng(23);
    for (int rep = 0; rep < 50; ++rep) {
        const Matrix a = ginibre(6, rng), b = ginibre(6, rng);
        EXPECT_LE(trace_norm(a + b), trace_norm(a) + trace_norm(b) + 1e-9);
        const Matrix u = haar_unitary(6, rng);
        EXPECT_NEAR(trace_norm(u * a * u.adjoint()), trace_norm(a), 1e-9);
    }
}

TEST(Norms, IdentityAndDiagonal) {
    const Matrix id = Matrix::Identity(9, 9);
    EXPECT_NEAR(operator_norm(id), 1.0, 1e-14);
    EXPECT_NEAR(hs_norm(id), 3.0, 1e-14);
    const std::vector<double> p{0.1, 0.6, 0.3};
    const DensityMatrix rho = DensityMatrix::diagonal(p, HilbertDim::flat(3));
    EXPECT_NEAR(operator_norm(rho.matrix()), 0.6, 1e-14);
    EXPECT_DOUBLE_EQ(rho.norm(), 0.6);
}

TEST(Norms, TraceNormBoundedByHilbertSchmidt) {
    Stream rng(24);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t d = 1 + rng.uniform_index(9);
        const Matrix m = ginibre(d, rng);
        EXPECT_LE(trace_norm(m), std::sqrt(static_cast<double>(d)) * hs_norm(m) * (1.0 + 1e-12));
    }
}

TEST(Purity, PureProjectionAndChain) {
    Stream rng(31);
    const PureState psi = PureState::normalized(random_unit(5, rng), HilbertDim::flat(5));
    EXPECT_NEAR(purity(DensityMatrix::pure(psi)), 1.0, 1e-12);
    for (std::size_t R : {1u, 3u, 8u}) {
        std::vector<double> p(10, 0.0);
        for (std::size_t i = 0; i < R; ++i) p[i] = 1.0 / static_cast<double>(R);
        EXPECT_NEAR(purity(DensityMatrix::diagonal(p, HilbertDim::flat(10))), 1.0 / static_cast<double>(R), 1e-15);
    }
    for (int rep = 0; rep < 50; ++rep) {
        const DensityMatrix rho = DensityMatrix::from_matrix(random_dm_matrix(7, rng), HilbertDim::flat(7));
        EXPECT_LE(rho.purity(), rho.norm() + 1e-15);
        EXPECT_LE(rho.norm(), std::sqrt(rho.purity()) + 1e-15);
    }
}

TEST(Entropy, ReferenceValues) {
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::maximally_mixed(HilbertDim::flat(6))), std::log(6.0), 1e-13);
    Stream rng(32);
    const PureState psi = PureState::normalized(random_unit(4, rng), HilbertDim::flat(4));
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::pure(psi)), 0.0, 1e-12);
    const std::vector<double> p{0.5, 0.25, 0.25};
    EXPECT_NEAR(von_neumann_entropy(DensityMatrix::diagonal(p, HilbertDim::flat(3))), 1.5 * std::log(2.0), 1e-14);
}

TEST(Entropy, UnitaryInvariance) {
    Stream rng(33);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix r = random_dm_matrix(6, rng);
        const Matrix u = haar_unitary(6, rng);
        const DensityMatrix a = DensityMatrix::from_matrix(r, HilbertDim::flat(6));
        const DensityMatrix b = DensityMatrix::from_matrix(u * r * u.adjoint(), HilbertDim::flat(6));
        EXPECT_NEAR(a.purity(), b.purity(), 1e-9);
        EXPECT_NEAR(von_neumann_entropy(a), von_neumann_entropy(b), 1e-9);
        EXPECT_NEAR(von_neumann_entropy(r), von_neumann_entropy(a), 1e-9);
    }
}

TEST(DensityMatrix, RejectsInvalidInput) {
    Matrix m = Matrix::Identity(3, 3);
    EXPECT_THROW(DensityMatrix::from_matrix(m, HilbertDim::flat(3)), NumericalError);  // trace 3
    m(0, 1) = 0.5;
    EXPECT_THROW(DensityMatrix::from_matrix(m / 3.0, HilbertDim::flat(3)), NumericalError);  // not Hermitian
    EXPECT_THROW(PureState(Vector::Ones(3), HilbertDim::flat(3)), NumericalError);
}

TEST(Haar, UnitaryAndUniformColumn) {
    Stream rng(41);
    const std::size_t D = 6;
    const Matrix u = haar_unitary(D, rng);
    EXPECT_LT(max_abs(u.adjoint() * u - Matrix::Identity(6, 6)), 1e-12);
    std::vector<std::vector<double>> c(D);
    for (int i = 0; i < 20000; ++i) {
        const Matrix v = haar_unitary(D, rng);
        for (std::size_t n = 0; n < D; ++n) c[n].push_back(std::norm(v(static_cast<Eigen::Index>(n), 0)));
    }
    for (std::size_t n = 0; n < D; ++n) EXPECT_LT(testing::z_of(c[n], 1.0 / D), 4.0) << "n=" << n;
}

TEST(Haar, DimensionOneIsAPhase) {
    Stream rng(42);
    const Matrix u = haar_unitary(1, rng);
    EXPECT_NEAR(std::abs(u(0, 0)), 1.0, 1e-14);
}

TEST(Gue, SecondMomentMatchesSemicircle) {
    // Radius-1 semicircle: E tr H^2 / D = 1/4.
    Stream rng(43);
    const std::size_t D = 512;
    const Matrix h = gue_hamiltonian(D, rng);
    EXPECT_LT(max_abs(h - h.adjoint()), 1e-14);
    const double m2 = (h * h).trace().real() / D;
    EXPECT_NEAR(m2, 0.25, 0.01);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
    EXPECT_LT(es.eigenvalues().cwiseAbs().maxCoeff(), 1.1);
}

TEST(Evolution, IdentityAtTimeZero) {
    Stream rng(51);
    const Observable h(random_hermitian(5, rng));
    const Vector psi = random_unit(5, rng);
    EXPECT_LT((evolve(psi, h, 0.0) - psi).norm(), 1e-13);
}

TEST(Evolution, DiagonalHamiltonianGivesPhase) {
    RealVector e(4);
    e << 0.3, -1.2, 2.5, 0.0;
    const Observable h = Observable::diagonal(e);
    Vector psi = Vector::Zero(4);
    psi(2) = 1.0;
    const Vector out = evolve(psi, h, 1.7);
    EXPECT_NEAR(std::abs(out(2)), 1.0, 1e-14);
    EXPECT_NEAR(std::arg(out(2) * std::exp(cplx(0.0, 2.5 * 1.7))), 0.0, 1e-12);
    RealVector bd(4);
    bd << 1.0, -1.0, 0.5, 2.0;
    const Observable b = Observable::diagonal(bd);
    EXPECT_NEAR(std::abs(b.expectation(out)), std::abs(b.expectation(psi)), 1e-14);
}

TEST(Evolution, ConservesEnergyAndInnerProducts) {
    Stream rng(52);
    const Observable h(random_hermitian(16, rng));
    const Evolution ev(h);
    const Vector psi = random_unit(16, rng), phi = random_unit(16, rng);
    const cplx e0 = h.expectation(psi);
    const cplx ip = psi.dot(phi);
    for (double t : {0.1, 1.0, 7.5, 100.0}) {
        const Vector a = ev.apply(psi, t), b = ev.apply(phi, t);
        EXPECT_NEAR(std::abs(h.expectation(a) - e0), 0.0, 1e-9);
        EXPECT_NEAR(std::abs(a.dot(b) - ip), 0.0, 1e-9);
    }
}

TEST(Evolution, DensityMatrixRoute) {
    Stream rng(53);
    const Observable h(random_hermitian(6, rng));
    const DensityMatrix rho = DensityMatrix::from_matrix(random_dm_matrix(6, rng), HilbertDim::flat(6));
    const Matrix u = Evolution(h).unitary(0.8);
    EXPECT_LT(max_abs(evolve(rho, h, 0.8).matrix() - u * rho.matrix() * u.adjoint()), 1e-12);
}

}  // namespace
}  // namespace gaplab
