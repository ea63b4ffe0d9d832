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

// Fourth moments of GAP(rho) coordinates and the variance of <psi|A|psi>.
//
// With c_n = <n|psi> in rho's eigenbasis,
//   E |c_m|^2 |c_l|^2 = p_m p_l (1 + delta_ml) K_ml,
//   K_ml = int_0^inf (1 + x p_m)^-1 (1 + x p_l)^-1 prod_n (1 + x p_n)^-1 dx,
// and all other fourth moments E(c_l^* c_m c_m'^* c_l') vanish unless the
// indices pair up.

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gaplab/linalg.hpp"
#include "gaplab/quadrature.hpp"

namespace gaplab {

class HypothesisError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline constexpr Eigen::Index kLogProductThreshold = 200;

inline void check_spectrum(const RealVector& p, const char* what) {
    if (p.size() == 0) throw std::invalid_argument(std::string(what) + ": empty spectrum");
    if (!(p.minCoeff() > 0.0)) throw HypothesisError(std::string(what) + ": all eigenvalues must be positive");
    if (std::abs(p.sum() - 1.0) > 1e-10) throw HypothesisError(std::string(what) + ": eigenvalues must sum to 1");
}

}  // namespace detail

/// The K integral for an arbitrary positive vector p (no normalization required).
/// For more than 200 factors the product is accumulated as a sum of log1p terms.
inline double kml_integral(const RealVector& p, double pm, double pl) {
    const bool use_log = p.size() > detail::kLogProductThreshold;
    auto integrand = [&](double x) {
        double v;
        if (use_log) {
            double s = 0.0;
            for (Eigen::Index i = 0; i < p.size(); ++i) s += std::log1p(x * p(i));
            s += std::log1p(x * pm) + std::log1p(x * pl);
            v = std::exp(-s);
        } else {
            double prod = (1.0 + x * pm) * (1.0 + x * pl);
            for (Eigen::Index i = 0; i < p.size(); ++i) {
                prod *= 1.0 + x * p(i);
                if (prod > 1e300) return 0.0;
            }
            v = 1.0 / prod;
        }
        return v;
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-11;
    opt.max_intervals = 2000;
    try {
        return integrate_to_infinity(integrand, 0.0, opt).value;
    } catch (const QuadratureError& e) {
        throw NumericalError(std::string("kml: ") + e.what());
    }
}

/// K_ml for a normalized, strictly positive spectrum (0-based m, l).
inline double kml(const RealVector& p, std::size_t m, std::size_t l) {
    detail::check_spectrum(p, "kml");
    if (m >= static_cast<std::size_t>(p.size()) || l >= static_cast<std::size_t>(p.size()))
        throw std::out_of_range("kml: index out of range");
    return kml_integral(p, p(static_cast<Eigen::Index>(m)), p(static_cast<Eigen::Index>(l)));
}

/// All K_ml for one spectrum. K_ml depends on (m, l) only through (p_m, p_l), so
/// one quadrature is done per unordered pair of distinct eigenvalues.
class KmlKernel {
public:
    explicit KmlKernel(RealVector p) : p_(std::move(p)) {
        detail::check_spectrum(p_, "KmlKernel");
        std::vector<double> values;
        for (Eigen::Index i = 0; i < p_.size(); ++i) {
            const double v = p_(i);
            auto it = std::find(values.begin(), values.end(), v);
            if (it == values.end()) {
                index_.push_back(values.size());
                values.push_back(v);
            } else {
                index_.push_back(static_cast<std::size_t>(it - values.begin()));
            }
        }
        const auto u = static_cast<Eigen::Index>(values.size());
        table_ = Eigen::MatrixXd(u, u);
        for (Eigen::Index a = 0; a < u; ++a)
            for (Eigen::Index b = a; b < u; ++b) {
                table_(a, b) = kml_integral(p_, values[static_cast<std::size_t>(a)], values[static_cast<std::size_t>(b)]);
                table_(b, a) = table_(a, b);
            }
    }

    double operator()(std::size_t m, std::size_t l) const {
        return table_(static_cast<Eigen::Index>(index_.at(m)), static_cast<Eigen::Index>(index_.at(l)));
    }

    const RealVector& spectrum() const { return p_; }
    std::size_t dim() const { return static_cast<std::size_t>(p_.size()); }
    std::size_t distinct_values() const { return static_cast<std::size_t>(table_.rows()); }

    /// Upper bound K_ml <= 1 / (1 - p_max).
    double upper_bound() const { return 1.0 / (1.0 - p_.maxCoeff()); }

private:
    RealVector p_;
    std::vector<std::size_t> index_;
    Eigen::MatrixXd table_;
};

/// E |c_m|^2 |c_l|^2 under GAP(rho) in rho's eigenbasis.
inline double gap_fourth_moment(const KmlKernel& k, std::size_t m, std::size_t l) {
    const auto& p = k.spectrum();
    const double delta = m == l ? 2.0 : 1.0;
    return p(static_cast<Eigen::Index>(m)) * p(static_cast<Eigen::Index>(l)) * delta * k(m, l);
}

inline double gap_fourth_moment(const DensityMatrix& rho, std::size_t m, std::size_t l) {
    const auto& p = rho.eigenvalues();
    const double delta = m == l ? 2.0 : 1.0;
    return p(static_cast<Eigen::Index>(m)) * p(static_cast<Eigen::Index>(l)) * delta * kml(p, m, l);
}

/// Upper bound on Var <psi|A|psi> under GAP(rho); requires ||rho|| < 1/4.
inline double variance_bound(double norm_rho, double purity, double norm_a) {
    if (!(norm_rho < 0.25)) throw HypothesisError("variance_bound: requires ||rho|| < 1/4");
    const double pm = norm_rho;
    const double num = 4.0 * std::sqrt(purity) + 2.0 * purity;
    return norm_a * norm_a * purity / (1.0 - pm) * (1.0 + num / ((1.0 - 2.0 * pm) * (1.0 - 3.0 * pm)));
}

inline double variance_bound(const DensityMatrix& rho, const Observable& a) {
    return variance_bound(rho.norm(), rho.purity(), a.norm());
}

/// Exact Var <psi|A|psi> under GAP(rho) from the K kernel:
///   Var = sum_{m,l} (|A_ml|^2 + A_mm^* A_ll) p_m p_l K_ml
/// with A expressed in rho's eigenbasis and shifted to E<psi|A|psi> = 0.
inline double gap_variance_exact(const DensityMatrix& rho, const Observable& a, const KmlKernel& k) {
    const Matrix u = rho.basis();
    Matrix ae = u.adjoint() * a.matrix() * u;
    const auto& p = rho.eigenvalues();
    cplx mean = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i) mean += p(i) * ae(i, i);
    ae.diagonal().array() -= mean;
    double var = 0.0;
    for (Eigen::Index m = 0; m < p.size(); ++m)
        for (Eigen::Index l = 0; l < p.size(); ++l) {
            const double w = p(m) * p(l) * k(static_cast<std::size_t>(m), static_cast<std::size_t>(l));
            var += (std::norm(ae(m, l)) + (std::conj(ae(m, m)) * ae(l, l)).real()) * w;
        }
    return var;
}

/// Exact Var <psi|A|psi> for psi uniform on S(C^D):
/// tr(A^*A) / (D (D+1)) - |tr A / D|^2 / (D+1).
inline double uniform_variance(const Observable& a) {
    const double D = static_cast<double>(a.dim());
    const Matrix& m = a.matrix();
    const double hs = m.squaredNorm();
    const cplx tr = m.trace() / D;
    return hs / (D * (D + 1.0)) - std::norm(tr) / (D + 1.0);
}

}  // namespace gaplab
