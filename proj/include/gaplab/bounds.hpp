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

// Closed-form concentration and typicality bounds, evaluated in log space so
// that dimensions far beyond double-precision exponent range for the raw
// expressions (D ~ 1e32 and beyond) remain exact to relative rounding error.

#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace gaplab {

namespace constants {
inline constexpr double pi = std::numbers::pi;
/// Canonical typicality, deviation form.
inline constexpr double c_exp = 48.0 * pi;
/// Levy's lemma for GAP.
inline constexpr double C_levy = 1.0 / (288.0 * pi * pi);
/// Canonical typicality and observable concentration, probability form.
inline constexpr double C_tilde = 1.0 / (2304.0 * pi * pi);
/// Levy's lemma for the uniform measure.
inline constexpr double C_hat = 2.0 / (9.0 * pi * pi * pi);
}  // namespace constants

enum class BoundTag {
    ExpDelta,     // canonical typicality, exponential, epsilon(delta)
    ExpEps,       // canonical typicality, exponential, tail(epsilon)
    PolyDelta,    // canonical typicality, polynomial, epsilon(delta)
    PolyEps,      // canonical typicality, polynomial, tail(epsilon)
    LevyGAP,      // Levy's lemma for GAP(rho)
    LevyB,        // <psi|B|psi> concentration (also fixed-time dynamical typicality)
    DynTimeAvg,   // time-averaged observable deviation
    DynReduced,   // time-averaged reduced-state deviation
    GaussConc,    // Lipschitz concentration under G(rho)
    GAConc,       // Lipschitz concentration under GA(rho)
    GATail,       // GA(rho){||psi|| < r}
    UnifPoly,     // uniform measure, polynomial, epsilon(delta)
    UnifPolyEps,  // same, solved for delta
    UnifExp,      // uniform measure, exponential, epsilon(delta); validity-restricted
    UnifExpEps,   // same, solved for delta
    LevyUniform,  // Levy's lemma for the uniform measure on S(C^D)
    VarBound,     // variance of <psi|A|psi> under GAP(rho)
};

enum class BoundKind { Probability, Deviation, Variance };

struct BoundInfo {
    BoundTag tag;
    const char* name;
    BoundKind kind;
};

inline constexpr BoundInfo kBoundTable[] = {
    {BoundTag::ExpDelta, "exp-delta", BoundKind::Deviation},
    {BoundTag::ExpEps, "exp-eps", BoundKind::Probability},
    {BoundTag::PolyDelta, "poly-delta", BoundKind::Deviation},
    {BoundTag::PolyEps, "poly-eps", BoundKind::Probability},
    {BoundTag::LevyGAP, "levy-gap", BoundKind::Probability},
    {BoundTag::LevyB, "levy-b", BoundKind::Probability},
    {BoundTag::DynTimeAvg, "dyn-time-avg", BoundKind::Probability},
    {BoundTag::DynReduced, "dyn-reduced", BoundKind::Probability},
    {BoundTag::GaussConc, "gauss-conc", BoundKind::Probability},
    {BoundTag::GAConc, "ga-conc", BoundKind::Probability},
    {BoundTag::GATail, "ga-tail", BoundKind::Probability},
    {BoundTag::UnifPoly, "unif-poly", BoundKind::Deviation},
    {BoundTag::UnifPolyEps, "unif-poly-eps", BoundKind::Probability},
    {BoundTag::UnifExp, "unif-exp", BoundKind::Deviation},
    {BoundTag::UnifExpEps, "unif-exp-eps", BoundKind::Probability},
    {BoundTag::LevyUniform, "levy-uniform", BoundKind::Probability},
    {BoundTag::VarBound, "var-bound", BoundKind::Variance},
};

inline const BoundInfo& bound_info(BoundTag t) {
    for (const auto& b : kBoundTable)
        if (b.tag == t) return b;
    throw std::logic_error("bound_info: unknown tag");
}

inline std::string to_string(BoundTag t) { return bound_info(t).name; }

inline std::optional<BoundTag> bound_tag_from_string(const std::string& s) {
    for (const auto& b : kBoundTable)
        if (s == b.name) return b.tag;
    return std::nullopt;
}

class BoundError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct BoundSpec {
    BoundTag tag = BoundTag::ExpEps;
    std::optional<double> d_a = std::nullopt;
    std::optional<double> dim = std::nullopt;  // D, or d_R for the uniform-measure bounds
    std::optional<double> eps = std::nullopt;
    std::optional<double> delta = std::nullopt;
    std::optional<double> norm_rho = std::nullopt;
    std::optional<double> purity = std::nullopt;
    std::optional<double> eta = std::nullopt;
    std::optional<double> norm_b = std::nullopt;  // ||B|| (or ||A|| for VarBound)
    std::optional<double> r = std::nullopt;
};

/// Log-domain bound value plus the clamped view experiments compare against.
/// Probabilities clamp to [0, 1]; trace-norm deviations clamp to 2, the
/// diameter of the set of density matrices in trace norm.
struct BoundValue {
    BoundTag tag = BoundTag::ExpEps;
    BoundKind kind = BoundKind::Probability;
    double log_value = 0.0;
    bool hypothesis_ok = true;  // stated applicability condition holds
    std::string note;

    double value() const { return std::exp(log_value); }
    double log10_value() const { return log_value / std::numbers::ln10; }
    double clamped() const {
        switch (kind) {
            case BoundKind::Probability: return log_value >= 0.0 ? 1.0 : std::exp(log_value);
            case BoundKind::Deviation: return log_value >= std::log(2.0) ? 2.0 : std::exp(log_value);
            case BoundKind::Variance: return value();
        }
        return value();
    }
};

namespace detail {

inline double need(const std::optional<double>& v, const char* name, BoundTag tag) {
    if (!v) throw BoundError("bound " + to_string(tag) + ": missing parameter '" + name + "'");
    if (!std::isfinite(*v)) throw BoundError("bound " + to_string(tag) + ": parameter '" + name + "' is not finite");
    return *v;
}

inline double need_positive(const std::optional<double>& v, const char* name, BoundTag tag) {
    const double x = need(v, name, tag);
    if (!(x > 0.0)) throw BoundError("bound " + to_string(tag) + ": parameter '" + name + "' must be positive");
    return x;
}

inline double need_eps(const BoundSpec& s) {
    const double e = need(s.eps, "eps", s.tag);
    if (e < 0.0) throw BoundError("bound " + to_string(s.tag) + ": eps must be nonnegative");
    return e;
}

inline double need_delta(const BoundSpec& s) {
    const double d = need(s.delta, "delta", s.tag);
    if (!(d > 0.0)) throw BoundError("bound " + to_string(s.tag) + ": delta must be positive");
    return d;
}

inline double safe_log(double x) { return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity(); }

}  // namespace detail

inline BoundValue bound_value(const BoundSpec& s) {
    using namespace constants;
    using detail::need;
    using detail::need_positive;
    BoundValue out;
    out.tag = s.tag;
    out.kind = bound_info(s.tag).kind;
    const double ln2 = std::log(2.0);
    switch (s.tag) {
        case BoundTag::ExpDelta: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double delta = detail::need_delta(s);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            // ln(12 d_a^2 / delta), floored at 0 where the statement is vacuous (delta > 12 d_a^2).
            const double inner = std::max(0.0, std::log(12.0) + 2.0 * std::log(da) - std::log(delta));
            out.log_value = std::log(c_exp) + std::log(da) + 0.5 * (detail::safe_log(inner) + std::log(nr));
            break;
        }
        case BoundTag::ExpEps: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double e = detail::need_eps(s);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = std::log(12.0) + 2.0 * std::log(da) - C_tilde * e * e / (da * da * nr);
            break;
        }
        case BoundTag::PolyDelta: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double delta = detail::need_delta(s);
            const double pur = need_positive(s.purity, "purity", s.tag);
            out.log_value = 0.5 * (std::log(28.0) + 5.0 * std::log(da) + std::log(pur) - std::log(delta));
            if (s.norm_rho) out.hypothesis_ok = *s.norm_rho < 0.25;
            if (!out.hypothesis_ok) out.note = "requires ||rho|| < 1/4";
            break;
        }
        case BoundTag::PolyEps: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double e = detail::need_eps(s);
            const double pur = need_positive(s.purity, "purity", s.tag);
            out.log_value = std::log(28.0) + 5.0 * std::log(da) + std::log(pur) - 2.0 * detail::safe_log(e);
            if (s.norm_rho) out.hypothesis_ok = *s.norm_rho < 0.25;
            if (!out.hypothesis_ok) out.note = "requires ||rho|| < 1/4";
            break;
        }
        case BoundTag::LevyGAP: {
            const double e = detail::need_eps(s);
            const double eta = need_positive(s.eta, "eta", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = std::log(6.0) - C_levy * e * e / (eta * eta * nr);
            break;
        }
        case BoundTag::LevyB: {
            const double e = detail::need_eps(s);
            const double nb = need_positive(s.norm_b, "norm_b", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = std::log(12.0) - C_tilde * e * e / (nb * nb * nr);
            break;
        }
        case BoundTag::DynTimeAvg: {
            const double e = detail::need_eps(s);
            const double nb = need_positive(s.norm_b, "norm_b", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = std::log(9.0) - C_tilde * e * e / (36.0 * nb * nb * nr);
            break;
        }
        case BoundTag::DynReduced: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double e = detail::need_eps(s);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = std::log(9.0) + 2.0 * std::log(da) - C_tilde * e * e / (36.0 * da * da * nr);
            break;
        }
        case BoundTag::GaussConc: {
            const double e = detail::need_eps(s);
            const double eta = need_positive(s.eta, "eta", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = ln2 - 4.0 * e * e / (pi * pi * eta * eta * nr);
            break;
        }
        case BoundTag::GAConc: {
            const double e = detail::need_eps(s);
            const double eta = need_positive(s.eta, "eta", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = 2.0 * ln2 - 2.0 * e * e / (pi * pi * eta * eta * nr);
            break;
        }
        case BoundTag::GATail: {
            const double r = need_positive(s.r, "r", s.tag);
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            out.log_value = 0.5 * ln2 - (0.5 - r * r) / (2.0 * nr);
            break;
        }
        case BoundTag::UnifPoly: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double delta = detail::need_delta(s);
            const double dr = need_positive(s.dim, "dim", s.tag);
            out.log_value = 2.0 * std::log(da) - 0.5 * (std::log(delta) + std::log(dr));
            break;
        }
        case BoundTag::UnifPolyEps: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double e = detail::need_eps(s);
            const double dr = need_positive(s.dim, "dim", s.tag);
            out.log_value = 4.0 * std::log(da) - 2.0 * detail::safe_log(e) - std::log(dr);
            break;
        }
        case BoundTag::UnifExp: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double delta = detail::need_delta(s);
            const double dr = need_positive(s.dim, "dim", s.tag);
            const double k = 18.0 * pi * pi * pi;
            const double l = std::max(0.0, std::log(4.0 / delta));
            out.log_value = ln2 + 0.5 * (std::log(k) - std::log(dr) + detail::safe_log(l));
            // Stated applicability: delta < 4 exp(-d_a^2 / (18 pi^3)).
            out.hypothesis_ok = std::log(delta) < std::log(4.0) - da * da / k;
            if (!out.hypothesis_ok) out.note = "requires delta < 4 exp(-d_a^2/(18 pi^3))";
            break;
        }
        case BoundTag::UnifExpEps: {
            const double da = need_positive(s.d_a, "d_a", s.tag);
            const double e = detail::need_eps(s);
            const double dr = need_positive(s.dim, "dim", s.tag);
            const double k = 18.0 * pi * pi * pi;
            out.log_value = std::log(4.0) - e * e * dr / (4.0 * k);
            out.hypothesis_ok = out.log_value < std::log(4.0) - da * da / k;
            if (!out.hypothesis_ok) out.note = "requires delta < 4 exp(-d_a^2/(18 pi^3))";
            break;
        }
        case BoundTag::LevyUniform: {
            const double e = detail::need_eps(s);
            const double eta = need_positive(s.eta, "eta", s.tag);
            const double D = need_positive(s.dim, "dim", s.tag);
            out.log_value = std::log(4.0) - C_hat * D * e * e / (eta * eta);
            break;
        }
        case BoundTag::VarBound: {
            const double nr = need_positive(s.norm_rho, "norm_rho", s.tag);
            const double pur = need_positive(s.purity, "purity", s.tag);
            const double na = need(s.norm_b, "norm_b", s.tag);
            if (!(nr < 0.25)) throw BoundError("bound var-bound: requires ||rho|| < 1/4");
            const double num = 4.0 * std::sqrt(pur) + 2.0 * pur;
            const double v = na * na * pur / (1.0 - nr) * (1.0 + num / ((1.0 - 2.0 * nr) * (1.0 - 3.0 * nr)));
            out.log_value = detail::safe_log(v);
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polynomial vs exponential canonical-typicality bound crossover

/// Spectrum family indexed by the dimension D (passed as a double so that
/// astronomically large D can be explored).
struct SpectrumFamily {
    std::string name;
    std::function<double(double)> norm_rho;
    std::function<double(double)> purity;
};

/// One eigenvalue 1/sqrt(D), the remaining D-1 equal.
inline SpectrumFamily sqrt_peak_family() {
    return {"sqrt-peak",
            [](double D) { return 1.0 / std::sqrt(D); },
            [](double D) {
                const double r = 1.0 - 1.0 / std::sqrt(D);
                return 1.0 / D + r * r / (D - 1.0);
            }};
}

/// rho = I / D.
inline SpectrumFamily uniform_family() {
    return {"uniform", [](double D) { return 1.0 / D; }, [](double D) { return 1.0 / D; }};
}

/// log(poly tail bound) - log(exp tail bound) at dimension D.
inline double poly_minus_exp_log(double d_a, double eps, const SpectrumFamily& fam, double D) {
    BoundSpec poly{.tag = BoundTag::PolyEps, .d_a = d_a, .eps = eps, .purity = fam.purity(D)};
    BoundSpec expo{.tag = BoundTag::ExpEps, .d_a = d_a, .eps = eps, .norm_rho = fam.norm_rho(D)};
    return bound_value(poly).log_value - bound_value(expo).log_value;
}

struct CrossoverResult {
    /// Maximal D-intervals (lo, hi) on which the polynomial bound is strictly smaller.
    std::vector<std::pair<double, double>> intervals;
    bool empty() const { return intervals.empty(); }
    /// First interval, or (NaN, NaN) when there is none.
    std::pair<double, double> first() const {
        if (intervals.empty()) return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
        return intervals.front();
    }
};

/// Scans log D on a uniform grid for sign changes of poly_minus_exp_log and
/// refines each by bisection in log D.
inline CrossoverResult crossover_solve(double d_a, double eps, const SpectrumFamily& fam, double d_min = 2.0,
                                       double d_max = 1e100, int grid = 4000) {
    if (!(d_a >= 1.0)) throw BoundError("crossover_solve: d_a must be >= 1");
    if (!(eps > 0.0)) throw BoundError("crossover_solve: eps must be positive");
    if (!(d_min > 1.0) || !(d_max > d_min)) throw BoundError("crossover_solve: invalid D range");
    auto g = [&](double logd) { return poly_minus_exp_log(d_a, eps, fam, std::exp(logd)); };
    const double lo = std::log(d_min), hi = std::log(d_max);
    auto refine = [&](double a, double b) {
        double ga = g(a);
        for (int it = 0; it < 200 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
            const double m = 0.5 * (a + b);
            const double gm = g(m);
            if ((gm < 0.0) == (ga < 0.0)) {
                a = m;
                ga = gm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    CrossoverResult res;
    double prev_x = lo;
    double prev_g = g(lo);
    bool is_open = prev_g < 0.0;
    double open_at = d_min;
    for (int i = 1; i <= grid; ++i) {
        const double x = lo + (hi - lo) * i / grid;
        const double gx = g(x);
        if (std::isnan(gx)) continue;
        if ((gx < 0.0) != (prev_g < 0.0)) {
            const double root = std::exp(refine(prev_x, x));
            if (gx < 0.0) {
                is_open = true;
                open_at = root;
            } else if (is_open) {
                res.intervals.emplace_back(open_at, root);
                is_open = false;
            }
        }
        prev_x = x;
        prev_g = gx;
    }
    if (is_open) res.intervals.emplace_back(open_at, d_max);
    return res;
}

}  // namespace gaplab
