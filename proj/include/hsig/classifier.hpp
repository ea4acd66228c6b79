#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "hsig/error.hpp"
#include "hsig/partitioning.hpp"
#include "hsig/preprocess.hpp"
#include "hsig/types.hpp"

namespace hsig {

// Lower bound on dmax when deriving a Gaussian width, so perfectly stable
// partitions (dmax = 0) still yield a finite membership function.
inline constexpr double kDmaxFloor = 1e-9;

enum class VerifyMode { full, shape_only };

// Width of both antecedent Gaussians of a cell: the "similar" set (centre 0)
// drops to exactly mu_min at distance dmax.
inline double membership_width(double dmax, double mu_min) {
    return std::max(dmax, kDmaxFloor) / std::sqrt(std::abs(std::log(mu_min)));
}

inline double log_gaussian_membership(double x, double center, double dmax, double mu_min) {
    const double u = (x - center) / membership_width(dmax, mu_min);
    return -u * u;
}

inline double gaussian_membership(double x, double center, double dmax, double mu_min) {
    return std::exp(log_gaussian_membership(x, center, dmax, mu_min));
}

// Algebraic weighted t-norm: prod(1 - w_n (1 - a_n)).
inline double weighted_tnorm(std::span<const double> memberships, std::span<const double> weights) {
    if (memberships.size() != weights.size()) throw LengthMismatch("t-norm argument/weight count differ");
    double out = 1.0;
    for (std::size_t n = 0; n < memberships.size(); ++n) out *= 1.0 - weights[n] * (1.0 - memberships[n]);
    return out;
}

namespace detail {

// log(1 - w (1 - exp(log_mu))) without leaving the log domain for small mu.
inline double log_weighted_factor(double log_mu, double w) {
    if (w <= 0) return 0.0;
    if (w >= 1) return log_mu;
    const double a = std::log1p(-w);
    const double b = std::log(w) + log_mu;
    const double hi = std::max(a, b);
    return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

} // namespace detail

// Output of the two-rule system:
//   y = T*(mu_A1(d); w) / (T*(mu_A1(d); w) + T*(mu_A2(d); w))
// with A1 centred at 0 and A2 at dmax. Evaluated as a logistic function of
// the summed per-cell log ratio so products of many small memberships do
// not underflow.
inline double similarity(std::span<const double> dtst, std::span<const double> dmax,
                         std::span<const double> weights, double mu_min) {
    if (dtst.size() != dmax.size() || dtst.size() != weights.size()) {
        throw LengthMismatch("similarity inputs differ in length");
    }
    double log_ratio = 0; // log N2 - log N1
    for (std::size_t c = 0; c < dtst.size(); ++c) {
        const double l1 = detail::log_weighted_factor(log_gaussian_membership(dtst[c], 0.0, dmax[c], mu_min), weights[c]);
        const double l2 =
            detail::log_weighted_factor(log_gaussian_membership(dtst[c], dmax[c], dmax[c], mu_min), weights[c]);
        log_ratio += l2 - l1;
    }
    if (std::isnan(log_ratio)) return 0.0;
    if (log_ratio > 700) return 0.0;
    return 1.0 / (1.0 + std::exp(log_ratio));
}

inline double similarity(const CellGrid<double>& dtst, const UserProfile& profile) {
    return similarity(dtst.values(), profile.dmax.values(), profile.weights.values(), profile.mu_min);
}

// Mean absolute difference between each test fragment and its template.
inline CellGrid<double> partition_distances(const NormalizedSignature& test, const UserProfile& profile) {
    if (test.size() != profile.length) {
        throw LengthMismatch("test length " + std::to_string(test.size()) + " differs from profile length " +
                             std::to_string(profile.length));
    }
    const FragmentSet fragments = extract_fragments(test, profile.partition_maps);
    CellGrid<double> d(profile.sections, 0.0);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& f = fragments.at(i);
        const auto& tc = profile.templates.at(i);
        if (tc.empty()) continue;
        double sum = 0;
        for (std::size_t k = 0; k < tc.size(); ++k) sum += std::abs(f[k] - tc[k]);
        d.at(i) = sum / static_cast<double>(tc.size());
    }
    return d;
}

inline VerificationResult verify_normalized(const NormalizedSignature& test, const UserProfile& profile) {
    VerificationResult r;
    r.dtst = partition_distances(test, profile);
    r.similarity = similarity(r.dtst, profile);
    r.threshold_used = profile.cth;
    r.genuine = r.similarity > profile.cth;
    return r;
}

// Test phase. In shape_only mode the pressure channel takes no part in the
// alignment; partitions always come from the stored training-phase maps.
inline VerificationResult verify(const RawSignature& test, const UserProfile& profile,
                                 VerifyMode mode = VerifyMode::full) {
    const auto channels =
        mode == VerifyMode::full ? AlignChannels::velocity_and_pressure : AlignChannels::velocity_only;
    return verify_normalized(normalize_against(test, profile.base, channels), profile);
}

} // namespace hsig
