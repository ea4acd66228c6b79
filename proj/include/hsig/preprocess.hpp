#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "hsig/dtw.hpp"
#include "hsig/error.hpp"
#include "hsig/types.hpp"

namespace hsig {

// Dynamics channels used for alignment and partitioning.
struct Dynamics {
    std::vector<double> v; // pen velocity
    std::vector<double> z; // pen pressure

    std::size_t size() const noexcept { return v.size(); }
};

enum class AlignChannels {
    velocity_and_pressure, // full tablet data
    velocity_only,         // pressure unavailable at verification time
};

struct PreprocessConfig {
    int sections = 2; // P, vertical sections per dynamics signal
    AlignChannels channels = AlignChannels::velocity_and_pressure;
};

// Pen speed between consecutive samples; the first sample copies the second.
inline std::vector<double> derive_velocity(const RawSignature& sig) {
    const auto& s = sig.samples();
    std::vector<double> v(s.size(), 0.0);
    for (std::size_t k = 1; k < s.size(); ++k) {
        const double dx = s[k].x - s[k - 1].x;
        const double dy = s[k].y - s[k - 1].y;
        v[k] = std::hypot(dx, dy) / (s[k].t - s[k - 1].t);
    }
    if (v.size() >= 2) v[0] = v[1];
    return v;
}

inline Dynamics dynamics_of(const RawSignature& sig) {
    Dynamics d;
    d.v = derive_velocity(sig);
    d.z.reserve(sig.size());
    for (const auto& s : sig.samples()) d.z.push_back(s.p);
    return d;
}

// Standard score with population deviation. A constant channel maps to zeros.
inline std::vector<double> zscore(std::span<const double> values) {
    std::vector<double> out(values.size(), 0.0);
    if (values.empty()) return out;
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    double ss = 0;
    for (double x : values) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / n);
    const double scale = std::max(1.0, std::abs(mean));
    if (!(sd > 1e-12 * scale)) return out;
    for (std::size_t k = 0; k < values.size(); ++k) out[k] = (values[k] - mean) / sd;
    return out;
}

// Minimum-cost monotone alignment of `sig` onto `base` over standardized
// dynamics: c = |v_b - v_s| + |z_b - z_s| (pressure term dropped for
// velocity_only).
inline AlignmentMap dtw_align(const Dynamics& sig, const Dynamics& base,
                              AlignChannels channels = AlignChannels::velocity_and_pressure) {
    const auto vb = zscore(base.v);
    const auto vs = zscore(sig.v);
    if (channels == AlignChannels::velocity_only) {
        return dtw(base.size(), sig.size(),
                   [&](std::size_t b, std::size_t s) { return std::abs(vb[b] - vs[s]); });
    }
    const auto zb = zscore(base.z);
    const auto zs = zscore(sig.z);
    return dtw(base.size(), sig.size(), [&](std::size_t b, std::size_t s) {
        return std::abs(vb[b] - vs[s]) + std::abs(zb[b] - zs[s]);
    });
}

struct BaseSelection {
    std::size_t index = 0;       // 0-based jBase
    bool degenerate = false;     // every pairwise distance was zero
    std::vector<double> totals;  // summed distance of each signature to the others
};

// The reference with the smallest summed DTW distance to all others.
// Ties resolve to the lowest index.
inline BaseSelection select_base(std::span<const Dynamics> signatures) {
    const std::size_t J = signatures.size();
    if (J < 2) throw InsufficientSignatures("base selection needs at least 2 signatures");
    BaseSelection sel;
    sel.totals.assign(J, 0.0);
    bool all_zero = true;
    for (std::size_t a = 0; a < J; ++a) {
        for (std::size_t b = a + 1; b < J; ++b) {
            const double d = dtw_align(signatures[b], signatures[a]).cost;
            sel.totals[a] += d;
            sel.totals[b] += d;
            all_zero &= d == 0.0;
        }
    }
    sel.index = static_cast<std::size_t>(
        std::min_element(sel.totals.begin(), sel.totals.end()) - sel.totals.begin());
    if (all_zero) {
        sel.index = 0;
        sel.degenerate = true;
    }
    return sel;
}

// Smallest multiple of 2P that is >= the base length.
inline std::size_t target_length(std::size_t base_length, int sections) {
    const auto step = static_cast<std::size_t>(2 * sections);
    return (base_length + step - 1) / step * step;
}

// Piecewise-linear resampling onto `length` evenly spaced points spanning the
// same index range.
inline std::vector<double> resample_linear(std::span<const double> values, std::size_t length) {
    const std::size_t n = values.size();
    if (n == length) return {values.begin(), values.end()};
    std::vector<double> out(length, n ? values[0] : 0.0);
    if (n < 2 || length < 2) return out;
    const double step = static_cast<double>(n - 1) / static_cast<double>(length - 1);
    for (std::size_t i = 0; i < length; ++i) {
        const double pos = static_cast<double>(i) * step;
        const auto lo = std::min(static_cast<std::size_t>(pos), n - 2);
        const double frac = pos - static_cast<double>(lo);
        out[i] = values[lo] + frac * (values[lo + 1] - values[lo]);
    }
    out.back() = values.back();
    return out;
}

// Projects the signature onto the base timeline: every base index receives
// the mean of the signature samples aligned with it. The result, of length
// `base_length`, is then resampled to `target`.
inline NormalizedSignature warp_to_base(const RawSignature& sig, std::span<const double> velocity,
                                        const AlignmentMap& map, std::size_t base_length,
                                        std::size_t target) {
    NormalizedSignature out;
    std::vector<double> x(base_length, 0.0), y(base_length, 0.0), v(base_length, 0.0),
        z(base_length, 0.0), n(base_length, 0.0);
    const auto& s = sig.samples();
    for (const auto& [kb, ks] : map.pairs) {
        x[kb] += s[ks].x;
        y[kb] += s[ks].y;
        v[kb] += velocity[ks];
        z[kb] += s[ks].p;
        n[kb] += 1.0;
    }
    for (std::size_t k = 0; k < base_length; ++k) {
        x[k] /= n[k];
        y[k] /= n[k];
        v[k] /= n[k];
        z[k] /= n[k];
    }
    out.x = resample_linear(x, target);
    out.y = resample_linear(y, target);
    out.v = resample_linear(v, target);
    out.z = resample_linear(z, target);
    return out;
}

// Removes offset, rotation and scale of the shape trajectories:
//  1. centroid moved to the origin,
//  2. first principal axis rotated onto +x; the sample farthest along that
//     axis is placed on the positive side,
//  3. uniform scaling to unit RMS radius (velocity divided by the same factor),
//  4. pressure min/max-scaled to [0, 1] (constant pressure -> 0.5).
inline NormalizedSignature normalize_geometry(const NormalizedSignature& sig) {
    const std::size_t K = sig.size();
    if (K == 0 || !sig.consistent()) throw DegenerateGeometry("empty or inconsistent signature");
    const double n = static_cast<double>(K);
    const double cx = std::accumulate(sig.x.begin(), sig.x.end(), 0.0) / n;
    const double cy = std::accumulate(sig.y.begin(), sig.y.end(), 0.0) / n;

    double sxx = 0, syy = 0, sxy = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double dx = sig.x[k] - cx;
        const double dy = sig.y[k] - cy;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    const double spread = std::sqrt((sxx + syy) / n);
    const double extent = std::max({1.0, std::abs(cx), std::abs(cy)});
    if (!(spread > 1e-12 * extent)) throw DegenerateGeometry("all points coincide");

    const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    const double c = std::cos(theta);
    const double s = std::sin(theta);

    NormalizedSignature out;
    out.x.resize(K);
    out.y.resize(K);
    std::size_t far = 0;
    for (std::size_t k = 0; k < K; ++k) {
        const double dx = sig.x[k] - cx;
        const double dy = sig.y[k] - cy;
        out.x[k] = c * dx + s * dy;
        out.y[k] = -s * dx + c * dy;
        if (std::abs(out.x[k]) > std::abs(out.x[far])) far = k;
    }
    const double flip = out.x[far] < 0 ? -1.0 : 1.0;

    double r2 = 0;
    for (std::size_t k = 0; k < K; ++k) r2 += out.x[k] * out.x[k] + out.y[k] * out.y[k];
    const double scale = flip / std::sqrt(r2 / n);
    for (std::size_t k = 0; k < K; ++k) {
        out.x[k] *= scale;
        out.y[k] *= scale;
    }

    out.v.resize(K);
    const double vscale = std::abs(scale);
    for (std::size_t k = 0; k < K; ++k) out.v[k] = sig.v[k] * vscale;

    out.z.resize(K);
    const auto [zmin_it, zmax_it] = std::minmax_element(sig.z.begin(), sig.z.end());
    const double zmin = *zmin_it;
    const double zrange = *zmax_it - zmin;
    const bool flat = !(zrange > 1e-12 * std::max(1.0, std::abs(*zmax_it)));
    for (std::size_t k = 0; k < K; ++k) out.z[k] = flat ? 0.5 : (sig.z[k] - zmin) / zrange;
    return out;
}

struct NormalizedSet {
    std::size_t base_index = 0;
    bool degenerate = false;
    std::vector<NormalizedSignature> signatures;
};

// Full training-phase normalization of a user's reference signatures.
inline NormalizedSet normalize_set(std::span<const RawSignature> references,
                                   const PreprocessConfig& cfg = {}) {
    if (cfg.sections < 1) throw InvariantViolation("sections must be >= 1");
    if (references.size() < 2) throw InsufficientSignatures("at least 2 reference signatures required");
    std::vector<Dynamics> dyn;
    dyn.reserve(references.size());
    for (const auto& r : references) dyn.push_back(dynamics_of(r));

    const auto sel = select_base(dyn);
    NormalizedSet out;
    out.base_index = sel.index;
    out.degenerate = sel.degenerate;
    const std::size_t base_length = references[sel.index].size();
    const std::size_t target = target_length(base_length, cfg.sections);
    out.signatures.reserve(references.size());
    for (std::size_t j = 0; j < references.size(); ++j) {
        const auto map = dtw_align(dyn[j], dyn[sel.index], cfg.channels);
        out.signatures.push_back(normalize_geometry(
            warp_to_base(references[j], dyn[j].v, map, base_length, target)));
    }
    return out;
}

// Test-phase normalization against a stored (already normalized) base.
inline NormalizedSignature normalize_against(const RawSignature& test, const NormalizedSignature& base,
                                             AlignChannels channels) {
    const Dynamics dyn = dynamics_of(test);
    const Dynamics base_dyn{base.v, base.z};
    const auto map = dtw_align(dyn, base_dyn, channels);
    return normalize_geometry(warp_to_base(test, dyn.v, map, base.size(), base.size()));
}

} // namespace hsig
