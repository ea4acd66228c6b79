#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "hsig/error.hpp"
#include "hsig/partitioning.hpp"
#include "hsig/preprocess.hpp"
#include "hsig/profile_io.hpp"
#include "hsig/types.hpp"

namespace hsig {

struct EnrollmentParams {
    int sections = 2;     // P
    double delta = 4.0;   // tolerance multiplier, >= 1
    double mu_min = 0.01; // membership of the "similar" set at distance dmax
    double cth = 0.5;     // acceptance threshold on the similarity score

    void validate() const {
        if (sections < 1) throw InvariantViolation("P must be >= 1");
        if (!(delta >= 1.0)) throw InvariantViolation("delta must be >= 1");
        if (!(mu_min > 0.0 && mu_min < 1.0)) throw InvariantViolation("mu_min must lie in (0,1)");
        if (!(cth >= 0.0 && cth <= 1.0)) throw InvariantViolation("cth must lie in [0,1]");
    }
};

// Sample-wise mean of the J reference fragments of one cell.
inline std::vector<double> cell_template(std::span<const std::vector<double>> fragments) {
    if (fragments.empty()) return {};
    const std::size_t kc = fragments.front().size();
    // Accumulated as offsets from the first fragment so that identical
    // references reproduce it exactly.
    const auto& first = fragments.front();
    std::vector<double> acc(kc, 0.0);
    for (const auto& f : fragments) {
        if (f.size() != kc) throw LengthMismatch("reference fragments of one cell differ in length");
        for (std::size_t k = 0; k < kc; ++k) acc[k] += f[k] - first[k];
    }
    std::vector<double> tc(kc);
    for (std::size_t k = 0; k < kc; ++k) tc[k] = first[k] + acc[k] / static_cast<double>(fragments.size());
    return tc;
}

inline CellGrid<std::vector<double>> build_templates(std::span<const FragmentSet> references) {
    if (references.empty()) throw InsufficientSignatures("no reference fragments");
    CellGrid<std::vector<double>> out(references.front().sections());
    std::vector<std::vector<double>> column(references.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t j = 0; j < references.size(); ++j) column[j] = references[j].at(i);
        out.at(i) = cell_template(column);
    }
    return out;
}

// delta-scaled mean absolute deviation of the references from the template.
inline double compute_dmax(std::span<const std::vector<double>> fragments, std::span<const double> tc,
                           double delta) {
    if (tc.empty()) throw EmptyPartition("dmax of an empty cell is undefined");
    double sum = 0;
    for (const auto& f : fragments) {
        for (std::size_t k = 0; k < tc.size(); ++k) sum += std::abs(f[k] - tc[k]);
    }
    return delta / (static_cast<double>(fragments.size()) * static_cast<double>(tc.size())) * sum;
}

// Mean over the cell's samples of the across-reference standard deviation.
inline double compute_sigma_bar(std::span<const std::vector<double>> fragments, std::span<const double> tc) {
    if (tc.empty()) throw EmptyPartition("sigma_bar of an empty cell is undefined");
    const double J = static_cast<double>(fragments.size());
    double total = 0;
    for (std::size_t k = 0; k < tc.size(); ++k) {
        double ss = 0;
        for (const auto& f : fragments) ss += (f[k] - tc[k]) * (f[k] - tc[k]);
        total += std::sqrt(ss / J);
    }
    return total / static_cast<double>(tc.size());
}

// w = 1 - sigma_bar / max(sigma_bar), the max taken over the nonempty cells
// of the same (s, a) pair. Empty cells get weight 0; a group whose cells are
// all perfectly stable gets weight 1 throughout.
inline CellGrid<double> compute_weights(const CellGrid<double>& sigma_bar, const CellMask& nonempty) {
    CellGrid<double> w(sigma_bar.sections(), 0.0);
    const std::size_t group = static_cast<std::size_t>(sigma_bar.sections()) * kBands.size();
    for (std::size_t g0 = 0; g0 < w.size(); g0 += group) {
        double peak = 0;
        for (std::size_t i = g0; i < g0 + group; ++i) {
            if (nonempty.at(i)) peak = std::max(peak, sigma_bar.at(i));
        }
        for (std::size_t i = g0; i < g0 + group; ++i) {
            if (!nonempty.at(i)) continue;
            w.at(i) = peak > 0 ? std::clamp(1.0 - sigma_bar.at(i) / peak, 0.0, 1.0) : 1.0;
        }
    }
    return w;
}

// Same rule over a flat list of one group's spreads (every cell nonempty).
inline std::vector<double> compute_weights(std::span<const double> sigma_bars) {
    double peak = 0;
    for (double s : sigma_bars) peak = std::max(peak, s);
    std::vector<double> w;
    w.reserve(sigma_bars.size());
    for (double s : sigma_bars) w.push_back(peak > 0 ? std::clamp(1.0 - s / peak, 0.0, 1.0) : 1.0);
    return w;
}

// Training-phase statistics over references that already share the base
// timeline: partition maps of the base, templates, tolerances, stability and
// weights.
inline UserProfile enroll_normalized(std::span<const NormalizedSignature> normalized, std::size_t base_index,
                                     const EnrollmentParams& params, std::string user_id = {}) {
    params.validate();
    if (normalized.size() < 2) throw InsufficientSignatures("enrollment needs at least 2 references");
    if (base_index >= normalized.size()) throw InvariantViolation("base index out of range");
    const auto& base = normalized[base_index];
    for (const auto& sig : normalized) {
        if (!sig.consistent() || sig.size() != base.size()) {
            throw LengthMismatch("normalized references differ in length");
        }
    }

    UserProfile p;
    p.user_id = std::move(user_id);
    p.base = base;
    p.length = base.size();
    p.sections = params.sections;
    p.delta = params.delta;
    p.cth = params.cth;
    p.mu_min = params.mu_min;
    p.partition_maps = build_partition_maps(base, params.sections);

    std::vector<FragmentSet> fragments;
    fragments.reserve(normalized.size());
    for (const auto& sig : normalized) fragments.push_back(extract_fragments(sig, p.partition_maps));

    p.templates = build_templates(fragments);
    p.dmax = CellGrid<double>(params.sections, 0.0);
    p.sigma_bar = CellGrid<double>(params.sections, 0.0);
    CellMask nonempty(params.sections, 0);
    std::vector<std::vector<double>> column(fragments.size());
    for (std::size_t i = 0; i < p.templates.size(); ++i) {
        const auto& tc = p.templates.at(i);
        if (tc.empty()) continue;
        for (std::size_t j = 0; j < fragments.size(); ++j) column[j] = fragments[j].at(i);
        nonempty.at(i) = 1;
        p.dmax.at(i) = compute_dmax(column, tc, params.delta);
        p.sigma_bar.at(i) = compute_sigma_bar(column, tc);
    }
    p.weights = compute_weights(p.sigma_bar, nonempty);
    validate_profile(p);
    return p;
}

// Training phase from raw references.
inline UserProfile enroll(std::span<const RawSignature> references, const EnrollmentParams& params,
                          std::string user_id = {}) {
    params.validate();
    if (references.size() < 2) throw InsufficientSignatures("enrollment needs at least 2 references");
    const auto normalized = normalize_set(references, PreprocessConfig{params.sections});
    auto p = enroll_normalized(normalized.signatures, normalized.base_index, params, std::move(user_id));
    p.degenerate_references = normalized.degenerate;
    return p;
}

} // namespace hsig
