#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "hsig/error.hpp"
#include "hsig/types.hpp"

namespace hsig {

// Equal-width time split: sample k (1-based) belongs to section p when
// (p-1)K/P < k <= pK/P.
inline std::vector<int> vertical_sections(std::size_t length, int sections) {
    if (sections < 1) throw NotDivisible("section count must be >= 1");
    const auto P = static_cast<std::size_t>(sections);
    if (length == 0 || length % P != 0) {
        throw NotDivisible("length " + std::to_string(length) + " is not divisible by " +
                           std::to_string(sections));
    }
    const std::size_t width = length / P;
    std::vector<int> pv(length);
    for (std::size_t k = 0; k < length; ++k) pv[k] = static_cast<int>(k / width) + 1;
    return pv;
}

inline double section_average(std::span<const double> signal, std::span<const int> pv, int section) {
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (pv[k] == section) {
            sum += signal[k];
            ++count;
        }
    }
    if (count == 0) throw EmptyPartition("vertical section " + std::to_string(section) + " is empty");
    return sum / static_cast<double>(count);
}

// High/low band of each sample relative to its section's average; samples
// equal to the average go to the high band.
inline std::vector<int> horizontal_sections(std::span<const double> signal, std::span<const int> pv) {
    int sections = 0;
    for (int p : pv) sections = std::max(sections, p);
    std::vector<double> avg(static_cast<std::size_t>(sections) + 1, 0.0);
    for (int p = 1; p <= sections; ++p) avg[static_cast<std::size_t>(p)] = section_average(signal, pv, p);
    std::vector<int> ph(signal.size());
    for (std::size_t k = 0; k < signal.size(); ++k) {
        ph[k] = signal[k] < avg[static_cast<std::size_t>(pv[k])] ? 1 : 2;
    }
    return ph;
}

inline PartitionMap build_partition_map(std::span<const double> base_signal, int sections) {
    PartitionMap m;
    m.sections = sections;
    m.vertical = vertical_sections(base_signal.size(), sections);
    m.horizontal = horizontal_sections(base_signal, m.vertical);
    for (int p = 1; p <= sections; ++p) {
        m.section_averages.push_back(section_average(base_signal, m.vertical, p));
        m.section_counts.push_back(base_signal.size() / static_cast<std::size_t>(sections));
    }
    return m;
}

// Maps for both dynamics signals of the base signature.
inline PartitionMaps build_partition_maps(const NormalizedSignature& base, int sections) {
    return {build_partition_map(base.v, sections), build_partition_map(base.z, sections)};
}

// Indices of the samples of cell (p, r) of one partition map, in time order.
inline std::vector<std::size_t> cell_indices(const PartitionMap& map, int section, Band band) {
    std::vector<std::size_t> idx;
    for (std::size_t k = 0; k < map.vertical.size(); ++k) {
        if (map.vertical[k] == section && map.horizontal[k] == static_cast<int>(band)) idx.push_back(k);
    }
    return idx;
}

// Splits the shape trajectories of `sig` into the cells defined by `maps`.
inline FragmentSet extract_fragments(const NormalizedSignature& sig, const PartitionMaps& maps) {
    const int P = maps[0].sections;
    if (maps[1].sections != P) throw MixedConfigurations("partition maps disagree on section count");
    for (const auto& m : maps) {
        if (m.vertical.size() != sig.size() || m.horizontal.size() != sig.size()) {
            throw LengthMismatch("signature length " + std::to_string(sig.size()) +
                                 " differs from partition length " + std::to_string(m.vertical.size()));
        }
    }
    FragmentSet out(P);
    for (std::size_t i = 0; i < out.size(); ++i) {
        const CellKey key = out.key(i);
        const auto& m = map_for(maps, key.signal);
        const auto& trajectory = key.axis == Axis::x ? sig.x : sig.y;
        auto& fragment = out.at(i);
        for (std::size_t k = 0; k < sig.size(); ++k) {
            if (m.vertical[k] == key.section && m.horizontal[k] == static_cast<int>(key.band)) {
                fragment.push_back(trajectory[k]);
            }
        }
    }
    return out;
}

} // namespace hsig
