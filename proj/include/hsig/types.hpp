#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hsig/error.hpp"

namespace hsig {

// One pen sample as delivered by the tablet: time in milliseconds, position
// in tablet units, pressure in device units (0 means pen-up).
struct Sample {
    double t = 0;
    double x = 0;
    double y = 0;
    double p = 0;

    friend bool operator==(const Sample&, const Sample&) = default;
};

struct SignatureMeta {
    std::optional<std::string> signer;
    std::optional<std::string> device;

    friend bool operator==(const SignatureMeta&, const SignatureMeta&) = default;
};

// Time-stamped pen trajectory. Validated on construction and immutable after.
class RawSignature {
public:
    RawSignature() = default;

    explicit RawSignature(std::vector<Sample> samples, SignatureMeta meta = {})
        : samples_(std::move(samples)), meta_(std::move(meta)) {
        if (samples_.size() < 2) {
            throw TooFewSamples("a signature needs at least 2 samples, got " +
                                std::to_string(samples_.size()));
        }
        for (std::size_t k = 0; k < samples_.size(); ++k) {
            const Sample& s = samples_[k];
            if (!std::isfinite(s.t) || !std::isfinite(s.x) || !std::isfinite(s.y) ||
                !std::isfinite(s.p)) {
                throw MalformedInput("non-finite value in sample " + std::to_string(k));
            }
            if (s.p < 0) {
                throw MalformedInput("negative pressure in sample " + std::to_string(k));
            }
            if (k > 0 && !(s.t > samples_[k - 1].t)) {
                throw NonMonotonicTime("timestamp of sample " + std::to_string(k) +
                                       " does not exceed its predecessor");
            }
        }
    }

    const std::vector<Sample>& samples() const noexcept { return samples_; }
    const SignatureMeta& meta() const noexcept { return meta_; }
    std::size_t size() const noexcept { return samples_.size(); }

    friend bool operator==(const RawSignature&, const RawSignature&) = default;

private:
    std::vector<Sample> samples_;
    SignatureMeta meta_;
};

// Fixed-length signature aligned to a user's base signature: shape
// trajectories x, y and dynamics v (velocity), z (pressure).
struct NormalizedSignature {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> v;
    std::vector<double> z;

    std::size_t size() const noexcept { return x.size(); }

    bool consistent() const noexcept {
        return y.size() == x.size() && v.size() == x.size() && z.size() == x.size();
    }

    friend bool operator==(const NormalizedSignature&, const NormalizedSignature&) = default;
};

// Dynamics signal a partition is derived from.
enum class Signal : std::uint8_t { velocity = 0, pressure = 1 };
// Shape trajectory a fragment is taken from.
enum class Axis : std::uint8_t { x = 0, y = 1 };
// Horizontal section: below (low) or at/above (high) the section average.
enum class Band : std::uint8_t { low = 1, high = 2 };

inline constexpr std::array<Signal, 2> kSignals{Signal::velocity, Signal::pressure};
inline constexpr std::array<Axis, 2> kAxes{Axis::x, Axis::y};
inline constexpr std::array<Band, 2> kBands{Band::low, Band::high};

inline constexpr char signal_name(Signal s) noexcept { return s == Signal::velocity ? 'v' : 'z'; }
inline constexpr char axis_name(Axis a) noexcept { return a == Axis::x ? 'x' : 'y'; }

// (s, a, p, r) coordinates of a hybrid partition cell. `section` is 1-based.
struct CellKey {
    Signal signal = Signal::velocity;
    Axis axis = Axis::x;
    int section = 1;
    Band band = Band::low;

    friend bool operator==(const CellKey&, const CellKey&) = default;
};

// Number of (s, a, p, r) cells for P vertical sections.
inline constexpr std::size_t cell_count(int sections) noexcept {
    return kSignals.size() * kAxes.size() * static_cast<std::size_t>(sections) * kBands.size();
}

// Dense storage of one value per (s, a, p, r) cell, in canonical order
// s-major, then a, then p, then r.
template <class T>
class CellGrid {
public:
    CellGrid() = default;
    explicit CellGrid(int sections, T init = T{})
        : sections_(sections), cells_(cell_count(sections), init) {}

    int sections() const noexcept { return sections_; }
    std::size_t size() const noexcept { return cells_.size(); }

    std::size_t index(const CellKey& key) const noexcept {
        const auto s = static_cast<std::size_t>(key.signal);
        const auto a = static_cast<std::size_t>(key.axis);
        const auto p = static_cast<std::size_t>(key.section - 1);
        const auto r = static_cast<std::size_t>(key.band) - 1;
        return ((s * kAxes.size() + a) * static_cast<std::size_t>(sections_) + p) * kBands.size() + r;
    }

    CellKey key(std::size_t index) const noexcept {
        CellKey k;
        k.band = kBands[index % kBands.size()];
        index /= kBands.size();
        k.section = static_cast<int>(index % static_cast<std::size_t>(sections_)) + 1;
        index /= static_cast<std::size_t>(sections_);
        k.axis = kAxes[index % kAxes.size()];
        k.signal = kSignals[index / kAxes.size()];
        return k;
    }

    T& operator[](const CellKey& key) { return cells_[index(key)]; }
    const T& operator[](const CellKey& key) const { return cells_[index(key)]; }
    T& at(std::size_t i) { return cells_.at(i); }
    const T& at(std::size_t i) const { return cells_.at(i); }

    auto begin() noexcept { return cells_.begin(); }
    auto end() noexcept { return cells_.end(); }
    auto begin() const noexcept { return cells_.begin(); }
    auto end() const noexcept { return cells_.end(); }

    const std::vector<T>& values() const noexcept { return cells_; }
    std::vector<T>& values() noexcept { return cells_; }

    friend bool operator==(const CellGrid&, const CellGrid&) = default;

private:
    int sections_ = 0;
    std::vector<T> cells_;
};

// Per-cell flag; a byte rather than bool so cells stay addressable.
using CellMask = CellGrid<std::uint8_t>;

// Section assignment of every sample of the base signature for one dynamics
// signal. `vertical` holds values 1..P, `horizontal` holds 1 (low) or 2 (high).
struct PartitionMap {
    int sections = 0;
    std::vector<int> vertical;
    std::vector<int> horizontal;
    std::vector<double> section_averages;   // one per vertical section
    std::vector<std::size_t> section_counts; // one per vertical section

    friend bool operator==(const PartitionMap&, const PartitionMap&) = default;
};

using PartitionMaps = std::array<PartitionMap, 2>; // indexed by Signal

inline const PartitionMap& map_for(const PartitionMaps& maps, Signal s) {
    return maps[static_cast<std::size_t>(s)];
}

using FragmentSet = CellGrid<std::vector<double>>;

// Complete per-user verification state produced by enrollment.
struct UserProfile {
    std::string user_id;
    NormalizedSignature base;
    std::size_t length = 0; // K
    int sections = 0;       // P
    PartitionMaps partition_maps;
    CellGrid<std::vector<double>> templates;
    CellGrid<double> weights;
    CellGrid<double> dmax;
    CellGrid<double> sigma_bar;
    double delta = 1.0;
    double cth = 0.5;
    double mu_min = 0.01;
    bool degenerate_references = false;

    friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

struct VerificationResult {
    CellGrid<double> dtst;
    double similarity = 0;
    bool genuine = false;
    double threshold_used = 0;
};

} // namespace hsig
