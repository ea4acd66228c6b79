#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include "hsig/error.hpp"
#include "hsig/types.hpp"

namespace hsig {

// Container layout (all integers little-endian):
//   "HSIGPROF" | u32 version | u64 payload size | payload | u32 crc32(payload)
inline constexpr std::string_view kProfileMagic = "HSIGPROF";
inline constexpr std::uint32_t kProfileVersion = 1;

using Bytes = std::vector<std::uint8_t>;

// Throws InvariantViolation describing the first broken invariant.
inline void validate_profile(const UserProfile& p) {
    auto fail = [](const std::string& what) { throw InvariantViolation(what); };
    if (p.sections < 1) fail("sections must be >= 1");
    const auto P = static_cast<std::size_t>(p.sections);
    if (p.length == 0 || p.length % P != 0) fail("length must be a positive multiple of sections");
    if (!p.base.consistent() || p.base.size() != p.length) fail("base signature length mismatch");
    if (!(p.delta >= 1.0)) fail("delta must be >= 1");
    if (!(p.cth >= 0.0 && p.cth <= 1.0)) fail("cth must lie in [0,1]");
    if (!(p.mu_min > 0.0 && p.mu_min < 1.0)) fail("mu_min must lie in (0,1)");

    for (const auto& m : p.partition_maps) {
        if (m.sections != p.sections || m.vertical.size() != p.length ||
            m.horizontal.size() != p.length || m.section_averages.size() != P ||
            m.section_counts.size() != P) {
            fail("partition map shape mismatch");
        }
        for (std::size_t k = 0; k < p.length; ++k) {
            if (m.vertical[k] < 1 || m.vertical[k] > p.sections) fail("vertical section out of range");
            if (m.horizontal[k] != 1 && m.horizontal[k] != 2) fail("horizontal band out of range");
        }
    }

    const std::size_t cells = cell_count(p.sections);
    for (const auto* g : {&p.weights, &p.dmax, &p.sigma_bar}) {
        if (g->sections() != p.sections || g->size() != cells) fail("cell grid size mismatch");
    }
    if (p.templates.sections() != p.sections || p.templates.size() != cells) {
        fail("template grid size mismatch");
    }

    for (std::size_t i = 0; i < cells; ++i) {
        const CellKey key = p.weights.key(i);
        const auto& m = map_for(p.partition_maps, key.signal);
        std::size_t kc = 0;
        for (std::size_t k = 0; k < p.length; ++k) {
            kc += m.vertical[k] == key.section && m.horizontal[k] == static_cast<int>(key.band);
        }
        if (p.templates.at(i).size() != kc) fail("template length differs from partition size");
        const double w = p.weights.at(i);
        if (!(w >= 0.0 && w <= 1.0)) fail("weight outside [0,1]: " + std::to_string(w));
        if (!(p.dmax.at(i) >= 0.0) || !std::isfinite(p.dmax.at(i))) fail("dmax must be finite and >= 0");
        if (!(p.sigma_bar.at(i) >= 0.0) || !std::isfinite(p.sigma_bar.at(i))) {
            fail("sigma_bar must be finite and >= 0");
        }
    }

    // Weight normalization runs per (s, a) group: its least stable cell has
    // weight 0 unless the whole group is perfectly stable.
    const std::size_t group = P * kBands.size();
    for (std::size_t g0 = 0; g0 < cells; g0 += group) {
        bool any_zero = false;
        bool any_spread = false;
        for (std::size_t i = g0; i < g0 + group; ++i) {
            any_zero |= p.weights.at(i) == 0.0;
            any_spread |= p.sigma_bar.at(i) > 0.0;
        }
        if (any_spread && !any_zero) fail("no zero weight in a group with nonzero spread");
    }
}

namespace detail {

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(std::string_view s) {
        u64(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void reals(const std::vector<double>& v) {
        u64(v.size());
        for (double d : v) f64(d);
    }
    void ints(const std::vector<int>& v) {
        u64(v.size());
        for (int d : v) i32(d);
    }
    void sizes(const std::vector<std::size_t>& v) {
        u64(v.size());
        for (auto d : v) u64(d);
    }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() { return *need(1); }
    std::uint32_t u32() {
        const auto* p = need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        const auto* p = need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
        return v;
    }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = count(1);
        const auto* p = need(n);
        return std::string(reinterpret_cast<const char*>(p), n);
    }
    std::vector<double> reals() {
        std::vector<double> v(count(8));
        for (auto& d : v) d = f64();
        return v;
    }
    std::vector<int> ints() {
        std::vector<int> v(count(4));
        for (auto& d : v) d = i32();
        return v;
    }
    std::vector<std::size_t> sizes() {
        std::vector<std::size_t> v(count(8));
        for (auto& d : v) d = static_cast<std::size_t>(u64());
        return v;
    }
    bool done() const noexcept { return pos_ == size_; }

private:
    // Element count of a length-prefixed field, bounded by the remaining bytes.
    std::size_t count(std::size_t element_size) {
        const auto n = u64();
        if (n > (size_ - pos_) / element_size) throw SchemaMismatch("field length exceeds payload");
        return static_cast<std::size_t>(n);
    }
    const std::uint8_t* need(std::size_t n) {
        if (n > size_ - pos_) throw SchemaMismatch("payload ends inside a field");
        const auto* p = data_ + pos_;
        pos_ += n;
        return p;
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

inline std::uint32_t payload_checksum(const std::uint8_t* data, std::size_t size) {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed large payloads in chunks.
    while (size > 0) {
        const auto chunk = static_cast<uInt>(std::min<std::size_t>(size, 1u << 30));
        crc = crc32(crc, data, chunk);
        data += chunk;
        size -= chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

inline void write_grid(ByteWriter& w, const CellGrid<double>& g) {
    w.i32(g.sections());
    w.reals(g.values());
}

inline CellGrid<double> read_grid(ByteReader& r) {
    const int sections = r.i32();
    if (sections < 1 || sections > 1 << 16) throw SchemaMismatch("bad section count");
    CellGrid<double> g(sections);
    auto values = r.reals();
    if (values.size() != g.size()) throw SchemaMismatch("cell grid size mismatch");
    g.values() = std::move(values);
    return g;
}

} // namespace detail

inline Bytes save_profile(const UserProfile& profile) {
    validate_profile(profile);
    detail::ByteWriter w;
    w.str(profile.user_id);
    w.u64(profile.length);
    w.i32(profile.sections);
    w.f64(profile.delta);
    w.f64(profile.cth);
    w.f64(profile.mu_min);
    w.u8(profile.degenerate_references ? 1 : 0);
    for (const auto* v : {&profile.base.x, &profile.base.y, &profile.base.v, &profile.base.z}) {
        w.reals(*v);
    }
    for (const auto& m : profile.partition_maps) {
        w.i32(m.sections);
        w.ints(m.vertical);
        w.ints(m.horizontal);
        w.reals(m.section_averages);
        w.sizes(m.section_counts);
    }
    w.i32(profile.templates.sections());
    w.u64(profile.templates.size());
    for (const auto& t : profile.templates) w.reals(t);
    detail::write_grid(w, profile.weights);
    detail::write_grid(w, profile.dmax);
    detail::write_grid(w, profile.sigma_bar);
    const Bytes payload = w.take();

    detail::ByteWriter out;
    for (char c : kProfileMagic) out.u8(static_cast<std::uint8_t>(c));
    out.u32(kProfileVersion);
    out.u64(payload.size());
    Bytes bytes = out.take();
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    detail::ByteWriter tail;
    tail.u32(detail::payload_checksum(payload.data(), payload.size()));
    const Bytes crc = tail.take();
    bytes.insert(bytes.end(), crc.begin(), crc.end());
    return bytes;
}

inline UserProfile load_profile(const std::uint8_t* data, std::size_t size) {
    constexpr std::size_t header = kProfileMagic.size() + 4 + 8;
    if (size < header + 4) throw CorruptProfile("container shorter than its header");
    if (std::memcmp(data, kProfileMagic.data(), kProfileMagic.size()) != 0) {
        throw CorruptProfile("bad magic");
    }
    detail::ByteReader head(data + kProfileMagic.size(), header - kProfileMagic.size());
    const auto version = head.u32();
    const auto payload_size = head.u64();
    if (payload_size != size - header - 4) throw CorruptProfile("payload size does not match container");
    const std::uint8_t* payload = data + header;
    detail::ByteReader crc_reader(payload + payload_size, 4);
    if (crc_reader.u32() != detail::payload_checksum(payload, static_cast<std::size_t>(payload_size))) {
        throw CorruptProfile("checksum mismatch");
    }
    if (version != kProfileVersion) {
        throw SchemaMismatch("unsupported profile version " + std::to_string(version));
    }

    detail::ByteReader r(payload, static_cast<std::size_t>(payload_size));
    UserProfile p;
    p.user_id = r.str();
    p.length = static_cast<std::size_t>(r.u64());
    p.sections = r.i32();
    p.delta = r.f64();
    p.cth = r.f64();
    p.mu_min = r.f64();
    p.degenerate_references = r.u8() != 0;
    for (auto* v : {&p.base.x, &p.base.y, &p.base.v, &p.base.z}) *v = r.reals();
    for (auto& m : p.partition_maps) {
        m.sections = r.i32();
        m.vertical = r.ints();
        m.horizontal = r.ints();
        m.section_averages = r.reals();
        m.section_counts = r.sizes();
    }
    const int template_sections = r.i32();
    if (template_sections < 1 || template_sections > 1 << 16) throw SchemaMismatch("bad section count");
    p.templates = CellGrid<std::vector<double>>(template_sections);
    if (r.u64() != p.templates.size()) throw SchemaMismatch("template count mismatch");
    for (auto& t : p.templates) t = r.reals();
    p.weights = detail::read_grid(r);
    p.dmax = detail::read_grid(r);
    p.sigma_bar = detail::read_grid(r);
    if (!r.done()) throw SchemaMismatch("trailing bytes in payload");
    try {
        validate_profile(p);
    } catch (const InvariantViolation& e) {
        throw SchemaMismatch(e.what());
    }
    return p;
}

inline UserProfile load_profile(const Bytes& bytes) { return load_profile(bytes.data(), bytes.size()); }

} // namespace hsig
