#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hsig/error.hpp"
#include "hsig/types.hpp"

namespace hsig {

enum class SignatureFormat { svc, csv, json };

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        auto line = trim(text.substr(start, end - start));
        if (!line.empty()) lines.push_back(line);
        start = end + 1;
    }
    return lines;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    if (sep == ' ') {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            if (j > i) out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    while (true) {
        auto end = line.find(sep, start);
        out.push_back(trim(line.substr(start, end == std::string_view::npos ? end : end - start)));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

inline double parse_number(std::string_view field, std::size_t line_no) {
    double value = 0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    if (!field.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || field.empty()) {
        throw MalformedInput("line " + std::to_string(line_no) + ": '" + std::string(field) +
                             "' is not a number");
    }
    return value;
}

// Shortest representation that parses back to the same double.
inline std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

inline RawSignature parse_svc(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw MalformedInput("empty svc input");
    const double declared = parse_number(lines[0], 1);
    if (declared < 0 || declared != static_cast<double>(static_cast<std::size_t>(declared))) {
        throw MalformedInput("svc header must be a non-negative sample count");
    }
    const auto n = static_cast<std::size_t>(declared);
    if (lines.size() - 1 != n) {
        throw MalformedInput("svc header declares " + std::to_string(n) + " samples, found " +
                             std::to_string(lines.size() - 1));
    }
    std::vector<Sample> samples;
    samples.reserve(n);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_fields(lines[i], ' ');
        // "x y t p", or the 7-column SVC2004 layout "x y t button azimuth altitude p".
        if (f.size() != 4 && f.size() != 7) {
            throw MalformedInput("svc line " + std::to_string(i + 1) + " has " +
                                 std::to_string(f.size()) + " fields, expected 4 or 7");
        }
        Sample s;
        s.x = parse_number(f[0], i + 1);
        s.y = parse_number(f[1], i + 1);
        s.t = parse_number(f[2], i + 1);
        s.p = parse_number(f.back(), i + 1);
        samples.push_back(s);
    }
    return RawSignature(std::move(samples));
}

inline RawSignature parse_csv(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty()) throw MalformedInput("empty csv input");
    const auto header = split_fields(lines[0], ',');
    if (header.size() != 4 || header[0] != "t" || header[1] != "x" || header[2] != "y" ||
        header[3] != "p") {
        throw MalformedInput("csv header must be 't,x,y,p'");
    }
    std::vector<Sample> samples;
    samples.reserve(lines.size() - 1);
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto f = split_fields(lines[i], ',');
        if (f.size() != 4) {
            throw MalformedInput("csv line " + std::to_string(i + 1) + " has " +
                                 std::to_string(f.size()) + " fields, expected 4");
        }
        samples.push_back({parse_number(f[0], i + 1), parse_number(f[1], i + 1),
                           parse_number(f[2], i + 1), parse_number(f[3], i + 1)});
    }
    return RawSignature(std::move(samples));
}

// Pressure is optional in json: capture devices without a pressure sensor
// send shape-only traces, which are filled with a constant mid-scale value.
inline constexpr double kMissingPressure = 0.5;

inline RawSignature signature_from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array()) {
        throw MalformedInput("json signature must be an object with a 'samples' array");
    }
    std::vector<Sample> samples;
    samples.reserve(doc["samples"].size());
    std::size_t i = 0;
    for (const auto& item : doc["samples"]) {
        ++i;
        auto field = [&](const char* name, bool required) -> double {
            if (!item.is_object() || !item.contains(name)) {
                if (!required) return kMissingPressure;
                throw MalformedInput("sample " + std::to_string(i) + " lacks field '" + name + "'");
            }
            const auto& v = item[name];
            if (!v.is_number()) {
                throw MalformedInput("sample " + std::to_string(i) + " field '" + name +
                                     "' is not a number");
            }
            return v.get<double>();
        };
        samples.push_back({field("t", true), field("x", true), field("y", true), field("p", false)});
    }
    SignatureMeta meta;
    if (doc.contains("meta")) {
        const auto& m = doc["meta"];
        if (!m.is_object()) throw MalformedInput("'meta' must be an object");
        if (m.contains("signer") && m["signer"].is_string()) meta.signer = m["signer"].get<std::string>();
        if (m.contains("device") && m["device"].is_string()) meta.device = m["device"].get<std::string>();
    }
    return RawSignature(std::move(samples), std::move(meta));
}

inline RawSignature parse_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw MalformedInput(std::string("invalid json: ") + e.what());
    }
    return signature_from_json(doc);
}

} // namespace detail

inline RawSignature parse_signature(std::string_view text, SignatureFormat format) {
    if (detail::trim(text).empty()) throw MalformedInput("empty input");
    switch (format) {
    case SignatureFormat::svc: return detail::parse_svc(text);
    case SignatureFormat::csv: return detail::parse_csv(text);
    case SignatureFormat::json: return detail::parse_json(text);
    }
    throw MalformedInput("unknown format");
}

inline nlohmann::json signature_to_json(const RawSignature& sig) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : sig.samples()) {
        samples.push_back({{"t", s.t}, {"x", s.x}, {"y", s.y}, {"p", s.p}});
    }
    nlohmann::json doc{{"samples", std::move(samples)}};
    nlohmann::json meta = nlohmann::json::object();
    if (sig.meta().signer) meta["signer"] = *sig.meta().signer;
    if (sig.meta().device) meta["device"] = *sig.meta().device;
    if (!meta.empty()) doc["meta"] = std::move(meta);
    return doc;
}

// Inverse of parse_signature. svc and csv carry no metadata.
inline std::string serialize_signature(const RawSignature& sig, SignatureFormat format) {
    using detail::format_number;
    std::string out;
    switch (format) {
    case SignatureFormat::svc:
        out = std::to_string(sig.size()) + "\n";
        for (const auto& s : sig.samples()) {
            out += format_number(s.x) + " " + format_number(s.y) + " " + format_number(s.t) + " " +
                   format_number(s.p) + "\n";
        }
        return out;
    case SignatureFormat::csv:
        out = "t,x,y,p\n";
        for (const auto& s : sig.samples()) {
            out += format_number(s.t) + "," + format_number(s.x) + "," + format_number(s.y) + "," +
                   format_number(s.p) + "\n";
        }
        return out;
    case SignatureFormat::json: return signature_to_json(sig).dump();
    }
    return out;
}

inline std::optional<SignatureFormat> format_from_extension(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (ext == ".svc" || ext == ".txt") return SignatureFormat::svc;
    if (ext == ".csv") return SignatureFormat::csv;
    if (ext == ".json") return SignatureFormat::json;
    return std::nullopt;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedInput("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline RawSignature read_signature_file(const std::filesystem::path& path) {
    const auto format = format_from_extension(path);
    if (!format) throw MalformedInput("unrecognized signature file extension: " + path.string());
    return parse_signature(read_text_file(path), *format);
}

// Signature files of a directory in lexicographic file-name order.
inline std::vector<std::filesystem::path> list_signature_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> files;
    if (!std::filesystem::is_directory(dir)) return files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && format_from_extension(entry.path())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

} // namespace hsig
