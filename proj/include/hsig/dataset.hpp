#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hsig/error.hpp"
#include "hsig/signature_io.hpp"
#include "hsig/synthetic.hpp"
#include "hsig/types.hpp"

namespace hsig {

struct UserData {
    std::string user_id;
    std::vector<RawSignature> genuine;
    std::vector<RawSignature> forgeries;
};

// Reads <root>/<user_id>/genuine/* and <root>/<user_id>/forgery/*; users in
// lexicographic order, signatures in file-name order.
inline std::vector<UserData> load_dataset(const std::filesystem::path& root) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) throw MalformedInput("dataset root is not a directory: " + root.string());
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    std::vector<UserData> users;
    for (const auto& dir : dirs) {
        if (!fs::is_directory(dir / "genuine")) {
            throw MalformedInput("user directory lacks genuine/: " + dir.string());
        }
        UserData u;
        u.user_id = dir.filename().string();
        for (const auto& f : list_signature_files(dir / "genuine")) u.genuine.push_back(read_signature_file(f));
        for (const auto& f : list_signature_files(dir / "forgery")) u.forgeries.push_back(read_signature_file(f));
        users.push_back(std::move(u));
    }
    if (users.empty()) throw MalformedInput("dataset has no user directories: " + root.string());
    return users;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw MalformedInput("cannot write " + path.string());
    out << text;
    if (!out) throw MalformedInput("write failed: " + path.string());
}

inline void write_dataset(const std::filesystem::path& root, const std::vector<UserData>& users) {
    namespace fs = std::filesystem;
    for (const auto& u : users) {
        fs::create_directories(root / u.user_id / "genuine");
        fs::create_directories(root / u.user_id / "forgery");
        auto name = [](char prefix, std::size_t i) {
            std::string n = std::to_string(i);
            return std::string(1, prefix) + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n + ".csv";
        };
        for (std::size_t i = 0; i < u.genuine.size(); ++i) {
            write_text_file(root / u.user_id / "genuine" / name('g', i),
                            serialize_signature(u.genuine[i], SignatureFormat::csv));
        }
        for (std::size_t i = 0; i < u.forgeries.size(); ++i) {
            write_text_file(root / u.user_id / "forgery" / name('f', i),
                            serialize_signature(u.forgeries[i], SignatureFormat::csv));
        }
    }
}

// Users "user000", "user001", ... generated from seeds seed, seed+1, ...
inline std::vector<UserData> synthetic_dataset(std::size_t users, std::uint64_t seed,
                                               const SyntheticSpec& spec = {}) {
    std::vector<UserData> out;
    out.reserve(users);
    for (std::size_t u = 0; u < users; ++u) {
        auto gen = generate_synthetic_user(seed + u, spec);
        std::string id = std::to_string(u);
        id = "user" + std::string(id.size() < 3 ? 3 - id.size() : 0, '0') + id;
        out.push_back({std::move(id), std::move(gen.genuine), std::move(gen.forgeries)});
    }
    return out;
}

} // namespace hsig
