#pragma once

#include <atomic>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "hsig/classifier.hpp"
#include "hsig/enrollment.hpp"
#include "hsig/error.hpp"
#include "hsig/profile_io.hpp"
#include "hsig/signature_io.hpp"
#include "hsig/types.hpp"

namespace hsig {

inline bool valid_user_id(std::string_view id) {
    if (id.empty() || id.size() > 128 || id == "." || id == "..") return false;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

class ProfileStore {
public:
    virtual ~ProfileStore() = default;
    virtual std::optional<UserProfile> get(const std::string& user_id) const = 0;
    virtual void put(const std::string& user_id, const UserProfile& profile) = 0;
};

// One <user_id>.hsig container per user. Writes go to a temporary file that
// is renamed over the final name, so readers see the old or the new profile
// and never a partial one.
class DirectoryProfileStore final : public ProfileStore {
public:
    explicit DirectoryProfileStore(std::filesystem::path root) : root_(std::move(root)) {
        std::filesystem::create_directories(root_);
    }

    const std::filesystem::path& root() const noexcept { return root_; }

    std::filesystem::path path_for(const std::string& user_id) const {
        if (!valid_user_id(user_id)) throw MalformedInput("invalid user id '" + user_id + "'");
        return root_ / (user_id + ".hsig");
    }

    std::optional<UserProfile> get(const std::string& user_id) const override {
        std::ifstream in(path_for(user_id), std::ios::binary);
        if (!in) return std::nullopt;
        Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        return load_profile(bytes);
    }

    void put(const std::string& user_id, const UserProfile& profile) override {
        const auto target = path_for(user_id);
        const Bytes bytes = save_profile(profile);
        std::lock_guard lock(writer_lock(user_id));
        const auto tmp = root_ / (user_id + ".hsig.tmp" + std::to_string(counter_++));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
            out.flush();
            if (!out) {
                std::error_code ec;
                std::filesystem::remove(tmp, ec);
                throw std::runtime_error("failed to write " + tmp.string());
            }
        }
        std::filesystem::rename(tmp, target);
    }

private:
    std::mutex& writer_lock(const std::string& user_id) {
        std::lock_guard guard(locks_mutex_);
        auto& m = locks_[user_id];
        if (!m) m = std::make_unique<std::mutex>();
        return *m;
    }

    std::filesystem::path root_;
    std::mutex locks_mutex_;
    std::map<std::string, std::unique_ptr<std::mutex>> locks_;
    std::atomic<std::uint64_t> counter_{0};
};

struct ServiceResponse {
    int status = 200;
    nlohmann::json body;
};

namespace detail {

inline ServiceResponse error_response(int status, const std::string& message) {
    return {status, {{"error", message}}};
}

inline nlohmann::json cell_json(const CellKey& k) {
    return {{"s", std::string(1, signal_name(k.signal))},
            {"a", std::string(1, axis_name(k.axis))},
            {"p", k.section},
            {"r", static_cast<int>(k.band)}};
}

inline nlohmann::json grid_entries(const CellGrid<double>& grid, const char* field) {
    auto out = nlohmann::json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        auto e = cell_json(grid.key(i));
        e[field] = grid.at(i);
        out.push_back(std::move(e));
    }
    return out;
}

template <class T>
T read_number(const nlohmann::json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw MalformedInput(std::string("params.") + key + " must be a number");
    if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw MalformedInput(std::string("params.") + key + " must be an integer");
    }
    return v.get<T>();
}

} // namespace detail

// Profile metadata safe to hand out: templates and the stored base never
// leave the server.
inline nlohmann::json profile_metadata(const UserProfile& p) {
    nlohmann::json cells = nlohmann::json::array();
    for (std::size_t i = 0; i < p.weights.size(); ++i) {
        auto e = detail::cell_json(p.weights.key(i));
        e["w"] = p.weights.at(i);
        e["dmax"] = p.dmax.at(i);
        cells.push_back(std::move(e));
    }
    return {{"user_id", p.user_id}, {"K", p.length},       {"P", p.sections},
            {"delta", p.delta},     {"mu_min", p.mu_min},  {"cth", p.cth},
            {"cells", std::move(cells)}};
}

// Transport-independent request handlers. `Service` holds no mutable state
// besides the store, so handlers may run concurrently.
class Service {
public:
    explicit Service(ProfileStore& store) : store_(store) {}

    // Body: [sig, ...] or {"signatures": [sig, ...], "params": {P, delta, mu_min, cth}}.
    ServiceResponse enroll(const std::string& user_id, const std::string& body) const {
        if (!valid_user_id(user_id)) return detail::error_response(400, "invalid user id");
        std::vector<RawSignature> refs;
        EnrollmentParams params;
        try {
            const auto doc = nlohmann::json::parse(body);
            const nlohmann::json* list = &doc;
            if (doc.is_object()) {
                if (!doc.contains("signatures")) throw MalformedInput("missing 'signatures'");
                list = &doc.at("signatures");
                if (doc.contains("params")) {
                    const auto& pj = doc.at("params");
                    if (!pj.is_object()) throw MalformedInput("'params' must be an object");
                    params.sections = detail::read_number(pj, "P", params.sections);
                    params.delta = detail::read_number(pj, "delta", params.delta);
                    params.mu_min = detail::read_number(pj, "mu_min", params.mu_min);
                    params.cth = detail::read_number(pj, "cth", params.cth);
                }
            }
            if (!list->is_array()) throw MalformedInput("signatures must be a json array");
            for (const auto& s : *list) refs.push_back(detail::signature_from_json(s));
            params.validate();
        } catch (const nlohmann::json::exception& e) {
            return detail::error_response(400, std::string("malformed json: ") + e.what());
        } catch (const Error& e) {
            return detail::error_response(400, e.what());
        }
        if (refs.size() < 2) {
            return detail::error_response(422, "enrollment needs at least 2 signatures, got " +
                                                   std::to_string(refs.size()));
        }
        try {
            const auto profile = hsig::enroll(refs, params, user_id);
            store_.put(user_id, profile);
            auto out = profile_metadata(profile);
            out["degenerate_references"] = profile.degenerate_references;
            return {201, std::move(out)};
        } catch (const DegenerateGeometry& e) {
            return detail::error_response(422, e.what());
        } catch (const std::exception& e) {
            return detail::error_response(500, e.what());
        }
    }

    // Body: {"signature": sig, "mode": "full" | "shape_only"}.
    ServiceResponse verify(const std::string& user_id, const std::string& body) const {
        if (!valid_user_id(user_id)) return detail::error_response(400, "invalid user id");
        std::optional<UserProfile> profile;
        try {
            profile = store_.get(user_id);
        } catch (const std::exception& e) {
            return detail::error_response(500, e.what());
        }
        if (!profile) return detail::error_response(404, "unknown user " + user_id);

        std::optional<RawSignature> sig;
        VerifyMode mode = VerifyMode::full;
        try {
            const auto doc = nlohmann::json::parse(body);
            if (!doc.is_object() || !doc.contains("signature")) throw MalformedInput("missing 'signature'");
            sig = detail::signature_from_json(doc.at("signature"));
            if (doc.contains("mode")) {
                const auto m = doc.at("mode").get<std::string>();
                if (m == "full") {
                    mode = VerifyMode::full;
                } else if (m == "shape_only" || m == "shape-only") {
                    mode = VerifyMode::shape_only;
                } else {
                    throw MalformedInput("unknown mode '" + m + "'");
                }
            }
        } catch (const nlohmann::json::exception& e) {
            return detail::error_response(400, std::string("malformed json: ") + e.what());
        } catch (const Error& e) {
            return detail::error_response(400, e.what());
        }
        try {
            const auto r = hsig::verify(*sig, *profile, mode);
            return {200,
                    {{"similarity", r.similarity},
                     {"genuine", r.genuine},
                     {"threshold", r.threshold_used},
                     {"dtst", detail::grid_entries(r.dtst, "d")}}};
        } catch (const DegenerateGeometry& e) {
            return detail::error_response(400, e.what());
        } catch (const std::exception& e) {
            return detail::error_response(500, e.what());
        }
    }

    ServiceResponse profile(const std::string& user_id) const {
        if (!valid_user_id(user_id)) return detail::error_response(400, "invalid user id");
        try {
            const auto p = store_.get(user_id);
            if (!p) return detail::error_response(404, "unknown user " + user_id);
            return {200, profile_metadata(*p)};
        } catch (const std::exception& e) {
            return detail::error_response(500, e.what());
        }
    }

    void mount(httplib::Server& server) const {
        auto reply = [](httplib::Response& res, const ServiceResponse& r) {
            res.status = r.status;
            res.set_content(r.body.dump(), "application/json");
        };
        server.Post(R"(/users/([^/]+)/enroll)", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, enroll(req.matches[1], req.body));
        });
        server.Post(R"(/users/([^/]+)/verify)", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, verify(req.matches[1], req.body));
        });
        server.Get(R"(/users/([^/]+)/profile)", [this, reply](const httplib::Request& req, httplib::Response& res) {
            reply(res, profile(req.matches[1]));
        });
    }

private:
    ProfileStore& store_;
};

struct ListenAddress {
    std::string host = "127.0.0.1";
    int port = 8080;
};

// "host:port", ":port" or "host".
inline ListenAddress parse_listen_address(std::string_view text) {
    ListenAddress a;
    if (text.empty()) return a;
    const auto colon = text.rfind(':');
    if (colon == std::string_view::npos) {
        a.host = std::string(text);
        return a;
    }
    if (colon > 0) a.host = std::string(text.substr(0, colon));
    const auto port = text.substr(colon + 1);
    int value = 0;
    const auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc{} || ptr != port.data() + port.size() || value < 0 || value > 65535) {
        throw MalformedInput("invalid port in listen address '" + std::string(text) + "'");
    }
    a.port = value;
    return a;
}

} // namespace hsig
