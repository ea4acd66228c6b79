#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hsig/classifier.hpp"
#include "hsig/dataset.hpp"
#include "hsig/enrollment.hpp"
#include "hsig/error.hpp"
#include "hsig/signature_io.hpp"
#include "hsig/types.hpp"

namespace hsig {

struct ErrorRates {
    double far = 0;
    double frr = 0;

    double average() const noexcept { return (far + frr) / 2.0; }
};

// FAR: fraction of forgery scores above cth. FRR: fraction of genuine scores
// at or below cth.
inline ErrorRates compute_far_frr(std::span<const double> genuine, std::span<const double> forgery, double cth) {
    if (genuine.empty() || forgery.empty()) throw EmptyScoreList("FAR/FRR need nonempty score lists");
    const auto accepted = std::count_if(forgery.begin(), forgery.end(), [&](double s) { return s > cth; });
    const auto rejected = std::count_if(genuine.begin(), genuine.end(), [&](double s) { return s <= cth; });
    return {static_cast<double>(accepted) / static_cast<double>(forgery.size()),
            static_cast<double>(rejected) / static_cast<double>(genuine.size())};
}

// Cell-wise arithmetic mean of the weights of several profiles.
inline CellGrid<double> average_weights(std::span<const UserProfile> profiles) {
    if (profiles.empty()) throw MixedConfigurations("no profiles to average");
    const int P = profiles.front().sections;
    CellGrid<double> mean(P, 0.0);
    for (const auto& p : profiles) {
        if (p.sections != P || p.weights.size() != mean.size()) {
            throw MixedConfigurations("profiles with different section counts");
        }
        for (std::size_t i = 0; i < mean.size(); ++i) mean.at(i) += p.weights.at(i);
    }
    for (auto& w : mean) w /= static_cast<double>(profiles.size());
    return mean;
}

struct ProtocolConfig {
    int repetitions = 5;
    int references_per_user = 5;
    std::uint64_t rng_seed = 0;
    std::vector<int> sections_list{2, 3, 4};
    double delta = EnrollmentParams{}.delta;
    double mu_min = EnrollmentParams{}.mu_min;
    double cth = EnrollmentParams{}.cth;
    VerifyMode mode = VerifyMode::full;
    bool cth_sweep = false;
    std::size_t max_test_genuine = 0;   // 0: all remaining genuine signatures
    std::size_t max_test_forgeries = 0; // 0: all forgeries; otherwise the first n
    unsigned threads = 0;               // 0: hardware concurrency

    void validate() const {
        if (repetitions < 1) throw InvariantViolation("repetitions must be >= 1");
        if (references_per_user < 2) throw InvariantViolation("references_per_user must be >= 2");
        if (sections_list.empty()) throw InvariantViolation("no section counts to evaluate");
        for (int P : sections_list) EnrollmentParams{P, delta, mu_min, cth}.validate();
    }
};

// One enrollment/test round of one user.
struct TrialScores {
    std::string user_id;
    int sections = 0;
    int repetition = 0;
    std::vector<std::size_t> reference_indices;
    std::vector<double> genuine;
    std::vector<double> forgery;
    ErrorRates rates;
};

struct ThresholdPoint {
    double cth = 0;
    ErrorRates rates;
};

struct ConfigResult {
    int sections = 0;
    ErrorRates rates; // averaged over users and repetitions
    CellGrid<double> mean_weights;
    std::optional<ThresholdPoint> equal_error; // from the cth sweep
};

struct EvalReport {
    std::vector<ConfigResult> results;
    std::vector<TrialScores> trials;
};

namespace detail {

// Runs fn(0..n-1) on a few threads. Each index writes only its own slot,
// so results do not depend on scheduling.
inline void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < n; i = next++) {
                    try {
                        fn(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

inline std::vector<std::size_t> draw_references(std::size_t available, std::size_t count, std::uint64_t seed,
                                                std::size_t user, int repetition) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(user), static_cast<std::uint32_t>(repetition)};
    std::mt19937_64 rng(seq);
    std::vector<std::size_t> idx(available);
    for (std::size_t i = 0; i < available; ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(count);
    std::sort(idx.begin(), idx.end());
    return idx;
}

} // namespace detail

// Threshold in {0.00, 0.01, ..., 1.00} where the user-averaged FAR and FRR
// are closest; ties go to the lowest threshold.
inline ThresholdPoint equal_error_point(std::span<const TrialScores> trials) {
    ThresholdPoint best;
    double gap = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 100; ++step) {
        const double cth = step / 100.0;
        ErrorRates mean;
        for (const auto& t : trials) {
            const auto r = compute_far_frr(t.genuine, t.forgery, cth);
            mean.far += r.far;
            mean.frr += r.frr;
        }
        mean.far /= static_cast<double>(trials.size());
        mean.frr /= static_cast<double>(trials.size());
        if (std::abs(mean.far - mean.frr) < gap) {
            gap = std::abs(mean.far - mean.frr);
            best = {cth, mean};
        }
    }
    return best;
}

// Repeated random-split protocol: per user and repetition, draw the
// references, enroll, score the remaining genuine signatures and the
// forgeries, then average FAR/FRR over users and repetitions.
inline EvalReport run_protocol(const std::vector<UserData>& dataset, const ProtocolConfig& cfg) {
    cfg.validate();
    const auto R = static_cast<std::size_t>(cfg.references_per_user);
    for (const auto& u : dataset) {
        if (u.genuine.size() < R + 1 || u.forgeries.empty()) {
            throw InsufficientSignatures("user " + u.user_id + " has " + std::to_string(u.genuine.size()) +
                                         " genuine and " + std::to_string(u.forgeries.size()) +
                                         " forged signatures; needs > " + std::to_string(R) + " and >= 1");
        }
    }
    if (dataset.empty()) throw InsufficientSignatures("empty dataset");

    EvalReport report;
    const std::size_t reps = static_cast<std::size_t>(cfg.repetitions);
    for (int P : cfg.sections_list) {
        const EnrollmentParams params{P, cfg.delta, cfg.mu_min, cfg.cth};
        const std::size_t jobs = dataset.size() * reps;
        std::vector<TrialScores> trials(jobs);
        std::vector<UserProfile> profiles(jobs);
        detail::parallel_for(jobs, cfg.threads, [&](std::size_t job) {
            const std::size_t u = job / reps;
            const int rep = static_cast<int>(job % reps);
            const auto& user = dataset[u];
            auto& t = trials[job];
            t.user_id = user.user_id;
            t.sections = P;
            t.repetition = rep;
            t.reference_indices = detail::draw_references(user.genuine.size(), R, cfg.rng_seed, u, rep);

            std::vector<RawSignature> refs;
            std::vector<const RawSignature*> tests;
            for (std::size_t g = 0, r = 0; g < user.genuine.size(); ++g) {
                if (r < R && t.reference_indices[r] == g) {
                    refs.push_back(user.genuine[g]);
                    ++r;
                } else if (cfg.max_test_genuine == 0 || tests.size() < cfg.max_test_genuine) {
                    tests.push_back(&user.genuine[g]);
                }
            }
            profiles[job] = enroll(refs, params, user.user_id);
            for (const auto* g : tests) t.genuine.push_back(verify(*g, profiles[job], cfg.mode).similarity);
            const std::size_t forgeries = cfg.max_test_forgeries == 0
                                              ? user.forgeries.size()
                                              : std::min(cfg.max_test_forgeries, user.forgeries.size());
            for (std::size_t f = 0; f < forgeries; ++f) {
                t.forgery.push_back(verify(user.forgeries[f], profiles[job], cfg.mode).similarity);
            }
            t.rates = compute_far_frr(t.genuine, t.forgery, cfg.cth);
        });

        ConfigResult res;
        res.sections = P;
        for (const auto& t : trials) {
            res.rates.far += t.rates.far;
            res.rates.frr += t.rates.frr;
        }
        res.rates.far /= static_cast<double>(jobs);
        res.rates.frr /= static_cast<double>(jobs);
        res.mean_weights = average_weights(profiles);
        if (cfg.cth_sweep) res.equal_error = equal_error_point(trials);
        report.results.push_back(std::move(res));
        for (auto& t : trials) report.trials.push_back(std::move(t));
    }
    return report;
}

namespace detail {

inline std::string percent(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f %%", 100.0 * fraction);
    return buf;
}

inline std::string cell_label(const CellKey& k) {
    return std::string{signal_name(k.signal), ','} + axis_name(k.axis) + "," + std::to_string(k.section) +
           "," + std::to_string(static_cast<int>(k.band));
}

} // namespace detail

// Human-readable summary: one row per P with averaged FAR, FRR and error.
inline std::string format_report_table(const EvalReport& report) {
    std::ostringstream out;
    char line[160];
    std::snprintf(line, sizeof line, "%-4s %-4s %-14s %-14s %-14s\n", "P", "R", "Average FAR", "Average FRR",
                  "Average error");
    out << line;
    for (const auto& r : report.results) {
        std::snprintf(line, sizeof line, "%-4d %-4d %-14s %-14s %-14s\n", r.sections, 2,
                      detail::percent(r.rates.far).c_str(), detail::percent(r.rates.frr).c_str(),
                      detail::percent(r.rates.average()).c_str());
        out << line;
    }
    bool header = false;
    for (const auto& r : report.results) {
        if (!r.equal_error) continue;
        if (!header) {
            out << "\nEqual error (cth sweep 0.00..1.00)\n";
            std::snprintf(line, sizeof line, "%-4s %-6s %-14s %-14s %-14s\n", "P", "cth", "FAR", "FRR", "EER");
            out << line;
            header = true;
        }
        std::snprintf(line, sizeof line, "%-4d %-6.2f %-14s %-14s %-14s\n", r.sections, r.equal_error->cth,
                      detail::percent(r.equal_error->rates.far).c_str(),
                      detail::percent(r.equal_error->rates.frr).c_str(),
                      detail::percent(r.equal_error->rates.average()).c_str());
        out << line;
    }
    return out.str();
}

// Machine-readable key=value form with round-trip precision.
inline std::string format_report_kv(const EvalReport& report) {
    using detail::format_number;
    std::ostringstream out;
    for (const auto& r : report.results) {
        const std::string p = "P" + std::to_string(r.sections) + ".";
        out << p << "far=" << format_number(r.rates.far) << "\n";
        out << p << "frr=" << format_number(r.rates.frr) << "\n";
        out << p << "average_error=" << format_number(r.rates.average()) << "\n";
        if (r.equal_error) {
            out << p << "eer.cth=" << format_number(r.equal_error->cth) << "\n";
            out << p << "eer.far=" << format_number(r.equal_error->rates.far) << "\n";
            out << p << "eer.frr=" << format_number(r.equal_error->rates.frr) << "\n";
        }
    }
    for (const auto& t : report.trials) {
        const std::string p = "trial.P" + std::to_string(t.sections) + "." + t.user_id + ".rep" +
                              std::to_string(t.repetition) + ".";
        out << p << "far=" << format_number(t.rates.far) << "\n";
        out << p << "frr=" << format_number(t.rates.frr) << "\n";
        out << p << "genuine=";
        for (std::size_t i = 0; i < t.genuine.size(); ++i) out << (i ? "," : "") << format_number(t.genuine[i]);
        out << "\n" << p << "forgery=";
        for (std::size_t i = 0; i < t.forgery.size(); ++i) out << (i ? "," : "") << format_number(t.forgery[i]);
        out << "\n";
    }
    return out.str();
}

// Averaged weights for plotting: "P,s,a,p,r,w_bar" rows.
inline std::string format_weight_rows(const EvalReport& report) {
    std::ostringstream out;
    out << "P,s,a,p,r,w_bar\n";
    for (const auto& r : report.results) {
        for (std::size_t i = 0; i < r.mean_weights.size(); ++i) {
            out << r.sections << "," << detail::cell_label(r.mean_weights.key(i)) << ","
                << detail::format_number(r.mean_weights.at(i)) << "\n";
        }
    }
    return out.str();
}

} // namespace hsig
