// hsig: enroll, verify, benchmark and synthesize handwritten signatures.
//
// Exit codes: 0 success / genuine, 1 forged, 2 usage or I/O error,
// 3 enrollment or internal failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hsig/hsig.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitForged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInternal = 3;

struct ExitWith {
    int code;
};

[[noreturn]] void fail(int code, const std::string& message) {
    std::cerr << "hsig: " << message << "\n";
    throw ExitWith{code};
}

void print_cell_table(std::ostream& out, const hsig::CellGrid<double>& first, const char* first_name,
                      const hsig::CellGrid<double>* second = nullptr, const char* second_name = nullptr) {
    char line[128];
    std::snprintf(line, sizeof line, "%-2s %-2s %-3s %-2s %14s", "s", "a", "p", "r", first_name);
    out << line;
    if (second) {
        std::snprintf(line, sizeof line, " %14s", second_name);
        out << line;
    }
    out << "\n";
    for (std::size_t i = 0; i < first.size(); ++i) {
        const auto k = first.key(i);
        std::snprintf(line, sizeof line, "%-2c %-2c %-3d %-2d %14.9f", hsig::signal_name(k.signal),
                      hsig::axis_name(k.axis), k.section, static_cast<int>(k.band), first.at(i));
        out << line;
        if (second) {
            std::snprintf(line, sizeof line, " %14.9f", second->at(i));
            out << line;
        }
        out << "\n";
    }
}

hsig::Bytes read_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(kExitUsage, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const fs::path& path, const hsig::Bytes& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(kExitUsage, "cannot write " + path.string());
}

hsig::UserProfile load_profile_file(const fs::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return hsig::load_profile(bytes);
    } catch (const hsig::Error& e) {
        fail(kExitUsage, e.what());
    }
}

struct EnrollArgs {
    std::string refs, out, user;
    hsig::EnrollmentParams params;
};

int run_enroll(const EnrollArgs& a) {
    std::vector<hsig::RawSignature> refs;
    try {
        if (!fs::is_directory(a.refs)) fail(kExitUsage, "not a directory: " + a.refs);
        for (const auto& f : hsig::list_signature_files(a.refs)) refs.push_back(hsig::read_signature_file(f));
    } catch (const hsig::Error& e) {
        fail(kExitUsage, e.what());
    }
    if (refs.empty()) fail(kExitUsage, "no signature files in " + a.refs);

    hsig::UserProfile profile;
    try {
        const auto user = a.user.empty() ? fs::path(a.refs).filename().string() : a.user;
        profile = hsig::enroll(refs, a.params, user);
    } catch (const hsig::Error& e) {
        fail(kExitInternal, e.what());
    }
    write_bytes(a.out, hsig::save_profile(profile));

    std::cout << "enrolled " << refs.size() << " references, K = " << profile.length << ", P = "
              << profile.sections << (profile.degenerate_references ? " (identical references)" : "") << "\n";
    print_cell_table(std::cout, profile.weights, "w", &profile.dmax, "dmax");
    return kExitOk;
}

struct VerifyArgs {
    std::string profile, sig, mode = "full";
};

int run_verify(const VerifyArgs& a) {
    const auto profile = load_profile_file(a.profile);
    std::optional<hsig::RawSignature> sig;
    try {
        sig = hsig::read_signature_file(a.sig);
    } catch (const hsig::Error& e) {
        fail(kExitUsage, e.what());
    }
    const auto mode = a.mode == "full" ? hsig::VerifyMode::full : hsig::VerifyMode::shape_only;
    hsig::VerificationResult r;
    try {
        r = hsig::verify(*sig, profile, mode);
    } catch (const hsig::Error& e) {
        fail(kExitInternal, e.what());
    }
    std::printf("similarity %.9f\nthreshold  %.9f\ndecision   %s\n", r.similarity, r.threshold_used,
                r.genuine ? "genuine" : "forged");
    std::fflush(stdout);
    print_cell_table(std::cout, r.dtst, "dtst", &profile.dmax, "dmax");
    return r.genuine ? kExitOk : kExitForged;
}

struct BenchArgs {
    std::string data, out = "bench-report", mode = "full";
    hsig::ProtocolConfig cfg;
};

int run_bench(BenchArgs a) {
    std::vector<hsig::UserData> dataset;
    try {
        dataset = hsig::load_dataset(a.data);
    } catch (const hsig::Error& e) {
        fail(kExitUsage, e.what());
    }
    a.cfg.mode = a.mode == "full" ? hsig::VerifyMode::full : hsig::VerifyMode::shape_only;
    hsig::EvalReport report;
    try {
        report = hsig::run_protocol(dataset, a.cfg);
    } catch (const hsig::InsufficientSignatures& e) {
        fail(kExitUsage, e.what());
    } catch (const hsig::InvariantViolation& e) {
        fail(kExitUsage, e.what());
    } catch (const hsig::Error& e) {
        fail(kExitInternal, e.what());
    }
    const auto table = hsig::format_report_table(report);
    try {
        fs::create_directories(a.out);
        hsig::write_text_file(fs::path(a.out) / "summary.txt", table);
        hsig::write_text_file(fs::path(a.out) / "report.kv", hsig::format_report_kv(report));
        hsig::write_text_file(fs::path(a.out) / "weights.csv", hsig::format_weight_rows(report));
    } catch (const std::exception& e) {
        fail(kExitUsage, e.what());
    }
    std::cout << table;
    return kExitOk;
}

struct SynthArgs {
    std::string out;
    int users = 10;
    std::uint64_t seed = 0;
    hsig::SyntheticSpec spec;
};

int run_synth(const SynthArgs& a) {
    if (a.users < 1) fail(kExitUsage, "--users must be >= 1");
    try {
        hsig::write_dataset(a.out, hsig::synthetic_dataset(static_cast<std::size_t>(a.users), a.seed, a.spec));
    } catch (const hsig::InvariantViolation& e) {
        fail(kExitUsage, e.what());
    } catch (const std::exception& e) {
        fail(kExitUsage, e.what());
    }
    std::cout << "wrote " << a.users << " users to " << a.out << "\n";
    return kExitOk;
}

int run_inspect(const std::string& path) {
    const auto p = load_profile_file(path);
    std::cout << "user    " << (p.user_id.empty() ? "-" : p.user_id) << "\n"
              << "K       " << p.length << "\n"
              << "P       " << p.sections << "\n"
              << "delta   " << p.delta << "\n"
              << "mu_min  " << p.mu_min << "\n"
              << "cth     " << p.cth << "\n"
              << "cells   " << p.weights.size() << "\n";
    print_cell_table(std::cout, p.weights, "w", &p.dmax, "dmax");
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hybrid-partition fuzzy verification of dynamic signatures"};
    app.require_subcommand(1, 1);

    EnrollArgs enroll;
    auto* cmd_enroll = app.add_subcommand("enroll", "Build a profile from a directory of reference signatures");
    cmd_enroll->add_option("--refs", enroll.refs, "Directory of reference signatures")->required();
    cmd_enroll->add_option("--out", enroll.out, "Profile file to write")->required();
    cmd_enroll->add_option("--user", enroll.user, "User id stored in the profile (default: refs dir name)");
    cmd_enroll->add_option("--P", enroll.params.sections, "Vertical sections")->capture_default_str();
    cmd_enroll->add_option("--delta", enroll.params.delta, "Tolerance multiplier")->capture_default_str();
    cmd_enroll->add_option("--mu-min", enroll.params.mu_min, "Membership at dmax")->capture_default_str();
    cmd_enroll->add_option("--cth", enroll.params.cth, "Acceptance threshold")->capture_default_str();

    VerifyArgs verify;
    auto* cmd_verify = app.add_subcommand("verify", "Score one signature against a profile");
    cmd_verify->add_option("--profile", verify.profile, "Profile file")->required();
    cmd_verify->add_option("--sig", verify.sig, "Signature file (.svc/.txt, .csv, .json)")->required();
    cmd_verify->add_option("--mode", verify.mode, "Alignment channels")
        ->check(CLI::IsMember({"full", "shape-only", "shape_only"}))
        ->capture_default_str();

    BenchArgs bench;
    auto* cmd_bench = app.add_subcommand("bench", "Run the repeated random-split protocol on a dataset");
    cmd_bench->add_option("--data", bench.data, "Dataset root: <user>/genuine/*, <user>/forgery/*")->required();
    cmd_bench->add_option("--out", bench.out, "Directory for report files")->capture_default_str();
    cmd_bench->add_option("--seed", bench.cfg.rng_seed, "Reference selection seed")->capture_default_str();
    cmd_bench->add_option("--reps", bench.cfg.repetitions, "Repetitions")->capture_default_str();
    cmd_bench->add_option("--refs-per-user", bench.cfg.references_per_user, "References per enrollment")
        ->capture_default_str();
    cmd_bench->add_option("--P-list", bench.cfg.sections_list, "Section counts")->delimiter(',');
    cmd_bench->add_flag("--cth-sweep", bench.cfg.cth_sweep, "Add the equal-error threshold scan");
    cmd_bench->add_option("--delta", bench.cfg.delta, "Tolerance multiplier")->capture_default_str();
    cmd_bench->add_option("--mu-min", bench.cfg.mu_min, "Membership at dmax")->capture_default_str();
    cmd_bench->add_option("--cth", bench.cfg.cth, "Acceptance threshold")->capture_default_str();
    cmd_bench->add_option("--mode", bench.mode, "Alignment channels")
        ->check(CLI::IsMember({"full", "shape-only", "shape_only"}));
    cmd_bench->add_option("--max-genuine", bench.cfg.max_test_genuine, "Cap on genuine tests per user (0: all)");
    cmd_bench->add_option("--max-forgeries", bench.cfg.max_test_forgeries, "Cap on forgeries per user (0: all)");
    cmd_bench->add_option("--threads", bench.cfg.threads, "Worker threads (0: all cores)");

    SynthArgs synth;
    auto* cmd_synth = app.add_subcommand("synth", "Write a synthetic csv dataset");
    cmd_synth->add_option("--users", synth.users, "Number of users")->capture_default_str();
    cmd_synth->add_option("--seed", synth.seed, "Seed of the first user")->capture_default_str();
    cmd_synth->add_option("--out", synth.out, "Output directory")->required();
    cmd_synth->add_option("--genuine", synth.spec.genuine_count, "Genuine signatures per user")
        ->capture_default_str();
    cmd_synth->add_option("--forgeries", synth.spec.forgery_count, "Forgeries per user")->capture_default_str();
    cmd_synth->add_option("--sigma-g", synth.spec.genuine_noise, "Genuine noise")->capture_default_str();
    cmd_synth->add_option("--sigma-f", synth.spec.forgery_distortion, "Forgery distortion")->capture_default_str();

    std::string inspect_path;
    auto* cmd_inspect = app.add_subcommand("inspect", "Print profile metadata");
    cmd_inspect->add_option("--profile", inspect_path, "Profile file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (cmd_enroll->parsed()) return run_enroll(enroll);
        if (cmd_verify->parsed()) return run_verify(verify);
        if (cmd_bench->parsed()) return run_bench(bench);
        if (cmd_synth->parsed()) return run_synth(synth);
        if (cmd_inspect->parsed()) return run_inspect(inspect_path);
    } catch (const ExitWith& e) {
        return e.code;
    } catch (const std::exception& e) {
        std::cerr << "hsig: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
