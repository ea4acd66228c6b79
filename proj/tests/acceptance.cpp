// Acceptance run: one PASS/FAIL/SKIP line per primary criterion, plus INFO
// lines for context. Exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hsig/hsig.hpp"
#include "oracles.hpp"

using namespace hsig;

namespace {

// Tolerances fixed by the acceptance criteria.
constexpr double kOracleTol = 1e-9;
constexpr double kOracleSeconds = 1.0;
constexpr double kBruteForceTol = 1e-9;
constexpr double kAnchorTol = 1e-12;
constexpr double kGeometryTol = 1e-9;
constexpr double kGateMaxRate = 0.10;
constexpr double kGateSeconds = 30.0;
constexpr double kRealDataMaxError = 0.098;

int failures = 0;

void report(const char* status, const std::string& name, const std::string& detail) {
    std::printf("%-4s  %-44s %s\n", status, name.c_str(), detail.c_str());
    std::fflush(stdout);
}

void verdict(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    report(ok ? "PASS" : "FAIL", name, detail);
}

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Collects named checks of the equation oracle suite.
struct Checks {
    int total = 0;
    std::vector<std::string> failed;

    void near(const std::string& name, double got, double want, double tol = kOracleTol) {
        ++total;
        if (!(std::abs(got - want) <= tol)) failed.push_back(name + fmt(" got %.17g want %.17g", got, want));
    }
    void same(const std::string& name, bool ok) {
        ++total;
        if (!ok) failed.push_back(name);
    }
    template <class T>
    void vec_near(const std::string& name, const std::vector<T>& got, const std::vector<T>& want) {
        ++total;
        bool ok = got.size() == want.size();
        for (std::size_t i = 0; ok && i < got.size(); ++i) {
            ok = std::abs(static_cast<double>(got[i]) - static_cast<double>(want[i])) <= kOracleTol;
        }
        if (!ok) failed.push_back(name);
    }
};

RawSignature raw_xyt(std::vector<double> x, std::vector<double> y, std::vector<double> t) {
    std::vector<Sample> s;
    for (std::size_t k = 0; k < x.size(); ++k) s.push_back({t[k], x[k], y[k], 1.0});
    return RawSignature(std::move(s));
}

NormalizedSignature random_shape(std::mt19937_64& rng, std::size_t K) {
    std::normal_distribution<double> n(0.0, 1.0);
    NormalizedSignature s;
    for (std::size_t k = 0; k < K; ++k) {
        const double tau = static_cast<double>(k) / static_cast<double>(K);
        s.x.push_back(5 + 3 * std::cos(5 * tau) + 0.2 * n(rng));
        s.y.push_back(-2 + std::sin(9 * tau) + 0.2 * n(rng));
        s.v.push_back(std::abs(n(rng)));
        s.z.push_back(300 + 50 * n(rng));
    }
    return s;
}

NormalizedSignature similarity_transform(const NormalizedSignature& s, double angle, double scale, double dx,
                                         double dy) {
    auto out = s;
    const double c = std::cos(angle), sn = std::sin(angle);
    for (std::size_t k = 0; k < s.size(); ++k) {
        out.x[k] = scale * (c * s.x[k] - sn * s.y[k]) + dx;
        out.y[k] = scale * (sn * s.x[k] + c * s.y[k]) + dy;
        out.v[k] = scale * s.v[k];
    }
    return out;
}

void equation_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Checks c;

    // Velocity.
    c.vec_near("velocity [5,5,0]", derive_velocity(raw_xyt({0, 3, 3}, {0, 4, 4}, {0, 1, 2})), {5.0, 5.0, 0.0});
    c.vec_near("velocity [2,2]", derive_velocity(raw_xyt({0, 4}, {0, 0}, {0, 2})), {2.0, 2.0});

    // Base selection: #2 is the mean of #1 and #3.
    {
        const std::vector<double> v1{1, 2, 6, 3, 1}, v3{2, 5, 3, 6, 2}, z1{1, 1, 3, 2, 1}, z3{3, 2, 1, 2, 4};
        std::vector<double> v2, z2;
        for (std::size_t k = 0; k < 5; ++k) {
            v2.push_back((v1[k] + v3[k]) / 2);
            z2.push_back((z1[k] + z3[k]) / 2);
        }
        const std::vector<std::pair<std::vector<double>, std::vector<double>>> d{{v1, z1}, {v2, z2}, {v3, z3}};
        std::vector<double> totals(3, 0.0);
        for (std::size_t a = 0; a < 3; ++a) {
            for (std::size_t b = 0; b < 3; ++b) {
                if (a != b) totals[a] += oracle::dynamics_distance(d[a].first, d[a].second, d[b].first, d[b].second);
            }
        }
        const auto sel = select_base(std::vector<Dynamics>{{v1, z1}, {v2, z2}, {v3, z3}});
        c.same("select_base average picks #2", sel.index == 1);
        c.vec_near("select_base totals vs brute force", sel.totals, totals);
    }

    // DTW: base [1,2,3] vs sig [1,1,2,3].
    {
        const Dynamics base{{1, 2, 3}, {1, 1, 1}}, sig{{1, 1, 2, 3}, {1, 1, 1, 1}};
        const auto map = dtw_align(sig, base);
        const oracle::Path want{{0, 0}, {0, 1}, {1, 2}, {2, 3}};
        c.same("dtw duplicates base index 1", map.pairs == want);
        const auto vb = oracle::standardize(base.v), vs = oracle::standardize(sig.v);
        c.near("dtw cost vs enumeration", map.cost,
               oracle::min_path_cost(3, 4, [&](std::size_t i, std::size_t j) { return std::abs(vb[i] - vs[j]); }));
    }

    c.same("target_K(10, P=3) = 12", target_length(10, 3) == 12);

    // Geometry: rotation by 37 degrees, scale x3 with offset (+10, +20).
    {
        std::mt19937_64 rng(37);
        const auto s = random_shape(rng, 48);
        const auto a = normalize_geometry(s);
        c.near("normalize rotate 37 deg",
               oracle::max_rms_difference(a, normalize_geometry(similarity_transform(s, 37 * std::numbers::pi / 180, 1, 0, 0))),
               0.0);
        c.near("normalize scale 3 offset (10,20)",
               oracle::max_rms_difference(a, normalize_geometry(similarity_transform(s, 0, 3, 10, 20))), 0.0);
    }

    // Partitioning.
    c.vec_near("pv K=6 P=3", vertical_sections(6, 3), {1, 1, 2, 2, 3, 3});
    c.vec_near("pv K=4 P=2", vertical_sections(4, 2), {1, 1, 2, 2});
    {
        const std::vector<double> s{1, 3, 2, 4};
        const auto pv = vertical_sections(4, 2);
        c.near("section average p=1", section_average(s, pv, 1), 2.0);
        c.near("section average p=2", section_average(s, pv, 2), 3.0);
        c.vec_near("ph [1,2,1,2]", horizontal_sections(s, pv), {1, 2, 1, 2});
        const std::vector<double> two{0, 10};
        c.vec_near("ph [0,10] P=1", horizontal_sections(two, vertical_sections(2, 1)), {1, 2});
        NormalizedSignature sig{{7, 8, 9, 10}, {0, 0, 0, 0}, s, s};
        const auto f = extract_fragments(sig, build_partition_maps(sig, 2));
        c.vec_near("fragment (v,x,1,1)", f[{Signal::velocity, Axis::x, 1, Band::low}], {7.0});
        c.vec_near("fragment (v,x,1,2)", f[{Signal::velocity, Axis::x, 1, Band::high}], {8.0});
        c.vec_near("fragment (v,x,2,1)", f[{Signal::velocity, Axis::x, 2, Band::low}], {9.0});
        c.vec_near("fragment (v,x,2,2)", f[{Signal::velocity, Axis::x, 2, Band::high}], {10.0});
    }

    // Enrollment statistics.
    {
        using F = std::vector<std::vector<double>>;
        c.vec_near("template [0],[0],[3]", cell_template(F{{0}, {0}, {3}}), {1.0});
        const F f{{1, 3}, {3, 5}};
        const std::vector<double> tc{2, 4};
        c.near("dmax delta=1", compute_dmax(f, tc, 1.0), 1.0);
        c.near("dmax delta=2", compute_dmax(f, tc, 2.0), 2.0);
        c.near("sigma_bar [1,3],[3,5]", compute_sigma_bar(f, tc), 1.0);
        c.near("sigma_bar [0],[4]", compute_sigma_bar(F{{0}, {4}}, std::vector<double>{2}), 2.0);
        c.vec_near("weights {1,0.5}", compute_weights(std::vector<double>{1.0, 0.5}), {0.0, 0.5});
    }

    // Test-phase distances: single section, base velocity [1,3,1,3].
    {
        UserProfile p;
        p.sections = 1;
        p.length = 4;
        NormalizedSignature base{{0, 0, 0, 0}, {0, 0, 0, 0}, {1, 3, 1, 3}, {1, 1, 1, 1}};
        p.partition_maps = build_partition_maps(base, 1);
        const auto cells = extract_fragments(base, p.partition_maps);
        p.templates = CellGrid<std::vector<double>>(1);
        for (std::size_t i = 0; i < cells.size(); ++i) p.templates.at(i).assign(cells.at(i).size(), 0.0);
        p.templates[{Signal::velocity, Axis::x, 1, Band::low}] = {2, 4};
        p.templates[{Signal::velocity, Axis::y, 1, Band::low}] = {2, 2};
        NormalizedSignature test{{1, 0, 3, 0}, {5, 0, -1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
        const auto d = partition_distances(test, p);
        c.near("dtst [1,3] vs [2,4]", d[{Signal::velocity, Axis::x, 1, Band::low}], 1.0);
        c.near("dtst [5,-1] vs [2,2]", d[{Signal::velocity, Axis::y, 1, Band::low}], 3.0);
    }

    // Membership, t-norm and output.
    c.near("mu_A1(dmax) = mu_min", gaussian_membership(1.3, 0, 1.3, 0.01), 0.01);
    c.near("mu_A1(2 dmax) = mu_min^4", gaussian_membership(2.6, 0, 1.3, 0.01), 1e-8);
    c.near("t-norm (0.5,0.4;1,0.5)", weighted_tnorm(std::vector<double>{0.5, 0.4}, std::vector<double>{1, 0.5}), 0.35);
    c.near("t-norm (0.5,0.4;1,1)", weighted_tnorm(std::vector<double>{0.5, 0.4}, std::vector<double>{1, 1}), 0.2);
    c.near("t-norm (0.5,0.4;1,0)", weighted_tnorm(std::vector<double>{0.5, 0.4}, std::vector<double>{1, 0}), 0.5);
    {
        const std::size_t M = 16;
        c.near("y at origin", similarity(std::vector<double>(M, 0.0), std::vector<double>(M, 0.7),
                                         std::vector<double>(M, 1.0), 0.01),
               1.0 / (1.0 + std::pow(0.01, 16.0)));
        c.near("mu at dmax/2", gaussian_membership(0.35, 0, 0.7, 0.01), std::pow(0.01, 0.25));
        c.near("y at dmax/2", similarity(std::vector<double>{0.35}, std::vector<double>{0.7}, std::vector<double>{1.0}, 0.01),
               0.5);
    }

    // Evaluation.
    {
        const auto r = compute_far_frr(std::vector<double>{0.9, 0.4, 0.8, 0.7}, std::vector<double>{0.6, 0.1}, 0.5);
        c.near("FAR hand count", r.far, 0.5);
        c.near("FRR hand count", r.frr, 0.25);
        UserProfile a, b;
        a.sections = b.sections = 2;
        a.weights = CellGrid<double>(2, 0.2);
        b.weights = CellGrid<double>(2, 0.4);
        c.near("mean weight of 0.2 and 0.4", average_weights(std::vector<UserProfile>{a, b}).at(3), 0.3);
    }

    const double secs = seconds_since(t0);
    std::string detail = fmt("%d/%d checks, %.3f s", c.total - static_cast<int>(c.failed.size()), c.total, secs);
    for (const auto& f : c.failed) detail += "; " + f;
    verdict(c.failed.empty() && secs < kOracleSeconds, "equation oracle suite", detail);
}

void conservation() {
    std::mt19937_64 rng(2024);
    bool ok = true;
    std::size_t cases = 0;
    for (int P : {2, 3, 4}) {
        for (int i = 0; i < 100; ++i) {
            std::uniform_int_distribution<std::size_t> len(40, 300);
            const auto raw = oracle::random_signature(rng, len(rng));
            const auto v = derive_velocity(raw);
            AlignmentMap identity;
            for (std::size_t k = 0; k < raw.size(); ++k) identity.pairs.emplace_back(k, k);
            const auto sig = normalize_geometry(warp_to_base(raw, v, identity, raw.size(), target_length(raw.size(), P)));
            const auto f = extract_fragments(sig, build_partition_maps(sig, P));
            for (Signal s : kSignals) {
                for (Axis a : kAxes) {
                    std::size_t sum = 0;
                    for (int p = 1; p <= P; ++p) {
                        for (Band r : kBands) sum += f[{s, a, p, r}].size();
                    }
                    ok &= sum == sig.size();
                }
            }
            ++cases;
        }
    }
    verdict(ok, "conservation: sum of Kc = K per (s,a)", fmt("%zu signatures, P in {2,3,4}", cases));

    // The cell grid enumerates (s,a,p,r): 2*2*P*2 = 8P cells, which equals
    // P*P*4 only at P = 2.
    std::string detail;
    bool counts = true;
    for (int P : {2, 3, 4}) {
        const std::size_t got = CellGrid<double>(P).size();
        const std::size_t want = static_cast<std::size_t>(P * P * 4);
        counts &= got == want;
        detail += fmt("P=%d: %zu cells vs %zu; ", P, got, want);
    }
    verdict(counts, "partition-cell count equals P*P*4", detail);
}

void brute_force_classifier() {
    std::mt19937_64 rng(77);
    std::uniform_int_distribution<std::size_t> cells(1, 32);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t M = cells(rng);
        std::vector<double> dtst(M), dmax(M), w(M);
        const double mu = 0.001 + 0.5 * u(rng);
        for (std::size_t c = 0; c < M; ++c) {
            dmax[c] = 0.01 + 2.0 * u(rng);
            dtst[c] = 2.0 * dmax[c] * u(rng);
            w[c] = u(rng);
        }
        worst = std::max(worst, std::abs(similarity(dtst, dmax, w, mu) - oracle::brute_force_similarity(dtst, dmax, w, mu)));
    }
    verdict(worst <= kBruteForceTol, "classifier vs brute-force expansion", fmt("1000 instances, max |diff| %.3g", worst));
}

void membership_anchors() {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> d(1e-6, 1e3), m(1e-6, 0.999);
    double worst = 0;
    for (int i = 0; i < 100; ++i) {
        const double dmax = d(rng), mu = m(rng);
        worst = std::max(worst, std::abs(gaussian_membership(0, 0, dmax, mu) - 1.0));
        worst = std::max(worst, std::abs(gaussian_membership(dmax, 0, dmax, mu) - mu));
    }
    verdict(worst <= kAnchorTol, "membership anchors mu(0)=1, mu(dmax)=mu_min", fmt("100 pairs, max |diff| %.3g", worst));
}

void dtw_optimality() {
    int mismatches = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> len(1, 8);
        std::uniform_real_distribution<double> u(0.0, 10.0);
        const std::size_t nb = len(rng), ns = len(rng);
        Dynamics base, sig;
        for (std::size_t k = 0; k < nb; ++k) base.v.push_back(u(rng)), base.z.push_back(u(rng));
        for (std::size_t k = 0; k < ns; ++k) sig.v.push_back(u(rng)), sig.z.push_back(u(rng));
        const auto vb = zscore(base.v), zb = zscore(base.z), vs = zscore(sig.v), zs = zscore(sig.z);
        auto cost = [&](std::size_t i, std::size_t j) { return std::abs(vb[i] - vs[j]) + std::abs(zb[i] - zs[j]); };
        const auto map = dtw_align(sig, base);
        if (map.cost != oracle::min_path_cost(nb, ns, cost) || !is_valid_path(map, nb, ns)) ++mismatches;

        const auto self = dtw_align(sig, sig);
        bool diagonal = self.cost == 0.0 && self.pairs.size() == ns;
        for (std::size_t k = 0; diagonal && k < ns; ++k) diagonal = self.pairs[k] == std::make_pair(k, k);
        if (!diagonal) ++mismatches;
    }
    verdict(mismatches == 0, "DTW optimality and identity diagonal", fmt("200 seeds, %d mismatches", mismatches));
}

void geometric_invariance() {
    std::mt19937_64 rng(314);
    std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
    std::uniform_real_distribution<double> log_scale(std::log(0.1), std::log(10.0));
    std::uniform_real_distribution<double> shift(-500, 500);
    const auto s = random_shape(rng, 96);
    const auto ref = normalize_geometry(s);
    double worst = 0;
    for (int i = 0; i < 10; ++i) {
        worst = std::max(worst, oracle::max_rms_difference(ref, normalize_geometry(similarity_transform(s, angle(rng), 1, 0, 0))));
        worst = std::max(worst,
                         oracle::max_rms_difference(ref, normalize_geometry(similarity_transform(s, 0, std::exp(log_scale(rng)), 0, 0))));
        worst = std::max(worst,
                         oracle::max_rms_difference(ref, normalize_geometry(similarity_transform(s, 0, 1, shift(rng), shift(rng)))));
    }
    const double idem = oracle::max_rms_difference(ref, normalize_geometry(ref));
    verdict(worst <= kGeometryTol && idem <= kGeometryTol, "geometric invariance and idempotence",
            fmt("max RMS %.3g, idempotence %.3g", worst, idem));
}

EvalReport gate_protocol(double delta, double* secs) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto data = synthetic_dataset(10, 0); // seeds 0..9, sigma_f = 5 sigma_g
    ProtocolConfig cfg;
    cfg.repetitions = 1;
    cfg.references_per_user = 5;
    cfg.sections_list = {2};
    cfg.delta = delta;
    cfg.cth = 0.5;
    cfg.max_test_genuine = 10;
    cfg.max_test_forgeries = 10;
    auto report = run_protocol(data, cfg);
    *secs = seconds_since(t0);
    return report;
}

void synthetic_gate() {
    double secs = 0;
    const auto r = gate_protocol(1.0, &secs).results.front().rates;
    verdict(r.far <= kGateMaxRate && r.frr <= kGateMaxRate && secs < kGateSeconds,
            "synthetic gate (P=2, cth=0.5, delta=1)", fmt("FAR %.1f%%, FRR %.1f%%, %.2f s", 100 * r.far, 100 * r.frr, secs));
    const double d = EnrollmentParams{}.delta;
    const auto r4 = gate_protocol(d, &secs).results.front().rates;
    report("INFO", fmt("synthetic gate at default delta=%g", d),
           fmt("FAR %.1f%%, FRR %.1f%%, %.2f s", 100 * r4.far, 100 * r4.frr, secs));
}

void weight_semantics() {
    // Five aligned references; the noisy region is section 2, low band of
    // both dynamics maps, with 10x the positional noise of the rest.
    constexpr std::size_t K = 16;
    constexpr int P = 2;
    std::mt19937_64 rng(5150);
    std::normal_distribution<double> n(0.0, 1.0);
    auto noisy = [](std::size_t k) { return k >= K / 2 && k % 2 == 0; };
    auto draw = [&] {
        NormalizedSignature s;
        for (std::size_t k = 0; k < K; ++k) {
            const double sigma = noisy(k) ? 0.1 : 0.01;
            const double tau = static_cast<double>(k) / K;
            s.x.push_back(std::cos(6 * tau) + sigma * n(rng));
            s.y.push_back(std::sin(4 * tau) + sigma * n(rng));
            s.v.push_back(k % 2 ? 1.0 : 0.0);
            s.z.push_back(k % 2 ? 1.0 : 0.0);
        }
        return s;
    };
    std::vector<NormalizedSignature> refs;
    for (int j = 0; j < 5; ++j) refs.push_back(draw());
    const auto profile = enroll_normalized(refs, 0, EnrollmentParams{P, 4.0, 0.01, 0.5});

    bool region_zero = true, others_positive = true;
    for (std::size_t i = 0; i < profile.weights.size(); ++i) {
        const auto key = profile.weights.key(i);
        const bool in_region = key.section == 2 && key.band == Band::low;
        if (in_region) region_zero &= profile.weights.at(i) == 0.0;
        else others_positive &= profile.weights.at(i) > 0.0;
    }

    auto test = draw();
    const double y = verify_normalized(test, profile).similarity;
    bool inert = true;
    for (double bump : {0.5, 3.0, 100.0}) {
        auto t = test;
        for (std::size_t k = 0; k < K; ++k) {
            if (noisy(k)) {
                t.x[k] += bump;
                t.y[k] -= bump;
            }
        }
        inert &= verify_normalized(t, profile).similarity == y;
    }
    verdict(region_zero && others_positive && inert, "weight semantics (noisy region -> w=0, inert)",
            fmt("region w=0: %s, other w>0: %s, y unchanged: %s", region_zero ? "yes" : "no",
                others_positive ? "yes" : "no", inert ? "yes" : "no"));
}

void real_data() {
    const char* dir = std::getenv("HSIG_MCYT_DIR");
    if (!dir || !*dir) {
        report("SKIP", "real-data check (MCYT-100-shaped)", "set HSIG_MCYT_DIR to a dataset root");
        return;
    }
    try {
        const auto data = load_dataset(dir);
        ProtocolConfig cfg;
        cfg.sections_list = {2};
        cfg.max_test_forgeries = 15;
        const auto r = run_protocol(data, cfg).results.front().rates;
        verdict(r.average() <= kRealDataMaxError, "real-data check (MCYT-100-shaped)",
                fmt("%zu users, average error %.2f%% (FAR %.2f%%, FRR %.2f%%)", data.size(), 100 * r.average(),
                    100 * r.far, 100 * r.frr));
    } catch (const std::exception& e) {
        verdict(false, "real-data check (MCYT-100-shaped)", e.what());
    }
}

void accuracy_vs_p() {
    ProtocolConfig cfg;
    cfg.repetitions = 1;
    cfg.max_test_genuine = 10;
    const auto report_ = run_protocol(synthetic_dataset(10, 0), cfg);
    bool rows = report_.results.size() == 3;
    for (std::size_t i = 0; rows && i < 3; ++i) rows = report_.results[i].sections == static_cast<int>(2 + i);
    std::string detail;
    for (const auto& r : report_.results) {
        detail += fmt("P=%d err %.1f%%; ", r.sections, 100 * r.rates.average());
    }
    verdict(rows, "accuracy-vs-P rows for P in {2,3,4}", detail);
    std::istringstream table(format_report_table(report_));
    for (std::string line; std::getline(table, line);) report("INFO", "", line);
}

} // namespace

int main() {
    const std::vector<std::function<void()>> criteria{
        equation_oracles, conservation,     brute_force_classifier, membership_anchors, dtw_optimality,
        geometric_invariance, synthetic_gate, weight_semantics,       real_data,          accuracy_vs_p,
    };
    for (const auto& run : criteria) {
        try {
            run();
        } catch (const std::exception& e) {
            verdict(false, "exception", e.what());
        }
    }
    std::printf("%s: %d failing criteria\n", failures ? "FAILED" : "OK", failures);
    return failures ? 1 : 0;
}
