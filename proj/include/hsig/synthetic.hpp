#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "hsig/error.hpp"
#include "hsig/types.hpp"

namespace hsig {

// Parameters of the synthetic signer model. Noise amplitudes are relative to
// a shape whose components have unit amplitude.
struct SyntheticSpec {
    int strokes = 4;               // sinusoidal components per coordinate
    int samples = 200;             // nominal raw sample count
    double genuine_noise = 0.03;   // sigma_g
    double forgery_distortion = 0.15; // sigma_f
    int genuine_count = 15;
    int forgery_count = 10;
};

struct SyntheticUser {
    std::vector<RawSignature> genuine;
    std::vector<RawSignature> forgeries;
};

namespace detail {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;
inline constexpr double kTabletScale = 1000.0;
inline constexpr double kSamplePeriodMs = 10.0;

struct Harmonic {
    double amplitude;
    double frequency;
    double phase;
};

// Smooth additive perturbation: a few low-frequency harmonics with normally
// distributed amplitudes of scale `sigma`.
struct SmoothNoise {
    std::vector<Harmonic> x, y, p;

    static SmoothNoise draw(std::mt19937_64& rng, double sigma, int harmonics) {
        std::normal_distribution<double> amp(0.0, sigma);
        std::uniform_real_distribution<double> phase(0.0, kTwoPi);
        SmoothNoise n;
        for (auto* h : {&n.x, &n.y, &n.p}) {
            for (int m = 1; m <= harmonics; ++m) h->push_back({amp(rng), static_cast<double>(m), phase(rng)});
        }
        return n;
    }

    static double eval(const std::vector<Harmonic>& hs, double tau) {
        double v = 0;
        for (const auto& h : hs) v += h.amplitude * std::sin(kTwoPi * h.frequency * tau + h.phase);
        return v;
    }
};

// Monotone reparametrization tau(u) = u + sum c_m sin(pi m u) / (pi m);
// monotone while sum |c_m| < 1.
struct TimeWarp {
    std::vector<double> coeffs;

    double operator()(double u) const {
        double tau = u;
        for (std::size_t m = 0; m < coeffs.size(); ++m) {
            const double mm = static_cast<double>(m + 1);
            tau += coeffs[m] * std::sin(std::numbers::pi * mm * u) / (std::numbers::pi * mm);
        }
        return tau;
    }
};

struct SignerModel {
    std::vector<Harmonic> x, y, p;
    double drift;
    TimeWarp rhythm;
};

inline SignerModel draw_signer(std::mt19937_64& rng, int strokes) {
    std::uniform_real_distribution<double> amp(0.4, 1.0);
    std::uniform_real_distribution<double> freq(1.0, 4.0);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::uniform_real_distribution<double> warp(-0.25, 0.25);
    SignerModel m;
    for (int s = 0; s < strokes; ++s) {
        m.x.push_back({amp(rng), freq(rng), phase(rng)});
        m.y.push_back({amp(rng), freq(rng), phase(rng)});
    }
    m.p.push_back({0.25, freq(rng), phase(rng)});
    m.p.push_back({0.1, freq(rng) * 2.0, phase(rng)});
    m.drift = std::uniform_real_distribution<double>(1.5, 3.0)(rng);
    m.rhythm.coeffs = {warp(rng), warp(rng), warp(rng)};
    return m;
}

// Renders one signature: the signer's shape plus `noise`, traversed with
// `rhythm`, sampled at a fixed tablet rate, then placed on the tablet with a
// random similarity transform.
inline RawSignature render(const SignerModel& m, const SmoothNoise& noise, const TimeWarp& rhythm,
                           std::size_t samples, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> angle(-0.1, 0.1);
    std::uniform_real_distribution<double> scale(0.9, 1.1);
    std::uniform_real_distribution<double> offset(2.0, 8.0);
    const double a = angle(rng);
    const double sc = scale(rng) * kTabletScale;
    const double ox = offset(rng) * kTabletScale;
    const double oy = offset(rng) * kTabletScale;
    const double ca = std::cos(a), sa = std::sin(a);

    std::vector<Sample> out;
    out.reserve(samples);
    for (std::size_t k = 0; k < samples; ++k) {
        const double u = static_cast<double>(k) / static_cast<double>(samples - 1);
        const double tau = rhythm(u);
        const double x = m.drift * tau + SmoothNoise::eval(m.x, tau) + SmoothNoise::eval(noise.x, tau);
        const double y = SmoothNoise::eval(m.y, tau) + SmoothNoise::eval(noise.y, tau);
        const double p = 0.6 + SmoothNoise::eval(m.p, tau) + SmoothNoise::eval(noise.p, tau);
        Sample s;
        s.t = static_cast<double>(k) * kSamplePeriodMs;
        s.x = ox + sc * (ca * x - sa * y);
        s.y = oy + sc * (sa * x + ca * y);
        s.p = std::max(0.0, p) * kTabletScale;
        out.push_back(s);
    }
    return RawSignature(std::move(out));
}

} // namespace detail

// Every signature is the signer model plus smooth shape and pressure noise
// and a perturbed rhythm. Genuine copies use noise scale sigma_g; forgeries
// use sigma_f for all three perturbations, so sigma_f = sigma_g makes the two
// classes identically distributed. Output is a pure function of (seed, spec).
inline SyntheticUser generate_synthetic_user(std::uint64_t seed, const SyntheticSpec& spec = {}) {
    if (!(spec.genuine_noise > 0) || spec.forgery_distortion < spec.genuine_noise) {
        throw InvariantViolation("synthetic spec requires sigma_f >= sigma_g > 0");
    }
    if (spec.samples < 16 || spec.strokes < 1) throw InvariantViolation("synthetic spec too small");
    std::mt19937_64 rng(seed);
    const auto model = detail::draw_signer(rng, spec.strokes);
    std::uniform_real_distribution<double> length_jitter(0.9, 1.1);

    // Rhythm jitter per unit of shape noise.
    constexpr double kRhythmPerNoise = 0.5;
    auto copy = [&](double sigma) {
        const auto noise = detail::SmoothNoise::draw(rng, sigma, 3);
        std::normal_distribution<double> jitter(0.0, kRhythmPerNoise * sigma);
        detail::TimeWarp rhythm = model.rhythm;
        for (auto& c : rhythm.coeffs) c = std::clamp(c + jitter(rng), -0.3, 0.3);
        const auto n = static_cast<std::size_t>(std::lround(spec.samples * length_jitter(rng)));
        return detail::render(model, noise, rhythm, n, rng);
    };

    SyntheticUser user;
    for (int g = 0; g < spec.genuine_count; ++g) user.genuine.push_back(copy(spec.genuine_noise));
    for (int f = 0; f < spec.forgery_count; ++f) user.forgeries.push_back(copy(spec.forgery_distortion));
    return user;
}

} // namespace hsig
