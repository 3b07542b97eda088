#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "segunc/grid.hpp"

namespace segunc {

// splitmix64; also the seed-mixing function for per-case streams.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double next_range(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
};

std::uint64_t derive_case_seed(std::uint64_t master_seed, std::uint64_t case_index);

enum class PhantomPreset {
    // Prediction is the ground-truth ellipsoid with a smooth radial boundary
    // perturbation: errors concentrate near the boundary.
    Boundary,
    // Prediction is the ground-truth ellipsoid with voxels flipped uniformly
    // at random: errors are scattered, not boundary-aligned.
    Scattered,
};

struct PhantomConfig {
    std::array<int, 3> dims{64, 64, 64};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};
    double semi_axis_min = 12.0;  // voxels
    double semi_axis_max = 21.0;  // voxels
    double center_jitter = 4.0;   // voxels
    double perturbation_amplitude = 5.0;  // voxels, max radial displacement
    // Clean-map falloff scale and additive-noise amplitude. Each case draws
    // its own values uniformly from [base, base + spread): real per-case maps
    // differ in sharpness and noise level.
    double decay_scale_mm = 0.5;
    double decay_scale_spread_mm = 0.8;
    double noise_floor = 0.08;
    double noise_floor_spread = 0.3;
    bool mean_matching = true;  // rescale the noisy map to the clean map's mean
    // Diffuse-map texture (boundary preset): smoothing sets the blob scale;
    // the normalized field is then thresholded with a soft rise so islands of
    // uncertainty sit over a mostly-certain background. The scattered preset
    // keeps plain uniform noise so the diffuse map matches its scattered
    // error field.
    double noise_smoothing_voxels = 5.0;
    double noise_threshold = 0.55;  // fraction of the normalized field range
    double noise_rise = 0.12;       // soft-rise width above the threshold
    PhantomPreset preset = PhantomPreset::Boundary;
    double scattered_error_rate = 0.05;  // flip probability for the scattered preset
    std::uint64_t seed = 0;

    void validate() const;
};

struct PhantomCase {
    std::string id;
    LabelGrid gt;
    LabelGrid pred;
    UncertaintyGrid clean;
    UncertaintyGrid noisy;
    std::uint64_t case_seed = 0;
};

// Deterministic from (config.seed, case_index).
PhantomCase make_phantom(const PhantomConfig& cfg, int case_index);

std::vector<PhantomCase> make_suite(const PhantomConfig& cfg, int n_cases);

}  // namespace segunc
