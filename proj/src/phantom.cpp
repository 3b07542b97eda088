#include "segunc/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "segunc/geometry.hpp"

namespace segunc {

std::uint64_t derive_case_seed(std::uint64_t master_seed, std::uint64_t case_index) {
    SplitMix64 mix(master_seed ^ (0xd6e8feb86659fd93ULL * (case_index + 1)));
    mix.next();
    return mix.next();
}

void PhantomConfig::validate() const {
    GridMeta meta{dims, spacing};
    meta.validate();
    if (!(semi_axis_min > 0.0) || !(semi_axis_max >= semi_axis_min))
        fail(ErrorCode::ConfigInvalid, "semi-axis range must satisfy 0 < min <= max");
    if (perturbation_amplitude < 0.0) fail(ErrorCode::ConfigInvalid, "amplitude must be >= 0");
    if (center_jitter < 0.0) fail(ErrorCode::ConfigInvalid, "center jitter must be >= 0");
    if (!(decay_scale_mm > 0.0)) fail(ErrorCode::ConfigInvalid, "decay scale must be > 0");
    if (decay_scale_spread_mm < 0.0)
        fail(ErrorCode::ConfigInvalid, "decay scale spread must be >= 0");
    if (noise_floor < 0.0 || noise_floor_spread < 0.0 || noise_floor + noise_floor_spread > 0.5)
        fail(ErrorCode::ConfigInvalid, "noise floor plus spread must lie in [0, 0.5]");
    if (noise_smoothing_voxels < 0.0)
        fail(ErrorCode::ConfigInvalid, "noise smoothing must be >= 0");
    if (noise_threshold < 0.0 || noise_threshold >= 1.0)
        fail(ErrorCode::ConfigInvalid, "noise threshold must lie in [0, 1)");
    if (!(noise_rise > 0.0)) fail(ErrorCode::ConfigInvalid, "noise rise must be > 0");
    if (scattered_error_rate < 0.0 || scattered_error_rate > 0.5)
        fail(ErrorCode::ConfigInvalid, "scattered error rate must lie in [0, 0.5]");
    // The perturbed ellipsoid must fit with a 2-voxel margin.
    for (int k = 0; k < 3; ++k) {
        const double reach =
            0.5 * dims[k] - center_jitter - semi_axis_max - perturbation_amplitude - 2.0;
        if (reach < 0.0)
            fail(ErrorCode::ConfigInvalid,
                 "ellipsoid plus jitter and amplitude does not fit the grid with a 2-voxel margin");
    }
}

namespace {

// Low-order angular perturbation basis on the unit sphere (the degree-1 and
// degree-2 real harmonics, unnormalized).
double angular_basis(int term, double x, double y, double z) {
    switch (term) {
        case 0: return x;
        case 1: return y;
        case 2: return z;
        case 3: return x * y;
        case 4: return y * z;
        case 5: return z * x;
        case 6: return x * x - y * y;
        case 7: return 3.0 * z * z - 1.0;
    }
    return 0.0;
}

constexpr int kBasisTerms = 8;

}  // namespace

PhantomCase make_phantom(const PhantomConfig& cfg, int case_index) {
    cfg.validate();
    if (case_index < 0) fail(ErrorCode::ConfigInvalid, "case index must be >= 0");
    const GridMeta meta{cfg.dims, cfg.spacing};
    const std::size_t n = meta.voxel_count();
    const std::uint64_t case_seed = derive_case_seed(cfg.seed, static_cast<std::uint64_t>(case_index));
    SplitMix64 rng(case_seed);

    // geometry draws, in a fixed documented order
    std::array<double, 3> center{};
    for (int k = 0; k < 3; ++k)
        center[k] = 0.5 * (cfg.dims[k] - 1) + cfg.center_jitter * (2.0 * rng.next_unit() - 1.0);
    std::array<double, 3> axes{};
    for (int k = 0; k < 3; ++k) axes[k] = rng.next_range(cfg.semi_axis_min, cfg.semi_axis_max);
    // Normalize the perturbation to rms ~0.5 over the sphere so the typical
    // displacement is a fixed fraction of the amplitude; clamped to +-1 later
    // so the amplitude stays the hard bound.
    static constexpr double kBasisMeanSquare[kBasisTerms] = {
        1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 15.0,
        1.0 / 15.0, 1.0 / 15.0, 4.0 / 15.0, 4.0 / 5.0};
    std::array<double, kBasisTerms> coeff{};
    double rho_ms = 0.0;
    for (int t = 0; t < kBasisTerms; ++t) {
        coeff[t] = 2.0 * rng.next_unit() - 1.0;
        rho_ms += coeff[t] * coeff[t] * kBasisMeanSquare[t];
    }
    const double coeff_norm = rho_ms > 0.0 ? std::sqrt(rho_ms) / 0.5 : 1.0;

    std::vector<std::uint16_t> gt_vox(n, 0);
    std::vector<std::uint16_t> pred_vox(n, 0);
    const bool scattered = cfg.preset == PhantomPreset::Scattered;

    for (int z = 0; z < cfg.dims[2]; ++z) {
        for (int y = 0; y < cfg.dims[1]; ++y) {
            for (int x = 0; x < cfg.dims[0]; ++x) {
                const double vx = x - center[0];
                const double vy = y - center[1];
                const double vz = z - center[2];
                const double t = std::sqrt(vx * vx + vy * vy + vz * vz);
                const std::size_t i = meta.index(x, y, z);
                if (t == 0.0) {
                    gt_vox[i] = 1;
                    pred_vox[i] = 1;
                    continue;
                }
                const double dx = vx / t, dy = vy / t, dz = vz / t;
                // local ellipsoid radius along this direction
                const double inv_r = std::sqrt(dx * dx / (axes[0] * axes[0]) +
                                               dy * dy / (axes[1] * axes[1]) +
                                               dz * dz / (axes[2] * axes[2]));
                const double radius = 1.0 / inv_r;
                gt_vox[i] = t <= radius ? 1 : 0;
                if (scattered) {
                    pred_vox[i] = gt_vox[i];
                } else {
                    double rho = 0.0;
                    for (int b = 0; b < kBasisTerms; ++b)
                        rho += coeff[b] * angular_basis(b, dx, dy, dz);
                    rho /= coeff_norm;  // |rho| <= max basis magnitude ~ 2
                    rho = std::clamp(rho, -1.0, 1.0);
                    const double displaced = radius + cfg.perturbation_amplitude * rho;
                    pred_vox[i] = t <= displaced ? 1 : 0;
                }
            }
        }
    }

    if (scattered && cfg.scattered_error_rate > 0.0) {
        for (std::size_t i = 0; i < n; ++i)
            if (rng.next_unit() < cfg.scattered_error_rate) pred_vox[i] = 1 - pred_vox[i];
    }

    // Boundary-shaped map: falloff from the structure boundary. In the
    // scattered preset the structure boundary is the unflipped ellipsoid, so
    // the map shape deliberately mismatches the true error field.
    std::vector<std::uint8_t> shape_mask(n);
    if (scattered) {
        for (std::size_t i = 0; i < n; ++i) shape_mask[i] = gt_vox[i] ? 1 : 0;
    } else {
        for (std::size_t i = 0; i < n; ++i) shape_mask[i] = pred_vox[i] ? 1 : 0;
    }
    const BinaryGrid boundary = surface(BinaryGrid(meta, std::move(shape_mask)));
    if (boundary.count_set() == 0)
        fail(ErrorCode::ConfigInvalid, "degenerate phantom: structure has no surface");
    const std::vector<double> sq_dist = squared_distance_field(boundary);

    // per-case map character
    const double decay = cfg.decay_scale_mm + cfg.decay_scale_spread_mm * rng.next_unit();
    const double noise_floor = cfg.noise_floor + cfg.noise_floor_spread * rng.next_unit();

    const double two_s2 = 2.0 * decay * decay;
    std::vector<float> clean_vox(n);
    double clean_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double falloff = std::exp(-sq_dist[i] / two_s2);
        const double noise = noise_floor * (2.0 * rng.next_unit() - 1.0);
        clean_vox[i] = static_cast<float>(std::clamp(falloff + noise, 0.0, 1.0));
        clean_sum += clean_vox[i];
    }

    std::vector<float> noisy_vox(n);
    for (std::size_t i = 0; i < n; ++i) noisy_vox[i] = static_cast<float>(rng.next_unit());
    if (!scattered) {
        // Diffuse texture: spatially correlated, right-skewed (sparse bright
        // blobs over a low background), like high-dropout maps.
        if (cfg.noise_smoothing_voxels > 0.0) {
            SmoothingSpec blur;
            blur.sigma = cfg.noise_smoothing_voxels;
            const ScalarGrid smoothed =
                gaussian_smooth(ScalarGrid(meta, std::move(noisy_vox)), blur);
            noisy_vox.assign(smoothed.values().begin(), smoothed.values().end());
        }
        if (cfg.noise_threshold > 0.0) {
            const auto [lo, hi] = std::minmax_element(noisy_vox.begin(), noisy_vox.end());
            const float span = *hi - *lo;
            if (span > 0.0f) {
                const float base = *lo;
                for (float& v : noisy_vox) {
                    const double unit = (v - base) / span;
                    v = static_cast<float>(
                        std::clamp((unit - cfg.noise_threshold) / cfg.noise_rise, 0.0, 1.0));
                }
            }
        }
    }

    if (cfg.mean_matching) {
        double raw_sum = 0.0;
        for (float v : noisy_vox) raw_sum += v;
        const double target = clean_sum / static_cast<double>(n);
        const double raw_mean = raw_sum / static_cast<double>(n);
        if (target <= raw_mean) {
            const double scale = raw_mean > 0.0 ? target / raw_mean : 0.0;
            for (float& v : noisy_vox) v = static_cast<float>(v * scale);
        } else {
            // affine map toward 1 keeps values in range while hitting the mean
            const double scale = (1.0 - target) / (1.0 - raw_mean);
            for (float& v : noisy_vox) v = static_cast<float>(1.0 - (1.0 - v) * scale);
        }
    }

    char id[32];
    std::snprintf(id, sizeof(id), "case_%03d", case_index);
    PhantomCase out{
        id,
        LabelGrid(meta, std::move(gt_vox), 2),
        LabelGrid(meta, std::move(pred_vox), 2),
        UncertaintyGrid(ScalarGrid(meta, std::move(clean_vox))),
        UncertaintyGrid(ScalarGrid(meta, std::move(noisy_vox))),
        case_seed,
    };
    return out;
}

std::vector<PhantomCase> make_suite(const PhantomConfig& cfg, int n_cases) {
    if (n_cases < 1) fail(ErrorCode::ConfigInvalid, "suite needs at least one case");
    std::vector<PhantomCase> cases;
    cases.reserve(n_cases);
    for (int i = 0; i < n_cases; ++i) cases.push_back(make_phantom(cfg, i));
    return cases;
}

}  // namespace segunc
