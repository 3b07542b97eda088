#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "segunc/grid.hpp"

namespace segunc {

inline constexpr std::int32_t kBandSentinel = -1;

// Distance-band partition edges in mm. Half-open intervals
// [edges[i], edges[i+1]); the last edge may be +infinity.
struct BandSpec {
    std::vector<double> edges;
    // Regularizer for the inverse-distance band weights; the innermost band
    // can have near-zero mean distance.
    double weight_delta_mm = 1.0;

    int band_count() const { return static_cast<int>(edges.size()) - 1; }
    void validate() const;

    static BandSpec default_spec();
};

// Band assignment plus per-band population, mean distance and weight.
struct BandField {
    GridMeta meta;
    std::vector<std::int32_t> band_index;  // kBandSentinel for excluded voxels
    std::vector<std::int64_t> counts;
    std::vector<double> mean_distance_mm;  // 0 for empty bands
    std::vector<double> weights;           // sum to 1 over non-empty bands

    int band_count() const { return static_cast<int>(counts.size()); }
    std::int64_t assigned_count() const;
};

enum class SigmaUnit { Voxels, Mm };

struct SmoothingSpec {
    double sigma = 2.0;
    SigmaUnit unit = SigmaUnit::Voxels;
    double truncation = 4.0;  // kernel radius = ceil(truncation * sigma_axis)
    // Border policy is symmetric reflection (a b c | c b a).

    void validate() const;
};

// Foreground voxels with at least one background (or out-of-bounds) 6-neighbor.
BinaryGrid surface(const BinaryGrid& mask);

// Exact anisotropic Euclidean distance (mm) to the nearest surface voxel
// center, for every voxel of the grid. Separable lower-envelope transform.
ScalarGrid distance_field(const BinaryGrid& surface);

// Double-precision squared-distance core of distance_field, in mm^2.
std::vector<double> squared_distance_field(const BinaryGrid& surface);

// Symmetric 95th-percentile Hausdorff distance (mm) between two surfaces.
double hd95(const BinaryGrid& surface_a, const BinaryGrid& surface_b);

// Percentile with linear interpolation between order statistics.
// `sorted` must be ascending, p in [0, 1].
double percentile_sorted(std::span<const double> sorted, double p);

// Assigns every in-domain voxel a band via half-open edge intervals and
// computes counts, mean distances and normalized inverse-distance weights.
// `domain` may be null to use the whole grid.
BandField band_partition(const ScalarGrid& dist, const BandSpec& spec,
                         const BinaryGrid* domain = nullptr);

// Separable Gaussian convolution with reflect borders; per-axis kernels are
// sampled at integer offsets and renormalized to sum 1.
ScalarGrid gaussian_smooth(const ScalarGrid& grid, const SmoothingSpec& spec);

// Per-axis sigma in voxels after unit conversion.
std::array<double, 3> sigma_in_voxels(const SmoothingSpec& spec, const GridMeta& meta);

// Discrete 1D Gaussian kernel for one axis; weights sum to 1.
std::vector<double> gaussian_kernel_1d(double sigma_voxels, double truncation);

// Voxels whose distance to the surface is <= radius (both sides of the boundary).
BinaryGrid region_within(const BinaryGrid& surface, double radius_mm);

}  // namespace segunc
