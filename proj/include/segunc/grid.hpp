#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "segunc/error.hpp"

namespace segunc {

// Voxel counts and physical spacing (mm) of a 3D grid. Values are linearized
// x-fastest: index = x + nx*(y + ny*z).
struct GridMeta {
    std::array<int, 3> dims{0, 0, 0};
    std::array<double, 3> spacing{1.0, 1.0, 1.0};

    std::size_t voxel_count() const {
        return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) *
               static_cast<std::size_t>(dims[2]);
    }

    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(dims[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(z));
    }

    void validate() const;

    // dims equal and spacings agree within relative tolerance 1e-6.
    bool compatible_with(const GridMeta& other) const;

    bool operator==(const GridMeta& other) const = default;
};

void require_compatible(const GridMeta& a, const GridMeta& b, const char* context);

// 3D scalar field; carrier for uncertainty maps, distance fields and smoothed maps.
class ScalarGrid {
public:
    ScalarGrid() = default;
    ScalarGrid(GridMeta meta, std::vector<float> values);

    const GridMeta& meta() const { return meta_; }
    std::span<const float> values() const { return values_; }
    float at(int x, int y, int z) const { return values_[meta_.index(x, y, z)]; }
    std::size_t size() const { return values_.size(); }

private:
    GridMeta meta_{};
    std::vector<float> values_;
};

// 3D binary mask (ground truth / prediction / error indicator / surface / region).
class BinaryGrid {
public:
    BinaryGrid() = default;
    BinaryGrid(GridMeta meta, std::vector<std::uint8_t> values);

    const GridMeta& meta() const { return meta_; }
    std::span<const std::uint8_t> values() const { return values_; }
    std::uint8_t at(int x, int y, int z) const { return values_[meta_.index(x, y, z)]; }
    std::size_t size() const { return values_.size(); }
    std::int64_t count_set() const;

private:
    GridMeta meta_{};
    std::vector<std::uint8_t> values_;
};

// 3D class-label field. Labels must be < class_count.
class LabelGrid {
public:
    LabelGrid() = default;
    LabelGrid(GridMeta meta, std::vector<std::uint16_t> values, int class_count);

    const GridMeta& meta() const { return meta_; }
    std::span<const std::uint16_t> values() const { return values_; }
    std::uint16_t at(int x, int y, int z) const { return values_[meta_.index(x, y, z)]; }
    std::size_t size() const { return values_.size(); }
    int class_count() const { return class_count_; }

private:
    GridMeta meta_{};
    std::vector<std::uint16_t> values_;
    int class_count_ = 0;
};

// A ScalarGrid constrained to [0, 1].
class UncertaintyGrid {
public:
    UncertaintyGrid() = default;
    explicit UncertaintyGrid(ScalarGrid grid);

    const ScalarGrid& grid() const { return grid_; }
    const GridMeta& meta() const { return grid_.meta(); }
    std::span<const float> values() const { return grid_.values(); }
    std::size_t size() const { return grid_.size(); }

private:
    ScalarGrid grid_;
};

// Voxel-wise label disagreement between prediction and ground truth.
BinaryGrid error_map(const LabelGrid& pred, const LabelGrid& gt);

enum class NormalizeMethod { MinMax, Clamp, Identity };

UncertaintyGrid normalize_uncertainty(const ScalarGrid& raw, NormalizeMethod method);

// Voxels whose label belongs to `classes`.
BinaryGrid foreground_mask(const LabelGrid& labels, const std::set<int>& classes);

}  // namespace segunc
