#pragma once

#include <string>
#include <vector>

#include "segunc/grid.hpp"

namespace segunc {

// A volume payload decoded to double, before role conversion.
struct LoadedVolume {
    GridMeta meta;
    std::vector<double> values;
};

// Single-file NIfTI-1 (.nii or .nii.gz), little-endian. Honors dim[1..3],
// pixdim[1..3] and scl_slope/scl_inter; orientation fields are ignored.
// Supported payloads: uint8, int16, int32, float32, float64.
LoadedVolume read_nifti1(const std::string& path);

// Minimal single-file writer (float32 payload). Compresses when the path
// ends in .gz.
void write_nifti1(const std::string& path, const ScalarGrid& grid);

// Label writer: uint8 payload (class count must be <= 256).
void write_nifti1(const std::string& path, const LabelGrid& labels);

}  // namespace segunc
