#pragma once

#include <string>

#include "segunc/nifti.hpp"

namespace segunc {

// NPY v1/v2, C-order, little-endian <f4/<f8/|u1/<i2, 3D shape (nz, ny, nx).
// Spacing defaults to (1,1,1); a sidecar JSON may override it (see volume_io).
LoadedVolume read_npy(const std::string& path);

// Writes float32 C-order with shape (nz, ny, nx).
void write_npy(const std::string& path, const ScalarGrid& grid);

void write_npy(const std::string& path, const LabelGrid& labels);

}  // namespace segunc
