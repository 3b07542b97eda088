#pragma once

#include <vector>

#include "segunc/geometry.hpp"
#include "segunc/grid.hpp"

// Naive direct-definition implementations kept as serial references for the
// optimized kernels. Used by the test suites and the kernel benchmark; the
// main library never calls into this namespace.
namespace segunc::reference {

// O(n * m) nearest-surface-voxel search.
ScalarGrid distance_field_bruteforce(const BinaryGrid& surface);

// Per-voxel 6-neighbor scan.
BinaryGrid surface_bruteforce(const BinaryGrid& mask);

// Exhaustive pairwise distances + percentile.
double hd95_bruteforce(const BinaryGrid& surface_a, const BinaryGrid& surface_b);

// Dense 3D convolution with the separable kernel's outer product.
ScalarGrid gaussian_smooth_dense(const ScalarGrid& grid, const SmoothingSpec& spec);

// mean |G*U - G*E| via the dense convolution above.
double space_dense(const UncertaintyGrid& u, const BinaryGrid& err, const SmoothingSpec& spec);

}  // namespace segunc::reference
