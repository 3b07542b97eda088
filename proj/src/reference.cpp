#include "segunc/reference.hpp"

#include <algorithm>
#include <cmath>

namespace segunc::reference {

namespace {

struct Voxel {
    int x, y, z;
};

std::vector<Voxel> set_voxels(const BinaryGrid& grid) {
    std::vector<Voxel> out;
    const GridMeta& meta = grid.meta();
    for (int z = 0; z < meta.dims[2]; ++z)
        for (int y = 0; y < meta.dims[1]; ++y)
            for (int x = 0; x < meta.dims[0]; ++x)
                if (grid.at(x, y, z)) out.push_back({x, y, z});
    return out;
}

double squared_mm(const Voxel& a, const Voxel& b, const GridMeta& meta) {
    const double dx = (a.x - b.x) * meta.spacing[0];
    const double dy = (a.y - b.y) * meta.spacing[1];
    const double dz = (a.z - b.z) * meta.spacing[2];
    return dx * dx + dy * dy + dz * dz;
}

double percentile_linear(std::vector<double> values, double p) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return values[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return values[n - 1];
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

int reflect_fold(int j, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    j %= period;
    if (j < 0) j += period;
    return j < n ? j : period - 1 - j;
}

}  // namespace

ScalarGrid distance_field_bruteforce(const BinaryGrid& surface) {
    if (surface.count_set() == 0)
        fail(ErrorCode::EmptySurface, "distance field requires a non-empty surface");
    const GridMeta& meta = surface.meta();
    const std::vector<Voxel> sites = set_voxels(surface);
    std::vector<float> out(surface.size());
    for (int z = 0; z < meta.dims[2]; ++z) {
        for (int y = 0; y < meta.dims[1]; ++y) {
            for (int x = 0; x < meta.dims[0]; ++x) {
                const Voxel v{x, y, z};
                double best = std::numeric_limits<double>::infinity();
                for (const Voxel& s : sites) best = std::min(best, squared_mm(v, s, meta));
                out[meta.index(x, y, z)] = static_cast<float>(std::sqrt(best));
            }
        }
    }
    return ScalarGrid(meta, std::move(out));
}

BinaryGrid surface_bruteforce(const BinaryGrid& mask) {
    const GridMeta& meta = mask.meta();
    std::vector<std::uint8_t> out(mask.size(), 0);
    const int offs[6][3] = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
    for (int z = 0; z < meta.dims[2]; ++z) {
        for (int y = 0; y < meta.dims[1]; ++y) {
            for (int x = 0; x < meta.dims[0]; ++x) {
                if (!mask.at(x, y, z)) continue;
                bool exposed = false;
                for (const auto& o : offs) {
                    const int nx = x + o[0], ny = y + o[1], nz = z + o[2];
                    if (nx < 0 || ny < 0 || nz < 0 || nx >= meta.dims[0] || ny >= meta.dims[1] ||
                        nz >= meta.dims[2] || !mask.at(nx, ny, nz)) {
                        exposed = true;
                        break;
                    }
                }
                if (exposed) out[meta.index(x, y, z)] = 1;
            }
        }
    }
    return BinaryGrid(meta, std::move(out));
}

double hd95_bruteforce(const BinaryGrid& surface_a, const BinaryGrid& surface_b) {
    const GridMeta& meta = surface_a.meta();
    const std::vector<Voxel> a = set_voxels(surface_a);
    const std::vector<Voxel> b = set_voxels(surface_b);
    if (a.empty() || b.empty()) fail(ErrorCode::EmptySurface, "hd95 requires non-empty surfaces");
    std::vector<double> da, db;
    da.reserve(a.size());
    db.reserve(b.size());
    for (const Voxel& p : a) {
        double best = std::numeric_limits<double>::infinity();
        for (const Voxel& q : b) best = std::min(best, squared_mm(p, q, meta));
        da.push_back(std::sqrt(best));
    }
    for (const Voxel& q : b) {
        double best = std::numeric_limits<double>::infinity();
        for (const Voxel& p : a) best = std::min(best, squared_mm(q, p, meta));
        db.push_back(std::sqrt(best));
    }
    return std::max(percentile_linear(std::move(da), 0.95), percentile_linear(std::move(db), 0.95));
}

ScalarGrid gaussian_smooth_dense(const ScalarGrid& grid, const SmoothingSpec& spec) {
    const GridMeta& meta = grid.meta();
    const std::array<double, 3> sigmas = sigma_in_voxels(spec, meta);
    const std::vector<double> kx = gaussian_kernel_1d(sigmas[0], spec.truncation);
    const std::vector<double> ky = gaussian_kernel_1d(sigmas[1], spec.truncation);
    const std::vector<double> kz = gaussian_kernel_1d(sigmas[2], spec.truncation);
    const int rx = static_cast<int>(kx.size() / 2);
    const int ry = static_cast<int>(ky.size() / 2);
    const int rz = static_cast<int>(kz.size() / 2);
    std::vector<float> out(grid.size());
    for (int z = 0; z < meta.dims[2]; ++z) {
        for (int y = 0; y < meta.dims[1]; ++y) {
            for (int x = 0; x < meta.dims[0]; ++x) {
                double acc = 0.0;
                for (int tz = -rz; tz <= rz; ++tz) {
                    const int sz = reflect_fold(z - tz, meta.dims[2]);
                    for (int ty = -ry; ty <= ry; ++ty) {
                        const int sy = reflect_fold(y - ty, meta.dims[1]);
                        for (int tx = -rx; tx <= rx; ++tx) {
                            const int sx = reflect_fold(x - tx, meta.dims[0]);
                            acc += kz[tz + rz] * ky[ty + ry] * kx[tx + rx] *
                                   static_cast<double>(grid.at(sx, sy, sz));
                        }
                    }
                }
                out[meta.index(x, y, z)] = static_cast<float>(acc);
            }
        }
    }
    return ScalarGrid(meta, std::move(out));
}

double space_dense(const UncertaintyGrid& u, const BinaryGrid& err, const SmoothingSpec& spec) {
    std::vector<float> err_real(err.values().begin(), err.values().end());
    const ScalarGrid su = gaussian_smooth_dense(u.grid(), spec);
    const ScalarGrid se = gaussian_smooth_dense(ScalarGrid(err.meta(), std::move(err_real)), spec);
    double acc = 0.0;
    const auto a = su.values();
    const auto b = se.values();
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    return acc / static_cast<double>(a.size());
}

}  // namespace segunc::reference
