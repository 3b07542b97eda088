#include "segunc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "segunc/parallel.hpp"

namespace segunc {

int worker_count() {
    int n = 0;
    if (const char* env = std::getenv("SEGUNC_THREADS"); env && *env) n = std::atoi(env);
#ifdef _OPENMP
    const int fallback = omp_get_max_threads();
#else
    const int fallback = 1;
#endif
    if (n <= 0) n = fallback;
    return std::clamp(n, 1, 1024);
}

namespace {

constexpr double kEdtInf = 1e30;

// 1D squared distance transform over samples at positions i*step
// (lower envelope of parabolas). Exact for arbitrary sample values.
void edt_line(std::span<const double> f, double step, std::span<double> out,
              std::span<int> hull, std::span<double> breaks) {
    const int n = static_cast<int>(f.size());
    int k = 0;
    hull[0] = 0;
    breaks[0] = -kEdtInf;
    breaks[1] = kEdtInf;
    for (int q = 1; q < n; ++q) {
        const double xq = q * step;
        const double fq = f[q] + xq * xq;
        double s;
        for (;;) {
            const int p = hull[k];
            const double xp = p * step;
            s = (fq - (f[p] + xp * xp)) / (2.0 * (xq - xp));
            if (s <= breaks[k]) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        hull[k] = q;
        breaks[k] = s;
        breaks[k + 1] = kEdtInf;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        const double xq = q * step;
        while (breaks[k + 1] < xq) ++k;
        const int p = hull[k];
        const double d = (q - p) * step;
        out[q] = d * d + f[p];
    }
}

struct LineLayout {
    std::size_t line_count;
    std::size_t stride;
    int length;
    // base offset of line l
    std::size_t (*base)(std::size_t l, const GridMeta& m);
};

LineLayout layout_for_axis(const GridMeta& meta, int axis) {
    const std::size_t nx = static_cast<std::size_t>(meta.dims[0]);
    const std::size_t ny = static_cast<std::size_t>(meta.dims[1]);
    const std::size_t nz = static_cast<std::size_t>(meta.dims[2]);
    switch (axis) {
        case 0:
            return {ny * nz, 1, meta.dims[0],
                    [](std::size_t l, const GridMeta& m) {
                        const std::size_t nx = static_cast<std::size_t>(m.dims[0]);
                        return l * nx;
                    }};
        case 1:
            return {nx * nz, nx, meta.dims[1],
                    [](std::size_t l, const GridMeta& m) {
                        const std::size_t nx = static_cast<std::size_t>(m.dims[0]);
                        const std::size_t ny = static_cast<std::size_t>(m.dims[1]);
                        const std::size_t x = l % nx;
                        const std::size_t z = l / nx;
                        return x + nx * ny * z;
                    }};
        default:
            return {nx * ny, nx * ny, meta.dims[2],
                    [](std::size_t l, const GridMeta& m) { return l; }};
    }
}

template <typename LineFn>
void for_each_line(const GridMeta& meta, int axis, LineFn&& fn) {
    const LineLayout lay = layout_for_axis(meta, axis);
    const auto lines = static_cast<std::int64_t>(lay.line_count);
    const int nt = worker_count();
#ifdef _OPENMP
#pragma omp parallel num_threads(nt)
#endif
    {
        std::vector<double> in_buf(lay.length);
        std::vector<double> out_buf(lay.length);
        std::vector<int> hull(lay.length);
        std::vector<double> breaks(lay.length + 1);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
        for (std::int64_t l = 0; l < lines; ++l) {
            fn(lay.base(static_cast<std::size_t>(l), meta), lay.stride, lay.length, in_buf,
               out_buf, hull, breaks);
        }
    }
    (void)nt;
}

void edt_pass(std::vector<double>& field, const GridMeta& meta, int axis) {
    const double step = meta.spacing[axis];
    for_each_line(meta, axis,
                  [&](std::size_t base, std::size_t stride, int length, std::vector<double>& in,
                      std::vector<double>& out, std::vector<int>& hull,
                      std::vector<double>& breaks) {
                      for (int i = 0; i < length; ++i) in[i] = field[base + stride * i];
                      edt_line(std::span<const double>(in.data(), length), step,
                               std::span<double>(out.data(), length),
                               std::span<int>(hull.data(), length),
                               std::span<double>(breaks.data(), length + 1));
                      for (int i = 0; i < length; ++i) field[base + stride * i] = out[i];
                  });
}

// Symmetric reflection (a b c | c b a), valid for any offset.
int reflect_index(int j, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    j %= period;
    if (j < 0) j += period;
    return j < n ? j : period - 1 - j;
}

void convolve_pass(std::vector<double>& field, const GridMeta& meta, int axis,
                   const std::vector<double>& kernel) {
    if (kernel.size() == 1) return;  // identity
    const int radius = static_cast<int>(kernel.size() / 2);
    for_each_line(meta, axis,
                  [&](std::size_t base, std::size_t stride, int length, std::vector<double>& in,
                      std::vector<double>& out, std::vector<int>&, std::vector<double>&) {
                      for (int i = 0; i < length; ++i) in[i] = field[base + stride * i];
                      for (int i = 0; i < length; ++i) {
                          double acc = 0.0;
                          for (int t = -radius; t <= radius; ++t)
                              acc += kernel[t + radius] * in[reflect_index(i - t, length)];
                          out[i] = acc;
                      }
                      for (int i = 0; i < length; ++i) field[base + stride * i] = out[i];
                  });
}

}  // namespace

void BandSpec::validate() const {
    if (edges.size() < 2) fail(ErrorCode::InvalidBandSpec, "need at least two edges");
    if (edges.front() != 0.0) fail(ErrorCode::InvalidBandSpec, "first edge must be 0");
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (std::isnan(edges[i])) fail(ErrorCode::InvalidBandSpec, "edge is NaN");
        if (i > 0 && !(edges[i] > edges[i - 1]))
            fail(ErrorCode::InvalidBandSpec, "edges must be strictly increasing");
        if (i + 1 < edges.size() && std::isinf(edges[i]))
            fail(ErrorCode::InvalidBandSpec, "only the last edge may be infinite");
    }
    if (!(weight_delta_mm > 0.0)) fail(ErrorCode::InvalidBandSpec, "weight delta must be > 0");
}

BandSpec BandSpec::default_spec() {
    return BandSpec{{0.0, 1.0, 2.0, 4.0, 8.0, std::numeric_limits<double>::infinity()}, 1.0};
}

std::int64_t BandField::assigned_count() const {
    std::int64_t n = 0;
    for (std::int64_t c : counts) n += c;
    return n;
}

void SmoothingSpec::validate() const {
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        fail(ErrorCode::InvalidSigma, "sigma must be positive and finite");
    if (!(truncation >= 0.0) || !std::isfinite(truncation))
        fail(ErrorCode::InvalidSigma, "truncation must be non-negative and finite");
}

BinaryGrid surface(const BinaryGrid& mask) {
    const GridMeta& meta = mask.meta();
    const int nx = meta.dims[0], ny = meta.dims[1], nz = meta.dims[2];
    const auto in = mask.values();
    std::vector<std::uint8_t> out(mask.size(), 0);
    const int nt = worker_count();
    (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(nt)
#endif
    for (int z = 0; z < nz; ++z) {
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) {
                const std::size_t i = meta.index(x, y, z);
                if (!in[i]) continue;
                const bool exposed =
                    x == 0 || !in[i - 1] || x == nx - 1 || !in[i + 1] ||
                    y == 0 || !in[i - static_cast<std::size_t>(nx)] ||
                    y == ny - 1 || !in[i + static_cast<std::size_t>(nx)] ||
                    z == 0 || !in[i - static_cast<std::size_t>(nx) * ny] ||
                    z == nz - 1 || !in[i + static_cast<std::size_t>(nx) * ny];
                if (exposed) out[i] = 1;
            }
        }
    }
    return BinaryGrid(meta, std::move(out));
}

std::vector<double> squared_distance_field(const BinaryGrid& surface) {
    if (surface.count_set() == 0)
        fail(ErrorCode::EmptySurface, "distance field requires a non-empty surface");
    const GridMeta& meta = surface.meta();
    std::vector<double> field(surface.size());
    const auto s = surface.values();
    for (std::size_t i = 0; i < field.size(); ++i) field[i] = s[i] ? 0.0 : kEdtInf;
    for (int axis = 0; axis < 3; ++axis) edt_pass(field, meta, axis);
    return field;
}

ScalarGrid distance_field(const BinaryGrid& surface) {
    std::vector<double> sq = squared_distance_field(surface);
    std::vector<float> out(sq.size());
    for (std::size_t i = 0; i < sq.size(); ++i) out[i] = static_cast<float>(std::sqrt(sq[i]));
    return ScalarGrid(surface.meta(), std::move(out));
}

double percentile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) fail(ErrorCode::InvalidInput, "percentile of empty sample");
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * static_cast<double>(n - 1);
    const auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

namespace {

std::vector<double> directed_surface_distances(const BinaryGrid& from, const BinaryGrid& to) {
    const std::vector<double> sq = squared_distance_field(to);
    std::vector<double> out;
    const auto v = from.values();
    for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i]) out.push_back(std::sqrt(sq[i]));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

double hd95(const BinaryGrid& surface_a, const BinaryGrid& surface_b) {
    require_compatible(surface_a.meta(), surface_b.meta(), "hd95");
    if (surface_a.count_set() == 0 || surface_b.count_set() == 0)
        fail(ErrorCode::EmptySurface, "hd95 requires two non-empty surfaces");
    const std::vector<double> da = directed_surface_distances(surface_a, surface_b);
    const std::vector<double> db = directed_surface_distances(surface_b, surface_a);
    return std::max(percentile_sorted(da, 0.95), percentile_sorted(db, 0.95));
}

BandField band_partition(const ScalarGrid& dist, const BandSpec& spec, const BinaryGrid* domain) {
    spec.validate();
    if (domain) require_compatible(dist.meta(), domain->meta(), "band_partition");
    const int bands = spec.band_count();
    BandField field;
    field.meta = dist.meta();
    field.band_index.assign(dist.size(), kBandSentinel);
    field.counts.assign(bands, 0);
    field.mean_distance_mm.assign(bands, 0.0);
    field.weights.assign(bands, 0.0);

    std::vector<double> dist_sum(bands, 0.0);
    const auto d = dist.values();
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (domain && !domain->values()[i]) continue;
        const double value = d[i];
        if (!(value >= 0.0) || !std::isfinite(value))
            fail(ErrorCode::InvalidInput, "band_partition requires finite non-negative distances");
        for (int b = 0; b < bands; ++b) {
            if (value >= spec.edges[b] && value < spec.edges[b + 1]) {
                field.band_index[i] = b;
                ++field.counts[b];
                dist_sum[b] += value;
                break;
            }
        }
    }

    double raw_sum = 0.0;
    std::vector<double> raw(bands, 0.0);
    for (int b = 0; b < bands; ++b) {
        if (field.counts[b] == 0) continue;
        field.mean_distance_mm[b] = dist_sum[b] / static_cast<double>(field.counts[b]);
        raw[b] = 1.0 / (field.mean_distance_mm[b] + spec.weight_delta_mm);
        raw_sum += raw[b];
    }
    if (raw_sum > 0.0)
        for (int b = 0; b < bands; ++b) field.weights[b] = raw[b] / raw_sum;
    return field;
}

std::array<double, 3> sigma_in_voxels(const SmoothingSpec& spec, const GridMeta& meta) {
    spec.validate();
    std::array<double, 3> out{};
    for (int k = 0; k < 3; ++k)
        out[k] = spec.unit == SigmaUnit::Mm ? spec.sigma / meta.spacing[k] : spec.sigma;
    return out;
}

std::vector<double> gaussian_kernel_1d(double sigma_voxels, double truncation) {
    if (!(sigma_voxels > 0.0) || !std::isfinite(sigma_voxels))
        fail(ErrorCode::InvalidSigma, "per-axis sigma must be positive");
    const int radius = static_cast<int>(std::ceil(truncation * sigma_voxels));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int t = -radius; t <= radius; ++t) {
        const double w = std::exp(-(static_cast<double>(t) * t) / (2.0 * sigma_voxels * sigma_voxels));
        kernel[t + radius] = w;
        sum += w;
    }
    for (double& w : kernel) w /= sum;
    return kernel;
}

ScalarGrid gaussian_smooth(const ScalarGrid& grid, const SmoothingSpec& spec) {
    const GridMeta& meta = grid.meta();
    const std::array<double, 3> sigmas = sigma_in_voxels(spec, meta);
    std::vector<double> field(grid.values().begin(), grid.values().end());
    for (int axis = 0; axis < 3; ++axis) {
        const std::vector<double> kernel = gaussian_kernel_1d(sigmas[axis], spec.truncation);
        convolve_pass(field, meta, axis, kernel);
    }
    std::vector<float> out(field.size());
    for (std::size_t i = 0; i < field.size(); ++i) out[i] = static_cast<float>(field[i]);
    return ScalarGrid(meta, std::move(out));
}

BinaryGrid region_within(const BinaryGrid& surface, double radius_mm) {
    if (!(radius_mm >= 0.0)) fail(ErrorCode::InvalidInput, "radius must be >= 0");
    const std::vector<double> sq = squared_distance_field(surface);
    std::vector<std::uint8_t> out(sq.size());
    const double r2 = radius_mm * radius_mm;
    for (std::size_t i = 0; i < sq.size(); ++i) out[i] = sq[i] <= r2 ? 1 : 0;
    return BinaryGrid(surface.meta(), std::move(out));
}

}  // namespace segunc
