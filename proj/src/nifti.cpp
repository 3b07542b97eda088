#include "segunc/nifti.hpp"

#include <zlib.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace segunc {

namespace {

#pragma pack(push, 1)
struct Nifti1Header {
    std::int32_t sizeof_hdr;
    char data_type[10];
    char db_name[18];
    std::int32_t extents;
    std::int16_t session_error;
    char regular;
    char dim_info;
    std::int16_t dim[8];
    float intent_p1, intent_p2, intent_p3;
    std::int16_t intent_code;
    std::int16_t datatype;
    std::int16_t bitpix;
    std::int16_t slice_start;
    float pixdim[8];
    float vox_offset;
    float scl_slope;
    float scl_inter;
    std::int16_t slice_end;
    char slice_code;
    char xyzt_units;
    float cal_max, cal_min;
    float slice_duration;
    float toffset;
    std::int32_t glmax, glmin;
    char descrip[80];
    char aux_file[24];
    std::int16_t qform_code, sform_code;
    float quatern_b, quatern_c, quatern_d;
    float qoffset_x, qoffset_y, qoffset_z;
    float srow_x[4], srow_y[4], srow_z[4];
    char intent_name[16];
    char magic[4];
};
#pragma pack(pop)
static_assert(sizeof(Nifti1Header) == 348, "NIfTI-1 header must be 348 bytes");

constexpr std::int16_t kDtUint8 = 2;
constexpr std::int16_t kDtInt16 = 4;
constexpr std::int16_t kDtInt32 = 8;
constexpr std::int16_t kDtFloat32 = 16;
constexpr std::int16_t kDtFloat64 = 64;

struct GzReader {
    gzFile file = nullptr;

    explicit GzReader(const std::string& path) {
        file = gzopen(path.c_str(), "rb");
        if (!file) fail(ErrorCode::IoFailure, "cannot open " + path);
    }
    ~GzReader() {
        if (file) gzclose(file);
    }
    GzReader(const GzReader&) = delete;
    GzReader& operator=(const GzReader&) = delete;

    std::size_t read(void* dst, std::size_t bytes) {
        const int got = gzread(file, dst, static_cast<unsigned>(bytes));
        return got < 0 ? 0 : static_cast<std::size_t>(got);
    }

    void skip(std::size_t bytes) {
        std::vector<char> scratch(std::min<std::size_t>(bytes, 65536));
        while (bytes > 0) {
            const std::size_t chunk = std::min(bytes, scratch.size());
            if (read(scratch.data(), chunk) != chunk)
                fail(ErrorCode::TruncatedPayload, "file ends before the voxel payload");
            bytes -= chunk;
        }
    }
};

template <typename T>
void decode_payload(const std::vector<char>& raw, std::vector<double>& out) {
    const std::size_t n = raw.size() / sizeof(T);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
        out[i] = static_cast<double>(v);
    }
}

}  // namespace

LoadedVolume read_nifti1(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::IoFailure, "no such file: " + path);
    GzReader in(path);

    Nifti1Header hdr{};
    if (in.read(&hdr, sizeof(hdr)) != sizeof(hdr))
        fail(ErrorCode::BadMagic, "file shorter than a NIfTI-1 header: " + path);
    if (hdr.sizeof_hdr != 348)
        fail(ErrorCode::BadMagic, "sizeof_hdr != 348 (byte-swapped or not NIfTI-1): " + path);
    if (std::memcmp(hdr.magic, "n+1", 4) != 0)
        fail(ErrorCode::BadMagic, "magic is not 'n+1' (two-file NIfTI unsupported): " + path);

    const int ndim = hdr.dim[0];
    if (ndim < 1 || ndim > 7) fail(ErrorCode::DimMismatch, "dim[0] out of range: " + path);
    for (int d = 4; d <= ndim; ++d)
        if (hdr.dim[d] > 1)
            fail(ErrorCode::DimMismatch, "only 3D volumes are supported: " + path);

    GridMeta meta;
    for (int d = 0; d < 3; ++d) {
        const std::int16_t extent = d < ndim ? hdr.dim[d + 1] : 1;
        if (extent < 1) fail(ErrorCode::DimMismatch, "non-positive dim: " + path);
        meta.dims[d] = extent;
        const float sp = d < ndim ? hdr.pixdim[d + 1] : 1.0f;
        meta.spacing[d] = sp > 0.0f ? static_cast<double>(sp) : 1.0;
    }

    std::size_t elem_size = 0;
    switch (hdr.datatype) {
        case kDtUint8: elem_size = 1; break;
        case kDtInt16: elem_size = 2; break;
        case kDtInt32: elem_size = 4; break;
        case kDtFloat32: elem_size = 4; break;
        case kDtFloat64: elem_size = 8; break;
        default:
            fail(ErrorCode::UnsupportedDatatype,
                 "datatype code " + std::to_string(hdr.datatype) + ": " + path);
    }

    const auto offset = static_cast<long long>(hdr.vox_offset);
    if (offset < 348) fail(ErrorCode::BadHeader, "vox_offset before header end: " + path);
    in.skip(static_cast<std::size_t>(offset) - sizeof(hdr));

    const std::size_t n = meta.voxel_count();
    std::vector<char> raw(n * elem_size);
    if (in.read(raw.data(), raw.size()) != raw.size())
        fail(ErrorCode::TruncatedPayload, "voxel payload shorter than dims require: " + path);

    LoadedVolume volume;
    volume.meta = meta;
    switch (hdr.datatype) {
        case kDtUint8: decode_payload<std::uint8_t>(raw, volume.values); break;
        case kDtInt16: decode_payload<std::int16_t>(raw, volume.values); break;
        case kDtInt32: decode_payload<std::int32_t>(raw, volume.values); break;
        case kDtFloat32: decode_payload<float>(raw, volume.values); break;
        case kDtFloat64: decode_payload<double>(raw, volume.values); break;
    }

    if (hdr.scl_slope != 0.0f && (hdr.scl_slope != 1.0f || hdr.scl_inter != 0.0f)) {
        const double slope = hdr.scl_slope;
        const double inter = hdr.scl_inter;
        for (double& v : volume.values) v = v * slope + inter;
    }
    for (double v : volume.values)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "volume contains NaN or Inf: " + path);
    return volume;
}

namespace {

Nifti1Header make_header(const GridMeta& meta, std::int16_t datatype, std::int16_t bitpix) {
    Nifti1Header hdr{};
    hdr.sizeof_hdr = 348;
    hdr.dim[0] = 3;
    for (int d = 0; d < 3; ++d) hdr.dim[d + 1] = static_cast<std::int16_t>(meta.dims[d]);
    for (int d = 4; d < 8; ++d) hdr.dim[d] = 1;
    hdr.datatype = datatype;
    hdr.bitpix = bitpix;
    hdr.pixdim[0] = 1.0f;
    for (int d = 0; d < 3; ++d) hdr.pixdim[d + 1] = static_cast<float>(meta.spacing[d]);
    hdr.vox_offset = 352.0f;
    hdr.scl_slope = 0.0f;
    hdr.scl_inter = 0.0f;
    hdr.xyzt_units = 2;  // millimetres
    std::memcpy(hdr.magic, "n+1", 4);
    return hdr;
}

void write_blob(const std::string& path, const Nifti1Header& hdr, const void* payload,
                std::size_t payload_bytes) {
    const char extender[4] = {0, 0, 0, 0};
    if (path.size() > 3 && path.substr(path.size() - 3) == ".gz") {
        gzFile out = gzopen(path.c_str(), "wb");
        if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
        bool ok = gzwrite(out, &hdr, sizeof(hdr)) == static_cast<int>(sizeof(hdr)) &&
                  gzwrite(out, extender, 4) == 4 &&
                  gzwrite(out, payload, static_cast<unsigned>(payload_bytes)) ==
                      static_cast<int>(payload_bytes);
        gzclose(out);
        if (!ok) fail(ErrorCode::IoFailure, "short write to " + path);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
    out.write(reinterpret_cast<const char*>(&hdr), sizeof(hdr));
    out.write(extender, 4);
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace

void write_nifti1(const std::string& path, const ScalarGrid& grid) {
    const Nifti1Header hdr = make_header(grid.meta(), kDtFloat32, 32);
    write_blob(path, hdr, grid.values().data(), grid.values().size() * sizeof(float));
}

void write_nifti1(const std::string& path, const LabelGrid& labels) {
    if (labels.class_count() > 256)
        fail(ErrorCode::UnsupportedDatatype, "label writer supports at most 256 classes");
    std::vector<std::uint8_t> payload(labels.values().begin(), labels.values().end());
    const Nifti1Header hdr = make_header(labels.meta(), kDtUint8, 8);
    write_blob(path, hdr, payload.data(), payload.size());
}

}  // namespace segunc
