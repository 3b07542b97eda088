#include "segunc/npy.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace segunc {

namespace {

const char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

// fortran_order is an unquoted Python bool
std::string extract_bool(const std::string& dict, const std::string& key) {
    const std::size_t at = dict.find("'" + key + "'");
    if (at == std::string::npos) fail(ErrorCode::BadHeader, "NPY header lacks key " + key);
    std::size_t pos = dict.find(':', at);
    if (pos == std::string::npos) fail(ErrorCode::BadHeader, "malformed NPY header");
    ++pos;
    while (pos < dict.size() && std::isspace(static_cast<unsigned char>(dict[pos]))) ++pos;
    if (dict.compare(pos, 4, "True") == 0) return "True";
    if (dict.compare(pos, 5, "False") == 0) return "False";
    return "";
}

std::string extract_quoted(const std::string& dict, const std::string& key) {
    const std::size_t at = dict.find("'" + key + "'");
    if (at == std::string::npos) fail(ErrorCode::BadHeader, "NPY header lacks key " + key);
    const std::size_t colon = dict.find(':', at);
    const std::size_t open = dict.find('\'', colon);
    const std::size_t close = dict.find('\'', open + 1);
    if (colon == std::string::npos || open == std::string::npos || close == std::string::npos)
        fail(ErrorCode::BadHeader, "malformed NPY header value for " + key);
    return dict.substr(open + 1, close - open - 1);
}

std::vector<std::size_t> extract_shape(const std::string& dict) {
    const std::size_t at = dict.find("'shape'");
    if (at == std::string::npos) fail(ErrorCode::BadHeader, "NPY header lacks shape");
    const std::size_t open = dict.find('(', at);
    const std::size_t close = dict.find(')', open);
    if (open == std::string::npos || close == std::string::npos)
        fail(ErrorCode::BadHeader, "malformed NPY shape tuple");
    std::vector<std::size_t> shape;
    std::string token;
    for (std::size_t i = open + 1; i <= close; ++i) {
        const char c = dict[i];
        if (c == ',' || c == ')') {
            if (!token.empty()) {
                shape.push_back(std::stoull(token));
                token.clear();
            }
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            token.push_back(c);
        }
    }
    return shape;
}

template <typename T>
void decode(const std::vector<char>& raw, std::vector<double>& out) {
    const std::size_t n = raw.size() / sizeof(T);
    out.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        T v;
        std::memcpy(&v, raw.data() + i * sizeof(T), sizeof(T));
        out[i] = static_cast<double>(v);
    }
}

}  // namespace

LoadedVolume read_npy(const std::string& path) {
    if (!std::filesystem::exists(path)) fail(ErrorCode::IoFailure, "no such file: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path);

    char magic[6];
    if (!in.read(magic, 6) || std::memcmp(magic, kMagic, 6) != 0)
        fail(ErrorCode::BadMagic, "not an NPY file: " + path);
    unsigned char version[2];
    if (!in.read(reinterpret_cast<char*>(version), 2))
        fail(ErrorCode::BadHeader, "truncated NPY version: " + path);
    if (version[0] != 1 && version[0] != 2)
        fail(ErrorCode::BadHeader, "unsupported NPY version " + std::to_string(version[0]));

    std::uint32_t header_len = 0;
    if (version[0] == 1) {
        std::uint16_t len16 = 0;
        if (!in.read(reinterpret_cast<char*>(&len16), 2))
            fail(ErrorCode::BadHeader, "truncated NPY header length");
        header_len = len16;
    } else {
        if (!in.read(reinterpret_cast<char*>(&header_len), 4))
            fail(ErrorCode::BadHeader, "truncated NPY header length");
    }
    std::string dict(header_len, '\0');
    if (!in.read(dict.data(), header_len)) fail(ErrorCode::BadHeader, "truncated NPY header");

    const std::string order = extract_bool(dict, "fortran_order");
    if (order == "True") fail(ErrorCode::FortranOrderUnsupported, "Fortran-order NPY: " + path);
    if (order != "False") fail(ErrorCode::BadHeader, "malformed fortran_order flag: " + path);

    const std::string descr = extract_quoted(dict, "descr");
    std::size_t elem_size = 0;
    if (descr == "<f4") elem_size = 4;
    else if (descr == "<f8") elem_size = 8;
    else if (descr == "|u1") elem_size = 1;
    else if (descr == "<i2") elem_size = 2;
    else fail(ErrorCode::UnsupportedDatatype, "NPY dtype " + descr + ": " + path);

    const std::vector<std::size_t> shape = extract_shape(dict);
    if (shape.size() != 3) fail(ErrorCode::DimMismatch, "NPY volume must be 3D: " + path);

    GridMeta meta;
    // stored (nz, ny, nx) in C order, so memory is x-fastest
    meta.dims = {static_cast<int>(shape[2]), static_cast<int>(shape[1]),
                 static_cast<int>(shape[0])};
    meta.spacing = {1.0, 1.0, 1.0};
    meta.validate();

    std::vector<char> raw(meta.voxel_count() * elem_size);
    if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
        fail(ErrorCode::TruncatedPayload, "NPY payload shorter than shape requires: " + path);

    LoadedVolume volume;
    volume.meta = meta;
    if (descr == "<f4") decode<float>(raw, volume.values);
    else if (descr == "<f8") decode<double>(raw, volume.values);
    else if (descr == "|u1") decode<std::uint8_t>(raw, volume.values);
    else decode<std::int16_t>(raw, volume.values);
    for (double v : volume.values)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "volume contains NaN or Inf: " + path);
    return volume;
}

namespace {

void write_npy_blob(const std::string& path, const GridMeta& meta, const char* descr,
                    const void* payload, std::size_t payload_bytes) {
    std::string dict = std::string("{'descr': '") + descr + "', 'fortran_order': False, 'shape': (" +
                       std::to_string(meta.dims[2]) + ", " + std::to_string(meta.dims[1]) + ", " +
                       std::to_string(meta.dims[0]) + "), }";
    // pad so magic + version + length + dict is a multiple of 64, newline-terminated
    const std::size_t base = 6 + 2 + 2;
    std::size_t total = base + dict.size() + 1;
    const std::size_t padded = (total + 63) / 64 * 64;
    dict.append(padded - total, ' ');
    dict.push_back('\n');

    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
    out.write(kMagic, 6);
    const unsigned char version[2] = {1, 0};
    out.write(reinterpret_cast<const char*>(version), 2);
    const auto len16 = static_cast<std::uint16_t>(dict.size());
    out.write(reinterpret_cast<const char*>(&len16), 2);
    out.write(dict.data(), static_cast<std::streamsize>(dict.size()));
    out.write(static_cast<const char*>(payload), static_cast<std::streamsize>(payload_bytes));
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace

void write_npy(const std::string& path, const ScalarGrid& grid) {
    write_npy_blob(path, grid.meta(), "<f4", grid.values().data(),
                   grid.values().size() * sizeof(float));
}

void write_npy(const std::string& path, const LabelGrid& labels) {
    if (labels.class_count() > 256)
        fail(ErrorCode::UnsupportedDatatype, "NPY label writer supports at most 256 classes");
    std::vector<std::uint8_t> payload(labels.values().begin(), labels.values().end());
    write_npy_blob(path, labels.meta(), "|u1", payload.data(), payload.size());
}

}  // namespace segunc
