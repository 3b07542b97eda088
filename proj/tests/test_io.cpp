#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>

#include "segunc/phantom.hpp"
#include "segunc/volume_io.hpp"
#include "test_util.hpp"

using namespace segunc;
using namespace segunc::test;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;

    TempDir() {
        path = fs::temp_directory_path() /
               ("segunc_io_" + std::to_string(::getpid()) + "_" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }

    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::vector<char> read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::vector<char>((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
}

void write_bytes(const std::string& path, const std::vector<char>& bytes) {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an error");
    return ErrorCode::InvalidInput;
}

// 348-byte header + 4-byte extender + float64 payload, scl_slope applied
std::vector<char> nifti_f64_fixture(float slope, float inter) {
    std::vector<char> bytes(352 + 3 * sizeof(double), 0);
    const std::int32_t sizeof_hdr = 348;
    std::memcpy(bytes.data(), &sizeof_hdr, 4);
    const std::int16_t dim[8] = {3, 3, 1, 1, 1, 1, 1, 1};
    std::memcpy(bytes.data() + 40, dim, sizeof(dim));
    const std::int16_t datatype = 64, bitpix = 64;
    std::memcpy(bytes.data() + 70, &datatype, 2);
    std::memcpy(bytes.data() + 72, &bitpix, 2);
    const float pixdim[8] = {1.0f, 2.0f, 1.0f, 1.5f, 0, 0, 0, 0};
    std::memcpy(bytes.data() + 76, pixdim, sizeof(pixdim));
    const float vox_offset = 352.0f;
    std::memcpy(bytes.data() + 108, &vox_offset, 4);
    std::memcpy(bytes.data() + 112, &slope, 4);
    std::memcpy(bytes.data() + 116, &inter, 4);
    std::memcpy(bytes.data() + 344, "n+1", 4);
    const double payload[3] = {1.5, -2.0, 4.25};
    std::memcpy(bytes.data() + 352, payload, sizeof(payload));
    return bytes;
}

}  // namespace

TEST_CASE("NIfTI round trip is bit exact for scalars and labels") {
    TempDir tmp;
    const PhantomCase c = [&] {
        PhantomConfig cfg;
        cfg.dims = {24, 20, 16};
        cfg.spacing = {0.8, 1.0, 2.5};
        cfg.semi_axis_min = 3.0;
        cfg.semi_axis_max = 4.0;
        cfg.center_jitter = 1.0;
        cfg.perturbation_amplitude = 1.0;
        cfg.seed = 7;
        return make_phantom(cfg, 0);
    }();

    for (const char* ext : {"nii", "nii.gz"}) {
        const std::string spath = tmp.file(std::string("map.") + ext);
        save_scalar(spath, c.clean.grid());
        const ScalarGrid back = load_scalar(spath);
        CHECK(back.meta().dims == c.clean.meta().dims);
        for (int k = 0; k < 3; ++k)
            CHECK(back.meta().spacing[k] ==
                  doctest::Approx(c.clean.meta().spacing[k]).epsilon(1e-6));
        CHECK(std::equal(back.values().begin(), back.values().end(), c.clean.values().begin()));

        const std::string lpath = tmp.file(std::string("labels.") + ext);
        save_labels(lpath, c.gt);
        const LabelGrid lback = load_labels(lpath);
        CHECK(std::equal(lback.values().begin(), lback.values().end(), c.gt.values().begin()));
    }
}

TEST_CASE("NIfTI reader applies scl_slope and scl_inter") {
    TempDir tmp;
    const std::string path = tmp.file("scaled.nii");
    write_bytes(path, nifti_f64_fixture(2.0f, 0.0f));
    const LoadedVolume v = read_nifti1(path);
    CHECK(v.meta.dims == std::array<int, 3>{3, 1, 1});
    CHECK(v.meta.spacing[0] == doctest::Approx(2.0));
    CHECK(v.meta.spacing[2] == doctest::Approx(1.5));
    CHECK(v.values[0] == doctest::Approx(3.0));
    CHECK(v.values[1] == doctest::Approx(-4.0));
    CHECK(v.values[2] == doctest::Approx(8.5));

    const std::string plain = tmp.file("plain.nii");
    write_bytes(plain, nifti_f64_fixture(0.0f, 0.0f));  // slope 0 means unscaled
    CHECK(read_nifti1(plain).values[0] == doctest::Approx(1.5));
}

TEST_CASE("malformed NIfTI files are rejected with typed errors") {
    TempDir tmp;
    SUBCASE("wrong sizeof_hdr") {
        auto bytes = nifti_f64_fixture(0, 0);
        const std::int32_t bad = 1234;
        std::memcpy(bytes.data(), &bad, 4);
        const std::string p = tmp.file("bad_hdr.nii");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_nifti1(p); }) == ErrorCode::BadMagic);
    }
    SUBCASE("wrong magic") {
        auto bytes = nifti_f64_fixture(0, 0);
        std::memcpy(bytes.data() + 344, "ni1", 4);
        const std::string p = tmp.file("bad_magic.nii");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_nifti1(p); }) == ErrorCode::BadMagic);
    }
    SUBCASE("unsupported datatype") {
        auto bytes = nifti_f64_fixture(0, 0);
        const std::int16_t complex64 = 32;
        std::memcpy(bytes.data() + 70, &complex64, 2);
        const std::string p = tmp.file("bad_dtype.nii");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_nifti1(p); }) == ErrorCode::UnsupportedDatatype);
    }
    SUBCASE("truncated payload") {
        auto bytes = nifti_f64_fixture(0, 0);
        bytes.resize(352 + 8);  // one of three doubles
        const std::string p = tmp.file("short.nii");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_nifti1(p); }) == ErrorCode::TruncatedPayload);
    }
    SUBCASE("4D volume") {
        auto bytes = nifti_f64_fixture(0, 0);
        const std::int16_t dim[8] = {4, 3, 1, 1, 2, 1, 1, 1};
        std::memcpy(bytes.data() + 40, dim, sizeof(dim));
        const std::string p = tmp.file("fourd.nii");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_nifti1(p); }) == ErrorCode::DimMismatch);
    }
    SUBCASE("missing file") {
        CHECK(code_of([&] { read_nifti1(tmp.file("absent.nii")); }) == ErrorCode::IoFailure);
    }
}

TEST_CASE("NPY fixture with known bytes decodes exactly") {
    TempDir tmp;
    // 2x3x4 <f4 C-order, shape (nz=2, ny=3, nx=4)
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (2, 3, 4), }";
    const std::size_t total = 10 + header.size() + 1;
    header.append((total + 63) / 64 * 64 - total, ' ');
    header.push_back('\n');
    std::vector<char> bytes;
    const char magic[8] = {'\x93', 'N', 'U', 'M', 'P', 'Y', 1, 0};
    bytes.insert(bytes.end(), magic, magic + 8);
    const std::uint16_t hlen = static_cast<std::uint16_t>(header.size());
    bytes.push_back(static_cast<char>(hlen & 0xff));
    bytes.push_back(static_cast<char>(hlen >> 8));
    bytes.insert(bytes.end(), header.begin(), header.end());
    for (int i = 0; i < 24; ++i) {
        const float v = 0.25f * static_cast<float>(i);
        const char* raw = reinterpret_cast<const char*>(&v);
        bytes.insert(bytes.end(), raw, raw + 4);
    }
    const std::string path = tmp.file("vol.npy");
    write_bytes(path, bytes);

    const LoadedVolume v = read_npy(path);
    CHECK(v.meta.dims == std::array<int, 3>{4, 3, 2});
    REQUIRE(v.values.size() == 24);
    for (int i = 0; i < 24; ++i) CHECK(v.values[i] == doctest::Approx(0.25 * i));
}

TEST_CASE("malformed NPY files are rejected with typed errors") {
    TempDir tmp;
    SUBCASE("bad magic") {
        const std::string p = tmp.file("bad.npy");
        write_bytes(p, {'N', 'O', 'P', 'E', '!', '!', 1, 0});
        CHECK(code_of([&] { read_npy(p); }) == ErrorCode::BadMagic);
    }
    SUBCASE("fortran order") {
        std::string header = "{'descr': '<f4', 'fortran_order': True, 'shape': (2, 2, 2), }\n";
        std::vector<char> bytes = {'\x93', 'N', 'U', 'M', 'P', 'Y', 1, 0};
        bytes.push_back(static_cast<char>(header.size() & 0xff));
        bytes.push_back(static_cast<char>(header.size() >> 8));
        bytes.insert(bytes.end(), header.begin(), header.end());
        bytes.resize(bytes.size() + 32, 0);
        const std::string p = tmp.file("fortran.npy");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_npy(p); }) == ErrorCode::FortranOrderUnsupported);
    }
    SUBCASE("2D shape") {
        std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (4, 4), }\n";
        std::vector<char> bytes = {'\x93', 'N', 'U', 'M', 'P', 'Y', 1, 0};
        bytes.push_back(static_cast<char>(header.size() & 0xff));
        bytes.push_back(static_cast<char>(header.size() >> 8));
        bytes.insert(bytes.end(), header.begin(), header.end());
        bytes.resize(bytes.size() + 64, 0);
        const std::string p = tmp.file("flat.npy");
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_npy(p); }) == ErrorCode::DimMismatch);
    }
    SUBCASE("truncated payload") {
        TempDir tmp2;
        const ScalarGrid g = random_scalar(meta(4, 4, 4), 3);
        const std::string p = tmp2.file("trunc.npy");
        save_scalar(p, g);
        auto bytes = read_bytes(p);
        bytes.resize(bytes.size() - 16);
        write_bytes(p, bytes);
        CHECK(code_of([&] { read_npy(p); }) == ErrorCode::TruncatedPayload);
    }
}

TEST_CASE("NPY round trip preserves values and sidecar spacing") {
    TempDir tmp;
    const GridMeta m = meta(6, 5, 4, 0.7, 1.1, 2.3);
    const ScalarGrid g = random_scalar(m, 17);
    const std::string path = tmp.file("grid.npy");
    save_scalar(path, g);
    std::ofstream side(tmp.file("grid.json"));
    side << "{\"spacing\": [0.7, 1.1, 2.3]}";
    side.close();
    const ScalarGrid back = load_scalar(path);
    CHECK(back.meta().dims == m.dims);
    CHECK(back.meta().spacing[2] == doctest::Approx(2.3));
    CHECK(std::equal(back.values().begin(), back.values().end(), g.values().begin()));
}

TEST_CASE("raw volumes need a sidecar and round trip exactly") {
    TempDir tmp;
    const GridMeta m = meta(5, 4, 3, 1.0, 1.0, 2.0);
    const ScalarGrid g = random_scalar(m, 23);
    const std::string path = tmp.file("vol.raw");
    save_scalar(path, g);
    const ScalarGrid back = load_scalar(path);
    CHECK(back.meta().dims == m.dims);
    CHECK(back.meta().spacing[2] == doctest::Approx(2.0));
    CHECK(std::equal(back.values().begin(), back.values().end(), g.values().begin()));

    SUBCASE("missing sidecar") {
        fs::remove(tmp.file("vol.json"));
        CHECK(code_of([&] { load_scalar(path); }) == ErrorCode::BadHeader);
    }
    SUBCASE("short payload") {
        auto bytes = read_bytes(path);
        bytes.resize(bytes.size() - 8);
        write_bytes(path, bytes);
        CHECK(code_of([&] { load_scalar(path); }) == ErrorCode::TruncatedPayload);
    }
}

TEST_CASE("labels must be integral") {
    TempDir tmp;
    const GridMeta m = meta(2, 1, 1);
    save_scalar(tmp.file("frac.nii"), scalar(m, {0.0f, 0.5f}));
    CHECK(code_of([&] { load_labels(tmp.file("frac.nii")); }) == ErrorCode::InvalidInput);
    save_scalar(tmp.file("ok.nii"), scalar(m, {0.0f, 2.0f}));
    const LabelGrid l = load_labels(tmp.file("ok.nii"));
    CHECK(l.class_count() == 3);
}

TEST_CASE("manifest round trip resolves relative paths") {
    TempDir tmp;
    std::vector<CaseManifest> cases(2);
    cases[0].id = "case_000";
    cases[0].gt_path = tmp.file("case_000_gt.nii");
    cases[0].pred_path = tmp.file("case_000_pred.nii");
    cases[0].maps["clean"] = tmp.file("case_000_clean.nii");
    cases[0].maps["noisy"] = tmp.file("case_000_noisy.nii");
    cases[0].radius_mm = 2.5;
    cases[1] = cases[0];
    cases[1].id = "case_001";
    cases[1].radius_mm.reset();
    cases[1].classes = std::set<int>{1, 2};

    const std::string path = tmp.file("manifest.json");
    write_manifest(path, cases);
    const std::vector<CaseManifest> back = read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].id == "case_000");
    CHECK(back[0].gt_path == tmp.file("case_000_gt.nii"));
    CHECK(back[0].maps.at("noisy") == tmp.file("case_000_noisy.nii"));
    REQUIRE(back[0].radius_mm.has_value());
    CHECK(*back[0].radius_mm == doctest::Approx(2.5));
    REQUIRE(back[1].classes.has_value());
    CHECK(back[1].classes->count(2) == 1);

    SUBCASE("malformed manifest JSON is rejected") {
        std::ofstream out(tmp.file("broken.json"));
        out << "{ not json";
        out.close();
        CHECK(code_of([&] { read_manifest(tmp.file("broken.json")); }) == ErrorCode::BadHeader);
    }
}

TEST_CASE("unknown extensions are rejected") {
    CHECK(code_of([&] { load_scalar("volume.dcm"); }) == ErrorCode::InvalidInput);
}
