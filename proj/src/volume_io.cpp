#include "segunc/volume_io.hpp"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace segunc {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string sidecar_path(const std::string& path) {
    fs::path p(path);
    p.replace_extension(".json");
    return p.string();
}

// Optional {"dims": [...], "spacing": [...]} sidecar.
struct Sidecar {
    std::optional<std::array<int, 3>> dims;
    std::optional<std::array<double, 3>> spacing;
};

Sidecar read_sidecar(const std::string& path) {
    Sidecar out;
    if (!fs::exists(path)) return out;
    std::ifstream in(path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorCode::BadHeader, "malformed sidecar JSON " + path + ": " + e.what());
    }
    if (j.contains("dims")) {
        const auto& d = j.at("dims");
        if (!d.is_array() || d.size() != 3) fail(ErrorCode::BadHeader, "sidecar dims must have 3 entries");
        out.dims = {d[0].get<int>(), d[1].get<int>(), d[2].get<int>()};
    }
    if (j.contains("spacing")) {
        const auto& s = j.at("spacing");
        if (!s.is_array() || s.size() != 3)
            fail(ErrorCode::BadHeader, "sidecar spacing must have 3 entries");
        out.spacing = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
    }
    return out;
}

LoadedVolume read_raw_f32(const std::string& path) {
    if (!fs::exists(path)) fail(ErrorCode::IoFailure, "no such file: " + path);
    const Sidecar side = read_sidecar(sidecar_path(path));
    if (!side.dims) fail(ErrorCode::BadHeader, "raw volume needs a sidecar JSON with dims: " + path);
    GridMeta meta;
    meta.dims = *side.dims;
    meta.spacing = side.spacing.value_or(std::array<double, 3>{1.0, 1.0, 1.0});
    meta.validate();

    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoFailure, "cannot open " + path);
    std::vector<char> raw(meta.voxel_count() * sizeof(float));
    if (!in.read(raw.data(), static_cast<std::streamsize>(raw.size())))
        fail(ErrorCode::TruncatedPayload, "raw payload shorter than dims require: " + path);

    LoadedVolume volume;
    volume.meta = meta;
    volume.values.resize(meta.voxel_count());
    for (std::size_t i = 0; i < volume.values.size(); ++i) {
        float v;
        std::memcpy(&v, raw.data() + i * sizeof(float), sizeof(float));
        volume.values[i] = v;
    }
    for (double v : volume.values)
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "volume contains NaN or Inf: " + path);
    return volume;
}

void write_raw_f32(const std::string& path, const ScalarGrid& grid) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
    out.write(reinterpret_cast<const char*>(grid.values().data()),
              static_cast<std::streamsize>(grid.values().size() * sizeof(float)));
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path);
    ordered_json j;
    j["dims"] = grid.meta().dims;
    j["spacing"] = grid.meta().spacing;
    std::ofstream side(sidecar_path(path));
    side << j.dump(2) << "\n";
}

}  // namespace

VolumeFormat format_for_path(const std::string& path) {
    if (ends_with(path, ".nii") || ends_with(path, ".nii.gz")) return VolumeFormat::Nifti1;
    if (ends_with(path, ".npy")) return VolumeFormat::Npy;
    if (ends_with(path, ".raw")) return VolumeFormat::RawF32;
    fail(ErrorCode::InvalidInput, "unrecognized volume extension: " + path);
}

LoadedVolume load_volume(const std::string& path) {
    switch (format_for_path(path)) {
        case VolumeFormat::Nifti1: return read_nifti1(path);
        case VolumeFormat::Npy: {
            LoadedVolume v = read_npy(path);
            const Sidecar side = read_sidecar(sidecar_path(path));
            if (side.spacing) {
                v.meta.spacing = *side.spacing;
                v.meta.validate();
            }
            return v;
        }
        case VolumeFormat::RawF32: return read_raw_f32(path);
    }
    fail(ErrorCode::InvalidInput, "unreachable");
}

ScalarGrid to_scalar(const LoadedVolume& volume) {
    std::vector<float> values(volume.values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        values[i] = static_cast<float>(volume.values[i]);
    return ScalarGrid(volume.meta, std::move(values));
}

LabelGrid to_labels(const LoadedVolume& volume) {
    std::vector<std::uint16_t> values(volume.values.size());
    int max_label = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = volume.values[i];
        const double rounded = std::nearbyint(v);
        if (std::abs(v - rounded) > 1e-6 || rounded < 0.0 || rounded > 65535.0)
            fail(ErrorCode::InvalidInput, "label volume has non-integer or out-of-range values");
        values[i] = static_cast<std::uint16_t>(rounded);
        max_label = std::max(max_label, static_cast<int>(rounded));
    }
    return LabelGrid(volume.meta, std::move(values), max_label + 1);
}

ScalarGrid load_scalar(const std::string& path) { return to_scalar(load_volume(path)); }

LabelGrid load_labels(const std::string& path) { return to_labels(load_volume(path)); }

void save_scalar(const std::string& path, const ScalarGrid& grid) {
    switch (format_for_path(path)) {
        case VolumeFormat::Nifti1: write_nifti1(path, grid); return;
        case VolumeFormat::Npy: write_npy(path, grid); return;
        case VolumeFormat::RawF32: write_raw_f32(path, grid); return;
    }
}

void save_labels(const std::string& path, const LabelGrid& labels) {
    switch (format_for_path(path)) {
        case VolumeFormat::Nifti1: write_nifti1(path, labels); return;
        case VolumeFormat::Npy: write_npy(path, labels); return;
        case VolumeFormat::RawF32: {
            std::vector<float> values(labels.values().begin(), labels.values().end());
            write_raw_f32(path, ScalarGrid(labels.meta(), std::move(values)));
            return;
        }
    }
}

std::vector<CaseManifest> read_manifest(const std::string& path) {
    if (!fs::exists(path)) fail(ErrorCode::IoFailure, "no such manifest: " + path);
    std::ifstream in(path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorCode::BadHeader, "malformed manifest JSON: " + std::string(e.what()));
    }
    if (!j.contains("cases") || !j.at("cases").is_array())
        fail(ErrorCode::BadHeader, "manifest must contain a 'cases' array");

    const fs::path base = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
        return fs::path(p).is_absolute() ? p : (base / p).string();
    };

    std::vector<CaseManifest> cases;
    for (const auto& c : j.at("cases")) {
        CaseManifest m;
        m.id = c.at("id").get<std::string>();
        m.gt_path = resolve(c.at("gt").get<std::string>());
        m.pred_path = resolve(c.at("pred").get<std::string>());
        if (!c.contains("maps") || !c.at("maps").is_object())
            fail(ErrorCode::BadHeader, "case " + m.id + " lacks a 'maps' object");
        for (const auto& [key, value] : c.at("maps").items())
            m.maps[key] = resolve(value.get<std::string>());
        if (c.contains("params")) {
            const auto& p = c.at("params");
            if (p.contains("radius_mm")) m.radius_mm = p.at("radius_mm").get<double>();
            if (p.contains("classes")) {
                std::set<int> classes;
                for (const auto& v : p.at("classes")) classes.insert(v.get<int>());
                m.classes = classes;
            }
        }
        cases.push_back(std::move(m));
    }
    if (cases.empty()) fail(ErrorCode::BadHeader, "manifest has no cases");
    return cases;
}

void write_manifest(const std::string& path, const std::vector<CaseManifest>& cases) {
    const fs::path base = fs::path(path).parent_path();
    auto relativize = [&](const std::string& p) {
        std::error_code ec;
        const fs::path rel = fs::relative(p, base, ec);
        return ec ? p : rel.string();
    };
    ordered_json j;
    j["version"] = 1;
    j["cases"] = ordered_json::array();
    for (const CaseManifest& m : cases) {
        ordered_json c;
        c["id"] = m.id;
        c["gt"] = relativize(m.gt_path);
        c["pred"] = relativize(m.pred_path);
        c["maps"] = ordered_json::object();
        for (const auto& [key, value] : m.maps) c["maps"][key] = relativize(value);
        if (m.radius_mm || m.classes) {
            ordered_json p = ordered_json::object();
            if (m.radius_mm) p["radius_mm"] = *m.radius_mm;
            if (m.classes) p["classes"] = *m.classes;
            c["params"] = p;
        }
        j["cases"].push_back(c);
    }
    std::ofstream out(path);
    if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
    out << j.dump(2) << "\n";
}

}  // namespace segunc
