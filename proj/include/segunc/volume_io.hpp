#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "segunc/nifti.hpp"
#include "segunc/npy.hpp"

namespace segunc {

enum class VolumeFormat { Nifti1, Npy, RawF32 };

// Format from extension (.nii/.nii.gz, .npy, .raw); magic bytes are verified
// by the reader on open.
VolumeFormat format_for_path(const std::string& path);

// Dispatching loader. NPY and raw volumes take spacing (and for raw, dims)
// from a sidecar JSON next to the file ("vol.raw" -> "vol.json").
LoadedVolume load_volume(const std::string& path);

ScalarGrid to_scalar(const LoadedVolume& volume);

// Values must be non-negative integers; class count is max label + 1.
LabelGrid to_labels(const LoadedVolume& volume);

ScalarGrid load_scalar(const std::string& path);
LabelGrid load_labels(const std::string& path);

void save_scalar(const std::string& path, const ScalarGrid& grid);
void save_labels(const std::string& path, const LabelGrid& labels);

// One row of a case manifest: volume paths plus optional per-case overrides.
struct CaseManifest {
    std::string id;
    std::string gt_path;
    std::string pred_path;
    std::map<std::string, std::string> maps;  // map key -> uncertainty volume path
    std::optional<double> radius_mm;
    std::optional<std::set<int>> classes;
};

// Parses a manifest JSON; relative paths are resolved against the manifest's
// directory.
std::vector<CaseManifest> read_manifest(const std::string& path);

void write_manifest(const std::string& path, const std::vector<CaseManifest>& cases);

}  // namespace segunc
