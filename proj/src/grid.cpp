#include "segunc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace segunc {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::GeometryMismatch: return "GeometryMismatch";
        case ErrorCode::ConstantField: return "ConstantField";
        case ErrorCode::RangeViolation: return "RangeViolation";
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::EmptySurface: return "EmptySurface";
        case ErrorCode::InvalidBandSpec: return "InvalidBandSpec";
        case ErrorCode::InvalidSigma: return "InvalidSigma";
        case ErrorCode::DegenerateRegion: return "DegenerateRegion";
        case ErrorCode::EmptyBands: return "EmptyBands";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::NoPositives: return "NoPositives";
        case ErrorCode::InvalidWindow: return "InvalidWindow";
        case ErrorCode::NoCorrectVoxels: return "NoCorrectVoxels";
        case ErrorCode::NoIncorrectVoxels: return "NoIncorrectVoxels";
        case ErrorCode::EmptySample: return "EmptySample";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
        case ErrorCode::InconsistentCases: return "InconsistentCases";
        case ErrorCode::AllDegenerate: return "AllDegenerate";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::BadHeader: return "BadHeader";
        case ErrorCode::UnsupportedDatatype: return "UnsupportedDatatype";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::DimMismatch: return "DimMismatch";
        case ErrorCode::FortranOrderUnsupported: return "FortranOrderUnsupported";
        case ErrorCode::IoFailure: return "IoFailure";
    }
    return "UnknownError";
}

bool is_degenerate_metric_error(ErrorCode code) {
    switch (code) {
        case ErrorCode::EmptySurface:
        case ErrorCode::DegenerateRegion:
        case ErrorCode::EmptyBands:
        case ErrorCode::SingleClass:
        case ErrorCode::NoPositives:
        case ErrorCode::NoCorrectVoxels:
        case ErrorCode::NoIncorrectVoxels:
        case ErrorCode::ZeroVariance:
            return true;
        default:
            return false;
    }
}

void GridMeta::validate() const {
    for (int k = 0; k < 3; ++k) {
        if (dims[k] < 1) fail(ErrorCode::InvalidInput, "grid dims must be >= 1");
        if (!(spacing[k] > 0.0) || !std::isfinite(spacing[k]))
            fail(ErrorCode::InvalidInput, "grid spacing must be strictly positive");
    }
}

bool GridMeta::compatible_with(const GridMeta& other) const {
    if (dims != other.dims) return false;
    for (int k = 0; k < 3; ++k) {
        const double a = spacing[k];
        const double b = other.spacing[k];
        if (std::abs(a - b) > 1e-6 * std::max(std::abs(a), std::abs(b))) return false;
    }
    return true;
}

void require_compatible(const GridMeta& a, const GridMeta& b, const char* context) {
    if (!a.compatible_with(b))
        fail(ErrorCode::GeometryMismatch, std::string(context) + ": dims or spacing differ");
}

ScalarGrid::ScalarGrid(GridMeta meta, std::vector<float> values)
    : meta_(meta), values_(std::move(values)) {
    meta_.validate();
    if (values_.size() != meta_.voxel_count())
        fail(ErrorCode::InvalidInput, "scalar grid value count does not match dims");
    for (float v : values_) {
        if (!std::isfinite(v)) fail(ErrorCode::InvalidInput, "scalar grid contains NaN or Inf");
    }
}

BinaryGrid::BinaryGrid(GridMeta meta, std::vector<std::uint8_t> values)
    : meta_(meta), values_(std::move(values)) {
    meta_.validate();
    if (values_.size() != meta_.voxel_count())
        fail(ErrorCode::InvalidInput, "binary grid value count does not match dims");
    for (std::uint8_t v : values_) {
        if (v > 1) fail(ErrorCode::InvalidInput, "binary grid values must be 0 or 1");
    }
}

std::int64_t BinaryGrid::count_set() const {
    std::int64_t n = 0;
    for (std::uint8_t v : values_) n += v;
    return n;
}

LabelGrid::LabelGrid(GridMeta meta, std::vector<std::uint16_t> values, int class_count)
    : meta_(meta), values_(std::move(values)), class_count_(class_count) {
    meta_.validate();
    if (values_.size() != meta_.voxel_count())
        fail(ErrorCode::InvalidInput, "label grid value count does not match dims");
    if (class_count_ < 1) fail(ErrorCode::InvalidInput, "class count must be >= 1");
    for (std::uint16_t v : values_) {
        if (v >= class_count_)
            fail(ErrorCode::InvalidInput, "label value exceeds declared class count");
    }
}

UncertaintyGrid::UncertaintyGrid(ScalarGrid grid) : grid_(std::move(grid)) {
    for (float v : grid_.values()) {
        if (v < 0.0f || v > 1.0f)
            fail(ErrorCode::RangeViolation, "uncertainty values must lie in [0, 1]");
    }
}

BinaryGrid error_map(const LabelGrid& pred, const LabelGrid& gt) {
    require_compatible(pred.meta(), gt.meta(), "error_map");
    std::vector<std::uint8_t> out(pred.size());
    const auto p = pred.values();
    const auto g = gt.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p[i] != g[i] ? 1 : 0;
    return BinaryGrid(pred.meta(), std::move(out));
}

UncertaintyGrid normalize_uncertainty(const ScalarGrid& raw, NormalizeMethod method) {
    const auto in = raw.values();
    std::vector<float> out(in.begin(), in.end());
    switch (method) {
        case NormalizeMethod::MinMax: {
            const auto [lo_it, hi_it] = std::minmax_element(in.begin(), in.end());
            const float lo = *lo_it;
            const float hi = *hi_it;
            if (!(hi > lo)) fail(ErrorCode::ConstantField, "minmax normalization on constant field");
            const double scale = 1.0 / (static_cast<double>(hi) - static_cast<double>(lo));
            for (float& v : out)
                v = static_cast<float>(
                    std::clamp((static_cast<double>(v) - lo) * scale, 0.0, 1.0));
            break;
        }
        case NormalizeMethod::Clamp:
            for (float& v : out) v = std::clamp(v, 0.0f, 1.0f);
            break;
        case NormalizeMethod::Identity:
            break;
    }
    return UncertaintyGrid(ScalarGrid(raw.meta(), std::move(out)));
}

BinaryGrid foreground_mask(const LabelGrid& labels, const std::set<int>& classes) {
    if (classes.empty()) fail(ErrorCode::InvalidInput, "class set must be non-empty");
    for (int c : classes) {
        if (c < 0 || c >= labels.class_count())
            fail(ErrorCode::UnknownClass, "requested label " + std::to_string(c) +
                                              " exceeds class count " +
                                              std::to_string(labels.class_count()));
    }
    std::vector<std::uint8_t> out(labels.size());
    const auto v = labels.values();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = classes.count(static_cast<int>(v[i])) ? 1 : 0;
    return BinaryGrid(labels.meta(), std::move(out));
}

}  // namespace segunc
