#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "segunc/geometry.hpp"
#include "segunc/grid.hpp"
#include "segunc/metrics.hpp"
#include "segunc/stats.hpp"
#include "segunc/voxelwise.hpp"

namespace segunc {

// Source of the boundary-region radius: a fixed distance or the per-case
// HD95 between predicted and ground-truth surfaces.
struct RadiusSpec {
    enum class Kind { FixedMm, Hd95 };
    Kind kind = Kind::Hd95;
    double fixed_mm = 3.0;
};

struct EvaluationParams {
    RadiusSpec radius{};
    BandSpec bands = BandSpec::default_spec();
    SmoothingSpec smoothing{};
    BinningSpec binning{};
    ThresholdSpec threshold{};
    std::vector<int> pavpu_windows{5, 11};
    // Empty means every registry metric.
    std::vector<std::string> metrics;
    // Structure selection for boundary extraction; empty means all non-zero labels.
    std::optional<std::set<int>> foreground_classes;
    NormalizeMethod normalize = NormalizeMethod::Identity;
};

// Per-case spatial context shared by both uncertainty maps. The error map
// follows label mismatch; the BUC region hangs off the predicted boundary
// while the calibration bands hang off the ground-truth boundary.
struct CaseGeometry {
    GridMeta meta;
    BinaryGrid error;
    BinaryGrid gt_surface;
    BinaryGrid pred_surface;
    bool gt_surface_ok = false;
    bool pred_surface_ok = false;
    double hd95_mm = 0.0;
    bool hd95_ok = false;
    double radius_mm = 0.0;
    bool radius_ok = false;
    BinaryGrid region;
    bool region_ok = false;
    BandField bands;
    bool bands_ok = false;
};

CaseGeometry build_case_geometry(const LabelGrid& gt, const LabelGrid& pred,
                                 const EvaluationParams& params);

// A metric outcome: either a value or the reason it could not be evaluated.
struct MetricStatus {
    MetricResult result;
    std::string status = "ok";
    ErrorCode code = ErrorCode::InvalidInput;  // meaningful only when !ok()

    bool ok() const { return status == "ok"; }
};

// Names of the metrics an EvaluationParams will produce, in report order.
std::vector<std::string> requested_metric_names(const EvaluationParams& params);

std::vector<MetricStatus> evaluate_map(const CaseGeometry& geo, const UncertaintyGrid& u,
                                       const EvaluationParams& params,
                                       std::vector<BandTableRow>* band_table = nullptr);

}  // namespace segunc
