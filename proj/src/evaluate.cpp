#include "segunc/evaluate.hpp"

#include <algorithm>
#include <cmath>

#include "segunc/format.hpp"

namespace segunc {

namespace {

BinaryGrid nonzero_mask(const LabelGrid& labels) {
    std::vector<std::uint8_t> out(labels.size());
    const auto v = labels.values();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] != 0 ? 1 : 0;
    return BinaryGrid(labels.meta(), std::move(out));
}

BinaryGrid structure_mask(const LabelGrid& labels, const EvaluationParams& params) {
    if (!params.foreground_classes || params.foreground_classes->empty())
        return nonzero_mask(labels);
    std::vector<std::uint8_t> out(labels.size());
    const auto v = labels.values();
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = params.foreground_classes->count(static_cast<int>(v[i])) ? 1 : 0;
    return BinaryGrid(labels.meta(), std::move(out));
}

}  // namespace

CaseGeometry build_case_geometry(const LabelGrid& gt, const LabelGrid& pred,
                                 const EvaluationParams& params) {
    require_compatible(gt.meta(), pred.meta(), "case geometry");
    CaseGeometry geo;
    geo.meta = gt.meta();
    geo.error = error_map(pred, gt);

    const BinaryGrid gt_mask = structure_mask(gt, params);
    const BinaryGrid pred_mask = structure_mask(pred, params);
    geo.gt_surface = surface(gt_mask);
    geo.pred_surface = surface(pred_mask);
    geo.gt_surface_ok = geo.gt_surface.count_set() > 0;
    geo.pred_surface_ok = geo.pred_surface.count_set() > 0;

    if (geo.gt_surface_ok && geo.pred_surface_ok) {
        geo.hd95_mm = hd95(geo.pred_surface, geo.gt_surface);
        geo.hd95_ok = true;
    }

    if (params.radius.kind == RadiusSpec::Kind::FixedMm) {
        geo.radius_mm = params.radius.fixed_mm;
        geo.radius_ok = true;
    } else if (geo.hd95_ok) {
        geo.radius_mm = geo.hd95_mm;
        geo.radius_ok = true;
    }
    if (geo.radius_ok && geo.pred_surface_ok) {
        geo.region = region_within(geo.pred_surface, geo.radius_mm);
        geo.region_ok = true;
    }

    if (geo.gt_surface_ok) {
        geo.bands = band_partition(distance_field(geo.gt_surface), params.bands);
        geo.bands_ok = true;
    }
    return geo;
}

std::vector<std::string> requested_metric_names(const EvaluationParams& params) {
    std::vector<std::string> all;
    for (const std::string& name : registry_metric_names()) {
        if (name.rfind("PAVPU_w", 0) == 0) continue;  // windows come from params
        all.push_back(name);
    }
    // keep PAvPU in its registry position (after AVU)
    std::vector<std::string> ordered;
    for (const std::string& name : all) {
        ordered.push_back(name);
        if (name == "AVU")
            for (int w : params.pavpu_windows) ordered.push_back("PAVPU_w" + std::to_string(w));
    }
    if (params.metrics.empty()) return ordered;
    std::vector<std::string> filtered;
    for (const std::string& name : ordered)
        if (std::find(params.metrics.begin(), params.metrics.end(), name) != params.metrics.end())
            filtered.push_back(name);
    for (const std::string& want : params.metrics)
        if (std::find(ordered.begin(), ordered.end(), want) == ordered.end())
            fail(ErrorCode::InvalidInput, "unknown metric requested: " + want);
    return filtered;
}

std::vector<MetricStatus> evaluate_map(const CaseGeometry& geo, const UncertaintyGrid& u,
                                       const EvaluationParams& params,
                                       std::vector<BandTableRow>* band_table) {
    require_compatible(geo.meta, u.meta(), "evaluate_map");
    const std::vector<std::string> names = requested_metric_names(params);

    // ECE/MCE and CCR/UIR come in pairs; compute lazily and cache.
    std::optional<CalibrationErrors> calibration;
    std::optional<CertaintyRatios> ratios;

    auto compute = [&](const std::string& name) -> MetricResult {
        if (name == "SPACE") return space(u, geo.error, params.smoothing);
        if (name == "BUC") {
            if (!geo.region_ok)
                fail(ErrorCode::DegenerateRegion,
                     geo.pred_surface_ok ? "no boundary-region radius (HD95 undefined)"
                                         : "predicted structure has no surface");
            MetricResult r = buc(u, geo.region);
            r.params.emplace_back("radius_mm", format_g9(geo.radius_mm));
            r.params.emplace_back("radius_source",
                                  params.radius.kind == RadiusSpec::Kind::Hd95 ? "hd95" : "fixed");
            return r;
        }
        if (name == "BA_ECE") {
            if (!geo.bands_ok)
                fail(ErrorCode::EmptyBands, "ground-truth structure has no surface");
            return ba_ece(u, geo.error, geo.bands, band_table);
        }
        if (name == "ECE" || name == "MCE") {
            if (!calibration) calibration = calibration_errors(u, geo.error, params.binning);
            return name == "ECE" ? calibration->ece : calibration->mce;
        }
        if (name == "VOXEL_ACC") return voxel_accuracy(u, geo.error, params.threshold);
        if (name == "AUC_ROC") return auc_roc(u, geo.error);
        if (name == "AUC_PR") return auc_pr(u, geo.error);
        if (name == "AVU") return avu(u, geo.error, params.threshold);
        if (name.rfind("PAVPU_w", 0) == 0) {
            const int window = std::stoi(name.substr(7));
            return pavpu(u, geo.error, window, params.threshold);
        }
        if (name == "AURC") return aurc(u, geo.error);
        if (name == "AU_ARC") return au_arc(u, geo.error);
        if (name == "CCR" || name == "UIR") {
            if (!ratios) ratios = certainty_ratios(u, geo.error, params.threshold);
            return name == "CCR" ? ratios->correct_certain : ratios->uncertain_incorrect;
        }
        fail(ErrorCode::InvalidInput, "unknown metric: " + name);
    };

    std::vector<MetricStatus> out;
    out.reserve(names.size());
    for (const std::string& name : names) {
        MetricStatus status;
        try {
            status.result = compute(name);
        } catch (const Error& e) {
            if (!is_degenerate_metric_error(e.code())) throw;
            status.result.name = name;
            status.result.value = std::numeric_limits<double>::quiet_NaN();
            status.result.orientation = metric_orientation(name);
            status.status = e.what();
            status.code = e.code();
        }
        out.push_back(std::move(status));
    }
    return out;
}

}  // namespace segunc
