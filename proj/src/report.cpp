#include "segunc/report.hpp"

#include <cmath>
#include <fstream>

#include "segunc/format.hpp"

namespace segunc {

namespace {

ordered_json edge_json(double edge) {
    if (std::isinf(edge)) return "inf";
    return edge;
}

}  // namespace

ordered_json params_json(const EvaluationParams& params) {
    ordered_json j;
    j["radius"] = ordered_json::object();
    j["radius"]["kind"] = params.radius.kind == RadiusSpec::Kind::Hd95 ? "hd95" : "fixed_mm";
    if (params.radius.kind == RadiusSpec::Kind::FixedMm)
        j["radius"]["fixed_mm"] = params.radius.fixed_mm;
    j["band_edges_mm"] = ordered_json::array();
    for (double e : params.bands.edges) j["band_edges_mm"].push_back(edge_json(e));
    j["band_weight_delta_mm"] = params.bands.weight_delta_mm;
    j["sigma"] = params.smoothing.sigma;
    j["sigma_unit"] = params.smoothing.unit == SigmaUnit::Mm ? "mm" : "voxels";
    j["truncation"] = params.smoothing.truncation;
    j["bins"] = params.binning.bin_count;
    switch (params.threshold.kind) {
        case UncThresholdKind::Mean: j["uncertainty_threshold"] = "mean"; break;
        case UncThresholdKind::Otsu: j["uncertainty_threshold"] = "otsu"; break;
        case UncThresholdKind::Fixed: j["uncertainty_threshold"] = params.threshold.fixed_tau; break;
    }
    j["patch_accuracy_threshold"] = params.threshold.patch_accuracy_threshold;
    j["pavpu_windows"] = params.pavpu_windows;
    switch (params.normalize) {
        case NormalizeMethod::Identity: j["normalize"] = "identity"; break;
        case NormalizeMethod::Clamp: j["normalize"] = "clamp"; break;
        case NormalizeMethod::MinMax: j["normalize"] = "minmax"; break;
    }
    if (params.foreground_classes) j["classes"] = *params.foreground_classes;
    return j;
}

ordered_json geometry_json(const CaseGeometry& geo) {
    ordered_json j;
    j["dims"] = geo.meta.dims;
    j["spacing_mm"] = geo.meta.spacing;
    j["error_voxels"] = geo.error.count_set();
    j["gt_surface_voxels"] = geo.gt_surface_ok ? geo.gt_surface.count_set() : 0;
    j["pred_surface_voxels"] = geo.pred_surface_ok ? geo.pred_surface.count_set() : 0;
    if (geo.hd95_ok) j["hd95_mm"] = geo.hd95_mm;
    if (geo.region_ok) {
        j["region_radius_mm"] = geo.radius_mm;
        j["region_voxels"] = geo.region.count_set();
    }
    return j;
}

ordered_json metrics_json(const std::vector<MetricStatus>& metrics) {
    ordered_json arr = ordered_json::array();
    for (const MetricStatus& m : metrics) {
        ordered_json row;
        row["name"] = m.result.name;
        if (m.ok())
            row["value"] = m.result.value;
        else
            row["value"] = nullptr;
        row["orientation"] = orientation_name(m.result.orientation);
        row["status"] = m.status;
        if (!m.result.params.empty()) {
            ordered_json p = ordered_json::object();
            for (const auto& [key, value] : m.result.params) p[key] = value;
            row["params"] = p;
        }
        arr.push_back(row);
    }
    return arr;
}

ordered_json band_table_json(const std::vector<BandTableRow>& table) {
    ordered_json arr = ordered_json::array();
    for (const BandTableRow& b : table) {
        ordered_json row;
        row["band"] = b.band;
        row["count"] = b.count;
        row["mean_distance_mm"] = b.mean_distance_mm;
        row["weight"] = b.weight;
        row["mean_uncertainty"] = b.mean_uncertainty;
        row["mean_error"] = b.mean_error;
        row["gap"] = b.gap;
        arr.push_back(row);
    }
    return arr;
}

ordered_json compute_report_json(const std::string& case_id,
                                 const std::vector<MetricStatus>& metrics,
                                 const CaseGeometry& geo, const EvaluationParams& params,
                                 const std::vector<BandTableRow>& band_table) {
    ordered_json j;
    j["schema_version"] = 1;
    j["case_id"] = case_id;
    j["params"] = params_json(params);
    j["geometry"] = geometry_json(geo);
    j["metrics"] = metrics_json(metrics);
    if (!band_table.empty()) j["diagnostics"] = {{"bands", band_table_json(band_table)}};
    return j;
}

ordered_json comparison_report_json(const ComparisonReport& report,
                                    const std::vector<CaseReport>& cases,
                                    const std::string& clean_key, const std::string& noisy_key,
                                    const EvaluationParams& params) {
    ordered_json j;
    j["schema_version"] = 1;
    j["clean_key"] = clean_key;
    j["noisy_key"] = noisy_key;
    j["case_count"] = report.case_count;
    j["params"] = params_json(params);

    ordered_json case_arr = ordered_json::array();
    std::vector<const CaseReport*> sorted;
    for (const CaseReport& c : cases) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const CaseReport* a, const CaseReport* b) { return a->case_id < b->case_id; });
    for (const CaseReport* c : sorted) {
        ordered_json row;
        row["id"] = c->case_id;
        for (const auto& [key, metrics] : c->per_map) {
            ordered_json values = ordered_json::object();
            for (const MetricResult& m : metrics) values[m.name] = m.value;
            row[key] = values;
        }
        case_arr.push_back(row);
    }
    j["cases"] = case_arr;

    ordered_json rows = ordered_json::array();
    for (const MetricComparison& row : report.rows) {
        ordered_json r;
        r["metric"] = row.name;
        r["orientation"] = orientation_name(row.orientation);
        r["accuracy_pct"] = row.accuracy * 100.0;
        if (row.effect.status == EffectSizeStatus::Ok)
            r["cohens_d"] = row.effect.d;
        else
            r["cohens_d"] = "undefined_zero_variance";
        r["mean_rel_diff_pct"] = row.rel_diff.mean_percent;
        r["excluded_cases"] = row.rel_diff.excluded_cases;
        r["wins"] = row.wins;
        r["losses"] = row.losses;
        r["ties"] = row.ties;
        r["outperforms_all"] = row.outperforms_all;
        r["outperforms_low_acc"] = row.outperforms_low_acc;
        rows.push_back(r);
    }
    j["comparison"] = ordered_json::object();
    j["comparison"]["metric_order"] = report.metric_order;
    j["comparison"]["rows"] = rows;
    j["comparison"]["cochran_q"] = {{"q", report.cochran.q},
                                    {"p", report.cochran.p},
                                    {"df", report.cochran.df}};
    j["comparison"]["mcnemar_p"] = report.mcnemar_p;
    j["comparison"]["holm_p"] = report.holm_p;
    return j;
}

std::string comparison_csv(const ComparisonReport& report) {
    std::string csv =
        "metric,accuracy_pct,cohens_d,mean_rel_diff_pct,wins,losses,ties,excluded_cases,"
        "cochran_q,cochran_q_p,min_holm_p,significance\n";
    for (std::size_t i = 0; i < report.rows.size(); ++i) {
        const MetricComparison& row = report.rows[i];
        double min_holm = 1.0;
        for (std::size_t jx = 0; jx < report.rows.size(); ++jx)
            if (jx != i) min_holm = std::min(min_holm, report.holm_p[i][jx]);
        csv += row.name;
        csv += ',' + format_g9(row.accuracy * 100.0);
        csv += ',';
        csv += row.effect.status == EffectSizeStatus::Ok ? format_g9(row.effect.d) : "undefined";
        csv += ',' + format_g9(row.rel_diff.mean_percent);
        csv += ',' + std::to_string(row.wins);
        csv += ',' + std::to_string(row.losses);
        csv += ',' + std::to_string(row.ties);
        csv += ',' + std::to_string(row.rel_diff.excluded_cases);
        csv += ',' + format_g9(report.cochran.q);
        csv += ',' + format_g9(report.cochran.p);
        csv += ',' + format_g9(min_holm);
        csv += ',';
        if (row.outperforms_all)
            csv += "all";
        else if (row.outperforms_low_acc)
            csv += "le70";
        csv += '\n';
    }
    return csv;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorCode::IoFailure, "cannot create " + path);
    out << content;
    if (!out) fail(ErrorCode::IoFailure, "short write to " + path);
}

}  // namespace segunc
