#include "segunc/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "segunc/evaluate.hpp"
#include "segunc/parallel.hpp"
#include "segunc/phantom.hpp"
#include "segunc/report.hpp"
#include "segunc/volume_io.hpp"

namespace segunc::cli {

namespace {

namespace fs = std::filesystem;

int exit_code_for(const Error& e) {
    if (e.code() == ErrorCode::GeometryMismatch) return 3;
    if (is_degenerate_metric_error(e.code())) return 4;
    return 2;
}

std::vector<double> parse_band_edges(const std::string& text) {
    std::vector<double> edges;
    std::string token;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i == text.size() || text[i] == ',') {
            if (token.empty()) fail(ErrorCode::InvalidBandSpec, "empty band edge");
            if (token == "inf")
                edges.push_back(std::numeric_limits<double>::infinity());
            else
                edges.push_back(std::stod(token));
            token.clear();
        } else {
            token.push_back(text[i]);
        }
    }
    return edges;
}

std::string canonical_metric_name(std::string name) {
    for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    if (name.rfind("PAVPU_W", 0) == 0) name = "PAVPU_w" + name.substr(7);
    return name;
}

struct SharedOptions {
    std::string bands_text;
    double band_delta = 1.0;
    double sigma = 2.0;
    std::string sigma_unit = "voxels";
    double truncation = 4.0;
    int bins = 15;
    std::string threshold = "mean";
    double tau = 0.5;
    double patch_threshold = 0.5;
    std::string normalize = "identity";
    std::vector<int> pavpu_windows{5, 11};
    std::string metrics_text;
    std::vector<int> classes;
    double radius_mm = -1.0;
    bool radius_hd95 = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--bands", bands_text, "band edges in mm, e.g. 0,1,2,4,8,inf");
        cmd->add_option("--band-delta", band_delta, "inverse-distance weight regularizer (mm)");
        cmd->add_option("--sigma", sigma, "Gaussian sigma for SPACE");
        cmd->add_option("--sigma-unit", sigma_unit, "voxels or mm")
            ->check(CLI::IsMember({"voxels", "mm"}));
        cmd->add_option("--truncation", truncation, "kernel radius in sigmas");
        cmd->add_option("--bins", bins, "calibration bin count");
        cmd->add_option("--threshold", threshold, "certainty threshold: mean, otsu or fixed")
            ->check(CLI::IsMember({"mean", "otsu", "fixed"}));
        cmd->add_option("--tau", tau, "threshold value when --threshold fixed");
        cmd->add_option("--patch-threshold", patch_threshold, "patch accuracy threshold");
        cmd->add_option("--normalize", normalize, "uncertainty normalization")
            ->check(CLI::IsMember({"identity", "clamp", "minmax"}));
        cmd->add_option("--pavpu-windows", pavpu_windows, "PAvPU window sizes");
        cmd->add_option("--metrics", metrics_text, "comma-separated metric subset");
        cmd->add_option("--classes", classes, "foreground label classes");
        cmd->add_option("--radius-mm", radius_mm, "fixed boundary-region radius (mm)");
        cmd->add_flag("--radius-hd95", radius_hd95,
                      "per-case HD95 boundary-region radius (default)");
    }

    EvaluationParams to_params() const {
        EvaluationParams p;
        if (radius_mm >= 0.0 && radius_hd95)
            fail(ErrorCode::InvalidInput, "--radius-mm and --radius-hd95 are exclusive");
        if (radius_mm >= 0.0) p.radius = {RadiusSpec::Kind::FixedMm, radius_mm};
        if (!bands_text.empty()) p.bands.edges = parse_band_edges(bands_text);
        p.bands.weight_delta_mm = band_delta;
        p.smoothing.sigma = sigma;
        p.smoothing.unit = sigma_unit == "mm" ? SigmaUnit::Mm : SigmaUnit::Voxels;
        p.smoothing.truncation = truncation;
        p.binning.bin_count = bins;
        if (threshold == "mean") p.threshold.kind = UncThresholdKind::Mean;
        else if (threshold == "otsu") p.threshold.kind = UncThresholdKind::Otsu;
        else p.threshold.kind = UncThresholdKind::Fixed;
        p.threshold.fixed_tau = tau;
        p.threshold.patch_accuracy_threshold = patch_threshold;
        p.pavpu_windows = pavpu_windows;
        if (!metrics_text.empty()) {
            std::string token;
            for (std::size_t i = 0; i <= metrics_text.size(); ++i) {
                if (i == metrics_text.size() || metrics_text[i] == ',') {
                    if (!token.empty()) p.metrics.push_back(canonical_metric_name(token));
                    token.clear();
                } else {
                    token.push_back(metrics_text[i]);
                }
            }
        }
        if (!classes.empty()) p.foreground_classes = std::set<int>(classes.begin(), classes.end());
        if (normalize == "clamp") p.normalize = NormalizeMethod::Clamp;
        else if (normalize == "minmax") p.normalize = NormalizeMethod::MinMax;
        return p;
    }
};

UncertaintyGrid load_uncertainty(const std::string& path, const EvaluationParams& params) {
    return normalize_uncertainty(load_scalar(path), params.normalize);
}

struct ComputeOptions {
    std::string gt_path, pred_path, unc_path, out_path, case_id = "case";
    SharedOptions shared;
};

int run_compute(const ComputeOptions& opt) {
    const EvaluationParams params = opt.shared.to_params();
    const LabelGrid gt = load_labels(opt.gt_path);
    const LabelGrid pred = load_labels(opt.pred_path);
    const UncertaintyGrid unc = load_uncertainty(opt.unc_path, params);
    require_compatible(gt.meta(), unc.meta(), "compute inputs");

    const CaseGeometry geo = build_case_geometry(gt, pred, params);
    std::vector<BandTableRow> band_table;
    const std::vector<MetricStatus> metrics = evaluate_map(geo, unc, params, &band_table);

    const ordered_json report =
        compute_report_json(opt.case_id, metrics, geo, params, band_table);
    const std::string text = report.dump(2) + "\n";
    if (opt.out_path.empty())
        std::cout << text;
    else
        write_text_file(opt.out_path, text);

    for (const MetricStatus& m : metrics)
        if (!m.ok()) return 4;
    return 0;
}

struct CompareOptions {
    std::string manifest_path, clean_key = "clean", noisy_key = "noisy";
    std::string csv_path, json_path;
    SharedOptions shared;
};

int run_compare(const CompareOptions& opt) {
    const EvaluationParams base_params = opt.shared.to_params();
    const std::vector<CaseManifest> manifest = read_manifest(opt.manifest_path);
    if (manifest.size() < 2) fail(ErrorCode::InvalidInput, "compare needs >= 2 cases");

    std::vector<CaseReport> reports(manifest.size());
    std::exception_ptr first_error = nullptr;
    const int nt = worker_count();
    (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(manifest.size()); ++i) {
        try {
            const CaseManifest& entry = manifest[i];
            EvaluationParams params = base_params;
            if (entry.radius_mm) params.radius = {RadiusSpec::Kind::FixedMm, *entry.radius_mm};
            if (entry.classes) params.foreground_classes = entry.classes;
            const auto it_clean = entry.maps.find(opt.clean_key);
            const auto it_noisy = entry.maps.find(opt.noisy_key);
            if (it_clean == entry.maps.end() || it_noisy == entry.maps.end())
                fail(ErrorCode::InvalidInput,
                     "case " + entry.id + ": missing map key " + opt.clean_key + " or " +
                         opt.noisy_key);

            const LabelGrid gt = load_labels(entry.gt_path);
            const LabelGrid pred = load_labels(entry.pred_path);
            const CaseGeometry geo = build_case_geometry(gt, pred, params);

            CaseReport report;
            report.case_id = entry.id;
            for (const auto& [key, path] : {std::pair{opt.clean_key, it_clean->second},
                                            std::pair{opt.noisy_key, it_noisy->second}}) {
                const UncertaintyGrid unc = load_uncertainty(path, params);
                require_compatible(gt.meta(), unc.meta(), ("case " + entry.id).c_str());
                const std::vector<MetricStatus> metrics = evaluate_map(geo, unc, params);
                std::vector<MetricResult> values;
                for (const MetricStatus& m : metrics) {
                    if (!m.ok())
                        fail(m.code, "case " + entry.id + ": metric " + m.result.name + ": " +
                                         m.status);
                    values.push_back(m.result);
                }
                report.per_map[key] = std::move(values);
            }
            reports[i] = std::move(report);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);

    const ComparisonReport comparison =
        build_comparison_report(reports, opt.clean_key, opt.noisy_key);
    write_text_file(opt.csv_path, comparison_csv(comparison));
    if (!opt.json_path.empty()) {
        const ordered_json j = comparison_report_json(comparison, reports, opt.clean_key,
                                                      opt.noisy_key, base_params);
        write_text_file(opt.json_path, j.dump(2) + "\n");
    }
    return 0;
}

struct SynthOptions {
    std::string config_path, out_dir, format = "nii";
    int n_cases = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string preset;
};

PhantomConfig config_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoFailure, "cannot open config " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        fail(ErrorCode::BadHeader, "malformed config JSON: " + std::string(e.what()));
    }
    PhantomConfig cfg;
    if (j.contains("dims")) cfg.dims = j.at("dims").get<std::array<int, 3>>();
    if (j.contains("spacing")) cfg.spacing = j.at("spacing").get<std::array<double, 3>>();
    if (j.contains("semi_axis_min")) cfg.semi_axis_min = j.at("semi_axis_min").get<double>();
    if (j.contains("semi_axis_max")) cfg.semi_axis_max = j.at("semi_axis_max").get<double>();
    if (j.contains("center_jitter")) cfg.center_jitter = j.at("center_jitter").get<double>();
    if (j.contains("perturbation_amplitude"))
        cfg.perturbation_amplitude = j.at("perturbation_amplitude").get<double>();
    if (j.contains("decay_scale_mm")) cfg.decay_scale_mm = j.at("decay_scale_mm").get<double>();
    if (j.contains("decay_scale_spread_mm"))
        cfg.decay_scale_spread_mm = j.at("decay_scale_spread_mm").get<double>();
    if (j.contains("noise_floor")) cfg.noise_floor = j.at("noise_floor").get<double>();
    if (j.contains("noise_floor_spread"))
        cfg.noise_floor_spread = j.at("noise_floor_spread").get<double>();
    if (j.contains("noise_smoothing_voxels"))
        cfg.noise_smoothing_voxels = j.at("noise_smoothing_voxels").get<double>();
    if (j.contains("noise_threshold")) cfg.noise_threshold = j.at("noise_threshold").get<double>();
    if (j.contains("noise_rise")) cfg.noise_rise = j.at("noise_rise").get<double>();
    if (j.contains("mean_matching")) cfg.mean_matching = j.at("mean_matching").get<bool>();
    if (j.contains("scattered_error_rate"))
        cfg.scattered_error_rate = j.at("scattered_error_rate").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("preset")) {
        const std::string p = j.at("preset").get<std::string>();
        if (p == "boundary") cfg.preset = PhantomPreset::Boundary;
        else if (p == "scattered") cfg.preset = PhantomPreset::Scattered;
        else fail(ErrorCode::ConfigInvalid, "unknown preset: " + p);
    }
    return cfg;
}

ordered_json config_to_json(const PhantomConfig& cfg, int n_cases) {
    ordered_json j;
    j["dims"] = cfg.dims;
    j["spacing"] = cfg.spacing;
    j["semi_axis_min"] = cfg.semi_axis_min;
    j["semi_axis_max"] = cfg.semi_axis_max;
    j["center_jitter"] = cfg.center_jitter;
    j["perturbation_amplitude"] = cfg.perturbation_amplitude;
    j["decay_scale_mm"] = cfg.decay_scale_mm;
    j["decay_scale_spread_mm"] = cfg.decay_scale_spread_mm;
    j["noise_floor"] = cfg.noise_floor;
    j["noise_floor_spread"] = cfg.noise_floor_spread;
    j["noise_smoothing_voxels"] = cfg.noise_smoothing_voxels;
    j["noise_threshold"] = cfg.noise_threshold;
    j["noise_rise"] = cfg.noise_rise;
    j["mean_matching"] = cfg.mean_matching;
    j["preset"] = cfg.preset == PhantomPreset::Boundary ? "boundary" : "scattered";
    j["scattered_error_rate"] = cfg.scattered_error_rate;
    j["seed"] = cfg.seed;
    j["cases"] = n_cases;
    return j;
}

int run_synth(const SynthOptions& opt) {
    if (opt.n_cases < 1) fail(ErrorCode::ConfigInvalid, "--n must be >= 1");
    PhantomConfig cfg;
    if (!opt.config_path.empty()) cfg = config_from_json(opt.config_path);
    if (opt.seed_set) cfg.seed = opt.seed;
    if (!opt.preset.empty()) {
        if (opt.preset == "boundary") cfg.preset = PhantomPreset::Boundary;
        else if (opt.preset == "scattered") cfg.preset = PhantomPreset::Scattered;
        else fail(ErrorCode::ConfigInvalid, "unknown preset: " + opt.preset);
    }
    cfg.validate();

    const std::string ext = opt.format;
    if (ext != "nii" && ext != "nii.gz" && ext != "npy" && ext != "raw")
        fail(ErrorCode::InvalidInput, "unknown volume format: " + ext);

    fs::create_directories(opt.out_dir);
    std::vector<CaseManifest> manifest(opt.n_cases);

    const int nt = worker_count();
    (void)nt;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) num_threads(nt)
#endif
    for (int i = 0; i < opt.n_cases; ++i) {
        const PhantomCase c = make_phantom(cfg, i);
        const fs::path dir(opt.out_dir);
        CaseManifest m;
        m.id = c.id;
        m.gt_path = (dir / (c.id + "_gt." + ext)).string();
        m.pred_path = (dir / (c.id + "_pred." + ext)).string();
        m.maps["clean"] = (dir / (c.id + "_clean." + ext)).string();
        m.maps["noisy"] = (dir / (c.id + "_noisy." + ext)).string();
        save_labels(m.gt_path, c.gt);
        save_labels(m.pred_path, c.pred);
        save_scalar(m.maps.at("clean"), c.clean.grid());
        save_scalar(m.maps.at("noisy"), c.noisy.grid());
        manifest[i] = std::move(m);
    }

    write_manifest((fs::path(opt.out_dir) / "manifest.json").string(), manifest);
    write_text_file((fs::path(opt.out_dir) / "config.json").string(),
                    config_to_json(cfg, opt.n_cases).dump(2) + "\n");
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv) {
    CLI::App app{"volumetric segmentation-uncertainty metrics engine"};
    app.require_subcommand(1);

    ComputeOptions compute_opt;
    CLI::App* compute = app.add_subcommand("compute", "evaluate one case");
    compute->add_option("--gt", compute_opt.gt_path, "ground-truth label volume")->required();
    compute->add_option("--pred", compute_opt.pred_path, "predicted label volume")->required();
    compute->add_option("--unc", compute_opt.unc_path, "uncertainty map volume")->required();
    compute->add_option("--case-id", compute_opt.case_id, "case identifier for the report");
    compute->add_option("--out", compute_opt.out_path, "report JSON path (default stdout)");
    compute_opt.shared.attach(compute);

    CompareOptions compare_opt;
    CLI::App* compare = app.add_subcommand("compare", "clean-vs-noisy comparison over a manifest");
    compare->add_option("--manifest", compare_opt.manifest_path, "case manifest JSON")->required();
    compare->add_option("--clean-key", compare_opt.clean_key, "map key treated as clean");
    compare->add_option("--noisy-key", compare_opt.noisy_key, "map key treated as noisy");
    compare->add_option("--out", compare_opt.csv_path, "comparison table CSV path")->required();
    compare->add_option("--json", compare_opt.json_path, "full report JSON path");
    compare_opt.shared.attach(compare);

    SynthOptions synth_opt;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic phantom suite");
    synth->add_option("--config", synth_opt.config_path, "phantom config JSON");
    synth->add_option("--n", synth_opt.n_cases, "number of cases")->required();
    synth->add_option("--out", synth_opt.out_dir, "output directory")->required();
    synth->add_option("--format", synth_opt.format, "volume format: nii, nii.gz, npy, raw");
    auto* seed_opt = synth->add_option("--seed", synth_opt.seed, "master seed");
    synth->add_option("--preset", synth_opt.preset, "boundary or scattered");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        synth_opt.seed_set = seed_opt->count() > 0;
        if (compute->parsed()) return run_compute(compute_opt);
        if (compare->parsed()) return run_compare(compare_opt);
        if (synth->parsed()) return run_synth(synth_opt);
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace segunc::cli
