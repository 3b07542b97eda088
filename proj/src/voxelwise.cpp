#include "segunc/voxelwise.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segunc/format.hpp"

namespace segunc {

void ThresholdSpec::validate() const {
    if (kind == UncThresholdKind::Fixed && (fixed_tau < 0.0 || fixed_tau > 1.0))
        fail(ErrorCode::InvalidInput, "fixed threshold must lie in [0, 1]");
    if (!(patch_accuracy_threshold > 0.0) || patch_accuracy_threshold > 1.0)
        fail(ErrorCode::InvalidInput, "patch accuracy threshold must lie in (0, 1]");
}

void BinningSpec::validate() const {
    if (bin_count < 1) fail(ErrorCode::InvalidInput, "bin count must be >= 1");
}

namespace {

double mean_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

double otsu_threshold(std::span<const float> values) {
    constexpr int kBins = 256;
    std::array<std::int64_t, kBins> hist{};
    for (float v : values) {
        int b = static_cast<int>(static_cast<double>(v) * kBins);
        b = std::clamp(b, 0, kBins - 1);
        ++hist[b];
    }
    const double total = static_cast<double>(values.size());
    double sum_all = 0.0;
    for (int b = 0; b < kBins; ++b) sum_all += (b + 0.5) / kBins * static_cast<double>(hist[b]);
    double w0 = 0.0, sum0 = 0.0, best_var = -1.0;
    int best_bin = 0;
    for (int b = 0; b < kBins - 1; ++b) {
        w0 += static_cast<double>(hist[b]);
        if (w0 == 0.0) continue;
        const double w1 = total - w0;
        if (w1 == 0.0) break;
        sum0 += (b + 0.5) / kBins * static_cast<double>(hist[b]);
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double var = w0 * w1 * (mu0 - mu1) * (mu0 - mu1);
        if (var > best_var) {
            best_var = var;
            best_bin = b;
        }
    }
    return static_cast<double>(best_bin + 1) / kBins;
}

const char* threshold_kind_name(UncThresholdKind k) {
    switch (k) {
        case UncThresholdKind::Mean: return "mean";
        case UncThresholdKind::Fixed: return "fixed";
        case UncThresholdKind::Otsu: return "otsu";
    }
    return "?";
}

// Stable ascending order of voxel indices by uncertainty. Shared by the
// ranking metrics so tie-breaking is identical everywhere.
std::vector<std::size_t> ascending_order(std::span<const float> u) {
    std::vector<std::size_t> order(u.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return u[a] < u[b]; });
    return order;
}

void append_threshold_params(MetricResult& r, const ThresholdSpec& spec, double tau) {
    r.params.emplace_back("threshold_kind", threshold_kind_name(spec.kind));
    r.params.emplace_back("threshold", format_g9(tau));
}

}  // namespace

double resolve_threshold(const UncertaintyGrid& u, const ThresholdSpec& spec) {
    spec.validate();
    switch (spec.kind) {
        case UncThresholdKind::Mean: return mean_of(u.values());
        case UncThresholdKind::Fixed: return spec.fixed_tau;
        case UncThresholdKind::Otsu: return otsu_threshold(u.values());
    }
    return 0.5;
}

CalibrationErrors calibration_errors(const UncertaintyGrid& u, const BinaryGrid& err,
                                     const BinningSpec& bins) {
    require_compatible(u.meta(), err.meta(), "calibration_errors");
    bins.validate();
    const int m = bins.bin_count;
    std::vector<std::int64_t> count(m, 0);
    std::vector<double> sum_u(m, 0.0), sum_e(m, 0.0);
    const auto uv = u.values();
    const auto ev = err.values();
    for (std::size_t i = 0; i < uv.size(); ++i) {
        int b = static_cast<int>(static_cast<double>(uv[i]) * m);
        b = std::clamp(b, 0, m - 1);
        ++count[b];
        sum_u[b] += uv[i];
        sum_e[b] += ev[i];
    }
    const double n = static_cast<double>(uv.size());
    double ece = 0.0, mce = 0.0;
    for (int b = 0; b < m; ++b) {
        if (count[b] == 0) continue;
        const double nb = static_cast<double>(count[b]);
        const double gap = std::abs(sum_u[b] / nb - sum_e[b] / nb);
        ece += nb / n * gap;
        mce = std::max(mce, gap);
    }
    CalibrationErrors out;
    out.ece = {"ECE", ece, Orientation::LowerBetter, {{"bins", format_g9(m)}}};
    out.mce = {"MCE", mce, Orientation::LowerBetter, {{"bins", format_g9(m)}}};
    return out;
}

MetricResult auc_roc(const UncertaintyGrid& u, const BinaryGrid& err) {
    require_compatible(u.meta(), err.meta(), "auc_roc");
    const auto uv = u.values();
    const auto ev = err.values();
    const std::int64_t n = static_cast<std::int64_t>(uv.size());
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) n_pos += ev[i];
    const std::int64_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0)
        fail(ErrorCode::SingleClass, "auc_roc requires both error and non-error voxels");

    const std::vector<std::size_t> order = ascending_order(uv);
    // midranks: ties share the average of their 1-based rank range
    double rank_sum_pos = 0.0;
    std::int64_t i = 0;
    while (i < n) {
        std::int64_t j = i;
        while (j + 1 < n && uv[order[j + 1]] == uv[order[i]]) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::int64_t t = i; t <= j; ++t)
            if (ev[order[t]]) rank_sum_pos += midrank;
        i = j + 1;
    }
    const double auc =
        (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
        (static_cast<double>(n_pos) * static_cast<double>(n_neg));
    return {"AUC_ROC", auc, Orientation::HigherBetter, {}};
}

MetricResult auc_pr(const UncertaintyGrid& u, const BinaryGrid& err) {
    require_compatible(u.meta(), err.meta(), "auc_pr");
    const auto uv = u.values();
    const auto ev = err.values();
    std::int64_t n_pos = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) n_pos += ev[i];
    if (n_pos == 0) fail(ErrorCode::NoPositives, "auc_pr requires at least one error voxel");

    std::vector<std::size_t> order = ascending_order(uv);
    std::reverse(order.begin(), order.end());  // descending by score
    const std::int64_t n = static_cast<std::int64_t>(order.size());
    double ap = 0.0;
    double prev_recall = 0.0;
    std::int64_t tp = 0, taken = 0;
    std::int64_t i = 0;
    while (i < n) {
        std::int64_t j = i;
        while (j + 1 < n && uv[order[j + 1]] == uv[order[i]]) ++j;
        for (std::int64_t t = i; t <= j; ++t) tp += ev[order[t]];
        taken = j + 1;
        const double precision = static_cast<double>(tp) / static_cast<double>(taken);
        const double recall = static_cast<double>(tp) / static_cast<double>(n_pos);
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
        i = j + 1;
    }
    return {"AUC_PR", ap, Orientation::HigherBetter, {}};
}

MetricResult avu(const UncertaintyGrid& u, const BinaryGrid& err, const ThresholdSpec& thr) {
    require_compatible(u.meta(), err.meta(), "avu");
    const double tau = resolve_threshold(u, thr);
    const auto uv = u.values();
    const auto ev = err.values();
    std::int64_t agree = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const bool uncertain = uv[i] >= tau;
        const bool inaccurate = ev[i] != 0;
        if (uncertain == inaccurate) ++agree;
    }
    MetricResult r{"AVU", static_cast<double>(agree) / static_cast<double>(uv.size()),
                   Orientation::HigherBetter, {}};
    append_threshold_params(r, thr, tau);
    return r;
}

MetricResult pavpu(const UncertaintyGrid& u, const BinaryGrid& err, int window,
                   const ThresholdSpec& thr) {
    require_compatible(u.meta(), err.meta(), "pavpu");
    if (window < 1) fail(ErrorCode::InvalidWindow, "patch window must be >= 1");
    const double tau = resolve_threshold(u, thr);
    const GridMeta& meta = u.meta();
    const auto uv = u.values();
    const auto ev = err.values();

    std::int64_t agree = 0, patches = 0;
    for (int z0 = 0; z0 < meta.dims[2]; z0 += window) {
        for (int y0 = 0; y0 < meta.dims[1]; y0 += window) {
            for (int x0 = 0; x0 < meta.dims[0]; x0 += window) {
                const int x1 = std::min(x0 + window, meta.dims[0]);
                const int y1 = std::min(y0 + window, meta.dims[1]);
                const int z1 = std::min(z0 + window, meta.dims[2]);
                double sum_u = 0.0;
                std::int64_t errors = 0, voxels = 0;
                for (int z = z0; z < z1; ++z)
                    for (int y = y0; y < y1; ++y)
                        for (int x = x0; x < x1; ++x) {
                            const std::size_t i = meta.index(x, y, z);
                            sum_u += uv[i];
                            errors += ev[i];
                            ++voxels;
                        }
                const double accuracy =
                    static_cast<double>(voxels - errors) / static_cast<double>(voxels);
                const bool accurate = accuracy >= thr.patch_accuracy_threshold;
                const bool uncertain = sum_u / static_cast<double>(voxels) >= tau;
                if (accurate != uncertain) ++agree;
                ++patches;
            }
        }
    }
    MetricResult r{std::string("PAVPU_w") + std::to_string(window),
                   static_cast<double>(agree) / static_cast<double>(patches),
                   Orientation::HigherBetter, {}};
    r.params.emplace_back("window", std::to_string(window));
    r.params.emplace_back("patch_accuracy_threshold", format_g9(thr.patch_accuracy_threshold));
    append_threshold_params(r, thr, tau);
    return r;
}

MetricResult aurc(const UncertaintyGrid& u, const BinaryGrid& err) {
    require_compatible(u.meta(), err.meta(), "aurc");
    const auto uv = u.values();
    const auto ev = err.values();
    const std::vector<std::size_t> order = ascending_order(uv);
    const std::size_t n = order.size();
    double area = 0.0;
    std::int64_t errors = 0;
    for (std::size_t k = 0; k < n; ++k) {
        errors += ev[order[k]];
        area += static_cast<double>(errors) / static_cast<double>(k + 1);
    }
    return {"AURC", area / static_cast<double>(n), Orientation::LowerBetter, {}};
}

MetricResult au_arc(const UncertaintyGrid& u, const BinaryGrid& err) {
    require_compatible(u.meta(), err.meta(), "au_arc");
    const auto uv = u.values();
    const auto ev = err.values();
    const std::vector<std::size_t> order = ascending_order(uv);
    const std::size_t n = order.size();
    // accuracy over the k most-confident voxels, k = 1..N; rejecting the
    // most-uncertain fraction keeps exactly that prefix
    double area = 0.0;
    std::int64_t errors = 0;
    for (std::size_t k = 0; k < n; ++k) {
        errors += ev[order[k]];
        area += 1.0 - static_cast<double>(errors) / static_cast<double>(k + 1);
    }
    return {"AU_ARC", area / static_cast<double>(n), Orientation::HigherBetter, {}};
}

MetricResult voxel_accuracy(const UncertaintyGrid& u, const BinaryGrid& err,
                            const ThresholdSpec& thr) {
    require_compatible(u.meta(), err.meta(), "voxel_accuracy");
    const double tau = resolve_threshold(u, thr);
    const auto uv = u.values();
    const auto ev = err.values();
    std::int64_t agree = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const int predicted_error = uv[i] >= tau ? 1 : 0;
        if (predicted_error == ev[i]) ++agree;
    }
    MetricResult r{"VOXEL_ACC", static_cast<double>(agree) / static_cast<double>(uv.size()),
                   Orientation::HigherBetter, {}};
    append_threshold_params(r, thr, tau);
    return r;
}

CertaintyRatios certainty_ratios(const UncertaintyGrid& u, const BinaryGrid& err,
                                 const ThresholdSpec& thr) {
    require_compatible(u.meta(), err.meta(), "certainty_ratios");
    const double tau = resolve_threshold(u, thr);
    const auto uv = u.values();
    const auto ev = err.values();
    std::int64_t n_correct = 0, n_incorrect = 0, correct_certain = 0, uncertain_incorrect = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const bool uncertain = uv[i] >= tau;
        if (ev[i]) {
            ++n_incorrect;
            if (uncertain) ++uncertain_incorrect;
        } else {
            ++n_correct;
            if (!uncertain) ++correct_certain;
        }
    }
    if (n_correct == 0) fail(ErrorCode::NoCorrectVoxels, "no correct voxels");
    if (n_incorrect == 0) fail(ErrorCode::NoIncorrectVoxels, "no incorrect voxels");
    CertaintyRatios out;
    out.correct_certain = {"CCR",
                           static_cast<double>(correct_certain) / static_cast<double>(n_correct),
                           Orientation::HigherBetter,
                           {{"definition", "n(correct&certain)/n(correct)"}}};
    out.uncertain_incorrect = {
        "UIR", static_cast<double>(uncertain_incorrect) / static_cast<double>(n_incorrect),
        Orientation::HigherBetter,
        {{"definition", "n(uncertain&incorrect)/n(incorrect)"}}};
    append_threshold_params(out.correct_certain, thr, tau);
    append_threshold_params(out.uncertain_incorrect, thr, tau);
    return out;
}

}  // namespace segunc
