#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segunc/metrics.hpp"

namespace segunc {

// Fixed registry of every metric the engine produces, in report order.
const std::vector<std::string>& registry_metric_names();

// Orientation per metric name; throws on unknown names.
Orientation metric_orientation(std::string_view name);

// The three spatially-aware focus metrics.
bool is_spatial_metric(std::string_view name);

// Per-case metric value on the clean map and on the noisy map.
struct PairedSample {
    std::vector<double> clean;
    std::vector<double> noisy;

    std::size_t size() const { return clean.size(); }
    void validate() const;
};

struct AccuracyResult {
    double accuracy = 0.0;                // wins / cases, ties count as losses
    std::vector<std::uint8_t> win_flags;  // per case
};

AccuracyResult discrimination_accuracy(const PairedSample& s, Orientation o);

enum class EffectSizeStatus { Ok, ZeroVariance };

struct EffectSize {
    double d = 0.0;
    EffectSizeStatus status = EffectSizeStatus::Ok;
};

// Paired Cohen's d: mean of oriented per-case differences over their sample
// standard deviation (n-1 denominator). Positive favors the clean map.
EffectSize cohens_d_paired(const PairedSample& s, Orientation o);

struct RelativeDifference {
    double mean_percent = 0.0;
    int excluded_cases = 0;  // |noisy| < 1e-12
};

RelativeDifference mean_relative_difference(const PairedSample& s, Orientation o);

// Exact two-sided binomial McNemar test on discordant counts.
double mcnemar_exact(std::int64_t b, std::int64_t c);

struct CochranQResult {
    double q = 0.0;
    double p = 1.0;
    int df = 0;
};

// Cochran's Q over a cases x metrics binary success matrix.
CochranQResult cochran_q(const std::vector<std::vector<std::uint8_t>>& success);

// Step-down Holm adjustment, returned in the input order.
std::vector<double> holm_adjust(std::span<const double> p);

// Upper regularized incomplete gamma Q(a, x).
double regularized_gamma_q(double a, double x);

// Chi-square survival function with df degrees of freedom.
double chi2_survival(double x, int df);

// One comparison-table row (mirrors the per-metric results table).
struct MetricComparison {
    std::string name;
    Orientation orientation = Orientation::HigherBetter;
    double accuracy = 0.0;  // fraction in [0, 1]
    std::int64_t wins = 0, losses = 0, ties = 0;
    EffectSize effect;
    RelativeDifference rel_diff;
    std::vector<std::uint8_t> win_flags;
    // Significance annotations for focus metrics, following the scheme of
    // Holm-adjusted pairwise McNemar tests at alpha = 0.05:
    bool outperforms_all = false;        // significantly beats every other metric
    bool outperforms_low_acc = false;    // significantly beats all metrics with accuracy <= 70%
};

struct ComparisonReport {
    std::vector<std::string> metric_order;
    std::vector<MetricComparison> rows;
    CochranQResult cochran;
    std::vector<std::vector<double>> mcnemar_p;  // pairwise; diagonal = 1
    std::vector<std::vector<double>> holm_p;     // Holm-adjusted per row family
    int case_count = 0;
};

// Per-case metric values grouped by map key ("clean"/"noisy"/...).
struct CaseReport {
    std::string case_id;
    std::map<std::string, std::vector<MetricResult>> per_map;
};

ComparisonReport build_comparison_report(const std::vector<CaseReport>& cases,
                                         const std::string& clean_key,
                                         const std::string& noisy_key);

}  // namespace segunc
