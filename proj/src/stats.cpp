#include "segunc/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace segunc {

const std::vector<std::string>& registry_metric_names() {
    static const std::vector<std::string> names = {
        "SPACE",    "BUC",  "BA_ECE",   "ECE",       "MCE", "VOXEL_ACC", "AUC_ROC", "AUC_PR",
        "AVU",      "PAVPU_w5", "PAVPU_w11", "AURC", "AU_ARC", "CCR",   "UIR"};
    return names;
}

Orientation metric_orientation(std::string_view name) {
    if (name == "SPACE" || name == "BA_ECE" || name == "ECE" || name == "MCE" || name == "AURC")
        return Orientation::LowerBetter;
    if (name == "BUC" || name == "VOXEL_ACC" || name == "AUC_ROC" || name == "AUC_PR" ||
        name == "AVU" || name == "AU_ARC" || name == "CCR" || name == "UIR" ||
        name.substr(0, 7) == "PAVPU_w")
        return Orientation::HigherBetter;
    fail(ErrorCode::InvalidInput, "unknown metric name: " + std::string(name));
}

bool is_spatial_metric(std::string_view name) {
    return name == "SPACE" || name == "BUC" || name == "BA_ECE";
}

void PairedSample::validate() const {
    if (clean.size() != noisy.size())
        fail(ErrorCode::InvalidInput, "paired sample sizes differ");
    if (clean.empty()) fail(ErrorCode::EmptySample, "paired sample is empty");
    for (std::size_t i = 0; i < clean.size(); ++i)
        if (!std::isfinite(clean[i]) || !std::isfinite(noisy[i]))
            fail(ErrorCode::InvalidInput, "paired sample contains non-finite values");
}

AccuracyResult discrimination_accuracy(const PairedSample& s, Orientation o) {
    s.validate();
    AccuracyResult out;
    out.win_flags.resize(s.size());
    std::int64_t wins = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const bool win = o == Orientation::HigherBetter ? s.clean[i] > s.noisy[i]
                                                        : s.clean[i] < s.noisy[i];
        out.win_flags[i] = win ? 1 : 0;
        wins += win;
    }
    out.accuracy = static_cast<double>(wins) / static_cast<double>(s.size());
    return out;
}

EffectSize cohens_d_paired(const PairedSample& s, Orientation o) {
    s.validate();
    if (s.size() < 2) fail(ErrorCode::InvalidInput, "cohens_d_paired needs >= 2 cases");
    const std::size_t n = s.size();
    std::vector<double> delta(n);
    for (std::size_t i = 0; i < n; ++i)
        delta[i] = o == Orientation::HigherBetter ? s.clean[i] - s.noisy[i]
                                                  : s.noisy[i] - s.clean[i];
    const double mean = std::accumulate(delta.begin(), delta.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double d : delta) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (sd == 0.0) return {0.0, EffectSizeStatus::ZeroVariance};
    return {mean / sd, EffectSizeStatus::Ok};
}

RelativeDifference mean_relative_difference(const PairedSample& s, Orientation o) {
    s.validate();
    double sum = 0.0;
    int used = 0, excluded = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (std::abs(s.noisy[i]) < 1e-12) {
            ++excluded;
            continue;
        }
        const double diff = o == Orientation::HigherBetter ? s.clean[i] - s.noisy[i]
                                                           : s.noisy[i] - s.clean[i];
        sum += diff / std::abs(s.noisy[i]);
        ++used;
    }
    if (used == 0) fail(ErrorCode::AllDegenerate, "all noisy values are (near) zero");
    return {sum / static_cast<double>(used) * 100.0, excluded};
}

double mcnemar_exact(std::int64_t b, std::int64_t c) {
    if (b < 0 || c < 0) fail(ErrorCode::InvalidInput, "discordant counts must be >= 0");
    const std::int64_t n = b + c;
    if (n == 0) return 1.0;
    const std::int64_t m = std::min(b, c);
    double term = std::pow(0.5, static_cast<double>(n));  // C(n,0) * 0.5^n
    double tail = term;
    for (std::int64_t k = 1; k <= m; ++k) {
        term *= static_cast<double>(n - k + 1) / static_cast<double>(k);
        tail += term;
    }
    return std::min(1.0, 2.0 * tail);
}

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(x))
        fail(ErrorCode::InvalidInput, "regularized_gamma_q requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (x < a + 1.0) {
        // series for the lower function P(a, x)
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int i = 0; i < 2000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * 1e-17) break;
        }
        const double p = sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
        return std::clamp(1.0 - p, 0.0, 1.0);
    }
    // continued fraction for Q(a, x), modified Lentz
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 2000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-17) break;
    }
    const double q = std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
    return std::clamp(q, 0.0, 1.0);
}

double chi2_survival(double x, int df) {
    if (df < 1) fail(ErrorCode::InvalidInput, "chi2_survival requires df >= 1");
    return regularized_gamma_q(0.5 * static_cast<double>(df), 0.5 * x);
}

CochranQResult cochran_q(const std::vector<std::vector<std::uint8_t>>& success) {
    const std::size_t rows = success.size();
    if (rows < 2) fail(ErrorCode::DegenerateMatrix, "cochran_q needs >= 2 cases");
    const std::size_t k = success.front().size();
    if (k < 2) fail(ErrorCode::DegenerateMatrix, "cochran_q needs >= 2 metrics");
    for (const auto& row : success) {
        if (row.size() != k) fail(ErrorCode::DegenerateMatrix, "ragged success matrix");
        for (std::uint8_t v : row)
            if (v > 1) fail(ErrorCode::InvalidInput, "success matrix must be binary");
    }

    std::vector<double> col(k, 0.0);
    double row_sum_total = 0.0, row_sq_total = 0.0;
    for (const auto& row : success) {
        double r = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
            col[j] += row[j];
            r += row[j];
        }
        row_sum_total += r;
        row_sq_total += r * r;
    }
    const double kd = static_cast<double>(k);
    const double col_mean = row_sum_total / kd;
    double col_dev = 0.0;
    for (double c : col) col_dev += (c - col_mean) * (c - col_mean);
    const double denom = kd * row_sum_total - row_sq_total;
    CochranQResult out;
    out.df = static_cast<int>(k) - 1;
    if (denom == 0.0) {
        out.q = 0.0;
        out.p = 1.0;
        return out;
    }
    out.q = kd * (kd - 1.0) * col_dev / denom;
    out.p = chi2_survival(out.q, out.df);
    return out;
}

std::vector<double> holm_adjust(std::span<const double> p) {
    for (double v : p)
        if (!(v >= 0.0) || !(v <= 1.0)) fail(ErrorCode::InvalidInput, "p-values must lie in [0, 1]");
    const std::size_t m = p.size();
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    std::vector<double> out(m);
    double running = 0.0;
    for (std::size_t r = 0; r < m; ++r) {
        const double adj = static_cast<double>(m - r) * p[order[r]];
        running = std::max(running, adj);
        out[order[r]] = std::min(1.0, running);
    }
    return out;
}

namespace {

double metric_value(const std::vector<MetricResult>& metrics, const std::string& name,
                    const std::string& case_id) {
    for (const MetricResult& m : metrics)
        if (m.name == name) return m.value;
    fail(ErrorCode::InconsistentCases, "case " + case_id + " is missing metric " + name);
}

}  // namespace

ComparisonReport build_comparison_report(const std::vector<CaseReport>& cases,
                                         const std::string& clean_key,
                                         const std::string& noisy_key) {
    if (cases.size() < 2) fail(ErrorCode::InvalidInput, "comparison needs >= 2 cases");

    std::vector<const CaseReport*> sorted;
    sorted.reserve(cases.size());
    for (const CaseReport& c : cases) sorted.push_back(&c);
    std::sort(sorted.begin(), sorted.end(),
              [](const CaseReport* a, const CaseReport* b) { return a->case_id < b->case_id; });

    // Metric set: registry order restricted to what the first case carries.
    const CaseReport& first = *sorted.front();
    const auto it_clean = first.per_map.find(clean_key);
    if (it_clean == first.per_map.end())
        fail(ErrorCode::InvalidInput, "map key not found: " + clean_key);
    std::vector<std::string> names;
    for (const std::string& n : registry_metric_names())
        for (const MetricResult& m : it_clean->second)
            if (m.name == n) names.push_back(n);
    if (names.empty()) fail(ErrorCode::InconsistentCases, "no metrics found in first case");

    ComparisonReport report;
    report.metric_order = names;
    report.case_count = static_cast<int>(sorted.size());

    for (const std::string& name : names) {
        PairedSample sample;
        for (const CaseReport* c : sorted) {
            const auto ic = c->per_map.find(clean_key);
            const auto in = c->per_map.find(noisy_key);
            if (ic == c->per_map.end() || in == c->per_map.end())
                fail(ErrorCode::InconsistentCases, "case " + c->case_id + " is missing a map");
            sample.clean.push_back(metric_value(ic->second, name, c->case_id));
            sample.noisy.push_back(metric_value(in->second, name, c->case_id));
        }
        const Orientation o = metric_orientation(name);
        MetricComparison row;
        row.name = name;
        row.orientation = o;
        const AccuracyResult acc = discrimination_accuracy(sample, o);
        row.accuracy = acc.accuracy;
        row.win_flags = acc.win_flags;
        for (std::size_t i = 0; i < sample.size(); ++i) {
            if (acc.win_flags[i])
                ++row.wins;
            else if (sample.clean[i] == sample.noisy[i])
                ++row.ties;
            else
                ++row.losses;
        }
        row.effect = cohens_d_paired(sample, o);
        row.rel_diff = mean_relative_difference(sample, o);
        report.rows.push_back(std::move(row));
    }

    const std::size_t k = report.rows.size();
    const std::size_t n_cases = sorted.size();

    std::vector<std::vector<std::uint8_t>> success(n_cases, std::vector<std::uint8_t>(k, 0));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t i = 0; i < n_cases; ++i) success[i][j] = report.rows[j].win_flags[i];
    if (k >= 2) report.cochran = cochran_q(success);

    report.mcnemar_p.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            std::int64_t b = 0, c = 0;
            for (std::size_t t = 0; t < n_cases; ++t) {
                const bool wi = report.rows[i].win_flags[t];
                const bool wj = report.rows[j].win_flags[t];
                b += wi && !wj;
                c += !wi && wj;
            }
            const double p = mcnemar_exact(b, c);
            report.mcnemar_p[i][j] = p;
            report.mcnemar_p[j][i] = p;
        }
    }

    report.holm_p.assign(k, std::vector<double>(k, 1.0));
    for (std::size_t i = 0; i < k; ++i) {
        std::vector<double> family;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) family.push_back(report.mcnemar_p[i][j]);
        const std::vector<double> adjusted = holm_adjust(family);
        std::size_t t = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) report.holm_p[i][j] = adjusted[t++];
    }

    constexpr double kAlpha = 0.05;
    constexpr double kLowAccuracy = 0.70;
    for (std::size_t i = 0; i < k; ++i) {
        bool beats_all = true;
        bool beats_low = true;
        int low_count = 0;
        for (std::size_t j = 0; j < k; ++j) {
            if (j == i) continue;
            const bool beaten = report.rows[i].accuracy > report.rows[j].accuracy &&
                                report.holm_p[i][j] <= kAlpha;
            beats_all = beats_all && beaten;
            if (report.rows[j].accuracy <= kLowAccuracy) {
                ++low_count;
                beats_low = beats_low && beaten;
            }
        }
        report.rows[i].outperforms_all = beats_all;
        report.rows[i].outperforms_low_acc = low_count > 0 && beats_low;
    }
    return report;
}

}  // namespace segunc
