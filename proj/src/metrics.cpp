#include "segunc/metrics.hpp"

#include <cmath>

#include "segunc/format.hpp"

namespace segunc {

const char* orientation_name(Orientation o) {
    return o == Orientation::HigherBetter ? "higher_better" : "lower_better";
}

MetricResult buc(const UncertaintyGrid& u, const BinaryGrid& region) {
    require_compatible(u.meta(), region.meta(), "buc");
    const auto uv = u.values();
    const auto rv = region.values();
    double sum_in = 0.0, sum_out = 0.0;
    std::int64_t n_in = 0, n_out = 0;
    for (std::size_t i = 0; i < uv.size(); ++i) {
        if (rv[i]) {
            sum_in += uv[i];
            ++n_in;
        } else {
            sum_out += uv[i];
            ++n_out;
        }
    }
    if (n_in == 0 || n_out == 0)
        fail(ErrorCode::DegenerateRegion, "boundary region must be neither empty nor the whole grid");
    const double mean_in = sum_in / static_cast<double>(n_in);
    const double mean_out = sum_out / static_cast<double>(n_out);
    const double denom = mean_in + mean_out;
    // An all-certain map has no concentration signal either way.
    const double value = denom == 0.0 ? 0.5 : mean_in / denom;
    MetricResult r{"BUC", value, Orientation::HigherBetter, {}};
    r.params.emplace_back("region_voxels", format_g9(static_cast<double>(n_in)));
    r.params.emplace_back("mean_inside", format_g9(mean_in));
    r.params.emplace_back("mean_outside", format_g9(mean_out));
    if (denom == 0.0) r.params.emplace_back("degenerate_all_certain", "defined_value_0.5");
    return r;
}

MetricResult ba_ece(const UncertaintyGrid& u, const BinaryGrid& err, const BandField& bands,
                    std::vector<BandTableRow>* table) {
    require_compatible(u.meta(), err.meta(), "ba_ece");
    require_compatible(u.meta(), bands.meta, "ba_ece");
    const int k = bands.band_count();
    if (bands.assigned_count() == 0) fail(ErrorCode::EmptyBands, "all bands are empty");

    std::vector<double> sum_u(k, 0.0), sum_e(k, 0.0);
    const auto uv = u.values();
    const auto ev = err.values();
    for (std::size_t i = 0; i < uv.size(); ++i) {
        const std::int32_t b = bands.band_index[i];
        if (b == kBandSentinel) continue;
        sum_u[b] += uv[i];
        sum_e[b] += ev[i];
    }

    double value = 0.0;
    if (table) table->clear();
    for (int b = 0; b < k; ++b) {
        if (bands.counts[b] == 0) continue;
        const double n = static_cast<double>(bands.counts[b]);
        const double mu_u = sum_u[b] / n;
        const double mu_e = sum_e[b] / n;
        const double gap = std::abs(mu_u - mu_e);
        value += bands.weights[b] * gap;
        if (table)
            table->push_back({b, bands.counts[b], bands.mean_distance_mm[b], bands.weights[b],
                              mu_u, mu_e, gap});
    }
    MetricResult r{"BA_ECE", value, Orientation::LowerBetter, {}};
    r.params.emplace_back("bands", format_g9(static_cast<double>(k)));
    return r;
}

MetricResult space(const UncertaintyGrid& u, const BinaryGrid& err, const SmoothingSpec& spec) {
    require_compatible(u.meta(), err.meta(), "space");
    std::vector<float> err_real(err.values().begin(), err.values().end());
    const ScalarGrid smooth_u = gaussian_smooth(u.grid(), spec);
    const ScalarGrid smooth_e = gaussian_smooth(ScalarGrid(err.meta(), std::move(err_real)), spec);
    const auto a = smooth_u.values();
    const auto b = smooth_e.values();
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        acc += std::abs(static_cast<double>(a[i]) - static_cast<double>(b[i]));
    const double value = acc / static_cast<double>(a.size());
    MetricResult r{"SPACE", value, Orientation::LowerBetter, {}};
    r.params.emplace_back("sigma", format_g9(spec.sigma));
    r.params.emplace_back("sigma_unit", spec.unit == SigmaUnit::Mm ? "mm" : "voxels");
    r.params.emplace_back("truncation", format_g9(spec.truncation));
    return r;
}

}  // namespace segunc
