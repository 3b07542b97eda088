#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "segunc/stats.hpp"

using namespace segunc;

namespace {

// Independent chi-square survival oracle: exact recurrence
//   Q(1/2, x) = erfc(sqrt(x)),  Q(1, x) = exp(-x),
//   Q(a+1, x) = Q(a, x) + x^a exp(-x) / Gamma(a+1),
// evaluated in long double. Covers integer df >= 1.
long double chi2_sf_oracle(long double x, int df) {
    const long double half_x = 0.5L * x;
    long double a, q;
    if (df % 2 == 1) {
        a = 0.5L;
        q = erfcl(sqrtl(half_x));
    } else {
        a = 1.0L;
        q = expl(-half_x);
    }
    while (a + 0.5L <= 0.5L * df) {
        q += powl(half_x, a) * expl(-half_x) / tgammal(a + 1.0L);
        a += 1.0L;
    }
    return q;
}

PairedSample sample(std::vector<double> clean, std::vector<double> noisy) {
    return PairedSample{std::move(clean), std::move(noisy)};
}

}  // namespace

TEST_CASE("the orientation registry covers every metric exactly once") {
    for (const std::string& name : registry_metric_names()) CHECK_NOTHROW(metric_orientation(name));
    CHECK(metric_orientation("SPACE") == Orientation::LowerBetter);
    CHECK(metric_orientation("BA_ECE") == Orientation::LowerBetter);
    CHECK(metric_orientation("ECE") == Orientation::LowerBetter);
    CHECK(metric_orientation("MCE") == Orientation::LowerBetter);
    CHECK(metric_orientation("AURC") == Orientation::LowerBetter);
    for (const char* name : {"BUC", "AUC_ROC", "AUC_PR", "AVU", "PAVPU_w5", "PAVPU_w11",
                             "AU_ARC", "VOXEL_ACC", "CCR", "UIR"})
        CHECK(metric_orientation(name) == Orientation::HigherBetter);
    CHECK_THROWS_AS(metric_orientation("NOPE"), Error);
    CHECK(is_spatial_metric("SPACE"));
    CHECK(is_spatial_metric("BUC"));
    CHECK(is_spatial_metric("BA_ECE"));
    CHECK_FALSE(is_spatial_metric("ECE"));
}

TEST_CASE("discrimination accuracy counts strict oriented wins") {
    SUBCASE("all strict wins give 100%") {
        const AccuracyResult r = discrimination_accuracy(
            sample({0.9, 0.8, 0.7}, {0.1, 0.2, 0.3}), Orientation::HigherBetter);
        CHECK(r.accuracy == 1.0);
    }
    SUBCASE("ties count as losses") {
        const AccuracyResult r = discrimination_accuracy(
            sample({0.5, 0.5}, {0.5, 0.5}), Orientation::HigherBetter);
        CHECK(r.accuracy == 0.0);
    }
    SUBCASE("win pattern 1101 gives 75%") {
        const AccuracyResult r = discrimination_accuracy(
            sample({0.9, 0.9, 0.1, 0.9}, {0.5, 0.5, 0.5, 0.5}), Orientation::HigherBetter);
        CHECK(r.accuracy == 0.75);
        CHECK(r.win_flags == std::vector<std::uint8_t>{1, 1, 0, 1});
    }
    SUBCASE("lower-better flips the comparison") {
        const AccuracyResult r = discrimination_accuracy(
            sample({0.1, 0.9}, {0.5, 0.5}), Orientation::LowerBetter);
        CHECK(r.win_flags == std::vector<std::uint8_t>{1, 0});
    }
    CHECK_THROWS_AS(discrimination_accuracy(sample({}, {}), Orientation::HigherBetter), Error);
}

TEST_CASE("paired Cohen's d uses the n-1 denominator") {
    // deltas {1,2,3}: mean 2, sd 1 -> d = 2
    const EffectSize d =
        cohens_d_paired(sample({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}), Orientation::HigherBetter);
    CHECK(d.status == EffectSizeStatus::Ok);
    CHECK(d.d == doctest::Approx(2.0).epsilon(1e-12));

    SUBCASE("swapping clean and noisy negates d") {
        const EffectSize swapped =
            cohens_d_paired(sample({0.0, 0.0, 0.0}, {1.0, 2.0, 3.0}), Orientation::HigherBetter);
        CHECK(swapped.d == doctest::Approx(-2.0).epsilon(1e-12));
    }
    SUBCASE("lower-better orientation flips the sign") {
        const EffectSize lb =
            cohens_d_paired(sample({1.0, 2.0, 3.0}, {0.0, 0.0, 0.0}), Orientation::LowerBetter);
        CHECK(lb.d == doctest::Approx(-2.0).epsilon(1e-12));
    }
    SUBCASE("identical pairs report zero variance, never a coerced 0") {
        const EffectSize z =
            cohens_d_paired(sample({0.5, 0.5}, {0.5, 0.5}), Orientation::HigherBetter);
        CHECK(z.status == EffectSizeStatus::ZeroVariance);
    }
    SUBCASE("constant nonzero delta also has zero variance") {
        const EffectSize z =
            cohens_d_paired(sample({0.6, 0.7}, {0.5, 0.6}), Orientation::HigherBetter);
        CHECK(z.status == EffectSizeStatus::ZeroVariance);
    }
}

TEST_CASE("mean relative difference is oriented and reported in percent") {
    CHECK(mean_relative_difference(sample({0.5, 0.5}, {0.5, 0.5}), Orientation::HigherBetter)
              .mean_percent == 0.0);
    CHECK(mean_relative_difference(sample({0.9}, {0.6}), Orientation::HigherBetter).mean_percent ==
          doctest::Approx(50.0).epsilon(1e-12));
    CHECK(mean_relative_difference(sample({0.2}, {0.4}), Orientation::LowerBetter).mean_percent ==
          doctest::Approx(50.0).epsilon(1e-12));
    SUBCASE("near-zero noisy values are excluded and counted") {
        const RelativeDifference r = mean_relative_difference(
            sample({0.9, 0.9}, {0.6, 1e-15}), Orientation::HigherBetter);
        CHECK(r.excluded_cases == 1);
        CHECK(r.mean_percent == doctest::Approx(50.0).epsilon(1e-12));
    }
    SUBCASE("all-degenerate denominators are an error") {
        CHECK_THROWS_AS(
            mean_relative_difference(sample({0.9}, {0.0}), Orientation::HigherBetter), Error);
    }
}

TEST_CASE("exact McNemar on discordant counts") {
    CHECK(mcnemar_exact(0, 0) == 1.0);
    // b=10, c=0: 2 * (1/2)^10
    CHECK(mcnemar_exact(10, 0) == doctest::Approx(0.001953125).epsilon(1e-12));
    CHECK(mcnemar_exact(10, 0) == mcnemar_exact(0, 10));
    SUBCASE("symmetry and range") {
        for (int b = 0; b <= 12; ++b) {
            for (int c = 0; c <= 12; ++c) {
                const double p = mcnemar_exact(b, c);
                CHECK(p == mcnemar_exact(c, b));
                CHECK(p > 0.0);
                CHECK(p <= 1.0);
            }
        }
    }
    SUBCASE("p decreases as the counts grow more lopsided at fixed total") {
        const int total = 14;
        double prev = 1.1;
        for (int b = 7; b <= 14; ++b) {
            const double p = mcnemar_exact(b, total - b);
            CHECK(p <= prev + 1e-15);
            prev = p;
        }
    }
    CHECK_THROWS_AS(mcnemar_exact(-1, 2), Error);
}

TEST_CASE("regularized gamma Q against the recurrence oracle") {
    for (int df = 1; df <= 24; ++df) {
        for (double x : {0.05, 0.5, 1.0, 2.0, 3.7, 8.0, 15.0, 30.0, 60.0}) {
            const double mine = chi2_survival(x, df);
            const long double oracle = chi2_sf_oracle(x, df);
            if (oracle > 1e-280) {
                CHECK(std::abs(mine - static_cast<double>(oracle)) <=
                      1e-10 * static_cast<double>(oracle));
            }
        }
    }
    CHECK(chi2_survival(0.0, 3) == 1.0);
    CHECK_THROWS_AS(chi2_survival(1.0, 0), Error);
    CHECK_THROWS_AS(regularized_gamma_q(-1.0, 1.0), Error);
}

TEST_CASE("Cochran's Q on hand matrices") {
    SUBCASE("all metrics succeed everywhere: denominator 0, p = 1") {
        const std::vector<std::vector<std::uint8_t>> s = {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}};
        const CochranQResult r = cochran_q(s);
        CHECK(r.q == 0.0);
        CHECK(r.p == 1.0);
    }
    SUBCASE("identical columns have no column variation: Q = 0") {
        const std::vector<std::vector<std::uint8_t>> s = {{1, 1}, {0, 0}, {1, 1}, {0, 0}};
        const CochranQResult r = cochran_q(s);
        CHECK(r.q == 0.0);
        CHECK(r.p == 1.0);
    }
    SUBCASE("4x3 matrix matches the direct formula and the chi-square oracle") {
        const std::vector<std::vector<std::uint8_t>> s = {
            {1, 0, 0}, {1, 1, 0}, {1, 0, 1}, {1, 1, 0}};
        const CochranQResult r = cochran_q(s);
        // direct formula, recomputed independently
        const double k = 3.0;
        const double col[3] = {4, 2, 1};
        const double row[4] = {1, 2, 2, 2};
        double total = 0.0, row_sq = 0.0;
        for (double c : col) total += c;
        for (double rr : row) row_sq += rr * rr;
        const double mean_col = total / k;
        double dev = 0.0;
        for (double c : col) dev += (c - mean_col) * (c - mean_col);
        const double q_expected = k * (k - 1.0) * dev / (k * total - row_sq);
        CHECK(r.q == doctest::Approx(q_expected).epsilon(1e-12));
        CHECK(r.df == 2);
        CHECK(r.p ==
              doctest::Approx(static_cast<double>(chi2_sf_oracle(q_expected, 2))).epsilon(1e-10));
    }
    CHECK_THROWS_AS(cochran_q({{1, 0}}), Error);
    CHECK_THROWS_AS(cochran_q({{1}, {0}}), Error);
    CHECK_THROWS_AS(cochran_q({{1, 0}, {1}}), Error);
}

TEST_CASE("Holm adjustment") {
    SUBCASE("single p is unchanged") {
        CHECK(holm_adjust(std::vector<double>{0.03}) == std::vector<double>{0.03});
    }
    SUBCASE("all ones stay ones") {
        CHECK(holm_adjust(std::vector<double>{1.0, 1.0, 1.0}) ==
              std::vector<double>{1.0, 1.0, 1.0});
    }
    SUBCASE("worked step-down example") {
        const std::vector<double> adj = holm_adjust(std::vector<double>{0.01, 0.04, 0.03});
        REQUIRE(adj.size() == 3);
        CHECK(adj[0] == doctest::Approx(0.03).epsilon(1e-15));
        CHECK(adj[1] == doctest::Approx(0.06).epsilon(1e-15));
        CHECK(adj[2] == doctest::Approx(0.06).epsilon(1e-15));
    }
    SUBCASE("monotone in the sorted order and pointwise >= input") {
        const std::vector<double> p = {0.2, 0.01, 0.8, 0.04, 0.04, 0.5};
        const std::vector<double> adj = holm_adjust(p);
        for (std::size_t i = 0; i < p.size(); ++i) CHECK(adj[i] >= p[i]);
        std::vector<std::pair<double, double>> pairs;
        for (std::size_t i = 0; i < p.size(); ++i) pairs.emplace_back(p[i], adj[i]);
        std::sort(pairs.begin(), pairs.end());
        for (std::size_t i = 1; i < pairs.size(); ++i) CHECK(pairs[i].second >= pairs[i - 1].second);
    }
    CHECK_THROWS_AS(holm_adjust(std::vector<double>{1.5}), Error);
}

TEST_CASE("comparison report assembles accuracies, effect sizes and test matrices") {
    // Two metrics, four cases. METRIC_A (higher-better) wins cases 0-2;
    // METRIC_B (lower-better here: use AURC) wins the same cases -> identical
    // win flags -> McNemar p = 1 between them.
    std::vector<CaseReport> cases;
    const double a_clean[4] = {0.9, 0.8, 0.7, 0.1};
    const double a_noisy[4] = {0.5, 0.5, 0.5, 0.5};
    const double b_clean[4] = {0.1, 0.2, 0.3, 0.9};
    const double b_noisy[4] = {0.5, 0.5, 0.5, 0.5};
    for (int i = 0; i < 4; ++i) {
        CaseReport c;
        c.case_id = "case_" + std::to_string(i);
        c.per_map["clean"] = {
            {"AUC_ROC", a_clean[i], Orientation::HigherBetter, {}},
            {"AURC", b_clean[i], Orientation::LowerBetter, {}},
        };
        c.per_map["noisy"] = {
            {"AUC_ROC", a_noisy[i], Orientation::HigherBetter, {}},
            {"AURC", b_noisy[i], Orientation::LowerBetter, {}},
        };
        cases.push_back(std::move(c));
    }
    const ComparisonReport report = build_comparison_report(cases, "clean", "noisy");
    REQUIRE(report.rows.size() == 2);
    CHECK(report.metric_order == std::vector<std::string>{"AUC_ROC", "AURC"});
    CHECK(report.rows[0].accuracy == 0.75);
    CHECK(report.rows[1].accuracy == 0.75);
    CHECK(report.rows[0].wins == 3);
    CHECK(report.rows[0].losses == 1);
    CHECK(report.rows[0].ties == 0);
    CHECK(report.mcnemar_p[0][1] == 1.0);
    CHECK(report.holm_p[0][1] == 1.0);
    CHECK(report.case_count == 4);
    CHECK_FALSE(report.rows[0].outperforms_all);

    SUBCASE("a missing metric in one case is inconsistent") {
        cases[2].per_map["noisy"].pop_back();
        CHECK_THROWS_AS(build_comparison_report(cases, "clean", "noisy"), Error);
    }
    SUBCASE("a missing map key is inconsistent") {
        cases[1].per_map.erase("noisy");
        CHECK_THROWS_AS(build_comparison_report(cases, "clean", "noisy"), Error);
    }
}

TEST_CASE("win flags are invariant under increasing rescale of a higher-better metric") {
    std::vector<CaseReport> cases;
    const double clean[3] = {0.9, 0.4, 0.7};
    const double noisy[3] = {0.5, 0.6, 0.2};
    for (int scale_pass = 0; scale_pass < 1; ++scale_pass) {
        for (int i = 0; i < 3; ++i) {
            CaseReport c;
            c.case_id = "c" + std::to_string(i);
            c.per_map["clean"] = {{"BUC", clean[i], Orientation::HigherBetter, {}}};
            c.per_map["noisy"] = {{"BUC", noisy[i], Orientation::HigherBetter, {}}};
            cases.push_back(std::move(c));
        }
    }
    const ComparisonReport base = build_comparison_report(cases, "clean", "noisy");
    // apply x -> x^3 (strictly increasing on [0,1]) to both sides
    std::vector<CaseReport> rescaled = cases;
    for (CaseReport& c : rescaled)
        for (auto& [key, metrics] : c.per_map)
            for (MetricResult& mr : metrics) mr.value = mr.value * mr.value * mr.value;
    const ComparisonReport after = build_comparison_report(rescaled, "clean", "noisy");
    CHECK(base.rows[0].win_flags == after.rows[0].win_flags);
    CHECK(base.rows[0].accuracy == after.rows[0].accuracy);
    CHECK((base.rows[0].effect.d > 0) == (after.rows[0].effect.d > 0));
}
