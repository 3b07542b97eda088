#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "segunc/evaluate.hpp"
#include "segunc/geometry.hpp"
#include "segunc/phantom.hpp"
#include "test_util.hpp"

using namespace segunc;
using namespace segunc::test;

namespace {

PhantomConfig small_config(std::uint64_t seed) {
    PhantomConfig cfg;
    cfg.dims = {48, 48, 48};
    cfg.semi_axis_min = 8.0;
    cfg.semi_axis_max = 14.0;
    cfg.center_jitter = 3.0;
    cfg.seed = seed;
    return cfg;
}

double mean_of(std::span<const float> v) {
    double s = 0.0;
    for (float x : v) s += x;
    return s / static_cast<double>(v.size());
}

BinaryGrid mask_of(const LabelGrid& labels) {
    std::vector<std::uint8_t> v(labels.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = labels.values()[i] ? 1 : 0;
    return BinaryGrid(labels.meta(), std::move(v));
}

}  // namespace

TEST_CASE("same seed and index give a bit-identical case") {
    const PhantomConfig cfg = small_config(321);
    const PhantomCase a = make_phantom(cfg, 3);
    const PhantomCase b = make_phantom(cfg, 3);
    CHECK(std::equal(a.gt.values().begin(), a.gt.values().end(), b.gt.values().begin()));
    CHECK(std::equal(a.pred.values().begin(), a.pred.values().end(), b.pred.values().begin()));
    CHECK(std::equal(a.clean.values().begin(), a.clean.values().end(), b.clean.values().begin()));
    CHECK(std::equal(a.noisy.values().begin(), a.noisy.values().end(), b.noisy.values().begin()));
    CHECK(a.case_seed == b.case_seed);
}

TEST_CASE("different case indices give different volumes") {
    const PhantomConfig cfg = small_config(321);
    const PhantomCase a = make_phantom(cfg, 0);
    const PhantomCase b = make_phantom(cfg, 1);
    CHECK_FALSE(
        std::equal(a.clean.values().begin(), a.clean.values().end(), b.clean.values().begin()));
    CHECK_FALSE(std::equal(a.gt.values().begin(), a.gt.values().end(), b.gt.values().begin()));
}

TEST_CASE("zero amplitude makes the prediction equal the ground truth") {
    PhantomConfig cfg = small_config(99);
    cfg.perturbation_amplitude = 0.0;
    const PhantomCase c = make_phantom(cfg, 0);
    CHECK(std::equal(c.gt.values().begin(), c.gt.values().end(), c.pred.values().begin()));
    CHECK(error_map(c.pred, c.gt).count_set() == 0);
}

TEST_CASE("mean matching holds within 1e-3") {
    const PhantomConfig cfg = small_config(2024);
    for (int i = 0; i < 5; ++i) {
        const PhantomCase c = make_phantom(cfg, i);
        CHECK(std::abs(mean_of(c.clean.values()) - mean_of(c.noisy.values())) <= 1e-3);
    }
}

TEST_CASE("errors lie within the perturbation reach of the ground-truth surface") {
    const PhantomConfig cfg = small_config(77);
    for (int i = 0; i < 4; ++i) {
        const PhantomCase c = make_phantom(cfg, i);
        const BinaryGrid err = error_map(c.pred, c.gt);
        if (err.count_set() == 0) continue;
        const BinaryGrid gt_surf = surface(mask_of(c.gt));
        const ScalarGrid dist = distance_field(gt_surf);
        // continuous displacement is <= amplitude; allow one voxel diagonal of
        // discretization slack on each side
        const double diag = std::sqrt(cfg.spacing[0] * cfg.spacing[0] +
                                      cfg.spacing[1] * cfg.spacing[1] +
                                      cfg.spacing[2] * cfg.spacing[2]);
        const double reach = cfg.perturbation_amplitude + 2.0 * diag;
        for (std::size_t v = 0; v < err.size(); ++v)
            if (err.values()[v]) CHECK(dist.values()[v] <= reach);
    }
}

TEST_CASE("the clean map peaks on or adjacent to the predicted surface") {
    const PhantomConfig cfg = small_config(13);
    for (int i = 0; i < 4; ++i) {
        const PhantomCase c = make_phantom(cfg, i);
        const BinaryGrid pred_surf = surface(mask_of(c.pred));
        const ScalarGrid dist = distance_field(pred_surf);
        float best = -1.0f;
        std::size_t best_at = 0;
        for (std::size_t v = 0; v < c.clean.size(); ++v)
            if (c.clean.values()[v] > best) {
                best = c.clean.values()[v];
                best_at = v;
            }
        const double diag = std::sqrt(3.0);
        CHECK(dist.values()[best_at] <= diag);
    }
}

TEST_CASE("BUC separates the clean and noisy maps by construction") {
    const PhantomConfig cfg = small_config(20240501);
    EvaluationParams params;
    for (int i = 0; i < 6; ++i) {
        const PhantomCase c = make_phantom(cfg, i);
        const CaseGeometry geo = build_case_geometry(c.gt, c.pred, params);
        REQUIRE(geo.region_ok);
        const double clean_buc = buc(c.clean, geo.region).value;
        const double noisy_buc = buc(c.noisy, geo.region).value;
        CHECK(clean_buc > noisy_buc);
        CHECK(error_map(c.pred, c.gt).count_set() > 0);
    }
}

TEST_CASE("suite generation derives disjoint per-case streams") {
    const PhantomConfig cfg = small_config(5);
    const std::vector<PhantomCase> suite = make_suite(cfg, 3);
    REQUIRE(suite.size() == 3);
    CHECK(suite[0].id == "case_000");
    CHECK(suite[2].id == "case_002");
    CHECK(suite[0].case_seed != suite[1].case_seed);
    CHECK(suite[1].case_seed != suite[2].case_seed);
    CHECK(derive_case_seed(cfg.seed, 0) == suite[0].case_seed);
    CHECK_THROWS_AS(make_suite(cfg, 0), Error);
}

TEST_CASE("invalid configs are rejected") {
    PhantomConfig cfg = small_config(1);
    cfg.semi_axis_max = 30.0;  // 30 + jitter + amplitude + 2 > 24
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = small_config(1);
    cfg.semi_axis_min = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = small_config(1);
    cfg.perturbation_amplitude = -1.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = small_config(1);
    cfg.decay_scale_mm = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    CHECK_THROWS_AS(make_phantom(small_config(1), -1), Error);
}

TEST_CASE("the scattered preset spreads errors beyond the boundary reach") {
    PhantomConfig cfg = small_config(404);
    cfg.preset = PhantomPreset::Scattered;
    const PhantomCase c = make_phantom(cfg, 0);
    const BinaryGrid err = error_map(c.pred, c.gt);
    CHECK(err.count_set() > 0);
    const ScalarGrid dist = distance_field(surface(mask_of(c.gt)));
    double farthest = 0.0;
    for (std::size_t v = 0; v < err.size(); ++v)
        if (err.values()[v]) farthest = std::max(farthest, static_cast<double>(dist.values()[v]));
    CHECK(farthest > cfg.perturbation_amplitude + 2.0 * std::sqrt(3.0));
    // flips are sparse: the error rate stays near the configured one
    const double rate =
        static_cast<double>(err.count_set()) / static_cast<double>(err.size());
    CHECK(rate > 0.5 * cfg.scattered_error_rate);
    CHECK(rate < 2.0 * cfg.scattered_error_rate);
}
