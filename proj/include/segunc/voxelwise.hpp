#pragma once

#include "segunc/grid.hpp"
#include "segunc/metrics.hpp"

namespace segunc {

enum class UncThresholdKind { Mean, Fixed, Otsu };

// Threshold used to split voxels (or patches) into certain vs uncertain.
struct ThresholdSpec {
    UncThresholdKind kind = UncThresholdKind::Mean;
    double fixed_tau = 0.5;
    double patch_accuracy_threshold = 0.5;

    void validate() const;
};

struct BinningSpec {
    int bin_count = 15;  // equal-width bins over [0, 1]

    void validate() const;
};

// Uncertainty threshold value for a given map under the spec.
double resolve_threshold(const UncertaintyGrid& u, const ThresholdSpec& spec);

struct CalibrationErrors {
    MetricResult ece;
    MetricResult mce;
};

// Equal-width binning of voxels by uncertainty; per-bin |mean u - mean err|
// aggregated population-weighted (ECE) and as a maximum (MCE).
CalibrationErrors calibration_errors(const UncertaintyGrid& u, const BinaryGrid& err,
                                     const BinningSpec& bins);

// Rank-statistic AUC of u as a score for err=1, midrank tie handling.
MetricResult auc_roc(const UncertaintyGrid& u, const BinaryGrid& err);

// Area under precision-recall by step-wise interpolation over distinct
// thresholds descending.
MetricResult auc_pr(const UncertaintyGrid& u, const BinaryGrid& err);

// (accurate&certain + inaccurate&uncertain) / all voxels.
MetricResult avu(const UncertaintyGrid& u, const BinaryGrid& err, const ThresholdSpec& thr);

// AvU over non-overlapping window^3 tiles; border partial tiles kept.
MetricResult pavpu(const UncertaintyGrid& u, const BinaryGrid& err, int window,
                   const ThresholdSpec& thr);

// Area under the risk-coverage curve; coverage granularity is one voxel.
MetricResult aurc(const UncertaintyGrid& u, const BinaryGrid& err);

// Mean accuracy over rejection fractions k/N, k = 0..N-1 (reject most
// uncertain first).
MetricResult au_arc(const UncertaintyGrid& u, const BinaryGrid& err);

// Accuracy of thresholded uncertainty as a predictor of the error indicator.
MetricResult voxel_accuracy(const UncertaintyGrid& u, const BinaryGrid& err,
                            const ThresholdSpec& thr);

struct CertaintyRatios {
    MetricResult correct_certain;      // n(correct & certain) / n(correct)
    MetricResult uncertain_incorrect;  // n(uncertain & incorrect) / n(incorrect)
};

CertaintyRatios certainty_ratios(const UncertaintyGrid& u, const BinaryGrid& err,
                                 const ThresholdSpec& thr);

}  // namespace segunc
