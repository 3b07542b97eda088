#pragma once

#include <string>
#include <utility>
#include <vector>

#include "segunc/geometry.hpp"
#include "segunc/grid.hpp"

namespace segunc {

enum class Orientation { HigherBetter, LowerBetter };

const char* orientation_name(Orientation o);

// A named metric value plus the configuration it was computed under.
struct MetricResult {
    std::string name;
    double value = 0.0;
    Orientation orientation = Orientation::HigherBetter;
    std::vector<std::pair<std::string, std::string>> params;
};

// Per-band calibration table exposed by ba_ece for reporting.
struct BandTableRow {
    int band = 0;
    std::int64_t count = 0;
    double mean_distance_mm = 0.0;
    double weight = 0.0;
    double mean_uncertainty = 0.0;
    double mean_error = 0.0;
    double gap = 0.0;
};

// Boundary uncertainty concentration: mean uncertainty inside the boundary
// region divided by the sum of the inside and outside means. 0.5 when the map
// carries no signal at all (both means zero).
MetricResult buc(const UncertaintyGrid& u, const BinaryGrid& region);

// Boundary-aware calibration error: inverse-distance-weighted absolute gap
// between mean uncertainty and mean error per distance band.
MetricResult ba_ece(const UncertaintyGrid& u, const BinaryGrid& err, const BandField& bands,
                    std::vector<BandTableRow>* table = nullptr);

// Mean absolute difference between the Gaussian-smoothed uncertainty map and
// the Gaussian-smoothed error map, over the whole grid.
MetricResult space(const UncertaintyGrid& u, const BinaryGrid& err, const SmoothingSpec& spec);

}  // namespace segunc
