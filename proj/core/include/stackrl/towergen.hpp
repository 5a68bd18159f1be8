#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "stackrl/geometry.hpp"
#include "stackrl/seeding.hpp"
#include "stackrl/stability.hpp"

namespace stackrl {

struct TowerGenConfig {
    double sigma = 0.1;  // std-dev of the NonUni size factor
    double delta = 0.2;  // size factor is truncated to [1 - delta, 1 + delta]
    double base_width = 3.0;
    double base_height = 1.0;
    int max_retries = 100;
    std::uint64_t seed = 0;
    // When set, rejection-sample scenes so that this fraction is Stable.
    std::optional<double> target_stable_fraction;
};

void validate(const TowerGenConfig& cfg);

struct DatasetRecord {
    std::int64_t id = 0;
    Scene scene;
    StabilityLabel label = StabilityLabel::Stable;
    SceneParams params;
    std::uint64_t seed = 0;  // per-scene seed; regenerates the scene
};

struct LabelCounts {
    int stable = 0;
    int unstable = 0;
    double stable_fraction() const {
        const int n = stable + unstable;
        return n == 0 ? 0.0 : static_cast<double>(stable) / n;
    }
};

struct Dataset {
    std::vector<DatasetRecord> records;
    LabelCounts counts;
    int attempts = 0;  // scenes generated, including ones rejected for balance
};

// Bottom-up: the base block stands on the ground at x = 0; each further block
// rests on the top face of a uniformly chosen existing block with a uniform
// horizontal offset that keeps a positive overlap. Candidates that intersect
// existing blocks are redrawn up to max_retries times.
Scene generate_tower(const SceneParams& params, const TowerGenConfig& cfg, std::mt19937_64& rng);

// Scene i is generated from derive_seed(cfg.seed, attempt_i) and labeled by
// stability_label. With target_stable_fraction set, surplus labels are rejected.
Dataset generate_dataset(const SceneParams& params, int count, const TowerGenConfig& cfg);

// Shuffles with rng and returns (first floor(n * fraction), remainder).
std::pair<std::vector<DatasetRecord>, std::vector<DatasetRecord>> split_dataset(
    std::vector<DatasetRecord> records, double fraction, std::mt19937_64& rng);

}  // namespace stackrl
