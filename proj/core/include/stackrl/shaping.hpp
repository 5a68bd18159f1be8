#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stackrl/geometry.hpp"

namespace stackrl {

enum class ShapingMode { None, OverlapRatio, DistanceTransform };

const char* to_string(ShapingMode mode);
// Accepts "none", "or", "dt".
ShapingMode parse_shaping_mode(const std::string& text);

// Per-cell Manhattan distance to the nearest goal cell.
struct DistanceField {
    int width = 0;
    int height = 0;
    std::vector<int> values;  // row-major from row 0

    int at(int col, int row) const {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
};

// |state & goal| / |goal|. Throws EmptyGoal, DimensionMismatch.
double overlap_ratio(const GridMap& state, const GridMap& goal);

// Sign of the overlap-ratio change (+1 increase, -1 decrease, 0 otherwise).
// Compared on integer intersection counts, so it is exact.
int shaped_reward_overlap(const GridMap& prev_state, const GridMap& next_state, const GridMap& goal);

// Two-pass chamfer transform with the 4-neighbour mask (exact L1 distance).
DistanceField distance_transform(const GridMap& goal);

// Sum of the field over the state's set cells.
std::int64_t distance_sum(const GridMap& state, const DistanceField& field);

// +1 if the distance sum decreased, -1 if it increased, 0 otherwise.
int shaped_reward_dt(const GridMap& prev_state, const GridMap& next_state, const DistanceField& field);

}  // namespace stackrl
