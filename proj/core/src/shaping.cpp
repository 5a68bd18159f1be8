#include "stackrl/shaping.hpp"

#include <algorithm>
#include <limits>

#include "stackrl/errors.hpp"

namespace stackrl {

const char* to_string(ShapingMode mode) {
    switch (mode) {
        case ShapingMode::None: return "none";
        case ShapingMode::OverlapRatio: return "or";
        case ShapingMode::DistanceTransform: return "dt";
    }
    return "none";
}

ShapingMode parse_shaping_mode(const std::string& text) {
    if (text == "none") return ShapingMode::None;
    if (text == "or") return ShapingMode::OverlapRatio;
    if (text == "dt") return ShapingMode::DistanceTransform;
    throw InvalidArgument("unknown shaping mode '" + text + "' (none|or|dt)");
}

double overlap_ratio(const GridMap& state, const GridMap& goal) {
    const int inter = grid_overlap_count(state, goal);
    const int g = goal.count();
    if (g == 0) throw EmptyGoal("overlap ratio needs a non-empty goal");
    return static_cast<double>(inter) / static_cast<double>(g);
}

int shaped_reward_overlap(const GridMap& prev_state, const GridMap& next_state, const GridMap& goal) {
    if (goal.count() == 0) throw EmptyGoal("overlap shaping needs a non-empty goal");
    const int before = grid_overlap_count(prev_state, goal);
    const int after = grid_overlap_count(next_state, goal);
    return (after > before) - (after < before);
}

DistanceField distance_transform(const GridMap& goal) {
    if (goal.count() == 0) throw EmptyGoal("distance transform needs a non-empty goal");
    const int w = goal.width();
    const int h = goal.height();
    // Any finite path is shorter than w + h.
    const int far = w + h;
    DistanceField field{w, h, std::vector<int>(static_cast<std::size_t>(w) * h, far)};
    auto at = [&](int c, int r) -> int& { return field.values[static_cast<std::size_t>(r) * w + c]; };

    for (int r = 0; r < h; ++r) {
        for (int c = 0; c < w; ++c) {
            if (goal.at(c, r)) {
                at(c, r) = 0;
                continue;
            }
            int d = at(c, r);
            if (r > 0) d = std::min(d, at(c, r - 1) + 1);
            if (c > 0) d = std::min(d, at(c - 1, r) + 1);
            at(c, r) = d;
        }
    }
    for (int r = h - 1; r >= 0; --r) {
        for (int c = w - 1; c >= 0; --c) {
            int d = at(c, r);
            if (r + 1 < h) d = std::min(d, at(c, r + 1) + 1);
            if (c + 1 < w) d = std::min(d, at(c + 1, r) + 1);
            at(c, r) = d;
        }
    }
    return field;
}

std::int64_t distance_sum(const GridMap& state, const DistanceField& field) {
    if (state.width() != field.width || state.height() != field.height) {
        throw DimensionMismatch("state and distance field differ in size");
    }
    std::int64_t total = 0;
    for (int r = 0; r < state.height(); ++r) {
        for (int c = 0; c < state.width(); ++c) {
            if (state.at(c, r)) total += field.at(c, r);
        }
    }
    return total;
}

int shaped_reward_dt(const GridMap& prev_state, const GridMap& next_state, const DistanceField& field) {
    const std::int64_t before = distance_sum(prev_state, field);
    const std::int64_t after = distance_sum(next_state, field);
    return (after < before) - (after > before);
}

}  // namespace stackrl
