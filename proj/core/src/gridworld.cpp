#include "stackrl/gridworld.hpp"

#include <cstdlib>

#include "stackrl/errors.hpp"

namespace stackrl {

void validate(const GridworldConfig& cfg) {
    if (cfg.size != 5 && cfg.size != 7) throw InvalidArgument("gridworld size must be 5 or 7");
}

const char* to_string(GridAction action) {
    switch (action) {
        case GridAction::Left: return "left";
        case GridAction::Right: return "right";
        case GridAction::Up: return "up";
        case GridAction::Down: return "down";
    }
    return "?";
}

int manhattan(GridCell a, GridCell b) { return std::abs(a.col - b.col) + std::abs(a.row - b.row); }

GridworldState grid_reset(const GridworldConfig& cfg, std::mt19937_64& rng) {
    validate(cfg);
    const int cells = cfg.size * cfg.size;
    std::uniform_int_distribution<int> first(0, cells - 1);
    std::uniform_int_distribution<int> second(0, cells - 2);
    const int a = first(rng);
    int g = second(rng);
    if (g >= a) ++g;  // uniform over the cells other than a

    GridworldState s;
    s.size = cfg.size;
    s.agent = GridCell{a % cfg.size, a / cfg.size};
    s.goal = GridCell{g % cfg.size, g / cfg.size};
    s.start = s.agent;
    return s;
}

GridStepOutcome grid_step(const GridworldState& state, GridAction action) {
    if (state.terminal) throw SteppedTerminalEpisode("gridworld episode already reached its goal");
    GridStepOutcome out;
    out.next = state;
    GridCell& p = out.next.agent;
    GridCell moved = p;
    switch (action) {
        case GridAction::Left: --moved.col; break;
        case GridAction::Right: ++moved.col; break;
        case GridAction::Up: ++moved.row; break;
        case GridAction::Down: --moved.row; break;
    }
    if (moved.col >= 0 && moved.row >= 0 && moved.col < state.size && moved.row < state.size) p = moved;
    ++out.next.steps;
    if (p == state.goal) {
        out.reward = 1.0;
        out.terminal = true;
        out.next.terminal = true;
    }
    return out;
}

GridworldEnv::GridworldEnv(GridworldConfig cfg) : cfg_(cfg), rng_(cfg.seed) { validate(cfg_); }

const GridworldState& GridworldEnv::reset() {
    state_ = grid_reset(cfg_, rng_);
    return state_;
}

GridStepOutcome GridworldEnv::step(GridAction action) {
    GridStepOutcome out = grid_step(state_, action);
    state_ = out.next;
    return out;
}

}  // namespace stackrl
