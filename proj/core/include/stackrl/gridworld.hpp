#pragma once

#include <cstdint>
#include <random>

namespace stackrl {

struct GridCell {
    int col = 0;
    int row = 0;
    friend bool operator==(const GridCell&, const GridCell&) = default;
};

struct GridworldConfig {
    int size = 5;  // 5 or 7
    std::uint64_t seed = 0;
};

void validate(const GridworldConfig& cfg);

enum class GridAction { Left, Right, Up, Down };
constexpr int kGridActionCount = 4;

const char* to_string(GridAction action);

struct GridworldState {
    int size = 5;
    GridCell agent;
    GridCell goal;
    GridCell start;
    int steps = 0;
    bool terminal = false;
};

struct GridStepOutcome {
    GridworldState next;
    double reward = 0.0;
    bool terminal = false;
};

int manhattan(GridCell a, GridCell b);

// Uniform distinct start and goal cells.
GridworldState grid_reset(const GridworldConfig& cfg, std::mt19937_64& rng);

// Off-grid moves leave the agent in place; reaching the goal pays +1 and
// ends the episode. Throws SteppedTerminalEpisode.
GridStepOutcome grid_step(const GridworldState& state, GridAction action);

class GridworldEnv {
public:
    explicit GridworldEnv(GridworldConfig cfg);

    const GridworldState& reset();
    GridStepOutcome step(GridAction action);
    const GridworldState& state() const { return state_; }
    const GridworldConfig& config() const { return cfg_; }

private:
    GridworldConfig cfg_;
    std::mt19937_64 rng_;
    GridworldState state_;
};

}  // namespace stackrl
