#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "stackrl/geometry.hpp"
#include "stackrl/stability.hpp"

namespace stackrl {

// A goal structure placed in the environment grid together with the block
// order (bottom-up, then left-to-right) that reproduces it.
struct TargetSpec {
    GridMap goal;
    std::vector<GridBlock> blocks;
    std::vector<Orientation> orientations;
};

struct StackEnvConfig {
    int width = 20;
    int height = 15;
    std::vector<TargetSpec> target_pool;
    std::uint64_t seed = 0;
    int max_episode_steps = 400;
    StabilityConfig stability;
};

// Throws InvalidArgument when the config violates its invariants.
void validate(const StackEnvConfig& cfg);

enum class StackAction { Left, Right, Down };
constexpr int kStackActionCount = 3;

enum class StepEvent { Moved, Placed, Collision, OutOfBounds, Collapse, EpisodeSuccess, EpisodeFail };

const char* to_string(StackAction action);
const char* to_string(StepEvent event);
bool is_terminal_event(StepEvent event);

struct StackState {
    GridMap background;  // placed blocks
    GridMap foreground;  // the moving block; empty after a placement ends the episode
    GridMap goal;
    int goal_index = 0;
    int blocks_placed = 0;
    int blocks_total = 0;
    Orientation current_orientation = Orientation::Horizontal;
    std::optional<GridBlock> moving;
    std::vector<GridBlock> placed;
    int steps = 0;
    bool terminal = false;
};

struct StepOutcome {
    StackState next;
    double reward = 0.0;  // base reward: 1 on EpisodeSuccess, else 0
    bool terminal = false;
    StepEvent event = StepEvent::Moved;
    // background | foreground after the action resolved and before the next
    // block spawned; reward shaping compares this against the previous state.
    GridMap resolved_cells;
};

// background | foreground.
GridMap state_cells(const StackState& state);

// Samples a goal uniformly from the pool and spawns its first block in the
// top rows at a uniform in-bounds column.
StackState stack_reset(const StackEnvConfig& cfg, std::mt19937_64& rng);

// Throws SteppedTerminalEpisode.
StepOutcome stack_step(const StackState& state, StackAction action, const StackEnvConfig& cfg,
                       std::mt19937_64& rng);

// Owns config and random stream; the reset/step episodic interface.
class StackEnv {
public:
    explicit StackEnv(StackEnvConfig cfg);

    const StackState& reset();
    StepOutcome step(StackAction action);

    const StackState& state() const { return state_; }
    const StackEnvConfig& config() const { return cfg_; }

private:
    StackEnvConfig cfg_;
    std::mt19937_64 rng_;
    StackState state_;
};

// Blocks ordered bottom-up then left-to-right; fails with UndecomposableGoal
// unless the goal splits into 5-cell footprints in exactly one way.
std::vector<GridBlock> decompose_goal(const GridMap& goal);
std::vector<Orientation> orientation_sequence(const GridMap& goal);

// Places normalized blocks horizontally centered in a width x height map.
TargetSpec make_target(std::vector<GridBlock> blocks, int width, int height);

// Depth-first enumeration of connected, stable structures of n_blocks blocks
// built in bottom-up order (every prefix stable), at most height - 5 rows tall,
// deduplicated up to horizontal translation, sorted lexicographically by their
// (row, col, orientation) block lists and capped at `cap` entries.
std::vector<TargetSpec> enumerate_target_pool(int n_blocks, int width, int height, int cap = 12);

// Column-align-then-descend action script that rebuilds a target from reset.
// Depends on the spawn column, so it is replanned after every placement.
std::vector<StackAction> scripted_block_actions(const StackState& state, const TargetSpec& target);

// Hash of background/foreground/goal for rollout traces (FNV-1a).
std::uint64_t state_hash(const StackState& state);

}  // namespace stackrl
