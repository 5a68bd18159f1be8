#include "stackrl/stack_env.hpp"

#include <string>

#include "stackrl/errors.hpp"

namespace stackrl {

namespace {

GridBlock shifted(const GridBlock& b, StackAction action) {
    GridBlock out = b;
    switch (action) {
        case StackAction::Left: --out.col; break;
        case StackAction::Right: ++out.col; break;
        case StackAction::Down: --out.row; break;
    }
    return out;
}

bool overlaps(const GridMap& map, const GridBlock& b) {
    for (int r = b.row; r <= b.top_row(); ++r) {
        for (int c = b.col; c <= b.right_col(); ++c) {
            if (map.at(c, r)) return true;
        }
    }
    return false;
}

// Vertical contact: the block rests on the ground or some cell directly
// below its bottom row is occupied.
bool vertically_supported(const GridMap& background, const GridBlock& b) {
    if (b.row == 0) return true;
    for (int c = b.col; c <= b.right_col(); ++c) {
        if (background.at(c, b.row - 1)) return true;
    }
    return false;
}

GridMap footprint(int width, int height, const GridBlock& b) {
    return grid_place(GridMap(width, height), b);
}

// Spawns the next block with its top flush against the top boundary.
// Returns false when the spawn cells are already occupied.
bool spawn(StackState& s, Orientation orientation, const StackEnvConfig& cfg, std::mt19937_64& rng) {
    GridBlock b{0, 0, orientation};
    b.row = cfg.height - b.footprint_height();
    std::uniform_int_distribution<int> col(0, cfg.width - b.footprint_width());
    b.col = col(rng);
    s.current_orientation = orientation;
    if (overlaps(s.background, b)) return false;
    s.moving = b;
    s.foreground = footprint(cfg.width, cfg.height, b);
    return true;
}

}  // namespace

const char* to_string(StackAction action) {
    switch (action) {
        case StackAction::Left: return "left";
        case StackAction::Right: return "right";
        case StackAction::Down: return "down";
    }
    return "?";
}

const char* to_string(StepEvent event) {
    switch (event) {
        case StepEvent::Moved: return "moved";
        case StepEvent::Placed: return "placed";
        case StepEvent::Collision: return "collision";
        case StepEvent::OutOfBounds: return "out_of_bounds";
        case StepEvent::Collapse: return "collapse";
        case StepEvent::EpisodeSuccess: return "episode_success";
        case StepEvent::EpisodeFail: return "episode_fail";
    }
    return "?";
}

bool is_terminal_event(StepEvent event) {
    return event != StepEvent::Moved && event != StepEvent::Placed;
}

void validate(const StackEnvConfig& cfg) {
    if (cfg.width < 7 || cfg.height < 7) throw InvalidArgument("stacking grid must be at least 7x7");
    if (cfg.target_pool.empty()) throw InvalidArgument("target pool is empty");
    if (cfg.max_episode_steps < 1) throw InvalidArgument("max_episode_steps must be >= 1");
    for (const auto& t : cfg.target_pool) {
        if (t.goal.width() != cfg.width || t.goal.height() != cfg.height) {
            throw InvalidArgument("target goal does not match the grid size");
        }
        if (t.blocks.empty() || t.blocks.size() != t.orientations.size()) {
            throw InvalidArgument("target has no block sequence");
        }
    }
}

GridMap state_cells(const StackState& state) { return grid_union(state.background, state.foreground); }

StackState stack_reset(const StackEnvConfig& cfg, std::mt19937_64& rng) {
    validate(cfg);
    StackState s;
    std::uniform_int_distribution<std::size_t> pick(0, cfg.target_pool.size() - 1);
    s.goal_index = static_cast<int>(pick(rng));
    const TargetSpec& target = cfg.target_pool[static_cast<std::size_t>(s.goal_index)];
    s.goal = target.goal;
    s.background = GridMap(cfg.width, cfg.height);
    s.foreground = GridMap(cfg.width, cfg.height);
    s.blocks_total = static_cast<int>(target.orientations.size());
    spawn(s, target.orientations.front(), cfg, rng);
    return s;
}

StepOutcome stack_step(const StackState& state, StackAction action, const StackEnvConfig& cfg,
                       std::mt19937_64& rng) {
    if (state.terminal || !state.moving) {
        throw SteppedTerminalEpisode("episode already finished; call reset");
    }
    StepOutcome out;
    out.next = state;
    StackState& s = out.next;
    ++s.steps;

    auto finish = [&](StepEvent event) {
        out.event = event;
        out.terminal = is_terminal_event(event);
        s.terminal = out.terminal;
        if (out.resolved_cells.cell_count() == 0) out.resolved_cells = state_cells(s);
        return out;
    };

    const GridBlock current = *state.moving;
    GridBlock target_pos = current;
    bool place = false;
    if (action == StackAction::Down && vertically_supported(state.background, current)) {
        place = true;
    } else {
        const GridBlock incoming = shifted(current, action);
        if (!fits(state.background, incoming)) return finish(StepEvent::OutOfBounds);
        if (overlaps(state.background, incoming)) return finish(StepEvent::Collision);
        target_pos = incoming;
        place = action == StackAction::Down && vertically_supported(state.background, incoming);
    }

    if (!place) {
        s.moving = target_pos;
        s.foreground = footprint(cfg.width, cfg.height, target_pos);
        if (s.steps >= cfg.max_episode_steps) return finish(StepEvent::EpisodeFail);
        return finish(StepEvent::Moved);
    }

    s.background = grid_place(s.background, target_pos);
    s.placed.push_back(target_pos);
    s.foreground = GridMap(cfg.width, cfg.height);
    s.moving.reset();
    ++s.blocks_placed;
    out.resolved_cells = s.background;

    if (stability_label(to_scene(s.placed), cfg.stability) == StabilityLabel::Unstable) {
        return finish(StepEvent::Collapse);
    }
    if (s.blocks_placed == s.blocks_total) {
        if (grid_equal(s.background, s.goal)) {
            out.reward = 1.0;
            return finish(StepEvent::EpisodeSuccess);
        }
        return finish(StepEvent::EpisodeFail);
    }
    const TargetSpec& target = cfg.target_pool[static_cast<std::size_t>(s.goal_index)];
    if (!spawn(s, target.orientations[static_cast<std::size_t>(s.blocks_placed)], cfg, rng)) {
        return finish(StepEvent::Collision);
    }
    if (s.steps >= cfg.max_episode_steps) return finish(StepEvent::EpisodeFail);
    return finish(StepEvent::Placed);
}

StackEnv::StackEnv(StackEnvConfig cfg) : cfg_(std::move(cfg)), rng_(cfg_.seed) { validate(cfg_); }

const StackState& StackEnv::reset() {
    state_ = stack_reset(cfg_, rng_);
    return state_;
}

StepOutcome StackEnv::step(StackAction action) {
    StepOutcome out = stack_step(state_, action, cfg_, rng_);
    state_ = out.next;
    return out;
}

std::vector<StackAction> scripted_block_actions(const StackState& state, const TargetSpec& target) {
    std::vector<StackAction> actions;
    if (state.terminal || !state.moving) return actions;
    const GridBlock& want = target.blocks.at(static_cast<std::size_t>(state.blocks_placed));
    GridBlock b = *state.moving;
    for (; b.col < want.col; ++b.col) actions.push_back(StackAction::Right);
    for (; b.col > want.col; --b.col) actions.push_back(StackAction::Left);
    for (; b.row > want.row; --b.row) actions.push_back(StackAction::Down);
    return actions;
}

std::uint64_t state_hash(const StackState& state) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](std::uint8_t byte) {
        h ^= byte;
        h *= 0x100000001b3ULL;
    };
    for (const GridMap* m : {&state.background, &state.foreground, &state.goal}) {
        for (std::uint8_t v : m->data()) mix(v);
        mix(0xff);
    }
    return h;
}

}  // namespace stackrl
