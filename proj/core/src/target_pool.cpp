#include <algorithm>
#include <set>
#include <tuple>

#include "stackrl/errors.hpp"
#include "stackrl/stack_env.hpp"

namespace stackrl {

namespace {

bool block_free(const GridMap& map, const GridBlock& b) {
    if (!fits(map, b)) return false;
    for (int r = b.row; r <= b.top_row(); ++r) {
        for (int c = b.col; c <= b.right_col(); ++c) {
            if (map.at(c, r)) return false;
        }
    }
    return true;
}

void set_block(GridMap& map, const GridBlock& b, bool value) {
    for (int r = b.row; r <= b.top_row(); ++r) {
        for (int c = b.col; c <= b.right_col(); ++c) map.set(c, r, value);
    }
}

// Counts decompositions (stopping at 2) of the unassigned cells of `left`
// into 5-cell footprints, anchored at the first unassigned cell in
// bottom-up, left-to-right order.
int decompose(GridMap& left, std::vector<GridBlock>& chosen, std::vector<GridBlock>& first) {
    int anchor_c = -1;
    int anchor_r = -1;
    for (int r = 0; r < left.height() && anchor_r < 0; ++r) {
        for (int c = 0; c < left.width(); ++c) {
            if (left.at(c, r)) {
                anchor_c = c;
                anchor_r = r;
                break;
            }
        }
    }
    if (anchor_r < 0) {
        if (first.empty()) first = chosen;
        return 1;
    }
    int found = 0;
    for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
        const GridBlock b{anchor_c, anchor_r, o};
        if (!fits(left, b)) continue;
        bool all = true;
        for (int r = b.row; r <= b.top_row() && all; ++r) {
            for (int c = b.col; c <= b.right_col(); ++c) {
                if (!left.at(c, r)) {
                    all = false;
                    break;
                }
            }
        }
        if (!all) continue;
        set_block(left, b, false);
        chosen.push_back(b);
        found += decompose(left, chosen, first);
        chosen.pop_back();
        set_block(left, b, true);
        if (found > 1) break;
    }
    return found;
}

// Block-block vertical contact graph (cell adjacency) is connected.
bool connected(const std::vector<GridBlock>& blocks) {
    const std::size_t n = blocks.size();
    std::vector<int> parent(n);
    for (std::size_t i = 0; i < n; ++i) parent[i] = static_cast<int>(i);
    auto find = [&](int x) {
        while (parent[static_cast<std::size_t>(x)] != x) x = parent[static_cast<std::size_t>(x)];
        return x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const auto& lo = blocks[i];
            const auto& up = blocks[j];
            if (up.row != lo.top_row() + 1) continue;
            if (std::max(lo.col, up.col) > std::min(lo.right_col(), up.right_col())) continue;
            parent[static_cast<std::size_t>(find(static_cast<int>(i)))] = find(static_cast<int>(j));
        }
    }
    const int root = find(0);
    for (std::size_t i = 1; i < n; ++i) {
        if (find(static_cast<int>(i)) != root) return false;
    }
    return true;
}

using Key = std::vector<std::tuple<int, int, int>>;

Key key_of(const std::vector<GridBlock>& normalized) {
    Key key;
    for (const auto& b : normalized) key.emplace_back(b.row, b.col, static_cast<int>(b.orientation));
    return key;
}

struct PoolSearch {
    int n_blocks = 0;
    int max_rows = 0;
    GridMap frame;
    std::vector<GridBlock> stack;
    std::set<Key> seen;
    std::vector<std::vector<GridBlock>> found;

    void run() {
        for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
            const GridBlock first{frame.width() / 2, 0, o};
            if (!try_push(first)) continue;
            extend();
            pop();
        }
    }

    bool try_push(const GridBlock& b) {
        if (b.top_row() >= max_rows || !block_free(frame, b)) return false;
        if (b.row > 0) {
            bool supported = false;
            for (int c = b.col; c <= b.right_col() && !supported; ++c) supported = frame.at(c, b.row - 1);
            if (!supported) return false;
        }
        stack.push_back(b);
        if (stability_label(to_scene(stack)) != StabilityLabel::Stable) {
            stack.pop_back();
            return false;
        }
        set_block(frame, b, true);
        return true;
    }

    void pop() {
        set_block(frame, stack.back(), false);
        stack.pop_back();
    }

    void extend() {
        if (static_cast<int>(stack.size()) == n_blocks) {
            record();
            return;
        }
        const GridBlock& last = stack.back();
        for (int r = last.row; r < max_rows; ++r) {
            for (int c = 0; c < frame.width(); ++c) {
                if (r == last.row && c <= last.col) continue;
                for (Orientation o : {Orientation::Horizontal, Orientation::Vertical}) {
                    if (!try_push(GridBlock{c, r, o})) continue;
                    extend();
                    pop();
                }
            }
        }
    }

    void record() {
        if (!connected(stack)) return;
        int min_col = stack.front().col;
        for (const auto& b : stack) min_col = std::min(min_col, b.col);
        std::vector<GridBlock> normalized = stack;
        for (auto& b : normalized) b.col -= min_col;
        if (seen.insert(key_of(normalized)).second) found.push_back(std::move(normalized));
    }
};

}  // namespace

std::vector<GridBlock> decompose_goal(const GridMap& goal) {
    if (goal.count() == 0 || goal.count() % kBlockLength != 0) {
        throw UndecomposableGoal("goal has " + std::to_string(goal.count()) +
                                 " cells, not a positive multiple of 5");
    }
    GridMap left = goal;
    std::vector<GridBlock> chosen;
    std::vector<GridBlock> first;
    const int ways = decompose(left, chosen, first);
    if (ways != 1) {
        throw UndecomposableGoal(ways == 0 ? "goal cells do not split into 5-cell blocks"
                                           : "goal splits into blocks in more than one way");
    }
    return first;
}

std::vector<Orientation> orientation_sequence(const GridMap& goal) {
    std::vector<Orientation> out;
    for (const auto& b : decompose_goal(goal)) out.push_back(b.orientation);
    return out;
}

TargetSpec make_target(std::vector<GridBlock> blocks, int width, int height) {
    if (blocks.empty()) throw InvalidArgument("target needs at least one block");
    int min_col = blocks.front().col;
    int max_col = blocks.front().right_col();
    for (const auto& b : blocks) {
        min_col = std::min(min_col, b.col);
        max_col = std::max(max_col, b.right_col());
    }
    const int shift = (width - (max_col - min_col + 1)) / 2 - min_col;
    for (auto& b : blocks) b.col += shift;
    std::sort(blocks.begin(), blocks.end(),
              [](const GridBlock& a, const GridBlock& b) { return std::tie(a.row, a.col) < std::tie(b.row, b.col); });

    TargetSpec t;
    t.goal = GridMap(width, height);
    for (const auto& b : blocks) t.goal = grid_place(t.goal, b);
    t.blocks = std::move(blocks);
    for (const auto& b : t.blocks) t.orientations.push_back(b.orientation);
    return t;
}

std::vector<TargetSpec> enumerate_target_pool(int n_blocks, int width, int height, int cap) {
    if (n_blocks < 2 || n_blocks > 4) throw InvalidArgument("target pools exist for 2, 3 or 4 blocks");
    PoolSearch search;
    search.n_blocks = n_blocks;
    search.max_rows = height - kBlockLength;
    search.frame = GridMap(2 * kBlockLength * n_blocks + 1, height);
    search.run();

    std::vector<std::vector<GridBlock>> structures;
    for (auto& s : search.found) {
        int right = 0;
        for (const auto& b : s) right = std::max(right, b.right_col());
        if (right < width) structures.push_back(std::move(s));
    }
    std::sort(structures.begin(), structures.end(),
              [](const auto& a, const auto& b) { return key_of(a) < key_of(b); });

    std::vector<TargetSpec> pool;
    for (auto& s : structures) {
        if (static_cast<int>(pool.size()) >= cap) break;
        TargetSpec t = make_target(std::move(s), width, height);
        // Keep only targets whose cells identify their blocks unambiguously.
        try {
            if (decompose_goal(t.goal) != t.blocks) continue;
        } catch (const UndecomposableGoal&) {
            continue;
        }
        pool.push_back(std::move(t));
    }
    return pool;
}

}  // namespace stackrl
