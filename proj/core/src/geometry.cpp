#include "stackrl/geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "stackrl/errors.hpp"

namespace stackrl {

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

void require_same_shape(const GridMap& a, const GridMap& b) {
    if (a.width() != b.width() || a.height() != b.height()) {
        throw DimensionMismatch("grid maps " + std::to_string(a.width()) + "x" +
                                std::to_string(a.height()) + " and " + std::to_string(b.width()) +
                                "x" + std::to_string(b.height()));
    }
}

struct Bounds {
    double left = 0.0;
    double right = 0.0;
    double top = 0.0;
};

Bounds bounding_box(const Scene& scene) {
    Bounds box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
               0.0};
    for (const auto& b : scene.blocks) {
        box.left = std::min(box.left, b.left());
        box.right = std::max(box.right, b.right());
        box.top = std::max(box.top, b.top());
    }
    return box;
}

}  // namespace

bool is_valid_scene_params(const SceneParams& params) {
    const int n = params.n_blocks;
    return n == 4 || n == 6 || n == 10 || n == 14;
}

SceneParams parse_scene_params(const std::string& text) {
    // <n>B-2D-<Uni|NonUni>
    const std::string t = lower(text);
    const auto b = t.find('b');
    if (b == std::string::npos || b == 0) {
        throw InvalidArgument("scene group '" + text + "' (expected e.g. 4B-2D-Uni)");
    }
    SceneParams params;
    try {
        params.n_blocks = std::stoi(t.substr(0, b));
    } catch (const std::exception&) {
        throw InvalidArgument("scene group '" + text + "' has no block count");
    }
    const std::string rest = t.substr(b + 1);
    if (rest == "-2d-uni") {
        params.size_mode = SizeMode::Uni;
    } else if (rest == "-2d-nonuni") {
        params.size_mode = SizeMode::NonUni;
    } else {
        throw InvalidArgument("scene group '" + text + "' (only 2D Uni/NonUni groups exist)");
    }
    if (!is_valid_scene_params(params)) {
        throw InvalidArgument("block count must be one of 4, 6, 10, 14 in '" + text + "'");
    }
    return params;
}

std::string to_string(const SceneParams& params) {
    return std::to_string(params.n_blocks) + "B-2D-" +
           (params.size_mode == SizeMode::Uni ? "Uni" : "NonUni");
}

void validate_scene(const Scene& scene, double eps) {
    const auto& blocks = scene.blocks;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const auto& b = blocks[i];
        if (!std::isfinite(b.x_center) || !std::isfinite(b.y_bottom) || !std::isfinite(b.width) ||
            !std::isfinite(b.height)) {
            throw InvalidArgument("block " + std::to_string(i) + " has non-finite fields");
        }
        if (b.width <= 0.0 || b.height <= 0.0) {
            throw InvalidArgument("block " + std::to_string(i) + " has non-positive size");
        }
        if (b.y_bottom < -eps) {
            throw InvalidArgument("block " + std::to_string(i) + " is below the ground");
        }
    }
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        for (std::size_t j = i + 1; j < blocks.size(); ++j) {
            const auto& a = blocks[i];
            const auto& b = blocks[j];
            const double dx = std::min(a.right(), b.right()) - std::max(a.left(), b.left());
            const double dy = std::min(a.top(), b.top()) - std::max(a.y_bottom, b.y_bottom);
            if (dx > eps && dy > eps) {
                throw InvalidArgument("blocks " + std::to_string(i) + " and " + std::to_string(j) +
                                      " overlap");
            }
        }
    }
}

GridMap::GridMap(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0) {
        throw BadDimensions("grid " + std::to_string(width) + "x" + std::to_string(height));
    }
    cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0);
}

int GridMap::count() const {
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

const char* to_string(Orientation orientation) {
    return orientation == Orientation::Horizontal ? "horizontal" : "vertical";
}

bool fits(const GridMap& map, const GridBlock& block) {
    return block.col >= 0 && block.row >= 0 && block.right_col() < map.width() &&
           block.top_row() < map.height();
}

double fitting_cell_size(const Scene& scene, int width, int height, double min_cell_size) {
    if (scene.empty()) return min_cell_size;
    const Bounds box = bounding_box(scene);
    // Slightly enlarged so the bounding box is strictly inside the window.
    const double needed = std::max((box.right - box.left) / width, box.top / height) * (1.0 + 1e-9);
    return std::max(min_cell_size, needed);
}

GridMap rasterize_scene(const Scene& scene, int width, int height, double cell_size) {
    GridMap map(width, height);
    if (!(cell_size > 0.0)) throw InvalidArgument("cell_size must be positive");
    if (scene.empty()) return map;

    const Bounds box = bounding_box(scene);
    const double window_w = width * cell_size;
    const double window_h = height * cell_size;
    if (box.right - box.left > window_w || box.top > window_h) {
        throw SceneTooLarge("scene bounding box " + std::to_string(box.right - box.left) + "x" +
                            std::to_string(box.top) + " exceeds window " +
                            std::to_string(window_w) + "x" + std::to_string(window_h));
    }
    const double x0 = 0.5 * (box.left + box.right) - 0.5 * window_w;

    for (const auto& b : scene.blocks) {
        // Cell c has center x0 + (c + 0.5) * cell_size; solve left <= center < right.
        const int c_lo = std::max(0, static_cast<int>(std::ceil((b.left() - x0) / cell_size - 0.5)));
        const int c_hi = std::min(width - 1,
                                  static_cast<int>(std::ceil((b.right() - x0) / cell_size - 0.5)) - 1);
        const int r_lo = std::max(0, static_cast<int>(std::ceil(b.y_bottom / cell_size - 0.5)));
        const int r_hi = std::min(height - 1, static_cast<int>(std::ceil(b.top() / cell_size - 0.5)) - 1);
        for (int r = r_lo; r <= r_hi; ++r) {
            for (int c = c_lo; c <= c_hi; ++c) map.set(c, r);
        }
    }
    return map;
}

GridMap grid_place(const GridMap& map, const GridBlock& block) {
    if (!fits(map, block)) {
        throw OutOfBounds("block at (" + std::to_string(block.col) + "," +
                          std::to_string(block.row) + ") does not fit a " +
                          std::to_string(map.width()) + "x" + std::to_string(map.height()) + " map");
    }
    GridMap out = map;
    for (int r = block.row; r <= block.top_row(); ++r) {
        for (int c = block.col; c <= block.right_col(); ++c) {
            if (out.at(c, r)) {
                throw OverlapError("cell (" + std::to_string(c) + "," + std::to_string(r) +
                                   ") already occupied");
            }
            out.set(c, r);
        }
    }
    return out;
}

int grid_overlap_count(const GridMap& a, const GridMap& b) {
    require_same_shape(a, b);
    const auto da = a.data();
    const auto db = b.data();
    int n = 0;
    for (std::size_t i = 0; i < da.size(); ++i) n += (da[i] & db[i]);
    return n;
}

bool grid_equal(const GridMap& a, const GridMap& b) {
    require_same_shape(a, b);
    return a == b;
}

GridMap grid_union(const GridMap& a, const GridMap& b) {
    require_same_shape(a, b);
    GridMap out = a;
    for (int r = 0; r < a.height(); ++r) {
        for (int c = 0; c < a.width(); ++c) {
            if (b.at(c, r)) out.set(c, r);
        }
    }
    return out;
}

Mask downscale_mask(const GridMap& map, int out_width, int out_height) {
    if (out_width < 1 || out_height < 1 || out_width > map.width() || out_height > map.height()) {
        throw BadDimensions("cannot pool " + std::to_string(map.width()) + "x" +
                            std::to_string(map.height()) + " into " + std::to_string(out_width) +
                            "x" + std::to_string(out_height));
    }
    Mask mask{out_width, out_height,
              std::vector<double>(static_cast<std::size_t>(out_width) * out_height, 0.0)};
    for (int orow = 0; orow < out_height; ++orow) {
        const int r0 = orow * map.height() / out_height;
        const int r1 = (orow + 1) * map.height() / out_height;
        for (int ocol = 0; ocol < out_width; ++ocol) {
            const int c0 = ocol * map.width() / out_width;
            const int c1 = (ocol + 1) * map.width() / out_width;
            int set = 0;
            for (int r = r0; r < r1; ++r) {
                for (int c = c0; c < c1; ++c) set += map.at(c, r) ? 1 : 0;
            }
            mask.values[static_cast<std::size_t>(orow) * out_width + ocol] =
                static_cast<double>(set) / static_cast<double>((r1 - r0) * (c1 - c0));
        }
    }
    return mask;
}

Block2D to_block(const GridBlock& block) {
    const double w = block.footprint_width();
    const double h = block.footprint_height();
    return Block2D{block.col + 0.5 * w, static_cast<double>(block.row), w, h};
}

Scene to_scene(std::span<const GridBlock> blocks) {
    Scene scene;
    scene.blocks.reserve(blocks.size());
    for (const auto& b : blocks) scene.blocks.push_back(to_block(b));
    return scene;
}

}  // namespace stackrl
