#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace stackrl {

// World unit u is the block height of a horizontal grid block. Ground is y = 0.
struct Block2D {
    double x_center = 0.0;
    double y_bottom = 0.0;
    double width = 1.0;
    double height = 1.0;

    double left() const { return x_center - 0.5 * width; }
    double right() const { return x_center + 0.5 * width; }
    double top() const { return y_bottom + height; }
    double area() const { return width * height; }

    friend bool operator==(const Block2D&, const Block2D&) = default;
};

enum class SizeMode { Uni, NonUni };

// Scene-group parameters of the synthetic tower data. Only 2D stacking
// depth exists in this library, so depth carries no field.
struct SceneParams {
    int n_blocks = 4;
    SizeMode size_mode = SizeMode::Uni;

    friend bool operator==(const SceneParams&, const SceneParams&) = default;
    friend auto operator<=>(const SceneParams&, const SceneParams&) = default;
};

// Parses "4B-2D-Uni" / "10B-2D-NonUni" (case-insensitive suffix). Throws InvalidArgument.
SceneParams parse_scene_params(const std::string& text);
std::string to_string(const SceneParams& params);
bool is_valid_scene_params(const SceneParams& params);

struct Scene {
    std::vector<Block2D> blocks;
    std::optional<SceneParams> params;

    bool empty() const { return blocks.empty(); }
    std::size_t size() const { return blocks.size(); }
};

constexpr double kDefaultTouchEps = 1e-6;

// Checks Block2D and Scene invariants (positive finite sizes, y_bottom >= 0,
// no interior overlap beyond eps). Throws InvalidArgument.
void validate_scene(const Scene& scene, double eps = kDefaultTouchEps);

// Binary occupancy grid. Row 0 is the ground-adjacent bottom row.
class GridMap {
public:
    GridMap() = default;
    GridMap(int width, int height);

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t cell_count() const { return cells_.size(); }

    bool in_bounds(int col, int row) const {
        return col >= 0 && row >= 0 && col < width_ && row < height_;
    }
    bool at(int col, int row) const { return cells_[index(col, row)] != 0; }
    void set(int col, int row, bool value = true) { cells_[index(col, row)] = value ? 1 : 0; }

    // Number of set cells.
    int count() const;
    bool any() const { return count() > 0; }

    // Row-major from row 0 upward.
    std::span<const std::uint8_t> data() const { return cells_; }

    friend bool operator==(const GridMap&, const GridMap&) = default;

private:
    std::size_t index(int col, int row) const {
        return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) +
               static_cast<std::size_t>(col);
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<std::uint8_t> cells_;
};

enum class Orientation { Horizontal, Vertical };

constexpr int kBlockLength = 5;

const char* to_string(Orientation orientation);

struct GridBlock {
    int col = 0;  // left edge
    int row = 0;  // bottom edge
    Orientation orientation = Orientation::Horizontal;

    int footprint_width() const { return orientation == Orientation::Horizontal ? kBlockLength : 1; }
    int footprint_height() const { return orientation == Orientation::Horizontal ? 1 : kBlockLength; }
    int right_col() const { return col + footprint_width() - 1; }
    int top_row() const { return row + footprint_height() - 1; }

    friend bool operator==(const GridBlock&, const GridBlock&) = default;
    friend auto operator<=>(const GridBlock&, const GridBlock&) = default;
};

bool fits(const GridMap& map, const GridBlock& block);

// Rasterizes with a W x H window of cell_size cells, centered horizontally on
// the scene bounding box, bottom edge on the ground. A cell is set iff its
// center lies in some block's half-open rectangle [left,right) x [bottom,top).
GridMap rasterize_scene(const Scene& scene, int width, int height, double cell_size);

// Smallest cell size (never below min_cell_size) at which the scene fits the window.
double fitting_cell_size(const Scene& scene, int width, int height, double min_cell_size);

GridMap grid_place(const GridMap& map, const GridBlock& block);
int grid_overlap_count(const GridMap& a, const GridMap& b);
bool grid_equal(const GridMap& a, const GridMap& b);
GridMap grid_union(const GridMap& a, const GridMap& b);

// Real-valued mask produced by block-average pooling.
struct Mask {
    int width = 0;
    int height = 0;
    std::vector<double> values;  // row-major from row 0

    double at(int col, int row) const {
        return values[static_cast<std::size_t>(row) * static_cast<std::size_t>(width) +
                      static_cast<std::size_t>(col)];
    }
};

Mask downscale_mask(const GridMap& map, int out_width, int out_height);

// Each grid block becomes a cell-aligned Block2D (1 cell = 1 u).
Block2D to_block(const GridBlock& block);
Scene to_scene(std::span<const GridBlock> blocks);

}  // namespace stackrl
