#pragma once

#include <optional>
#include <vector>

#include "stackrl/geometry.hpp"

namespace stackrl {

constexpr int kGround = -1;

// Horizontal overlap of `upper`'s bottom face with `lower`'s top face
// (or with the ground when lower == kGround).
struct Contact {
    int upper = 0;
    int lower = kGround;
    double x_lo = 0.0;
    double x_hi = 0.0;
};

struct ContactGraph {
    std::vector<Contact> contacts;
    std::vector<std::vector<int>> supporters;  // per block: contact indices where it is upper
    std::vector<std::vector<int>> loads;       // per block: contact indices where it is lower
};

struct StabilityConfig {
    double eps_touch = kDefaultTouchEps;
    double lp_tolerance = 1e-9;
};

enum class StabilityMethod { LP, Recursive };

struct StabilityVerdict {
    bool stable = true;
    StabilityMethod method = StabilityMethod::LP;
    std::optional<int> witness;  // first failing block, Recursive only
};

enum class StabilityLabel { Stable, Unstable };

const char* to_string(StabilityLabel label);

// Throws FloatingBlock when a block above the ground has no supporter.
ContactGraph build_contact_graph(const Scene& scene, const StabilityConfig& cfg = {});

// Quasi-static equilibrium: stable iff non-negative normal forces at the
// endpoints of every contact interval balance each block's weight and its
// torque about the center of mass. Mass is proportional to area. Intervals
// are widened by eps_touch so edge-resting centers of mass count as stable.
StabilityVerdict check_stability_lp(const Scene& scene, const StabilityConfig& cfg = {});

// Oracle for tree-shaped support: every block's subtree center of mass must
// lie inside its single support interval (+/- eps_touch). Throws
// PreconditionError when some block has more than one supporter.
StabilityVerdict check_stability_recursive(const Scene& scene, const StabilityConfig& cfg = {});

// True iff every block has exactly one supporter (ground or block).
bool has_tree_support(const ContactGraph& graph);

StabilityLabel stability_label(const Scene& scene, const StabilityConfig& cfg = {});

}  // namespace stackrl
