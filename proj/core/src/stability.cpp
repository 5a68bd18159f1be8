#include "stackrl/stability.hpp"

#include <cmath>
#include <string>

#include "stackrl/errors.hpp"
#include "stackrl/simplex.hpp"

namespace stackrl {

const char* to_string(StabilityLabel label) {
    return label == StabilityLabel::Stable ? "stable" : "unstable";
}

ContactGraph build_contact_graph(const Scene& scene, const StabilityConfig& cfg) {
    validate_scene(scene, cfg.eps_touch);
    const auto& blocks = scene.blocks;
    const int n = static_cast<int>(blocks.size());
    const double eps = cfg.eps_touch;

    ContactGraph graph;
    graph.supporters.resize(static_cast<std::size_t>(n));
    graph.loads.resize(static_cast<std::size_t>(n));

    auto add = [&](int upper, int lower, double lo, double hi) {
        if (hi < lo) lo = hi = 0.5 * (lo + hi);
        const int id = static_cast<int>(graph.contacts.size());
        graph.contacts.push_back(Contact{upper, lower, lo, hi});
        graph.supporters[static_cast<std::size_t>(upper)].push_back(id);
        if (lower != kGround) graph.loads[static_cast<std::size_t>(lower)].push_back(id);
    };

    for (int i = 0; i < n; ++i) {
        const auto& up = blocks[static_cast<std::size_t>(i)];
        if (up.y_bottom <= eps) {
            add(i, kGround, up.left(), up.right());
            continue;
        }
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const auto& low = blocks[static_cast<std::size_t>(j)];
            if (std::abs(up.y_bottom - low.top()) > eps) continue;
            const double lo = std::max(up.left(), low.left());
            const double hi = std::min(up.right(), low.right());
            if (hi - lo < -eps) continue;
            add(i, j, lo, hi);
        }
        if (graph.supporters[static_cast<std::size_t>(i)].empty()) {
            throw FloatingBlock("block " + std::to_string(i) + " at y=" +
                                std::to_string(up.y_bottom) + " has no support");
        }
    }
    return graph;
}

bool has_tree_support(const ContactGraph& graph) {
    for (const auto& s : graph.supporters) {
        if (s.size() != 1) return false;
    }
    return true;
}

StabilityVerdict check_stability_lp(const Scene& scene, const StabilityConfig& cfg) {
    StabilityVerdict verdict;
    verdict.method = StabilityMethod::LP;
    if (scene.empty()) return verdict;

    const ContactGraph graph = build_contact_graph(scene, cfg);
    const auto& blocks = scene.blocks;
    const Eigen::Index n = static_cast<Eigen::Index>(blocks.size());
    const Eigen::Index nc = static_cast<Eigen::Index>(graph.contacts.size());

    // Two force variables per contact, at the widened interval endpoints.
    // Rows 2i / 2i+1: vertical force and torque balance of block i.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * n, 2 * nc);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n);
    for (Eigen::Index i = 0; i < n; ++i) rhs(2 * i) = blocks[static_cast<std::size_t>(i)].area();

    for (Eigen::Index c = 0; c < nc; ++c) {
        const Contact& contact = graph.contacts[static_cast<std::size_t>(c)];
        const double xs[2] = {contact.x_lo - cfg.eps_touch, contact.x_hi + cfg.eps_touch};
        for (int k = 0; k < 2; ++k) {
            const Eigen::Index var = 2 * c + k;
            const auto& up = blocks[static_cast<std::size_t>(contact.upper)];
            a(2 * contact.upper, var) += 1.0;
            a(2 * contact.upper + 1, var) += xs[k] - up.x_center;
            if (contact.lower != kGround) {
                const auto& low = blocks[static_cast<std::size_t>(contact.lower)];
                a(2 * contact.lower, var) -= 1.0;
                a(2 * contact.lower + 1, var) -= xs[k] - low.x_center;
            }
        }
    }

    verdict.stable = lp::phase1_feasible(a, rhs, cfg.lp_tolerance).feasible;
    return verdict;
}

StabilityVerdict check_stability_recursive(const Scene& scene, const StabilityConfig& cfg) {
    StabilityVerdict verdict;
    verdict.method = StabilityMethod::Recursive;
    if (scene.empty()) return verdict;

    const ContactGraph graph = build_contact_graph(scene, cfg);
    if (!has_tree_support(graph)) {
        throw PreconditionError("NotTreeSupport: some block rests on more than one supporter");
    }
    const auto& blocks = scene.blocks;
    const std::size_t n = blocks.size();

    // Subtree mass and first moment, memoized. The support relation is
    // acyclic because supporters are strictly lower.
    std::vector<double> mass(n, -1.0);
    std::vector<double> moment(n, 0.0);
    auto subtree = [&](auto&& self, std::size_t i) -> void {
        if (mass[i] >= 0.0) return;
        double m = blocks[i].area();
        double mx = m * blocks[i].x_center;
        for (int cid : graph.loads[i]) {
            const auto child = static_cast<std::size_t>(graph.contacts[static_cast<std::size_t>(cid)].upper);
            self(self, child);
            m += mass[child];
            mx += moment[child];
        }
        mass[i] = m;
        moment[i] = mx;
    };

    for (std::size_t i = 0; i < n; ++i) {
        subtree(subtree, i);
        const Contact& support = graph.contacts[static_cast<std::size_t>(graph.supporters[i].front())];
        const double com = moment[i] / mass[i];
        if (com < support.x_lo - cfg.eps_touch || com > support.x_hi + cfg.eps_touch) {
            verdict.stable = false;
            verdict.witness = static_cast<int>(i);
            return verdict;
        }
    }
    return verdict;
}

StabilityLabel stability_label(const Scene& scene, const StabilityConfig& cfg) {
    return check_stability_lp(scene, cfg).stable ? StabilityLabel::Stable : StabilityLabel::Unstable;
}

}  // namespace stackrl
