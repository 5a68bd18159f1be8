#include "stackrl/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "stackrl/errors.hpp"

namespace stackrl::lp {

namespace {
constexpr double kPivotEps = 1e-12;
}

FeasibilityResult phase1_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  double tolerance) {
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    if (b.size() != m) throw DimensionMismatch("rhs length differs from row count");

    FeasibilityResult result;
    result.x = Eigen::VectorXd::Zero(n);
    if (m == 0) {
        result.feasible = true;
        return result;
    }

    // Tableau columns: n structural, m artificial, 1 rhs. Row m is the
    // reduced-cost row of min sum(artificial).
    const Eigen::Index rhs = n + m;
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m + 1, n + m + 1);
    std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        double scale = a.row(i).cwiseAbs().maxCoeff();
        scale = std::max(scale, std::abs(b(i)));
        if (scale == 0.0) scale = 1.0;
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        t.block(i, 0, 1, n) = a.row(i) * (sign / scale);
        t(i, n + i) = 1.0;
        t(i, rhs) = b(i) * sign / scale;
        basis[static_cast<std::size_t>(i)] = n + i;
    }
    for (Eigen::Index j = 0; j < n; ++j) t(m, j) = -t.col(j).head(m).sum();
    t(m, rhs) = -t.col(rhs).head(m).sum();
    const double b_norm = t.col(rhs).head(m).sum();

    const int max_pivots = 50 * static_cast<int>(m + n) + 1000;
    while (result.pivots < max_pivots) {
        // Bland: lowest-index column with negative reduced cost.
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < n + m; ++j) {
            if (t(m, j) < -kPivotEps) {
                enter = j;
                break;
            }
        }
        if (enter < 0) break;

        Eigen::Index leave = -1;
        double best_ratio = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < m; ++i) {
            const double coef = t(i, enter);
            if (coef <= kPivotEps) continue;
            const double ratio = t(i, rhs) / coef;
            if (ratio < best_ratio - kPivotEps ||
                (std::abs(ratio - best_ratio) <= kPivotEps && leave >= 0 &&
                 basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
                best_ratio = ratio;
                leave = i;
            }
        }
        // Phase 1 is bounded below by zero, so an entering column always has
        // a positive entry in some row.
        if (leave < 0) break;

        t.row(leave) /= t(leave, enter);
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = t(i, enter);
            if (f != 0.0) t.row(i) -= f * t.row(leave);
        }
        basis[static_cast<std::size_t>(leave)] = enter;
        ++result.pivots;
    }

    result.infeasibility = std::max(0.0, -t(m, rhs));
    result.feasible = result.infeasibility <= tolerance * (1.0 + b_norm);
    for (Eigen::Index i = 0; i < m; ++i) {
        const Eigen::Index j = basis[static_cast<std::size_t>(i)];
        if (j < n) result.x(j) = std::max(0.0, t(i, rhs));
    }
    return result;
}

}  // namespace stackrl::lp
