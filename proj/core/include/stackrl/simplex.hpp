#pragma once

#include <Eigen/Dense>

namespace stackrl::lp {

struct FeasibilityResult {
    bool feasible = false;
    // Optimal phase-1 objective: sum of artificial variables (0 iff feasible).
    double infeasibility = 0.0;
    int pivots = 0;
    Eigen::VectorXd x;  // a feasible point when feasible
};

// Decides whether { x >= 0 : A x = b } is non-empty with a dense phase-1
// tableau simplex (Bland's rule, so it terminates on degenerate problems).
// Rows are normalized by their largest coefficient before solving; the
// problem is feasible iff the phase-1 optimum is <= tolerance * (1 + |b|_1).
FeasibilityResult phase1_feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                  double tolerance = 1e-9);

}  // namespace stackrl::lp
