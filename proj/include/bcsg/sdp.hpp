#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace bcsg {

// Linear matrix inequality problem
//     maximize  b^T y   subject to   M(y) = F0 + sum_i y_i F_i  >=  0
// with symmetric F's, a single dense block. Matrices are stored sparsely as
// upper-triangle entry lists.
struct SdpEntry {
    int i, j;  // 0-based, i <= j
    double value;
};

struct SdpProblem {
    int n = 0;                                // block size
    std::vector<double> b;                    // objective, one per variable
    std::vector<SdpEntry> f0;                 // constant matrix
    std::vector<std::vector<SdpEntry>> fs;    // per-variable matrices

    int num_vars() const { return (int)b.size(); }
    Eigen::MatrixXd constant() const;
    Eigen::MatrixXd matrix(int var) const;
};

enum class SdpStatus { Converged, MaxIterations, NumericalFailure };

struct SdpSolution {
    SdpStatus status = SdpStatus::NumericalFailure;
    double primal_value = 0;   // b^T y at the returned y (lower estimate)
    double dual_value = 0;     // weak-duality upper bound on max b^T y
    double gap = 0;            // |primal - dual| scaled
    int iterations = 0;
    std::vector<double> y;
    double feas_primal = 0;    // residual norms at exit
    double feas_dual = 0;
};

// Dense primal-dual interior-point method (HKM direction, Mehrotra
// predictor-corrector, infeasible start). Intended for blocks up to a few
// hundred rows.
SdpSolution solve_sdp(const SdpProblem& p, double tol = 1e-7, int max_iter = 200);

// Sparse SDPA format (.dat-s), one block. Deterministic text output with
// 17 significant digits; the objective line carries -b (SDPA minimizes).
std::string export_sdpa(const SdpProblem& p);
SdpProblem parse_sdpa(const std::string& text);

}  // namespace bcsg
