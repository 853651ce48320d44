#pragma once

#include <chrono>
#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace igashape {

/// Iteration and timing record of one solve. Direct solves report zero
/// iterations and an empty history.
struct PcgLog {
    int iterations = 0;
    std::vector<double> residuals;  // ||r_k|| / ||r_0|| of the dual system
    double setup_seconds = 0.0;
    double factor_seconds = 0.0;
    double solve_seconds = 0.0;
    double relative_residual = 0.0;  // ||A x - b|| / ||b||
    double interface_jump = 0.0;     // max |x_i - x_j| over dual pairs
    std::size_t memory_bytes = 0;    // solver-owned data (matrices, factors)
    int workers = 1;
};

struct SolveResult {
    Eigen::VectorXd x;
    PcgLog log;
};

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace igashape
