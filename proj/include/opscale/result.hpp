#pragma once

#include "operator.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace opscale {

enum class Algorithm { gradient_descent, alternating };

struct SolverConfig {
    double alpha = 0;   // 0 selects 1/(m+n)^2 on the unit-size instance
    long max_iters = 1000000;
    double eta = 1e-6;
    Algorithm algorithm = Algorithm::gradient_descent;
    long record_every = 1;
    std::uint64_t seed = 0;

    void validate() const
    {
        if (alpha < 0)
            throw std::invalid_argument("alpha must be positive");
        if (!(eta > 0))
            throw std::invalid_argument("eta must be positive");
        if (max_iters < 1)
            throw std::invalid_argument("max_iters must be >= 1");
        if (record_every < 1)
            throw std::invalid_argument("record_every must be >= 1");
    }
};

struct TraceRow {
    long iter = 0;
    double t = 0;
    double s = 0;
    double delta = 0;
    double E_op = 0;
    double F_op = 0;
    double kappa_L = 1;
    double kappa_R = 1;
};

using ConvergenceTrace = std::vector<TraceRow>;

enum class Status { converged, budget, diverged, singular };

inline const char* to_string(Status s)
{
    switch (s) {
    case Status::converged: return "converged";
    case Status::budget: return "budget";
    case Status::diverged: return "diverged";
    case Status::singular: return "singular";
    }
    return "?";
}

struct ScalingResult {
    // Dense operator paths fill final_operator; the matrix and frame fast
    // paths fill final_matrix (B or the d x n frame) instead.
    std::optional<Operator> final_operator;
    std::optional<Mat> final_matrix;
    Mat L;
    Mat R;
    double kappa_L = 1;
    double kappa_R = 1;
    ConvergenceTrace trace;
    bool converged = false;
    Status status = Status::budget;
    std::string message;
    long iterations = 0;
    double alpha = 0;
    double s_initial = 0;
    double s_final = 0;
    double delta_final = 0;
    double epsilon_final = 0;
    double path_length = 0;
    double movement_sq = 0;
};

} // namespace opscale
