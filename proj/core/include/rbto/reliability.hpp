#pragma once

#include "rbto/chaos.hpp"

#include <Eigen/Core>

#include <vector>

namespace rbto {

/// g(psi) = allowable - surrogate(psi); failure when g < 0.
struct LimitState {
    ChaosSurrogate surrogate;
    double allowable = 0.0;

    double value(const Eigen::VectorXd& psi) const { return allowable - surrogate.eval(psi); }
    Eigen::VectorXd gradient(const Eigen::VectorXd& psi) const { return -surrogate.grad(psi); }
};

enum class MppStep { AdvancedMeanValue, ConjugateMeanValue, Perturbed, SweepRestart };

struct MppResult {
    Eigen::VectorXd psi;   // standard-normal space
    Eigen::VectorXd xi;    // KL-variable space (identical: independent standard normals)
    double g = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<MppStep> steps;
};

struct HmvSettings {
    double tolerance = 1e-6; // on ||psi^{t+1} - psi^t||
    int max_iterations = 200;
    /// Angular sweep resolution used to catch non-global stationary points
    /// when the search space is two-dimensional; 0 disables it.
    int sweep_points = 3600;
};

/// Performance-measure inverse reliability: min g(psi) s.t. ||psi|| = beta,
/// by the hybrid mean value iteration.
MppResult hmv_search(const LimitState& ls, double beta, const Eigen::VectorXd& start,
                     const HmvSettings& settings = {});

/// Standard-normal to physical KL variables. The KL variables are already
/// independent standard normals, so this is the identity.
Eigen::VectorXd mpp_to_physical(const Eigen::VectorXd& psi);
Eigen::VectorXd physical_to_standard(const Eigen::VectorXd& xi);

} // namespace rbto
