#pragma once

#include "rbto/chaos.hpp"
#include "rbto/random_field.hpp"
#include "rbto/reliability.hpp"
#include "rbto/topopt.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace rbto {

struct ReliabilityConstraint {
    int dof = -1;
    double allowable = 0.0;
    double beta = 2.0;
};

struct SrsmSettings {
    int degree = 3;
    int collocation_count = 17;
};

struct SoraSettings {
    double tolerance = 1e-3; // max over constraints of ||xi^(k) - xi^(k-1)||_inf
    int max_loops = 20;
    bool warm_start = true;  // DTO of loop k starts from the loop k-1 optimum
};

struct RbtoProblem {
    std::shared_ptr<const FeaSolver> fea;
    std::shared_ptr<const FilterKernel> filter;
    KLBasis basis;
    ModulusMarginal marginal;
    std::vector<ReliabilityConstraint> constraints;
    DtoSettings dto;
    SrsmSettings srsm;
    HmvSettings hmv;
    SoraSettings sora;

    void validate() const;
};

struct SoraLoopRecord {
    int loop = 0;
    double volume_fraction = 0.0;
    int dto_iterations = 0;
    bool dto_converged = false;
    std::vector<Eigen::VectorXd> mpp;      // per constraint
    std::vector<double> g_at_mpp;          // surrogate limit state at the MPP
    std::vector<int> hmv_iterations;
    std::vector<double> surrogate_residual;
    std::vector<double> surrogate_mean;
    std::vector<double> surrogate_std;
    double mpp_change = 0.0;
    int fea_solves = 0;                    // collocation solves of this loop
    double dto_seconds = 0.0;
    double ira_seconds = 0.0;
};

struct SoraState {
    int loop = 0;
    DensityField design;
    std::vector<Eigen::VectorXd> mpp;
    std::vector<ChaosSurrogate> surrogates; // fitted at the final design
    std::vector<SoraLoopRecord> history;
    bool converged = false;
};

using SoraObserver = std::function<void(const SoraLoopRecord&)>;

/// E_e for the field realized at KL coordinates xi.
Eigen::VectorXd realize_modulus(const KLBasis& basis, const ModulusMarginal& marginal,
                                const Eigen::VectorXd& xi);

/// |u_dof| at each collocation point for a fixed design, fitted to the basis.
ChaosSurrogate build_surrogate(const FeaSolver& fea, const DensityField& design, const KLBasis& basis,
                               const ModulusMarginal& marginal, const CollocationSet& points,
                               const HermiteBasis& hermite, double penal, int dof);

SoraState run_sora(const RbtoProblem& problem, const SoraObserver& observer = {});

} // namespace rbto
