#pragma once

#include "rbto/fea.hpp"
#include "rbto/filter.hpp"
#include "rbto/mma.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace rbto {

/// |u_dof| <= allowable, evaluated with its own element modulus field.
struct DisplacementConstraint {
    int dof = -1;
    double allowable = 0.0;
    Vector modulus;
};

struct DtoSettings {
    double penal = 3.0;
    double rho_min = 1e-3;
    double tolerance = 1e-3; // max |design change| between iterations
    int max_iterations = 400;
    MmaSettings mma;
};

/// Minimum-volume design under displacement constraints for fixed moduli.
struct DtoProblem {
    std::shared_ptr<const FeaSolver> fea;
    std::shared_ptr<const FilterKernel> filter;
    std::vector<DisplacementConstraint> constraints;
    DtoSettings settings;

    void validate() const;
};

struct DtoIterate {
    int iteration = 0;
    double volume_fraction = 0.0;
    std::vector<double> displacement; // |u_dof| per constraint
    double change = 0.0;              // max |design change| that led to this iterate
    bool subproblem_feasible = true;
};

struct DtoResult {
    DensityField density;
    std::vector<DtoIterate> history;
    bool converged = false;
    int iterations = 0;

    double volume_fraction() const { return history.empty() ? 0.0 : history.back().volume_fraction; }
};

using DtoObserver = std::function<void(const DtoIterate&)>;

/// Signed displacement of one constraint and its gradient w.r.t. the design
/// variables (active elements, filter chain rule applied).
struct ConstraintSensitivity {
    double displacement = 0.0;
    Vector gradient;
};

ConstraintSensitivity displacement_sensitivity(const FeaSolver& fea, const FilterKernel& filter,
                                               const DensityField& density, const Vector& modulus,
                                               double penal, int dof);

DtoResult run_dto(const DtoProblem& problem, const Vector& start_design,
                  const DtoObserver& observer = {});

} // namespace rbto
