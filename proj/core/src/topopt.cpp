#include "rbto/topopt.hpp"

#include "rbto/error.hpp"

#include <cmath>
#include <string>

namespace rbto {

void DtoProblem::validate() const {
    RBTO_REQUIRE(fea && filter, ErrorCode::InvalidParameter, "DTO problem needs a model and a filter");
    const auto& grid = fea->grid();
    RBTO_REQUIRE(filter->size() == grid.active_count(), ErrorCode::Inconsistent,
                 "filter was built for a different active-element set");
    RBTO_REQUIRE(!constraints.empty(), ErrorCode::InvalidParameter, "DTO needs at least one constraint");
    RBTO_REQUIRE(settings.penal >= 1.0, ErrorCode::InvalidParameter, "penalty exponent must be >= 1");
    RBTO_REQUIRE(settings.rho_min > 0.0 && settings.rho_min < 1.0, ErrorCode::InvalidParameter,
                 "rho_min must lie in (0, 1)");
    RBTO_REQUIRE(settings.tolerance > 0.0 && settings.max_iterations >= 1,
                 ErrorCode::InvalidParameter, "invalid DTO stopping rule");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        RBTO_REQUIRE(c.allowable > 0.0, ErrorCode::InvalidParameter,
                     "allowable displacement of constraint " + std::to_string(i) + " must be positive");
        RBTO_REQUIRE(c.dof >= 0 && c.dof < grid.dof_count(), ErrorCode::InvalidParameter,
                     "constraint DOF out of range");
        RBTO_REQUIRE(c.modulus.size() == grid.element_count(), ErrorCode::SizeMismatch,
                     "constraint modulus length differs from element count");
    }
}

ConstraintSensitivity displacement_sensitivity(const FeaSolver& fea, const FilterKernel& filter,
                                               const DensityField& density, const Vector& modulus,
                                               double penal, int dof) {
    const DisplacementSolution sol = fea.solve(density.physical, modulus, penal);
    ConstraintSensitivity out;
    out.displacement = sol.u[dof];
    out.gradient = filter.chain_gradient(
        fea.adjoint_gradient(sol, density.physical, modulus, penal, dof));
    return out;
}

DtoResult run_dto(const DtoProblem& problem, const Vector& start_design, const DtoObserver& observer) {
    problem.validate();
    const FeaSolver& fea = *problem.fea;
    const FilterKernel& filter = *problem.filter;
    const StructuredGrid& grid = fea.grid();
    const DtoSettings& set = problem.settings;
    const int n = grid.active_count();
    const int m = static_cast<int>(problem.constraints.size());
    RBTO_REQUIRE(start_design.size() == n, ErrorCode::SizeMismatch,
                 "start design length differs from active element count");

    const Vector xmin = Vector::Constant(n, set.rho_min);
    const Vector xmax = Vector::Ones(n);
    const Vector dvol = filter.chain_gradient(Vector::Constant(n, 1.0 / n));

    MmaState mma(n, m, set.mma);
    DtoResult result;
    Vector x = start_design;
    double change = 0.0;
    bool feasible = true;
    for (int iter = 0;; ++iter) {
        DensityField density = make_density_field(grid, filter, x, set.rho_min);

        DtoIterate rec;
        rec.iteration = iter;
        rec.volume_fraction = density.volume_fraction(grid);
        rec.change = change;
        rec.subproblem_feasible = feasible;
        Vector g(m);
        Eigen::MatrixXd dg(m, n);
        for (int i = 0; i < m; ++i) {
            const auto& c = problem.constraints[static_cast<std::size_t>(i)];
            const auto sens = displacement_sensitivity(fea, filter, density, c.modulus, set.penal, c.dof);
            const double sign = sens.displacement < 0.0 ? -1.0 : 1.0;
            rec.displacement.push_back(std::abs(sens.displacement));
            g[i] = std::abs(sens.displacement) / c.allowable - 1.0;
            dg.row(i) = (sign / c.allowable) * sens.gradient.transpose();
        }
        result.history.push_back(rec);
        if (observer) observer(rec);
        result.density = std::move(density);
        result.iterations = iter;

        if (iter > 0 && change < set.tolerance) {
            result.converged = true;
            break;
        }
        if (iter >= set.max_iterations) break;

        const Vector xnew = mma.step(x, rec.volume_fraction, dvol, g, dg, xmin, xmax);
        feasible = mma.last_info().feasible;
        change = (xnew - x).lpNorm<Eigen::Infinity>();
        x = xnew;
    }
    return result;
}

} // namespace rbto
