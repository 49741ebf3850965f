#include "rbto/sora.hpp"

#include "rbto/error.hpp"
#include "rbto/parallel.hpp"

#include <chrono>
#include <cmath>
#include <string>

namespace rbto {

void RbtoProblem::validate() const {
    RBTO_REQUIRE(fea && filter, ErrorCode::InvalidParameter, "RBTO problem needs a model and a filter");
    marginal.validate();
    RBTO_REQUIRE(!constraints.empty(), ErrorCode::InvalidParameter, "RBTO needs at least one constraint");
    RBTO_REQUIRE(basis.terms() >= 1 && basis.functions.rows() == fea->grid().element_count(),
                 ErrorCode::SizeMismatch, "KL basis does not match the grid");
    RBTO_REQUIRE(sora.tolerance > 0.0 && sora.max_loops >= 1, ErrorCode::InvalidParameter,
                 "invalid SORA stopping rule");
    RBTO_REQUIRE(srsm.degree >= 1 && srsm.collocation_count >= 1, ErrorCode::InvalidParameter,
                 "invalid SRSM settings");
    for (std::size_t i = 0; i < constraints.size(); ++i) {
        const auto& c = constraints[i];
        RBTO_REQUIRE(c.beta >= 0.0 && std::isfinite(c.beta), ErrorCode::InvalidParameter,
                     "beta of constraint " + std::to_string(i) + " must be non-negative");
        RBTO_REQUIRE(c.allowable > 0.0, ErrorCode::InvalidParameter, "allowable displacement must be positive");
        RBTO_REQUIRE(c.dof >= 0 && c.dof < fea->grid().dof_count(), ErrorCode::InvalidParameter,
                     "constraint DOF out of range");
        for (std::size_t j = 0; j < i; ++j)
            RBTO_REQUIRE(constraints[j].dof != c.dof, ErrorCode::InvalidParameter,
                         "constraint DOFs must be distinct");
    }
}

Eigen::VectorXd realize_modulus(const KLBasis& basis, const ModulusMarginal& marginal,
                                const Eigen::VectorXd& xi) {
    return field_to_modulus(sample_field(basis, xi), marginal);
}

ChaosSurrogate build_surrogate(const FeaSolver& fea, const DensityField& design, const KLBasis& basis,
                               const ModulusMarginal& marginal, const CollocationSet& points,
                               const HermiteBasis& hermite, double penal, int dof) {
    RBTO_REQUIRE(hermite.variables == basis.terms(), ErrorCode::Inconsistent,
                 "surrogate dimension differs from KL truncation");
    std::vector<double> responses(static_cast<std::size_t>(points.size()));
    parallel_for(points.size(), default_workers(), [&](int, int j) {
        const auto& xi = points.points[static_cast<std::size_t>(j)];
        const auto sol = fea.solve(design.physical, realize_modulus(basis, marginal, xi), penal);
        responses[static_cast<std::size_t>(j)] = std::abs(sol.u[dof]);
    });
    ChaosSurrogate s = fit(points, responses, hermite);
    s.dof = dof;
    s.design_hash = hash_state(design.physical, Eigen::VectorXd(), penal);
    return s;
}

SoraState run_sora(const RbtoProblem& problem, const SoraObserver& observer) {
    problem.validate();
    using Clock = std::chrono::steady_clock;
    const FeaSolver& fea = *problem.fea;
    const int m = static_cast<int>(problem.constraints.size());
    const int dim = problem.basis.terms();
    const HermiteBasis hermite = hermite_terms(dim, problem.srsm.degree);
    const CollocationSet points = collocation_points(hermite, problem.srsm.collocation_count);

    SoraState state;
    state.mpp.assign(static_cast<std::size_t>(m), Eigen::VectorXd::Zero(dim));
    const Eigen::VectorXd cold_start = Eigen::VectorXd::Constant(fea.grid().active_count(), 0.5);
    Eigen::VectorXd start = cold_start;

    for (int k = 1; k <= problem.sora.max_loops; ++k) {
        SoraLoopRecord rec;
        rec.loop = k;

        DtoProblem dto;
        dto.fea = problem.fea;
        dto.filter = problem.filter;
        dto.settings = problem.dto;
        for (int i = 0; i < m; ++i) {
            const auto& c = problem.constraints[static_cast<std::size_t>(i)];
            dto.constraints.push_back(
                {c.dof, c.allowable, realize_modulus(problem.basis, problem.marginal, state.mpp[static_cast<std::size_t>(i)])});
        }
        auto t0 = Clock::now();
        DtoResult opt = run_dto(dto, start);
        rec.dto_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
        rec.volume_fraction = opt.volume_fraction();
        rec.dto_iterations = opt.iterations;
        rec.dto_converged = opt.converged;
        state.design = opt.density;
        if (problem.sora.warm_start) start = opt.density.design;

        t0 = Clock::now();
        std::vector<Eigen::VectorXd> next(static_cast<std::size_t>(m));
        state.surrogates.clear();
        for (int i = 0; i < m; ++i) {
            const auto& c = problem.constraints[static_cast<std::size_t>(i)];
            ChaosSurrogate s = build_surrogate(fea, state.design, problem.basis, problem.marginal, points,
                                               hermite, problem.dto.penal, c.dof);
            rec.fea_solves += points.size();
            rec.surrogate_residual.push_back(s.residual_norm);
            rec.surrogate_mean.push_back(s.mean());
            rec.surrogate_std.push_back(std::sqrt(s.variance()));
            const LimitState ls{s, c.allowable};
            const MppResult mpp = hmv_search(ls, c.beta, state.mpp[static_cast<std::size_t>(i)], problem.hmv);
            next[static_cast<std::size_t>(i)] = mpp.xi;
            rec.mpp.push_back(mpp.xi);
            rec.g_at_mpp.push_back(mpp.g);
            rec.hmv_iterations.push_back(mpp.iterations);
            state.surrogates.push_back(std::move(s));
        }
        rec.ira_seconds = std::chrono::duration<double>(Clock::now() - t0).count();

        double change = 0.0;
        for (int i = 0; i < m; ++i)
            change = std::max(change, (next[static_cast<std::size_t>(i)] - state.mpp[static_cast<std::size_t>(i)])
                                          .lpNorm<Eigen::Infinity>());
        rec.mpp_change = change;
        state.mpp = std::move(next);
        state.loop = k;
        state.history.push_back(rec);
        if (observer) observer(rec);
        if (change < problem.sora.tolerance) {
            state.converged = true;
            break;
        }
    }
    return state;
}

} // namespace rbto
