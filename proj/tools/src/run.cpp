#include "rbto_cli/run.hpp"

#include "rbto/error.hpp"
#include "rbto/presets.hpp"
#include "rbto/random_field.hpp"
#include "rbto/sora.hpp"
#include "rbto/verification.hpp"
#include "rbto_cli/artifacts.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>

namespace rbto::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Model {
    BenchmarkCase bc;
    std::shared_ptr<const FeaSolver> fea;
    std::shared_ptr<const FilterKernel> filter;
    KLBasis basis;
    ModulusMarginal marginal;
};

BenchmarkCase make_case(const RunConfig& c) {
    if (c.problem == "mbb") return make_mbb_half(c.nx, c.ny, 1.0, c.u_max);
    if (c.problem == "lbeam") return make_lbeam(c.nx, 1.0, c.u_max);
    return make_cantilever(c.nx, c.ny, 1.0, c.u_max);
}

Model make_model(const RunConfig& c) {
    BenchmarkCase bc = make_case(c);
    auto fea = std::make_shared<const FeaSolver>(bc.grid, 0.3);
    auto filter = std::make_shared<const FilterKernel>(bc.grid, c.rmin);
    KLBasis basis = make_kl_basis(c.nx, c.ny, c.l1, c.l2, c.kl_terms, corr_length_mode_from_string(c.corr_length_mode),
                                  c.kl_rescale_pointwise_variance);
    ModulusMarginal marginal{c.a, c.b};
    marginal.validate();
    return Model{std::move(bc), std::move(fea), std::move(filter), std::move(basis), marginal};
}

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

void write_design(const fs::path& dir, const Model& m, const DensityField& d) {
    write_density_csv(dir / "density.csv", m.bc.grid, d.physical);
    write_pgm(dir / "density.pgm", m.bc.grid, d.physical);
}

json dto_history(const DtoResult& r) {
    json h = json::array();
    for (const auto& it : r.history)
        h.push_back({{"iteration", it.iteration},
                     {"volume_fraction", it.volume_fraction},
                     {"displacement", it.displacement},
                     {"change", it.change},
                     {"subproblem_feasible", it.subproblem_feasible}});
    return h;
}

json loop_json(const SoraLoopRecord& r) {
    json mpp = json::array();
    for (const auto& p : r.mpp) mpp.push_back(vec_json(p));
    return {{"loop", r.loop},
            {"volume_fraction", r.volume_fraction},
            {"dto_iterations", r.dto_iterations},
            {"dto_converged", r.dto_converged},
            {"mpp", mpp},
            {"g", r.g_at_mpp},
            {"hmv_iterations", r.hmv_iterations},
            {"surrogate_mean", r.surrogate_mean},
            {"surrogate_std", r.surrogate_std},
            {"surrogate_residual", r.surrogate_residual},
            {"mpp_change", r.mpp_change},
            {"fea_solves", r.fea_solves},
            {"dto_seconds", r.dto_seconds},
            {"ira_seconds", r.ira_seconds}};
}

void say(std::ostream* progress, const char* fmt, auto... args) {
    if (!progress) return;
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    *progress << buf << '\n' << std::flush;
}

json run_dto_mode(const RunConfig& c, const Model& m, const fs::path& dir, std::ostream* progress) {
    DtoProblem p;
    p.fea = m.fea;
    p.filter = m.filter;
    p.settings.penal = c.simp_p;
    p.settings.tolerance = c.dto_tol;
    p.constraints.push_back(
        {m.bc.output_dof, m.bc.allowable, Vector::Constant(m.bc.grid.element_count(), m.marginal.mean())});
    const auto t0 = Clock::now();
    const DtoResult r = run_dto(p, Vector::Constant(m.bc.grid.active_count(), 0.5), [&](const DtoIterate& it) {
        if (it.iteration % 25 == 0) say(progress, "[dto] iteration %d vf=%.4f change=%.3g", it.iteration, it.volume_fraction, it.change);
    });
    say(progress, "[dto] done: vf=%.4f iterations=%d converged=%d", r.volume_fraction(), r.iterations, int(r.converged));
    write_design(dir, m, r.density);
    return {{"modulus", m.marginal.mean()},
            {"volume_fraction", r.volume_fraction()},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"displacement", r.history.empty() ? json(nullptr) : json(r.history.back().displacement)},
            {"seconds", seconds_since(t0)},
            {"history", dto_history(r)}};
}

struct SoraRun {
    SoraState state;
    json log;
};

SoraRun run_sora_for(const RunConfig& c, const Model& m, double beta, std::ostream* progress) {
    RbtoProblem p;
    p.fea = m.fea;
    p.filter = m.filter;
    p.basis = m.basis;
    p.marginal = m.marginal;
    p.constraints.push_back({m.bc.output_dof, m.bc.allowable, beta});
    p.dto.penal = c.simp_p;
    p.dto.tolerance = c.dto_tol;
    p.srsm.degree = c.pce_p;
    p.srsm.collocation_count = c.colloc_count;
    p.sora.tolerance = c.sora_tol;
    p.sora.max_loops = c.sora_max;
    p.sora.warm_start = c.warm_start;
    const auto t0 = Clock::now();
    json loops = json::array();
    SoraRun run;
    run.state = run_sora(p, [&](const SoraLoopRecord& r) {
        say(progress, "[rbto] beta=%g loop %d vf=%.4f mpp_change=%.3g dto=%.1fs", beta, r.loop, r.volume_fraction,
            r.mpp_change, r.dto_seconds);
        loops.push_back(loop_json(r));
    });
    const auto& st = run.state;
    json mpp = json::array();
    for (const auto& x : st.mpp) mpp.push_back(vec_json(x));
    run.log = {{"beta", beta},
               {"target_failure_probability", normal_cdf(-beta)},
               {"volume_fraction", st.history.empty() ? 0.0 : st.history.back().volume_fraction},
               {"loops", st.loop},
               {"converged", st.converged},
               {"mpp", mpp},
               {"seconds", seconds_since(t0)},
               {"history", loops}};
    return run;
}

json run_verification(const RunConfig& c, const Model& m, const DensityField& design, const ChaosSurrogate* surrogate,
                      const std::vector<double>& betas, const fs::path& dir, std::ostream* progress) {
    McsSettings s;
    s.count = c.mcs_n;
    s.seed = c.seed;
    s.source = mcs_source_from_string(c.mcs_source);
    s.penal = c.simp_p;
    ChaosSurrogate built;
    if (s.source == McsSource::Surrogate && !surrogate) {
        const HermiteBasis hermite = hermite_terms(m.basis.terms(), c.pce_p);
        built = build_surrogate(*m.fea, design, m.basis, m.marginal, collocation_points(hermite, c.colloc_count),
                                hermite, c.simp_p, m.bc.output_dof);
        surrogate = &built;
    }
    const auto t0 = Clock::now();
    const McsReport r = run_mcs(*m.fea, design, m.basis, m.marginal, {m.bc.output_dof, m.bc.allowable}, s, surrogate);
    const double secs = seconds_since(t0);
    say(progress, "[verify] %s n=%d pf=%.5f mean=%.5g std=%.5g (%.1fs)", to_string(s.source).c_str(), r.count,
        r.failure_probability, r.mean, r.std_dev, secs);
    write_cdf_csv(dir / "cdf.csv", r.cdf);
    write_cdf_csv(dir / "cdf_tail.csv", r.tail(10));
    json targets = json::array();
    for (double b : betas) {
        const double t = normal_cdf(-b);
        targets.push_back({{"beta", b}, {"target_failure_probability", t}, {"attained", r.failure_probability <= t}});
    }
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(r.design_hash));
    return {{"source", to_string(s.source)},
            {"count", r.count},
            {"seed", r.seed},
            {"valid", r.samples.size()},
            {"invalid", r.invalid},
            {"allowable", m.bc.allowable},
            {"failure_probability", r.failure_probability},
            {"mean", r.mean},
            {"std_dev", r.std_dev},
            {"design_hash", hash},
            {"targets", targets},
            {"seconds", secs}};
}

json run_rbto_mode(Mode mode, const RunConfig& c, const Model& m, const fs::path& dir, std::ostream* progress) {
    json runs = json::array();
    for (double beta : c.beta) {
        fs::path sub = dir;
        if (c.beta.size() > 1) {
            char name[64];
            std::snprintf(name, sizeof name, "beta-%g", beta);
            sub /= name;
            fs::create_directories(sub);
        }
        SoraRun run = run_sora_for(c, m, beta, progress);
        write_design(sub, m, run.state.design);
        if (mode == Mode::Verify) {
            const ChaosSurrogate* s = run.state.surrogates.empty() ? nullptr : &run.state.surrogates.front();
            run.log["mcs"] = run_verification(c, m, run.state.design, s, {beta}, sub, progress);
        }
        if (c.beta.size() > 1) run.log["directory"] = sub.filename().string();
        runs.push_back(std::move(run.log));
    }
    return runs;
}

} // namespace

nlohmann::json error_record(const std::exception& e) {
    std::string code = "internal";
    if (const auto* re = dynamic_cast<const Error*>(&e)) code = std::string(to_string(re->code()));
    return {{"error", {{"code", code}, {"message", e.what()}}}};
}

int exit_code(const std::exception& e) {
    if (const auto* re = dynamic_cast<const Error*>(&e)) {
        switch (re->code()) {
        case ErrorCode::Config: return 2;
        case ErrorCode::Io: return 3;
        default: return 1;
        }
    }
    return 1;
}

RunOutput execute(Mode mode, const RunConfig& c, std::ostream* progress) {
    RunOutput out;
    out.directory = run_directory(c, mode);
    std::error_code ec;
    fs::create_directories(out.directory, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + out.directory.string() + ": " + ec.message());
    fs::remove(out.directory / "error.json", ec);
    try {
        write_json(out.directory / "config.json", c.to_json());
        say(progress, "[%s] output %s", to_string(mode).c_str(), out.directory.string().c_str());
        const Model m = make_model(c);
        const auto t0 = Clock::now();
        json log{{"mode", to_string(mode)},
                 {"config_hash", config_hash(c, mode)},
                 {"problem", c.problem},
                 {"elements", m.bc.grid.element_count()},
                 {"active_elements", m.bc.grid.active_count()},
                 {"output_dof", m.bc.output_dof},
                 {"kl_eigenvalues", vec_json(m.basis.eigenvalues)}};
        if (mode == Mode::Dto) {
            log["dto"] = run_dto_mode(c, m, out.directory, progress);
        } else if (mode == Mode::Verify && !c.design_csv.empty()) {
            const DensityField d = read_density_csv(c.design_csv, m.bc.grid);
            log["design_csv"] = c.design_csv;
            log["mcs"] = run_verification(c, m, d, nullptr, c.beta, out.directory, progress);
        } else {
            log["runs"] = run_rbto_mode(mode, c, m, out.directory, progress);
        }
        log["seconds"] = seconds_since(t0);
        write_json(out.directory / "run_log.json", log);
        out.log = std::move(log);
    } catch (const std::exception& e) {
        try {
            write_json(out.directory / "error.json", error_record(e));
        } catch (...) {
        }
        throw;
    }
    return out;
}

} // namespace rbto::cli
