#include "rbto/verification.hpp"

#include "rbto/error.hpp"
#include "rbto/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rbto {

Eigen::MatrixXd lhs_sample(int count, int dim, std::uint64_t seed) {
    RBTO_REQUIRE(count >= 1 && dim >= 1, ErrorCode::InvalidParameter, "LHS needs count >= 1 and dim >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::MatrixXd out(count, dim);
    std::vector<int> strata(static_cast<std::size_t>(count));
    for (int d = 0; d < dim; ++d) {
        std::iota(strata.begin(), strata.end(), 0);
        std::shuffle(strata.begin(), strata.end(), rng);
        for (int i = 0; i < count; ++i) {
            double r = unit(rng);
            while (r == 0.0) r = unit(rng);
            const double u = (strata[static_cast<std::size_t>(i)] + r) / count;
            out(i, d) = normal_quantile(std::min(u, std::nextafter(1.0, 0.0)));
        }
    }
    return out;
}

std::string to_string(McsSource source) {
    return source == McsSource::FullFea ? "full-fea" : "surrogate";
}

McsSource mcs_source_from_string(const std::string& name) {
    if (name == "full-fea" || name == "fea") return McsSource::FullFea;
    if (name == "surrogate") return McsSource::Surrogate;
    throw Error(ErrorCode::Config, "unknown MCS source '" + name + "' (expected full-fea or surrogate)");
}

std::vector<std::pair<double, double>> McsReport::tail(int points) const {
    const auto k = std::min(cdf.size(), static_cast<std::size_t>(std::max(points, 0)));
    return {cdf.end() - static_cast<std::ptrdiff_t>(k), cdf.end()};
}

McsReport summarize(std::vector<double> samples, double allowable) {
    RBTO_REQUIRE(!samples.empty(), ErrorCode::InvalidParameter, "no samples to summarize");
    McsReport r;
    const auto n = static_cast<double>(samples.size());
    double sum = 0.0;
    int failed = 0;
    for (double s : samples) {
        RBTO_REQUIRE(std::isfinite(s), ErrorCode::Numeric, "non-finite sample");
        sum += s;
        if (s > allowable) ++failed;
    }
    r.mean = sum / n;
    double ss = 0.0;
    for (double s : samples) ss += (s - r.mean) * (s - r.mean);
    r.std_dev = samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    r.failure_probability = failed / n;

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    r.cdf.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = static_cast<double>(i + 1) / n;
        if (!r.cdf.empty() && r.cdf.back().first == sorted[i])
            r.cdf.back().second = f;
        else
            r.cdf.emplace_back(sorted[i], f);
    }
    r.samples = std::move(samples);
    r.count = static_cast<int>(r.samples.size());
    return r;
}

McsReport run_mcs(const FeaSolver& fea, const DensityField& design, const KLBasis& basis,
                  const ModulusMarginal& marginal, const McsTarget& target, const McsSettings& settings,
                  const ChaosSurrogate* surrogate) {
    RBTO_REQUIRE(settings.count >= 1, ErrorCode::InvalidParameter, "MCS sample count must be >= 1");
    RBTO_REQUIRE(target.dof >= 0 && target.dof < fea.grid().dof_count(), ErrorCode::InvalidParameter,
                 "MCS DOF out of range");
    RBTO_REQUIRE(design.physical.size() == fea.grid().element_count(), ErrorCode::SizeMismatch,
                 "design does not match the grid");
    marginal.validate();
    if (settings.source == McsSource::Surrogate) {
        RBTO_REQUIRE(surrogate != nullptr, ErrorCode::InvalidParameter, "surrogate MCS needs a fitted surrogate");
        RBTO_REQUIRE(surrogate->basis.variables == basis.terms(), ErrorCode::Inconsistent,
                     "surrogate dimension differs from KL truncation");
        RBTO_REQUIRE(surrogate->dof == target.dof, ErrorCode::Inconsistent,
                     "surrogate was fitted for a different DOF");
    }

    const Eigen::MatrixXd xi = lhs_sample(settings.count, basis.terms(), settings.seed);
    std::vector<double> values(static_cast<std::size_t>(settings.count), 0.0);
    std::vector<char> valid(static_cast<std::size_t>(settings.count), 1);

    if (settings.source == McsSource::Surrogate) {
        for (int i = 0; i < settings.count; ++i)
            values[static_cast<std::size_t>(i)] = std::abs(surrogate->eval(xi.row(i).transpose()));
    } else {
        const int workers = settings.workers > 0 ? settings.workers : default_workers();
        parallel_for(settings.count, workers, [&](int, int i) {
            const auto k = static_cast<std::size_t>(i);
            try {
                const Eigen::VectorXd e = field_to_modulus(sample_field(basis, xi.row(i).transpose()), marginal);
                const auto sol = fea.solve(design.physical, e, settings.penal);
                values[k] = std::abs(sol.u[target.dof]);
                if (!std::isfinite(values[k])) valid[k] = 0;
            } catch (const Error&) {
                valid[k] = 0;
            }
        });
    }

    std::vector<double> kept;
    kept.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        if (valid[i]) kept.push_back(values[i]);
    const int invalid = settings.count - static_cast<int>(kept.size());
    RBTO_REQUIRE(invalid * 1000 <= settings.count, ErrorCode::Numeric,
                 std::to_string(invalid) + " of " + std::to_string(settings.count) +
                     " MCS samples failed, above the 0.1% limit");

    McsReport r = summarize(std::move(kept), target.allowable);
    r.count = settings.count;
    r.invalid = invalid;
    r.seed = settings.seed;
    r.source = settings.source;
    r.target = target;
    r.design_hash = hash_state(design.physical, Eigen::VectorXd(), settings.penal);
    return r;
}

double kolmogorov_distance(std::vector<double> a, std::vector<double> b) {
    RBTO_REQUIRE(!a.empty() && !b.empty(), ErrorCode::InvalidParameter, "empty sample set");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double gap = 0.0;
    while (i < a.size() || j < b.size()) {
        double x;
        if (j == b.size() || (i < a.size() && a[i] <= b[j]))
            x = a[i];
        else
            x = b[j];
        while (i < a.size() && a[i] == x) ++i;
        while (j < b.size() && b[j] == x) ++j;
        gap = std::max(gap, std::abs(i / na - j / nb));
    }
    return gap;
}

McsComparison compare_reports(const McsReport& a, const McsReport& b) {
    RBTO_REQUIRE(a.target.dof == b.target.dof && a.target.allowable == b.target.allowable,
                 ErrorCode::Inconsistent, "reports refer to different constraints");
    RBTO_REQUIRE(a.design_hash == b.design_hash, ErrorCode::Inconsistent, "reports refer to different designs");
    auto rel = [](double d, double ref) { return ref != 0.0 ? d / std::abs(ref) : (d == 0.0 ? 0.0 : INFINITY); };
    McsComparison c;
    c.delta_mean = b.mean - a.mean;
    c.delta_std = b.std_dev - a.std_dev;
    c.delta_pf = b.failure_probability - a.failure_probability;
    c.relative_mean = rel(c.delta_mean, a.mean);
    c.relative_std = rel(c.delta_std, a.std_dev);
    c.relative_pf = rel(c.delta_pf, a.failure_probability);
    c.max_cdf_gap = kolmogorov_distance(a.samples, b.samples);
    return c;
}

} // namespace rbto
