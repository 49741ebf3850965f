#pragma once

#include "rbto/chaos.hpp"
#include "rbto/fea.hpp"
#include "rbto/filter.hpp"
#include "rbto/random_field.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace rbto {

/// count x dim standard-normal Latin hypercube; one stratum per sample and dimension.
Eigen::MatrixXd lhs_sample(int count, int dim, std::uint64_t seed);

enum class McsSource { FullFea, Surrogate };

std::string to_string(McsSource source);
McsSource mcs_source_from_string(const std::string& name);

struct McsTarget {
    int dof = -1;
    double allowable = 0.0;
};

struct McsSettings {
    int count = 50000;
    std::uint64_t seed = 0;
    McsSource source = McsSource::FullFea;
    double penal = 3.0;
    int workers = 0; // 0: hardware concurrency
};

struct McsReport {
    int count = 0;
    std::uint64_t seed = 0;
    McsSource source = McsSource::FullFea;
    McsTarget target;
    std::uint64_t design_hash = 0;
    std::vector<double> samples;          // |u_dof| of valid samples, in sample order
    int invalid = 0;
    double failure_probability = 0.0;
    double mean = 0.0;
    double std_dev = 0.0;                 // unbiased
    std::vector<std::pair<double, double>> cdf; // (displacement, empirical CDF), strictly increasing

    std::vector<std::pair<double, double>> tail(int points = 10) const;
};

/// Moments, P_f and CDF of a set of displacement samples.
McsReport summarize(std::vector<double> samples, double allowable);

/// Monte Carlo on |u_dof| for a fixed design. FullFea solves every sample;
/// Surrogate evaluates `surrogate` at the same LHS points.
McsReport run_mcs(const FeaSolver& fea, const DensityField& design, const KLBasis& basis,
                  const ModulusMarginal& marginal, const McsTarget& target, const McsSettings& settings,
                  const ChaosSurrogate* surrogate = nullptr);

struct McsComparison {
    double delta_mean = 0.0;
    double delta_std = 0.0;
    double delta_pf = 0.0;
    double relative_mean = 0.0;
    double relative_std = 0.0;
    double relative_pf = 0.0;
    double max_cdf_gap = 0.0;
};

/// Absolute and relative gaps (b - a, relative to a) and the Kolmogorov distance.
McsComparison compare_reports(const McsReport& a, const McsReport& b);

/// Two-sample Kolmogorov distance sup |F_a - F_b| of the empirical CDFs.
double kolmogorov_distance(std::vector<double> a, std::vector<double> b);

} // namespace rbto
