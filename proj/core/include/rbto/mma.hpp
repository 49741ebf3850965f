#pragma once

#include <Eigen/Core>

namespace rbto {

/// Svanberg's method of moving asymptotes for
///   min f0(x) + a0 z + sum(c_i y_i + d_i y_i^2 / 2)
///   s.t. f_i(x) - a_i z - y_i <= 0,  xmin <= x <= xmax,  y, z >= 0
/// with a_i = 0, so the artificial y_i only absorb infeasibility.
struct MmaSettings {
    double asyinit = 0.5; // initial asymptote offset, fraction of xmax - xmin
    double asydecr = 0.7;
    double asyincr = 1.2;
    double asymin = 0.01;
    double asymax = 10.0;
    double move = 0.5;    // move limit, fraction of xmax - xmin
    double albefa = 0.1;
    double raa0 = 1e-5;
    double a0 = 1.0;
    double c = 1000.0;
    double d = 1.0;
    double kkt_tolerance = 1e-9;
};

struct MmaStepInfo {
    bool feasible = true;          // every artificial variable y_i vanished
    int violated_constraint = -1;  // index of the largest y_i when infeasible
    double max_artificial = 0.0;
    int newton_iterations = 0;
};

class MmaState {
public:
    MmaState(int n, int m, MmaSettings settings = {});

    /// One outer MMA iteration. dg is m x n (row i = gradient of constraint i).
    Eigen::VectorXd step(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0,
                         const Eigen::VectorXd& g, const Eigen::MatrixXd& dg,
                         const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax);

    int iteration() const noexcept { return iter_; }
    const Eigen::VectorXd& low() const noexcept { return low_; }
    const Eigen::VectorXd& upp() const noexcept { return upp_; }
    const MmaStepInfo& last_info() const noexcept { return info_; }
    const MmaSettings& settings() const noexcept { return settings_; }

private:
    int n_;
    int m_;
    MmaSettings settings_;
    int iter_ = 0;
    Eigen::VectorXd xold1_;
    Eigen::VectorXd xold2_;
    Eigen::VectorXd low_;
    Eigen::VectorXd upp_;
    MmaStepInfo info_;
};

} // namespace rbto
