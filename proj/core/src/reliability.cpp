#include "rbto/reliability.hpp"

#include "rbto/error.hpp"

#include <cmath>
#include <numbers>

namespace rbto {

namespace {

using Vec = Eigen::VectorXd;

MppResult iterate_hmv(const LimitState& ls, double beta, const Vec& start, const HmvSettings& set) {
    const int n = ls.surrogate.basis.variables;
    MppResult out;
    Vec psi = start;
    std::vector<Vec> normals;
    Vec best;
    double best_g = 0.0;

    for (int t = 0; t < set.max_iterations; ++t) {
        Vec grad = ls.gradient(psi);
        RBTO_REQUIRE(grad.allFinite(), ErrorCode::Numeric, "non-finite limit-state gradient");
        if (grad.norm() == 0.0) {
            psi[0] += 1e-6;
            out.steps.push_back(MppStep::Perturbed);
            grad = ls.gradient(psi);
            if (grad.norm() == 0.0) {
                grad = Vec::Zero(n);
                grad[0] = 1.0;
            }
        }
        normals.push_back(grad.normalized());

        MppStep mode = MppStep::AdvancedMeanValue;
        Vec next = -beta * normals.back();
        const std::size_t k = normals.size();
        if (k >= 3) {
            const double zeta = (normals[k - 1] - normals[k - 2]).dot(normals[k - 2] - normals[k - 3]);
            if (zeta <= 0.0) {
                const Vec dir = normals[k - 1] + normals[k - 2] + normals[k - 3];
                if (dir.norm() > 1e-12) {
                    next = -beta * dir.normalized();
                    mode = MppStep::ConjugateMeanValue;
                }
            }
        }
        out.steps.push_back(mode);
        out.iterations = t + 1;

        const double g_next = ls.value(next);
        if (best.size() == 0 || g_next < best_g) {
            best = next;
            best_g = g_next;
        }
        const double moved = (next - psi).norm();
        psi = next;
        if (moved < set.tolerance) {
            out.converged = true;
            break;
        }
    }
    out.psi = out.converged ? psi : best;
    out.g = ls.value(out.psi);
    return out;
}

// Golden-section refinement of g on the circle around angle theta.
Vec refine_on_circle(const LimitState& ls, double beta, double theta, double half_width) {
    auto f = [&](double th) {
        Vec p(2);
        p << beta * std::cos(th), beta * std::sin(th);
        return ls.value(p);
    };
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = theta - half_width;
    double hi = theta + half_width;
    double c = hi - invphi * (hi - lo);
    double d = lo + invphi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > 1e-13) {
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - invphi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + invphi * (hi - lo);
            fd = f(d);
        }
    }
    const double th = 0.5 * (lo + hi);
    Vec p(2);
    p << beta * std::cos(th), beta * std::sin(th);
    return p;
}

} // namespace

MppResult hmv_search(const LimitState& ls, double beta, const Vec& start, const HmvSettings& set) {
    const int n = ls.surrogate.basis.variables;
    RBTO_REQUIRE(beta >= 0.0 && std::isfinite(beta), ErrorCode::InvalidParameter,
                 "reliability index must be non-negative");
    RBTO_REQUIRE(start.size() == n, ErrorCode::SizeMismatch, "start point dimension differs from surrogate");
    RBTO_REQUIRE(set.max_iterations >= 1 && set.tolerance > 0.0, ErrorCode::InvalidParameter,
                 "invalid HMV settings");

    if (beta == 0.0) {
        MppResult out;
        out.psi = Vec::Zero(n);
        out.xi = out.psi;
        out.g = ls.value(out.psi);
        out.converged = true;
        return out;
    }

    MppResult out = iterate_hmv(ls, beta, start, set);

    if (n == 2 && set.sweep_points > 0) {
        const double step = 2.0 * std::numbers::pi / set.sweep_points;
        double best_theta = 0.0;
        double best_g = 0.0;
        for (int k = 0; k < set.sweep_points; ++k) {
            const double th = k * step;
            Vec p(2);
            p << beta * std::cos(th), beta * std::sin(th);
            const double g = ls.value(p);
            if (k == 0 || g < best_g) {
                best_g = g;
                best_theta = th;
            }
        }
        const Vec candidate = refine_on_circle(ls, beta, best_theta, step);
        const double g_candidate = ls.value(candidate);
        const double scale = std::max(1.0, std::abs(out.g));
        if (g_candidate < out.g - 1e-10 * scale) {
            MppResult restarted = iterate_hmv(ls, beta, candidate, set);
            restarted.steps.insert(restarted.steps.begin(), MppStep::SweepRestart);
            restarted.iterations += out.iterations;
            if (!restarted.converged || restarted.g > g_candidate) {
                restarted.psi = candidate;
                restarted.g = g_candidate;
                restarted.converged = true;
            }
            out = std::move(restarted);
        }
    }

    // Iterates are built as -beta * unit vector; renormalize away rounding.
    out.psi *= beta / out.psi.norm();
    out.g = ls.value(out.psi);
    out.xi = mpp_to_physical(out.psi);
    return out;
}

Vec mpp_to_physical(const Vec& psi) { return psi; }

Vec physical_to_standard(const Vec& xi) { return xi; }

} // namespace rbto
