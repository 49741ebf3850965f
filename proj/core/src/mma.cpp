#include "rbto/mma.hpp"

#include "rbto/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace rbto {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Subproblem {
    int n;
    int m;
    Vec low, upp, alfa, beta, p0, q0, b, a, c, d;
    Mat P, Q;
    double a0;
};

struct PrimalDual {
    Vec x, y, lam, xsi, eta, mu, s;
    double z, zet;
};

double residual_norm(const Subproblem& sp, const PrimalDual& v, double epsi, double* resmax) {
    const Vec ux1 = sp.upp - v.x;
    const Vec xl1 = v.x - sp.low;
    const Vec plam = sp.p0 + sp.P.transpose() * v.lam;
    const Vec qlam = sp.q0 + sp.Q.transpose() * v.lam;
    const Vec gvec = sp.P * ux1.cwiseInverse() + sp.Q * xl1.cwiseInverse();
    const Vec dpsidx = plam.cwiseQuotient(ux1.cwiseAbs2()) - qlam.cwiseQuotient(xl1.cwiseAbs2());

    const Vec rex = dpsidx - v.xsi + v.eta;
    const Vec rey = sp.c + sp.d.cwiseProduct(v.y) - v.mu - v.lam;
    const double rez = sp.a0 - v.zet - sp.a.dot(v.lam);
    const Vec relam = gvec - sp.a * v.z - v.y + v.s - sp.b;
    const Vec rexsi = (v.xsi.array() * (v.x - sp.alfa).array() - epsi).matrix();
    const Vec reeta = (v.eta.array() * (sp.beta - v.x).array() - epsi).matrix();
    const Vec remu = (v.mu.array() * v.y.array() - epsi).matrix();
    const double rezet = v.zet * v.z - epsi;
    const Vec res = (v.lam.array() * v.s.array() - epsi).matrix();

    double sq = rex.squaredNorm() + rey.squaredNorm() + rez * rez + relam.squaredNorm() +
                rexsi.squaredNorm() + reeta.squaredNorm() + remu.squaredNorm() + rezet * rezet +
                res.squaredNorm();
    double mx = std::max({rex.lpNorm<Eigen::Infinity>(), rey.lpNorm<Eigen::Infinity>(),
                          std::abs(rez), relam.lpNorm<Eigen::Infinity>(),
                          rexsi.lpNorm<Eigen::Infinity>(), reeta.lpNorm<Eigen::Infinity>(),
                          remu.lpNorm<Eigen::Infinity>(), std::abs(rezet),
                          res.lpNorm<Eigen::Infinity>()});
    if (resmax) *resmax = mx;
    return std::sqrt(sq);
}

// Primal-dual Newton method on the convex MMA subproblem (Svanberg's subsolv).
PrimalDual solve_subproblem(const Subproblem& sp, double epsimin, int* newton_iterations) {
    const int n = sp.n;
    const int m = sp.m;
    PrimalDual v;
    v.x = 0.5 * (sp.alfa + sp.beta);
    v.y = Vec::Ones(m);
    v.z = 1.0;
    v.lam = Vec::Ones(m);
    v.xsi = (v.x - sp.alfa).cwiseInverse().cwiseMax(1.0);
    v.eta = (sp.beta - v.x).cwiseInverse().cwiseMax(1.0);
    v.mu = (0.5 * sp.c).cwiseMax(1.0);
    v.zet = 1.0;
    v.s = Vec::Ones(m);

    int total = 0;
    double epsi = 1.0;
    while (epsi > epsimin) {
        double resmax = 0.0;
        double resnorm = residual_norm(sp, v, epsi, &resmax);
        int ittt = 0;
        while (resmax > 0.9 * epsi && ittt < 200) {
            ++ittt;
            ++total;
            const Vec ux1 = sp.upp - v.x;
            const Vec xl1 = v.x - sp.low;
            const Vec ux2 = ux1.cwiseAbs2();
            const Vec xl2 = xl1.cwiseAbs2();
            const Vec ux3 = ux1.cwiseProduct(ux2);
            const Vec xl3 = xl1.cwiseProduct(xl2);
            const Vec uxinv1 = ux1.cwiseInverse();
            const Vec xlinv1 = xl1.cwiseInverse();
            const Vec plam = sp.p0 + sp.P.transpose() * v.lam;
            const Vec qlam = sp.q0 + sp.Q.transpose() * v.lam;
            const Vec gvec = sp.P * uxinv1 + sp.Q * xlinv1;
            const Mat GG = sp.P * ux2.cwiseInverse().asDiagonal() - sp.Q * xl2.cwiseInverse().asDiagonal();
            const Vec dpsidx = plam.cwiseQuotient(ux2) - qlam.cwiseQuotient(xl2);
            const Vec xa = v.x - sp.alfa;
            const Vec bx = sp.beta - v.x;
            const Vec delx = dpsidx - epsi * xa.cwiseInverse() + epsi * bx.cwiseInverse();
            const Vec dely = sp.c + sp.d.cwiseProduct(v.y) - v.lam - epsi * v.y.cwiseInverse();
            const double delz = sp.a0 - sp.a.dot(v.lam) - epsi / v.z;
            const Vec dellam = gvec - sp.a * v.z - v.y - sp.b + epsi * v.lam.cwiseInverse();
            const Vec diagx = 2.0 * (plam.cwiseQuotient(ux3) + qlam.cwiseQuotient(xl3)) +
                              v.xsi.cwiseQuotient(xa) + v.eta.cwiseQuotient(bx);
            const Vec diagxinv = diagx.cwiseInverse();
            const Vec diagy = sp.d + v.mu.cwiseQuotient(v.y);
            const Vec diagyinv = diagy.cwiseInverse();
            const Vec diaglam = v.s.cwiseQuotient(v.lam);
            const Vec diaglamyi = diaglam + diagyinv;

            Vec dx, dlam;
            double dz = 0.0;
            if (m < n) {
                const Vec blam = dellam + dely.cwiseQuotient(diagy) - GG * delx.cwiseQuotient(diagx);
                Mat aa(m + 1, m + 1);
                aa.topLeftCorner(m, m) = GG * diagxinv.asDiagonal() * GG.transpose();
                aa.topLeftCorner(m, m).diagonal() += diaglamyi;
                aa.topRightCorner(m, 1) = sp.a;
                aa.bottomLeftCorner(1, m) = sp.a.transpose();
                aa(m, m) = -v.zet / v.z;
                Vec bb(m + 1);
                bb.head(m) = blam;
                bb[m] = delz;
                const Vec sol = aa.partialPivLu().solve(bb);
                dlam = sol.head(m);
                dz = sol[m];
                dx = -delx.cwiseQuotient(diagx) - (GG.transpose() * dlam).cwiseQuotient(diagx);
            } else {
                const Vec diaglamyiinv = diaglamyi.cwiseInverse();
                const Vec dellamyi = dellam + dely.cwiseQuotient(diagy);
                Mat axx = GG.transpose() * diaglamyiinv.asDiagonal() * GG;
                axx.diagonal() += diagx;
                const double azz = v.zet / v.z + sp.a.dot(sp.a.cwiseQuotient(diaglamyi));
                const Vec axz = -GG.transpose() * sp.a.cwiseQuotient(diaglamyi);
                const Vec bxv = delx + GG.transpose() * dellamyi.cwiseQuotient(diaglamyi);
                const double bz = delz - sp.a.dot(dellamyi.cwiseQuotient(diaglamyi));
                Mat aa(n + 1, n + 1);
                aa.topLeftCorner(n, n) = axx;
                aa.topRightCorner(n, 1) = axz;
                aa.bottomLeftCorner(1, n) = axz.transpose();
                aa(n, n) = azz;
                Vec bb(n + 1);
                bb.head(n) = -bxv;
                bb[n] = -bz;
                const Vec sol = aa.partialPivLu().solve(bb);
                dx = sol.head(n);
                dz = sol[n];
                dlam = (GG * dx).cwiseQuotient(diaglamyi) - dz * sp.a.cwiseQuotient(diaglamyi) +
                       dellamyi.cwiseQuotient(diaglamyi);
            }

            const Vec dy = -dely.cwiseQuotient(diagy) + dlam.cwiseQuotient(diagy);
            const Vec dxsi = (-v.xsi.array() + epsi / xa.array() - v.xsi.array() * dx.array() / xa.array()).matrix();
            const Vec deta = (-v.eta.array() + epsi / bx.array() + v.eta.array() * dx.array() / bx.array()).matrix();
            const Vec dmu = (-v.mu.array() + epsi / v.y.array() - v.mu.array() * dy.array() / v.y.array()).matrix();
            const double dzet = -v.zet + epsi / v.z - v.zet * dz / v.z;
            const Vec ds = (-v.s.array() + epsi / v.lam.array() - v.s.array() * dlam.array() / v.lam.array()).matrix();

            double stmxx = 0.0;
            auto ratio = [&stmxx](const Vec& dval, const Vec& val) {
                for (Eigen::Index i = 0; i < val.size(); ++i) stmxx = std::max(stmxx, -1.01 * dval[i] / val[i]);
            };
            ratio(dy, v.y);
            stmxx = std::max(stmxx, -1.01 * dz / v.z);
            ratio(dlam, v.lam);
            ratio(dxsi, v.xsi);
            ratio(deta, v.eta);
            ratio(dmu, v.mu);
            stmxx = std::max(stmxx, -1.01 * dzet / v.zet);
            ratio(ds, v.s);
            double stmalbe = 0.0;
            for (int j = 0; j < n; ++j) {
                stmalbe = std::max(stmalbe, -1.01 * dx[j] / xa[j]);
                stmalbe = std::max(stmalbe, 1.01 * dx[j] / bx[j]);
            }
            double steg = 1.0 / std::max({stmalbe, stmxx, 1.0});

            const PrimalDual old = v;
            int itto = 0;
            double resinew = 2.0 * resnorm;
            while (resinew > resnorm && itto < 50) {
                ++itto;
                v.x = old.x + steg * dx;
                v.y = old.y + steg * dy;
                v.z = old.z + steg * dz;
                v.lam = old.lam + steg * dlam;
                v.xsi = old.xsi + steg * dxsi;
                v.eta = old.eta + steg * deta;
                v.mu = old.mu + steg * dmu;
                v.zet = old.zet + steg * dzet;
                v.s = old.s + steg * ds;
                resinew = residual_norm(sp, v, epsi, &resmax);
                steg /= 2.0;
            }
            resnorm = resinew;
        }
        epsi *= 0.1;
    }
    if (newton_iterations) *newton_iterations = total;
    return v;
}

} // namespace

MmaState::MmaState(int n, int m, MmaSettings settings) : n_(n), m_(m), settings_(settings) {
    RBTO_REQUIRE(n >= 1 && m >= 0, ErrorCode::InvalidParameter, "MMA needs n >= 1 and m >= 0");
}

Eigen::VectorXd MmaState::step(const Eigen::VectorXd& x, double f0, const Eigen::VectorXd& df0,
                               const Eigen::VectorXd& g, const Eigen::MatrixXd& dg,
                               const Eigen::VectorXd& xmin, const Eigen::VectorXd& xmax) {
    (void)f0;
    RBTO_REQUIRE(x.size() == n_ && df0.size() == n_ && xmin.size() == n_ && xmax.size() == n_,
                 ErrorCode::SizeMismatch, "MMA vector length mismatch");
    RBTO_REQUIRE(g.size() == m_ && dg.rows() == m_ && dg.cols() == n_, ErrorCode::SizeMismatch,
                 "MMA constraint shape mismatch");
    RBTO_REQUIRE(df0.allFinite() && g.allFinite() && dg.allFinite(), ErrorCode::Numeric,
                 "non-finite MMA gradients");
    RBTO_REQUIRE((xmax.array() > xmin.array()).all(), ErrorCode::InvalidParameter,
                 "MMA bounds must satisfy xmin < xmax");

    const MmaSettings& s = settings_;
    const Vec range = xmax - xmin;
    ++iter_;
    if (iter_ <= 2) {
        low_ = x - s.asyinit * range;
        upp_ = x + s.asyinit * range;
    } else {
        for (int j = 0; j < n_; ++j) {
            const double zzz = (x[j] - xold1_[j]) * (xold1_[j] - xold2_[j]);
            const double factor = zzz > 0.0 ? s.asyincr : (zzz < 0.0 ? s.asydecr : 1.0);
            double lo = x[j] - factor * (xold1_[j] - low_[j]);
            double up = x[j] + factor * (upp_[j] - xold1_[j]);
            lo = std::clamp(lo, x[j] - s.asymax * range[j], x[j] - s.asymin * range[j]);
            up = std::clamp(up, x[j] + s.asymin * range[j], x[j] + s.asymax * range[j]);
            low_[j] = lo;
            upp_[j] = up;
        }
    }

    Subproblem sp;
    sp.n = n_;
    sp.m = m_;
    sp.low = low_;
    sp.upp = upp_;
    sp.alfa.resize(n_);
    sp.beta.resize(n_);
    for (int j = 0; j < n_; ++j) {
        sp.alfa[j] = std::max({low_[j] + s.albefa * (x[j] - low_[j]), x[j] - s.move * range[j], xmin[j]});
        sp.beta[j] = std::min({upp_[j] - s.albefa * (upp_[j] - x[j]), x[j] + s.move * range[j], xmax[j]});
    }
    const Vec xmamiinv = range.cwiseMax(1e-5).cwiseInverse();
    const Vec ux1 = upp_ - x;
    const Vec xl1 = x - low_;
    const Vec ux2 = ux1.cwiseAbs2();
    const Vec xl2 = xl1.cwiseAbs2();

    Vec p0 = df0.cwiseMax(0.0);
    Vec q0 = (-df0).cwiseMax(0.0);
    const Vec pq0 = 0.001 * (p0 + q0) + s.raa0 * xmamiinv;
    sp.p0 = (p0 + pq0).cwiseProduct(ux2);
    sp.q0 = (q0 + pq0).cwiseProduct(xl2);

    Mat P = dg.cwiseMax(0.0);
    Mat Q = (-dg).cwiseMax(0.0);
    const Mat PQ = 0.001 * (P + Q) + s.raa0 * Vec::Ones(m_) * xmamiinv.transpose();
    sp.P = (P + PQ) * ux2.asDiagonal();
    sp.Q = (Q + PQ) * xl2.asDiagonal();
    sp.b = sp.P * ux1.cwiseInverse() + sp.Q * xl1.cwiseInverse() - g;
    sp.a0 = s.a0;
    sp.a = Vec::Zero(m_);
    sp.c = Vec::Constant(m_, s.c);
    sp.d = Vec::Constant(m_, s.d);

    info_ = MmaStepInfo{};
    PrimalDual sol = solve_subproblem(sp, s.kkt_tolerance, &info_.newton_iterations);
    RBTO_REQUIRE(sol.x.allFinite(), ErrorCode::Numeric, "MMA subproblem diverged");
    for (int i = 0; i < m_; ++i) {
        if (sol.y[i] > info_.max_artificial) {
            info_.max_artificial = sol.y[i];
            info_.violated_constraint = i;
        }
    }
    info_.feasible = info_.max_artificial <= 1e-6;
    if (info_.feasible) info_.violated_constraint = -1;

    xold2_ = iter_ >= 2 ? xold1_ : x;
    xold1_ = x;
    return sol.x.cwiseMax(xmin).cwiseMin(xmax);
}

} // namespace rbto
