#include "metadesign/mma.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "metadesign/error.hpp"

namespace metadesign {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct SubproblemData {
    int m, n;
    VectorXd low, upp, alfa, beta, p0, q0, b;
    MatrixXd P, Q;
    double a0;
    VectorXd a, c, d;
};

struct PrimalDual {
    VectorXd x, y, lam, xsi, eta, mu, s;
    double z, zet;
};

VectorXd residual(const SubproblemData& sp, const PrimalDual& v, double epsi) {
    const int n = sp.n, m = sp.m;
    const VectorXd ux1 = sp.upp - v.x, xl1 = v.x - sp.low;
    const VectorXd ux2 = ux1.cwiseProduct(ux1), xl2 = xl1.cwiseProduct(xl1);
    const VectorXd plam = sp.p0 + sp.P.transpose() * v.lam;
    const VectorXd qlam = sp.q0 + sp.Q.transpose() * v.lam;
    const VectorXd gvec = sp.P * ux1.cwiseInverse() + sp.Q * xl1.cwiseInverse();
    const VectorXd dpsidx = plam.cwiseQuotient(ux2) - qlam.cwiseQuotient(xl2);

    VectorXd r(3 * n + 4 * m + 2);
    int o = 0;
    r.segment(o, n) = dpsidx - v.xsi + v.eta; o += n;
    r.segment(o, m) = sp.c + sp.d.cwiseProduct(v.y) - v.mu - v.lam; o += m;
    r(o++) = sp.a0 - v.zet - sp.a.dot(v.lam);
    r.segment(o, m) = gvec - sp.a * v.z - v.y + v.s - sp.b; o += m;
    r.segment(o, n) = v.xsi.cwiseProduct(v.x - sp.alfa) - VectorXd::Constant(n, epsi); o += n;
    r.segment(o, n) = v.eta.cwiseProduct(sp.beta - v.x) - VectorXd::Constant(n, epsi); o += n;
    r.segment(o, m) = v.mu.cwiseProduct(v.y) - VectorXd::Constant(m, epsi); o += m;
    r(o++) = v.zet * v.z - epsi;
    r.segment(o, m) = v.lam.cwiseProduct(v.s) - VectorXd::Constant(m, epsi);
    return r;
}

VectorXd solve_subproblem(const SubproblemData& sp) {
    const int n = sp.n, m = sp.m;
    const double epsimin = 1e-7;
    double epsi = 1.0;
    PrimalDual v;
    v.x = 0.5 * (sp.alfa + sp.beta);
    v.y = VectorXd::Ones(m);
    v.z = 1.0;
    v.lam = VectorXd::Ones(m);
    v.xsi = (v.x - sp.alfa).cwiseInverse().cwiseMax(1.0);
    v.eta = (sp.beta - v.x).cwiseInverse().cwiseMax(1.0);
    v.mu = (0.5 * sp.c).cwiseMax(1.0);
    v.zet = 1.0;
    v.s = VectorXd::Ones(m);

    while (epsi > epsimin) {
        VectorXd res = residual(sp, v, epsi);
        double resnorm = res.norm();
        double resmax = res.cwiseAbs().maxCoeff();
        int inner = 0;
        while (resmax > 0.9 * epsi && inner < 200) {
            ++inner;
            const VectorXd ux1 = sp.upp - v.x, xl1 = v.x - sp.low;
            const VectorXd ux2 = ux1.cwiseProduct(ux1), xl2 = xl1.cwiseProduct(xl1);
            const VectorXd ux3 = ux1.cwiseProduct(ux2), xl3 = xl1.cwiseProduct(xl2);
            const VectorXd uxinv1 = ux1.cwiseInverse(), xlinv1 = xl1.cwiseInverse();
            const VectorXd uxinv2 = ux2.cwiseInverse(), xlinv2 = xl2.cwiseInverse();
            const VectorXd plam = sp.p0 + sp.P.transpose() * v.lam;
            const VectorXd qlam = sp.q0 + sp.Q.transpose() * v.lam;
            const VectorXd gvec = sp.P * uxinv1 + sp.Q * xlinv1;
            const MatrixXd gg = sp.P * uxinv2.asDiagonal() - sp.Q * xlinv2.asDiagonal();
            const VectorXd dpsidx = plam.cwiseQuotient(ux2) - qlam.cwiseQuotient(xl2);
            const VectorXd delx = dpsidx - epsi * (v.x - sp.alfa).cwiseInverse() + epsi * (sp.beta - v.x).cwiseInverse();
            const VectorXd dely = sp.c + sp.d.cwiseProduct(v.y) - v.lam - epsi * v.y.cwiseInverse();
            const double delz = sp.a0 - sp.a.dot(v.lam) - epsi / v.z;
            const VectorXd dellam = gvec - sp.a * v.z - v.y - sp.b + epsi * v.lam.cwiseInverse();
            VectorXd diagx = plam.cwiseQuotient(ux3) + qlam.cwiseQuotient(xl3);
            diagx = 2.0 * diagx + v.xsi.cwiseQuotient(v.x - sp.alfa) + v.eta.cwiseQuotient(sp.beta - v.x);
            const VectorXd diagxinv = diagx.cwiseInverse();
            const VectorXd diagy = sp.d + v.mu.cwiseQuotient(v.y);
            const VectorXd diagyinv = diagy.cwiseInverse();
            const VectorXd diaglam = v.s.cwiseQuotient(v.lam);
            const VectorXd diaglamyi = diaglam + diagyinv;

            VectorXd dx, dlam;
            double dz;
            if (m < n) {
                VectorXd bb(m + 1);
                bb.head(m) = dellam + dely.cwiseQuotient(diagy) - gg * delx.cwiseQuotient(diagx);
                bb(m) = delz;
                MatrixXd aa(m + 1, m + 1);
                aa.topLeftCorner(m, m) = MatrixXd(diaglamyi.asDiagonal()) + gg * diagxinv.asDiagonal() * gg.transpose();
                aa.topRightCorner(m, 1) = sp.a;
                aa.bottomLeftCorner(1, m) = sp.a.transpose();
                aa(m, m) = -v.zet / v.z;
                const VectorXd sol = aa.fullPivLu().solve(bb);
                dlam = sol.head(m);
                dz = sol(m);
                dx = -delx.cwiseQuotient(diagx) - (gg.transpose() * dlam).cwiseQuotient(diagx);
            } else {
                const VectorXd diaglamyiinv = diaglamyi.cwiseInverse();
                const VectorXd dellamyi = dellam + dely.cwiseQuotient(diagy);
                MatrixXd axx = MatrixXd(diagx.asDiagonal()) + gg.transpose() * diaglamyiinv.asDiagonal() * gg;
                const double azz = v.zet / v.z + sp.a.dot(sp.a.cwiseQuotient(diaglamyi));
                const VectorXd axz = -gg.transpose() * sp.a.cwiseQuotient(diaglamyi);
                const VectorXd bx = delx + gg.transpose() * dellamyi.cwiseQuotient(diaglamyi);
                const double bz = delz - sp.a.dot(dellamyi.cwiseQuotient(diaglamyi));
                MatrixXd aa(n + 1, n + 1);
                aa.topLeftCorner(n, n) = axx;
                aa.topRightCorner(n, 1) = axz;
                aa.bottomLeftCorner(1, n) = axz.transpose();
                aa(n, n) = azz;
                VectorXd bb(n + 1);
                bb.head(n) = -bx;
                bb(n) = -bz;
                const VectorXd sol = aa.fullPivLu().solve(bb);
                dx = sol.head(n);
                dz = sol(n);
                dlam = (gg * dx).cwiseQuotient(diaglamyi) - dz * sp.a.cwiseQuotient(diaglamyi) +
                       dellamyi.cwiseQuotient(diaglamyi);
            }

            const VectorXd dy = -dely.cwiseQuotient(diagy) + dlam.cwiseQuotient(diagy);
            const VectorXd dxsi = -v.xsi + epsi * (v.x - sp.alfa).cwiseInverse() -
                                  v.xsi.cwiseProduct(dx).cwiseQuotient(v.x - sp.alfa);
            const VectorXd deta = -v.eta + epsi * (sp.beta - v.x).cwiseInverse() +
                                  v.eta.cwiseProduct(dx).cwiseQuotient(sp.beta - v.x);
            const VectorXd dmu = -v.mu + epsi * v.y.cwiseInverse() - v.mu.cwiseProduct(dy).cwiseQuotient(v.y);
            const double dzet = -v.zet + epsi / v.z - v.zet * dz / v.z;
            const VectorXd ds = -v.s + epsi * v.lam.cwiseInverse() - v.s.cwiseProduct(dlam).cwiseQuotient(v.lam);

            // Largest step keeping every positive variable positive.
            double stm = 1.0;
            auto bound = [&stm](const VectorXd& val, const VectorXd& dval) {
                for (Eigen::Index i = 0; i < val.size(); ++i) stm = std::max(stm, -1.01 * dval(i) / val(i));
            };
            bound(v.y, dy);
            bound(VectorXd::Constant(1, v.z), VectorXd::Constant(1, dz));
            bound(v.lam, dlam);
            bound(v.xsi, dxsi);
            bound(v.eta, deta);
            bound(v.mu, dmu);
            bound(VectorXd::Constant(1, v.zet), VectorXd::Constant(1, dzet));
            bound(v.s, ds);
            bound(v.x - sp.alfa, dx);
            bound(sp.beta - v.x, -dx);
            double steg = 1.0 / stm;

            const PrimalDual old = v;
            double resnew = 2.0 * resnorm;
            int halvings = 0;
            while (resnew > resnorm && halvings < 50) {
                ++halvings;
                v.x = old.x + steg * dx;
                v.y = old.y + steg * dy;
                v.z = old.z + steg * dz;
                v.lam = old.lam + steg * dlam;
                v.xsi = old.xsi + steg * dxsi;
                v.eta = old.eta + steg * deta;
                v.mu = old.mu + steg * dmu;
                v.zet = old.zet + steg * dzet;
                v.s = old.s + steg * ds;
                res = residual(sp, v, epsi);
                resnew = res.norm();
                steg /= 2.0;
            }
            resnorm = resnew;
            resmax = res.cwiseAbs().maxCoeff();
        }
        epsi *= 0.1;
    }
    return v.x;
}

}  // namespace

Mma::Mma(int n, int m, MmaSettings settings) : n_(n), m_(m), s_(settings) {
    if (n < 1 || m < 1) throw DomainError("MMA needs at least one variable and one constraint");
}

void Mma::reset_asymptotes() { iter_ = 0; }

VectorXd Mma::update(const VectorXd& x, double /*f0*/, const VectorXd& df0dx, const VectorXd& fval,
                     const MatrixXd& dfdx, const VectorXd& xmin, const VectorXd& xmax) {
    if (x.size() != n_ || df0dx.size() != n_ || fval.size() != m_ || dfdx.rows() != m_ || dfdx.cols() != n_ ||
        xmin.size() != n_ || xmax.size() != n_)
        throw DimensionError("MMA update: inconsistent sizes");
    ++iter_;
    const VectorXd range = (xmax - xmin).cwiseMax(1e-5);
    if (iter_ < 3) {
        low_ = x - s_.asymptote_init * range;
        upp_ = x + s_.asymptote_init * range;
    } else {
        for (int i = 0; i < n_; ++i) {
            const double osc = (x(i) - xold1_(i)) * (xold1_(i) - xold2_(i));
            const double factor = osc > 0 ? s_.asymptote_increase : (osc < 0 ? s_.asymptote_decrease : 1.0);
            low_(i) = x(i) - factor * (xold1_(i) - low_(i));
            upp_(i) = x(i) + factor * (upp_(i) - xold1_(i));
            low_(i) = std::clamp(low_(i), x(i) - 10.0 * range(i), x(i) - 0.01 * range(i));
            upp_(i) = std::clamp(upp_(i), x(i) + 0.01 * range(i), x(i) + 10.0 * range(i));
        }
    }

    SubproblemData sp;
    sp.m = m_;
    sp.n = n_;
    sp.low = low_;
    sp.upp = upp_;
    sp.alfa = (low_ + s_.albefa * (x - low_)).cwiseMax(x - s_.move_limit * range).cwiseMax(xmin);
    sp.beta = (upp_ - s_.albefa * (upp_ - x)).cwiseMin(x + s_.move_limit * range).cwiseMin(xmax);

    const double raa0 = 1e-5;
    const VectorXd ux1 = upp_ - x, xl1 = x - low_;
    const VectorXd ux2 = ux1.cwiseProduct(ux1), xl2 = xl1.cwiseProduct(xl1);
    const VectorXd xmamiinv = range.cwiseInverse();

    VectorXd p0 = df0dx.cwiseMax(0.0), q0 = (-df0dx).cwiseMax(0.0);
    const VectorXd pq0 = 0.001 * (p0 + q0) + raa0 * xmamiinv;
    sp.p0 = (p0 + pq0).cwiseProduct(ux2);
    sp.q0 = (q0 + pq0).cwiseProduct(xl2);

    MatrixXd p = dfdx.cwiseMax(0.0), q = (-dfdx).cwiseMax(0.0);
    const MatrixXd pq = 0.001 * (p + q) + raa0 * Eigen::VectorXd::Ones(m_) * xmamiinv.transpose();
    sp.P = (p + pq) * ux2.asDiagonal();
    sp.Q = (q + pq) * xl2.asDiagonal();
    sp.b = sp.P * ux1.cwiseInverse() + sp.Q * xl1.cwiseInverse() - fval;
    sp.a0 = s_.a0;
    sp.a = VectorXd::Zero(m_);
    sp.c = VectorXd::Constant(m_, s_.c);
    sp.d = VectorXd::Constant(m_, s_.d);

    VectorXd xnew = solve_subproblem(sp);
    if (!xnew.allFinite()) throw SolverFailure("MMA subproblem returned a non-finite design");
    xnew = xnew.cwiseMax(xmin).cwiseMin(xmax);
    xold2_ = iter_ >= 2 ? xold1_ : x;
    xold1_ = x;
    return xnew;
}

}  // namespace metadesign
