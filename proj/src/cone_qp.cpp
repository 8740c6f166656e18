#include "cone_qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sced::detail {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Cone {
  int l = 0;
  std::vector<int> q;

  int dim() const {
    int d = l;
    for (int k : q) d += k;
    return d;
  }
  int degree() const { return l + static_cast<int>(q.size()); }
};

VectorXd unit(const Cone& c) {
  VectorXd e = VectorXd::Zero(c.dim());
  e.head(c.l).setOnes();
  int o = c.l;
  for (int k : c.q) {
    e[o] = 1.0;
    o += k;
  }
  return e;
}

// Jordan product u o v.
VectorXd product(const Cone& c, const VectorXd& u, const VectorXd& v) {
  VectorXd w(u.size());
  w.head(c.l) = u.head(c.l).cwiseProduct(v.head(c.l));
  int o = c.l;
  for (int k : c.q) {
    w[o] = u.segment(o, k).dot(v.segment(o, k));
    w.segment(o + 1, k - 1) = u[o] * v.segment(o + 1, k - 1) + v[o] * u.segment(o + 1, k - 1);
    o += k;
  }
  return w;
}

// Solves l o u = r for u.
VectorXd divide(const Cone& c, const VectorXd& l, const VectorXd& r) {
  VectorXd u(l.size());
  u.head(c.l) = r.head(c.l).cwiseQuotient(l.head(c.l));
  int o = c.l;
  for (int k : c.q) {
    const double l0 = l[o];
    const auto l1 = l.segment(o + 1, k - 1);
    const auto r1 = r.segment(o + 1, k - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double u0 = (l0 * r[o] - l1.dot(r1)) / det;
    u[o] = u0;
    u.segment(o + 1, k - 1) = (r1 - u0 * l1) / l0;
    o += k;
  }
  return u;
}

double smallest_positive_root(double a, double b, double c) {
  if (c <= 0.0) return 0.0;
  const double scale = std::abs(b) + std::abs(c);
  if (std::abs(a) <= 1e-15 * scale) return b < 0.0 ? -c / b : kInf;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return kInf;
  const double t = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  double best = kInf;
  if (t != 0.0) {
    const double r1 = t / a, r2 = c / t;
    if (r1 > 0.0) best = std::min(best, r1);
    if (r2 > 0.0) best = std::min(best, r2);
  }
  return best;
}

// Largest a with v + a*d in K, for v interior.
double max_step(const Cone& c, const VectorXd& v, const VectorXd& d) {
  double a = kInf;
  for (int i = 0; i < c.l; ++i) {
    if (d[i] < 0.0) a = std::min(a, -v[i] / d[i]);
  }
  int o = c.l;
  for (int k : c.q) {
    const double v0 = v[o], d0 = d[o];
    const auto v1 = v.segment(o + 1, k - 1);
    const auto d1 = d.segment(o + 1, k - 1);
    const double qa = d0 * d0 - d1.squaredNorm();
    const double qb = 2.0 * (v0 * d0 - v1.dot(d1));
    const double qc = (v0 - v1.norm()) * (v0 + v1.norm());
    a = std::min(a, smallest_positive_root(qa, qb, qc));
    if (d0 < 0.0) a = std::min(a, -v0 / d0);
    o += k;
  }
  return a;
}

// Smallest t with v + t*e on the cone boundary or inside.
double boundary_shift(const Cone& c, const VectorXd& v) {
  double t = -kInf;
  for (int i = 0; i < c.l; ++i) t = std::max(t, -v[i]);
  int o = c.l;
  for (int k : c.q) {
    t = std::max(t, v.segment(o + 1, k - 1).norm() - v[o]);
    o += k;
  }
  return t;
}

double soc_norm(double x0, const Eigen::Ref<const VectorXd>& x1) {
  const double n1 = x1.norm();
  return std::sqrt(std::max((x0 - n1) * (x0 + n1), 1e-300));
}

struct Scaling {
  MatrixXd W;
  MatrixXd Winv;
  VectorXd lambda;
};

// Nesterov-Todd scaling point: W z = W^-1 s = lambda.
Scaling nt_scaling(const Cone& c, const VectorXd& s, const VectorXd& z) {
  const int m = c.dim();
  Scaling sc{MatrixXd::Zero(m, m), MatrixXd::Zero(m, m), VectorXd()};
  for (int i = 0; i < c.l; ++i) {
    const double d = std::sqrt(s[i] / z[i]);
    sc.W(i, i) = d;
    sc.Winv(i, i) = 1.0 / d;
  }
  int o = c.l;
  for (int k : c.q) {
    const double sn = soc_norm(s[o], s.segment(o + 1, k - 1));
    const double zn = soc_norm(z[o], z.segment(o + 1, k - 1));
    const VectorXd sb = s.segment(o, k) / sn;
    const VectorXd zb = z.segment(o, k) / zn;
    const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
    const double w0 = (sb[0] + zb[0]) / (2.0 * gamma);
    const VectorXd w1 = (sb.tail(k - 1) - zb.tail(k - 1)) / (2.0 * gamma);
    const double beta = std::sqrt(sn / zn);
    MatrixXd inner =
        MatrixXd::Identity(k - 1, k - 1) + w1 * w1.transpose() / (1.0 + w0);
    auto W = sc.W.block(o, o, k, k);
    auto Wi = sc.Winv.block(o, o, k, k);
    W(0, 0) = beta * w0;
    W.block(0, 1, 1, k - 1) = beta * w1.transpose();
    W.block(1, 0, k - 1, 1) = beta * w1;
    W.block(1, 1, k - 1, k - 1) = beta * inner;
    Wi(0, 0) = w0 / beta;
    Wi.block(0, 1, 1, k - 1) = -w1.transpose() / beta;
    Wi.block(1, 0, k - 1, 1) = -w1 / beta;
    Wi.block(1, 1, k - 1, k - 1) = inner / beta;
    o += k;
  }
  sc.lambda = sc.W * z;
  return sc;
}

class KktSystem {
 public:
  KktSystem(const ConeQpData& d, const MatrixXd& Winv)
      : n_(d.q.size()), p_(d.b.size()), m_(d.h.size()) {
    const int N = n_ + p_ + m_;
    K_ = MatrixXd::Zero(N, N);
    K_.topLeftCorner(n_, n_) = d.P;
    K_.block(0, n_, n_, p_) = d.A.transpose();
    K_.block(n_, 0, p_, n_) = d.A;
    const MatrixXd WG = Winv * d.G;
    K_.block(0, n_ + p_, n_, m_) = WG.transpose();
    K_.block(n_ + p_, 0, m_, n_) = WG;
    K_.bottomRightCorner(m_, m_) = -MatrixXd::Identity(m_, m_);
    MatrixXd reg = K_;
    const double delta = 1e-9;
    reg.topLeftCorner(n_, n_).diagonal().array() += delta;
    reg.block(n_, n_, p_, p_).diagonal().array() -= delta;
    lu_.compute(reg);
  }

  VectorXd solve(const VectorXd& rhs) const {
    VectorXd sol = lu_.solve(rhs);
    for (int i = 0; i < 3; ++i) {
      const VectorXd r = rhs - K_ * sol;
      sol += lu_.solve(r);
    }
    return sol;
  }

  int n() const { return n_; }
  int p() const { return p_; }
  int m() const { return m_; }

 private:
  int n_, p_, m_;
  MatrixXd K_;
  Eigen::PartialPivLU<MatrixXd> lu_;
};

bool finite(const VectorXd& v) { return v.allFinite(); }

ConeQpResult run_ipm(const ConeQpData& d, const Cone& cone, const ConeQpSettings& st) {
  const int n = d.q.size(), p = d.b.size(), m = d.h.size();
  ConeQpResult res;
  const VectorXd e = unit(cone);

  {
    const KktSystem kkt(d, MatrixXd::Identity(m, m));
    VectorXd rhs(n + p + m);
    rhs << -d.q, d.b, d.h;
    const VectorXd sol = kkt.solve(rhs);
    res.x = sol.head(n);
    res.y = sol.segment(n, p);
    res.z = sol.tail(m);
    res.s = -res.z;
  }
  const double ts = boundary_shift(cone, res.s);
  if (ts >= -1e-8 * std::max(1.0, res.s.norm())) res.s += (1.0 + ts) * e;
  const double tz = boundary_shift(cone, res.z);
  if (tz >= -1e-8 * std::max(1.0, res.z.norm())) res.z += (1.0 + tz) * e;

  const double resx0 = std::max(1.0, d.q.norm());
  const double resy0 = std::max(1.0, d.b.norm());
  const double resz0 = std::max(1.0, d.h.norm());
  int stalls = 0;

  for (int it = 0; it <= st.max_iter; ++it) {
    res.iterations = it;
    const VectorXd rx = d.P * res.x + d.q + d.A.transpose() * res.y + d.G.transpose() * res.z;
    const VectorXd ry = d.A * res.x - d.b;
    const VectorXd rz = d.G * res.x + res.s - d.h;
    res.pcost = 0.5 * res.x.dot(d.P * res.x) + d.q.dot(res.x);
    res.gap = res.s.dot(res.z);
    res.dcost = res.pcost + res.y.dot(ry) + res.z.dot(rz) - res.gap;
    res.pres = std::max(ry.norm() / resy0, rz.norm() / resz0);
    res.dres = rx.norm() / resx0;
    if (!finite(res.x) || !finite(res.z) || !std::isfinite(res.gap)) break;
    if (res.pres <= st.tol && res.dres <= st.tol &&
        res.gap <= st.tol * std::max(1.0, std::abs(res.pcost))) {
      res.status = ConeQpStatus::Optimal;
      return res;
    }
    if (it == st.max_iter) break;

    const Scaling sc = nt_scaling(cone, res.s, res.z);
    const KktSystem kkt(d, sc.Winv);
    const VectorXd& lam = sc.lambda;
    const VectorXd lam_sq = product(cone, lam, lam);
    const VectorXd Winv_rz = sc.Winv * rz;

    auto direction = [&](const VectorXd& rc, VectorXd& dx, VectorXd& dy, VectorXd& dzt,
                         VectorXd& dst) {
      const VectorXd lr = divide(cone, lam, rc);
      VectorXd rhs(n + p + m);
      rhs << -rx, -ry, -Winv_rz - lr;
      const VectorXd sol = kkt.solve(rhs);
      dx = sol.head(n);
      dy = sol.segment(n, p);
      dzt = sol.tail(m);
      dst = lr - dzt;
    };

    VectorXd dx, dy, dzt, dst;
    direction(-lam_sq, dx, dy, dzt, dst);
    const double a_aff =
        std::min({1.0, max_step(cone, lam, dst), max_step(cone, lam, dzt)});
    const double sigma = std::pow(1.0 - a_aff, 3);
    const double mu = res.gap / cone.degree();
    const VectorXd rc = -lam_sq - product(cone, dst, dzt) + sigma * mu * e;
    direction(rc, dx, dy, dzt, dst);
    if (!finite(dx) || !finite(dzt)) break;
    const double a_max = std::min(max_step(cone, lam, dst), max_step(cone, lam, dzt));
    const double alpha = std::min(1.0, 0.99 * a_max);

    res.x += alpha * dx;
    res.y += alpha * dy;
    res.z += alpha * (sc.Winv * dzt);
    res.s += alpha * (sc.W * dst);

    stalls = alpha < 1e-10 ? stalls + 1 : 0;
    if (stalls >= 3) break;
  }
  res.status = ConeQpStatus::NumericalFailure;
  return res;
}

// minimize t  s.t.  Gx - t e + s = h, Ax = b, t >= -1
ConeQpResult phase_one(const ConeQpData& d, const Cone& cone, const ConeQpSettings& st) {
  const int n = d.q.size(), p = d.b.size(), m = d.h.size();
  const VectorXd e = unit(cone);
  ConeQpData ph;
  ph.P = MatrixXd::Zero(n + 1, n + 1);
  ph.q = VectorXd::Zero(n + 1);
  ph.q[n] = 1.0;
  ph.A = MatrixXd::Zero(p, n + 1);
  ph.A.leftCols(n) = d.A;
  ph.b = d.b;
  ph.G = MatrixXd::Zero(m + 1, n + 1);
  ph.h = VectorXd::Zero(m + 1);
  ph.G.topLeftCorner(cone.l, n) = d.G.topRows(cone.l);
  ph.G.block(0, n, cone.l, 1) = -e.head(cone.l);
  ph.h.head(cone.l) = d.h.head(cone.l);
  ph.G(cone.l, n) = -1.0;
  ph.h[cone.l] = 1.0;
  const int rest = m - cone.l;
  ph.G.block(cone.l + 1, 0, rest, n) = d.G.bottomRows(rest);
  ph.G.block(cone.l + 1, n, rest, 1) = -e.tail(rest);
  ph.h.tail(rest) = d.h.tail(rest);
  Cone pc = cone;
  pc.l += 1;
  return run_ipm(ph, pc, st);
}

struct Equilibration {
  VectorXd col, row_a, row_g;
};

Equilibration equilibrate(ConeQpData& d, const Cone& cone) {
  const int n = d.q.size(), p = d.b.size(), m = d.h.size();
  Equilibration eq{VectorXd::Ones(n), VectorXd::Ones(p), VectorXd::Ones(m)};
  auto inv_root = [](double v) { return v > 0.0 ? 1.0 / std::sqrt(v) : 1.0; };
  for (int pass = 0; pass < 20; ++pass) {
    VectorXd cs(n);
    for (int j = 0; j < n; ++j) {
      double v = 0.0;
      if (p > 0) v = std::max(v, d.A.col(j).cwiseAbs().maxCoeff());
      if (m > 0) v = std::max(v, d.G.col(j).cwiseAbs().maxCoeff());
      cs[j] = inv_root(v);
    }
    VectorXd ra(p), rg(m);
    for (int i = 0; i < p; ++i) ra[i] = inv_root(d.A.row(i).cwiseAbs().maxCoeff());
    for (int i = 0; i < cone.l; ++i) rg[i] = inv_root(d.G.row(i).cwiseAbs().maxCoeff());
    int o = cone.l;
    for (int k : cone.q) {
      rg.segment(o, k).setConstant(inv_root(d.G.middleRows(o, k).cwiseAbs().maxCoeff()));
      o += k;
    }
    d.A = ra.asDiagonal() * d.A * cs.asDiagonal();
    d.G = rg.asDiagonal() * d.G * cs.asDiagonal();
    d.P = cs.asDiagonal() * d.P * cs.asDiagonal();
    d.q = d.q.cwiseProduct(cs);
    d.b = d.b.cwiseProduct(ra);
    d.h = d.h.cwiseProduct(rg);
    eq.col = eq.col.cwiseProduct(cs);
    eq.row_a = eq.row_a.cwiseProduct(ra);
    eq.row_g = eq.row_g.cwiseProduct(rg);
  }
  return eq;
}

}  // namespace

ConeQpResult solve_cone_qp(const ConeQpData& data, const ConeQpSettings& settings) {
  Cone cone{data.orthant_dim, data.soc_dims};
  ConeQpData d = data;
  Equilibration eq{VectorXd::Ones(d.q.size()), VectorXd::Ones(d.b.size()),
                   VectorXd::Ones(d.h.size())};
  if (settings.equilibrate) eq = equilibrate(d, cone);

  ConeQpResult res = run_ipm(d, cone, settings);
  if (res.status != ConeQpStatus::Optimal) {
    const ConeQpResult ph = phase_one(d, cone, settings);
    const int n = d.q.size();
    if (ph.status == ConeQpStatus::Optimal && ph.x[n] > 1e-6) {
      res.status = ConeQpStatus::Infeasible;
      res.cert_y = ph.y.cwiseProduct(eq.row_a);
      VectorXd zc(d.h.size());
      zc.head(cone.l) = ph.z.head(cone.l);
      zc.tail(d.h.size() - cone.l) = ph.z.tail(d.h.size() - cone.l);
      res.cert_z = zc.cwiseProduct(eq.row_g);
    } else if (res.x.allFinite() && res.x.cwiseProduct(eq.col).norm() > 1e10) {
      res.status = ConeQpStatus::Unbounded;
    }
  }
  res.x = res.x.cwiseProduct(eq.col);
  res.y = res.y.cwiseProduct(eq.row_a);
  res.z = res.z.cwiseProduct(eq.row_g);
  res.s = res.s.cwiseQuotient(eq.row_g);
  return res;
}

}  // namespace sced::detail
