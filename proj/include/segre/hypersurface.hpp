#pragma once

// Nonminimal real-analytic hypersurfaces M in C^n given by a complexified
// defining expression rho(z, w, cz, cw) with M = {rho = 0} and, when M is
// nonminimal, X = {w = 0} contained in M. Provides Segre variety graphs
// (Newton with path following), membership, on-surface sampling, Levi
// signature, Segre-map rank, the k-root construction and reality checks.

#include <map>
#include <memory>
#include <mutex>
#include <optional>

#include "segre/common.hpp"
#include "segre/expr.hpp"
#include "segre/linalg.hpp"

namespace segre {

struct Point {
    std::vector<cplx> coords;  // z_1 .. z_{n-1}, w

    int n() const { return int(coords.size()); }
    cplx w() const { return coords.back(); }
    std::vector<cplx> zpart() const { return {coords.begin(), coords.end() - 1}; }

    double dist(const Point& o) const {
        double s = 0;
        for (std::size_t i = 0; i < coords.size(); ++i) s += std::norm(coords[i] - o.coords[i]);
        return std::sqrt(s);
    }
};

class Hypersurface {
  public:
    Hypersurface(std::string name, int n, AnalyticExpr rho, std::optional<AnalyticExpr> phi,
                 double u1, double u2)
        : name_(std::move(name)), n_(n), rho_(std::move(rho)), phi_(std::move(phi)),
          u1_(u1), u2_(u2) {
        if (n_ < 2) throw check_error("ambient dimension must be at least 2");
        if (!(u1_ > 0) || !(u2_ > u1_)) throw check_error("domain radii must satisfy 0 < u1 < u2");
        if (rho_.max_index() > n_ - 1 || (phi_ && phi_->max_index() > n_ - 1))
            throw check_error("variable index exceeds n-1");
        if (rho_.uses(VarKind::LW) || (phi_ && phi_->uses(VarKind::LW)))
            throw check_error("defining expressions may not use Lw");
        // X = {w = 0} lies in M iff rho(z, 0, cz, 0) vanishes identically;
        // decided on complexified samples with a fixed internal seed.
        Rng rng(0x5eb7e5a1u);
        double worst = 0;
        for (int t = 0; t < 100; ++t) {
            Assignment a;
            a.z = rng.in_polydisc(n_ - 1, u1_);
            a.cz = rng.in_polydisc(n_ - 1, u1_);
            a.w = 0;
            a.cw = 0;
            try {
                worst = std::max(worst, std::abs(rho_.eval(a)));
            } catch (const eval_error&) {
                worst = 1.0;
            }
        }
        contains_x_ = worst < 1e-10;
    }

    const std::string& name() const { return name_; }
    int n() const { return n_; }
    const AnalyticExpr& rho() const { return rho_; }
    const std::optional<AnalyticExpr>& phi() const { return phi_; }
    double u1() const { return u1_; }
    double u2() const { return u2_; }
    bool contains_x() const { return contains_x_; }
    VarTable vars() const { return VarTable{n_ - 1}; }

    bool in_u1(const Point& p, double slack = 1.0) const {
        for (const auto& c : p.coords)
            if (std::abs(c) > u1_ * slack) return false;
        return true;
    }

    Assignment natural(const Point& p) const {
        Assignment a;
        a.z = p.zpart();
        a.cz.resize(n_ - 1);
        for (int i = 0; i < n_ - 1; ++i) a.cz[i] = std::conj(a.z[i]);
        a.w = p.w();
        a.cw = std::conj(a.w);
        return a;
    }

    /// rho with holomorphic slots from Z and antiholomorphic from conj(zeta).
    cplx rho_pair(const Point& Z, const Point& zeta) const {
        Assignment a;
        a.z = Z.zpart();
        a.w = Z.w();
        a.cz.resize(n_ - 1);
        for (int i = 0; i < n_ - 1; ++i) a.cz[i] = std::conj(zeta.coords[i]);
        a.cw = std::conj(zeta.w());
        return rho_.eval(a);
    }

    /// Solve rho(z, w, cz, cw) = 0 for w by Newton from w_seed.
    cplx solve_w(const std::vector<cplx>& z, const std::vector<cplx>& cz, cplx cw, cplx w_seed,
                 double tol = 1e-12, int iters = 50) const {
        Assignment a;
        a.z = z;
        a.cz = cz;
        a.cw = cw;
        a.w = w_seed;
        VarTable vt = vars();
        int slot_w = vt.slot(VarKind::W, 0);
        cplx w = w_seed;
        double best = 1e300;
        for (int it = 0; it < iters; ++it) {
            a.w = w;
            Jet j = rho_.eval_jet(a, vt, 1);
            double r = std::abs(j.value);
            if (r < tol) return w;
            if (std::abs(j.d[slot_w]) < 1e-14)
                throw solve_error("Newton: defining gradient in w vanishes");
            cplx step = j.value / j.d[slot_w];
            w -= step;
            if (r >= best && r < 1e-10) return w;  // stalled at roundoff level
            best = std::min(best, r);
        }
        throw solve_error("Newton did not converge solving for w on " + name_);
    }

  private:
    std::string name_;
    int n_;
    AnalyticExpr rho_;
    std::optional<AnalyticExpr> phi_;
    double u1_, u2_;
    bool contains_x_ = true;
};

inline Hypersurface make_hypersurface(std::string name, int n, const std::string& defining,
                                      const std::string& phi, double u1, double u2) {
    std::optional<AnalyticExpr> p;
    if (!phi.empty()) p = parse(phi);
    return Hypersurface(std::move(name), n, parse_defining(defining), std::move(p), u1, u2);
}

// ---------------------------------------------------------------------------
// Segre varieties

/// Graph form of Q_zeta: z -> w with rho(z, w, conj zeta) = 0, solved by
/// Newton with path following from the basepoint solution. Solutions are
/// memoized behind a lock; evaluation is safe from concurrent callers.
class SegreVariety {
  public:
    SegreVariety(Hypersurface m, Point base, Tolerances tols = {})
        : m_(std::move(m)), base_(std::move(base)), tols_(tols),
          state_(std::make_shared<State>()) {
        if (!m_.in_u1(base_, 1.0 + 1e-9))
            throw check_error("Segre basepoint outside U1");
        cz_.resize(m_.n() - 1);
        for (int i = 0; i < m_.n() - 1; ++i) cz_[i] = std::conj(base_.coords[i]);
        cw_ = std::conj(base_.w());
        degenerate_ = m_.contains_x() && std::abs(base_.w()) < tols_.degeneracy * m_.u1();
        if (!degenerate_) {
            // Seed at the base z-coordinate from the conjugated w.
            w0_ = m_.solve_w(base_.zpart(), cz_, cw_, cw_, tols_.newton, tols_.newton_iters);
        }
    }

    const Point& base() const { return base_; }
    bool degenerate() const { return degenerate_; }
    const Hypersurface& surface() const { return m_; }

    cplx graph(const std::vector<cplx>& z) const {
        if (degenerate_) return 0.0;
        {
            std::lock_guard<std::mutex> lock(state_->mu);
            auto it = state_->cache.find(key(z));
            if (it != state_->cache.end()) return it->second;
        }
        cplx w = follow(z);
        {
            std::lock_guard<std::mutex> lock(state_->mu);
            state_->cache.emplace(key(z), w);
        }
        return w;
    }

    cplx graph(cplx z1) const { return graph(std::vector<cplx>{z1}); }

    Point point_at(const std::vector<cplx>& z) const {
        Point p{z};
        p.coords.push_back(graph(z));
        return p;
    }

    /// dw/dz_j along the graph at z (implicit differentiation).
    std::vector<cplx> graph_gradient(const std::vector<cplx>& z) const {
        cplx w = graph(z);
        Assignment a = assignment(z, w);
        VarTable vt = m_.vars();
        Jet j = m_.rho().eval_jet(a, vt, 1);
        cplx rw = j.d[vt.slot(VarKind::W, 0)];
        std::vector<cplx> g(m_.n() - 1);
        for (int k = 1; k <= m_.n() - 1; ++k) g[k - 1] = -j.d[vt.slot(VarKind::Z, k)] / rw;
        return g;
    }

    /// Membership residual of a point against this variety.
    double residual(const Point& p) const {
        Assignment a = assignment(p.zpart(), p.w());
        return std::abs(m_.rho().eval(a));
    }

  private:
    struct State {
        std::mutex mu;
        std::map<std::vector<double>, cplx> cache;
    };

    Hypersurface m_;
    Point base_;
    Tolerances tols_;
    std::vector<cplx> cz_;
    cplx cw_{};
    cplx w0_{};
    bool degenerate_ = false;
    std::shared_ptr<State> state_;

    static std::vector<double> key(const std::vector<cplx>& z) {
        std::vector<double> k;
        k.reserve(2 * z.size());
        for (auto& c : z) {
            k.push_back(c.real());
            k.push_back(c.imag());
        }
        return k;
    }

    Assignment assignment(const std::vector<cplx>& z, cplx w) const {
        Assignment a;
        a.z = z;
        a.cz = cz_;
        a.w = w;
        a.cw = cw_;
        return a;
    }

    cplx follow(const std::vector<cplx>& z_target) const {
        const int nz = m_.n() - 1;
        std::vector<cplx> z = base_.zpart();
        cplx w = w0_;
        const double bound = 0.1 * m_.u2();
        double t = 0;
        int steps = 0;
        while (t < 1.0) {
            if (++steps > 4000)
                throw solve_error("Segre graph path following exceeded step budget");
            Assignment a = assignment(z, w);
            VarTable vt = m_.vars();
            Jet j = m_.rho().eval_jet(a, vt, 1);
            cplx rw = j.d[vt.slot(VarKind::W, 0)];
            if (std::abs(rw) < 1e-14)
                throw solve_error("Segre graph: gradient in w vanishes along path");
            cplx dw_full = 0;
            std::vector<cplx> delta(nz);
            for (int k = 0; k < nz; ++k) {
                delta[k] = (z_target[k] - base_.coords[k]) -
                           (z[k] - base_.coords[k]);  // remaining displacement
                dw_full += -j.d[vt.slot(VarKind::Z, k + 1)] / rw * delta[k];
            }
            double remaining = 1.0 - t;
            double dt = remaining;
            if (std::abs(dw_full) > 0)
                dt = std::min(dt, remaining * bound / std::abs(dw_full));
            for (int attempt = 0;; ++attempt) {
                if (attempt > 50 || dt < 1e-9)
                    throw solve_error("Segre graph path following stalled near z");
                std::vector<cplx> z_next(nz);
                double frac = dt / remaining;
                for (int k = 0; k < nz; ++k) z_next[k] = z[k] + frac * delta[k];
                if (dt >= remaining - 1e-15) z_next = z_target;  // land exactly
                cplx w_pred = w + frac * dw_full;
                try {
                    cplx w_next = m_.solve_w(z_next, cz_, cw_, w_pred, tols_.newton,
                                             tols_.newton_iters);
                    if (std::abs(w_next - w_pred) > std::max(bound, 1e-6)) {
                        dt *= 0.5;  // branch jump suspicion
                        continue;
                    }
                    z = z_next;
                    w = w_next;
                    t += dt;
                    break;
                } catch (const solve_error&) {
                    dt *= 0.5;
                }
            }
        }
        return w;
    }
};

inline SegreVariety segre_variety(const Hypersurface& m, const Point& zeta,
                                  const Tolerances& tols = {}) {
    return SegreVariety(m, zeta, tols);
}

/// P lies on M iff it lies on its own Segre variety.
inline bool on_surface(const Hypersurface& m, const Point& p, double tol = 1e-10) {
    return std::abs(m.rho().eval(m.natural(p))) < tol;
}

// ---------------------------------------------------------------------------
// Sampling points on M

struct SampleOptions {
    int component = 0;       // +1 / -1 selects a side of M \ X, 0 either
    double z_frac = 0.5;     // z radius as a fraction of u1
    double w_low = 0.2;      // |w| range as fractions of u1
    double w_high = 0.8;
};

/// Random point on M. For surfaces in exponential form w = cw exp(i phi) the
/// ray w = t exp(i phi/2) is exact (phi independent of cw) or a fast fixed
/// point; otherwise a 1-real-parameter Gauss-Newton along random rays.
inline Point sample_on_surface(const Hypersurface& m, Rng& rng, const SampleOptions& opt = {},
                               const Tolerances& tols = {}) {
    const int nz = m.n() - 1;
    for (int attempt = 0; attempt < 80; ++attempt) {
        std::vector<cplx> z = rng.in_polydisc(nz, opt.z_frac * m.u1());
        std::vector<cplx> cz(nz);
        for (int i = 0; i < nz; ++i) cz[i] = std::conj(z[i]);
        double mag = rng.uniform(opt.w_low, opt.w_high) * m.u1();
        double sign = opt.component != 0 ? double(opt.component)
                                         : (rng.uniform() < 0.5 ? 1.0 : -1.0);
        double t = sign * mag;
        if (m.phi()) {
            cplx w = t;
            bool ok = true;
            for (int it = 0; it < 60; ++it) {
                Assignment a;
                a.z = z;
                a.cz = cz;
                a.cw = std::conj(w);
                cplx ph;
                try {
                    ph = m.phi()->eval(a);
                } catch (const eval_error&) {
                    ok = false;
                    break;
                }
                cplx w_next = t * std::exp(cplx(0, 0.5) * ph);
                if (std::abs(w_next - w) < 1e-15) {
                    w = w_next;
                    break;
                }
                w = w_next;
            }
            if (!ok) continue;
            Point p{z};
            p.coords.push_back(w);
            if (on_surface(m, p, tols.membership) && m.in_u1(p)) return p;
            continue;
        }
        // Generic ray solve: w = s e^{i theta}, s real.
        double theta = (sign > 0 ? 0.0 : pi) + rng.uniform(-0.25 * pi, 0.25 * pi);
        cplx dir = std::polar(1.0, theta);
        double s = mag;
        VarTable vt = m.vars();
        bool found = false;
        for (int it = 0; it < 80; ++it) {
            Assignment a;
            a.z = z;
            a.cz = cz;
            a.w = s * dir;
            a.cw = s * std::conj(dir);
            Jet j;
            try {
                j = m.rho().eval_jet(a, vt, 1);
            } catch (const eval_error&) {
                break;
            }
            if (std::abs(j.value) < tols.membership) {
                found = true;
                break;
            }
            cplx g = dir * j.d[vt.slot(VarKind::W, 0)] + std::conj(dir) * j.d[vt.slot(VarKind::CW, 0)];
            if (std::abs(g) < 1e-14) break;
            double step = (std::conj(g) * j.value).real() / std::norm(g);
            s -= step;
            if (!std::isfinite(s) || std::abs(s) > m.u1()) break;
        }
        if (!found) continue;
        Point p{z};
        p.coords.push_back(s * dir);
        bool side_ok = opt.component == 0 || (opt.component > 0) == (p.w().real() > 0);
        if (side_ok && m.in_u1(p) && std::abs(p.w()) > tols.degeneracy * m.u1() &&
            on_surface(m, p, tols.membership))
            return p;
    }
    throw solve_error("could not sample a point on " + m.name());
}

// ---------------------------------------------------------------------------
// Levi signature

struct LeviSignature {
    int k = 0, l = 0;
    std::vector<double> eigenvalues;
};

enum class LeviOrientation { Canonical, Plain };

/// Eigenvalue signature of the Levi form at P: the Hermitian-symmetrized
/// complex Hessian of Re(c rho) restricted to the kernel of its (1,0)
/// differential. The canonical orientation picks c so that c d(rho)/dw has
/// positive imaginary part after gradient normalization; Plain keeps c = 1
/// (exposes the (k,l) <-> (l,k) flip under rho -> -rho).
inline LeviSignature levi_signature(const Hypersurface& m, const Point& p,
                                    const Tolerances& tols = {},
                                    LeviOrientation orient = LeviOrientation::Canonical) {
    const int n = m.n();
    if (!on_surface(m, p, std::max(tols.membership, 1e-9)))
        throw check_error("Levi signature requested off the surface");
    if (m.contains_x() && std::abs(p.w()) < tols.degeneracy * m.u1())
        throw check_error("Levi form degenerates on X");

    VarTable vt = m.vars();
    Jet j = m.rho().eval_jet(m.natural(p), vt, 2);
    auto zslot = [&](int i) {  // Z = (z_1..z_{n-1}, w)
        return i < n - 1 ? vt.slot(VarKind::Z, i + 1) : vt.slot(VarKind::W, 0);
    };
    auto cslot = [&](int i) {
        return i < n - 1 ? vt.slot(VarKind::CZ, i + 1) : vt.slot(VarKind::CW, 0);
    };

    la::Vec g(n), gc(n);
    for (int i = 0; i < n; ++i) {
        g[i] = j.d[zslot(i)];
        gc[i] = j.d[cslot(i)];
    }
    double gnorm = std::sqrt(std::abs(la::dotc(g, g)) + std::abs(la::dotc(gc, gc)));
    if (gnorm < 1e-12) throw check_error("defining gradient vanishes at P");
    cplx c;
    if (orient == LeviOrientation::Canonical) {
        cplx gw = g[n - 1];
        if (std::abs(gw) < 1e-12 * gnorm)
            throw check_error("cannot orient: d(rho)/dw vanishes at P");
        c = cplx(0, 1) * std::conj(gw) / (std::abs(gw) * gnorm);
    } else {
        c = 1.0 / gnorm;
    }

    // Hermitian Hessian of Re(c rho) and its (1,0) differential.
    la::Mat hess(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            hess(a, b) = 0.5 * (c * j.d2(zslot(a), cslot(b)) +
                                std::conj(c) * std::conj(j.d2(zslot(b), cslot(a))));
    la::Mat dr(1, n);
    for (int i = 0; i < n; ++i) dr(0, i) = 0.5 * (c * g[i] + std::conj(c) * std::conj(gc[i]));

    la::Svd ker = la::svd(dr);
    la::Mat basis(n, n - 1);  // right singular vectors annihilating dr
    for (int col = 0; col < n - 1; ++col)
        for (int i = 0; i < n; ++i) basis(i, col) = ker.v(i, col + 1);

    la::Mat levi(n - 1, n - 1);
    for (int a = 0; a < n - 1; ++a)
        for (int b = 0; b < n - 1; ++b) {
            cplx s = 0;
            for (int i = 0; i < n; ++i)
                for (int kk = 0; kk < n; ++kk)
                    s += hess(i, kk) * basis(i, a) * std::conj(basis(kk, b));
            levi(a, b) = s;
        }
    la::HermEig e = la::herm_eig((levi + levi.adjoint()).scaled(0.5));
    double emax = 0;
    for (double v : e.values) emax = std::max(emax, std::abs(v));
    LeviSignature out;
    out.eigenvalues = e.values;
    if (emax == 0.0) throw check_error("Levi form vanishes at P");
    for (double v : e.values) {
        if (std::abs(v) < tols.levi_eigen * emax)
            throw check_error("degenerate Levi form at P (eigenvalue below tolerance)");
        (v > 0 ? out.k : out.l)++;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Segre map rank

/// Numerical rank at P of the map sending a point to the degree-d Taylor
/// coefficients (expanded at P's z-coordinate) of its Segre graph. Rank n
/// certifies local injectivity of the Segre map.
inline int segre_map_rank(const Hypersurface& m, const Point& p, int jet_degree = 2,
                          const Tolerances& tols = {}) {
    const int n = m.n();
    const int nz = n - 1;
    if (jet_degree != 2) throw check_error("segre_map_rank supports jet degree 2");
    if (m.contains_x() && std::abs(p.w()) < std::max(tols.degeneracy * m.u1(), 1e-12))
        throw check_error("Segre map collapses near X");
    if (!m.in_u1(p, 1.0 + 1e-9)) throw check_error("point outside U1");

    VarTable vt = m.vars();
    // Antiholomorphic arguments xi = (cz, cw); the coefficients are
    // holomorphic in xi, differentiated by central differences.
    auto coeffs = [&](const std::vector<cplx>& cz, cplx cw, cplx seed) {
        cplx w0 = m.solve_w(p.zpart(), cz, cw, seed, 1e-13, 80);
        Assignment a;
        a.z = p.zpart();
        a.cz = cz;
        a.w = w0;
        a.cw = cw;
        Jet j = m.rho().eval_jet(a, vt, 2);
        int sw = vt.slot(VarKind::W, 0);
        cplx rw = j.d[sw];
        std::vector<cplx> h1(nz);
        for (int i = 0; i < nz; ++i) h1[i] = -j.d[vt.slot(VarKind::Z, i + 1)] / rw;
        std::vector<cplx> out;
        out.push_back(w0);
        for (int i = 0; i < nz; ++i) out.push_back(h1[i]);
        for (int i = 0; i < nz; ++i)
            for (int k = i; k < nz; ++k) {
                int si = vt.slot(VarKind::Z, i + 1), sk = vt.slot(VarKind::Z, k + 1);
                cplx second = j.d2(si, sk) + j.d2(si, sw) * h1[k] + j.d2(sw, sk) * h1[i] +
                              j.d2(sw, sw) * h1[i] * h1[k];
                out.push_back(-second / rw);
            }
        return out;
    };

    std::vector<cplx> cz0(nz);
    for (int i = 0; i < nz; ++i) cz0[i] = std::conj(p.coords[i]);
    cplx cw0 = std::conj(p.w());
    cplx w_center = m.solve_w(p.zpart(), cz0, cw0, cw0, 1e-13, 80);

    const double h = 3e-5;
    const int rows = 1 + nz + nz * (nz + 1) / 2;
    la::Mat jac(rows, n);
    for (int dir = 0; dir < n; ++dir) {
        auto shift = [&](double eps) {
            std::vector<cplx> cz = cz0;
            cplx cw = cw0;
            if (dir < nz) cz[dir] += eps;
            else cw += eps;
            return coeffs(cz, cw, w_center);
        };
        std::vector<cplx> plus = shift(h), minus = shift(-h);
        for (int r = 0; r < rows; ++r) jac(r, dir) = (plus[r] - minus[r]) / (2 * h);
    }
    return la::rank(la::svd(jac), tols.svd_rank);
}

// ---------------------------------------------------------------------------
// k-root construction

/// Surface with defining equation w = cw exp((i/k) phi(z, cz, cw^k)); the
/// power substitution pulls a finite-order monodromy back to a trivial one.
inline Hypersurface k_root(const Hypersurface& m, int k, const Tolerances& tols = {}) {
    if (!m.phi()) throw check_error("k_root requires the exponential form");
    if (k < 1) throw check_error("k must be >= 1");
    if (k == 1) return m;

    AnalyticExpr cw_pow(ExprNode::binary(NodeOp::Pow, ExprNode::variable(VarKind::CW, 0),
                                         ExprNode::constant(cplx(double(k), 0))));
    AnalyticExpr phi_sub = m.phi()->substitute(VarKind::CW, 0, cw_pow);
    NodePtr scaled = ExprNode::binary(NodeOp::Mul,
                                      ExprNode::constant(cplx(1.0 / k, 0.0)), phi_sub.root());
    NodePtr rho = ExprNode::binary(
        NodeOp::Sub, ExprNode::variable(VarKind::W, 0),
        ExprNode::binary(NodeOp::Mul, ExprNode::variable(VarKind::CW, 0),
                         ExprNode::call(Func::Exp,
                                        ExprNode::binary(NodeOp::Mul,
                                                         ExprNode::constant(cplx(0, 1)),
                                                         scaled))));
    Hypersurface root(m.name() + "_root" + std::to_string(k), m.n(), AnalyticExpr(rho),
                      AnalyticExpr(scaled), m.u1(), m.u2());

    // Validate: (z, w) on the root maps onto M under nu(z, w) = (z, w^k).
    Rng rng(0xba5eba11u);
    for (int t = 0; t < 100; ++t) {
        Point p = sample_on_surface(root, rng, {}, tols);
        Point img{p.zpart()};
        cplx wk = 1.0;
        for (int i = 0; i < k; ++i) wk *= p.w();
        img.coords.push_back(wk);
        if (std::abs(m.rho().eval(m.natural(img))) > 1e-10)
            throw check_error("k-root validation failed: nu image misses the surface");
    }
    return root;
}

// ---------------------------------------------------------------------------
// Reality checks

/// Max residual of rho(z, 0, cz, 0) over complexified samples (X in M).
inline double x_subset_residual(const Hypersurface& m, Rng& rng, int samples = 100) {
    double worst = 0;
    for (int t = 0; t < samples; ++t) {
        Assignment a;
        a.z = rng.in_polydisc(m.n() - 1, m.u1());
        a.cz = rng.in_polydisc(m.n() - 1, m.u1());
        a.w = 0;
        a.cw = 0;
        worst = std::max(worst, std::abs(m.rho().eval(a)));
    }
    return worst;
}

/// Reality of M, complexified. With an exponential form, the identity
/// phi(z, cz, w e^{-i phibar(cz, z, w)}) = phibar(cz, z, w) is sampled on
/// complexified arguments; otherwise the Segre reflection is used: partners
/// S on Q_P of on-surface points P satisfy rho(P, conj S) = 0.
inline double reality_residual(const Hypersurface& m, Rng& rng, int samples = 100,
                               const Tolerances& tols = {}) {
    double worst = 0;
    if (m.phi()) {
        AnalyticExpr phibar = m.phi()->bar();
        for (int t = 0; t < samples; ++t) {
            Assignment a;
            a.z = rng.in_polydisc(m.n() - 1, 0.5 * m.u1());
            a.cz = rng.in_polydisc(m.n() - 1, 0.5 * m.u1());
            a.w = rng.in_disc(0.5 * m.u1());
            if (std::abs(a.w) < 0.05 * m.u1()) continue;
            cplx bar = phibar.eval(a);
            Assignment lhs_args = a;
            lhs_args.cw = a.w * std::exp(cplx(0, -1) * bar);
            worst = std::max(worst, std::abs(m.phi()->eval(lhs_args) - bar));
        }
        return worst;
    }
    for (int t = 0; t < samples; ++t) {
        Point p = sample_on_surface(m, rng, {}, tols);
        SegreVariety q(m, p, tols);
        std::vector<cplx> zs = rng.in_polydisc(m.n() - 1, 0.5 * m.u1());
        Point s = q.point_at(zs);
        worst = std::max(worst, std::abs(m.rho_pair(p, s)));
    }
    return worst;
}

}  // namespace segre
