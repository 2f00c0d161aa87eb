#pragma once

// Hermitian quadrics in CP^n, their hyperplane Segre varieties, the inverse
// Segre correspondence, and the projective linear algebra used by the
// continuation and monodromy layers: hyperplane/map/quadric fits, the scaled
// matrix logarithm A = (1/2 pi i) log(sigma), and the scaled Jordan form.

#include <cassert>

#include "segre/common.hpp"
#include "segre/linalg.hpp"

namespace segre {

using la::Mat;
using la::Vec;

// ---------------------------------------------------------------------------
// Projective points and hyperplanes

struct ProjectivePoint {
    Vec h;  // n+1 homogeneous coordinates, not all zero

    int dim() const { return int(h.size()) - 1; }

    /// Unit norm, first significant entry rotated positive real.
    ProjectivePoint canonical() const {
        Vec v = h;
        double n2 = la::norm2(v);
        if (n2 == 0.0) throw check_error("zero homogeneous vector");
        double mx = 0;
        for (auto& c : v) mx = std::max(mx, std::abs(c));
        cplx phase = 1.0;
        for (auto& c : v)
            if (std::abs(c) > 1e-12 * mx) {
                phase = std::conj(c) / std::abs(c);
                break;
            }
        for (auto& c : v) c = c * phase / n2;
        return ProjectivePoint{std::move(v)};
    }
};

/// Chordal distance between lines (2 sin(angle/2) after optimal phase
/// alignment); zero iff projectively equal and accurate near zero.
inline double proj_dist(const Vec& a, const Vec& b) {
    double na = la::norm2(a), nb = la::norm2(b);
    if (na == 0.0 || nb == 0.0) throw check_error("zero homogeneous vector");
    cplx corr = la::dotc(b, a);
    if (std::abs(corr) == 0.0) return std::sqrt(2.0);
    cplx phase = corr / std::abs(corr);
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::norm(a[i] / na - phase * b[i] / nb);
    return std::sqrt(s);
}

inline double proj_dist(const ProjectivePoint& a, const ProjectivePoint& b) {
    return proj_dist(a.h, b.h);
}

struct Hyperplane {
    Vec cov;  // covector, up to scalar; the plane is { x : sum cov_k x_k = 0 }

    cplx pair(const Vec& x) const {
        cplx s = 0;
        for (std::size_t k = 0; k < cov.size(); ++k) s += cov[k] * x[k];
        return s;
    }
};

// ---------------------------------------------------------------------------
// Hermitian quadrics

/// Nondegenerate Hermitian form on C^{n+1}; the quadric is { x : x* H x = 0 }.
class HermitianQuadric {
  public:
    explicit HermitianQuadric(Mat h, double herm_tol = 1e-12) : h_(std::move(h)) {
        if (h_.rows != h_.cols) throw check_error("quadric matrix must be square");
        if ((h_ - h_.adjoint()).max_abs() > herm_tol * std::max(1.0, h_.max_abs()))
            throw check_error("quadric matrix is not Hermitian");
        // Exact Hermitian symmetrization keeps x*Hx real to the last bit.
        h_ = (h_ + h_.adjoint()).scaled(0.5);
        la::HermEig e = la::herm_eig(h_);
        double emax = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
        for (double v : e.values) {
            if (std::abs(v) < 1e-10 * emax) throw check_error("degenerate quadric");
            (v > 0 ? pos_ : neg_)++;
        }
    }

    const Mat& matrix() const { return h_; }
    int dim() const { return h_.rows - 1; }  // n of CP^n
    int positive() const { return pos_; }
    int negative() const { return neg_; }

    double value(const Vec& x) const {
        cplx s = 0;
        for (int i = 0; i < h_.rows; ++i)
            for (int j = 0; j < h_.cols; ++j) s += std::conj(x[i]) * h_(i, j) * x[j];
        return s.real();
    }

    /// Im w = sum of +|z_j|^2 (k terms) and -|z_j|^2 (l terms), homogenized
    /// with coordinates [x0 : z1 .. z_{n-1} : w].
    static HermitianQuadric standard(int k, int l, int n) {
        if (k + l != n - 1) throw check_error("signature must satisfy k+l = n-1");
        Mat h(n + 1, n + 1);
        for (int j = 1; j <= n - 1; ++j) h(j, j) = j <= k ? 1.0 : -1.0;
        h(0, n) = cplx(0, 0.5);
        h(n, 0) = cplx(0, -0.5);
        return HermitianQuadric(std::move(h));
    }

    /// Quadric of the transformed points y = T x.
    HermitianQuadric transformed(const Mat& t) const {
        Mat ti = la::inverse(t);
        return HermitianQuadric(ti.adjoint() * h_ * ti, 1e-9);
    }

  private:
    Mat h_;
    int pos_ = 0, neg_ = 0;
};

/// Hyperplane Segre variety of zeta: { x : H(x, conj zeta) = 0 }.
inline Hyperplane segre_hyperplane(const HermitianQuadric& q, const ProjectivePoint& zeta) {
    Vec hz = q.matrix() * zeta.h;
    for (auto& c : hz) c = std::conj(c);  // covector . x == zeta* H x
    return Hyperplane{std::move(hz)};
}

/// Inverse of the Segre correspondence: the point whose hyperplane is h.
inline ProjectivePoint inverse_segre(const HermitianQuadric& q, const Hyperplane& h) {
    Vec rhs(h.cov.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::conj(h.cov[i]);
    return ProjectivePoint{la::lu_solve(la::lu_factor(q.matrix()), std::move(rhs))};
}

// ---------------------------------------------------------------------------
// Homogeneous least-squares fits

struct HyperplaneFit {
    Hyperplane plane;
    double residual = 0;   // sigma_min / sigma_max of the stacked coordinates
    bool degenerate = false;  // points span too small a subspace
};

inline HyperplaneFit fit_hyperplane(const std::vector<ProjectivePoint>& points) {
    if (points.empty()) throw check_error("fit_hyperplane: no points");
    const int d = int(points[0].h.size());
    if (int(points.size()) < d) throw check_error("fit_hyperplane: need at least n+1 points");
    Mat rows(int(points.size()), d);
    for (int i = 0; i < rows.rows; ++i) {
        Vec v = points[i].canonical().h;
        for (int j = 0; j < d; ++j) rows(i, j) = v[j];
    }
    la::Svd s = la::svd(rows);
    HyperplaneFit out;
    out.residual = s.s.back() / s.s.front();
    out.degenerate = s.s[d - 2] < 1e-10 * s.s.front();
    out.plane.cov = la::smallest_right_singular(s);
    return out;
}

struct ProjectiveMap {
    Mat t;

    /// Representative with det = 1, root chosen with argument in
    /// [0, 2 pi/(n+1)); the residual root-of-unity ambiguity is quotiented
    /// inside scaled_jordan.
    Mat canonical_scaled() const {
        cplx d = la::det(t);
        if (std::abs(d) == 0.0) throw check_error("singular projective map");
        const int m = t.rows;
        double r = std::pow(std::abs(d), 1.0 / m);
        cplx root = std::polar(r, arg_two_pi(d) / m);
        return t.scaled(1.0 / root);
    }
};

/// Phase-aligned relative Frobenius distance between matrices up to scalar.
inline double proj_mat_dist(const Mat& a, const Mat& b) {
    double fa = a.frob(), fb = b.frob();
    if (fa == 0.0 || fb == 0.0) throw check_error("zero matrix");
    cplx corr = 0;
    for (std::size_t i = 0; i < a.a.size(); ++i) corr += std::conj(b.a[i]) * a.a[i];
    cplx phase = std::abs(corr) > 0 ? corr / std::abs(corr) : cplx(1.0);
    double s = 0;
    for (std::size_t i = 0; i < a.a.size(); ++i)
        s += std::norm(a.a[i] / fa - phase * b.a[i] / fb);
    return std::sqrt(s);
}

struct MapFit {
    ProjectiveMap map;
    double residual = 0;      // smallest singular value of the condition stack
    bool degenerate = false;  // null space dimension > 1
};

/// Fit T with y_i proportional to T x_i from the linear conditions
/// (T x)_a y_b - (T x)_b y_a = 0.
inline MapFit fit_projective_map(
    const std::vector<std::pair<ProjectivePoint, ProjectivePoint>>& pairs) {
    if (pairs.empty()) throw check_error("fit_projective_map: no pairs");
    const int d = int(pairs[0].first.h.size());
    if (int(pairs.size()) < d + 2)
        throw check_error("fit_projective_map: need at least n+3 pairs");
    const int nt = d * d;
    const int per = d * (d - 1) / 2;
    Mat m(int(pairs.size()) * per, nt);
    int row = 0;
    for (auto& [xp, yp] : pairs) {
        Vec x = xp.canonical().h, y = yp.canonical().h;
        for (int a = 0; a < d; ++a)
            for (int b = a + 1; b < d; ++b, ++row)
                for (int k = 0; k < d; ++k) {
                    m(row, a * d + k) += y[b] * x[k];
                    m(row, b * d + k) -= y[a] * x[k];
                }
    }
    la::Svd s = la::svd(m);
    MapFit out;
    out.residual = s.s.back();
    out.degenerate = s.s[nt - 2] < std::max(1e-10, 1e-8 * s.s.front());
    Vec v = la::smallest_right_singular(s);
    out.map.t = Mat(d, d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) out.map.t(i, j) = v[i * d + j];
    return out;
}

struct QuadricFit {
    Mat h;              // unit Frobenius, orientented so positive count >= negative
    double residual = 0;
    int k = 0, l = 0;   // signature (k+1, l+1) reported as (k, l)
};

/// Fit the Hermitian form minimizing sum |x_i* H x_i|^2 over unit-Frobenius
/// Hermitian H. Real parametrization: diagonal entries and sqrt(2)-weighted
/// real/imag parts of the upper triangle.
inline QuadricFit fit_quadric(const std::vector<ProjectivePoint>& points) {
    if (points.empty()) throw check_error("fit_quadric: no points");
    const int d = int(points[0].h.size());
    const int np = d * d;
    if (int(points.size()) < np) throw check_error("fit_quadric: need at least (n+1)^2 points");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    Mat m(int(points.size()), np);
    for (int i = 0; i < m.rows; ++i) {
        Vec x = points[i].canonical().h;
        int col = 0;
        for (int j = 0; j < d; ++j) m(i, col++) = std::norm(x[j]);
        for (int j = 0; j < d; ++j)
            for (int k = j + 1; k < d; ++k) {
                cplx cross = std::conj(x[j]) * x[k];  // pairs with H_jk
                m(i, col++) = 2.0 * cross.real() * inv_sqrt2;
                m(i, col++) = -2.0 * cross.imag() * inv_sqrt2;
            }
    }
    la::Svd s = la::svd(m);
    Vec v = la::smallest_right_singular(s);
    // The stacked matrix is real, so the null vector is real up to phase.
    cplx phase = 1.0;
    double mx = 0;
    for (auto& c : v)
        if (std::abs(c) > mx) mx = std::abs(c), phase = std::abs(c) / c;
    QuadricFit out;
    out.residual = s.s.back() / s.s.front();
    out.h = Mat(d, d);
    int col = 0;
    for (int j = 0; j < d; ++j) out.h(j, j) = (v[col++] * phase).real();
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            double re = (v[col++] * phase).real() * inv_sqrt2;
            double im = (v[col++] * phase).real() * inv_sqrt2;
            out.h(j, k) = cplx(re, im);
            out.h(k, j) = cplx(re, -im);
        }
    la::HermEig e = la::herm_eig(out.h);
    double emax = std::max(std::abs(e.values.front()), std::abs(e.values.back()));
    int pos = 0, neg = 0;
    for (double ev : e.values) {
        if (std::abs(ev) < 1e-8 * emax) continue;
        (ev > 0 ? pos : neg)++;
    }
    if (neg > pos || (neg == pos && e.values.front() + e.values.back() < 0)) {
        out.h = out.h.scaled(-1.0);
        std::swap(pos, neg);
    }
    double f = out.h.frob();
    out.h = out.h.scaled(1.0 / f);
    out.k = pos - 1;
    out.l = neg - 1;
    return out;
}

// ---------------------------------------------------------------------------
// Scaled matrix logarithm and Jordan invariant

struct MatrixLog {
    Mat a;                     // (1/2 pi i) log of the canonical representative
    bool branch_warning = false;
    std::vector<cplx> cluster_means;
    double exp_defect = 0;     // |exp(2 pi i A) - T_c| (max entry)
};

/// A = (1/2 pi i) log(T_c), log computed blockwise over eigenvalue clusters
/// with principal arguments; optional integer branch shift per cluster.
inline MatrixLog matrix_log(const ProjectiveMap& t, double cluster_tol = 1e-7,
                            const std::vector<int>* shifts = nullptr) {
    Mat tc = t.canonical_scaled();
    la::LogResult lr = la::mat_log(tc, cluster_tol, shifts);
    MatrixLog out;
    out.a = lr.log.scaled(cplx(0.0, -1.0 / two_pi));  // 1/(2 pi i)
    out.branch_warning = lr.branch_warning;
    out.cluster_means = lr.cluster_means;
    Mat back = la::mat_exp(out.a.scaled(cplx(0.0, two_pi)));
    out.exp_defect = (back - tc).max_abs();
    return out;
}

/// Functional power w^A = exp(A * lw) for a tracked logarithm lw.
inline Mat w_power(const Mat& a, cplx lw) { return la::mat_exp(a.scaled(lw)); }

namespace detail {

/// Lexicographic order on (|lambda|, arg in [0,2pi)) with fuzz; arguments
/// within fuzz of the 0/2pi boundary are treated as 0.
inline int fuzzy_compare(cplx a, cplx b, double fuzz) {
    double ra = std::abs(a), rb = std::abs(b);
    if (ra < rb - fuzz) return -1;
    if (ra > rb + fuzz) return 1;
    auto wrap = [&](cplx z) {
        double t = arg_two_pi(z);
        return t > two_pi - 1e-8 ? 0.0 : t;
    };
    double ta = wrap(a), tb = wrap(b);
    if (ta < tb - 1e-8) return -1;
    if (ta > tb + 1e-8) return 1;
    return 0;
}

inline int fuzzy_compare(const Vec& a, const Vec& b, double fuzz) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (int c = fuzzy_compare(a[i], b[i], fuzz)) return c;
    return 0;
}

}  // namespace detail

/// Canonical eigenvalue tuple of a projective map: scale to det 1, then pick
/// the root-of-unity multiple with the lexicographically smallest sorted
/// spectrum. Used both by scaled_jordan and by expected-value comparisons.
inline Vec canonical_eigentuple(Vec eigs, double fuzz = 1e-8) {
    const int m = int(eigs.size());
    cplx prod = 1.0;
    for (auto& e : eigs) prod *= e;
    cplx root = std::polar(std::pow(std::abs(prod), 1.0 / m), arg_two_pi(prod) / m);
    for (auto& e : eigs) e /= root;
    auto sorted = [&](const Vec& v) {
        Vec s = v;
        std::stable_sort(s.begin(), s.end(), [&](cplx a, cplx b) {
            return detail::fuzzy_compare(a, b, fuzz) < 0;
        });
        return s;
    };
    Vec best;
    for (int j = 0; j < m; ++j) {
        cplx omega = std::polar(1.0, two_pi * j / m);
        Vec cand(m);
        for (int i = 0; i < m; ++i) cand[i] = eigs[i] * omega;
        cand = sorted(cand);
        if (best.empty() || detail::fuzzy_compare(cand, best, fuzz) < 0) best = cand;
    }
    return best;
}

struct ScaledJordan {
    Mat j;                              // block diagonal, 2 pi i on superdiagonals
    std::vector<la::JordanBlock> blocks;  // sorted as assembled in j
    bool ambiguous = false;
    cplx scale = 1.0;                   // T / scale has the canonical spectrum
};

/// Jordan normal form of the canonically scaled representative, quotiented
/// over the residual (n+1)-th root-of-unity ambiguity. Nilpotent parts use
/// the 2 pi i normalization.
inline ScaledJordan scaled_jordan(const ProjectiveMap& t, double cluster_tol = 1e-7,
                                  double cluster_floor = 1e-9, double rank_tol = 1e-8) {
    Mat tc = t.canonical_scaled();
    const int m = tc.rows;
    la::Schur sc = la::schur(tc);
    Vec eigs(m);
    for (int i = 0; i < m; ++i) eigs[i] = sc.t(i, i);

    // Pick the root-of-unity multiple with the canonical spectrum.
    int best_j = 0;
    Vec best;
    for (int j = 0; j < m; ++j) {
        cplx omega = std::polar(1.0, two_pi * j / m);
        Vec cand(m);
        for (int i = 0; i < m; ++i) cand[i] = eigs[i] * omega;
        std::stable_sort(cand.begin(), cand.end(), [&](cplx a, cplx b) {
            return detail::fuzzy_compare(a, b, 1e-8) < 0;
        });
        if (best.empty() || detail::fuzzy_compare(cand, best, 1e-8) < 0) {
            best = cand;
            best_j = j;
        }
    }
    cplx omega = std::polar(1.0, two_pi * best_j / m);
    Mat chosen = tc.scaled(omega);

    ScaledJordan out;
    cplx d = la::det(t.t);
    out.scale = std::polar(std::pow(std::abs(d), 1.0 / m), arg_two_pi(d) / m) / omega;
    out.blocks = la::jordan_structure(chosen, cluster_tol, cluster_floor, rank_tol,
                                      &out.ambiguous);
    std::stable_sort(out.blocks.begin(), out.blocks.end(),
                     [&](const la::JordanBlock& a, const la::JordanBlock& b) {
                         int c = detail::fuzzy_compare(a.eigenvalue, b.eigenvalue, 1e-8);
                         if (c) return c < 0;
                         return a.size > b.size;
                     });
    out.j = Mat(m, m);
    int at = 0;
    for (const auto& b : out.blocks) {
        for (int i = 0; i < b.size; ++i) {
            out.j(at + i, at + i) = b.eigenvalue;
            if (i + 1 < b.size) out.j(at + i, at + i + 1) = cplx(0, two_pi);
        }
        at += b.size;
    }
    return out;
}

/// Off-diagonal maximum below tol * norm and diagonal relative spread below
/// tol: the matrix acts as the identity on CP^n.
inline bool is_scalar_matrix(const Mat& m, double tol = 1e-8) {
    double nrm = m.frob();
    if (nrm == 0.0) return false;
    double off = 0;
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j)
            if (i != j) off = std::max(off, std::abs(m(i, j)));
    if (off > tol * nrm) return false;
    cplx first = m(0, 0);
    if (std::abs(first) == 0.0) return false;
    double spread = 0;
    for (int i = 0; i < m.rows; ++i) spread = std::max(spread, std::abs(m(i, i) - first));
    return spread <= tol * std::abs(first) * m.rows;
}

}  // namespace segre
