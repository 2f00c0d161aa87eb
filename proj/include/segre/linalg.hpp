#pragma once

// Dense complex linear algebra, implemented in-library with deterministic
// orderings so identical inputs give identical bits across runs:
//   - LU with partial pivoting (solve, inverse, determinant)
//   - cyclic Jacobi for Hermitian eigenproblems
//   - one-sided Jacobi SVD
//   - complex Schur form (Householder Hessenberg + shifted QR)
//   - matrix exponential (scaling and squaring)
//   - matrix logarithm (Schur, cluster reordering, atomic series, Parlett
//     recurrence between blocks; per-cluster branch shifts supported)
//   - Jordan block structure from rank sequences
// Everything here targets the small matrices of this library (n <= ~30 for
// fits, n+1 <= 4 for monodromy operators).

#include <algorithm>
#include <numeric>
#include <optional>

#include "segre/common.hpp"

namespace segre::la {

using Vec = std::vector<cplx>;

inline cplx dotc(const Vec& a, const Vec& b) {  // conj(a) . b
    cplx s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}

inline double norm2(const Vec& a) { return std::sqrt(std::abs(dotc(a, a))); }

struct Mat {
    int rows = 0, cols = 0;
    std::vector<cplx> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, cplx{}) {}

    cplx& operator()(int i, int j) { return a[std::size_t(i) * cols + j]; }
    const cplx& operator()(int i, int j) const { return a[std::size_t(i) * cols + j]; }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    Mat operator*(const Mat& o) const {
        Mat r(rows, o.cols);
        for (int i = 0; i < rows; ++i)
            for (int k = 0; k < cols; ++k) {
                cplx v = (*this)(i, k);
                if (v == cplx{}) continue;
                for (int j = 0; j < o.cols; ++j) r(i, j) += v * o(k, j);
            }
        return r;
    }

    Vec operator*(const Vec& x) const {
        Vec r(rows, cplx{});
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) r[i] += (*this)(i, j) * x[j];
        return r;
    }

    Mat operator+(const Mat& o) const {
        Mat r = *this;
        for (std::size_t i = 0; i < a.size(); ++i) r.a[i] += o.a[i];
        return r;
    }
    Mat operator-(const Mat& o) const {
        Mat r = *this;
        for (std::size_t i = 0; i < a.size(); ++i) r.a[i] -= o.a[i];
        return r;
    }
    Mat scaled(cplx s) const {
        Mat r = *this;
        for (auto& v : r.a) v *= s;
        return r;
    }

    Mat adjoint() const {
        Mat r(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    double frob() const {
        double s = 0;
        for (auto& v : a) s += std::norm(v);
        return std::sqrt(s);
    }

    double max_abs() const {
        double m = 0;
        for (auto& v : a) m = std::max(m, std::abs(v));
        return m;
    }

    Vec col(int j) const {
        Vec v(rows);
        for (int i = 0; i < rows; ++i) v[i] = (*this)(i, j);
        return v;
    }
    Vec row(int i) const {
        Vec v(cols);
        for (int j = 0; j < cols; ++j) v[j] = (*this)(i, j);
        return v;
    }
};

// ---------------------------------------------------------------------------
// LU

struct Lu {
    Mat lu;
    std::vector<int> piv;
    int sign = 1;
    bool singular = false;
};

inline Lu lu_factor(Mat m) {
    const int n = m.rows;
    Lu f{std::move(m), std::vector<int>(n), 1, false};
    for (int k = 0; k < n; ++k) {
        int p = k;
        double best = std::abs(f.lu(k, k));
        for (int i = k + 1; i < n; ++i)
            if (std::abs(f.lu(i, k)) > best) best = std::abs(f.lu(i, k)), p = i;
        f.piv[k] = p;
        if (p != k) {
            for (int j = 0; j < n; ++j) std::swap(f.lu(k, j), f.lu(p, j));
            f.sign = -f.sign;
        }
        if (std::abs(f.lu(k, k)) == 0.0) {
            f.singular = true;
            continue;
        }
        for (int i = k + 1; i < n; ++i) {
            cplx m_ik = f.lu(i, k) / f.lu(k, k);
            f.lu(i, k) = m_ik;
            for (int j = k + 1; j < n; ++j) f.lu(i, j) -= m_ik * f.lu(k, j);
        }
    }
    return f;
}

inline Vec lu_solve(const Lu& f, Vec b) {
    const int n = f.lu.rows;
    if (f.singular) throw solve_error("singular linear system");
    // Full-row pivoting was used in the factorization, so permute first.
    for (int k = 0; k < n; ++k)
        if (f.piv[k] != k) std::swap(b[k], b[f.piv[k]]);
    for (int k = 0; k < n; ++k)
        for (int i = k + 1; i < n; ++i) b[i] -= f.lu(i, k) * b[k];
    for (int i = n - 1; i >= 0; --i) {
        for (int j = i + 1; j < n; ++j) b[i] -= f.lu(i, j) * b[j];
        b[i] /= f.lu(i, i);
    }
    return b;
}

inline cplx det(const Mat& m) {
    Lu f = lu_factor(m);
    cplx d = double(f.sign);
    for (int i = 0; i < m.rows; ++i) d *= f.lu(i, i);
    return d;
}

inline Mat inverse(const Mat& m) {
    const int n = m.rows;
    Lu f = lu_factor(m);
    Mat inv(n, n);
    for (int j = 0; j < n; ++j) {
        Vec e(n, cplx{});
        e[j] = 1;
        Vec x = lu_solve(f, std::move(e));
        for (int i = 0; i < n; ++i) inv(i, j) = x[i];
    }
    return inv;
}

// ---------------------------------------------------------------------------
// Hermitian eigenproblem (cyclic Jacobi)

struct HermEig {
    std::vector<double> values;  // descending
    Mat vectors;                 // columns
};

inline HermEig herm_eig(Mat h) {
    const int n = h.rows;
    Mat v = Mat::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += std::norm(h(p, q));
        if (std::sqrt(off) <= 1e-15 * (h.frob() + 1e-300)) break;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                cplx hpq = h(p, q);
                if (std::abs(hpq) <= 1e-18 * (std::abs(h(p, p)) + std::abs(h(q, q)) + 1e-300))
                    continue;
                // Phase out the off-diagonal entry, then rotate as in the
                // real symmetric case.
                cplx phase = hpq / std::abs(hpq);
                double app = h(p, p).real(), aqq = h(q, q).real(), apq = std::abs(hpq);
                double tau = (aqq - app) / (2 * apq);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1.0 / std::sqrt(1 + t * t);
                cplx s = t * c * phase;
                for (int k = 0; k < n; ++k) {  // columns update: two-sided
                    cplx hkp = h(k, p), hkq = h(k, q);
                    h(k, p) = c * hkp - std::conj(s) * hkq;
                    h(k, q) = s * hkp + c * hkq;
                }
                for (int k = 0; k < n; ++k) {
                    cplx hpk = h(p, k), hqk = h(q, k);
                    h(p, k) = c * hpk - s * hqk;
                    h(q, k) = std::conj(s) * hpk + c * hqk;
                }
                for (int k = 0; k < n; ++k) {
                    cplx vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - std::conj(s) * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    HermEig out;
    out.values.resize(n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = h(i, i).real();
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return d[a] > d[b]; });
    out.vectors = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        out.values[j] = d[idx[j]];
        for (int i = 0; i < n; ++i) out.vectors(i, j) = v(i, idx[j]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVD (one-sided Jacobi); A = U diag(s) V^H, s descending

struct Svd {
    Mat u;                  // rows x min-dim columns (orthonormal where s > 0)
    std::vector<double> s;  // descending
    Mat v;                  // cols x min-dim columns
};

namespace detail {

inline Svd svd_tall(Mat a) {
    const int m = a.rows, n = a.cols;
    Mat v = Mat::identity(n);
    for (int sweep = 0; sweep < 60; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                cplx g = 0;
                double alpha = 0, beta = 0;
                for (int i = 0; i < m; ++i) {
                    g += std::conj(a(i, p)) * a(i, q);
                    alpha += std::norm(a(i, p));
                    beta += std::norm(a(i, q));
                }
                double ag = std::abs(g);
                if (ag <= 1e-15 * std::sqrt(alpha * beta) + 1e-300) continue;
                rotated = true;
                cplx phase = g / ag;
                // Rotate the phased pair of columns (a_p, a_q * conj(phase)).
                double tau = (beta - alpha) / (2 * ag);
                double t = (tau >= 0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1 + tau * tau));
                double c = 1.0 / std::sqrt(1 + t * t);
                double s = c * t;
                for (int i = 0; i < m; ++i) {
                    cplx ap = a(i, p), aq = a(i, q) * std::conj(phase);
                    a(i, p) = c * ap - s * aq;
                    a(i, q) = (s * ap + c * aq) * phase;
                }
                for (int i = 0; i < n; ++i) {
                    cplx vp = v(i, p), vq = v(i, q) * std::conj(phase);
                    v(i, p) = c * vp - s * vq;
                    v(i, q) = (s * vp + c * vq) * phase;
                }
            }
        if (!rotated) break;
    }
    Svd out;
    out.s.resize(n);
    std::vector<double> nrm(n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int j = 0; j < n; ++j) {
        double s2 = 0;
        for (int i = 0; i < m; ++i) s2 += std::norm(a(i, j));
        nrm[j] = std::sqrt(s2);
    }
    std::stable_sort(idx.begin(), idx.end(), [&](int x, int y) { return nrm[x] > nrm[y]; });
    out.u = Mat(m, n);
    out.v = Mat(n, n);
    for (int j = 0; j < n; ++j) {
        int k = idx[j];
        out.s[j] = nrm[k];
        for (int i = 0; i < m; ++i) out.u(i, j) = nrm[k] > 0 ? a(i, k) / nrm[k] : cplx{};
        for (int i = 0; i < n; ++i) out.v(i, j) = v(i, k);
    }
    return out;
}

}  // namespace detail

inline Svd svd(const Mat& a) {
    if (a.rows >= a.cols) return detail::svd_tall(a);
    Svd t = detail::svd_tall(a.adjoint());
    return Svd{t.v, t.s, t.u};
}

inline int rank(const Svd& s, double rel_tol) {
    if (s.s.empty() || s.s[0] == 0.0) return 0;
    int r = 0;
    for (double v : s.s)
        if (v > rel_tol * s.s[0]) ++r;
    return r;
}

/// Right singular vector for the smallest singular value.
inline Vec smallest_right_singular(const Svd& s) {
    return s.v.col(int(s.s.size()) - 1);
}

// ---------------------------------------------------------------------------
// Complex Schur form: A = Q T Q^H, T upper triangular

struct Schur {
    Mat q, t;
};

namespace detail {

struct Givens {
    double c;
    cplx s;
};

/// G [a; b] = [r; 0] with G = [[c, s], [-conj(s), c]], c real.
inline Givens make_givens(cplx a, cplx b) {
    double ab = std::abs(a), bb = std::abs(b);
    if (bb == 0.0) return {1.0, cplx{}};
    if (ab == 0.0) return {0.0, std::conj(b) / bb};
    double d = std::sqrt(ab * ab + bb * bb);
    return {ab / d, (a / ab) * std::conj(b) / d};
}

inline void rotate_rows(Mat& m, int i, int j, const Givens& g, int from = 0) {
    for (int k = from; k < m.cols; ++k) {
        cplx x = m(i, k), y = m(j, k);
        m(i, k) = g.c * x + g.s * y;
        m(j, k) = -std::conj(g.s) * x + g.c * y;
    }
}

inline void rotate_cols(Mat& m, int i, int j, const Givens& g, int upto = -1) {
    if (upto < 0) upto = m.rows;
    for (int k = 0; k < upto; ++k) {  // right-multiply by G^H
        cplx x = m(k, i), y = m(k, j);
        m(k, i) = g.c * x + std::conj(g.s) * y;
        m(k, j) = -g.s * x + g.c * y;
    }
}

}  // namespace detail

inline Schur schur(const Mat& a0) {
    const int n = a0.rows;
    Mat h = a0;
    Mat q = Mat::identity(n);

    // Householder reduction to upper Hessenberg, accumulating Q.
    for (int k = 0; k < n - 2; ++k) {
        double scale = 0;
        for (int i = k + 1; i < n; ++i) scale += std::norm(h(i, k));
        scale = std::sqrt(scale);
        if (scale <= 1e-300) continue;
        cplx x0 = h(k + 1, k);
        cplx alpha = (std::abs(x0) > 0 ? -(x0 / std::abs(x0)) : cplx(-1.0)) * scale;
        Vec v(n, cplx{});
        v[k + 1] = x0 - alpha;
        for (int i = k + 2; i < n; ++i) v[i] = h(i, k);
        double vn2 = 0;
        for (int i = k + 1; i < n; ++i) vn2 += std::norm(v[i]);
        if (vn2 <= 1e-300) continue;
        auto reflect_left = [&](Mat& m) {
            for (int j = 0; j < m.cols; ++j) {
                cplx s = 0;
                for (int i = k + 1; i < n; ++i) s += std::conj(v[i]) * m(i, j);
                s *= 2.0 / vn2;
                for (int i = k + 1; i < n; ++i) m(i, j) -= s * v[i];
            }
        };
        auto reflect_right = [&](Mat& m) {
            for (int i = 0; i < m.rows; ++i) {
                cplx s = 0;
                for (int j = k + 1; j < n; ++j) s += m(i, j) * v[j];
                s *= 2.0 / vn2;
                for (int j = k + 1; j < n; ++j) m(i, j) -= s * std::conj(v[j]);
            }
        };
        reflect_left(h);
        reflect_right(h);
        reflect_right(q);
        for (int i = k + 2; i < n; ++i) h(i, k) = 0;
    }

    // Shifted QR with deflation.
    int hi = n - 1;
    int iter = 0, total_iter = 0;
    const int max_total = 40 * n * n + 100;
    while (hi > 0) {
        if (++total_iter > max_total) throw solve_error("Schur iteration did not converge");
        // Deflate converged subdiagonals.
        int lo = hi;
        while (lo > 0) {
            double sd = std::abs(h(lo, lo - 1));
            if (sd <= 1e-16 * (std::abs(h(lo, lo)) + std::abs(h(lo - 1, lo - 1)) + 1e-300)) {
                h(lo, lo - 1) = 0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            --hi;
            iter = 0;
            continue;
        }
        // Wilkinson shift from the trailing 2x2 of the active block.
        cplx a = h(hi - 1, hi - 1), b = h(hi - 1, hi), c = h(hi, hi - 1), d = h(hi, hi);
        cplx tr = a + d, dt = a * d - b * c;
        cplx disc = std::sqrt(tr * tr - 4.0 * dt);
        cplx l1 = (tr + disc) / 2.0, l2 = (tr - disc) / 2.0;
        cplx mu = (std::abs(l1 - d) < std::abs(l2 - d)) ? l1 : l2;
        if (++iter % 12 == 0)  // exceptional shift to break cycles
            mu = d + cplx(1.5 * std::abs(h(hi, hi - 1)), 0.0);

        // Explicit single-shift QR step: H - mu I = Q_s R, H <- R Q_s + mu I,
        // as a similarity on the full matrix.
        for (int k = lo; k <= hi; ++k) h(k, k) -= mu;
        std::vector<detail::Givens> gs(hi - lo);
        for (int k = lo; k < hi; ++k) {
            gs[k - lo] = detail::make_givens(h(k, k), h(k + 1, k));
            detail::rotate_rows(h, k, k + 1, gs[k - lo], k);
            h(k + 1, k) = 0;
        }
        for (int k = lo; k < hi; ++k) {
            detail::rotate_cols(h, k, k + 1, gs[k - lo], k + 2);
            detail::rotate_cols(q, k, k + 1, gs[k - lo]);
        }
        for (int k = lo; k <= hi; ++k) h(k, k) += mu;
    }
    // Zero the strict lower triangle (numerical dust).
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < i; ++j) h(i, j) = 0;
    return Schur{q, h};
}

// ---------------------------------------------------------------------------
// Matrix exponential

inline Mat mat_exp(const Mat& a) {
    const int n = a.rows;
    double nrm = 0;
    for (int i = 0; i < n; ++i) {
        double r = 0;
        for (int j = 0; j < n; ++j) r += std::abs(a(i, j));
        nrm = std::max(nrm, r);
    }
    int s = 0;
    while (nrm > 0.5) {
        nrm /= 2;
        ++s;
        if (s > 60) throw solve_error("matrix exponential overflow");
    }
    Mat b = a.scaled(std::pow(2.0, -s));
    Mat term = Mat::identity(n), sum = Mat::identity(n);
    for (int k = 1; k <= 120; ++k) {
        term = term * b;
        term = term.scaled(1.0 / k);
        sum = sum + term;
        if (term.frob() <= 1e-18 * sum.frob()) break;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// ---------------------------------------------------------------------------
// Eigenvalue clustering

struct Cluster {
    cplx mean;
    std::vector<int> members;  // indices into the eigenvalue list
};

/// Union-find clustering at `tol`; `ambiguous` is set when some pair sits in
/// the gray zone [floor_tol, tol].
inline std::vector<Cluster> cluster_eigenvalues(const Vec& lam, double tol, double floor_tol,
                                                bool* ambiguous = nullptr) {
    const int n = int(lam.size());
    std::vector<int> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    bool gray = false;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            double d = std::abs(lam[i] - lam[j]);
            if (d <= tol) parent[find(i)] = find(j);
            if (d >= floor_tol && d <= tol) gray = true;
        }
    if (ambiguous) *ambiguous = gray;
    std::vector<Cluster> out;
    std::vector<int> root_of(n, -1);
    for (int i = 0; i < n; ++i) {
        int r = find(i);
        if (root_of[r] < 0) {
            root_of[r] = int(out.size());
            out.push_back({});
        }
        out[root_of[r]].members.push_back(i);
    }
    for (auto& c : out) {
        cplx m = 0;
        for (int i : c.members) m += lam[i];
        c.mean = m / double(c.members.size());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Matrix logarithm (Schur-Parlett)

struct LogResult {
    Mat log;
    bool branch_warning = false;       // defective cluster at the cut
    std::vector<cplx> cluster_means;   // one per cluster, reordered
};

namespace detail {

/// Swap the diagonal entries t(i,i), t(i+1,i+1) of upper triangular t by a
/// unitary similarity, updating q (t = q^H a q stays valid).
inline void swap_diag(Mat& t, Mat& q, int i) {
    cplx tii = t(i, i), tjj = t(i + 1, i + 1), tij = t(i, i + 1);
    Givens g = make_givens(tij, tjj - tii);
    rotate_rows(t, i, i + 1, g);
    rotate_cols(t, i, i + 1, g);
    rotate_cols(q, i, i + 1, g);
    t(i + 1, i) = 0;
    t(i, i) = tjj;
    t(i + 1, i + 1) = tii;
}

/// log of an upper triangular block whose eigenvalues form one cluster:
/// log(mu) I + series in (B - mu I)/mu. The strictly triangular part makes the
/// series effectively a polynomial; the tiny diagonal spread converges it.
inline Mat atomic_log(const Mat& b, int branch_shift) {
    const int m = b.rows;
    cplx mu = 0;
    for (int i = 0; i < m; ++i) mu += b(i, i);
    mu /= double(m);
    if (std::abs(mu) == 0.0) throw solve_error("logarithm of a singular block");
    Mat e = b;
    for (int i = 0; i < m; ++i) e(i, i) -= mu;
    e = e.scaled(1.0 / mu);
    Mat sum(m, m), term = Mat::identity(m);
    for (int k = 1; k <= 200; ++k) {
        term = term * e;
        Mat add = term.scaled((k % 2 ? 1.0 : -1.0) / k);
        sum = sum + add;
        if (k >= m && add.frob() <= 1e-18 * (sum.frob() + 1.0)) break;
    }
    cplx lmu = std::log(mu) + cplx(0.0, two_pi * branch_shift);
    for (int i = 0; i < m; ++i) sum(i, i) += lmu;
    return sum;
}

/// Solve T11 X - X T22 = C for the Parlett recurrence (sizes <= 4).
inline Mat sylvester_tri(const Mat& t11, const Mat& t22, const Mat& c) {
    const int p = t11.rows, q = t22.rows;
    Mat k(p * q, p * q);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) {
            int row = i * q + j;
            for (int l = 0; l < p; ++l) k(row, l * q + j) += t11(i, l);
            for (int l = 0; l < q; ++l) k(row, i * q + l) -= t22(l, j);
        }
    Vec rhs(p * q);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) rhs[i * q + j] = c(i, j);
    Vec x = lu_solve(lu_factor(k), std::move(rhs));
    Mat out(p, q);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < q; ++j) out(i, j) = x[i * q + j];
    return out;
}

}  // namespace detail

/// Principal matrix logarithm with optional per-cluster branch shifts
/// (integer turns added to that cluster's eigenvalue logarithms). Cluster
/// order in `shifts` matches LogResult::cluster_means.
inline LogResult mat_log(const Mat& a, double cluster_tol = 1e-7,
                         const std::vector<int>* shifts = nullptr) {
    const int n = a.rows;
    Schur s = schur(a);
    Vec lam(n);
    for (int i = 0; i < n; ++i) lam[i] = s.t(i, i);
    std::vector<Cluster> clusters = cluster_eigenvalues(lam, cluster_tol, 0.0);

    // Reorder the Schur form so clusters are contiguous, cluster 0 first.
    std::vector<int> want(n);  // cluster id per current position
    {
        std::vector<int> cid(n);
        for (int c = 0; c < int(clusters.size()); ++c)
            for (int i : clusters[c].members) cid[i] = c;
        want = cid;
    }
    for (int target = 0, writen = 0; target < int(clusters.size()); ++target) {
        for (int i = writen; i < n; ++i) {
            if (want[i] != target) continue;
            for (int k = i; k > writen; --k) {
                detail::swap_diag(s.t, s.q, k - 1);
                std::swap(want[k - 1], want[k]);
            }
            ++writen;
        }
    }

    // Block boundaries after reordering.
    std::vector<int> starts{0};
    std::vector<cplx> means;
    for (const auto& c : clusters) {
        starts.push_back(starts.back() + int(c.members.size()));
        means.push_back(c.mean);
    }
    const int nb = int(clusters.size());

    bool warn = false;
    std::vector<Mat> blocks(nb * nb);
    auto block_of = [&](const Mat& m, int bi, int bj) {
        Mat out(starts[bi + 1] - starts[bi], starts[bj + 1] - starts[bj]);
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < out.cols; ++j) out(i, j) = m(starts[bi] + i, starts[bj] + j);
        return out;
    };
    for (int bi = 0; bi < nb; ++bi) {
        Mat tb = block_of(s.t, bi, bi);
        int shift = shifts && bi < int(shifts->size()) ? (*shifts)[bi] : 0;
        blocks[bi * nb + bi] = detail::atomic_log(tb, shift);
        // Defective block with its eigenvalue at the branch cut: flag it.
        if (tb.rows > 1 && std::abs(arg_principal(means[bi]) - pi) < 1e-6) warn = true;
    }
    for (int diag = 1; diag < nb; ++diag)
        for (int bi = 0; bi + diag < nb; ++bi) {
            int bj = bi + diag;
            Mat c = blocks[bi * nb + bi] * block_of(s.t, bi, bj) -
                    block_of(s.t, bi, bj) * blocks[bj * nb + bj];
            for (int k = bi + 1; k < bj; ++k) {
                c = c + blocks[bi * nb + k] * block_of(s.t, k, bj);
                c = c - block_of(s.t, bi, k) * blocks[k * nb + bj];
            }
            blocks[bi * nb + bj] =
                detail::sylvester_tri(block_of(s.t, bi, bi), block_of(s.t, bj, bj), c);
        }

    Mat logt(n, n);
    for (int bi = 0; bi < nb; ++bi)
        for (int bj = bi; bj < nb; ++bj) {
            const Mat& blk = blocks[bi * nb + bj];
            for (int i = 0; i < blk.rows; ++i)
                for (int j = 0; j < blk.cols; ++j)
                    logt(starts[bi] + i, starts[bj] + j) = blk(i, j);
        }
    return LogResult{s.q * logt * s.q.adjoint(), warn, means};
}

// ---------------------------------------------------------------------------
// Jordan structure from rank sequences

struct JordanBlock {
    cplx eigenvalue;
    int size;
};

inline std::vector<JordanBlock> jordan_structure(const Mat& a, double cluster_tol,
                                                 double floor_tol, double rank_tol,
                                                 bool* ambiguous = nullptr) {
    const int n = a.rows;
    Schur s = schur(a);
    Vec lam(n);
    for (int i = 0; i < n; ++i) lam[i] = s.t(i, i);
    std::vector<Cluster> clusters = cluster_eigenvalues(lam, cluster_tol, floor_tol, ambiguous);
    std::vector<JordanBlock> out;
    for (const auto& c : clusters) {
        const int m = int(c.members.size());
        Mat b = a;
        for (int i = 0; i < n; ++i) b(i, i) -= c.mean;
        double bnorm = std::max(b.frob(), 1e-300);
        Mat p = Mat::identity(n);
        std::vector<int> ranks{n};
        double scale = 1.0;
        for (int k = 1; k <= m; ++k) {
            p = p * b;
            scale *= bnorm;
            // Threshold against the natural scale of the power; the sigma_max
            // of a numerically-nilpotent power is pure noise and must not
            // anchor the relative test.
            Svd sv = svd(p);
            double thr = rank_tol * scale;
            int r = 0;
            for (double v : sv.s)
                if (v > thr) ++r;
            ranks.push_back(r);
        }
        // blocks of size >= k: ranks[k-1] - ranks[k]
        std::vector<int> atleast(m + 2, 0);
        for (int k = 1; k <= m; ++k) atleast[k] = ranks[k - 1] - ranks[k];
        for (int k = m; k >= 1; --k) {
            int exact = atleast[k] - atleast[k + 1];
            for (int i = 0; i < exact; ++i) out.push_back({c.mean, k});
        }
    }
    return out;
}

}  // namespace segre::la
