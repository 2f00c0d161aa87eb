#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace segre {

using cplx = std::complex<double>;

inline constexpr double pi = 3.141592653589793238462643383279502884;
inline constexpr double two_pi = 2.0 * pi;

struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed DSL source. Carries the byte offset of the offending token.
struct parse_error : error {
    std::size_t offset;
    parse_error(const std::string& msg, std::size_t off)
        : error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

/// Evaluation hit a pole or a branch point; never reported as NaN.
struct eval_error : error {
    using error::error;
};

/// A numerical solve (Newton, fit, eigen iteration) failed to meet its contract.
struct solve_error : error {
    using error::error;
};

/// A validated precondition or consistency check failed.
struct check_error : error {
    using error::error;
};

inline double arg_principal(cplx z) { return std::arg(z); }  // (-pi, pi]

/// Argument normalized to [0, 2*pi).
inline double arg_two_pi(cplx z) {
    double a = std::arg(z);
    if (a < 0) a += two_pi;
    if (a >= two_pi) a = 0;
    return a;
}

/// Principal logarithm shifted by an integer number of turns.
inline cplx log_branch(cplx z, int winding) {
    if (std::abs(z) == 0.0) throw eval_error("log at branch point 0");
    return std::log(z) + cplx(0.0, two_pi * winding);
}

/// Deterministic 64-bit generator (splitmix64). All sampling in the library
/// derives from a single seed through this type; no std:: distributions are
/// used so that streams are identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform on the closed disc of given radius.
    cplx in_disc(double radius) {
        double r = radius * std::sqrt(uniform());
        double t = two_pi * uniform();
        return cplx(r * std::cos(t), r * std::sin(t));
    }

    /// Uniform on the circle of given radius.
    cplx on_circle(double radius) {
        double t = two_pi * uniform();
        return cplx(radius * std::cos(t), radius * std::sin(t));
    }

    std::vector<cplx> in_polydisc(int dim, double radius) {
        std::vector<cplx> v(dim);
        for (auto& c : v) c = in_disc(radius);
        return v;
    }

    /// Independent stream derived from this one; `tag` separates uses.
    Rng fork(std::uint64_t tag) {
        std::uint64_t s = state_ ^ (0x632be59bd9b4e019ull * (tag + 1));
        Rng r(s);
        r.next_u64();
        return r;
    }

  private:
    std::uint64_t state_;
};

/// Named tolerances with spec defaults; CLI --tol NAME=VALUE lands here.
struct Tolerances {
    double newton = 1e-12;          // Segre graph Newton residual
    int newton_iters = 50;
    double membership = 1e-10;      // on-surface / chain membership
    double degeneracy = 1e-10;      // |w| < degeneracy * u1 counts as X
    double svd_rank = 1e-8;         // relative rank threshold
    double qsegre = 1e-6;           // Q-Segre pass bound
    double step_consistency = 1e-8; // Prop-style double-step overlap
    double glue = 1e-8;             // projective glue residual
    double cluster = 1e-7;          // eigenvalue clustering
    double cluster_floor = 1e-9;    // below this, clustering is clean
    double scalar = 1e-8;           // scalar-matrix test
    double jordan_compare = 1e-6;   // J(M) equality across runs
    double fit = 1e-6;              // monodromy fit residual bound
    double formula = 1e-8;          // monodromy formula deviation
    double levi_eigen = 1e-8;       // relative Levi degeneracy bound

    void set(const std::string& name, double value) {
        if (name == "newton") newton = value;
        else if (name == "membership") membership = value;
        else if (name == "degeneracy") degeneracy = value;
        else if (name == "svd_rank") svd_rank = value;
        else if (name == "qsegre") qsegre = value;
        else if (name == "step_consistency") step_consistency = value;
        else if (name == "glue") glue = value;
        else if (name == "cluster") cluster = value;
        else if (name == "cluster_floor") cluster_floor = value;
        else if (name == "scalar") scalar = value;
        else if (name == "jordan_compare") jordan_compare = value;
        else if (name == "fit") fit = value;
        else if (name == "formula") formula = value;
        else if (name == "levi_eigen") levi_eigen = value;
        else throw error("unknown tolerance name: " + name);
    }
};

/// Fixed-format float printing: 17 significant digits, reproducible bytes.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace segre
