#include <catch2/catch_amalgamated.hpp>

#include "segre/projective.hpp"

using namespace segre;
using la::Mat;
using la::Vec;

namespace {

ProjectivePoint pp(std::initializer_list<cplx> v) { return ProjectivePoint{Vec(v)}; }

Mat random_mat(Rng& rng, int n) {
    Mat m(n, n);
    for (auto& v : m.a) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return m;
}

ProjectivePoint random_point(Rng& rng, int d) {
    Vec v(d);
    for (auto& c : v) c = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    return ProjectivePoint{v};
}

}  // namespace

TEST_CASE("standard quadric signatures") {
    HermitianQuadric q = HermitianQuadric::standard(1, 0, 2);
    CHECK(q.positive() == 2);
    CHECK(q.negative() == 1);
    HermitianQuadric q3 = HermitianQuadric::standard(1, 1, 3);
    CHECK(q3.positive() == 2);
    CHECK(q3.negative() == 2);
    // Points of Im w = |z|^2 satisfy the form.
    Rng rng(21);
    for (int t = 0; t < 20; ++t) {
        cplx z = rng.in_disc(1.0);
        cplx w = cplx(rng.uniform(-1, 1), std::norm(z));
        CHECK(std::abs(q.value({1.0, z, w})) < 1e-14);
    }
    Mat bad(2, 2);
    bad(0, 1) = 1;  // not Hermitian
    CHECK_THROWS_AS(HermitianQuadric(bad), check_error);
    Mat deg(2, 2);
    deg(0, 0) = 1;  // degenerate
    CHECK_THROWS_AS(HermitianQuadric(deg), check_error);
}

TEST_CASE("Segre hyperplane of the standard quadric") {
    HermitianQuadric q = HermitianQuadric::standard(1, 0, 2);
    // The Segre variety of (0,1) on the quadric is {w = 1}; its image points
    // [1 : z : 1] all lie on the hyperplane of zeta = [1 : 0 : 1].
    Hyperplane h = segre_hyperplane(q, pp({1.0, 0.0, 1.0}));
    Rng rng(22);
    for (int t = 0; t < 5; ++t) {
        cplx z = rng.in_disc(1.0);
        Vec x{1.0, z, 1.0};
        CHECK(std::abs(h.pair(x)) < 1e-12);
    }
    // A point of the quadric lies on its own hyperplane, an eigenvector of H
    // never does (its form value is a nonzero multiple of the eigenvalue).
    Vec on{1.0, cplx(0.5, 0.2), cplx(0.3, std::norm(cplx(0.5, 0.2)))};
    CHECK(std::abs(segre_hyperplane(q, ProjectivePoint{on}).pair(on)) < 1e-12);
    la::HermEig e = la::herm_eig(q.matrix());
    for (int j = 0; j < 3; ++j) {
        Vec v = e.vectors.col(j);
        double pairing = std::abs(segre_hyperplane(q, ProjectivePoint{v}).pair(v));
        double form = std::abs(q.value(v));
        CHECK(pairing > 1e-6);
        CHECK(form > 1e-6);
    }
}

TEST_CASE("the Segre correspondence is injective and invertible") {
    HermitianQuadric q = HermitianQuadric::standard(1, 0, 2);
    Rng rng(23);
    std::vector<Hyperplane> planes;
    for (int t = 0; t < 100; ++t) {
        ProjectivePoint z = random_point(rng, 3);
        Hyperplane h = segre_hyperplane(q, z);
        ProjectivePoint back = inverse_segre(q, h);
        CHECK(proj_dist(back, z) < 1e-12);
        planes.push_back(h);
    }
    for (int a = 0; a < 100; a += 7)
        for (int b = a + 1; b < 100; b += 13)
            CHECK(proj_dist(planes[a].cov, planes[b].cov) > 1e-8);
    for (int t = 0; t < 100; ++t) {
        Hyperplane h{random_point(rng, 3).h};
        Hyperplane h2 = segre_hyperplane(q, inverse_segre(q, h));
        CHECK(proj_dist(h.cov, h2.cov) < 1e-12);
    }
}

TEST_CASE("hyperplane fit: exact membership, log-image, and generic clouds") {
    Rng rng(24);
    // n+5 points on a known hyperplane.
    Vec cov{cplx(0.3, 0.1), cplx(-0.8, 0.4), cplx(0.2, -0.9)};
    std::vector<ProjectivePoint> pts;
    for (int t = 0; t < 8; ++t) {
        cplx a = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        cplx b = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        cplx c = -(cov[0] * a + cov[1] * b) / cov[2];
        pts.push_back(pp({a, b, c}));
    }
    HyperplaneFit f = fit_hyperplane(pts);
    CHECK(f.residual < 1e-12);
    CHECK_FALSE(f.degenerate);
    CHECK(proj_dist(f.plane.cov, cov) < 1e-10);

    // Images under (z, Log w) of 12 points on one Segre variety of the log
    // model: w = conj(b) exp(2 i z conj(a)), so Log w is affine in z.
    cplx a0(0.21, 0.05), b0(0.9, 0.12);
    std::vector<ProjectivePoint> img;
    for (int t = 0; t < 12; ++t) {
        cplx z = rng.in_disc(0.3);
        cplx w = std::conj(b0) * std::exp(cplx(0, 2) * z * std::conj(a0));
        img.push_back(pp({1.0, z, std::log(w)}));
    }
    HyperplaneFit f2 = fit_hyperplane(img);
    CHECK(f2.residual < 1e-8);

    // 12 generic points are far from any hyperplane.
    std::vector<ProjectivePoint> gen;
    for (int t = 0; t < 12; ++t) gen.push_back(random_point(rng, 3));
    CHECK(fit_hyperplane(gen).residual > 1e-2);

    // Rank-deficient input flagged: all points equal.
    std::vector<ProjectivePoint> flat(8, pp({1.0, 0.5, 0.25}));
    CHECK(fit_hyperplane(flat).degenerate);
}

TEST_CASE("projective map fit recovers known maps") {
    Rng rng(25);
    for (int trial = 0; trial < 10; ++trial) {
        Mat t = random_mat(rng, 3);
        std::vector<std::pair<ProjectivePoint, ProjectivePoint>> pairs;
        for (int i = 0; i < 7; ++i) {
            ProjectivePoint x = random_point(rng, 3);
            pairs.push_back({x, ProjectivePoint{t * x.h}});
        }
        MapFit f = fit_projective_map(pairs);
        CHECK(f.residual < 1e-11);
        CHECK_FALSE(f.degenerate);
        CHECK(proj_mat_dist(f.map.t, t) < 1e-10);
    }

    // Two branches of (z, ln w) differ by the affine shift by 2 pi i. The
    // sample points must fill both complex dimensions; a z-slice alone is a
    // line in CP^2 and leaves the map underdetermined.
    Mat shift = Mat::identity(3);
    shift(2, 0) = cplx(0, two_pi);  // in [1 : z : Lw] coordinates
    std::vector<std::pair<ProjectivePoint, ProjectivePoint>> pairs;
    for (int i = 0; i < 9; ++i) {
        cplx z = rng.in_disc(0.3);
        cplx w = cplx(0.8, 0.1) + rng.in_disc(0.2);
        cplx lw = std::log(w);
        pairs.push_back({pp({1.0, z, lw}), pp({1.0, z, lw + cplx(0, two_pi)})});
    }
    MapFit f = fit_projective_map(pairs);
    CHECK(proj_mat_dist(f.map.t, shift) < 1e-9);

    // Inconsistent pairs: perturb one image by 1e-2.
    pairs[3].second.h[1] += 1e-2;
    CHECK(fit_projective_map(pairs).residual > 1e-4);

    // Degenerate configuration: every source point identical.
    std::vector<std::pair<ProjectivePoint, ProjectivePoint>> degen;
    for (int i = 0; i < 7; ++i)
        degen.push_back({pp({1.0, 0.2, 0.3}), random_point(rng, 3)});
    CHECK(fit_projective_map(degen).degenerate);
}

TEST_CASE("quadric fit: exact surface, stability, and the perturbation oracle") {
    Rng rng(26);
    HermitianQuadric q = HermitianQuadric::standard(1, 0, 2);
    auto sample = [&](Rng& r) {
        std::vector<ProjectivePoint> pts;
        for (int t = 0; t < 60; ++t) {
            cplx z = r.in_disc(0.8);
            cplx w = cplx(r.uniform(-1, 1), std::norm(z));
            pts.push_back(pp({1.0, z, w}));
        }
        return pts;
    };
    QuadricFit f = fit_quadric(sample(rng));
    CHECK(f.residual < 1e-10);
    CHECK(f.k == 1);
    CHECK(f.l == 0);
    CHECK(proj_mat_dist(f.h, q.matrix()) < 1e-8);

    // Resampling stability of the signature.
    for (int t = 0; t < 10; ++t) {
        QuadricFit g = fit_quadric(sample(rng));
        CHECK(g.k == 1);
        CHECK(g.l == 0);
    }

    // Perturbed sphere is detected as a non-quadric.
    std::vector<ProjectivePoint> bad;
    for (int t = 0; t < 40; ++t) {
        cplx z = rng.in_disc(0.8);
        cplx w = cplx(rng.uniform(-1, 1), std::norm(z) + 0.05 * std::pow(std::norm(z), 2));
        bad.push_back(pp({1.0, z, w}));
    }
    CHECK(fit_quadric(bad).residual > 1e-3);
}

TEST_CASE("scaled matrix logarithm") {
    MatrixLog zero = matrix_log(ProjectiveMap{Mat::identity(3)});
    CHECK(zero.a.max_abs() < 1e-14);
    CHECK(zero.exp_defect < 1e-12);

    // Unipotent model: A is the elementary nilpotent with A[1][2] = 1.
    Mat t = Mat::identity(3);
    t(1, 2) = cplx(0, two_pi);
    MatrixLog ml = matrix_log(ProjectiveMap{t});
    Mat expect(3, 3);
    expect(1, 2) = 1.0;
    CHECK((ml.a - expect).max_abs() < 1e-11);
    CHECK(ml.exp_defect < 1e-10);

    // Diagonal phases: canonical scaling divides by det^(1/3), principal
    // arguments give diag(0, 0.3, -0.3).
    Mat d(3, 3);
    d(0, 0) = std::exp(cplx(0, 0.6 * pi));
    d(1, 1) = std::exp(cplx(0, 1.2 * pi));
    d(2, 2) = 1;
    MatrixLog md = matrix_log(ProjectiveMap{d});
    std::vector<double> got;
    for (int i = 0; i < 3; ++i) got.push_back(md.a(i, i).real());
    std::sort(got.begin(), got.end());
    CHECK(got[0] == Catch::Approx(-0.3).margin(1e-12));
    CHECK(got[1] == Catch::Approx(0.0).margin(1e-12));
    CHECK(got[2] == Catch::Approx(0.3).margin(1e-12));
    CHECK(md.exp_defect < 1e-12);
}

TEST_CASE("log/exp round trip on 100 random maps off the branch cut") {
    Rng rng(27);
    int done = 0;
    while (done < 100) {
        int n = 3 + int(rng.next_u64() % 2);
        Mat p = random_mat(rng, n);
        if (std::abs(la::det(p)) < 0.1) continue;
        Mat diag(n, n);
        for (int i = 0; i < n; ++i)
            diag(i, i) = std::polar(rng.uniform(0.5, 2.0), rng.uniform(-2.7, 2.7));
        Mat t = p * diag * la::inverse(p);
        MatrixLog ml = matrix_log(ProjectiveMap{t});
        CHECK(ml.exp_defect < 1e-9);
        ++done;
    }
}

TEST_CASE("scaled Jordan form of the catalog monodromies") {
    // The unipotent model in either triangular orientation.
    Mat upper = Mat::identity(3);
    upper(1, 2) = cplx(0, two_pi);
    Mat lower = Mat::identity(3);
    lower(2, 0) = cplx(0, two_pi);
    for (const Mat& s : {upper, lower}) {
        ScaledJordan j = scaled_jordan(ProjectiveMap{s});
        REQUIRE(j.blocks.size() == 2);
        CHECK(j.blocks[0].size == 2);
        CHECK(j.blocks[1].size == 1);
        CHECK(std::abs(j.blocks[0].eigenvalue - cplx(1.0)) < 1e-9);
        CHECK(std::abs(j.j(0, 1) - cplx(0, two_pi)) < 1e-12);
        CHECK_FALSE(j.ambiguous);
    }

    // Scalar monodromy: J = I.
    ScaledJordan ji = scaled_jordan(ProjectiveMap{Mat::identity(3).scaled(cplx(0.4, 1.2))});
    CHECK((ji.j - Mat::identity(3)).max_abs() < 1e-10);

    // Diagonal phase model, alpha = 0.3: canonical spectrum.
    Mat d(3, 3);
    d(0, 0) = std::exp(cplx(0, 0.6 * pi));
    d(1, 1) = std::exp(cplx(0, 1.2 * pi));
    d(2, 2) = 1;
    ScaledJordan jd = scaled_jordan(ProjectiveMap{d});
    Vec expect = canonical_eigentuple({std::exp(cplx(0, 0.6 * pi)), std::exp(cplx(0, 1.2 * pi)), 1.0});
    Vec gotten;
    for (auto& b : jd.blocks)
        for (int c = 0; c < b.size; ++c) gotten.push_back(b.eigenvalue);
    REQUIRE(gotten.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(gotten[i] - expect[i]) < 1e-9);
}

TEST_CASE("scaled Jordan is conjugation invariant") {
    Rng rng(28);
    Mat d(3, 3);
    d(0, 0) = cplx(1.3, 0.2);
    d(1, 1) = cplx(-0.4, 0.9);
    d(2, 2) = cplx(0.1, -1.1);
    ScaledJordan ref = scaled_jordan(ProjectiveMap{d});
    for (int t = 0; t < 20; ++t) {
        Mat p = random_mat(rng, 3);
        if (std::abs(la::det(p)) < 0.1) continue;
        // Conjugate and rescale: J must not move.
        Mat m = (p * d * la::inverse(p)).scaled(cplx(rng.uniform(0.5, 2), rng.uniform(-1, 1)));
        ScaledJordan j = scaled_jordan(ProjectiveMap{m});
        CHECK((j.j - ref.j).max_abs() < 1e-6);
    }
}

TEST_CASE("canonical eigentuple ties resolve deterministically") {
    // Cube roots of unity: every root-of-unity multiple gives the same set.
    cplx w3 = std::polar(1.0, two_pi / 3);
    Vec t1 = canonical_eigentuple({1.0, w3, w3 * w3});
    Vec t2 = canonical_eigentuple({w3, w3 * w3, 1.0});
    REQUIRE(t1.size() == 3);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(t1[i] - t2[i]) < 1e-12);
    CHECK(std::abs(t1[0] - cplx(1.0)) < 1e-12);
}

TEST_CASE("scalar matrix test") {
    CHECK(is_scalar_matrix(Mat::identity(4).scaled(cplx(0, -2.3))));
    Mat m = Mat::identity(3);
    m(0, 1) = 1e-6;
    CHECK_FALSE(is_scalar_matrix(m));
    Mat d(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 1.0 + 1e-5;
    CHECK_FALSE(is_scalar_matrix(d));
}

TEST_CASE("projective map canonical scaling") {
    Rng rng(29);
    for (int t = 0; t < 20; ++t) {
        Mat m = random_mat(rng, 3);
        if (std::abs(la::det(m)) < 0.05) continue;
        Mat c = ProjectiveMap{m}.canonical_scaled();
        CHECK(std::abs(la::det(c) - cplx(1.0)) < 1e-10);
        // Scaling the input never changes the representative by more than a
        // cube root of unity.
        Mat c2 = ProjectiveMap{m.scaled(cplx(0.7, -1.9))}.canonical_scaled();
        double best = 1e9;
        for (int j = 0; j < 3; ++j)
            best = std::min(best, (c2.scaled(std::polar(1.0, two_pi * j / 3)) - c).max_abs());
        CHECK(best < 1e-10);
    }
}
