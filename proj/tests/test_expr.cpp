#include <catch2/catch_amalgamated.hpp>

#include <thread>

#include "segre/expr.hpp"

using namespace segre;

namespace {

Assignment point2(cplx z1, cplx cz1, cplx w, cplx cw) {
    Assignment a;
    a.z = {z1};
    a.cz = {cz1};
    a.w = w;
    a.cw = cw;
    return a;
}

}  // namespace

TEST_CASE("parse and evaluate the log-model defining right-hand side") {
    AnalyticExpr e = parse("conj(w) * exp(2*i*z1*conj(z1))");
    // Segre variety of (0,1): substituting cz1 = 0, cw = 1 gives w = 1.
    Assignment a = point2(0.0, 0.0, 0.0, 1.0);
    CHECK(std::abs(e.eval(a) - cplx(1.0)) < 1e-15);

    Assignment b = point2(cplx(0.1, 0.2), cplx(0.1, -0.2), 0.0, cplx(0.9, 0.1));
    cplx zbar = std::conj(b.z[0]);
    cplx expect = std::conj(cplx(0.9, -0.1)) * std::exp(cplx(0, 2) * b.z[0] * zbar);
    // cw is an independent symbol: the value is cw*exp(2i z1 cz1) verbatim.
    expect = b.cw * std::exp(cplx(0, 2) * b.z[0] * b.cz[0]);
    CHECK(std::abs(e.eval(b) - expect) < 1e-15);
}

TEST_CASE("constant zero and syntax errors") {
    AnalyticExpr zero = parse("0");
    CHECK(zero.root()->op == NodeOp::Const);
    CHECK(zero.eval(Assignment{}) == cplx(0.0));

    try {
        parse("exp(");
        FAIL("expected parse_error");
    } catch (const parse_error& pe) {
        CHECK(pe.offset == 4);
    }
    CHECK_THROWS_AS(parse("zebra + 1"), parse_error);
    CHECK_THROWS_AS(parse("conj(w + 1)"), parse_error);
    CHECK_THROWS_AS(parse("1 + * 2"), parse_error);
}

TEST_CASE("principal branch and winding offsets") {
    AnalyticExpr lg = parse("log(w)");
    Assignment a;
    a.w = cplx(-1.0, 0.0);
    CHECK(std::abs(lg.eval(a) - cplx(0.0, pi)) < 1e-15);
    a.winding = 1;
    CHECK(std::abs(lg.eval(a) - cplx(0.0, 3 * pi)) < 1e-15);

    AnalyticExpr half = parse("w^0.5");
    Assignment b;
    b.w = cplx(4.0, 0.0);
    CHECK(std::abs(half.eval(b) - cplx(2.0)) < 1e-14);
    b.winding = 1;
    CHECK(std::abs(half.eval(b) + cplx(2.0)) < 1e-14);

    a.w = 0.0;
    a.winding = 0;
    CHECK_THROWS_AS(lg.eval(a), eval_error);
    CHECK_THROWS_AS(parse("1/w").eval(a), eval_error);
    CHECK_THROWS_AS(parse("sqrt(w)").eval(a), eval_error);
}

TEST_CASE("conjugate variables are independent symbols") {
    AnalyticExpr e = parse("z1 * conj(z1)");
    Assignment a = point2(cplx(1, 1), cplx(1, -1), 0.0, 0.0);
    CHECK(std::abs(e.eval(a) - cplx(2.0)) < 1e-15);
    // Off-diagonal complexification: cz1 free of conj(z1).
    Assignment b = point2(cplx(1, 1), cplx(3, 0), 0.0, 0.0);
    CHECK(std::abs(e.eval(b) - cplx(3, 3)) < 1e-15);
}

TEST_CASE("first and second jets of the bilinear form") {
    AnalyticExpr e = parse("z1*conj(z1)");
    VarTable vt{1};
    Assignment a = point2(1.0, 1.0, 0.0, 0.0);
    Jet j = e.eval_jet(a, vt, 2);
    CHECK(std::abs(j.d[vt.slot(VarKind::Z, 1)] - cplx(1.0)) < 1e-15);
    CHECK(std::abs(j.d2(vt.slot(VarKind::Z, 1), vt.slot(VarKind::CZ, 1)) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(j.d2(vt.slot(VarKind::CZ, 1), vt.slot(VarKind::Z, 1)) - cplx(1.0)) < 1e-15);
    CHECK(std::abs(j.d2(vt.slot(VarKind::Z, 1), vt.slot(VarKind::Z, 1))) < 1e-15);
}

namespace {

// Random expression generator for the finite-difference oracle.
NodePtr random_node(Rng& rng, int depth) {
    double u = rng.uniform();
    if (depth == 0 || u < 0.25) {
        if (rng.uniform() < 0.4)
            return ExprNode::constant(cplx(rng.uniform(-2, 2), rng.uniform(-2, 2)));
        static const std::pair<VarKind, int> vars[] = {
            {VarKind::Z, 1}, {VarKind::CZ, 1}, {VarKind::W, 0}, {VarKind::CW, 0}};
        auto [k, idx] = vars[rng.next_u64() % 4];
        return ExprNode::variable(k, idx);
    }
    if (u < 0.75) {
        NodeOp ops[] = {NodeOp::Add, NodeOp::Sub, NodeOp::Mul, NodeOp::Div};
        NodeOp op = ops[rng.next_u64() % 4];
        return ExprNode::binary(op, random_node(rng, depth - 1), random_node(rng, depth - 1));
    }
    if (u < 0.85) {
        long long e = 2 + (long long)(rng.next_u64() % 3);
        return ExprNode::binary(NodeOp::Pow, random_node(rng, depth - 1),
                                ExprNode::constant(cplx(double(e), 0.0)));
    }
    Func fs[] = {Func::Exp, Func::Log, Func::Sqrt, Func::Sin, Func::Cos, Func::Tan};
    return ExprNode::call(fs[rng.next_u64() % 6], random_node(rng, depth - 1));
}

Assignment random_point(Rng& rng) {
    Assignment a;
    a.z = {cplx(rng.uniform(0.3, 1.2), rng.uniform(0.3, 1.2))};
    a.cz = {cplx(rng.uniform(0.3, 1.2), rng.uniform(-1.2, -0.3))};
    a.w = cplx(rng.uniform(0.3, 1.2), rng.uniform(0.3, 1.2));
    a.cw = cplx(rng.uniform(0.3, 1.2), rng.uniform(-1.2, -0.3));
    return a;
}

cplx shifted_eval(const AnalyticExpr& e, Assignment a, int slot, cplx dv, const VarTable& vt) {
    if (slot == vt.slot(VarKind::Z, 1)) a.z[0] += dv;
    else if (slot == vt.slot(VarKind::CZ, 1)) a.cz[0] += dv;
    else if (slot == vt.slot(VarKind::W, 0)) a.w += dv;
    else if (slot == vt.slot(VarKind::CW, 0)) a.cw += dv;
    return e.eval(a);
}

}  // namespace

TEST_CASE("order-1 jets agree with central finite differences on 1000 random expressions") {
    Rng rng(20240917);
    VarTable vt{1};
    const double h = 1e-5;
    int tested = 0, trials = 0;
    while (tested < 1000 && trials < 20000) {
        ++trials;
        AnalyticExpr e(random_node(rng, 1 + int(rng.next_u64() % 6)));
        Assignment a = random_point(rng);
        Jet j;
        try {
            j = e.eval_jet(a, vt, 1);
        } catch (const eval_error&) {
            continue;
        }
        if (std::abs(j.value) > 1e6) continue;
        bool ok_point = true;
        for (int slot : {vt.slot(VarKind::Z, 1), vt.slot(VarKind::CZ, 1), vt.slot(VarKind::W, 0),
                         vt.slot(VarKind::CW, 0)}) {
            cplx fp, fm;
            try {
                fp = shifted_eval(e, a, slot, h, vt);
                fm = shifted_eval(e, a, slot, -h, vt);
            } catch (const eval_error&) {
                ok_point = false;
                break;
            }
            cplx fd = (fp - fm) / (2 * h);
            if (std::abs(fd) > 1e5 || std::abs(j.d[slot]) > 1e5) {
                ok_point = false;  // derivative too wild for the FD step
                break;
            }
            double scale = std::max(1.0, std::abs(j.d[slot]));
            if (std::abs(fd - j.d[slot]) / scale > 1e-6) {
                INFO("expr: " << e.pretty());
                INFO("slot " << slot << " jet " << j.d[slot] << " fd " << fd);
                CHECK(std::abs(fd - j.d[slot]) / scale <= 1e-6);
                ok_point = false;
                break;
            }
        }
        if (ok_point) ++tested;
    }
    CHECK(tested == 1000);
}

TEST_CASE("every partial of a random degree-4 polynomial matches finite differences") {
    Rng rng(7);
    VarTable vt{1};
    // Random degree-4 polynomial in all four variables.
    NodePtr poly = ExprNode::constant(cplx(0.3, -0.1));
    for (int k = 0; k < 12; ++k) {
        NodePtr mono = ExprNode::constant(cplx(rng.uniform(-1, 1), rng.uniform(-1, 1)));
        int deg = 1 + int(rng.next_u64() % 4);
        for (int d = 0; d < deg; ++d) {
            static const std::pair<VarKind, int> vars[] = {
                {VarKind::Z, 1}, {VarKind::CZ, 1}, {VarKind::W, 0}, {VarKind::CW, 0}};
            auto [vk, idx] = vars[rng.next_u64() % 4];
            mono = ExprNode::binary(NodeOp::Mul, mono, ExprNode::variable(vk, idx));
        }
        poly = ExprNode::binary(NodeOp::Add, poly, mono);
    }
    AnalyticExpr e(poly);
    const double h = 1e-5;
    for (int t = 0; t < 20; ++t) {
        Assignment a = random_point(rng);
        Jet j = e.eval_jet(a, vt, 1);
        for (int slot = 0; slot < vt.slots() - 1; ++slot) {
            if (slot == vt.slot(VarKind::LW, 0)) continue;
            cplx fd = (shifted_eval(e, a, slot, h, vt) - shifted_eval(e, a, slot, -h, vt)) / (2 * h);
            double scale = std::max(1.0, std::abs(j.d[slot]));
            CHECK(std::abs(fd - j.d[slot]) / scale < 1e-6);
        }
    }
}

TEST_CASE("pretty-print then parse is the identity on ASTs") {
    Rng rng(42);
    for (int t = 0; t < 500; ++t) {
        AnalyticExpr e(random_node(rng, 1 + int(rng.next_u64() % 5)));
        std::string s = e.pretty();
        INFO(s);
        AnalyticExpr back = parse(s);
        CHECK(e.equals(back));
    }
    // Lw survives the round trip too.
    AnalyticExpr g = parse("z1*exp(0.5*Lw) + i*pi");
    CHECK(g.equals(parse(g.pretty())));
}

TEST_CASE("evaluation is pure and bit-stable") {
    AnalyticExpr e = parse("exp(2*i*z1*conj(z1)) / (w - 0.25) + sqrt(cw)");
    Assignment a = point2(cplx(0.3, 0.1), cplx(0.3, -0.1), cplx(0.7, 0.2), cplx(0.7, -0.2));
    cplx v1 = e.eval(a);
    for (int k = 0; k < 10; ++k) {
        cplx v2 = e.eval(a);
        CHECK(v1.real() == v2.real());
        CHECK(v1.imag() == v2.imag());
    }
    // Concurrent evaluation of one AST sees the same bits.
    cplx va, vb;
    std::thread ta([&] { va = e.eval(a); });
    std::thread tb([&] { vb = e.eval(a); });
    ta.join();
    tb.join();
    CHECK(va == v1);
    CHECK(vb == v1);
}

TEST_CASE("defining equations parse to vanishing form") {
    AnalyticExpr rho = parse_defining("w = conj(w)*exp(2*i*z1*conj(z1))");
    Assignment on = point2(0.0, 0.0, 1.0, 1.0);  // (0,1) lies on the surface
    CHECK(std::abs(rho.eval(on)) < 1e-15);
    AnalyticExpr bare = parse_defining("w - conj(w)");
    CHECK(std::abs(bare.eval(on)) < 1e-15);
}

TEST_CASE("complexified conjugate expression") {
    AnalyticExpr e = parse("w - conj(w)*exp(2*i*z1*conj(z1))");
    AnalyticExpr eb = e.bar();
    CHECK(eb.equals(parse("cw - w*exp(-2*i*cz1*z1)")));
}
