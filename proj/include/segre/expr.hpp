#pragma once

// Complex-analytic expression DSL in z1..z_{n-1}, w, their formal conjugates
// cz1..cz_{n-1}, cw, and the reserved symbol Lw (a tracked logarithm supplied
// by the caller). Holomorphic and antiholomorphic variables are independent
// symbols; nothing here ever conjugates numerically.
//
// Grammar:
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | base ('^' ('-'? base))?
//   base   := number | 'i' | 'pi' | ident | func '(' expr ')' | '(' expr ')'
//   ident  := z<digits> | cz<digits> | w | cw | Lw
//   func   := exp | log | sqrt | sin | cos | tan | conj
// conj(...) is parse-time sugar on a variable: conj(z1) -> cz1, conj(w) -> cw
// and back. Numbers are unsigned decimals with optional exponent.

#include <algorithm>
#include <cctype>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "segre/common.hpp"

namespace segre {

enum class VarKind { Z, CZ, W, CW, LW };

enum class NodeOp { Const, Var, Add, Sub, Mul, Div, Neg, Pow, Call };

enum class Func { Exp, Log, Sqrt, Sin, Cos, Tan };

struct ExprNode;
using NodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    NodeOp op = NodeOp::Const;
    cplx value{};            // Const
    VarKind var{};           // Var
    int index = 0;           // Var: 1-based for Z/CZ
    Func func{};             // Call
    NodePtr a, b;

    static NodePtr constant(cplx v) {
        auto n = std::make_shared<ExprNode>();
        n->op = NodeOp::Const;
        n->value = v;
        return n;
    }
    static NodePtr variable(VarKind k, int idx) {
        auto n = std::make_shared<ExprNode>();
        n->op = NodeOp::Var;
        n->var = k;
        n->index = idx;
        return n;
    }
    static NodePtr binary(NodeOp o, NodePtr x, NodePtr y) {
        // Fold exact constant arithmetic so pretty-printed constants
        // round-trip to structurally equal trees.
        if (x->op == NodeOp::Const && y->op == NodeOp::Const &&
            (o == NodeOp::Add || o == NodeOp::Sub || o == NodeOp::Mul)) {
            cplx v = o == NodeOp::Add   ? x->value + y->value
                     : o == NodeOp::Sub ? x->value - y->value
                                        : x->value * y->value;
            return constant(v);
        }
        auto n = std::make_shared<ExprNode>();
        n->op = o;
        n->a = std::move(x);
        n->b = std::move(y);
        return n;
    }
    static NodePtr neg(NodePtr x) {
        if (x->op == NodeOp::Const) return constant(-x->value);
        auto n = std::make_shared<ExprNode>();
        n->op = NodeOp::Neg;
        n->a = std::move(x);
        return n;
    }
    static NodePtr call(Func f, NodePtr x) {
        auto n = std::make_shared<ExprNode>();
        n->op = NodeOp::Call;
        n->func = f;
        n->a = std::move(x);
        return n;
    }
};

inline bool node_equal(const NodePtr& x, const NodePtr& y) {
    if (x->op != y->op) return false;
    switch (x->op) {
        case NodeOp::Const:
            return x->value.real() == y->value.real() && x->value.imag() == y->value.imag();
        case NodeOp::Var:
            return x->var == y->var && x->index == y->index;
        case NodeOp::Neg:
            return node_equal(x->a, y->a);
        case NodeOp::Call:
            return x->func == y->func && node_equal(x->a, y->a);
        default:
            return node_equal(x->a, y->a) && node_equal(x->b, y->b);
    }
}

// ---------------------------------------------------------------------------
// Evaluation points

/// Assignment of every variable to a complex value. `winding` is the integer
/// branch offset applied to every log/sqrt/non-integer power in this
/// evaluation; callers that track branches own it.
struct Assignment {
    std::vector<cplx> z, cz;
    cplx w{}, cw{};
    cplx lw{};
    bool has_lw = false;
    int winding = 0;

    cplx get(VarKind k, int index) const {
        switch (k) {
            case VarKind::Z:
                if (index < 1 || index > int(z.size()))
                    throw eval_error("variable z" + std::to_string(index) + " not assigned");
                return z[index - 1];
            case VarKind::CZ:
                if (index < 1 || index > int(cz.size()))
                    throw eval_error("variable cz" + std::to_string(index) + " not assigned");
                return cz[index - 1];
            case VarKind::W:
                return w;
            case VarKind::CW:
                return cw;
            case VarKind::LW:
                if (!has_lw) throw eval_error("variable Lw not assigned");
                return lw;
        }
        throw eval_error("bad variable");
    }
};

/// Variable slot layout for jets: z1..z_{nz}, cz1..cz_{nz}, w, cw, Lw.
struct VarTable {
    int nz = 1;
    int slots() const { return 2 * nz + 3; }
    int slot(VarKind k, int index) const {
        switch (k) {
            case VarKind::Z: return index - 1;
            case VarKind::CZ: return nz + index - 1;
            case VarKind::W: return 2 * nz;
            case VarKind::CW: return 2 * nz + 1;
            case VarKind::LW: return 2 * nz + 2;
        }
        return -1;
    }
};

/// Value with first (and optionally second) partials w.r.t. the VarTable
/// slots. Mixed second partials are stored symmetrically by construction.
struct Jet {
    cplx value{};
    std::vector<cplx> d;
    std::vector<cplx> dd;  // row-major nv x nv, order-2 only
    int order = 1;
    int nv = 0;

    Jet() = default;
    Jet(int vars, int ord) : d(vars, cplx{}), order(ord), nv(vars) {
        if (ord >= 2) dd.assign(std::size_t(vars) * vars, cplx{});
    }
    cplx& d2(int i, int j) { return dd[std::size_t(i) * nv + j]; }
    cplx d2(int i, int j) const { return dd[std::size_t(i) * nv + j]; }
};

namespace detail {

inline void check_finite(const cplx& v) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw eval_error("singular evaluation (non-finite value)");
}

inline Jet jet_const(cplx v, int nv, int ord) {
    Jet j(nv, ord);
    j.value = v;
    return j;
}

inline Jet jet_var(cplx v, int slot, int nv, int ord) {
    Jet j(nv, ord);
    j.value = v;
    j.d[slot] = 1.0;
    return j;
}

inline Jet jet_add(const Jet& x, const Jet& y, double sy = 1.0) {
    Jet r(x.nv, x.order);
    r.value = x.value + sy * y.value;
    for (int i = 0; i < x.nv; ++i) r.d[i] = x.d[i] + sy * y.d[i];
    if (x.order >= 2)
        for (std::size_t i = 0; i < x.dd.size(); ++i) r.dd[i] = x.dd[i] + sy * y.dd[i];
    return r;
}

inline Jet jet_neg(const Jet& x) {
    Jet r(x.nv, x.order);
    r.value = -x.value;
    for (int i = 0; i < x.nv; ++i) r.d[i] = -x.d[i];
    if (x.order >= 2)
        for (std::size_t i = 0; i < x.dd.size(); ++i) r.dd[i] = -x.dd[i];
    return r;
}

inline Jet jet_mul(const Jet& x, const Jet& y) {
    Jet r(x.nv, x.order);
    r.value = x.value * y.value;
    for (int i = 0; i < x.nv; ++i) r.d[i] = x.d[i] * y.value + x.value * y.d[i];
    if (x.order >= 2)
        for (int i = 0; i < x.nv; ++i)
            for (int j = 0; j < x.nv; ++j)
                r.d2(i, j) = x.d2(i, j) * y.value + x.d[i] * y.d[j] + x.d[j] * y.d[i] +
                             x.value * y.d2(i, j);
    return r;
}

/// Chain rule for a scalar function: f(value), f'(value), f''(value).
inline Jet jet_compose(const Jet& x, cplx f, cplx f1, cplx f2) {
    Jet r(x.nv, x.order);
    r.value = f;
    for (int i = 0; i < x.nv; ++i) r.d[i] = f1 * x.d[i];
    if (x.order >= 2)
        for (int i = 0; i < x.nv; ++i)
            for (int j = 0; j < x.nv; ++j)
                r.d2(i, j) = f2 * x.d[i] * x.d[j] + f1 * x.d2(i, j);
    return r;
}

inline Jet jet_inv(const Jet& x) {
    if (std::abs(x.value) == 0.0) throw eval_error("division by zero");
    cplx v = 1.0 / x.value;
    return jet_compose(x, v, -v * v, 2.0 * v * v * v);
}

inline Jet jet_div(const Jet& x, const Jet& y) { return jet_mul(x, jet_inv(y)); }

inline Jet jet_pow_int(const Jet& x, long long e) {
    if (e == 0) return jet_const(1.0, x.nv, x.order);
    if (e < 0) return jet_inv(jet_pow_int(x, -e));
    Jet acc = jet_const(1.0, x.nv, x.order);
    Jet base = x;
    unsigned long long k = (unsigned long long)e;
    while (k) {
        if (k & 1) acc = jet_mul(acc, base);
        base = (k >>= 1) ? jet_mul(base, base) : base;
    }
    return acc;
}

inline Jet jet_func(Func f, const Jet& x, int winding) {
    const cplx v = x.value;
    switch (f) {
        case Func::Exp: {
            cplx e = std::exp(v);
            return jet_compose(x, e, e, e);
        }
        case Func::Log: {
            cplx lv = log_branch(v, winding);
            cplx inv = 1.0 / v;
            return jet_compose(x, lv, inv, -inv * inv);
        }
        case Func::Sqrt: {
            if (std::abs(v) == 0.0) throw eval_error("sqrt at branch point 0");
            cplx s = std::exp(0.5 * log_branch(v, winding));
            cplx d1 = 0.5 / s;
            return jet_compose(x, s, d1, -0.25 / (s * s * s));
        }
        case Func::Sin:
            return jet_compose(x, std::sin(v), std::cos(v), -std::sin(v));
        case Func::Cos:
            return jet_compose(x, std::cos(v), -std::sin(v), -std::cos(v));
        case Func::Tan: {
            cplx c = std::cos(v);
            if (std::abs(c) == 0.0) throw eval_error("tan at pole");
            cplx t = std::sin(v) / c;
            cplx d1 = 1.0 + t * t;
            return jet_compose(x, t, d1, 2.0 * t * d1);
        }
    }
    throw eval_error("bad function");
}

/// Integer detection for exponents: |e - round(e)| == 0 and Im == 0.
inline std::optional<long long> as_exact_int(cplx v) {
    if (v.imag() != 0.0) return std::nullopt;
    double r = v.real();
    double n = std::nearbyint(r);
    if (r != n || std::abs(n) > 1e15) return std::nullopt;
    return (long long)n;
}

}  // namespace detail

// ---------------------------------------------------------------------------

/// AST of a complex-analytic expression. Immutable after construction; all
/// operations are pure, so a single tree may be evaluated concurrently.
class AnalyticExpr {
  public:
    AnalyticExpr() = default;
    explicit AnalyticExpr(NodePtr root) : root_(std::move(root)) {}

    const NodePtr& root() const { return root_; }
    bool empty() const { return !root_; }

    /// Largest z/cz index referenced (0 when none).
    int max_index() const { return max_index(root_); }
    bool uses(VarKind k) const { return uses(root_, k); }

    cplx eval(const Assignment& p) const {
        cplx v = eval(root_, p);
        detail::check_finite(v);
        return v;
    }

    Jet eval_jet(const Assignment& p, const VarTable& vt, int order) const {
        if (order != 1 && order != 2) throw error("jet order must be 1 or 2");
        Jet j = eval_jet(root_, p, vt, order);
        detail::check_finite(j.value);
        return j;
    }

    bool equals(const AnalyticExpr& o) const { return node_equal(root_, o.root_); }

    std::string pretty() const { return print(root_, 0); }

    /// Exchange holomorphic and antiholomorphic variables and conjugate
    /// every constant: the complexified conjugate expression.
    AnalyticExpr bar() const { return AnalyticExpr(bar(root_)); }

    /// Substitute an expression for a variable.
    AnalyticExpr substitute(VarKind k, int index, const AnalyticExpr& repl) const {
        return AnalyticExpr(subst(root_, k, index, repl.root_));
    }

  private:
    NodePtr root_;

    static int max_index(const NodePtr& n) {
        if (!n) return 0;
        int m = 0;
        if (n->op == NodeOp::Var && (n->var == VarKind::Z || n->var == VarKind::CZ)) m = n->index;
        if (n->a) m = std::max(m, max_index(n->a));
        if (n->b) m = std::max(m, max_index(n->b));
        return m;
    }

    static bool uses(const NodePtr& n, VarKind k) {
        if (!n) return false;
        if (n->op == NodeOp::Var && n->var == k) return true;
        return (n->a && uses(n->a, k)) || (n->b && uses(n->b, k));
    }

    static cplx eval(const NodePtr& n, const Assignment& p) {
        switch (n->op) {
            case NodeOp::Const: return n->value;
            case NodeOp::Var: return p.get(n->var, n->index);
            case NodeOp::Add: return eval(n->a, p) + eval(n->b, p);
            case NodeOp::Sub: return eval(n->a, p) - eval(n->b, p);
            case NodeOp::Mul: return eval(n->a, p) * eval(n->b, p);
            case NodeOp::Div: {
                cplx d = eval(n->b, p);
                if (std::abs(d) == 0.0) throw eval_error("division by zero");
                return eval(n->a, p) / d;
            }
            case NodeOp::Neg: return -eval(n->a, p);
            case NodeOp::Pow: {
                cplx base = eval(n->a, p);
                cplx e = eval(n->b, p);
                if (auto k = detail::as_exact_int(e)) {
                    if (*k == 0) return cplx(1.0);
                    if (*k < 0 && std::abs(base) == 0.0) throw eval_error("pole at 0");
                    cplx acc = 1.0, b2 = base;
                    unsigned long long m = (unsigned long long)std::llabs(*k);
                    while (m) {
                        if (m & 1) acc *= b2;
                        if (m >>= 1) b2 *= b2;
                    }
                    return *k < 0 ? 1.0 / acc : acc;
                }
                return std::exp(e * log_branch(base, p.winding));
            }
            case NodeOp::Call: {
                cplx v = eval(n->a, p);
                switch (n->func) {
                    case Func::Exp: return std::exp(v);
                    case Func::Log: return log_branch(v, p.winding);
                    case Func::Sqrt:
                        if (std::abs(v) == 0.0) throw eval_error("sqrt at branch point 0");
                        return std::exp(0.5 * log_branch(v, p.winding));
                    case Func::Sin: return std::sin(v);
                    case Func::Cos: return std::cos(v);
                    case Func::Tan: {
                        cplx c = std::cos(v);
                        if (std::abs(c) == 0.0) throw eval_error("tan at pole");
                        return std::sin(v) / c;
                    }
                }
            }
        }
        throw eval_error("bad node");
    }

    static Jet eval_jet(const NodePtr& n, const Assignment& p, const VarTable& vt, int ord) {
        const int nv = vt.slots();
        switch (n->op) {
            case NodeOp::Const: return detail::jet_const(n->value, nv, ord);
            case NodeOp::Var:
                return detail::jet_var(p.get(n->var, n->index), vt.slot(n->var, n->index), nv, ord);
            case NodeOp::Add:
                return detail::jet_add(eval_jet(n->a, p, vt, ord), eval_jet(n->b, p, vt, ord));
            case NodeOp::Sub:
                return detail::jet_add(eval_jet(n->a, p, vt, ord), eval_jet(n->b, p, vt, ord), -1.0);
            case NodeOp::Mul:
                return detail::jet_mul(eval_jet(n->a, p, vt, ord), eval_jet(n->b, p, vt, ord));
            case NodeOp::Div:
                return detail::jet_div(eval_jet(n->a, p, vt, ord), eval_jet(n->b, p, vt, ord));
            case NodeOp::Neg: return detail::jet_neg(eval_jet(n->a, p, vt, ord));
            case NodeOp::Pow: {
                Jet base = eval_jet(n->a, p, vt, ord);
                Jet e = eval_jet(n->b, p, vt, ord);
                bool e_const = true;
                for (const auto& g : e.d) e_const = e_const && std::abs(g) == 0.0;
                if (e_const) {
                    if (auto k = detail::as_exact_int(e.value))
                        return detail::jet_pow_int(base, *k);
                }
                // a^b = exp(b * log a) with the evaluation's branch offset.
                return detail::jet_func(Func::Exp,
                                        detail::jet_mul(e, detail::jet_func(Func::Log, base, p.winding)),
                                        0);
            }
            case NodeOp::Call:
                return detail::jet_func(n->func, eval_jet(n->a, p, vt, ord), p.winding);
        }
        throw eval_error("bad node");
    }

    static NodePtr bar(const NodePtr& n) {
        switch (n->op) {
            case NodeOp::Const: return ExprNode::constant(std::conj(n->value));
            case NodeOp::Var: {
                VarKind k = n->var;
                switch (k) {
                    case VarKind::Z: k = VarKind::CZ; break;
                    case VarKind::CZ: k = VarKind::Z; break;
                    case VarKind::W: k = VarKind::CW; break;
                    case VarKind::CW: k = VarKind::W; break;
                    case VarKind::LW: throw error("Lw has no conjugate form");
                }
                return ExprNode::variable(k, n->index);
            }
            case NodeOp::Neg: return ExprNode::neg(bar(n->a));
            case NodeOp::Call: return ExprNode::call(n->func, bar(n->a));
            default: return ExprNode::binary(n->op, bar(n->a), bar(n->b));
        }
    }

    static NodePtr subst(const NodePtr& n, VarKind k, int index, const NodePtr& repl) {
        switch (n->op) {
            case NodeOp::Const: return n;
            case NodeOp::Var:
                return (n->var == k && (n->index == index || (k != VarKind::Z && k != VarKind::CZ)))
                           ? repl
                           : n;
            case NodeOp::Neg: return ExprNode::neg(subst(n->a, k, index, repl));
            case NodeOp::Call: return ExprNode::call(n->func, subst(n->a, k, index, repl));
            default:
                return ExprNode::binary(n->op, subst(n->a, k, index, repl),
                                        subst(n->b, k, index, repl));
        }
    }

    // Precedence levels: 0 add, 1 mul, 2 unary, 3 pow operands.
    static std::string print(const NodePtr& n, int parent) {
        auto wrap = [&](const std::string& s, int level) {
            return level < parent ? "(" + s + ")" : s;
        };
        switch (n->op) {
            case NodeOp::Const: return wrap(print_const(n->value), const_level(n->value));
            case NodeOp::Var: {
                switch (n->var) {
                    case VarKind::Z: return "z" + std::to_string(n->index);
                    case VarKind::CZ: return "cz" + std::to_string(n->index);
                    case VarKind::W: return "w";
                    case VarKind::CW: return "cw";
                    case VarKind::LW: return "Lw";
                }
                return "?";
            }
            case NodeOp::Add: return wrap(print(n->a, 0) + " + " + print(n->b, 1), 0);
            case NodeOp::Sub: return wrap(print(n->a, 0) + " - " + print(n->b, 1), 0);
            case NodeOp::Mul: return wrap(print(n->a, 1) + "*" + print(n->b, 2), 1);
            case NodeOp::Div: return wrap(print(n->a, 1) + "/" + print(n->b, 2), 1);
            case NodeOp::Neg: return wrap("-" + print(n->a, 2), 1);
            case NodeOp::Pow: return wrap(print(n->a, 3) + "^" + print(n->b, 3), 2);
            case NodeOp::Call: {
                static const char* names[] = {"exp", "log", "sqrt", "sin", "cos", "tan"};
                return std::string(names[int(n->func)]) + "(" + print(n->a, 0) + ")";
            }
        }
        return "?";
    }

    static int const_level(cplx v) {
        if (v.imag() == 0.0) return v.real() < 0 ? 1 : 3;
        if (v.real() == 0.0) return v.imag() == 1.0 ? 3 : 1;
        return 0;
    }

    static std::string print_const(cplx v) {
        if (v.imag() == 0.0) {
            if (v.real() == pi) return "pi";
            if (v.real() < 0) return "-" + format_double(-v.real());
            return format_double(v.real());
        }
        if (v.real() == 0.0) {
            if (v.imag() == 1.0) return "i";
            if (v.imag() == -1.0) return "-i";
            if (v.imag() < 0) return "-" + format_double(-v.imag()) + "*i";
            return format_double(v.imag()) + "*i";
        }
        std::string re = print_const(cplx(v.real(), 0.0));
        std::string im = print_const(cplx(0.0, std::abs(v.imag())));
        return re + (v.imag() < 0 ? " - " : " + ") + im;
    }
};

// ---------------------------------------------------------------------------
// Parser

namespace detail {

class Parser {
  public:
    explicit Parser(std::string_view src) : src_(src) {}

    NodePtr parse_expr() {
        NodePtr x = parse_term();
        for (;;) {
            skip_ws();
            if (accept('+')) x = ExprNode::binary(NodeOp::Add, x, parse_term());
            else if (accept('-')) x = ExprNode::binary(NodeOp::Sub, x, parse_term());
            else return x;
        }
    }

    void expect_end() {
        skip_ws();
        if (pos_ != src_.size())
            throw parse_error("unexpected input; expected operator or end", pos_);
    }

    bool accept_top_level_eq() {
        skip_ws();
        if (pos_ < src_.size() && src_[pos_] == '=') {
            ++pos_;
            return true;
        }
        return false;
    }

    std::size_t pos() const { return pos_; }

  private:
    std::string_view src_;
    std::size_t pos_ = 0;

    void skip_ws() {
        while (pos_ < src_.size() && std::isspace((unsigned char)src_[pos_])) ++pos_;
    }
    bool accept(char c) {
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }
    void expect(char c, const char* what) {
        skip_ws();
        if (!accept(c)) throw parse_error(std::string("expected ") + what, pos_);
    }

    NodePtr parse_term() {
        NodePtr x = parse_factor();
        for (;;) {
            skip_ws();
            if (accept('*')) x = ExprNode::binary(NodeOp::Mul, x, parse_factor());
            else if (accept('/')) x = ExprNode::binary(NodeOp::Div, x, parse_factor());
            else return x;
        }
    }

    NodePtr parse_factor() {
        skip_ws();
        if (accept('-')) return ExprNode::neg(parse_factor());
        NodePtr x = parse_base();
        skip_ws();
        if (accept('^')) {
            skip_ws();
            bool neg = accept('-');
            NodePtr e = parse_base();
            if (neg) e = ExprNode::neg(e);
            return ExprNode::binary(NodeOp::Pow, x, e);
        }
        return x;
    }

    NodePtr parse_base() {
        skip_ws();
        if (pos_ >= src_.size())
            throw parse_error("expected number, identifier or '('", pos_);
        char c = src_[pos_];
        if (accept('(')) {
            NodePtr x = parse_expr();
            expect(')', "')'");
            return x;
        }
        if (std::isdigit((unsigned char)c) || c == '.') return parse_number();
        if (std::isalpha((unsigned char)c)) return parse_ident();
        throw parse_error("expected number, identifier or '('", pos_);
    }

    NodePtr parse_number() {
        std::size_t start = pos_;
        while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) ++pos_;
        if (pos_ < src_.size() && src_[pos_] == '.') {
            ++pos_;
            while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) ++pos_;
        }
        if (pos_ == start || (pos_ == start + 1 && src_[start] == '.'))
            throw parse_error("malformed number", start);
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t mark = pos_++;
            if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
            if (pos_ >= src_.size() || !std::isdigit((unsigned char)src_[pos_])) pos_ = mark;
            else
                while (pos_ < src_.size() && std::isdigit((unsigned char)src_[pos_])) ++pos_;
        }
        return ExprNode::constant(cplx(std::stod(std::string(src_.substr(start, pos_ - start))), 0.0));
    }

    NodePtr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
            ++pos_;
        std::string id(src_.substr(start, pos_ - start));
        if (id == "i") return ExprNode::constant(cplx(0.0, 1.0));
        if (id == "pi") return ExprNode::constant(cplx(pi, 0.0));
        if (id == "w") return ExprNode::variable(VarKind::W, 0);
        if (id == "cw") return ExprNode::variable(VarKind::CW, 0);
        if (id == "Lw") return ExprNode::variable(VarKind::LW, 0);
        if (auto v = var_with_index(id, "z", VarKind::Z)) return v;
        if (auto v = var_with_index(id, "cz", VarKind::CZ)) return v;
        static const std::pair<const char*, Func> funcs[] = {
            {"exp", Func::Exp}, {"log", Func::Log}, {"sqrt", Func::Sqrt},
            {"sin", Func::Sin}, {"cos", Func::Cos}, {"tan", Func::Tan}};
        for (auto& [name, f] : funcs)
            if (id == name) {
                expect('(', "'(' after function name");
                NodePtr arg = parse_expr();
                expect(')', "')'");
                return ExprNode::call(f, arg);
            }
        if (id == "conj") {
            expect('(', "'(' after conj");
            skip_ws();
            std::size_t vpos = pos_;
            NodePtr arg = parse_ident_var(vpos);
            expect(')', "')'");
            return arg;
        }
        throw parse_error("unknown identifier '" + id + "'", start);
    }

    static std::optional<int> index_suffix(const std::string& id, std::string_view prefix) {
        if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0)
            return std::nullopt;
        int idx = 0;
        for (std::size_t i = prefix.size(); i < id.size(); ++i) {
            if (!std::isdigit((unsigned char)id[i])) return std::nullopt;
            idx = idx * 10 + (id[i] - '0');
        }
        return idx;
    }

    NodePtr var_with_index(const std::string& id, std::string_view prefix, VarKind k) {
        if (auto idx = index_suffix(id, prefix)) {
            if (*idx < 1) throw parse_error("variable index must be >= 1", pos_);
            return ExprNode::variable(k, *idx);
        }
        return nullptr;
    }

    // conj(v): v must be a plain variable; flip holomorphic/antiholomorphic.
    NodePtr parse_ident_var(std::size_t at) {
        std::size_t start = pos_;
        while (pos_ < src_.size() &&
               (std::isalnum((unsigned char)src_[pos_]) || src_[pos_] == '_'))
            ++pos_;
        std::string id(src_.substr(start, pos_ - start));
        VarKind k;
        int idx = 0;
        if (id == "w") k = VarKind::CW;
        else if (id == "cw") k = VarKind::W;
        else if (auto v = index_suffix(id, "cz")) k = VarKind::Z, idx = *v;
        else if (auto v = index_suffix(id, "z")) k = VarKind::CZ, idx = *v;
        else throw parse_error("conj applies to a variable", at);
        if ((k == VarKind::Z || k == VarKind::CZ) && idx < 1)
            throw parse_error("variable index must be >= 1", at);
        return ExprNode::variable(k, idx);
    }
};

}  // namespace detail

/// Parse a DSL expression. Errors carry byte offsets.
inline AnalyticExpr parse(std::string_view source) {
    detail::Parser p(source);
    NodePtr root = p.parse_expr();
    p.expect_end();
    return AnalyticExpr(root);
}

/// Parse a defining equation: either "lhs = rhs" (result lhs - rhs) or a
/// bare expression already in vanishing form.
inline AnalyticExpr parse_defining(std::string_view source) {
    detail::Parser p(source);
    NodePtr lhs = p.parse_expr();
    if (p.accept_top_level_eq()) {
        NodePtr rhs = p.parse_expr();
        p.expect_end();
        return AnalyticExpr(ExprNode::binary(NodeOp::Sub, lhs, rhs));
    }
    p.expect_end();
    return AnalyticExpr(lhs);
}

}  // namespace segre
