#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mirrorshift/taylor.hpp"

namespace mirrorshift {

/// Parse failure: byte offset into the source plus the tokens that would have
/// been accepted at that position.
struct ParseError : std::runtime_error {
    std::size_t offset;
    std::vector<std::string> expected;
    ParseError(std::string msg, std::size_t off, std::vector<std::string> exp);
};

/// Evaluation failure (ln of a non-positive value, division by zero, ...)
/// carrying the byte offset of the offending node.
struct EvalError : std::runtime_error {
    std::size_t offset;
    EvalError(std::string msg, std::size_t off);
};

inline double value_of(double x) { return x; }
template <typename T, std::size_t N>
double value_of(const Taylor<T, N>& x) { return static_cast<double>(x.c[0]); }

enum class NodeKind { Number, Tau, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };
enum class Func { Sin, Cos, Tanh, Exp, Ln, Sqrt, Abs };

struct ExprNode {
    NodeKind kind;
    double number = 0;      // Number
    Func func = Func::Sin;  // Call
    int a = -1, b = -1;     // child indices
    std::size_t offset = 0; // byte offset in source, for diagnostics
};

namespace detail {
template <typename T>
T eval_func(Func f, const T& x, std::size_t offset) {
    using mirrorshift::abs;
    using mirrorshift::cos;
    using mirrorshift::exp;
    using mirrorshift::log;
    using mirrorshift::sin;
    using mirrorshift::sqrt;
    using mirrorshift::tanh;
    using std::abs;
    using std::cos;
    using std::exp;
    using std::log;
    using std::sin;
    using std::sqrt;
    using std::tanh;
    switch (f) {
    case Func::Sin: return sin(x);
    case Func::Cos: return cos(x);
    case Func::Tanh: return tanh(x);
    case Func::Exp: return exp(x);
    case Func::Ln:
        if (!(value_of(x) > 0.0)) throw EvalError("ln of non-positive value", offset);
        return log(x);
    case Func::Sqrt:
        if (value_of(x) < 0.0) throw EvalError("sqrt of negative value", offset);
        return sqrt(x);
    case Func::Abs: return abs(x);
    }
    throw EvalError("corrupt function node", offset);
}
} // namespace detail

/// Immutable expression tree in a flat node pool.
class ExprAst {
  public:
    template <typename T>
    T eval(const T& tau) const;

    std::string print() const;
    bool same_tree(const ExprAst& other) const;

    const std::vector<ExprNode>& nodes() const { return nodes_; }
    int root() const { return root_; }

  private:
    friend class Parser;
    std::vector<ExprNode> nodes_;
    int root_ = -1;

    template <typename T>
    T eval_node(int idx, const T& tau) const;
    void print_node(int idx, int parent_prec, bool right_side, std::string& out) const;
};

namespace detail {
bool integer_constant(const ExprAst& ast, int idx, long long& out);
} // namespace detail

template <typename T>
T ExprAst::eval(const T& tau) const {
    return eval_node(root_, tau);
}

template <typename T>
T ExprAst::eval_node(int idx, const T& tau) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(idx)];
    switch (n.kind) {
    case NodeKind::Number: return T(n.number);
    case NodeKind::Tau: return tau;
    case NodeKind::Pi: return T(3.14159265358979323846);
    case NodeKind::Neg: return -eval_node(n.a, tau);
    case NodeKind::Add: return eval_node(n.a, tau) + eval_node(n.b, tau);
    case NodeKind::Sub: return eval_node(n.a, tau) - eval_node(n.b, tau);
    case NodeKind::Mul: return eval_node(n.a, tau) * eval_node(n.b, tau);
    case NodeKind::Div: {
        T num = eval_node(n.a, tau);
        T den = eval_node(n.b, tau);
        if (value_of(den) == 0.0) throw EvalError("division by zero", n.offset);
        return num / den;
    }
    case NodeKind::Pow: {
        long long k;
        if (detail::integer_constant(*this, n.b, k)) {
            T base = eval_node(n.a, tau);
            if (k < 0 && value_of(base) == 0.0) throw EvalError("zero raised to negative power", n.offset);
            return powi(base, k);
        }
        T base = eval_node(n.a, tau);
        if (!(value_of(base) > 0.0)) throw EvalError("non-integer power of non-positive base", n.offset);
        using mirrorshift::exp;
        using mirrorshift::log;
        using std::exp;
        using std::log;
        return exp(eval_node(n.b, tau) * log(base));
    }
    case NodeKind::Call: return detail::eval_func(n.func, eval_node(n.a, tau), n.offset);
    }
    throw EvalError("corrupt expression tree", n.offset);
}

enum class ProfileKind { Eta, Alpha };

struct ProfileSpec {
    ProfileKind kind;
    ExprAst expr;
};

/// Parses `("eta"|"alpha") "=" expr`. Throws ParseError.
ProfileSpec parse_profile(std::string_view source);

/// Parses a bare expression (no "eta =" head).
ExprAst parse_expression(std::string_view source);

/// Value and derivatives 1..order (order <= 4) at tau.
std::array<double, 5> evaluate_with_derivatives(const ExprAst& expr, double tau, int order);

} // namespace mirrorshift
