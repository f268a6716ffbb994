#include "mirrorshift/expr.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <map>

namespace mirrorshift {

namespace {

std::string describe_expected(const std::vector<std::string>& expected) {
    std::string s;
    for (std::size_t i = 0; i < expected.size(); ++i) {
        if (i) s += expected.size() == 2 && i == 1 ? " or " : ", ";
        s += expected[i];
    }
    return s;
}

} // namespace

ParseError::ParseError(std::string msg, std::size_t off, std::vector<std::string> exp)
    : std::runtime_error(msg + " at offset " + std::to_string(off) +
                         (exp.empty() ? std::string() : ", expected " + describe_expected(exp))),
      offset(off), expected(std::move(exp)) {}

EvalError::EvalError(std::string msg, std::size_t off)
    : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Equals, Comma, End };

struct Token {
    Tok kind;
    std::size_t offset;
    double number = 0;
    std::string_view text{};
};

std::vector<Token> lex(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        std::size_t start = i;
        if ((c >= '0' && c <= '9') || (c == '.' && i + 1 < src.size() && src[i + 1] >= '0' && src[i + 1] <= '9')) {
            // strtod on a NUL-terminated copy of the tail; from_chars would do,
            // but strtod's accepted syntax matches the grammar exactly here.
            std::string tail(src.substr(i));
            char* end = nullptr;
            errno = 0;
            double v = std::strtod(tail.c_str(), &end);
            std::size_t len = static_cast<std::size_t>(end - tail.c_str());
            if (len == 0 || errno == ERANGE)
                throw ParseError("invalid number", start, {});
            out.push_back({Tok::Number, start, v, src.substr(i, len)});
            i += len;
            continue;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t j = i;
            while (j < src.size() &&
                   ((src[j] >= 'a' && src[j] <= 'z') || (src[j] >= 'A' && src[j] <= 'Z') ||
                    (src[j] >= '0' && src[j] <= '9') || src[j] == '_'))
                ++j;
            out.push_back({Tok::Ident, start, 0, src.substr(i, j - i)});
            i = j;
            continue;
        }
        switch (c) {
        case '+': out.push_back({Tok::Plus, start}); break;
        case '-': out.push_back({Tok::Minus, start}); break;
        case '*': out.push_back({Tok::Star, start}); break;
        case '/': out.push_back({Tok::Slash, start}); break;
        case '^': out.push_back({Tok::Caret, start}); break;
        case '(': out.push_back({Tok::LParen, start}); break;
        case ')': out.push_back({Tok::RParen, start}); break;
        case '=': out.push_back({Tok::Equals, start}); break;
        case ',': out.push_back({Tok::Comma, start}); break;
        default:
            throw ParseError(std::string("unexpected character '") + c + "'", start, {});
        }
        ++i;
    }
    out.push_back({Tok::End, src.size()});
    return out;
}

const std::map<std::string_view, Func>& function_table() {
    static const std::map<std::string_view, Func> table{
        {"sin", Func::Sin}, {"cos", Func::Cos},   {"tanh", Func::Tanh}, {"exp", Func::Exp},
        {"ln", Func::Ln},   {"sqrt", Func::Sqrt}, {"abs", Func::Abs},
    };
    return table;
}

} // namespace

class Parser {
  public:
    explicit Parser(std::string_view src) : tokens_(lex(src)) {}

    ExprAst parse_expr_only() {
        ExprAst ast;
        ast.root_ = parse_expr(ast, 0);
        expect_end();
        return ast;
    }

    ProfileSpec parse_profile() {
        const Token& head = peek();
        ProfileKind kind;
        if (head.kind == Tok::Ident && head.text == "eta")
            kind = ProfileKind::Eta;
        else if (head.kind == Tok::Ident && head.text == "alpha")
            kind = ProfileKind::Alpha;
        else
            throw ParseError("expected profile head", head.offset, {"eta", "alpha"});
        ++pos_;
        if (peek().kind != Tok::Equals)
            throw ParseError("expected '='", peek().offset, {"="});
        ++pos_;
        ExprAst ast;
        ast.root_ = parse_expr(ast, 0);
        expect_end();
        return ProfileSpec{kind, std::move(ast)};
    }

  private:
    std::vector<Token> tokens_;
    std::size_t pos_ = 0;

    const Token& peek() const { return tokens_[pos_]; }

    void expect_end() {
        if (peek().kind != Tok::End)
            throw ParseError("unexpected trailing input", peek().offset,
                             {"+", "-", "*", "/", "^", "end of input"});
    }

    int add_node(ExprAst& ast, ExprNode n) {
        ast.nodes_.push_back(n);
        return static_cast<int>(ast.nodes_.size()) - 1;
    }

    void check_depth(int depth) {
        if (depth > 200)
            throw ParseError("expression too deeply nested", peek().offset, {});
    }

    int parse_expr(ExprAst& ast, int depth) {
        check_depth(depth);
        int lhs = parse_term(ast, depth + 1);
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            Token op = peek();
            ++pos_;
            int rhs = parse_term(ast, depth + 1);
            lhs = add_node(ast, {op.kind == Tok::Plus ? NodeKind::Add : NodeKind::Sub, 0,
                                 Func::Sin, lhs, rhs, op.offset});
        }
        return lhs;
    }

    int parse_term(ExprAst& ast, int depth) {
        check_depth(depth);
        int lhs = parse_factor(ast, depth + 1);
        while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
            Token op = peek();
            ++pos_;
            int rhs = parse_factor(ast, depth + 1);
            lhs = add_node(ast, {op.kind == Tok::Star ? NodeKind::Mul : NodeKind::Div, 0,
                                 Func::Sin, lhs, rhs, op.offset});
        }
        return lhs;
    }

    int parse_factor(ExprAst& ast, int depth) {
        check_depth(depth);
        if (peek().kind == Tok::Minus) {
            Token op = peek();
            ++pos_;
            int child = parse_factor(ast, depth + 1);
            return add_node(ast, {NodeKind::Neg, 0, Func::Sin, child, -1, op.offset});
        }
        return parse_power(ast, depth + 1);
    }

    int parse_power(ExprAst& ast, int depth) {
        check_depth(depth);
        int base = parse_atom(ast, depth + 1);
        if (peek().kind == Tok::Caret) {
            Token op = peek();
            ++pos_;
            // Right-associative, and the exponent may carry a unary minus.
            int exponent = parse_factor(ast, depth + 1);
            return add_node(ast, {NodeKind::Pow, 0, Func::Sin, base, exponent, op.offset});
        }
        return base;
    }

    int parse_atom(ExprAst& ast, int depth) {
        check_depth(depth);
        const Token& t = peek();
        switch (t.kind) {
        case Tok::Number:
            ++pos_;
            return add_node(ast, {NodeKind::Number, t.number, Func::Sin, -1, -1, t.offset});
        case Tok::LParen: {
            ++pos_;
            int inner = parse_expr(ast, depth + 1);
            if (peek().kind != Tok::RParen)
                throw ParseError("unbalanced parenthesis", peek().offset, {")"});
            ++pos_;
            return inner;
        }
        case Tok::Ident: {
            if (t.text == "tau") {
                ++pos_;
                return add_node(ast, {NodeKind::Tau, 0, Func::Sin, -1, -1, t.offset});
            }
            if (t.text == "pi") {
                ++pos_;
                return add_node(ast, {NodeKind::Pi, 0, Func::Sin, -1, -1, t.offset});
            }
            auto it = function_table().find(t.text);
            if (it == function_table().end())
                throw ParseError("unknown identifier '" + std::string(t.text) + "'", t.offset,
                                 {"tau", "pi", "function name"});
            ++pos_;
            if (peek().kind != Tok::LParen)
                throw ParseError("expected function argument list", peek().offset, {"("});
            ++pos_;
            int arg = parse_expr(ast, depth + 1);
            if (peek().kind == Tok::Comma)
                throw ParseError("function '" + std::string(t.text) + "' takes one argument",
                                 peek().offset, {")"});
            if (peek().kind != Tok::RParen)
                throw ParseError("unbalanced parenthesis", peek().offset, {")"});
            ++pos_;
            return add_node(ast, {NodeKind::Call, 0, it->second, arg, -1, t.offset});
        }
        default:
            throw ParseError("expected expression", t.offset, {"number", "tau", "pi", "function name", "(", "-"});
        }
    }
};

ProfileSpec parse_profile(std::string_view source) { return Parser(source).parse_profile(); }

ExprAst parse_expression(std::string_view source) { return Parser(source).parse_expr_only(); }

namespace {

int node_prec(const ExprNode& n) {
    switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub: return 1;
    case NodeKind::Mul:
    case NodeKind::Div: return 2;
    case NodeKind::Neg: return 3;
    case NodeKind::Pow: return 4;
    default: return 5;
    }
}

/// Shortest decimal form that strtod maps back to exactly x.
std::string shortest_double(double x) {
    char buf[64];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

const char* func_name(Func f) {
    switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Tanh: return "tanh";
    case Func::Exp: return "exp";
    case Func::Ln: return "ln";
    case Func::Sqrt: return "sqrt";
    case Func::Abs: return "abs";
    }
    return "?";
}

} // namespace

void ExprAst::print_node(int idx, int parent_prec, bool right_side, std::string& out) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(idx)];
    int prec = node_prec(n);
    bool parens = false;
    if (parent_prec == 4)
        // Pow is right-associative: parenthesize an equal-precedence base,
        // and any lower-precedence operand on either side.
        parens = right_side ? prec < 4 : prec <= 4;
    else if (parent_prec > 0)
        // Left-associative levels: an equal-precedence right operand keeps
        // its parentheses so the reparse rebuilds the identical tree.
        parens = right_side ? prec <= parent_prec : prec < parent_prec;
    if (parens) out += '(';
    switch (n.kind) {
    case NodeKind::Number: out += shortest_double(n.number); break;
    case NodeKind::Tau: out += "tau"; break;
    case NodeKind::Pi: out += "pi"; break;
    case NodeKind::Neg:
        out += '-';
        print_node(n.a, 3, false, out);
        break;
    case NodeKind::Add:
    case NodeKind::Sub:
    case NodeKind::Mul:
    case NodeKind::Div: {
        char op = n.kind == NodeKind::Add ? '+' : n.kind == NodeKind::Sub ? '-' : n.kind == NodeKind::Mul ? '*' : '/';
        print_node(n.a, prec, false, out);
        out += op;
        print_node(n.b, prec, true, out);
        break;
    }
    case NodeKind::Pow:
        print_node(n.a, 4, false, out);
        out += '^';
        print_node(n.b, 4, true, out);
        break;
    case NodeKind::Call:
        out += func_name(n.func);
        out += '(';
        print_node(n.a, 0, false, out);
        out += ')';
        break;
    }
    if (parens) out += ')';
}

std::string ExprAst::print() const {
    std::string out;
    print_node(root_, 0, false, out);
    return out;
}

namespace {

bool same_subtree(const ExprAst& x, int ix, const ExprAst& y, int iy) {
    if (ix < 0 || iy < 0) return ix == iy;
    const ExprNode& a = x.nodes()[static_cast<std::size_t>(ix)];
    const ExprNode& b = y.nodes()[static_cast<std::size_t>(iy)];
    if (a.kind != b.kind) return false;
    switch (a.kind) {
    case NodeKind::Number: return a.number == b.number;
    case NodeKind::Tau:
    case NodeKind::Pi: return true;
    case NodeKind::Call:
        return a.func == b.func && same_subtree(x, a.a, y, b.a);
    case NodeKind::Neg: return same_subtree(x, a.a, y, b.a);
    default:
        return same_subtree(x, a.a, y, b.a) && same_subtree(x, a.b, y, b.b);
    }
}

} // namespace

bool ExprAst::same_tree(const ExprAst& other) const {
    return same_subtree(*this, root_, other, other.root());
}

namespace detail {

bool integer_constant(const ExprAst& ast, int idx, long long& out) {
    long long sign = 1;
    while (idx >= 0 && ast.nodes()[static_cast<std::size_t>(idx)].kind == NodeKind::Neg) {
        sign = -sign;
        idx = ast.nodes()[static_cast<std::size_t>(idx)].a;
    }
    if (idx < 0) return false;
    const ExprNode& n = ast.nodes()[static_cast<std::size_t>(idx)];
    if (n.kind != NodeKind::Number) return false;
    double v = n.number;
    if (!(v > -1e15 && v < 1e15)) return false;
    if (v != static_cast<double>(static_cast<long long>(v))) return false;
    out = sign * static_cast<long long>(v);
    return true;
}

} // namespace detail

std::array<double, 5> evaluate_with_derivatives(const ExprAst& expr, double tau, int order) {
    if (order < 0 || order > 4) throw std::invalid_argument("derivative order must be in [0,4]");
    std::array<double, 5> out{};
    Jet4 jet = expr.eval(Jet4::variable(tau));
    for (int k = 0; k <= order; ++k) out[static_cast<std::size_t>(k)] = jet.derivative(static_cast<std::size_t>(k));
    return out;
}

} // namespace mirrorshift
