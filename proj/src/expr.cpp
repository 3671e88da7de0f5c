#include "statgeo/expr.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>

namespace statgeo {

ParseError::ParseError(const std::string& msg, std::size_t offset)
    : std::runtime_error(msg + " (byte " + std::to_string(offset) + ")"), offset_(offset) {}

namespace {

ExprNodePtr make_node(ExprNode n) { return std::make_shared<const ExprNode>(std::move(n)); }

ExprNodePtr make_constant(double c) {
    ExprNode n;
    n.kind = ExprNode::Kind::Constant;
    n.value = c;
    return make_node(std::move(n));
}

ExprNodePtr make_unary(UnaryOp op, ExprNodePtr a) {
    ExprNode n;
    n.kind = ExprNode::Kind::Unary;
    n.uop = op;
    n.a = std::move(a);
    return make_node(std::move(n));
}

ExprNodePtr make_binary(BinaryOp op, ExprNodePtr a, ExprNodePtr b) {
    ExprNode n;
    n.kind = ExprNode::Kind::Binary;
    n.bop = op;
    n.a = std::move(a);
    n.b = std::move(b);
    return make_node(std::move(n));
}

bool is_const(const Expr& e, double c) { return e.is_constant(c); }

double apply_unary_checked(UnaryOp op, double x, const ExprNode* node);

std::string node_to_string(const ExprNode* n);

}  // namespace

ExprNodePtr Expr::constant_node(double c) { return make_constant(c); }

Expr Expr::coord(int index) {
    if (index < 0) throw std::invalid_argument("coordinate index must be nonnegative");
    ExprNode n;
    n.kind = ExprNode::Kind::Coord;
    n.coord = index;
    return Expr(make_node(std::move(n)));
}

// ---------------------------------------------------------------------------
// construction with light simplification (constant folding, 0/1 identities)

Expr operator+(const Expr& x, const Expr& y) {
    if (x.is_constant() && y.is_constant()) return Expr(x.constant_value() + y.constant_value());
    if (is_const(x, 0.0)) return y;
    if (is_const(y, 0.0)) return x;
    return Expr(make_binary(BinaryOp::Add, x.ptr(), y.ptr()));
}

Expr operator-(const Expr& x, const Expr& y) {
    if (x.is_constant() && y.is_constant()) return Expr(x.constant_value() - y.constant_value());
    if (is_const(y, 0.0)) return x;
    if (is_const(x, 0.0)) return -y;
    return Expr(make_binary(BinaryOp::Sub, x.ptr(), y.ptr()));
}

Expr operator*(const Expr& x, const Expr& y) {
    if (x.is_constant() && y.is_constant()) return Expr(x.constant_value() * y.constant_value());
    if (is_const(x, 0.0) || is_const(y, 0.0)) return Expr(0.0);
    if (is_const(x, 1.0)) return y;
    if (is_const(y, 1.0)) return x;
    return Expr(make_binary(BinaryOp::Mul, x.ptr(), y.ptr()));
}

Expr operator/(const Expr& x, const Expr& y) {
    if (x.is_constant() && y.is_constant() && y.constant_value() != 0.0)
        return Expr(x.constant_value() / y.constant_value());
    if (is_const(x, 0.0) && !is_const(y, 0.0)) return Expr(0.0);
    if (is_const(y, 1.0)) return x;
    return Expr(make_binary(BinaryOp::Div, x.ptr(), y.ptr()));
}

Expr operator-(const Expr& x) {
    if (x.is_constant()) return Expr(-x.constant_value());
    if (x.node().kind == ExprNode::Kind::Unary && x.node().uop == UnaryOp::Neg)
        return Expr(x.node().a);
    return Expr(make_unary(UnaryOp::Neg, x.ptr()));
}

Expr pow(const Expr& base, const Expr& exponent) {
    if (is_const(exponent, 1.0)) return base;
    if (is_const(exponent, 0.0)) return Expr(1.0);
    if (base.is_constant() && exponent.is_constant()) {
        double b = base.constant_value(), e = exponent.constant_value();
        if (b > 0.0 || e == std::floor(e)) return Expr(std::pow(b, e));
    }
    return Expr(make_binary(BinaryOp::Pow, base.ptr(), exponent.ptr()));
}

namespace {
Expr unary(UnaryOp op, const Expr& x) {
    if (x.is_constant()) return Expr(apply_unary_checked(op, x.constant_value(), x.ptr().get()));
    return Expr(make_unary(op, x.ptr()));
}
}  // namespace

Expr sin(const Expr& x) { return unary(UnaryOp::Sin, x); }
Expr cos(const Expr& x) { return unary(UnaryOp::Cos, x); }
Expr tan(const Expr& x) { return unary(UnaryOp::Tan, x); }
Expr exp(const Expr& x) { return unary(UnaryOp::Exp, x); }
Expr log(const Expr& x) { return unary(UnaryOp::Log, x); }
Expr sqrt(const Expr& x) { return unary(UnaryOp::Sqrt, x); }
Expr sinh(const Expr& x) { return unary(UnaryOp::Sinh, x); }
Expr cosh(const Expr& x) { return unary(UnaryOp::Cosh, x); }
Expr tanh(const Expr& x) { return unary(UnaryOp::Tanh, x); }

// ---------------------------------------------------------------------------
// differentiation

Expr Expr::derivative(int i) const {
    const ExprNode& n = *node_;
    switch (n.kind) {
        case ExprNode::Kind::Constant:
            return Expr(0.0);
        case ExprNode::Kind::Coord:
            return Expr(n.coord == i ? 1.0 : 0.0);
        case ExprNode::Kind::Unary: {
            Expr a(n.a);
            Expr da = a.derivative(i);
            switch (n.uop) {
                case UnaryOp::Neg: return -da;
                case UnaryOp::Sin: return cos(a) * da;
                case UnaryOp::Cos: return -(sin(a) * da);
                case UnaryOp::Tan: return da / (cos(a) * cos(a));
                case UnaryOp::Exp: return Expr(node_) * da;
                case UnaryOp::Log: return da / a;
                case UnaryOp::Sqrt: return da / (Expr(2.0) * Expr(node_));
                case UnaryOp::Sinh: return cosh(a) * da;
                case UnaryOp::Cosh: return sinh(a) * da;
                case UnaryOp::Tanh: return da / (cosh(a) * cosh(a));
            }
            break;
        }
        case ExprNode::Kind::Binary: {
            Expr a(n.a), b(n.b);
            switch (n.bop) {
                case BinaryOp::Add: return a.derivative(i) + b.derivative(i);
                case BinaryOp::Sub: return a.derivative(i) - b.derivative(i);
                case BinaryOp::Mul: return a.derivative(i) * b + a * b.derivative(i);
                case BinaryOp::Div: {
                    Expr da = a.derivative(i), db = b.derivative(i);
                    if (db.is_constant(0.0)) return da / b;
                    return (da * b - a * db) / (b * b);
                }
                case BinaryOp::Pow: {
                    Expr da = a.derivative(i), db = b.derivative(i);
                    if (b.is_constant()) {
                        double e = b.constant_value();
                        return Expr(e) * pow(a, Expr(e - 1.0)) * da;
                    }
                    // f^g -> f^g * (g' log f + g f'/f)
                    return Expr(node_) * (db * log(a) + b * da / a);
                }
            }
            break;
        }
    }
    throw std::logic_error("unreachable expression node kind");
}

// ---------------------------------------------------------------------------
// evaluation

namespace {

double apply_unary_checked(UnaryOp op, double x, const ExprNode* node) {
    switch (op) {
        case UnaryOp::Neg: return -x;
        case UnaryOp::Sin: return std::sin(x);
        case UnaryOp::Cos: return std::cos(x);
        case UnaryOp::Tan: return std::tan(x);
        case UnaryOp::Exp: return std::exp(x);
        case UnaryOp::Log:
            if (x <= 0.0) throw EvalError("log of non-positive value in " + node_to_string(node));
            return std::log(x);
        case UnaryOp::Sqrt:
            if (x < 0.0) throw EvalError("sqrt of negative value in " + node_to_string(node));
            return std::sqrt(x);
        case UnaryOp::Sinh: return std::sinh(x);
        case UnaryOp::Cosh: return std::cosh(x);
        case UnaryOp::Tanh: return std::tanh(x);
    }
    throw std::logic_error("unreachable unary op");
}

double apply_binary_checked(BinaryOp op, double x, double y, const ExprNode* node) {
    switch (op) {
        case BinaryOp::Add: return x + y;
        case BinaryOp::Sub: return x - y;
        case BinaryOp::Mul: return x * y;
        case BinaryOp::Div:
            if (y == 0.0) throw EvalError("division by zero in " + node_to_string(node));
            return x / y;
        case BinaryOp::Pow:
            if (x < 0.0 && y != std::floor(y))
                throw EvalError("non-integer power of negative base in " + node_to_string(node));
            if (x == 0.0 && y < 0.0)
                throw EvalError("zero raised to negative power in " + node_to_string(node));
            return std::pow(x, y);
    }
    throw std::logic_error("unreachable binary op");
}

}  // namespace

double Evaluator::eval_node(const ExprNode* n) {
    if (n->kind == ExprNode::Kind::Constant) return n->value;
    if (n->kind == ExprNode::Kind::Coord) {
        if (n->coord >= static_cast<int>(point_.size()))
            throw EvalError("point has too few components for coordinate reference");
        return point_[n->coord];
    }
    auto it = cache_.find(n);
    if (it != cache_.end()) return it->second;
    double r;
    if (n->kind == ExprNode::Kind::Unary) {
        r = apply_unary_checked(n->uop, eval_node(n->a.get()), n);
    } else {
        r = apply_binary_checked(n->bop, eval_node(n->a.get()), eval_node(n->b.get()), n);
    }
    cache_.emplace(n, r);
    return r;
}

double Evaluator::operator()(const Expr& e) {
    retained_.push_back(e.ptr());
    return eval_node(e.ptr().get());
}

double Expr::evaluate(std::span<const double> point) const {
    Evaluator ev(point);
    return ev(*this);
}

// ---------------------------------------------------------------------------
// printing

namespace {

// precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom
int precedence(const ExprNode* n) {
    switch (n->kind) {
        case ExprNode::Kind::Constant: return n->value < 0.0 ? 3 : 5;
        case ExprNode::Kind::Coord: return 5;
        case ExprNode::Kind::Unary: return n->uop == UnaryOp::Neg ? 3 : 5;
        case ExprNode::Kind::Binary:
            switch (n->bop) {
                case BinaryOp::Add:
                case BinaryOp::Sub: return 1;
                case BinaryOp::Mul:
                case BinaryOp::Div: return 2;
                case BinaryOp::Pow: return 4;
            }
    }
    return 5;
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(std::numeric_limits<double>::max_digits10);
    os << v;
    return os.str();
}

const char* unary_name(UnaryOp op) {
    switch (op) {
        case UnaryOp::Neg: return "-";
        case UnaryOp::Sin: return "sin";
        case UnaryOp::Cos: return "cos";
        case UnaryOp::Tan: return "tan";
        case UnaryOp::Exp: return "exp";
        case UnaryOp::Log: return "log";
        case UnaryOp::Sqrt: return "sqrt";
        case UnaryOp::Sinh: return "sinh";
        case UnaryOp::Cosh: return "cosh";
        case UnaryOp::Tanh: return "tanh";
    }
    return "?";
}

struct PrintCtx {
    const std::vector<std::string>* names = nullptr;
};

void print_node(std::ostringstream& os, const ExprNode* n, const PrintCtx& ctx);

void print_child(std::ostringstream& os, const ExprNode* c, int min_prec, const PrintCtx& ctx) {
    if (precedence(c) < min_prec) {
        os << '(';
        print_node(os, c, ctx);
        os << ')';
    } else {
        print_node(os, c, ctx);
    }
}

void print_node(std::ostringstream& os, const ExprNode* n, const PrintCtx& ctx) {
    switch (n->kind) {
        case ExprNode::Kind::Constant:
            os << format_double(n->value);
            return;
        case ExprNode::Kind::Coord:
            if (ctx.names && n->coord < static_cast<int>(ctx.names->size()))
                os << (*ctx.names)[n->coord];
            else
                os << "x" << n->coord;
            return;
        case ExprNode::Kind::Unary:
            if (n->uop == UnaryOp::Neg) {
                os << '-';
                print_child(os, n->a.get(), 4, ctx);
            } else {
                os << unary_name(n->uop) << '(';
                print_node(os, n->a.get(), ctx);
                os << ')';
            }
            return;
        case ExprNode::Kind::Binary: {
            switch (n->bop) {
                case BinaryOp::Add:
                    print_child(os, n->a.get(), 1, ctx);
                    os << " + ";
                    print_child(os, n->b.get(), 2, ctx);
                    return;
                case BinaryOp::Sub:
                    print_child(os, n->a.get(), 1, ctx);
                    os << " - ";
                    print_child(os, n->b.get(), 2, ctx);
                    return;
                case BinaryOp::Mul:
                    print_child(os, n->a.get(), 2, ctx);
                    os << "*";
                    print_child(os, n->b.get(), 3, ctx);
                    return;
                case BinaryOp::Div:
                    print_child(os, n->a.get(), 2, ctx);
                    os << "/";
                    print_child(os, n->b.get(), 3, ctx);
                    return;
                case BinaryOp::Pow:
                    print_child(os, n->a.get(), 5, ctx);
                    os << "^";
                    print_child(os, n->b.get(), 4, ctx);
                    return;
            }
        }
    }
}

std::string node_to_string(const ExprNode* n, const PrintCtx& ctx) {
    std::ostringstream os;
    print_node(os, n, ctx);
    return os.str();
}

std::string node_to_string(const ExprNode* n) { return node_to_string(n, PrintCtx{}); }

}  // namespace

std::string Expr::to_string() const { return node_to_string(node_.get()); }

std::string Expr::to_string(const std::vector<std::string>& coord_names) const {
    return node_to_string(node_.get(), PrintCtx{&coord_names});
}

// ---------------------------------------------------------------------------
// parser
//
// expr   := term { ("+"|"-") term }
// term   := factor { ("*"|"/") factor }
// factor := [ "-" ] power
// power  := atom [ "^" factor ]
// atom   := NUMBER | IDENT | FUNC "(" expr ")" | "(" expr ")"

namespace {

class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& coords)
        : text_(text), coords_(coords) {
        if (coords.empty()) throw std::invalid_argument("coordinate list must be nonempty");
    }

    Expr run() {
        Expr e = parse_expr();
        skip_ws();
        if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
        return e;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '#') {  // comment to end of line
                while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                ++pos_;
            } else {
                break;
            }
        }
    }

    bool peek(char c) {
        skip_ws();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    bool accept(char c) {
        if (peek(c)) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    }

    Expr parse_expr() {
        Expr e = parse_term();
        for (;;) {
            if (accept('+'))
                e = e + parse_term();
            else if (accept('-'))
                e = e - parse_term();
            else
                return e;
        }
    }

    Expr parse_term() {
        Expr e = parse_factor();
        for (;;) {
            if (accept('*'))
                e = e * parse_factor();
            else if (accept('/'))
                e = e / parse_factor();
            else
                return e;
        }
    }

    Expr parse_factor() {
        if (accept('-')) return -parse_power();
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (accept('^')) return pow(base, parse_factor());
        return base;
    }

    Expr parse_atom() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
        char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Expr e = parse_expr();
            expect(')');
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    Expr parse_number() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        }
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            std::size_t mark = pos_;
            ++pos_;
            if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
            if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                    ++pos_;
            } else {
                pos_ = mark;  // 'e' belongs to something else
            }
        }
        std::string tok(text_.substr(start, pos_ - start));
        try {
            return Expr(std::stod(tok));
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + tok + "'", start);
        }
    }

    Expr parse_ident() {
        std::size_t start = pos_;
        while (pos_ < text_.size() &&
               (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        std::string name(text_.substr(start, pos_ - start));

        static const std::unordered_map<std::string, UnaryOp> funcs = {
            {"sin", UnaryOp::Sin},   {"cos", UnaryOp::Cos},   {"tan", UnaryOp::Tan},
            {"exp", UnaryOp::Exp},   {"log", UnaryOp::Log},   {"sqrt", UnaryOp::Sqrt},
            {"sinh", UnaryOp::Sinh}, {"cosh", UnaryOp::Cosh}, {"tanh", UnaryOp::Tanh}};

        if (auto it = funcs.find(name); it != funcs.end()) {
            expect('(');
            Expr arg = parse_expr();
            expect(')');
            switch (it->second) {
                case UnaryOp::Sin: return sin(arg);
                case UnaryOp::Cos: return cos(arg);
                case UnaryOp::Tan: return tan(arg);
                case UnaryOp::Exp: return exp(arg);
                case UnaryOp::Log: return log(arg);
                case UnaryOp::Sqrt: return sqrt(arg);
                case UnaryOp::Sinh: return sinh(arg);
                case UnaryOp::Cosh: return cosh(arg);
                case UnaryOp::Tanh: return tanh(arg);
                default: break;
            }
        }
        if (name == "pi") return Expr(3.141592653589793);
        for (std::size_t i = 0; i < coords_.size(); ++i)
            if (coords_[i] == name) return Expr::coord(static_cast<int>(i));
        throw ParseError("unknown identifier \"" + name + "\"", start);
    }

    std::string_view text_;
    const std::vector<std::string>& coords_;
    std::size_t pos_ = 0;
};

}  // namespace

Expr parse(std::string_view text, const std::vector<std::string>& coords) {
    return Parser(text, coords).run();
}

}  // namespace statgeo
