#ifndef STATGEO_EXPR_HPP
#define STATGEO_EXPR_HPP

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace statgeo {

/// Thrown by parse() on malformed input; `offset` is the byte position.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& msg, std::size_t offset);
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

/// Thrown when evaluation hits a point outside an expression's domain
/// (log/sqrt of a negative number, division by zero, ...).
class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class UnaryOp { Neg, Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh };
enum class BinaryOp { Add, Sub, Mul, Div, Pow };

struct ExprNode;
using ExprNodePtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
    enum class Kind { Constant, Coord, Unary, Binary };
    Kind kind;
    double value = 0.0;  // Constant
    int coord = -1;      // Coord
    UnaryOp uop{};
    BinaryOp bop{};
    ExprNodePtr a, b;
};

/// Immutable scalar expression over chart coordinates. Nodes are shared,
/// so copies are cheap and subtrees built from common pieces form a DAG.
class Expr {
public:
    Expr() : node_(constant_node(0.0)) {}
    Expr(double c) : node_(constant_node(c)) {}
    explicit Expr(ExprNodePtr n) : node_(std::move(n)) {}

    static Expr constant(double c) { return Expr(c); }
    static Expr coord(int index);

    const ExprNode& node() const { return *node_; }
    const ExprNodePtr& ptr() const { return node_; }

    bool is_constant() const { return node_->kind == ExprNode::Kind::Constant; }
    bool is_constant(double c) const { return is_constant() && node_->value == c; }
    double constant_value() const { return node_->value; }

    /// Exact partial derivative with respect to coordinate `i`.
    Expr derivative(int i) const;

    /// Evaluate at a point (length must cover every coordinate reference).
    double evaluate(std::span<const double> point) const;

    std::string to_string() const;
    std::string to_string(const std::vector<std::string>& coord_names) const;

private:
    static ExprNodePtr constant_node(double c);
    ExprNodePtr node_;
};

Expr operator+(const Expr& x, const Expr& y);
Expr operator-(const Expr& x, const Expr& y);
Expr operator*(const Expr& x, const Expr& y);
Expr operator/(const Expr& x, const Expr& y);
Expr operator-(const Expr& x);

Expr pow(const Expr& base, const Expr& exponent);
Expr sin(const Expr& x);
Expr cos(const Expr& x);
Expr tan(const Expr& x);
Expr exp(const Expr& x);
Expr log(const Expr& x);
Expr sqrt(const Expr& x);
Expr sinh(const Expr& x);
Expr cosh(const Expr& x);
Expr tanh(const Expr& x);

/// Parse `text` against the coordinate list. Coordinates must be nonempty
/// and distinct; `pi` is a built-in constant.
Expr parse(std::string_view text, const std::vector<std::string>& coords);

/// Per-point evaluation context. Caches node values so that families of
/// expressions sharing subtrees are evaluated once per distinct node. The
/// evaluator keeps each evaluated root alive: cache keys are node addresses,
/// which must not be recycled while the cache is in use.
class Evaluator {
public:
    explicit Evaluator(std::span<const double> point) : point_(point) {}
    double operator()(const Expr& e);

private:
    double eval_node(const ExprNode* n);
    std::span<const double> point_;
    std::vector<ExprNodePtr> retained_;
    std::unordered_map<const ExprNode*, double> cache_;
};

}  // namespace statgeo

#endif
