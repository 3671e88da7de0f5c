#ifndef STATGEO_STRUCTURE_HPP
#define STATGEO_STRUCTURE_HPP

#include <optional>
#include <string>
#include <vector>

#include "statgeo/expr.hpp"
#include "statgeo/tensor.hpp"

namespace statgeo {

/// Thrown on malformed or semantically invalid structure files.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ConnectionKind { Hat, Nabla, Bar };

/// Multi-index array of symbolic components with per-slot variance.
struct TensorField {
    int dim = 0;
    std::vector<Variance> sig;
    std::vector<Expr> comps;  // row-major, dim^rank entries

    TensorField() = default;
    TensorField(int n, std::vector<Variance> signature);

    int rank() const { return static_cast<int>(sig.size()); }
    Expr& at(std::span<const int> idx);
    const Expr& at(std::span<const int> idx) const;
    Expr& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
    const Expr& at(std::initializer_list<int> idx) const {
        return at(std::span<const int>(idx.begin(), idx.size()));
    }

    PointTensor evaluate(Evaluator& ev) const;
    PointTensor evaluate(std::span<const double> point) const;
};

TensorField operator+(const TensorField& s, const TensorField& t);
TensorField operator-(const TensorField& s, const TensorField& t);
TensorField operator*(const Expr& c, const TensorField& t);

struct ValidationIssue {
    std::string check;          // e.g. "spd", "equiaffine", "periodicity"
    std::vector<double> point;  // where it was observed (may be empty)
    double residual = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> violations;
    bool trace_free = false;
    bool ricci_symmetric = false;  // dtau == 0 at the sampled points
    bool passed() const { return violations.empty(); }
};

/// A statistical structure on a coordinate chart: metric g, fully symmetric
/// cubic form C, optional periods, optional equiaffine weight phi. The
/// derived connections are nabla = hat + K and bar = hat - K with
/// g(K_X Y, Z) = C(X, Y, Z).
class StatStructure {
public:
    StatStructure(int n, std::vector<std::string> coord_names, TensorField g_field,
                  TensorField c_field, std::vector<std::optional<double>> periods = {},
                  std::optional<Expr> phi = std::nullopt);

    /// Parse the line-oriented structure file format.
    static StatStructure load(const std::string& text);
    static StatStructure load_file(const std::string& path);

    int dim() const { return n_; }
    const std::vector<std::string>& coords() const { return coords_; }
    const TensorField& metric() const { return g_; }
    const TensorField& cubic() const { return c_; }
    const std::optional<Expr>& phi() const { return phi_; }
    std::optional<double> period(int i) const { return periods_[i]; }
    bool fully_periodic() const;

    const TensorField& metric_inverse() const;  // adjugate/determinant, exact
    const Expr& det_metric() const;
    Expr sqrt_det_metric() const;

    /// Connection coefficients Gamma^k_{ij}; slot order (k, i, j).
    const TensorField& christoffel(ConnectionKind kind) const;
    /// Difference tensor K^k_{ij} = g^{kl} C_{ijl}; slot order (k, i, j).
    const TensorField& difference_tensor() const;
    /// E = tr_g K (contravariant) and tau = E-flat (tau(X) = tr K_X).
    const TensorField& trace_vector() const;
    const TensorField& tau() const;

    /// Covariant derivative: adds one covariant slot in front, so
    /// (nabla f)(X, ...) = (nabla_X f)(...).
    TensorField covariant_derivative(ConnectionKind kind, const TensorField& f) const;

    /// S_X = nabla X as a (1,1) field: (S_X)^k_j = d_j X^k + Gamma^k_{jm} X^m.
    TensorField s_field(ConnectionKind kind, const TensorField& x) const;

    /// Divergence relative to the metric volume form.
    Expr divergence_metric(const TensorField& x) const;
    /// Divergence relative to a connection: tr S_X.
    Expr divergence_connection(ConnectionKind kind, const TensorField& x) const;

    /// Pointwise metric evaluation helpers.
    Matrix metric_at(Evaluator& ev) const;
    Matrix metric_inverse_at(Evaluator& ev) const;

    bool is_trace_free(std::span<const std::vector<double>> points, double tol = 1e-10) const;

    ValidationReport validate(std::span<const std::vector<double>> points) const;

private:
    int n_;
    std::vector<std::string> coords_;
    TensorField g_;  // (0,2) symmetric
    TensorField c_;  // (0,3) fully symmetric
    std::vector<std::optional<double>> periods_;
    std::optional<Expr> phi_;

    mutable std::optional<TensorField> ginv_, chr_hat_, chr_nabla_, chr_bar_, k_, e_, tau_;
    mutable std::optional<Expr> detg_;
};

/// Directional derivative of a scalar: X(f) = X^i d_i f.
Expr directional_derivative(const TensorField& x, const Expr& f);

/// Exterior derivative of a symbolic 1-form: (d tau)_{ij} = d_i tau_j - d_j tau_i.
TensorField d_one_form(const TensorField& tau);

}  // namespace statgeo

#endif
