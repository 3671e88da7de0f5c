#ifndef STATGEO_TENSOR_HPP
#define STATGEO_TENSOR_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace statgeo {

enum class Variance { Co, Contra };

/// Dense square matrix, row-major. Small sizes only (metrics, frames,
/// curvature operators, discrete Laplacians).
struct Matrix {
    int rows = 0, cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}
    static Matrix identity(int n);

    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

Matrix operator*(const Matrix& x, const Matrix& y);
Matrix transpose(const Matrix& m);
double frobenius_norm(const Matrix& m);

/// Inverse of a small SPD/general matrix via Gaussian elimination with
/// partial pivoting. Throws std::invalid_argument on (near-)singular input.
Matrix inverse(const Matrix& m);
double determinant(const Matrix& m);

/// Dense numeric multi-index array at a point with per-slot variance.
struct PointTensor {
    int dim = 0;
    std::vector<Variance> sig;
    std::vector<double> data;  // row-major, dim^rank entries

    PointTensor() = default;
    PointTensor(int n, std::vector<Variance> signature);

    int rank() const { return static_cast<int>(sig.size()); }
    std::size_t size() const { return data.size(); }

    double& at(std::span<const int> idx);
    double at(std::span<const int> idx) const;
    double& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
    double at(std::initializer_list<int> idx) const { return at(std::span<const int>(idx.begin(), idx.size())); }

    static PointTensor scalar(double v);
    static PointTensor vector(std::span<const double> comps);    // contravariant
    static PointTensor covector(std::span<const double> comps);  // covariant
    static PointTensor from_matrix(const Matrix& m, Variance row, Variance col);
    Matrix as_matrix() const;  // rank-2 only
};

PointTensor operator+(const PointTensor& s, const PointTensor& t);
PointTensor operator-(const PointTensor& s, const PointTensor& t);
PointTensor operator*(double c, const PointTensor& t);
double max_abs(const PointTensor& t);

/// Multi-index iteration helper: advances idx through dim^rank combinations.
bool next_index(std::span<int> idx, int dim);

/// Contraction of two slots. Slots of opposite variance contract directly;
/// slots of equal variance need the metric (both contravariant) or inverse
/// metric (both covariant) passed in `pairing`.
PointTensor contract(const PointTensor& t, int slot_a, int slot_b,
                     const std::optional<Matrix>& pairing = std::nullopt);

/// Full metric pairing of two same-signature tensors: covariant slots are
/// paired with g^{-1}, contravariant ones with g. This is the tensor-space
/// inner product (no 1/k! weight on antisymmetric inputs).
double inner_product(const Matrix& g, const PointTensor& s, const PointTensor& t);

/// Musical isomorphisms for g: flat lowers a vector, sharp raises a covector.
PointTensor flat(const Matrix& g, const PointTensor& v);
PointTensor sharp(const Matrix& g, const PointTensor& alpha);

/// g-orthonormal tangent frame; row i holds the coordinate components of e_i.
struct Frame {
    Matrix rows;
};

/// Deterministic Gram-Schmidt starting from the coordinate basis, processed
/// in index order. Throws std::invalid_argument if g is not SPD.
Frame gram_schmidt(const Matrix& g);

/// Differentiation action of an endomorphism A on a tensor:
/// minus A on every covariant slot, plus A on every contravariant slot.
PointTensor so_action(const Matrix& a, const PointTensor& s);

struct EigenDecomposition {
    std::vector<double> values;  // ascending
    Matrix vectors;              // column j is the eigenvector of values[j]
};

/// Cyclic Jacobi eigensolver for symmetric matrices. Deterministic: values
/// ascend, ties keep rotation order, and each eigenvector's first
/// significant component is made positive.
EigenDecomposition jacobi_eigen(const Matrix& s);

/// Eigenvalues only, via Householder tridiagonalization + implicit-shift QL.
/// Used for the large discrete spectra where eigenvectors are not needed.
std::vector<double> symmetric_eigenvalues(const Matrix& s);

}  // namespace statgeo

#endif
