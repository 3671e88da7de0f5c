#include "statgeo/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace statgeo {

Matrix Matrix::identity(int n) {
    Matrix m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix operator*(const Matrix& x, const Matrix& y) {
    if (x.cols != y.rows) throw std::invalid_argument("matrix shape mismatch");
    Matrix r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            double v = x(i, k);
            if (v == 0.0) continue;
            for (int j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

Matrix transpose(const Matrix& m) {
    Matrix r(m.cols, m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(j, i) = m(i, j);
    return r;
}

double frobenius_norm(const Matrix& m) {
    double s = 0.0;
    for (double v : m.a) s += v * v;
    return std::sqrt(s);
}

namespace {

// LU with partial pivoting; returns permutation sign, factors in place.
int lu_decompose(Matrix& m, std::vector<int>& perm) {
    int n = m.rows;
    perm.resize(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    int sign = 1;
    for (int col = 0; col < n; ++col) {
        int pivot = col;
        double best = std::abs(m(col, col));
        for (int r = col + 1; r < n; ++r)
            if (std::abs(m(r, col)) > best) {
                best = std::abs(m(r, col));
                pivot = r;
            }
        if (best == 0.0) throw std::invalid_argument("singular matrix");
        if (pivot != col) {
            for (int j = 0; j < n; ++j) std::swap(m.a[pivot * n + j], m.a[col * n + j]);
            std::swap(perm[pivot], perm[col]);
            sign = -sign;
        }
        for (int r = col + 1; r < n; ++r) {
            double f = m(r, col) / m(col, col);
            m(r, col) = f;
            for (int j = col + 1; j < n; ++j) m(r, j) -= f * m(col, j);
        }
    }
    return sign;
}

}  // namespace

Matrix inverse(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("inverse of non-square matrix");
    int n = m.rows;
    Matrix lu = m;
    std::vector<int> perm;
    lu_decompose(lu, perm);
    Matrix inv(n, n);
    std::vector<double> col(n), y(n);
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < n; ++i) col[i] = (perm[i] == c) ? 1.0 : 0.0;
        for (int i = 0; i < n; ++i) {
            y[i] = col[i];
            for (int j = 0; j < i; ++j) y[i] -= lu(i, j) * y[j];
        }
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) y[i] -= lu(i, j) * y[j];
            y[i] /= lu(i, i);
        }
        for (int i = 0; i < n; ++i) inv(i, c) = y[i];
    }
    return inv;
}

double determinant(const Matrix& m) {
    if (m.rows != m.cols) throw std::invalid_argument("determinant of non-square matrix");
    Matrix lu = m;
    std::vector<int> perm;
    int sign;
    try {
        sign = lu_decompose(lu, perm);
    } catch (const std::invalid_argument&) {
        return 0.0;
    }
    double d = sign;
    for (int i = 0; i < m.rows; ++i) d *= lu(i, i);
    return d;
}

// ---------------------------------------------------------------------------
// PointTensor

PointTensor::PointTensor(int n, std::vector<Variance> signature) : dim(n), sig(std::move(signature)) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < sig.size(); ++i) total *= static_cast<std::size_t>(n);
    data.assign(total, 0.0);
}

namespace {
std::size_t flat_index(int dim, std::span<const int> idx) {
    std::size_t f = 0;
    for (int v : idx) f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v);
    return f;
}
}  // namespace

double& PointTensor::at(std::span<const int> idx) {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index rank mismatch");
    return data[flat_index(dim, idx)];
}

double PointTensor::at(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index rank mismatch");
    return data[flat_index(dim, idx)];
}

PointTensor PointTensor::scalar(double v) {
    PointTensor t(1, {});
    t.data[0] = v;
    return t;
}

PointTensor PointTensor::vector(std::span<const double> comps) {
    PointTensor t(static_cast<int>(comps.size()), {Variance::Contra});
    std::copy(comps.begin(), comps.end(), t.data.begin());
    return t;
}

PointTensor PointTensor::covector(std::span<const double> comps) {
    PointTensor t(static_cast<int>(comps.size()), {Variance::Co});
    std::copy(comps.begin(), comps.end(), t.data.begin());
    return t;
}

PointTensor PointTensor::from_matrix(const Matrix& m, Variance row, Variance col) {
    if (m.rows != m.cols) throw std::invalid_argument("tensor from non-square matrix");
    PointTensor t(m.rows, {row, col});
    t.data = m.a;
    return t;
}

Matrix PointTensor::as_matrix() const {
    if (rank() != 2) throw std::invalid_argument("as_matrix needs a rank-2 tensor");
    Matrix m(dim, dim);
    m.a = data;
    return m;
}

PointTensor operator+(const PointTensor& s, const PointTensor& t) {
    if (s.sig != t.sig || s.dim != t.dim) throw std::invalid_argument("tensor shape mismatch");
    PointTensor r = s;
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] += t.data[i];
    return r;
}

PointTensor operator-(const PointTensor& s, const PointTensor& t) {
    if (s.sig != t.sig || s.dim != t.dim) throw std::invalid_argument("tensor shape mismatch");
    PointTensor r = s;
    for (std::size_t i = 0; i < r.data.size(); ++i) r.data[i] -= t.data[i];
    return r;
}

PointTensor operator*(double c, const PointTensor& t) {
    PointTensor r = t;
    for (double& v : r.data) v *= c;
    return r;
}

double max_abs(const PointTensor& t) {
    double m = 0.0;
    for (double v : t.data) m = std::max(m, std::abs(v));
    return m;
}

bool next_index(std::span<int> idx, int dim) {
    for (int i = static_cast<int>(idx.size()) - 1; i >= 0; --i) {
        if (++idx[i] < dim) return true;
        idx[i] = 0;
    }
    return false;
}

PointTensor contract(const PointTensor& t, int slot_a, int slot_b,
                     const std::optional<Matrix>& pairing) {
    int k = t.rank();
    if (slot_a == slot_b || slot_a < 0 || slot_b < 0 || slot_a >= k || slot_b >= k)
        throw std::invalid_argument("contraction slots out of range or equal");
    if (slot_a > slot_b) std::swap(slot_a, slot_b);
    bool same_variance = t.sig[slot_a] == t.sig[slot_b];
    if (same_variance && !pairing)
        throw std::invalid_argument("contracting equal-variance slots needs a metric");

    std::vector<Variance> out_sig;
    for (int i = 0; i < k; ++i)
        if (i != slot_a && i != slot_b) out_sig.push_back(t.sig[i]);
    PointTensor out(t.dim, out_sig);

    std::vector<int> out_idx(out_sig.size(), 0);
    std::vector<int> full(k, 0);
    do {
        double sum = 0.0;
        for (int a = 0; a < t.dim; ++a)
            for (int b = 0; b < t.dim; ++b) {
                double w;
                if (same_variance)
                    w = (*pairing)(a, b);
                else
                    w = (a == b) ? 1.0 : 0.0;
                if (w == 0.0) continue;
                int oi = 0;
                for (int i = 0; i < k; ++i) {
                    if (i == slot_a)
                        full[i] = a;
                    else if (i == slot_b)
                        full[i] = b;
                    else
                        full[i] = out_idx[oi++];
                }
                sum += w * t.at(full);
            }
        out.at(out_idx) = sum;
    } while (next_index(out_idx, t.dim));
    return out;
}

namespace {

// Raise or lower one slot by multiplying with g or g^{-1}.
PointTensor transform_slot(const PointTensor& t, int slot, const Matrix& m, Variance new_var) {
    PointTensor out(t.dim, t.sig);
    out.sig[slot] = new_var;
    std::vector<int> idx(t.rank(), 0);
    std::vector<int> src(t.rank(), 0);
    do {
        double sum = 0.0;
        src = idx;
        for (int a = 0; a < t.dim; ++a) {
            src[slot] = a;
            sum += m(idx[slot], a) * t.at(src);
        }
        out.at(idx) = sum;
    } while (next_index(idx, t.dim));
    return out;
}

}  // namespace

double inner_product(const Matrix& g, const PointTensor& s, const PointTensor& t) {
    if (s.sig != t.sig || s.dim != t.dim) throw std::invalid_argument("tensor shape mismatch");
    if (s.rank() == 0) return s.data[0] * t.data[0];
    Matrix ginv = inverse(g);
    // raise/lower every slot of s, then pair with t slotwise
    PointTensor raised = s;
    for (int slot = 0; slot < s.rank(); ++slot) {
        if (s.sig[slot] == Variance::Co)
            raised = transform_slot(raised, slot, ginv, Variance::Contra);
        else
            raised = transform_slot(raised, slot, g, Variance::Co);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < raised.data.size(); ++i) sum += raised.data[i] * t.data[i];
    return sum;
}

PointTensor flat(const Matrix& g, const PointTensor& v) {
    if (v.rank() != 1 || v.sig[0] != Variance::Contra)
        throw std::invalid_argument("flat expects a contravariant vector");
    return transform_slot(v, 0, g, Variance::Co);
}

PointTensor sharp(const Matrix& g, const PointTensor& alpha) {
    if (alpha.rank() != 1 || alpha.sig[0] != Variance::Co)
        throw std::invalid_argument("sharp expects a covector");
    return transform_slot(alpha, 0, inverse(g), Variance::Contra);
}

Frame gram_schmidt(const Matrix& g) {
    int n = g.rows;
    Frame f;
    f.rows = Matrix::identity(n);
    auto dot = [&](int i, int j) {
        double s = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) s += f.rows(i, a) * g(a, b) * f.rows(j, b);
        return s;
    };
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < i; ++j) {
            double proj = dot(i, j);
            for (int a = 0; a < n; ++a) f.rows(i, a) -= proj * f.rows(j, a);
        }
        double norm2 = dot(i, i);
        if (!(norm2 > 1e-14)) throw std::invalid_argument("metric is not positive definite");
        double inv = 1.0 / std::sqrt(norm2);
        for (int a = 0; a < n; ++a) f.rows(i, a) *= inv;
    }
    return f;
}

PointTensor so_action(const Matrix& a, const PointTensor& s) {
    PointTensor out(s.dim, s.sig);
    std::vector<int> idx(s.rank(), 0);
    std::vector<int> src(s.rank(), 0);
    if (s.rank() == 0) return out;  // differentiations kill scalars
    do {
        double sum = 0.0;
        for (int slot = 0; slot < s.rank(); ++slot) {
            src = idx;
            if (s.sig[slot] == Variance::Co) {
                // (A.s)(..., X, ...) -= s(..., AX, ...):  -A^m_idx * s_m
                for (int m = 0; m < s.dim; ++m) {
                    src[slot] = m;
                    sum -= a(m, idx[slot]) * s.at(src);
                }
            } else {
                for (int m = 0; m < s.dim; ++m) {
                    src[slot] = m;
                    sum += a(idx[slot], m) * s.at(src);
                }
            }
        }
        out.at(idx) = sum;
    } while (next_index(idx, s.dim));
    return out;
}

// ---------------------------------------------------------------------------
// eigensolvers

EigenDecomposition jacobi_eigen(const Matrix& s) {
    int n = s.rows;
    if (s.rows != s.cols) throw std::invalid_argument("eigensolver needs a square matrix");
    double scale = frobenius_norm(s);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(s(i, j) - s(j, i)) > 1e-10 * (1.0 + scale))
                throw std::invalid_argument("matrix is not symmetric");

    Matrix a = s;
    Matrix v = Matrix::identity(n);

    auto off = [&]() {
        double sum = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) sum += a(i, j) * a(i, j);
        return std::sqrt(2.0 * sum);
    };

    const double tol = 1e-15 * (1.0 + scale);
    for (int sweep = 0; sweep < 50 && off() > tol; ++sweep) {
        for (int p = 0; p < n - 1; ++p)
            for (int q = p + 1; q < n; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-3 * tol / n) continue;
                double app = a(p, p), aqq = a(q, q);
                double theta = (aqq - app) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
    }

    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    EigenDecomposition r;
    r.values.resize(n);
    r.vectors = Matrix(n, n);
    for (int j = 0; j < n; ++j) {
        int src = order[j];
        r.values[j] = a(src, src);
        // sign convention: first significant component positive
        double lead = 0.0;
        for (int i = 0; i < n; ++i) {
            if (std::abs(v(i, src)) > 1e-12) {
                lead = v(i, src);
                break;
            }
        }
        double flip = (lead < 0.0) ? -1.0 : 1.0;
        for (int i = 0; i < n; ++i) r.vectors(i, j) = flip * v(i, src);
    }
    return r;
}

std::vector<double> symmetric_eigenvalues(const Matrix& s) {
    int n = s.rows;
    if (s.rows != s.cols) throw std::invalid_argument("eigensolver needs a square matrix");
    if (n == 0) return {};

    // Householder reduction to tridiagonal form (values-only variant).
    Matrix a = s;
    std::vector<double> d(n), e(n);
    for (int i = n - 1; i > 0; --i) {
        int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (int k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (int k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k) a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) d[i] = a(i, i);

    // implicit-shift QL on the tridiagonal
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= 1e-16 * dd) break;
            }
            if (m != l) {
                if (iter++ == 60) throw std::runtime_error("eigenvalue iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double sn = 1.0, cs = 1.0, p = 0.0;
                int i = m - 1;
                bool underflow = false;
                for (; i >= l; --i) {
                    double f = sn * e[i];
                    double b = cs * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        underflow = true;
                        break;
                    }
                    sn = f / r;
                    cs = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * sn + 2.0 * cs * b;
                    p = sn * r;
                    d[i + 1] = g + p;
                    g = cs * r - b;
                }
                if (underflow && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    std::sort(d.begin(), d.end());
    return d;
}

}  // namespace statgeo
