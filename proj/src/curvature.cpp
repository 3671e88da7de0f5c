#include "statgeo/curvature.hpp"

#include <algorithm>
#include <cmath>

namespace statgeo {

namespace {
int kind_index(ConnectionKind kind) { return static_cast<int>(kind); }
}  // namespace

const TensorField& Geometry::riemann(ConnectionKind kind) {
    auto& slot = riem_[kind_index(kind)];
    if (!slot) {
        const TensorField& chr = s_.christoffel(kind);
        int n = s_.dim();
        TensorField r(n, {Variance::Contra, Variance::Co, Variance::Co, Variance::Co});
        for (int l = 0; l < n; ++l)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < i; ++j)
                    for (int k = 0; k < n; ++k) {
                        // R^l_{ijk} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk}
                        //                                        - G^l_{jm} G^m_{ik}
                        Expr sum = chr.at({l, j, k}).derivative(i) -
                                   chr.at({l, i, k}).derivative(j);
                        for (int m = 0; m < n; ++m)
                            sum = sum + chr.at({l, i, m}) * chr.at({m, j, k}) -
                                  chr.at({l, j, m}) * chr.at({m, i, k});
                        r.at({l, i, j, k}) = sum;
                        r.at({l, j, i, k}) = -sum;
                    }
        slot = std::move(r);
    }
    return *slot;
}

const TensorField& Geometry::ricci(ConnectionKind kind) {
    auto& slot = ric_[kind_index(kind)];
    if (!slot) {
        const TensorField& r = riemann(kind);
        int n = s_.dim();
        TensorField ric(n, {Variance::Co, Variance::Co});
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Expr sum(0.0);
                for (int i = 0; i < n; ++i) sum = sum + r.at({i, i, j, k});
                ric.at({j, k}) = sum;
            }
        slot = std::move(ric);
    }
    return *slot;
}

const Expr& Geometry::scalar_curvature(ConnectionKind kind) {
    auto& slot = scal_[kind_index(kind)];
    if (!slot) {
        const TensorField& ric = ricci(kind);
        const TensorField& ginv = s_.metric_inverse();
        int n = s_.dim();
        Expr sum(0.0);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) sum = sum + ginv.at({j, k}) * ric.at({j, k});
        slot = sum;
    }
    return *slot;
}

const TensorField& Geometry::nabla_hat_k() {
    if (!nhk_) nhk_ = s_.covariant_derivative(ConnectionKind::Hat, s_.difference_tensor());
    return *nhk_;
}

PointTensor lower_curvature(const Matrix& g, const PointTensor& t) {
    int n = t.dim;
    PointTensor out(n, {Variance::Co, Variance::Co, Variance::Co, Variance::Co});
    for (int u = 0; u < n; ++u)
        for (int z = 0; z < n; ++z)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y) {
                    double v = 0.0;
                    for (int l = 0; l < n; ++l) v += g(l, u) * t.at({l, x, y, z});
                    out.at({u, z, x, y}) = v;
                }
    return out;
}

CurvatureBundle curvature_bundle(Geometry& geom, std::span<const double> point) {
    const StatStructure& s = geom.structure();
    Evaluator ev(point);
    CurvatureBundle b;
    b.r = geom.riemann(ConnectionKind::Nabla).evaluate(ev);
    b.r_bar = geom.riemann(ConnectionKind::Bar).evaluate(ev);
    b.r_hat = geom.riemann(ConnectionKind::Hat).evaluate(ev);
    b.ric = geom.ricci(ConnectionKind::Nabla).evaluate(ev);
    b.ric_bar = geom.ricci(ConnectionKind::Bar).evaluate(ev);
    b.ric_hat = geom.ricci(ConnectionKind::Hat).evaluate(ev);
    b.rho = ev(geom.scalar_curvature(ConnectionKind::Nabla));
    b.rho_bar = ev(geom.scalar_curvature(ConnectionKind::Bar));
    b.rho_hat = ev(geom.scalar_curvature(ConnectionKind::Hat));

    Matrix g = s.metric_at(ev);
    int n = s.dim();
    PointTensor low_r = lower_curvature(g, b.r);
    b.lowered = PointTensor(n, {Variance::Co, Variance::Co, Variance::Co, Variance::Co});
    for (int u = 0; u < n; ++u)
        for (int z = 0; z < n; ++z)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    b.lowered.at({u, z, x, y}) =
                        0.5 * (low_r.at({u, z, x, y}) - low_r.at({z, u, x, y}));
    return b;
}

double sectional_nabla(Geometry& geom, std::span<const double> point, std::span<const double> x,
                       std::span<const double> y) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    Evaluator ev(point);
    Matrix g = s.metric_at(ev);

    auto pair = [&](std::span<const double> a, std::span<const double> b) {
        double v = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) v += g(i, j) * a[i] * b[j];
        return v;
    };
    double gram = pair(x, x) * pair(y, y) - pair(x, y) * pair(x, y);
    if (gram <= 1e-14) throw std::invalid_argument("degenerate plane for sectional curvature");

    PointTensor r = geom.riemann(ConnectionKind::Nabla).evaluate(ev);
    PointTensor r_bar = geom.riemann(ConnectionKind::Bar).evaluate(ev);
    // (1/2) g((R + R-bar)(X,Y)Y, X)
    double num = 0.0;
    for (int l = 0; l < n; ++l) {
        double tl = 0.0;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    tl += (r.at({l, a, b, c}) + r_bar.at({l, a, b, c})) * x[a] * y[b] * y[c];
        for (int u = 0; u < n; ++u) num += 0.5 * g(l, u) * tl * x[u];
    }
    return num / gram;
}

CurvatureOperator curvature_operator(Geometry& geom, std::span<const double> point) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    Evaluator ev(point);
    Matrix g = s.metric_at(ev);

    CurvatureOperator op;
    op.frame = gram_schmidt(g);
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) op.pairs.emplace_back(a, b);
    int dim2 = static_cast<int>(op.pairs.size());

    PointTensor t = geom.riemann(ConnectionKind::Nabla).evaluate(ev) +
                    geom.riemann(ConnectionKind::Bar).evaluate(ev);
    PointTensor t04 = lower_curvature(g, t);  // (U, Z, X, Y) = g(T(X,Y)Z, U)

    auto frame_val = [&](int a, int b, int c, int d) {
        double v = 0.0;
        const Matrix& f = op.frame.rows;
        for (int u = 0; u < n; ++u)
            for (int z = 0; z < n; ++z)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        v += f(a, u) * f(b, z) * f(c, x) * f(d, y) * t04.at({u, z, x, y});
        return v;
    };

    op.op = Matrix(dim2, dim2);
    for (int p = 0; p < dim2; ++p)
        for (int q = 0; q < dim2; ++q)
            op.op(p, q) = frame_val(op.pairs[p].first, op.pairs[p].second, op.pairs[q].first,
                                    op.pairs[q].second);
    // symmetrize away roundoff before the eigensolver
    for (int p = 0; p < dim2; ++p)
        for (int q = p + 1; q < dim2; ++q) {
            double avg = 0.5 * (op.op(p, q) + op.op(q, p));
            op.op(p, q) = op.op(q, p) = avg;
        }
    op.eig = jacobi_eigen(op.op);

    // eigenvectors as g-skew endomorphisms: f_a ^ f_b -> f_a (f_b)flat - f_b (f_a)flat
    for (int col = 0; col < dim2; ++col) {
        Matrix endo(n, n);
        for (int p = 0; p < dim2; ++p) {
            double w = op.eig.vectors(p, col);
            if (w == 0.0) continue;
            auto [a, b] = op.pairs[p];
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double fa_i = op.frame.rows(a, i), fb_i = op.frame.rows(b, i);
                    double fa_j = 0.0, fb_j = 0.0;
                    for (int m = 0; m < n; ++m) {
                        fa_j += g(j, m) * op.frame.rows(a, m);
                        fb_j += g(j, m) * op.frame.rows(b, m);
                    }
                    endo(i, j) += w * (fa_i * fb_j - fb_i * fa_j);
                }
        }
        op.theta_endos.push_back(std::move(endo));
    }

    double scale = frobenius_norm(op.op);
    op.nonnegative = op.eig.values.front() >= -1e-10 * (1.0 + scale);
    op.positive = op.eig.values.front() > 1e-10 * (1.0 + scale);
    return op;
}

PointTensor weitzenbock_apply(const PointTensor& t, const PointTensor& s, const Frame& frame) {
    int n = s.dim;
    int k = s.rank();
    PointTensor out(n, s.sig);
    if (k == 0) return out;

    std::vector<int> cov_slots;
    for (int slot = 0; slot < k; ++slot)
        if (s.sig[slot] == Variance::Co) cov_slots.push_back(slot);

    // acted[j][x] = (T(f_j, d_x) acting as a differentiation on s), where
    // T(f_j, d_x) is the endomorphism A^p_q = sum_u T^p_{u x q} f_j^u
    std::vector<std::vector<PointTensor>> acted(n);
    for (int j = 0; j < n; ++j) {
        acted[j].reserve(n);
        for (int x = 0; x < n; ++x) {
            Matrix a(n, n);
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q) {
                    double v = 0.0;
                    for (int u = 0; u < n; ++u) v += t.at({p, u, x, q}) * frame.rows(j, u);
                    a(p, q) = v;
                }
            acted[j].push_back(so_action(a, s));
        }
    }

    std::vector<int> idx(k, 0);
    std::vector<int> probe(k, 0);
    do {
        double total = 0.0;
        for (int slot : cov_slots) {
            int xi = idx[slot];
            for (int j = 0; j < n; ++j) {
                probe = idx;
                double contrib = 0.0;
                for (int m = 0; m < n; ++m) {
                    probe[slot] = m;
                    contrib += frame.rows(j, m) * acted[j][xi].at(probe);
                }
                total += contrib;
            }
        }
        out.at(idx) = total;
    } while (next_index(idx, n));
    return out;
}

CheckResult weitzenbock_spectral_identity(Geometry& geom, std::span<const double> point,
                                          std::span<const PointTensor> samples, double tol) {
    const StatStructure& s = geom.structure();
    Evaluator ev(point);
    Matrix g = s.metric_at(ev);
    PointTensor t = geom.riemann(ConnectionKind::Nabla).evaluate(ev) +
                    geom.riemann(ConnectionKind::Bar).evaluate(ev);
    CurvatureOperator op = curvature_operator(geom, point);

    double worst = 0.0;
    for (const PointTensor& sample : samples) {
        PointTensor ws = weitzenbock_apply(t, sample, op.frame);
        double lhs = inner_product(g, ws, sample);
        double rhs = 0.0;
        for (std::size_t a = 0; a < op.theta_endos.size(); ++a) {
            PointTensor acted = so_action(op.theta_endos[a], sample);
            rhs += op.eig.values[a] * inner_product(g, acted, acted);
        }
        worst = std::max(worst, relative_residual(lhs, rhs));
    }
    return CheckResult::make("weitzenbock_spectral", "<W^T s, s> = sum_a lambda_a |Theta_a s|^2",
                             worst, tol);
}

double relative_residual(const PointTensor& lhs, const PointTensor& rhs) {
    double diff = max_abs(lhs - rhs);
    return diff / (1.0 + std::max(max_abs(lhs), max_abs(rhs)));
}

double relative_residual(double lhs, double rhs) {
    return std::abs(lhs - rhs) / (1.0 + std::max(std::abs(lhs), std::abs(rhs)));
}

StatStructure scaled_structure(const StatStructure& s, const Expr& factor) {
    TensorField c = factor * s.cubic();
    std::vector<std::optional<double>> periods;
    for (int i = 0; i < s.dim(); ++i) periods.push_back(s.period(i));
    return StatStructure(s.dim(), s.coords(), s.metric(), c, periods, s.phi());
}

// ---------------------------------------------------------------------------
// suites

namespace {

struct PointData {
    Evaluator ev;
    Matrix g, ginv;
    explicit PointData(const StatStructure& s, const std::vector<double>& p)
        : ev(p), g(s.metric_at(ev)), ginv(inverse(g)) {}
};

double tensor_inner_11(const Matrix& g, const Matrix& ginv, const PointTensor& k, int y, int z,
                       int n) {
    // g(K_Y, K_Z) for the (1,2) field K: sum g_{lm} g^{pq} K^l_{yp} K^m_{zq}
    double v = 0.0;
    for (int l = 0; l < n; ++l)
        for (int m = 0; m < n; ++m)
            for (int p = 0; p < n; ++p)
                for (int q = 0; q < n; ++q)
                    v += g(l, m) * ginv(p, q) * k.at({l, y, p}) * k.at({m, z, q});
    return v;
}

}  // namespace

SuiteReport identity_suite_connection(Geometry& geom, PointSet points, double tol) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    SuiteReport report;
    report.name = "connection";
    report.points_used = static_cast<int>(points.size());

    double worst_duality = 0, worst_avg = 0, worst_pairing = 0, worst_gauss = 0;
    double worst_sum = 0, worst_gap = 0, worst_bianchi = 0, worst_skew = 0;

    const TensorField& g_field = s.metric();
    TensorField dg(n, {Variance::Co, Variance::Co, Variance::Co});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) dg.at({i, j, k}) = g_field.at({j, k}).derivative(i);

    for (const auto& p : points) {
        PointData d(s, p);
        PointTensor chr_hat = s.christoffel(ConnectionKind::Hat).evaluate(d.ev);
        PointTensor chr_nab = s.christoffel(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor chr_bar = s.christoffel(ConnectionKind::Bar).evaluate(d.ev);
        PointTensor dgp = dg.evaluate(d.ev);
        PointTensor kp = s.difference_tensor().evaluate(d.ev);

        // duality on coefficients: d_i g_jk = g(G^m_ij d_m, d_k) + g(d_j, Gbar^m_ik d_m)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double rhs = 0.0;
                    for (int m = 0; m < n; ++m)
                        rhs += chr_nab.at({m, i, j}) * d.g(m, k) + chr_bar.at({m, i, k}) * d.g(j, m);
                    worst_duality = std::max(worst_duality,
                                             relative_residual(dgp.at({i, j, k}), rhs));
                }

        // hat = (nabla + bar) / 2
        worst_avg = std::max(worst_avg,
                             relative_residual(chr_hat, 0.5 * (chr_nab + chr_bar)));

        PointTensor r = geom.riemann(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor rb = geom.riemann(ConnectionKind::Bar).evaluate(d.ev);
        PointTensor rh = geom.riemann(ConnectionKind::Hat).evaluate(d.ev);
        PointTensor low_r = lower_curvature(d.g, r);
        PointTensor low_rb = lower_curvature(d.g, rb);

        // g(R(X,Y)Z, W) = -g(Rbar(X,Y)W, Z)
        double res_pair = 0.0, scale_pair = std::max(max_abs(low_r), max_abs(low_rb));
        for (int w = 0; w < n; ++w)
            for (int z = 0; z < n; ++z)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        res_pair = std::max(
                            res_pair, std::abs(low_r.at({w, z, x, y}) + low_rb.at({z, w, x, y})));
        worst_pairing = std::max(worst_pairing, res_pair / (1.0 + scale_pair));

        // R = R-hat + alt(nabla-hat K) + [K, K]
        PointTensor nhk = geom.nabla_hat_k().evaluate(d.ev);
        PointTensor gauss(n, r.sig);
        PointTensor comm(n, r.sig);
        for (int l = 0; l < n; ++l)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    for (int z = 0; z < n; ++z) {
                        double c = 0.0;
                        for (int m = 0; m < n; ++m)
                            c += kp.at({l, x, m}) * kp.at({m, y, z}) -
                                 kp.at({l, y, m}) * kp.at({m, x, z});
                        comm.at({l, x, y, z}) = c;
                        gauss.at({l, x, y, z}) = rh.at({l, x, y, z}) + nhk.at({l, x, y, z}) -
                                                 nhk.at({l, y, x, z}) + c;
                    }
        worst_gauss = std::max(worst_gauss, relative_residual(r, gauss));

        // R + Rbar = 2 R-hat + 2 [K, K]
        worst_sum = std::max(worst_sum, relative_residual(r + rb, 2.0 * rh + 2.0 * comm));

        // R - Rbar = 2 alt(nabla-hat K)
        PointTensor alt(n, r.sig);
        for (int l = 0; l < n; ++l)
            for (int x = 0; x < n; ++x)
                for (int y = 0; y < n; ++y)
                    for (int z = 0; z < n; ++z)
                        alt.at({l, x, y, z}) = nhk.at({l, x, y, z}) - nhk.at({l, y, x, z});
        worst_gap = std::max(worst_gap, relative_residual(r - rb, 2.0 * alt));

        // first Bianchi and skew symmetry for all three curvatures
        for (const PointTensor* cur : {&r, &rb, &rh}) {
            double scale = 1.0 + max_abs(*cur);
            for (int l = 0; l < n; ++l)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        for (int z = 0; z < n; ++z) {
                            double cyc = cur->at({l, x, y, z}) + cur->at({l, y, z, x}) +
                                         cur->at({l, z, x, y});
                            worst_bianchi = std::max(worst_bianchi, std::abs(cyc) / scale);
                            double skew = cur->at({l, x, y, z}) + cur->at({l, y, x, z});
                            worst_skew = std::max(worst_skew, std::abs(skew) / scale);
                        }
        }
    }

    report.add(CheckResult::make("duality_product_rule",
                                 "X g(Y,Z) = g(nabla_X Y, Z) + g(Y, nabla-bar_X Z)",
                                 worst_duality, tol));
    report.add(CheckResult::make("hat_is_average", "nabla-hat = (nabla + nabla-bar)/2", worst_avg,
                                 tol));
    report.add(CheckResult::make("conjugate_curvature_pairing",
                                 "g(R(X,Y)Z,W) = -g(R-bar(X,Y)W,Z)", worst_pairing, tol));
    report.add(CheckResult::make(
        "curvature_decomposition",
        "R(X,Y) = R-hat(X,Y) + (nabla-hat_X K)_Y - (nabla-hat_Y K)_X + [K_X,K_Y]", worst_gauss,
        tol));
    report.add(CheckResult::make("curvature_sum", "R + R-bar = 2 R-hat + 2 [K_X,K_Y]", worst_sum,
                                 tol));
    report.add(CheckResult::make("dual_curvature_gap",
                                 "R - R-bar = 2 alt(nabla-hat K)  [R = R-bar iff nabla-hat K "
                                 "symmetric]",
                                 worst_gap, tol));
    report.add(CheckResult::make("first_bianchi", "cyclic sum of R(X,Y)Z vanishes", worst_bianchi,
                                 tol));
    report.add(CheckResult::make("skew_symmetry", "R(X,Y) = -R(Y,X)", worst_skew, tol));
    return report;
}

SuiteReport ricci_suite(Geometry& geom, PointSet points, double tol) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    SuiteReport report;
    report.name = "ricci";
    report.points_used = static_cast<int>(points.size());

    // div^{nabla-hat} K as (0,2): (div K)_{jk} = sum_d (nabla-hat K)^d_{d j k}
    const TensorField& nhk = geom.nabla_hat_k();
    const TensorField& tau = s.tau();
    TensorField nabla_hat_tau = s.covariant_derivative(ConnectionKind::Hat, tau);
    TensorField dtau = d_one_form(tau);

    double worst_dec = 0, worst_sum = 0, worst_skew = 0, worst_scal = 0, worst_egr = 0;
    double worst_nonneg = 0, worst_dual_route = 0;

    for (const auto& p : points) {
        PointData d(s, p);
        PointTensor ric = geom.ricci(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor ric_bar = geom.ricci(ConnectionKind::Bar).evaluate(d.ev);
        PointTensor ric_hat = geom.ricci(ConnectionKind::Hat).evaluate(d.ev);
        PointTensor kp = s.difference_tensor().evaluate(d.ev);
        PointTensor nhkp = nhk.evaluate(d.ev);
        PointTensor taup = tau.evaluate(d.ev);
        PointTensor nhtau = nabla_hat_tau.evaluate(d.ev);
        PointTensor dtaup = dtau.evaluate(d.ev);

        PointTensor rhs(n, {Variance::Co, Variance::Co});
        PointTensor rhs_sum(n, {Variance::Co, Variance::Co});
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) {
                double div_k = 0.0;
                for (int dd = 0; dd < n; ++dd) div_k += nhkp.at({dd, dd, y, z});
                double tau_k = 0.0;
                for (int l = 0; l < n; ++l) tau_k += taup.at({l}) * kp.at({l, y, z});
                double kyz = tensor_inner_11(d.g, d.ginv, kp, y, z, n);
                rhs.at({y, z}) = ric_hat.at({y, z}) + div_k - nhtau.at({y, z}) + tau_k - kyz;
                rhs_sum.at({y, z}) = 2.0 * ric_hat.at({y, z}) - 2.0 * kyz + 2.0 * tau_k;
            }
        worst_dec = std::max(worst_dec, relative_residual(ric, rhs));
        worst_sum = std::max(worst_sum, relative_residual(ric + ric_bar, rhs_sum));

        // Ric(Y,Z) - Ric(Z,Y) = -dtau(Y,Z)
        PointTensor skew(n, {Variance::Co, Variance::Co});
        for (int y = 0; y < n; ++y)
            for (int z = 0; z < n; ++z) skew.at({y, z}) = ric.at({y, z}) - ric.at({z, y});
        worst_skew = std::max(worst_skew, relative_residual(skew, -1.0 * dtaup));

        double rho = d.ev(geom.scalar_curvature(ConnectionKind::Nabla));
        double rho_bar = d.ev(geom.scalar_curvature(ConnectionKind::Bar));
        double rho_hat = d.ev(geom.scalar_curvature(ConnectionKind::Hat));
        worst_scal = std::max(worst_scal, relative_residual(rho, rho_bar));

        PointTensor et = s.trace_vector().evaluate(d.ev);
        double k2 = inner_product(d.g, kp, kp);
        double e2 = inner_product(d.g, et, et);
        worst_egr = std::max(worst_egr, relative_residual(rho_hat, rho + k2 - e2));
        worst_nonneg = std::max(worst_nonneg, std::max(0.0, e2 - k2) / (1.0 + k2));

        // Ric-bar(Y,W) = -tr_g g(R(., Y) ., W)
        PointTensor r = geom.riemann(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor dual(n, {Variance::Co, Variance::Co});
        for (int y = 0; y < n; ++y)
            for (int w = 0; w < n; ++w) {
                double v = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int l = 0; l < n; ++l)
                            v += d.ginv(a, b) * d.g(l, w) * r.at({l, a, y, b});
                dual.at({y, w}) = -v;
            }
        worst_dual_route = std::max(worst_dual_route, relative_residual(ric_bar, dual));
    }

    report.add(CheckResult::make(
        "ricci_decomposition",
        "Ric(Y,Z) = Ric-hat(Y,Z) + (div^hat K)(Y,Z) - nabla-hat tau(Y,Z) + tau(K(Y,Z)) - "
        "g(K_Y,K_Z)",
        worst_dec, tol));
    report.add(CheckResult::make("ricci_sum",
                                 "Ric + Ric-bar = 2 Ric-hat - 2 g(K_Y,K_Z) + 2 tau(K(Y,Z))",
                                 worst_sum, tol));
    report.add(CheckResult::make("ricci_skew_is_dtau", "Ric(Y,Z) - Ric(Z,Y) = -dtau(Y,Z)",
                                 worst_skew, tol));
    report.add(CheckResult::make("scalar_equality", "rho = rho-bar", worst_scal, tol));
    report.add(CheckResult::make("theorema_egregium", "rho-hat = rho + |K|^2 - |E|^2", worst_egr,
                                 tol));
    report.add(CheckResult::make("scalar_maximality", "|K|^2 - |E|^2 >= 0", worst_nonneg, tol));
    report.add(CheckResult::make("ricci_dual_trace_route",
                                 "Ric-bar(Y,W) = -tr_g g(R(.,Y).,W)", worst_dual_route, tol));
    return report;
}

SuiteReport second_bianchi_check(Geometry& geom, PointSet points, double tol) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    SuiteReport report;
    report.name = "bianchi";
    report.points_used = static_cast<int>(points.size());

    TensorField t_sum = geom.riemann(ConnectionKind::Nabla) + geom.riemann(ConnectionKind::Bar);
    TensorField nabla_hat_t = s.covariant_derivative(ConnectionKind::Hat, t_sum);
    TensorField diff = geom.riemann(ConnectionKind::Bar) - geom.riemann(ConnectionKind::Nabla);
    TensorField nabla_hat_r =
        s.covariant_derivative(ConnectionKind::Hat, geom.riemann(ConnectionKind::Nabla));

    double worst = 0.0, worst_parallel = 0.0;
    bool dual_flat = true;  // R == R-bar at every sampled point
    for (const auto& p : points) {
        PointData d(s, p);
        PointTensor nht = nabla_hat_t.evaluate(d.ev);
        if (max_abs(diff.evaluate(d.ev)) > tol * (1.0 + max_abs(nht))) dual_flat = false;
    }

    for (const auto& p : points) {
        PointData d(s, p);
        PointTensor nht = nabla_hat_t.evaluate(d.ev);
        PointTensor dfp = diff.evaluate(d.ev);
        PointTensor kp = s.difference_tensor().evaluate(d.ev);

        double scale = 1.0 + max_abs(nht);
        int cyc[3][3] = {{0, 1, 2}, {1, 2, 0}, {2, 0, 1}};
        for (int l = 0; l < n; ++l)
            for (int u = 0; u < n; ++u)
                for (int x = 0; x < n; ++x)
                    for (int y = 0; y < n; ++y)
                        for (int z = 0; z < n; ++z) {
                            int args[3] = {u, x, y};
                            double lhs = 0.0, rhs = 0.0;
                            for (auto& c : cyc) {
                                int a = args[c[0]], b = args[c[1]], e = args[c[2]];
                                lhs += nht.at({l, a, b, e, z});
                                // (K_a . D)(b, e) z with the differentiation action
                                double act = 0.0;
                                for (int m = 0; m < n; ++m)
                                    act += kp.at({l, a, m}) * dfp.at({m, b, e, z}) -
                                           dfp.at({l, m, e, z}) * kp.at({m, a, b}) -
                                           dfp.at({l, b, m, z}) * kp.at({m, a, e}) -
                                           dfp.at({l, b, e, m}) * kp.at({m, a, z});
                                rhs += act;
                            }
                            worst = std::max(worst, std::abs(lhs - rhs) / scale);
                        }
        if (dual_flat) {
            PointTensor nhr = nabla_hat_r.evaluate(d.ev);
            double scale_r = 1.0 + max_abs(nhr);
            for (int l = 0; l < n; ++l)
                for (int u = 0; u < n; ++u)
                    for (int x = 0; x < n; ++x)
                        for (int y = 0; y < n; ++y)
                            for (int z = 0; z < n; ++z) {
                                int args[3] = {u, x, y};
                                double lhs = 0.0;
                                for (auto& c : cyc)
                                    lhs += nhr.at({l, args[c[0]], args[c[1]], args[c[2]], z});
                                worst_parallel = std::max(worst_parallel, std::abs(lhs) / scale_r);
                            }
        }
    }

    report.add(CheckResult::make(
        "second_bianchi",
        "cyc (nabla-hat_U (R + R-bar))(X,Y) = cyc (K_U (R-bar - R))(X,Y)", worst, tol));
    if (dual_flat)
        report.add(CheckResult::make("second_bianchi_dual_flat",
                                     "R = R-bar implies cyc (nabla-hat_U R)(X,Y) = 0",
                                     worst_parallel, tol));
    return report;
}

SuiteReport metric_weitzenbock_check(Geometry& geom, PointSet points, double tol) {
    const StatStructure& s = geom.structure();
    int n = s.dim();
    SuiteReport report;
    report.name = "metric";
    report.points_used = static_cast<int>(points.size());

    TensorField nabla_g = s.covariant_derivative(ConnectionKind::Nabla, s.metric());
    TensorField nabla2_g = s.covariant_derivative(ConnectionKind::Nabla, nabla_g);
    TensorField nabla_tau = s.covariant_derivative(ConnectionKind::Nabla, s.tau());

    bool trace_free = s.is_trace_free(points);
    double worst_bochner = 0, worst_w = 0, worst_double_trace = 0;

    for (const auto& p : points) {
        PointData d(s, p);
        PointTensor n2g = nabla2_g.evaluate(d.ev);
        PointTensor ng = nabla_g.evaluate(d.ev);
        PointTensor ntau = nabla_tau.evaluate(d.ev);
        PointTensor ric = geom.ricci(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor ric_bar = geom.ricci(ConnectionKind::Bar).evaluate(d.ev);

        PointTensor lhs(n, {Variance::Co, Variance::Co});
        PointTensor rhs(n, {Variance::Co, Variance::Co});
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y) {
                double tr = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) tr += d.ginv(a, b) * n2g.at({a, b, x, y});
                double pairing = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        for (int c = 0; c < n; ++c)
                            for (int e = 0; e < n; ++e)
                                pairing += d.ginv(a, c) * d.ginv(b, e) * ng.at({x, a, b}) *
                                           ng.at({y, c, e});
                lhs.at({x, y}) = tr - pairing + 2.0 * ntau.at({x, y});
                rhs.at({x, y}) = ric_bar.at({x, y}) - ric.at({x, y});
            }
        worst_bochner = std::max(worst_bochner, relative_residual(lhs, rhs));

        // Weitzenboeck action on g against the Ricci route
        Frame frame = gram_schmidt(d.g);
        PointTensor r = geom.riemann(ConnectionKind::Nabla).evaluate(d.ev);
        PointTensor wg = weitzenbock_apply(r, s.metric().evaluate(d.ev), frame);
        PointTensor wg_ric(n, {Variance::Co, Variance::Co});
        for (int x = 0; x < n; ++x)
            for (int y = 0; y < n; ++y)
                wg_ric.at({x, y}) = ric_bar.at({x, y}) + ric_bar.at({y, x}) - ric.at({x, y}) -
                                    ric.at({y, x});
        worst_w = std::max(worst_w, relative_residual(wg, wg_ric));

        if (trace_free) {
            double dtr = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c)
                        for (int e = 0; e < n; ++e)
                            dtr += d.ginv(a, b) * d.ginv(c, e) * n2g.at({a, b, c, e});
            double norm2 = inner_product(d.g, ng, ng);
            worst_double_trace = std::max(worst_double_trace, relative_residual(dtr, norm2));
        }
    }

    report.add(CheckResult::make(
        "metric_bochner",
        "tr_g nabla^2 g(X,Y) - g(nabla_X g, nabla_Y g) + 2 nabla tau(X,Y) = Ric-bar - Ric",
        worst_bochner, tol));
    report.add(CheckResult::make(
        "metric_weitzenbock_operator",
        "(W^R g)(X,Y) = Ric-bar(X,Y) + Ric-bar(Y,X) - Ric(X,Y) - Ric(Y,X)", worst_w, tol));
    if (trace_free)
        report.add(CheckResult::make("metric_double_trace",
                                     "sum nabla^2 g(e_i,e_i,e_j,e_j) = g(nabla g, nabla g)",
                                     worst_double_trace, tol));
    return report;
}

}  // namespace statgeo
