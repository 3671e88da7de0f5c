#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "statgeo/structure.hpp"

using namespace statgeo;

namespace {

const char* kTrivial = R"(# flat 2-torus
dim 2
coords u v
period u 6.283185307179586
period v 6.283185307179586
g 1 1 = 1
g 2 2 = 1
)";

const char* kConstK = R"(dim 2
coords u v
period u 6.283185307179586
period v 6.283185307179586
g 1 1 = 1
g 2 2 = 1
C 1 1 1 = 0.3
C 1 2 2 = -0.3
)";

const char* kC111 = R"(dim 2
coords u v
g 1 1 = 1
g 2 2 = 1
C 1 1 1 = 0.4
)";

const char* kPolar = R"(dim 2
coords u v
g 1 1 = 1
g 2 2 = u^2
)";

std::vector<std::vector<double>> box_points(std::mt19937_64& rng, int n, int count, double lo,
                                            double hi) {
    std::uniform_real_distribution<double> u(lo, hi);
    std::vector<std::vector<double>> pts(count, std::vector<double>(n));
    for (auto& p : pts)
        for (double& x : p) x = u(rng);
    return pts;
}

// Independent oracle: Levi-Civita coefficients from central differences of g.
double christoffel_fd(const StatStructure& s, int k, int i, int j,
                      const std::vector<double>& p, double h = 1e-5) {
    int n = s.dim();
    auto g_at = [&](const std::vector<double>& q) {
        Evaluator ev(q);
        return s.metric_at(ev);
    };
    auto dg = [&](int l, int a, int b) {
        std::vector<double> q1 = p, q2 = p;
        q1[l] += h;
        q2[l] -= h;
        return (g_at(q1)(a, b) - g_at(q2)(a, b)) / (2 * h);
    };
    Evaluator ev(p);
    Matrix ginv = s.metric_inverse_at(ev);
    double sum = 0.0;
    for (int l = 0; l < n; ++l) sum += ginv(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
    return 0.5 * sum;
}

const char* kRandomish = R"(dim 2
coords u v
period u 6.283185307179586
period v 6.283185307179586
g 1 1 = 1 + 0.2*sin(u)
g 1 2 = 0.1*cos(u+v)
g 2 2 = 1 + 0.2*cos(v)
C 1 1 1 = 0.3*sin(u)
C 1 1 2 = 0.2*cos(v)
C 1 2 2 = -0.1*sin(u+v)
C 2 2 2 = 0.25*cos(u)
)";

}  // namespace

TEST_CASE("load: trivial structure") {
    StatStructure s = StatStructure::load(kTrivial);
    CHECK(s.dim() == 2);
    CHECK(s.coords()[0] == "u");
    CHECK(s.fully_periodic());
    std::vector<double> p = {0.3, 0.8};
    PointTensor k = s.difference_tensor().evaluate(p);
    CHECK(max_abs(k) == 0.0);
    PointTensor chr = s.christoffel(ConnectionKind::Hat).evaluate(p);
    CHECK(max_abs(chr) == 0.0);
}

TEST_CASE("load: constant trace-free cubic") {
    StatStructure s = StatStructure::load(kConstK);
    std::mt19937_64 rng(1);
    auto pts = box_points(rng, 2, 10, 0.0, 6.28);
    CHECK(s.is_trace_free(pts));
    // tr_g C = 0 numerically
    std::vector<double> p = {1.0, 2.0};
    Evaluator ev(p);
    PointTensor c = s.cubic().evaluate(ev);
    Matrix ginv = s.metric_inverse_at(ev);
    PointTensor traced = contract(c, 0, 1, ginv);
    CHECK(max_abs(traced) < 1e-14);
}

TEST_CASE("load errors") {
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\ng 2 2 = 1\n"), InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\ng 1 1 = 1\ng 1 1 = 2\ng 2 2 = 1\n"),
                    InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\ng 1 3 = 1\ng 2 2 = 1\n"), InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\nbogus 1\ng 1 1 = 1\ng 2 2 = 1\n"),
                    InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\ng 2 1 = 1\n"), InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u u\ng 1 1 = 1\ng 2 2 = 1\n"), InputError);
    CHECK_THROWS_AS(StatStructure::load("dim 2\ncoords u v\ng 1 1 = sin(w)\ng 2 2 = 1\n"),
                    InputError);
    CHECK_THROWS_AS(StatStructure::load(""), InputError);
}

TEST_CASE("christoffel: polar-like metric") {
    StatStructure s = StatStructure::load(kPolar);
    std::vector<double> p = {1.7, 0.4};
    Evaluator ev(p);
    const TensorField& chr = s.christoffel(ConnectionKind::Hat);
    CHECK(ev(chr.at({0, 1, 1})) == doctest::Approx(-1.7).epsilon(1e-12));        // -u
    CHECK(ev(chr.at({1, 0, 1})) == doctest::Approx(1.0 / 1.7).epsilon(1e-12));   // 1/u
    CHECK(ev(chr.at({1, 1, 0})) == doctest::Approx(1.0 / 1.7).epsilon(1e-12));

    // finite-difference oracle over all components
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(ev(chr.at({k, i, j})) ==
                      doctest::Approx(christoffel_fd(s, k, i, j, p)).epsilon(1e-6));
}

TEST_CASE("christoffel: nabla = hat + K, constant C on flat metric") {
    StatStructure s = StatStructure::load(kConstK);
    std::vector<double> p = {0.2, 0.5};
    Evaluator ev(p);
    const TensorField& nab = s.christoffel(ConnectionKind::Nabla);
    PointTensor c = s.cubic().evaluate(ev);
    // with g = delta, raising an index is the identity: Gamma^k_ij = C_ijk
    for (int k = 0; k < 2; ++k)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                CHECK(ev(nab.at({k, i, j})) == doctest::Approx(c.at({i, j, k})).epsilon(1e-13));
}

TEST_CASE("christoffel on random structure against finite differences") {
    StatStructure s = StatStructure::load(kRandomish);
    std::mt19937_64 rng(2);
    auto pts = box_points(rng, 2, 5, 0.0, 6.0);
    for (const auto& p : pts) {
        Evaluator ev(p);
        const TensorField& chr = s.christoffel(ConnectionKind::Hat);
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double exact = ev(chr.at({k, i, j}));
                    double fd = christoffel_fd(s, k, i, j, p);
                    CHECK(std::abs(exact - fd) < 1e-6 * (1.0 + std::abs(exact)));
                }
    }
}

TEST_CASE("covariant derivative: metricity and nabla g = -2C") {
    StatStructure s = StatStructure::load(kRandomish);
    TensorField dg_hat = s.covariant_derivative(ConnectionKind::Hat, s.metric());
    TensorField dg_nabla = s.covariant_derivative(ConnectionKind::Nabla, s.metric());
    TensorField dg_bar = s.covariant_derivative(ConnectionKind::Bar, s.metric());

    std::mt19937_64 rng(3);
    auto pts = box_points(rng, 2, 8, 0.0, 6.0);
    for (const auto& p : pts) {
        Evaluator ev(p);
        CHECK(max_abs(dg_hat.evaluate(ev)) < 1e-10);

        PointTensor nabla_g = dg_nabla.evaluate(ev);
        PointTensor bar_g = dg_bar.evaluate(ev);
        PointTensor c = s.cubic().evaluate(ev);
        CHECK(max_abs(nabla_g + 2.0 * c) < 1e-10);
        CHECK(max_abs(bar_g - 2.0 * c) < 1e-10);
    }
}

TEST_CASE("tensors E, K, tau") {
    SUBCASE("trace-free constant C has E = 0") {
        StatStructure s = StatStructure::load(kConstK);
        std::vector<double> p = {0.1, 0.9};
        Evaluator ev(p);
        CHECK(max_abs(s.trace_vector().evaluate(ev)) < 1e-14);
    }
    SUBCASE("C111 = c structure has E = (c, 0), tau = c du") {
        StatStructure s = StatStructure::load(kC111);
        std::vector<double> p = {0.1, 0.9};
        Evaluator ev(p);
        PointTensor e = s.trace_vector().evaluate(ev);
        CHECK(e.at({0}) == doctest::Approx(0.4));
        CHECK(e.at({1}) == doctest::Approx(0.0));
        PointTensor t = s.tau().evaluate(ev);
        CHECK(t.at({0}) == doctest::Approx(0.4));
        CHECK(t.at({1}) == doctest::Approx(0.0));
    }
    SUBCASE("tau = flat(E) on a random structure") {
        StatStructure s = StatStructure::load(kRandomish);
        std::mt19937_64 rng(4);
        for (const auto& p : box_points(rng, 2, 6, 0.0, 6.0)) {
            Evaluator ev(p);
            Matrix g = s.metric_at(ev);
            PointTensor e = s.trace_vector().evaluate(ev);
            PointTensor t = s.tau().evaluate(ev);
            PointTensor eb = flat(g, e);
            CHECK(max_abs(eb - t) < 1e-12);
        }
    }
}

TEST_CASE("S_X and divergences") {
    StatStructure trivial = StatStructure::load(kTrivial);
    // X = coordinate field on the flat structure: S_X = 0
    TensorField x(2, {Variance::Contra});
    x.at({0}) = Expr(1.0);
    TensorField s0 = trivial.s_field(ConnectionKind::Nabla, x);
    std::vector<double> p = {0.3, 0.4};
    CHECK(max_abs(s0.evaluate(p)) == 0.0);

    StatStructure s = StatStructure::load(kRandomish);
    std::vector<std::string> uv = {"u", "v"};
    TensorField xr(2, {Variance::Contra});
    xr.at({0}) = parse("sin(v) + 0.3*cos(u)", uv);
    xr.at({1}) = parse("cos(u+v)", uv);

    Expr tr_nabla = s.divergence_connection(ConnectionKind::Nabla, xr);
    Expr tr_hat = s.divergence_connection(ConnectionKind::Hat, xr);
    Expr tr_bar = s.divergence_connection(ConnectionKind::Bar, xr);
    Expr div_metric = s.divergence_metric(xr);
    const TensorField& tau = s.tau();

    std::mt19937_64 rng(5);
    for (const auto& q : box_points(rng, 2, 8, 0.2, 6.0)) {
        Evaluator ev(q);
        double tau_x = 0.0;
        for (int i = 0; i < 2; ++i) tau_x += ev(tau.at({i})) * ev(xr.at({i}));
        // tr S_X - tr S-hat_X = tau(X)
        CHECK(std::abs(ev(tr_nabla) - ev(tr_hat) - tau_x) < 1e-10);
        CHECK(std::abs(ev(tr_bar) - ev(tr_hat) + tau_x) < 1e-10);
        // div^nabla X = div^{nu_g} X + tau(X); div^{nu_g} agrees with tr S-hat
        CHECK(std::abs(ev(tr_nabla) - ev(div_metric) - tau_x) < 1e-10);
        CHECK(std::abs(ev(div_metric) - ev(tr_hat)) < 1e-10);
    }
}

TEST_CASE("duality of connections: X g(Y,Z) = g(nabla_X Y, Z) + g(Y, bar_X Z)") {
    StatStructure s = StatStructure::load(kRandomish);
    std::vector<std::string> uv = {"u", "v"};
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> coeff(-1.0, 1.0);

    for (int trial = 0; trial < 4; ++trial) {
        // random constant-coefficient fields (enough: duality is tensorial in
        // none of the slots, so product-rule content is exercised through g)
        TensorField X(2, {Variance::Contra}), Y(2, {Variance::Contra}), Z(2, {Variance::Contra});
        for (int i = 0; i < 2; ++i) {
            X.at({i}) = Expr(coeff(rng)) * parse("1 + 0.1*sin(u+v)", uv);
            Y.at({i}) = Expr(coeff(rng)) * parse("1 + 0.2*cos(u)", uv);
            Z.at({i}) = Expr(coeff(rng)) * parse("1 + 0.3*sin(v)", uv);
        }
        // symbolic scalar g(Y,Z)
        Expr gyz(0.0);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) gyz = gyz + s.metric().at({i, j}) * Y.at({i}) * Z.at({j});
        Expr lhs = directional_derivative(X, gyz);

        // nabla_X Y and bar_X Z via covariant derivative contraction with X
        TensorField dY = s.covariant_derivative(ConnectionKind::Nabla, Y);
        TensorField dZ = s.covariant_derivative(ConnectionKind::Bar, Z);
        for (const auto& q : box_points(rng, 2, 4, 0.0, 6.0)) {
            Evaluator ev(q);
            Matrix g = s.metric_at(ev);
            double rhs = 0.0;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double nxy_i = 0.0, bxz_j = 0.0;
                    for (int m = 0; m < 2; ++m) {
                        nxy_i += ev(X.at({m})) * ev(dY.at({m, i}));
                        bxz_j += ev(X.at({m})) * ev(dZ.at({m, j}));
                    }
                    rhs += g(i, j) * (nxy_i * ev(Z.at({j})) + ev(Y.at({i})) * bxz_j);
                }
            CHECK(std::abs(ev(lhs) - rhs) < 1e-10 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("hat is the average of nabla and bar") {
    StatStructure s = StatStructure::load(kRandomish);
    const TensorField& h = s.christoffel(ConnectionKind::Hat);
    const TensorField& nb = s.christoffel(ConnectionKind::Nabla);
    const TensorField& br = s.christoffel(ConnectionKind::Bar);
    std::vector<double> p = {1.1, 2.2};
    Evaluator ev(p);
    PointTensor avg = 0.5 * (nb.evaluate(ev) + br.evaluate(ev));
    CHECK(max_abs(avg - h.evaluate(ev)) < 1e-15);
}

TEST_CASE("lemma: X tr S = tr nabla_X S for all three connections") {
    StatStructure s = StatStructure::load(kRandomish);
    std::vector<std::string> uv = {"u", "v"};
    // random (1,1) tensor field
    TensorField S(2, {Variance::Contra, Variance::Co});
    S.at({0, 0}) = parse("sin(u) + 0.2*cos(v)", uv);
    S.at({0, 1}) = parse("0.5*cos(u+v)", uv);
    S.at({1, 0}) = parse("0.3*sin(v)", uv);
    S.at({1, 1}) = parse("1 + 0.1*sin(u)", uv);

    Expr trS(0.0);
    for (int i = 0; i < 2; ++i) trS = trS + S.at({i, i});

    std::mt19937_64 rng(7);
    for (ConnectionKind kind :
         {ConnectionKind::Hat, ConnectionKind::Nabla, ConnectionKind::Bar}) {
        TensorField dS = s.covariant_derivative(kind, S);
        for (const auto& q : box_points(rng, 2, 4, 0.0, 6.0)) {
            Evaluator ev(q);
            for (int x = 0; x < 2; ++x) {
                double lhs = ev(trS.derivative(x));
                double rhs = 0.0;
                for (int i = 0; i < 2; ++i) rhs += ev(dS.at({x, i, i}));
                CHECK(std::abs(lhs - rhs) < 1e-10 * (1.0 + std::abs(lhs)));
            }
        }
    }
}

TEST_CASE("validate") {
    std::mt19937_64 rng(8);
    auto pts = box_points(rng, 2, 12, 0.0, 6.0);

    SUBCASE("trivial passes") {
        StatStructure s = StatStructure::load(kTrivial);
        auto r = s.validate(pts);
        CHECK(r.passed());
        CHECK(r.trace_free);
        CHECK(r.ricci_symmetric);
    }
    SUBCASE("C111 = v flags non-symmetric Ricci") {
        StatStructure s = StatStructure::load(
            "dim 2\ncoords u v\ng 1 1 = 1\ng 2 2 = 1\nC 1 1 1 = v\n");
        auto r = s.validate(pts);
        CHECK(r.passed());  // still a valid statistical structure
        CHECK_FALSE(r.ricci_symmetric);
        // dtau = -du^dv: check the sign convention
        TensorField dt = d_one_form(s.tau());
        std::vector<double> p = {0.0, 0.0};
        Evaluator ev(p);
        CHECK(ev(dt.at({0, 1})) == doctest::Approx(-1.0));
    }
    SUBCASE("equiaffine weight consistent with tau") {
        // phi = exp(u) and C111 = 1 gives tau = du = d log phi
        StatStructure s = StatStructure::load(
            "dim 2\ncoords u v\ng 1 1 = 1\ng 2 2 = 1\nC 1 1 1 = 1\nphi = exp(u)\n");
        auto r = s.validate(pts);
        CHECK(r.passed());
    }
    SUBCASE("equiaffine weight inconsistent with tau") {
        StatStructure s = StatStructure::load(
            "dim 2\ncoords u v\ng 1 1 = 1\ng 2 2 = 1\nC 1 1 1 = 1\nphi = exp(2*u)\n");
        auto r = s.validate(pts);
        CHECK_FALSE(r.passed());
    }
    SUBCASE("non-SPD metric is a violation") {
        StatStructure s =
            StatStructure::load("dim 2\ncoords u v\ng 1 1 = u\ng 2 2 = 1\n");
        std::vector<std::vector<double>> bad = {{-1.0, 0.0}};
        auto r = s.validate(bad);
        CHECK_FALSE(r.passed());
        CHECK(r.violations[0].check == "spd");
    }
    SUBCASE("non-periodic coefficient under declared period") {
        StatStructure s = StatStructure::load(
            "dim 2\ncoords u v\nperiod u 6.283185307179586\nperiod v 6.283185307179586\n"
            "g 1 1 = 1 + 0.1*u\ng 2 2 = 1\n");
        auto r = s.validate(pts);
        CHECK_FALSE(r.passed());
    }
}
