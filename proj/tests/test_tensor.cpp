#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "statgeo/tensor.hpp"

using namespace statgeo;

namespace {

Matrix random_spd(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix b(n, n);
    for (double& v : b.a) v = u(rng);
    Matrix g = transpose(b) * b;
    for (int i = 0; i < n; ++i) g(i, i) += 0.5 + static_cast<double>(n);
    return g;
}

Matrix random_g_skew(std::mt19937_64& rng, const Matrix& g) {
    // A = g^{-1} W with W antisymmetric gives g(AX,Y) = -g(X,AY)
    int n = g.rows;
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix w(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            w(i, j) = u(rng);
            w(j, i) = -w(i, j);
        }
    return inverse(g) * w;
}

PointTensor random_tensor(std::mt19937_64& rng, int n, std::vector<Variance> sig) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    PointTensor t(n, std::move(sig));
    for (double& v : t.data) v = u(rng);
    return t;
}

// Oracle: inner product by brute-force summation over all index pairs with
// explicit g / g^{-1} weights, no slot-raising shortcuts.
double inner_product_oracle(const Matrix& g, const PointTensor& s, const PointTensor& t) {
    Matrix ginv = inverse(g);
    int k = s.rank(), n = s.dim;
    if (k == 0) return s.data[0] * t.data[0];
    std::vector<int> i(k, 0), j(k, 0);
    double total = 0.0;
    do {
        std::fill(j.begin(), j.end(), 0);
        do {
            double w = 1.0;
            for (int slot = 0; slot < k; ++slot)
                w *= (s.sig[slot] == Variance::Co) ? ginv(i[slot], j[slot]) : g(i[slot], j[slot]);
            if (w != 0.0) total += w * s.at(i) * t.at(j);
        } while (next_index(j, n));
    } while (next_index(i, n));
    return total;
}

// Fully symmetric constant cubic form in n=2 with the trace-free
// parametrization (a, b): C111 = a = -C122, C222 = b = -C112.
PointTensor trace_free_cubic(double a, double b) {
    PointTensor c(2, {Variance::Co, Variance::Co, Variance::Co});
    auto set = [&](int i, int j, int k, double v) {
        int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
        for (auto& p : perm) c.at({p[0], p[1], p[2]}) = v;
    };
    set(0, 0, 0, a);
    set(0, 1, 1, -a);
    set(1, 1, 1, b);
    set(0, 0, 1, -b);
    return c;
}

}  // namespace

TEST_CASE("contract: traces") {
    // trace of the identity (1,1)-tensor in n=3
    PointTensor id(3, {Variance::Contra, Variance::Co});
    for (int i = 0; i < 3; ++i) id.at({i, i}) = 1.0;
    PointTensor tr = contract(id, 0, 1);
    CHECK(tr.rank() == 0);
    CHECK(tr.data[0] == doctest::Approx(3.0));

    // tr_g g = n for random SPD g
    std::mt19937_64 rng(1);
    for (int n : {2, 3, 4}) {
        Matrix g = random_spd(rng, n);
        PointTensor gt = PointTensor::from_matrix(g, Variance::Co, Variance::Co);
        PointTensor r = contract(gt, 0, 1, inverse(g));
        CHECK(r.data[0] == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
    }
}

TEST_CASE("contract: tr_g of the cubic form gives E") {
    // C111 = c, everything else 0; g = identity: E = (c, 0)
    double c = 0.7;
    PointTensor C(2, {Variance::Co, Variance::Co, Variance::Co});
    C.at({0, 0, 0}) = c;
    Matrix g = Matrix::identity(2);
    PointTensor e = contract(C, 0, 1, inverse(g));
    CHECK(e.at({0}) == doctest::Approx(c));
    CHECK(e.at({1}) == doctest::Approx(0.0));

    // oracle: brute-force sum over an orthonormal frame
    double e0 = 0.0;
    for (int i = 0; i < 2; ++i) e0 += C.at({i, i, 0});
    CHECK(e.at({0}) == doctest::Approx(e0));
}

TEST_CASE("contract errors") {
    PointTensor t(2, {Variance::Co, Variance::Co});
    CHECK_THROWS_AS(contract(t, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(contract(t, 0, 5), std::invalid_argument);
    CHECK_THROWS_AS(contract(t, 0, 1), std::invalid_argument);  // missing metric
}

TEST_CASE("inner product: |K|^2 of the trace-free cubic form") {
    PointTensor C = trace_free_cubic(0.3, 0.0);
    Matrix g = Matrix::identity(2);
    CHECK(inner_product(g, C, C) == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(inner_product(g, C, C) == doctest::Approx(inner_product_oracle(g, C, C)));

    PointTensor zero(2, {Variance::Co, Variance::Co});
    CHECK(inner_product(g, zero, zero) == 0.0);

    // |E|^2 for the C111=c structure
    double c = 0.4;
    PointTensor e = PointTensor::vector(std::vector<double>{c, 0.0});
    CHECK(inner_product(g, e, e) == doctest::Approx(c * c));
}

TEST_CASE("inner product properties against oracle") {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        Matrix g = random_spd(rng, n);
        PointTensor s = random_tensor(rng, n, {Variance::Co, Variance::Contra, Variance::Co});
        PointTensor t = random_tensor(rng, n, {Variance::Co, Variance::Contra, Variance::Co});
        double st = inner_product(g, s, t);
        CHECK(st == doctest::Approx(inner_product_oracle(g, s, t)).epsilon(1e-10));
        CHECK(st == doctest::Approx(inner_product(g, t, s)).epsilon(1e-10));
        double ss = inner_product(g, s, s);
        CHECK(ss > 0.0);
    }
}

TEST_CASE("musical isomorphisms") {
    Matrix g = Matrix::identity(2);
    PointTensor x = PointTensor::vector(std::vector<double>{1.0, 2.0});
    PointTensor xb = flat(g, x);
    CHECK(xb.at({0}) == doctest::Approx(1.0));
    CHECK(xb.at({1}) == doctest::Approx(2.0));

    Matrix d(2, 2);
    d(0, 0) = 2.0;
    d(1, 1) = 1.0;
    PointTensor y = PointTensor::vector(std::vector<double>{1.0, 0.0});
    PointTensor yb = flat(d, y);
    CHECK(yb.at({0}) == doctest::Approx(2.0));
    CHECK(yb.at({1}) == doctest::Approx(0.0));

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 3);
        Matrix gg = random_spd(rng, n);
        PointTensor v = random_tensor(rng, n, {Variance::Contra});
        PointTensor back = sharp(gg, flat(gg, v));
        for (int i = 0; i < n; ++i)
            CHECK(back.data[i] == doctest::Approx(v.data[i]).epsilon(1e-12));
    }
}

TEST_CASE("gram_schmidt") {
    Matrix id = Matrix::identity(3);
    Frame f = gram_schmidt(id);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(f.rows(i, j) == doctest::Approx(i == j ? 1.0 : 0.0));

    Matrix d(2, 2);
    d(0, 0) = 4.0;
    d(1, 1) = 1.0;
    Frame fd = gram_schmidt(d);
    CHECK(fd.rows(0, 0) == doctest::Approx(0.5));
    CHECK(fd.rows(0, 1) == doctest::Approx(0.0));
    CHECK(fd.rows(1, 1) == doctest::Approx(1.0));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 30; ++trial) {
        int n = 2 + static_cast<int>(rng() % 4);
        Matrix g = random_spd(rng, n);
        Frame fr = gram_schmidt(g);
        // frame rows orthonormal w.r.t. g
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b) s += fr.rows(i, a) * g(a, b) * fr.rows(j, b);
                CHECK(std::abs(s - (i == j ? 1.0 : 0.0)) < 1e-12);
            }
    }

    Matrix bad(2, 2);
    bad(0, 0) = 1.0;
    bad(1, 1) = -1.0;
    CHECK_THROWS_AS(gram_schmidt(bad), std::invalid_argument);
}

TEST_CASE("so_action kills the metric and is skew on tensors") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        Matrix g = random_spd(rng, n);
        Matrix a = random_g_skew(rng, g);

        PointTensor gt = PointTensor::from_matrix(g, Variance::Co, Variance::Co);
        CHECK(max_abs(so_action(a, gt)) < 1e-12);

        PointTensor s = random_tensor(rng, n, {Variance::Co, Variance::Co});
        PointTensor t = random_tensor(rng, n, {Variance::Co, Variance::Co});
        double lhs = inner_product(g, so_action(a, s), t) + inner_product(g, s, so_action(a, t));
        CHECK(std::abs(lhs) < 1e-10);
    }
}

TEST_CASE("so_action rotation generator on du") {
    // A e1 = -e2, A e2 = e1 (so A . du = -dv with the differentiation action)
    Matrix a(2, 2);
    a(0, 1) = 1.0;
    a(1, 0) = -1.0;
    PointTensor du = PointTensor::covector(std::vector<double>{1.0, 0.0});
    PointTensor r = so_action(a, du);
    CHECK(r.at({0}) == doctest::Approx(0.0));
    CHECK(r.at({1}) == doctest::Approx(-1.0));
}

TEST_CASE("so_action spanning-set annihilation implies zero form") {
    // if A.omega = 0 for all so(n) basis elements then omega = 0 (0 < k < n)
    for (int n : {2, 3}) {
        for (int k = 1; k < n; ++k) {
            std::mt19937_64 rng(100 + n * 10 + k);
            std::vector<Variance> sig(k, Variance::Co);
            PointTensor omega = random_tensor(rng, n, sig);
            // antisymmetrize (k<=2 here)
            if (k == 2) {
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j <= i; ++j)
                        omega.at({i, j}) = (i == j) ? 0.0 : -omega.at({j, i});
            }
            if (max_abs(omega) < 1e-3) omega.data[0] += 1.0;
            double worst = 0.0;
            for (int p = 0; p < n; ++p)
                for (int q = p + 1; q < n; ++q) {
                    Matrix a(n, n);
                    a(p, q) = 1.0;
                    a(q, p) = -1.0;
                    worst = std::max(worst, max_abs(so_action(a, omega)));
                }
            CHECK(worst > 1e-6);  // some generator must see a nonzero form
        }
    }
}

TEST_CASE("jacobi_eigen on fixed matrices") {
    Matrix d(3, 3);
    d(0, 0) = 3.0;
    d(1, 1) = 1.0;
    d(2, 2) = 2.0;
    auto r = jacobi_eigen(d);
    CHECK(r.values[0] == doctest::Approx(1.0));
    CHECK(r.values[1] == doctest::Approx(2.0));
    CHECK(r.values[2] == doctest::Approx(3.0));

    Matrix f(2, 2);
    f(0, 1) = 1.0;
    f(1, 0) = 1.0;
    auto rf = jacobi_eigen(f);
    CHECK(rf.values[0] == doctest::Approx(-1.0));
    CHECK(rf.values[1] == doctest::Approx(1.0));
    // sign convention: first significant component positive
    CHECK(rf.vectors(0, 0) > 0.0);
    CHECK(rf.vectors(0, 1) > 0.0);

    Matrix bad(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(jacobi_eigen(bad), std::invalid_argument);
}

TEST_CASE("jacobi_eigen reconstruction on random symmetric matrices") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 9);
        Matrix s(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) s(i, j) = s(j, i) = u(rng);
        auto r = jacobi_eigen(s);
        Matrix lam(n, n);
        for (int i = 0; i < n; ++i) lam(i, i) = r.values[i];
        Matrix rec = r.vectors * lam * transpose(r.vectors);
        double norm = frobenius_norm(s);
        double err = 0.0;
        for (std::size_t i = 0; i < s.a.size(); ++i) err = std::max(err, std::abs(rec.a[i] - s.a[i]));
        CHECK(err <= 1e-9 * (1.0 + norm));
        for (int i = 1; i < n; ++i) CHECK(r.values[i - 1] <= r.values[i] + 1e-14);
    }
}

TEST_CASE("symmetric_eigenvalues matches jacobi_eigen") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        int n = 5 + static_cast<int>(rng() % 60);
        Matrix s(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) s(i, j) = s(j, i) = u(rng);
        auto jac = jacobi_eigen(s);
        auto ql = symmetric_eigenvalues(s);
        REQUIRE(ql.size() == jac.values.size());
        double norm = frobenius_norm(s);
        for (std::size_t i = 0; i < ql.size(); ++i)
            CHECK(std::abs(ql[i] - jac.values[i]) <= 1e-9 * (1.0 + norm));
    }
}

TEST_CASE("metric contraction is frame independent") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        int n = 2 + static_cast<int>(rng() % 2);
        Matrix g = random_spd(rng, n);
        PointTensor s = random_tensor(rng, n, {Variance::Co, Variance::Co, Variance::Co});
        // coordinate route
        PointTensor traced = contract(s, 0, 1, inverse(g));
        // orthonormal-frame route: sum_i s(e_i, e_i, .)
        Frame f = gram_schmidt(g);
        for (int z = 0; z < n; ++z) {
            double frame_sum = 0.0;
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < n; ++a)
                    for (int b = 0; b < n; ++b)
                        frame_sum += f.rows(i, a) * f.rows(i, b) * s.at({a, b, z});
            CHECK(std::abs(frame_sum - traced.at({z})) < 1e-10);
        }
    }
}
