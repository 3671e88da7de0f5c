#include "statgeo/structure.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace statgeo {

// ---------------------------------------------------------------------------
// TensorField

TensorField::TensorField(int n, std::vector<Variance> signature)
    : dim(n), sig(std::move(signature)) {
    std::size_t total = 1;
    for (std::size_t i = 0; i < sig.size(); ++i) total *= static_cast<std::size_t>(n);
    comps.assign(total, Expr(0.0));
}

namespace {
std::size_t flat_index(int dim, std::span<const int> idx) {
    std::size_t f = 0;
    for (int v : idx) f = f * static_cast<std::size_t>(dim) + static_cast<std::size_t>(v);
    return f;
}
}  // namespace

Expr& TensorField::at(std::span<const int> idx) {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index rank mismatch");
    return comps[flat_index(dim, idx)];
}

const Expr& TensorField::at(std::span<const int> idx) const {
    if (static_cast<int>(idx.size()) != rank()) throw std::invalid_argument("index rank mismatch");
    return comps[flat_index(dim, idx)];
}

PointTensor TensorField::evaluate(Evaluator& ev) const {
    PointTensor t(dim, sig);
    for (std::size_t i = 0; i < comps.size(); ++i) t.data[i] = ev(comps[i]);
    return t;
}

PointTensor TensorField::evaluate(std::span<const double> point) const {
    Evaluator ev(point);
    return evaluate(ev);
}

TensorField operator+(const TensorField& s, const TensorField& t) {
    if (s.sig != t.sig || s.dim != t.dim) throw std::invalid_argument("field shape mismatch");
    TensorField r = s;
    for (std::size_t i = 0; i < r.comps.size(); ++i) r.comps[i] = r.comps[i] + t.comps[i];
    return r;
}

TensorField operator-(const TensorField& s, const TensorField& t) {
    if (s.sig != t.sig || s.dim != t.dim) throw std::invalid_argument("field shape mismatch");
    TensorField r = s;
    for (std::size_t i = 0; i < r.comps.size(); ++i) r.comps[i] = r.comps[i] - t.comps[i];
    return r;
}

TensorField operator*(const Expr& c, const TensorField& t) {
    TensorField r = t;
    for (auto& e : r.comps) e = c * e;
    return r;
}

// ---------------------------------------------------------------------------
// symbolic determinant / adjugate (Laplace expansion; n <= 6 at desk scale)

namespace {

Expr laplace_det(const TensorField& g, const std::vector<int>& rows, const std::vector<int>& cols) {
    if (rows.size() == 1) return g.at({rows[0], cols[0]});
    Expr sum(0.0);
    for (std::size_t j = 0; j < cols.size(); ++j) {
        std::vector<int> sub_rows(rows.begin() + 1, rows.end());
        std::vector<int> sub_cols;
        for (std::size_t k = 0; k < cols.size(); ++k)
            if (k != j) sub_cols.push_back(cols[k]);
        Expr term = g.at({rows[0], cols[j]}) * laplace_det(g, sub_rows, sub_cols);
        sum = (j % 2 == 0) ? sum + term : sum - term;
    }
    return sum;
}

}  // namespace

// ---------------------------------------------------------------------------
// StatStructure

StatStructure::StatStructure(int n, std::vector<std::string> coord_names, TensorField g_field,
                             TensorField c_field, std::vector<std::optional<double>> periods,
                             std::optional<Expr> phi)
    : n_(n), coords_(std::move(coord_names)), g_(std::move(g_field)), c_(std::move(c_field)),
      periods_(std::move(periods)), phi_(std::move(phi)) {
    if (n_ <= 0) throw InputError("dimension must be positive");
    if (static_cast<int>(coords_.size()) != n_) throw InputError("coordinate count != dim");
    if (g_.dim != n_ || g_.rank() != 2) throw InputError("metric must be an n x n field");
    if (c_.dim != n_ || c_.rank() != 3) throw InputError("cubic form must be an n x n x n field");
    periods_.resize(n_);
}

bool StatStructure::fully_periodic() const {
    return std::all_of(periods_.begin(), periods_.end(),
                       [](const std::optional<double>& p) { return p.has_value(); });
}

const Expr& StatStructure::det_metric() const {
    if (!detg_) {
        std::vector<int> all(n_);
        for (int i = 0; i < n_; ++i) all[i] = i;
        detg_ = laplace_det(g_, all, all);
    }
    return *detg_;
}

Expr StatStructure::sqrt_det_metric() const { return sqrt(det_metric()); }

const TensorField& StatStructure::metric_inverse() const {
    if (!ginv_) {
        TensorField inv(n_, {Variance::Contra, Variance::Contra});
        const Expr& det = det_metric();
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) {
                // cofactor expansion: inv^{ij} = adj(g)_{ji} / det, adj via minors
                std::vector<int> rows, cols;
                for (int r = 0; r < n_; ++r)
                    if (r != j) rows.push_back(r);
                for (int c = 0; c < n_; ++c)
                    if (c != i) cols.push_back(c);
                Expr cof = (n_ == 1) ? Expr(1.0) : laplace_det(g_, rows, cols);
                if ((i + j) % 2 == 1) cof = -cof;
                inv.at({i, j}) = cof / det;
            }
        ginv_ = std::move(inv);
    }
    return *ginv_;
}

const TensorField& StatStructure::difference_tensor() const {
    if (!k_) {
        const TensorField& ginv = metric_inverse();
        TensorField k(n_, {Variance::Contra, Variance::Co, Variance::Co});
        for (int kk = 0; kk < n_; ++kk)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) {
                    Expr sum(0.0);
                    for (int l = 0; l < n_; ++l) sum = sum + ginv.at({kk, l}) * c_.at({i, j, l});
                    k.at({kk, i, j}) = sum;
                }
        k_ = std::move(k);
    }
    return *k_;
}

const TensorField& StatStructure::christoffel(ConnectionKind kind) const {
    auto build_hat = [&]() {
        const TensorField& ginv = metric_inverse();
        TensorField chr(n_, {Variance::Contra, Variance::Co, Variance::Co});
        // precompute partials of g
        std::vector<Expr> dg(static_cast<std::size_t>(n_) * n_ * n_, Expr(0.0));
        auto dg_at = [&](int l, int i, int j) -> Expr& {
            return dg[(static_cast<std::size_t>(l) * n_ + i) * n_ + j];
        };
        for (int l = 0; l < n_; ++l)
            for (int i = 0; i < n_; ++i)
                for (int j = 0; j < n_; ++j) dg_at(l, i, j) = g_.at({i, j}).derivative(l);
        for (int k = 0; k < n_; ++k)
            for (int i = 0; i < n_; ++i)
                for (int j = i; j < n_; ++j) {
                    Expr sum(0.0);
                    for (int l = 0; l < n_; ++l)
                        sum = sum + ginv.at({k, l}) *
                                        (dg_at(i, j, l) + dg_at(j, i, l) - dg_at(l, i, j));
                    Expr res = Expr(0.5) * sum;
                    chr.at({k, i, j}) = res;
                    chr.at({k, j, i}) = res;
                }
        return chr;
    };

    switch (kind) {
        case ConnectionKind::Hat:
            if (!chr_hat_) chr_hat_ = build_hat();
            return *chr_hat_;
        case ConnectionKind::Nabla:
            if (!chr_nabla_) chr_nabla_ = christoffel(ConnectionKind::Hat) + difference_tensor();
            return *chr_nabla_;
        case ConnectionKind::Bar:
            if (!chr_bar_) chr_bar_ = christoffel(ConnectionKind::Hat) - difference_tensor();
            return *chr_bar_;
    }
    throw std::logic_error("unreachable connection kind");
}

const TensorField& StatStructure::tau() const {
    if (!tau_) {
        const TensorField& k = difference_tensor();
        TensorField t(n_, {Variance::Co});
        for (int i = 0; i < n_; ++i) {
            Expr sum(0.0);
            for (int m = 0; m < n_; ++m) sum = sum + k.at({m, i, m});
            t.at({i}) = sum;
        }
        tau_ = std::move(t);
    }
    return *tau_;
}

const TensorField& StatStructure::trace_vector() const {
    if (!e_) {
        const TensorField& ginv = metric_inverse();
        const TensorField& t = tau();
        TensorField e(n_, {Variance::Contra});
        for (int k = 0; k < n_; ++k) {
            Expr sum(0.0);
            for (int m = 0; m < n_; ++m) sum = sum + ginv.at({k, m}) * t.at({m});
            e.at({k}) = sum;
        }
        e_ = std::move(e);
    }
    return *e_;
}

TensorField StatStructure::covariant_derivative(ConnectionKind kind, const TensorField& f) const {
    const TensorField& chr = christoffel(kind);
    int rank = f.rank();
    std::vector<Variance> out_sig;
    out_sig.push_back(Variance::Co);
    out_sig.insert(out_sig.end(), f.sig.begin(), f.sig.end());
    TensorField out(n_, out_sig);

    std::vector<int> idx(rank, 0);
    std::vector<int> src(rank, 0);
    bool more = true;
    if (rank == 0) {
        for (int d = 0; d < n_; ++d) out.at({d}) = f.comps[0].derivative(d);
        return out;
    }
    while (more) {
        for (int d = 0; d < n_; ++d) {
            Expr sum = f.at(idx).derivative(d);
            for (int slot = 0; slot < rank; ++slot) {
                src = idx;
                if (f.sig[slot] == Variance::Contra) {
                    for (int m = 0; m < n_; ++m) {
                        src[slot] = m;
                        sum = sum + chr.at({idx[slot], d, m}) * f.at(src);
                    }
                } else {
                    for (int m = 0; m < n_; ++m) {
                        src[slot] = m;
                        sum = sum - chr.at({m, d, idx[slot]}) * f.at(src);
                    }
                }
            }
            std::vector<int> out_idx;
            out_idx.reserve(rank + 1);
            out_idx.push_back(d);
            out_idx.insert(out_idx.end(), idx.begin(), idx.end());
            out.at(out_idx) = sum;
        }
        more = next_index(idx, n_);
    }
    return out;
}

TensorField StatStructure::s_field(ConnectionKind kind, const TensorField& x) const {
    if (x.rank() != 1 || x.sig[0] != Variance::Contra)
        throw std::invalid_argument("s_field expects a vector field");
    const TensorField& chr = christoffel(kind);
    TensorField s(n_, {Variance::Contra, Variance::Co});
    for (int k = 0; k < n_; ++k)
        for (int j = 0; j < n_; ++j) {
            Expr sum = x.at({k}).derivative(j);
            for (int m = 0; m < n_; ++m) sum = sum + chr.at({k, j, m}) * x.at({m});
            s.at({k, j}) = sum;
        }
    return s;
}

Expr StatStructure::divergence_metric(const TensorField& x) const {
    Expr root = sqrt_det_metric();
    Expr sum(0.0);
    for (int i = 0; i < n_; ++i) sum = sum + (root * x.at({i})).derivative(i);
    return sum / root;
}

Expr StatStructure::divergence_connection(ConnectionKind kind, const TensorField& x) const {
    TensorField s = s_field(kind, x);
    Expr sum(0.0);
    for (int k = 0; k < n_; ++k) sum = sum + s.at({k, k});
    return sum;
}

Matrix StatStructure::metric_at(Evaluator& ev) const {
    Matrix m(n_, n_);
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j) m(i, j) = ev(g_.at({i, j}));
    return m;
}

Matrix StatStructure::metric_inverse_at(Evaluator& ev) const { return inverse(metric_at(ev)); }

bool StatStructure::is_trace_free(std::span<const std::vector<double>> points, double tol) const {
    const TensorField& t = tau();
    for (const auto& p : points) {
        Evaluator ev(p);
        for (int i = 0; i < n_; ++i)
            if (std::abs(ev(t.at({i}))) > tol) return false;
    }
    return true;
}

Expr directional_derivative(const TensorField& x, const Expr& f) {
    Expr sum(0.0);
    for (int i = 0; i < x.dim; ++i) sum = sum + x.at({i}) * f.derivative(i);
    return sum;
}

TensorField d_one_form(const TensorField& tau) {
    TensorField d(tau.dim, {Variance::Co, Variance::Co});
    for (int i = 0; i < tau.dim; ++i)
        for (int j = 0; j < tau.dim; ++j)
            d.at({i, j}) = tau.at({j}).derivative(i) - tau.at({i}).derivative(j);
    return d;
}

ValidationReport StatStructure::validate(std::span<const std::vector<double>> points) const {
    ValidationReport report;
    report.trace_free = true;
    report.ricci_symmetric = true;

    const TensorField& t = tau();
    TensorField dt = d_one_form(t);
    const TensorField& k = difference_tensor();

    for (const auto& p : points) {
        Evaluator ev(p);
        std::vector<double> pt(p.begin(), p.end());

        Matrix g;
        try {
            g = metric_at(ev);
        } catch (const EvalError& err) {
            report.violations.push_back({"domain", pt, 0.0, err.what()});
            continue;
        }

        double det = determinant(g);
        if (det <= 1e-12) {
            report.violations.push_back({"spd", pt, det, "metric is degenerate (det <= 1e-12)"});
            continue;
        }
        auto eig = jacobi_eigen(g);
        if (eig.values.front() <= 0.0) {
            report.violations.push_back(
                {"spd", pt, eig.values.front(), "metric is not positive definite"});
            continue;
        }

        // K_X self-adjointness w.r.t. g (holds by construction; residual check)
        PointTensor kp = k.evaluate(ev);
        double self_adj = 0.0;
        for (int x = 0; x < n_; ++x)
            for (int y = 0; y < n_; ++y)
                for (int z = 0; z < n_; ++z) {
                    double kxy_z = 0.0, kxz_y = 0.0;
                    for (int m = 0; m < n_; ++m) {
                        kxy_z += g(m, z) * kp.at({m, x, y});
                        kxz_y += g(m, y) * kp.at({m, x, z});
                    }
                    self_adj = std::max(self_adj, std::abs(kxy_z - kxz_y));
                }
        if (self_adj > 1e-10)
            report.violations.push_back(
                {"self_adjoint", pt, self_adj, "K_X is not g-self-adjoint"});

        for (int i = 0; i < n_; ++i)
            if (std::abs(ev(t.at({i}))) > 1e-10) report.trace_free = false;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                if (std::abs(ev(dt.at({i, j}))) > 1e-10) report.ricci_symmetric = false;

        if (phi_) {
            double phi_val;
            try {
                phi_val = ev(*phi_);
            } catch (const EvalError& err) {
                report.violations.push_back({"domain", pt, 0.0, err.what()});
                continue;
            }
            if (phi_val <= 0.0) {
                report.violations.push_back(
                    {"equiaffine", pt, phi_val, "weight phi must be positive"});
                continue;
            }
            // equiaffine consistency: tau = d log phi
            double worst = 0.0;
            for (int i = 0; i < n_; ++i) {
                double dlog = ev(phi_->derivative(i)) / phi_val;
                worst = std::max(worst, std::abs(dlog - ev(t.at({i}))));
            }
            if (worst > 1e-8)
                report.violations.push_back(
                    {"equiaffine", pt, worst, "tau != d log phi at sample point"});
        }
    }

    // periodicity of all coefficient expressions
    if (!points.empty()) {
        for (int axis = 0; axis < n_; ++axis) {
            if (!periods_[axis]) continue;
            double period = *periods_[axis];
            auto check_periodic = [&](const Expr& e, const std::string& what) {
                for (const auto& p : points) {
                    std::vector<double> shifted(p.begin(), p.end());
                    shifted[axis] += period;
                    double a, b;
                    try {
                        a = e.evaluate(p);
                        b = e.evaluate(shifted);
                    } catch (const EvalError&) {
                        return;  // domain issues are reported elsewhere
                    }
                    if (std::abs(a - b) > 1e-9 * (1.0 + std::abs(a))) {
                        report.violations.push_back(
                            {"periodicity", std::vector<double>(p.begin(), p.end()),
                             std::abs(a - b), what + " is not periodic in " + coords_[axis]});
                        return;
                    }
                }
            };
            for (int i = 0; i < n_; ++i)
                for (int j = i; j < n_; ++j) check_periodic(g_.at({i, j}), "metric component");
            for (int i = 0; i < n_; ++i)
                for (int j = i; j < n_; ++j)
                    for (int l = j; l < n_; ++l) check_periodic(c_.at({i, j, l}), "cubic component");
            if (phi_) check_periodic(*phi_, "phi");
        }
    }

    return report;
}

// ---------------------------------------------------------------------------
// file format

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> tokens;
    std::istringstream is(line);
    std::string tok;
    while (is >> tok) tokens.push_back(tok);
    return tokens;
}

[[noreturn]] void fail(int lineno, const std::string& msg) {
    throw InputError("line " + std::to_string(lineno) + ": " + msg);
}

}  // namespace

StatStructure StatStructure::load(const std::string& text) {
    std::istringstream input(text);
    std::string raw;
    int lineno = 0;

    int n = -1;
    std::vector<std::string> coords;
    std::vector<std::optional<double>> periods;
    std::vector<std::optional<Expr>> g_entries, c_entries;
    std::optional<Expr> phi;

    auto need_header = [&](int ln) {
        if (n < 0) fail(ln, "dim must come first");
        if (coords.empty()) fail(ln, "coords must come before entries");
    };
    auto parse_index = [&](const std::string& tok, int ln) {
        int v;
        try {
            std::size_t used = 0;
            v = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            fail(ln, "bad index '" + tok + "'");
        }
        if (v < 1 || v > n) fail(ln, "index " + tok + " out of [1," + std::to_string(n) + "]");
        return v - 1;
    };
    auto parse_rhs = [&](const std::string& body, int ln) {
        try {
            return parse(body, coords);
        } catch (const ParseError& err) {
            fail(ln, std::string("expression error: ") + err.what());
        }
    };

    while (std::getline(input, raw)) {
        ++lineno;
        std::string line = raw;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);

        std::string head = line, body;
        bool has_eq = false;
        if (auto eq = line.find('='); eq != std::string::npos) {
            head = line.substr(0, eq);
            body = line.substr(eq + 1);
            has_eq = true;
        }
        auto tokens = tokenize(head);
        if (tokens.empty()) {
            if (has_eq) fail(lineno, "missing key before '='");
            continue;
        }
        const std::string& key = tokens[0];

        if (key == "dim") {
            if (n >= 0) fail(lineno, "duplicate dim");
            if (tokens.size() != 2 || has_eq) fail(lineno, "usage: dim N");
            try {
                n = std::stoi(tokens[1]);
            } catch (const std::exception&) {
                fail(lineno, "bad dimension '" + tokens[1] + "'");
            }
            if (n < 1 || n > 6) fail(lineno, "dimension must be in [1,6]");
            periods.assign(n, std::nullopt);
            g_entries.assign(static_cast<std::size_t>(n) * n, std::nullopt);
            c_entries.assign(static_cast<std::size_t>(n) * n * n, std::nullopt);
        } else if (key == "coords") {
            if (n < 0) fail(lineno, "dim must come before coords");
            if (!coords.empty()) fail(lineno, "duplicate coords");
            if (static_cast<int>(tokens.size()) != n + 1)
                fail(lineno, "expected " + std::to_string(n) + " coordinate names");
            coords.assign(tokens.begin() + 1, tokens.end());
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (coords[i] == coords[j]) fail(lineno, "coordinate names must be distinct");
        } else if (key == "period") {
            need_header(lineno);
            if (tokens.size() != 3) fail(lineno, "usage: period name L");
            auto it = std::find(coords.begin(), coords.end(), tokens[1]);
            if (it == coords.end()) fail(lineno, "unknown coordinate '" + tokens[1] + "'");
            int axis = static_cast<int>(it - coords.begin());
            if (periods[axis]) fail(lineno, "duplicate period for " + tokens[1]);
            try {
                periods[axis] = std::stod(tokens[2]);
            } catch (const std::exception&) {
                fail(lineno, "bad period '" + tokens[2] + "'");
            }
            if (*periods[axis] <= 0.0) fail(lineno, "period must be positive");
        } else if (key == "g") {
            need_header(lineno);
            if (tokens.size() != 3 || !has_eq) fail(lineno, "usage: g i j = EXPR");
            int i = parse_index(tokens[1], lineno);
            int j = parse_index(tokens[2], lineno);
            if (i > j) fail(lineno, "metric indices must satisfy i <= j");
            auto& slot = g_entries[static_cast<std::size_t>(i) * n + j];
            if (slot) fail(lineno, "duplicate metric entry");
            slot = parse_rhs(body, lineno);
        } else if (key == "C") {
            need_header(lineno);
            if (tokens.size() != 4 || !has_eq) fail(lineno, "usage: C i j k = EXPR");
            int i = parse_index(tokens[1], lineno);
            int j = parse_index(tokens[2], lineno);
            int k = parse_index(tokens[3], lineno);
            if (!(i <= j && j <= k)) fail(lineno, "cubic indices must satisfy i <= j <= k");
            auto& slot = c_entries[(static_cast<std::size_t>(i) * n + j) * n + k];
            if (slot) fail(lineno, "duplicate cubic entry");
            slot = parse_rhs(body, lineno);
        } else if (key == "phi") {
            need_header(lineno);
            if (tokens.size() != 1 || !has_eq) fail(lineno, "usage: phi = EXPR");
            if (phi) fail(lineno, "duplicate phi");
            phi = parse_rhs(body, lineno);
        } else {
            fail(lineno, "unknown key '" + key + "'");
        }
    }

    if (n < 0) throw InputError("missing dim");
    if (coords.empty()) throw InputError("missing coords");
    for (int i = 0; i < n; ++i)
        if (!g_entries[static_cast<std::size_t>(i) * n + i])
            throw InputError("missing diagonal metric entry g " + std::to_string(i + 1) + " " +
                             std::to_string(i + 1));

    TensorField g(n, {Variance::Co, Variance::Co});
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Expr e = g_entries[static_cast<std::size_t>(i) * n + j].value_or(Expr(0.0));
            g.at({i, j}) = e;
            g.at({j, i}) = e;
        }

    TensorField c(n, {Variance::Co, Variance::Co, Variance::Co});
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = j; k < n; ++k) {
                Expr e = c_entries[(static_cast<std::size_t>(i) * n + j) * n + k].value_or(Expr(0.0));
                int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
                for (auto& p : perm) c.at({p[0], p[1], p[2]}) = e;
            }

    return StatStructure(n, std::move(coords), std::move(g), std::move(c), std::move(periods),
                         std::move(phi));
}

StatStructure StatStructure::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load(buf.str());
}

}  // namespace statgeo
