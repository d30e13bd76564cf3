#include "torusflow/forms.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace torusflow {

namespace {

ScalarField pointwise(const ScalarField& a, const ScalarField& b) {
    ScalarField out(a.grid());
    for (std::size_t i = 0; i < out.size(); i++) out[i] = a[i] * b[i];
    return out;
}

// sign of the permutation given by the first len entries of p
int perm_sign(const int* p, int len) {
    int s = 1;
    for (int i = 0; i < len; i++)
        for (int j = i + 1; j < len; j++)
            if (p[i] > p[j]) s = -s;
    return s;
}

void check_same_grid(const TorusGrid& a, const TorusGrid& b) {
    if (!(a == b)) throw std::invalid_argument("operands live on different grids");
}

}  // namespace

VectorField& VectorField::operator+=(const VectorField& o) {
    check_same_grid(grid_, o.grid_);
    for (int a = 0; a < dim(); a++) c_[a] += o.c_[a];
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    check_same_grid(grid_, o.grid_);
    for (int a = 0; a < dim(); a++) c_[a] -= o.c_[a];
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    for (auto& f : c_) f *= s;
    return *this;
}

VectorField operator+(VectorField a, const VectorField& b) { a += b; return a; }
VectorField operator-(VectorField a, const VectorField& b) { a -= b; return a; }
VectorField operator*(double s, VectorField a) { a *= s; return a; }

int binom(int n, int k) {
    if (k < 0 || k > n) return 0;
    long r = 1;
    for (int i = 0; i < k; i++) r = r * (n - i) / (i + 1);
    return static_cast<int>(r);
}

const std::vector<std::array<int, 4>>& index_tuples(int dim, int k) {
    static std::map<std::pair<int, int>, std::vector<std::array<int, 4>>> cache;
    auto key = std::make_pair(dim, k);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    if (k < 0 || k > dim) throw std::invalid_argument("form degree out of range");
    std::vector<std::array<int, 4>> out;
    std::array<int, 4> t{};
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == k) {
            out.push_back(t);
            return;
        }
        for (int i = start; i < dim; i++) {
            t[static_cast<std::size_t>(depth)] = i;
            rec(i + 1, depth + 1);
        }
    };
    rec(0, 0);
    return cache.emplace(key, std::move(out)).first->second;
}

int tuple_position(int dim, int k, std::span<const int> idx) {
    const auto& tab = index_tuples(dim, k);
    for (std::size_t p = 0; p < tab.size(); p++) {
        bool match = true;
        for (int a = 0; a < k; a++) match = match && tab[p][static_cast<std::size_t>(a)] == idx[static_cast<std::size_t>(a)];
        if (match) return static_cast<int>(p);
    }
    throw std::invalid_argument("tuple is not an increasing multi-index");
}

KForm::KForm(const TorusGrid& g, int degree) : grid_(g), degree_(degree) {
    if (degree < 0 || degree > g.dim) throw std::invalid_argument("form degree out of range");
    c_.assign(static_cast<std::size_t>(binom(g.dim, degree)), ScalarField(g));
}

KForm& KForm::operator+=(const KForm& o) {
    check_same_grid(grid_, o.grid_);
    if (degree_ != o.degree_) throw std::invalid_argument("form degrees differ");
    for (std::size_t i = 0; i < c_.size(); i++) c_[i] += o.c_[i];
    return *this;
}

KForm& KForm::operator-=(const KForm& o) {
    check_same_grid(grid_, o.grid_);
    if (degree_ != o.degree_) throw std::invalid_argument("form degrees differ");
    for (std::size_t i = 0; i < c_.size(); i++) c_[i] -= o.c_[i];
    return *this;
}

KForm& KForm::operator*=(double s) {
    for (auto& f : c_) f *= s;
    return *this;
}

KForm operator+(KForm a, const KForm& b) { a += b; return a; }
KForm operator-(KForm a, const KForm& b) { a -= b; return a; }
KForm operator*(double s, KForm a) { a *= s; return a; }

KForm exterior_derivative(const KForm& a) {
    const int dim = a.grid().dim;
    const int k = a.degree();
    if (k >= dim) throw std::invalid_argument("exterior derivative would exceed top degree");
    KForm out(a.grid(), k + 1);
    const auto& tuples = index_tuples(dim, k + 1);
    for (std::size_t oi = 0; oi < tuples.size(); oi++) {
        for (int p = 0; p <= k; p++) {
            int sub[4];
            int m = 0;
            for (int q = 0; q <= k; q++)
                if (q != p) sub[m++] = tuples[oi][static_cast<std::size_t>(q)];
            int pos = tuple_position(dim, k, std::span<const int>(sub, static_cast<std::size_t>(k)));
            ScalarField term = spectral_derivative(a.comp(pos), tuples[oi][static_cast<std::size_t>(p)]);
            if (p % 2)
                out.comp(static_cast<int>(oi)) -= term;
            else
                out.comp(static_cast<int>(oi)) += term;
        }
    }
    return out;
}

KForm hodge_star(const KForm& a) {
    const int dim = a.grid().dim;
    const int k = a.degree();
    KForm out(a.grid(), dim - k);
    const auto& tuples = index_tuples(dim, k);
    for (std::size_t i = 0; i < tuples.size(); i++) {
        bool used[4] = {false, false, false, false};
        int joined[4];
        for (int q = 0; q < k; q++) {
            joined[q] = tuples[i][static_cast<std::size_t>(q)];
            used[joined[q]] = true;
        }
        int m = k;
        int comp[4];
        int cm = 0;
        for (int ax = 0; ax < dim; ax++)
            if (!used[ax]) {
                joined[m++] = ax;
                comp[cm++] = ax;
            }
        int sign = perm_sign(joined, dim);
        int pos = tuple_position(dim, dim - k, std::span<const int>(comp, static_cast<std::size_t>(dim - k)));
        ScalarField term = a.comp(static_cast<int>(i));
        term *= static_cast<double>(sign);
        out.comp(pos) += term;
    }
    return out;
}

KForm codifferential(const KForm& a) {
    if (a.degree() == 0) throw std::invalid_argument("codifferential of a 0-form");
    KForm out = hodge_star(exterior_derivative(hodge_star(a)));
    out *= -1.0;
    return out;
}

KForm wedge(const KForm& a, const KForm& b) {
    check_same_grid(a.grid(), b.grid());
    const int dim = a.grid().dim;
    const int ka = a.degree(), kb = b.degree();
    if (ka + kb > dim) throw std::invalid_argument("wedge degree exceeds dimension");
    KForm out(a.grid(), ka + kb);
    const auto& ta = index_tuples(dim, ka);
    const auto& tb = index_tuples(dim, kb);
    for (std::size_t ia = 0; ia < ta.size(); ia++) {
        for (std::size_t ib = 0; ib < tb.size(); ib++) {
            int joined[4];
            bool used[4] = {false, false, false, false};
            bool clash = false;
            for (int q = 0; q < ka; q++) {
                joined[q] = ta[ia][static_cast<std::size_t>(q)];
                used[joined[q]] = true;
            }
            for (int q = 0; q < kb; q++) {
                int ax = tb[ib][static_cast<std::size_t>(q)];
                if (used[ax]) {
                    clash = true;
                    break;
                }
                joined[ka + q] = ax;
            }
            if (clash) continue;
            int sign = perm_sign(joined, ka + kb);
            int sorted[4];
            std::copy(joined, joined + ka + kb, sorted);
            std::sort(sorted, sorted + ka + kb);
            int pos = tuple_position(dim, ka + kb, std::span<const int>(sorted, static_cast<std::size_t>(ka + kb)));
            ScalarField term = pointwise(a.comp(static_cast<int>(ia)), b.comp(static_cast<int>(ib)));
            term *= static_cast<double>(sign);
            out.comp(pos) += term;
        }
    }
    return out;
}

KForm interior_product(const VectorField& x, const KForm& a) {
    check_same_grid(x.grid(), a.grid());
    const int dim = a.grid().dim;
    const int k = a.degree();
    if (k == 0) throw std::invalid_argument("interior product of a 0-form");
    KForm out(a.grid(), k - 1);
    const auto& tuples = index_tuples(dim, k);
    for (std::size_t i = 0; i < tuples.size(); i++) {
        for (int p = 0; p < k; p++) {
            int sub[4];
            int m = 0;
            for (int q = 0; q < k; q++)
                if (q != p) sub[m++] = tuples[i][static_cast<std::size_t>(q)];
            int pos = tuple_position(dim, k - 1, std::span<const int>(sub, static_cast<std::size_t>(k - 1)));
            ScalarField term = pointwise(x[tuples[i][static_cast<std::size_t>(p)]], a.comp(static_cast<int>(i)));
            if (p % 2)
                out.comp(pos) -= term;
            else
                out.comp(pos) += term;
        }
    }
    return out;
}

VectorField sharp(const KForm& one_form) {
    if (one_form.degree() != 1) throw std::invalid_argument("sharp expects a 1-form");
    VectorField out(one_form.grid());
    for (int a = 0; a < one_form.grid().dim; a++) out[a] = one_form.comp(a);
    return out;
}

KForm flat(const VectorField& x) {
    KForm out(x.grid(), 1);
    for (int a = 0; a < x.dim(); a++) out.comp(a) = x[a];
    return out;
}

double l2_inner(const KForm& a, const KForm& b) {
    check_same_grid(a.grid(), b.grid());
    if (a.degree() != b.degree()) throw std::invalid_argument("form degrees differ");
    double acc = 0.0;
    for (int i = 0; i < a.component_count(); i++) acc += integrate(pointwise(a.comp(i), b.comp(i)));
    return acc;
}

KForm standard_area(const TorusGrid& g) {
    if (g.dim != 2) throw std::invalid_argument("area form needs dim 2");
    KForm w(g, 2);
    w.comp(0) = ScalarField(g, 1.0);
    return w;
}

KForm standard_symplectic(const TorusGrid& g) {
    if (g.dim != 4) throw std::invalid_argument("symplectic form needs dim 4");
    KForm w(g, 2);
    int p02[2] = {0, 2}, p13[2] = {1, 3};
    w.comp(tuple_position(4, 2, p02)) = ScalarField(g, 1.0);
    w.comp(tuple_position(4, 2, p13)) = ScalarField(g, 1.0);
    return w;
}

std::array<KForm, 3> anti_self_dual_triple(const TorusGrid& g) {
    if (g.dim != 4) throw std::invalid_argument("anti-self-dual triple needs dim 4");
    KForm w1(g, 2), w2(g, 2);
    int p01[2] = {0, 1}, p23[2] = {2, 3}, p03[2] = {0, 3}, p12[2] = {1, 2};
    w1.comp(tuple_position(4, 2, p01)) = ScalarField(g, 1.0);
    w1.comp(tuple_position(4, 2, p23)) = ScalarField(g, -1.0);
    w2.comp(tuple_position(4, 2, p03)) = ScalarField(g, 1.0);
    w2.comp(tuple_position(4, 2, p12)) = ScalarField(g, -1.0);
    return {std::move(w1), std::move(w2), standard_symplectic(g)};
}

KForm structure_form(const TorusGrid& g) {
    return g.dim == 2 ? standard_area(g) : standard_symplectic(g);
}

void structure_contraction_matrix(int dim, double w[4][4]) {
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 4; j++) w[i][j] = 0.0;
    if (dim == 2) {
        // tau = dx0^dx1: (i_Y tau) = (-Y1, Y0)
        w[0][1] = -1.0;
        w[1][0] = 1.0;
    } else if (dim == 4) {
        // tau = dx0^dx2 + dx1^dx3: (i_Y tau) = (-Y2, -Y3, Y0, Y1)
        w[0][2] = -1.0;
        w[1][3] = -1.0;
        w[2][0] = 1.0;
        w[3][1] = 1.0;
    } else {
        throw std::invalid_argument("structure matrix needs dim 2 or 4");
    }
}

VectorField structure_sharp(const KForm& one_form) {
    if (one_form.degree() != 1) throw std::invalid_argument("structure sharp expects a 1-form");
    const int dim = one_form.grid().dim;
    double w[4][4];
    structure_contraction_matrix(dim, w);
    // i_Y tau = alpha  =>  W Y = alpha  =>  Y = -W alpha  (W W = -I)
    VectorField y(one_form.grid());
    for (int a = 0; a < dim; a++)
        for (int b = 0; b < dim; b++) {
            if (w[a][b] == 0.0) continue;
            ScalarField t = one_form.comp(b);
            t *= -w[a][b];
            y[a] += t;
        }
    return y;
}

VectorField hamiltonian_field(const ScalarField& h) {
    const int dim = h.grid().dim;
    double w[4][4];
    structure_contraction_matrix(dim, w);
    // i_X tau = -dh  =>  X = -W(-dh) = W grad h
    VectorField x(h.grid());
    for (int b = 0; b < dim; b++) {
        ScalarField db = spectral_derivative(h, b);
        for (int a = 0; a < dim; a++) {
            if (w[a][b] == 0.0) continue;
            ScalarField t = db;
            t *= w[a][b];
            x[a] += t;
        }
    }
    return x;
}

KForm self_dual_part(const KForm& two_form) {
    if (two_form.grid().dim != 4 || two_form.degree() != 2)
        throw std::invalid_argument("duality split needs a 2-form in dim 4");
    KForm out = two_form + hodge_star(two_form);
    out *= 0.5;
    return out;
}

KForm anti_self_dual_part(const KForm& two_form) {
    if (two_form.grid().dim != 4 || two_form.degree() != 2)
        throw std::invalid_argument("duality split needs a 2-form in dim 4");
    KForm out = two_form - hodge_star(two_form);
    out *= 0.5;
    return out;
}

}  // namespace torusflow
