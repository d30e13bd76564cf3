#include "torusflow/moment.hpp"

#include <cmath>
#include <stdexcept>

#include "small_linalg.hpp"

namespace torusflow {

namespace {

void require_dim(const TorusMap& f, int dim, const char* what) {
    if (f.grid().dim != dim)
        throw std::invalid_argument(std::string(what) + " needs a dim-" + std::to_string(dim) + " map");
}

void gather(const MatrixField& m, std::size_t p, double out[4][4]) {
    for (int i = 0; i < m.dim(); i++)
        for (int j = 0; j < m.dim(); j++) out[i][j] = m.at(i, j)[p];
}

}  // namespace

MomentValueT2 moment_t2(const TorusMap& f) {
    require_dim(f, 2, "moment_t2");
    ScalarField mu = map_density(f);
    mu *= -1.0;
    mu += ScalarField(f.grid(), 1.0);
    return {std::move(mu)};
}

std::array<ScalarField, 3> moment_hk(const TorusMap& f) {
    require_dim(f, 4, "moment_hk");
    const TorusGrid& g = f.grid();
    auto triple = anti_self_dual_triple(g);
    KForm w = standard_symplectic(g);
    std::array<ScalarField, 3> mu{ScalarField(g), ScalarField(g), ScalarField(g)};
    for (int i = 0; i < 3; i++) {
        KForm pb = pullback_constant_two_form(f, triple[static_cast<std::size_t>(i)]);
        ScalarField ratio = wedge(pb, w).comp(0);
        ratio *= -1.0;
        // shift by the identity value so every component vanishes at id
        // (w_K ^ w = -2 vol, the other two wedge to zero)
        if (i == 2) ratio -= ScalarField(g, 2.0);
        mu[static_cast<std::size_t>(i)] = std::move(ratio);
    }
    return mu;
}

KForm mu_tilde_from_inverse(const TorusMap& finv) {
    require_dim(finv, 4, "mu_tilde");
    KForm beta = pullback_constant_two_form(finv, standard_symplectic(finv.grid()));
    return anti_self_dual_part(beta);
}

KForm mu_tilde(const TorusMap& f, double tol, InterpMode mode) {
    return mu_tilde_from_inverse(inverse_map(f, tol, 60, nullptr, mode));
}

KForm deviation_from_inverse(const TorusMap& finv) {
    return mu_tilde_from_inverse(finv) - standard_symplectic(finv.grid());
}

MomentValueT4 moment_t4(const TorusMap& f, double tol, InterpMode mode) {
    auto mu = moment_hk(f);
    return {std::move(mu[0]), std::move(mu[1]), std::move(mu[2]), mu_tilde(f, tol, mode)};
}

double energy(const TorusMap& f, double tol, InterpMode mode) {
    if (f.grid().dim == 2) {
        ScalarField mu = moment_t2(f).mu;
        ScalarField sq(f.grid());
        for (std::size_t i = 0; i < sq.size(); i++) sq[i] = mu[i] * mu[i];
        return 0.5 * integrate(sq);
    }
    return energy_from_inverse(inverse_map(f, tol, 60, nullptr, mode));
}

double energy_from_inverse(const TorusMap& finv) {
    KForm dev = deviation_from_inverse(finv);
    return 0.5 * l2_inner(dev, dev);
}

double g_inner(const VectorField& a, const VectorField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("fields live on different grids");
    double acc = 0.0;
    for (int c = 0; c < a.dim(); c++) {
        ScalarField prod(a.grid());
        for (std::size_t i = 0; i < prod.size(); i++) prod[i] = a[c][i] * b[c][i];
        acc += integrate(prod);
    }
    return acc;
}

double g_norm(const VectorField& a) { return std::sqrt(g_inner(a, a)); }

VectorField grad_t2(const TorusMap& f) {
    require_dim(f, 2, "grad_t2");
    const TorusGrid& g = f.grid();
    MatrixField a = jacobian(f);
    ScalarField h = determinant(a);
    // q = sharp d*(H sigma) = (d_1 H, -d_0 H)
    KForm hs(g, 2);
    hs.comp(0) = h;
    VectorField q = sharp(codifferential(hs));
    // R = -W A q; with W = [[0,-1],[1,0]] this is ((Aq)_1, -(Aq)_0)
    VectorField r(g);
    for (std::size_t p = 0; p < g.point_count(); p++) {
        double aq0 = a.at(0, 0)[p] * q[0][p] + a.at(0, 1)[p] * q[1][p];
        double aq1 = a.at(1, 0)[p] * q[0][p] + a.at(1, 1)[p] * q[1][p];
        r[0][p] = aq1;
        r[1][p] = -aq0;
    }
    return r;
}

VectorField grad_t4_from_inverse(const TorusMap& f, const TorusMap& finv, InterpMode mode) {
    require_dim(f, 4, "grad_t4");
    const TorusGrid& g = f.grid();
    KForm dev = deviation_from_inverse(finv);
    VectorField q = sharp(codifferential(dev));
    std::vector<FieldSampler> sq;
    sq.reserve(4);
    for (int c = 0; c < 4; c++) sq.emplace_back(q[c], mode);

    MatrixField jac = jacobian(f);
    ScalarField hf = determinant(jac);
    double w[4][4];
    structure_contraction_matrix(4, w);

    VectorField r(g);
    const VectorField& u = f.displacement();
    double x[4], y[4], a[4][4], ai[4][4], qf[4];
    for (std::size_t p = 0; p < g.point_count(); p++) {
        std::size_t rest = p;
        for (int c = 3; c >= 0; c--) {
            x[c] = static_cast<double>(rest % g.n) / g.n;
            rest /= g.n;
        }
        for (int c = 0; c < 4; c++) y[c] = x[c] + u[c][p];
        for (int c = 0; c < 4; c++) qf[c] = sq[static_cast<std::size_t>(c)](y);
        gather(jac, p, a);
        if (!detail::invert_small(4, a, ai))
            throw std::runtime_error("map jacobian is singular on the grid");
        // R = H * (A^{-T} W A^{-1}) qF
        for (int i = 0; i < 4; i++) {
            double acc = 0.0;
            for (int c = 0; c < 4; c++)
                for (int d = 0; d < 4; d++) {
                    if (w[c][d] == 0.0) continue;
                    for (int b = 0; b < 4; b++) acc += ai[c][i] * w[c][d] * ai[d][b] * qf[b];
                }
            r[i][p] = hf[p] * acc;
        }
    }
    return r;
}

VectorField grad_t4(const TorusMap& f, double tol, InterpMode mode) {
    return grad_t4_from_inverse(f, inverse_map(f, tol, 60, nullptr, mode), mode);
}

VectorField grad_energy(const TorusMap& f, double tol, InterpMode mode) {
    return f.grid().dim == 2 ? grad_t2(f) : grad_t4(f, tol, mode);
}

}  // namespace torusflow
