#include "torusflow/maps.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "small_linalg.hpp"

namespace torusflow {

namespace {

void decode_point(const TorusGrid& g, std::size_t i, double* x) {
    std::size_t r = i;
    for (int a = g.dim - 1; a >= 0; a--) {
        x[a] = static_cast<double>(r % g.n) / g.n;
        r /= g.n;
    }
}

double wrap_half(double t) { return t - std::round(t); }

void gather(const MatrixField& m, std::size_t p, double out[4][4]) {
    for (int i = 0; i < m.dim(); i++)
        for (int j = 0; j < m.dim(); j++) out[i][j] = m.at(i, j)[p];
}

std::vector<FieldSampler> make_samplers(const VectorField& u, InterpMode mode) {
    std::vector<FieldSampler> s;
    s.reserve(static_cast<std::size_t>(u.dim()));
    for (int a = 0; a < u.dim(); a++) s.emplace_back(u[a], mode);
    return s;
}

}  // namespace

ScalarField determinant(const MatrixField& m) {
    ScalarField out(m.grid());
    double a[4][4];
    for (std::size_t p = 0; p < out.size(); p++) {
        gather(m, p, a);
        out[p] = detail::det_small(m.dim(), a);
    }
    return out;
}

TorusMap identity_map(const TorusGrid& g) { return TorusMap(g); }

MatrixField jacobian(const TorusMap& f) {
    MatrixField j(f.grid());
    const VectorField& u = f.displacement();
    for (int a = 0; a < j.dim(); a++) {
        for (int b = 0; b < j.dim(); b++) j.at(a, b) = spectral_derivative(u[a], b);
        j.at(a, a) += ScalarField(f.grid(), 1.0);
    }
    return j;
}

ScalarField map_density(const TorusMap& f) { return determinant(jacobian(f)); }

TorusMap compose(const TorusMap& f, const TorusMap& g, InterpMode mode) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("composed maps live on different grids");
    const TorusGrid& grid = f.grid();
    auto sf = make_samplers(f.displacement(), mode);
    TorusMap out(grid);
    const VectorField& ug = g.displacement();
    double x[4], y[4];
    for (std::size_t p = 0; p < grid.point_count(); p++) {
        decode_point(grid, p, x);
        for (int a = 0; a < grid.dim; a++) y[a] = x[a] + ug[a][p];
        for (int a = 0; a < grid.dim; a++) out.displacement()[a][p] = ug[a][p] + sf[static_cast<std::size_t>(a)](y);
    }
    return out;
}

TorusMap inverse_map(const TorusMap& f, double tol, int max_iter, const TorusMap* warm_start,
                     InterpMode mode) {
    const TorusGrid& grid = f.grid();
    const int dim = grid.dim;
    const VectorField& u = f.displacement();
    auto su = make_samplers(u, mode);
    MatrixField jac = jacobian(f);
    TorusMap inv(grid);
    if (warm_start && !(warm_start->grid() == grid))
        throw std::invalid_argument("warm start lives on a different grid");

    double worst = 0.0;
    double y[4], x[4], r[4], xn[4], rn_vec[4];
    for (std::size_t p = 0; p < grid.point_count(); p++) {
        decode_point(grid, p, y);
        for (int a = 0; a < dim; a++)
            x[a] = y[a] + (warm_start ? warm_start->displacement()[a][p] : -u[a][p]);

        auto residual = [&](const double* xx, double* rr) {
            double m = 0.0;
            for (int a = 0; a < dim; a++) {
                rr[a] = wrap_half(xx[a] + su[static_cast<std::size_t>(a)](xx) - y[a]);
                m = std::max(m, std::abs(rr[a]));
            }
            return m;
        };

        double rn = residual(x, r);
        for (int it = 0; rn > tol && it < max_iter; it++) {
            // chord Jacobian from the nearest grid point
            std::size_t gi = 0;
            for (int a = 0; a < dim; a++) {
                long q = std::lround(x[a] * grid.n);
                gi = gi * grid.n + static_cast<std::size_t>(((q % grid.n) + grid.n) % grid.n);
            }
            double m[4][4];
            gather(jac, gi, m);
            double delta[4];
            for (int a = 0; a < dim; a++) delta[a] = r[a];
            if (!detail::solve_small(dim, m, delta))
                for (int a = 0; a < dim; a++) delta[a] = r[a];
            double step = 1.0;
            for (int t = 0; t < 5; t++) {
                for (int a = 0; a < dim; a++) xn[a] = x[a] - step * delta[a];
                double rn2 = residual(xn, rn_vec);
                if (rn2 < rn || t == 4) {
                    for (int a = 0; a < dim; a++) {
                        x[a] = xn[a];
                        r[a] = rn_vec[a];
                    }
                    rn = rn2;
                    break;
                }
                step *= 0.5;
            }
        }
        worst = std::max(worst, rn);
        for (int a = 0; a < dim; a++) inv.displacement()[a][p] = wrap_half(x[a] - y[a]);
    }
    if (worst > tol)
        throw std::runtime_error("inverse iteration stalled at residual " + std::to_string(worst));
    return inv;
}

double composition_distance(const TorusMap& f, const TorusMap& g, InterpMode mode) {
    if (!(f.grid() == g.grid())) throw std::invalid_argument("maps live on different grids");
    const TorusGrid& grid = f.grid();
    auto sg = make_samplers(g.displacement(), mode);
    double worst = 0.0;
    double x[4], y[4];
    for (std::size_t p = 0; p < grid.point_count(); p++) {
        decode_point(grid, p, x);
        for (int a = 0; a < grid.dim; a++) y[a] = x[a] + f.displacement()[a][p];
        for (int a = 0; a < grid.dim; a++) {
            double z = y[a] + sg[static_cast<std::size_t>(a)](y);
            worst = std::max(worst, std::abs(wrap_half(z - x[a])));
        }
    }
    return worst;
}

VectorField pushforward(const TorusMap& f, const VectorField& x) {
    if (!(f.grid() == x.grid())) throw std::invalid_argument("map and field grids differ");
    MatrixField j = jacobian(f);
    VectorField out(f.grid());
    for (int a = 0; a < j.dim(); a++)
        for (int b = 0; b < j.dim(); b++) {
            const ScalarField& jab = j.at(a, b);
            const ScalarField& xb = x[b];
            ScalarField& oa = out[a];
            for (std::size_t p = 0; p < oa.size(); p++) oa[p] += jab[p] * xb[p];
        }
    return out;
}

ScalarField pullback_function(const TorusMap& f, const ScalarField& h, InterpMode mode) {
    if (!(f.grid() == h.grid())) throw std::invalid_argument("map and field grids differ");
    FieldSampler s(h, mode);
    ScalarField out(f.grid());
    double x[4], y[4];
    for (std::size_t p = 0; p < out.size(); p++) {
        decode_point(f.grid(), p, x);
        for (int a = 0; a < f.grid().dim; a++) y[a] = x[a] + f.displacement()[a][p];
        out[p] = s(y);
    }
    return out;
}

KForm pullback(const TorusMap& f, const KForm& a, InterpMode mode) {
    if (!(f.grid() == a.grid())) throw std::invalid_argument("map and form grids differ");
    const TorusGrid& grid = f.grid();
    const int dim = grid.dim;
    const int k = a.degree();
    if (k == 0) {
        KForm out(grid, 0);
        out.comp(0) = pullback_function(f, a.comp(0), mode);
        return out;
    }
    std::vector<FieldSampler> sa;
    sa.reserve(static_cast<std::size_t>(a.component_count()));
    for (int i = 0; i < a.component_count(); i++) sa.emplace_back(a.comp(i), mode);
    MatrixField jac = jacobian(f);
    const auto& tuples = index_tuples(dim, k);
    KForm out(grid, k);
    double x[4], y[4], d[4][4], sub[4][4];
    std::vector<double> vals(sa.size());
    for (std::size_t p = 0; p < grid.point_count(); p++) {
        decode_point(grid, p, x);
        for (int c = 0; c < dim; c++) y[c] = x[c] + f.displacement()[c][p];
        for (std::size_t i = 0; i < sa.size(); i++) vals[i] = sa[i](y);
        gather(jac, p, d);
        for (std::size_t oi = 0; oi < tuples.size(); oi++) {
            double acc = 0.0;
            for (std::size_t ji = 0; ji < tuples.size(); ji++) {
                // minor of Df with rows from the source tuple, columns from
                // the target tuple
                for (int r = 0; r < k; r++)
                    for (int c = 0; c < k; c++)
                        sub[r][c] = d[tuples[ji][static_cast<std::size_t>(r)]]
                                     [tuples[oi][static_cast<std::size_t>(c)]];
                acc += vals[ji] * detail::det_small(k, sub);
            }
            out.comp(static_cast<int>(oi))[p] = acc;
        }
    }
    return out;
}

KForm pullback_constant_two_form(const TorusMap& f, const KForm& w) {
    if (w.degree() != 2) throw std::invalid_argument("constant pullback expects a 2-form");
    if (!(f.grid() == w.grid())) throw std::invalid_argument("map and form grids differ");
    const int dim = f.grid().dim;
    // component matrix of w, verified constant
    double c[4][4] = {};
    const auto& tuples = index_tuples(dim, 2);
    for (std::size_t i = 0; i < tuples.size(); i++) {
        const ScalarField& comp = w.comp(static_cast<int>(i));
        double v = comp[0];
        for (std::size_t p = 0; p < comp.size(); p++)
            if (comp[p] != v) throw std::invalid_argument("form passed as constant varies on the grid");
        c[tuples[i][0]][tuples[i][1]] = v;
        c[tuples[i][1]][tuples[i][0]] = -v;
    }
    MatrixField jac = jacobian(f);
    KForm out(f.grid(), 2);
    double d[4][4];
    for (std::size_t p = 0; p < f.grid().point_count(); p++) {
        gather(jac, p, d);
        for (std::size_t oi = 0; oi < tuples.size(); oi++) {
            int a = tuples[oi][0], b = tuples[oi][1];
            double acc = 0.0;
            for (int r = 0; r < dim; r++)
                for (int s = 0; s < dim; s++) acc += d[r][a] * c[r][s] * d[s][b];
            out.comp(static_cast<int>(oi))[p] = acc;
        }
    }
    return out;
}

}  // namespace torusflow
