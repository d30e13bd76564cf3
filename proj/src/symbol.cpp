#include "torusflow/symbol.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "small_linalg.hpp"

namespace torusflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

SymbolMatrix assemble(int dim, double rotational, double coeff, const double* xi) {
    SymbolMatrix s;
    s.dim = dim;
    s.coeff = coeff;
    double norm2 = 0.0;
    for (int a = 0; a < dim; a++) {
        s.xi[static_cast<std::size_t>(a)] = xi[a];
        norm2 += xi[a] * xi[a];
    }
    for (int i = 0; i < dim; i++) {
        for (int j = 0; j < dim; j++) {
            double proj = xi[i] * xi[j];
            double rot = (i == j ? norm2 : 0.0) - proj;
            s.m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rotational * rot + proj;
        }
    }
    return s;
}
}  // namespace

SymbolMatrix symbol_t2(double coeff, const std::array<double, 2>& xi) {
    if (!(coeff > 0.0)) throw std::invalid_argument("symbol_t2: coeff must be positive");
    return assemble(2, coeff, coeff, xi.data());
}

SymbolMatrix symbol_t4(double coeff, const std::array<double, 4>& xi) {
    if (!(coeff > 0.0)) throw std::invalid_argument("symbol_t4: coeff must be positive");
    return assemble(4, 0.5 * coeff, coeff, xi.data());
}

double symbol_det(const SymbolMatrix& s) {
    double a[4][4];
    for (int i = 0; i < s.dim; i++)
        for (int j = 0; j < s.dim; j++) a[i][j] = s.at(i, j);
    return detail::det_small(s.dim, a);
}

std::array<double, 4> symbol_eigenvalues(const SymbolMatrix& s) {
    const int n = s.dim;
    double a[4][4];
    for (int i = 0; i < n; i++)
        for (int j = 0; j < n; j++) a[i][j] = s.at(i, j);

    for (int sweep = 0; sweep < 64; sweep++) {
        double off = 0.0;
        for (int p = 0; p < n; p++)
            for (int q = p + 1; q < n; q++) off += a[p][q] * a[p][q];
        if (off < 1e-300) break;
        for (int p = 0; p < n; p++) {
            for (int q = p + 1; q < n; q++) {
                if (a[p][q] == 0.0) continue;
                double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double sn = t * c;
                for (int r = 0; r < n; r++) {
                    double arp = a[r][p], arq = a[r][q];
                    a[r][p] = c * arp - sn * arq;
                    a[r][q] = sn * arp + c * arq;
                }
                for (int r = 0; r < n; r++) {
                    double apr = a[p][r], aqr = a[q][r];
                    a[p][r] = c * apr - sn * aqr;
                    a[q][r] = sn * apr + c * aqr;
                }
            }
        }
    }
    std::array<double, 4> ev{};
    for (int i = 0; i < n; i++) ev[static_cast<std::size_t>(i)] = a[i][i];
    for (int i = n; i < 4; i++) ev[static_cast<std::size_t>(i)] = 0.0;
    for (int i = 0; i < n; i++)
        for (int j = i + 1; j < n; j++)
            if (ev[static_cast<std::size_t>(j)] < ev[static_cast<std::size_t>(i)])
                std::swap(ev[static_cast<std::size_t>(i)], ev[static_cast<std::size_t>(j)]);
    return ev;
}

double symbol_min_eigenvalue(const SymbolMatrix& s) { return symbol_eigenvalues(s)[0]; }

std::array<double, 4> symbol_apply(const SymbolMatrix& s, const std::array<double, 4>& a) {
    std::array<double, 4> out{};
    for (int i = 0; i < s.dim; i++) {
        double acc = 0.0;
        for (int j = 0; j < s.dim; j++) acc += s.at(i, j) * a[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

namespace {
double product_integral(const ScalarField& a, const ScalarField& b) {
    ScalarField p = a;
    for (std::size_t i = 0; i < p.size(); i++) p[i] *= b[i];
    return integrate(p);
}

ScalarField plane_wave(const TorusGrid& g, const std::array<int, 4>& k) {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); i++) {
        std::size_t r = i;
        double phase = 0.0;
        for (int a = g.dim - 1; a >= 0; a--) {
            phase += k[static_cast<std::size_t>(a)] * static_cast<double>(r % static_cast<std::size_t>(g.n)) / g.n;
            r /= static_cast<std::size_t>(g.n);
        }
        f[i] = std::cos(kTwoPi * phase);
    }
    return f;
}
}  // namespace

SymbolMatrix symbol_probe(const std::function<KForm(const KForm&)>& op,
                          const TorusGrid& grid, const std::array<int, 4>& k,
                          double coeff) {
    for (int a = 0; a < grid.dim; a++) {
        int ka = k[static_cast<std::size_t>(a)];
        if (ka <= -grid.n / 2 || ka >= grid.n / 2)
            throw std::invalid_argument("symbol_probe: wave number outside the resolvable band");
    }
    ScalarField wave = plane_wave(grid, k);
    const double wave_norm2 = product_integral(wave, wave);  // 1/2 unless k = 0
    SymbolMatrix s;
    s.dim = grid.dim;
    s.coeff = coeff;
    for (int a = 0; a < grid.dim; a++)
        s.xi[static_cast<std::size_t>(a)] = kTwoPi * k[static_cast<std::size_t>(a)];
    for (int a = 0; a < grid.dim; a++) {
        KForm alpha(grid, 1);
        alpha.comp(a) = wave;
        KForm image = op(alpha);
        for (int b = 0; b < grid.dim; b++)
            s.m[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] =
                product_integral(image.comp(b), wave) / wave_norm2;
    }
    return s;
}

KForm elliptic_operator_t2(double coeff, const KForm& alpha) {
    KForm out = codifferential(exterior_derivative(alpha));
    out *= coeff;
    out += exterior_derivative(codifferential(alpha));
    return out;
}

KForm elliptic_operator_t4(double coeff, const KForm& alpha) {
    KForm out = codifferential(anti_self_dual_part(exterior_derivative(alpha)));
    out *= coeff;
    out += exterior_derivative(codifferential(alpha));
    return out;
}

KForm rough_operator_t2(double coeff, const KForm& alpha) {
    KForm out = codifferential(exterior_derivative(alpha));
    out *= coeff;
    return out;
}

KForm rough_operator_t4(double coeff, const KForm& alpha) {
    KForm out = codifferential(anti_self_dual_part(exterior_derivative(alpha)));
    out *= coeff;
    return out;
}

}  // namespace torusflow
