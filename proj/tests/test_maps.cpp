#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "torusflow/maps.hpp"

using namespace torusflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

ScalarField fill(const TorusGrid& g, double (*fn)(const double*)) {
    ScalarField f(g);
    double x[4];
    for (std::size_t i = 0; i < f.size(); i++) {
        std::size_t r = i;
        for (int a = g.dim - 1; a >= 0; a--) {
            x[a] = static_cast<double>(r % g.n) / g.n;
            r /= g.n;
        }
        f[i] = fn(x);
    }
    return f;
}

double max_vec_diff(const VectorField& a, const VectorField& b) {
    double m = 0.0;
    for (int c = 0; c < a.dim(); c++) m = std::max(m, max_abs(a[c] - b[c]));
    return m;
}

/** 2-d shear (x0 + amp sin(2 pi x1), x1): area-preserving, closed-form
 * inverse (x0 - amp sin(2 pi x1), x1). */
TorusMap shear2(const TorusGrid& g, double amp) {
    TorusMap f(g);
    ScalarField s = fill(g, [](const double* x) { return std::sin(kTwoPi * x[1]); });
    s *= amp;
    f.displacement()[0] = s;
    return f;
}

/** 4-d shear along the structure pairing: displacement (0,0,d0 h,d1 h) for
 * h(x0,x1). Preserves the standard symplectic form exactly and has unit
 * density; the inverse displacement is the negative. */
TorusMap symplectic_shear4(const TorusGrid& g, const ScalarField& h) {
    TorusMap f(g);
    f.displacement()[2] = spectral_derivative(h, 0);
    f.displacement()[3] = spectral_derivative(h, 1);
    return f;
}

TorusMap random_map(const TorusGrid& g, double amp, std::uint64_t seed, int kmax = 2) {
    Rng rng(seed);
    TorusMap f(g);
    for (int a = 0; a < g.dim; a++)
        f.displacement()[a] = random_band_limited(g, kmax, amp, rng);
    return f;
}
}  // namespace

TEST_CASE("identity map has unit jacobian and density") {
    TorusGrid g = make_grid(2, 16);
    TorusMap id = identity_map(g);
    MatrixField j = jacobian(id);
    CHECK(max_abs(j.at(0, 0) - ScalarField(g, 1.0)) < 1e-14);
    CHECK(max_abs(j.at(0, 1)) < 1e-14);
    CHECK(max_abs(map_density(id) - ScalarField(g, 1.0)) < 1e-14);
    TorusMap comp = compose(id, id);
    CHECK(max_vec_diff(comp.displacement(), id.displacement()) < 1e-14);
    TorusMap inv = inverse_map(id);
    CHECK(max_vec_diff(inv.displacement(), id.displacement()) < 1e-12);
}

TEST_CASE("shear maps have closed-form jacobian, density and inverse") {
    TorusGrid g = make_grid(2, 32);
    const double amp = 0.15;
    TorusMap f = shear2(g, amp);
    MatrixField j = jacobian(f);
    ScalarField want01 = fill(g, [](const double* x) { return kTwoPi * std::cos(kTwoPi * x[1]); });
    want01 *= amp;
    CHECK(max_abs(j.at(0, 1) - want01) < 1e-10);
    CHECK(max_abs(j.at(0, 0) - ScalarField(g, 1.0)) < 1e-12);
    CHECK(max_abs(j.at(1, 0)) < 1e-12);
    CHECK(max_abs(map_density(f) - ScalarField(g, 1.0)) < 1e-10);

    TorusMap inv = inverse_map(f, 1e-12);
    VectorField want(g);
    ScalarField s = fill(g, [](const double* x) { return std::sin(kTwoPi * x[1]); });
    s *= -amp;
    want[0] = s;
    CHECK(max_vec_diff(inv.displacement(), want) < 1e-10);
}

TEST_CASE("density picks up the closed-form determinant") {
    TorusGrid g = make_grid(2, 32);
    const double amp = 0.03;
    TorusMap f(g);
    ScalarField s = fill(g, [](const double* x) { return std::sin(kTwoPi * x[0]); });
    s *= amp;
    f.displacement()[0] = s;
    ScalarField want = fill(g, [](const double* x) { return kTwoPi * std::cos(kTwoPi * x[0]); });
    want *= amp;
    want += ScalarField(g, 1.0);
    CHECK(max_abs(map_density(f) - want) < 1e-11);
}

TEST_CASE("composition matches the closed form") {
    TorusGrid g = make_grid(2, 32);
    const double a = 0.11, b = 0.07;
    TorusMap f = shear2(g, a);  // (x + a sin(2 pi y), y)
    TorusMap gm(g);             // (x, y + b sin(2 pi x))
    ScalarField s = fill(g, [](const double* x) { return std::sin(kTwoPi * x[0]); });
    s *= b;
    gm.displacement()[1] = s;
    TorusMap fg = compose(f, gm);
    ScalarField want0 = fill(g, [](const double* x) {
        return std::sin(kTwoPi * (x[1] + 0.07 * std::sin(kTwoPi * x[0])));
    });
    want0 *= a;
    CHECK(max_abs(fg.displacement()[0] - want0) < 1e-11);
    CHECK(max_abs(fg.displacement()[1] - s) < 1e-13);
}

TEST_CASE("inverse of a generic map closes the loop both ways") {
    // n is chosen so the (non-band-limited) inverse displacement is resolved
    // to roundoff levels; the binding error is the spectral tail of the
    // inverse, not the Newton iteration.
    TorusGrid g = make_grid(2, 64);
    TorusMap f = random_map(g, 0.02, 31);
    CHECK(min_value(map_density(f)) > 0.5);
    TorusMap inv = inverse_map(f, 1e-11);
    CHECK(composition_distance(f, inv) < 2e-9);
    CHECK(composition_distance(inv, f) < 2e-9);
}

TEST_CASE("warm-started inversion matches the cold one") {
    TorusGrid g = make_grid(2, 32);
    TorusMap f = random_map(g, 0.08, 32);
    TorusMap cold = inverse_map(f, 1e-12);
    TorusMap near = random_map(g, 0.075, 32);  // slightly different map
    TorusMap warm_seed = inverse_map(near, 1e-12);
    TorusMap warm = inverse_map(f, 1e-12, 60, &warm_seed);
    CHECK(max_vec_diff(cold.displacement(), warm.displacement()) < 1e-10);
}

TEST_CASE("pushforward applies the jacobian at the source point") {
    TorusGrid g = make_grid(2, 32);
    const double amp = 0.15;
    TorusMap f = shear2(g, amp);
    VectorField y(g);
    y[1] = ScalarField(g, 1.0);
    VectorField out = pushforward(f, y);
    ScalarField want = fill(g, [](const double* x) { return kTwoPi * std::cos(kTwoPi * x[1]); });
    want *= amp;
    CHECK(max_abs(out[0] - want) < 1e-10);
    CHECK(max_abs(out[1] - ScalarField(g, 1.0)) < 1e-12);
}

TEST_CASE("function pullback composes with the map") {
    TorusGrid g = make_grid(2, 32);
    TorusMap f = shear2(g, 0.1);
    ScalarField h = fill(g, [](const double* x) { return std::cos(kTwoPi * x[0]); });
    ScalarField got = pullback_function(f, h);
    ScalarField want = fill(g, [](const double* x) {
        return std::cos(kTwoPi * (x[0] + 0.1 * std::sin(kTwoPi * x[1])));
    });
    CHECK(max_abs(got - want) < 1e-12);
}

TEST_CASE("pullback of the area form is density times area") {
    TorusGrid g = make_grid(2, 32);
    TorusMap f = random_map(g, 0.06, 77);
    KForm got = pullback_constant_two_form(f, standard_area(g));
    ScalarField h = map_density(f);
    CHECK(max_abs(got.comp(0) - h) < 1e-11);
    // the general pullback agrees (sampling a constant form is exact)
    KForm gen = pullback(f, standard_area(g));
    CHECK(max_abs(gen.comp(0) - h) < 1e-11);
}

TEST_CASE("pullback of the volume form is the density in dim 4") {
    TorusGrid g = make_grid(4, 8);
    TorusMap f = random_map(g, 0.03, 5);
    KForm vol(g, 4);
    vol.comp(0) = ScalarField(g, 1.0);
    KForm got = pullback(f, vol);
    CHECK(max_abs(got.comp(0) - map_density(f)) < 1e-11);
}

TEST_CASE("general and constant-form pullbacks agree on random 2-forms") {
    TorusGrid g = make_grid(4, 8);
    TorusMap f = random_map(g, 0.03, 15);
    KForm w = standard_symplectic(g);
    KForm a = pullback(f, w);
    KForm b = pullback_constant_two_form(f, w);
    for (int i = 0; i < 6; i++) CHECK(max_abs(a.comp(i) - b.comp(i)) < 1e-12);
}

TEST_CASE("structure-pairing shears preserve the symplectic form exactly") {
    TorusGrid g = make_grid(4, 16);
    Rng rng(8);
    ScalarField h(g);
    {
        // h depends only on x0, x1 so the shear is exactly symplectic
        TorusGrid g2 = make_grid(2, 16);
        ScalarField h2 = random_band_limited(g2, 2, 0.02, rng);
        for (std::size_t i = 0; i < h.size(); i++)
            h[i] = h2[i / (16 * 16 * 16) * 16 + (i / (16 * 16)) % 16];
    }
    TorusMap f = symplectic_shear4(g, h);
    CHECK(max_abs(map_density(f) - ScalarField(g, 1.0)) < 1e-11);
    KForm back = pullback_constant_two_form(f, standard_symplectic(g));
    KForm diff = back - standard_symplectic(g);
    for (int i = 0; i < 6; i++) CHECK(max_abs(diff.comp(i)) < 1e-11);

    // the inverse displacement is the exact negative
    TorusMap inv = inverse_map(f, 1e-10);
    VectorField want = f.displacement();
    want *= -1.0;
    CHECK(max_vec_diff(inv.displacement(), want) < 2e-6);  // refined sampling floor
}

TEST_CASE("exact-mode inversion works on the small four-torus") {
    // gentle amplitude keeps the inverse's spectral tail below the target
    // on this very coarse grid
    TorusGrid g = make_grid(4, 8);
    TorusMap f = random_map(g, 0.005, 99, 1);
    CHECK(min_value(map_density(f)) > 0.8);
    TorusMap inv = inverse_map(f, 1e-11, 60, nullptr, InterpMode::Exact);
    CHECK(composition_distance(f, inv, InterpMode::Exact) < 1e-6);
    CHECK(composition_distance(inv, f, InterpMode::Exact) < 1e-6);
}
