#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "torusflow/symbol.hpp"

using namespace torusflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

TEST_CASE("dim-2 symbol reduces to the Laplacian at unit coefficient") {
    std::array<double, 2> xi = {0.7, -1.3};
    SymbolMatrix s = symbol_t2(1.0, xi);
    double n2 = xi[0] * xi[0] + xi[1] * xi[1];
    CHECK(s.at(0, 0) == doctest::Approx(n2).epsilon(1e-15));
    CHECK(s.at(1, 1) == doctest::Approx(n2).epsilon(1e-15));
    CHECK(std::abs(s.at(0, 1)) < 1e-16);
    CHECK(std::abs(s.at(1, 0)) < 1e-16);
}

TEST_CASE("dim-2 symbol matches hand-evaluated entries and determinant") {
    // coeff = 4, xi = (1,0): det = 4 * |xi|^4 = 4
    SymbolMatrix s = symbol_t2(4.0, {1.0, 0.0});
    CHECK(symbol_det(s) == doctest::Approx(4.0).epsilon(1e-14));

    // coeff = 4, xi = (1,2): entries from the componentwise operator action.
    // Row 2 diagonal carries coeff on xi_x^2 (the variant consistent with
    // det = coeff |xi|^4).
    SymbolMatrix t = symbol_t2(4.0, {1.0, 2.0});
    CHECK(t.at(0, 0) == doctest::Approx(1.0 + 4.0 * 4.0).epsilon(1e-15));
    CHECK(t.at(1, 1) == doctest::Approx(4.0 + 4.0 * 1.0).epsilon(1e-15));
    CHECK(t.at(0, 1) == doctest::Approx((1.0 - 4.0) * 1.0 * 2.0).epsilon(1e-15));
    CHECK(t.at(1, 0) == t.at(0, 1));
    CHECK(symbol_det(t) == doctest::Approx(4.0 * 25.0).epsilon(1e-14));
}

TEST_CASE("dim-2 determinant law and positivity over random draws") {
    Rng rng(2024);
    double worst = 0.0, min_eig = 1e300;
    for (int i = 0; i < 1000; i++) {
        double coeff = 0.1 + 9.9 * rng.uniform();
        std::array<double, 2> xi = {6.0 * rng.uniform() - 3.0, 6.0 * rng.uniform() - 3.0};
        double n2 = xi[0] * xi[0] + xi[1] * xi[1];
        if (n2 < 1e-6) continue;
        SymbolMatrix s = symbol_t2(coeff, xi);
        double want = coeff * n2 * n2;
        worst = std::max(worst, std::abs(symbol_det(s) - want) / want);
        min_eig = std::min(min_eig, symbol_min_eigenvalue(s) / n2);
    }
    CHECK(worst < 1e-13);
    CHECK(min_eig > 0.0);
}

TEST_CASE("dim-4 symbol matches hand-evaluated entries and determinant") {
    // coeff = 2, xi = (1,0,0,0): symbol is the identity, det = 1
    SymbolMatrix s = symbol_t4(2.0, {1.0, 0.0, 0.0, 0.0});
    CHECK(symbol_det(s) == doctest::Approx(1.0).epsilon(1e-14));
    auto ev = symbol_eigenvalues(s);
    for (int i = 0; i < 4; i++) CHECK(ev[static_cast<std::size_t>(i)] == doctest::Approx(1.0).epsilon(1e-13));

    // coeff = 3, xi = (1,2,3,4): diagonal x_a^2 + (coeff/2) * (|xi|^2 - x_a^2),
    // off-diagonal (1 - coeff/2) x_a x_b
    SymbolMatrix t = symbol_t4(3.0, {1.0, 2.0, 3.0, 4.0});
    CHECK(t.at(0, 0) == doctest::Approx(1.0 + 1.5 * 29.0).epsilon(1e-15));
    CHECK(t.at(0, 1) == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(t.at(2, 3) == doctest::Approx((1.0 - 1.5) * 12.0).epsilon(1e-15));
    double want = std::pow(1.5, 3) * std::pow(30.0, 4);
    CHECK(symbol_det(t) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("dim-4 symbol at zero covector is the zero matrix") {
    SymbolMatrix s = symbol_t4(2.0, {0.0, 0.0, 0.0, 0.0});
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 4; j++) CHECK(s.at(i, j) == 0.0);
    CHECK(symbol_det(s) == 0.0);
}

TEST_CASE("dim-4 determinant law and positivity over random draws") {
    Rng rng(4048);
    double worst = 0.0, min_eig = 1e300;
    for (int i = 0; i < 1000; i++) {
        double coeff = 0.1 + 9.9 * rng.uniform();
        std::array<double, 4> xi{};
        double n2 = 0.0;
        for (auto& c : xi) {
            c = 6.0 * rng.uniform() - 3.0;
            n2 += c * c;
        }
        if (n2 < 1e-6) continue;
        SymbolMatrix s = symbol_t4(coeff, xi);
        double want = std::pow(0.5 * coeff, 3) * std::pow(n2, 4);
        worst = std::max(worst, std::abs(symbol_det(s) - want) / want);
        min_eig = std::min(min_eig, symbol_min_eigenvalue(s) / n2);
    }
    CHECK(worst < 1e-12);
    CHECK(min_eig > 0.0);
}

TEST_CASE("non-positive coefficients are rejected") {
    CHECK_THROWS_AS(symbol_t2(0.0, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(symbol_t2(-1.0, {1.0, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(symbol_t4(0.0, {1.0, 0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("plane-wave probe reads the Hodge Laplacian symbol off the grid") {
    TorusGrid g = make_grid(2, 16);
    auto op = [](const KForm& a) { return elliptic_operator_t2(1.0, a); };
    SymbolMatrix s = symbol_probe(op, g, {3, 0, 0, 0});
    double want = kTwoPi * 3.0 * kTwoPi * 3.0;
    CHECK(s.at(0, 0) == doctest::Approx(want).epsilon(1e-12));
    CHECK(s.at(1, 1) == doctest::Approx(want).epsilon(1e-12));
    CHECK(std::abs(s.at(0, 1)) < 1e-9);
    CHECK(std::abs(s.at(1, 0)) < 1e-9);
}

TEST_CASE("probe agrees with the dim-2 closed-form symbol") {
    TorusGrid g = make_grid(2, 16);
    const double coeff = 4.0;
    auto op = [coeff](const KForm& a) { return elliptic_operator_t2(coeff, a); };
    SymbolMatrix probed = symbol_probe(op, g, {2, -5, 0, 0}, coeff);
    SymbolMatrix exact = symbol_t2(coeff, {kTwoPi * 2.0, kTwoPi * -5.0});
    double scale = kTwoPi * kTwoPi * 29.0;
    for (int i = 0; i < 2; i++)
        for (int j = 0; j < 2; j++)
            CHECK(std::abs(probed.at(i, j) - exact.at(i, j)) < 1e-10 * scale);
}

TEST_CASE("probe agrees with the dim-4 closed-form symbol") {
    TorusGrid g = make_grid(4, 8);
    const double coeff = 2.5;
    auto op = [coeff](const KForm& a) { return elliptic_operator_t4(coeff, a); };
    SymbolMatrix probed = symbol_probe(op, g, {1, -2, 0, 3}, coeff);
    SymbolMatrix exact =
        symbol_t4(coeff, {kTwoPi, kTwoPi * -2.0, 0.0, kTwoPi * 3.0});
    double scale = kTwoPi * kTwoPi * 14.0;
    for (int i = 0; i < 4; i++)
        for (int j = 0; j < 4; j++)
            CHECK(std::abs(probed.at(i, j) - exact.at(i, j)) < 1e-10 * scale);
}

TEST_CASE("without the divergence completion the symbol is degenerate") {
    // The incomplete operators annihilate gradient directions: their symbol
    // applied to a xi-parallel covector vanishes, so they cannot be elliptic.
    TorusGrid g2 = make_grid(2, 16);
    auto op2 = [](const KForm& a) { return rough_operator_t2(3.0, a); };
    SymbolMatrix s2 = symbol_probe(op2, g2, {2, 1, 0, 0}, 3.0);
    auto out2 = symbol_apply(s2, {2.0, 1.0, 0.0, 0.0});
    double scale2 = kTwoPi * kTwoPi * 5.0 * 3.0;
    CHECK(std::abs(out2[0]) < 1e-10 * scale2);
    CHECK(std::abs(out2[1]) < 1e-10 * scale2);
    CHECK(symbol_min_eigenvalue(s2) < 1e-10 * scale2);
    CHECK(symbol_min_eigenvalue(symbol_t2(3.0, {kTwoPi * 2.0, kTwoPi})) > 0.1);

    TorusGrid g4 = make_grid(4, 8);
    auto op4 = [](const KForm& a) { return rough_operator_t4(3.0, a); };
    SymbolMatrix s4 = symbol_probe(op4, g4, {1, 0, -1, 2}, 3.0);
    auto out4 = symbol_apply(s4, {1.0, 0.0, -1.0, 2.0});
    double scale4 = kTwoPi * kTwoPi * 6.0 * 3.0;
    for (int i = 0; i < 4; i++) CHECK(std::abs(out4[static_cast<std::size_t>(i)]) < 1e-10 * scale4);
    CHECK(symbol_min_eigenvalue(s4) < 1e-10 * scale4);
}

TEST_CASE("probe rejects waves at or beyond the resolvable band") {
    TorusGrid g = make_grid(2, 16);
    auto op = [](const KForm& a) { return elliptic_operator_t2(1.0, a); };
    CHECK_THROWS_AS(symbol_probe(op, g, {8, 0, 0, 0}), std::invalid_argument);
    CHECK_THROWS_AS(symbol_probe(op, g, {0, -8, 0, 0}), std::invalid_argument);
}

TEST_CASE("grid-level incomplete operator annihilates exact one-forms") {
    TorusGrid g = make_grid(2, 16);
    ScalarField h(g);
    for (std::size_t i = 0; i < h.size(); i++) {
        double x0 = static_cast<double>(i / 16) / 16.0;
        double x1 = static_cast<double>(i % 16) / 16.0;
        h[i] = std::sin(kTwoPi * (2 * x0 - x1));
    }
    KForm zero(g, 0);
    zero.comp(0) = h;
    KForm image = rough_operator_t2(2.0, exterior_derivative(zero));
    CHECK(max_abs(image.comp(0)) < 1e-10);
    CHECK(max_abs(image.comp(1)) < 1e-10);
}
