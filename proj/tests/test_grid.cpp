#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "torusflow/grid.hpp"

using namespace torusflow;

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

ScalarField fill(const TorusGrid& g, double (*fn)(const double*)) {
    ScalarField f(g);
    const int n = g.n;
    std::vector<double> x(g.dim);
    for (std::size_t i = 0; i < f.size(); i++) {
        std::size_t r = i;
        for (int a = g.dim - 1; a >= 0; a--) {
            x[a] = static_cast<double>(r % n) / n;
            r /= n;
        }
        f[i] = fn(x.data());
    }
    return f;
}
}  // namespace

TEST_CASE("grid construction validates its arguments") {
    CHECK_NOTHROW(make_grid(2, 8));
    CHECK_NOTHROW(make_grid(4, 16));
    CHECK_THROWS_AS(make_grid(3, 16), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 12), std::invalid_argument);
    CHECK_THROWS_AS(make_grid(2, 4), std::invalid_argument);
    CHECK(make_grid(4, 8).point_count() == 4096);
    CHECK(make_grid(2, 32).spacing() == doctest::Approx(1.0 / 32));
}

TEST_CASE("transform roundtrip is lossless") {
    TorusGrid g = make_grid(2, 32);
    Rng rng(7);
    ScalarField f = random_band_limited(g, 10, 1.0, rng);
    ScalarField back = from_spectrum(to_spectrum(f));
    double err = 0.0;
    for (std::size_t i = 0; i < f.size(); i++) err = std::max(err, std::abs(f[i] - back[i]));
    CHECK(err < 1e-13);
}

TEST_CASE("spectrum normalization matches the analytic coefficients") {
    // f = 3 + 2 cos(2 pi x1) has c_(0,0) = 3 and c_(0,1) = c_(0,-1) = 1
    TorusGrid g = make_grid(2, 16);
    ScalarField f = fill(g, [](const double* x) { return 3.0 + 2.0 * std::cos(kTwoPi * x[1]); });
    Spectrum s = to_spectrum(f);
    CHECK(s.data()[0].real() == doctest::Approx(3.0).epsilon(1e-13));
    CHECK(s.data()[0].imag() == doctest::Approx(0.0).epsilon(1e-13));
    CHECK(s.data()[1].real() == doctest::Approx(1.0).epsilon(1e-13));
    double rest = 0.0;
    for (std::size_t i = 2; i < s.size(); i++) rest = std::max(rest, std::abs(s.data()[i]));
    CHECK(rest < 1e-13);
}

TEST_CASE("spectral derivative of sin is 2 pi cos, exactly per axis") {
    TorusGrid g = make_grid(2, 32);
    ScalarField f = fill(g, [](const double* x) { return std::sin(kTwoPi * x[0]); });
    ScalarField d0 = spectral_derivative(f, 0);
    ScalarField d1 = spectral_derivative(f, 1);
    ScalarField want = fill(g, [](const double* x) { return kTwoPi * std::cos(kTwoPi * x[0]); });
    double e0 = 0.0;
    for (std::size_t i = 0; i < f.size(); i++) e0 = std::max(e0, std::abs(d0[i] - want[i]));
    CHECK(e0 < 1e-11);
    CHECK(max_abs(d1) < 1e-12);
    CHECK_THROWS_AS(spectral_derivative(f, 2), std::invalid_argument);
}

TEST_CASE("derivative zeroes the unmatched Nyquist mode") {
    TorusGrid g = make_grid(2, 16);
    ScalarField f = fill(g, [](const double* x) { return std::cos(kTwoPi * 8.0 * x[0]); });
    CHECK(max_abs(f) == doctest::Approx(1.0));  // mode is representable
    CHECK(max_abs(spectral_derivative(f, 0)) < 1e-12);
}

TEST_CASE("two-thirds rule removes high modes and keeps low ones") {
    TorusGrid g = make_grid(2, 16);  // cutoff floor(16/3) = 5
    ScalarField lo = fill(g, [](const double* x) { return std::cos(kTwoPi * 5.0 * x[0]); });
    ScalarField hi = fill(g, [](const double* x) { return std::cos(kTwoPi * 6.0 * x[1]); });
    ScalarField sum = lo + hi;
    ScalarField filtered = dealias(sum);
    double err = 0.0;
    for (std::size_t i = 0; i < sum.size(); i++) err = std::max(err, std::abs(filtered[i] - lo[i]));
    CHECK(err < 1e-13);
}

TEST_CASE("integrate computes exact means of trigonometric squares") {
    TorusGrid g = make_grid(2, 32);
    ScalarField one(g, 1.0);
    CHECK(integrate(one) == doctest::Approx(1.0).epsilon(1e-15));
    ScalarField s2 = fill(g, [](const double* x) {
        double v = std::sin(kTwoPi * x[0]);
        return v * v;
    });
    CHECK(integrate(s2) == doctest::Approx(0.5).epsilon(1e-14));
    ScalarField odd = fill(g, [](const double* x) { return std::sin(kTwoPi * x[1]); });
    CHECK(std::abs(integrate(odd)) < 1e-15);
}

TEST_CASE("exact sampler reproduces closed forms off-grid") {
    TorusGrid g = make_grid(2, 16);
    ScalarField f = fill(g, [](const double* x) {
        return std::sin(kTwoPi * x[0]) + std::cos(2.0 * kTwoPi * x[1]);
    });
    FieldSampler s(f, InterpMode::Exact);
    double p[2] = {0.37, 0.81};
    double want = std::sin(kTwoPi * 0.37) + std::cos(2.0 * kTwoPi * 0.81);
    CHECK(s(p) == doctest::Approx(want).epsilon(1e-12));

    // reproduces grid samples and is 1-periodic
    double q[2] = {3.0 / 16, 11.0 / 16};
    CHECK(s(q) == doctest::Approx(f[3 * 16 + 11]).epsilon(1e-12));
    double qp[2] = {3.0 / 16 + 1.0, 11.0 / 16 - 2.0};
    CHECK(s(qp) == doctest::Approx(s(q)).epsilon(1e-14));
}

TEST_CASE("exact sampler works on the four-torus") {
    TorusGrid g = make_grid(4, 8);
    ScalarField f = fill(g, [](const double* x) {
        return std::sin(kTwoPi * x[1]) * std::cos(kTwoPi * x[3]) + 0.5 * std::cos(kTwoPi * x[0]);
    });
    FieldSampler s(f, InterpMode::Exact);
    double p[4] = {0.11, 0.52, 0.93, 0.27};
    double want = std::sin(kTwoPi * 0.52) * std::cos(kTwoPi * 0.27) + 0.5 * std::cos(kTwoPi * 0.11);
    CHECK(s(p) == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("refined sampler tracks the exact one on band-limited data") {
    TorusGrid g = make_grid(4, 16);
    Rng rng(42);
    ScalarField f = random_band_limited(g, 2, 0.8, rng);
    FieldSampler ex(f, InterpMode::Exact);
    FieldSampler re(f, InterpMode::Refined);
    CHECK(re.mode() == InterpMode::Refined);
    Rng pts(5);
    double worst = 0.0;
    for (int t = 0; t < 20; t++) {
        double p[4];
        for (double& c : p) c = pts.uniform();
        worst = std::max(worst, std::abs(ex(p) - re(p)));
    }
    CHECK(worst < 1e-5);
    // and the refined evaluator reproduces grid samples to the same accuracy
    double q[4] = {1.0 / 16, 5.0 / 16, 0.0, 14.0 / 16};
    std::size_t idx = ((1 * 16 + 5) * 16 + 0) * 16 + 14;
    CHECK(re(q) == doctest::Approx(f[idx]).epsilon(1e-6));
}

TEST_CASE("auto interpolation picks exact in 2d and refined on large 4d grids") {
    TorusGrid g2 = make_grid(2, 64);
    ScalarField f2(g2, 1.0);
    CHECK(FieldSampler(f2).mode() == InterpMode::Exact);
    TorusGrid g4 = make_grid(4, 16);
    ScalarField f4(g4, 1.0);
    CHECK(FieldSampler(f4).mode() == InterpMode::Refined);
    TorusGrid g4s = make_grid(4, 8);
    ScalarField f4s(g4s, 1.0);
    CHECK(FieldSampler(f4s).mode() == InterpMode::Exact);
}

TEST_CASE("batch interpolation matches pointwise evaluation") {
    TorusGrid g = make_grid(2, 16);
    ScalarField f = fill(g, [](const double* x) { return std::cos(kTwoPi * (x[0] + 2 * x[1])); });
    std::vector<double> pts = {0.1, 0.2, 0.7, 0.65, 0.0, 0.0};
    std::vector<double> out = interpolate(f, pts);
    REQUIRE(out.size() == 3);
    FieldSampler s(f);
    for (int i = 0; i < 3; i++) CHECK(out[i] == doctest::Approx(s(pts.data() + 2 * i)));
}

TEST_CASE("random generator is deterministic per seed") {
    Rng a(123), b(123), c(124);
    bool same = true, differ = false;
    for (int i = 0; i < 16; i++) {
        std::uint64_t va = a.next_u64();
        same = same && (va == b.next_u64());
        differ = differ || (va != c.next_u64());
    }
    CHECK(same);
    CHECK(differ);

    Rng r1(9), r2(9);
    TorusGrid g = make_grid(2, 16);
    ScalarField f1 = random_band_limited(g, 3, 0.1, r1);
    ScalarField f2 = random_band_limited(g, 3, 0.1, r2);
    double diff = 0.0;
    for (std::size_t i = 0; i < f1.size(); i++) diff = std::max(diff, std::abs(f1[i] - f2[i]));
    CHECK(diff == 0.0);
}

TEST_CASE("band-limited fields respect amplitude, mean and band") {
    TorusGrid g = make_grid(2, 32);
    Rng rng(2024);
    ScalarField f = random_band_limited(g, 4, 0.25, rng);
    CHECK(max_abs(f) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(std::abs(integrate(f)) < 1e-14);
    Spectrum s = to_spectrum(f);
    // any coefficient with some |k_a| > 4 must vanish
    const int n = g.n, nh = n / 2 + 1;
    double leak = 0.0;
    for (int i0 = 0; i0 < n; i0++)
        for (int j = 0; j < nh; j++) {
            int k0 = Spectrum::frequency(i0, n);
            if (std::abs(k0) > 4 || j > 4)
                leak = std::max(leak, std::abs(s.data()[static_cast<std::size_t>(i0) * nh + j]));
        }
    CHECK(leak < 1e-15);
    CHECK_THROWS_AS(random_band_limited(g, 0, 1.0, rng), std::invalid_argument);
}
