#include "torusflow/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <functional>
#include <map>
#include <stdexcept>

namespace torusflow {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

// One cached FFTW plan pair per (dim, n). Plans are created with
// FFTW_ESTIMATE (deterministic algorithm choice) and FFTW_UNALIGNED so they
// can be executed on any caller buffer via the new-array interface.
struct PlanPair {
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;
};

PlanPair& plans_for(const TorusGrid& g) {
    static std::map<std::pair<int, int>, PlanPair> cache;
    auto key = std::make_pair(g.dim, g.n);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    std::vector<int> dims(g.dim, g.n);
    std::size_t nreal = g.point_count();
    std::size_t ncplx = nreal / g.n * (g.n / 2 + 1);
    std::vector<double> r(nreal);
    std::vector<std::complex<double>> c(ncplx);
    PlanPair p;
    unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    p.fwd = fftw_plan_dft_r2c(g.dim, dims.data(), r.data(),
                              reinterpret_cast<fftw_complex*>(c.data()), flags);
    p.bwd = fftw_plan_dft_c2r(g.dim, dims.data(),
                              reinterpret_cast<fftw_complex*>(c.data()), r.data(), flags);
    if (!p.fwd || !p.bwd) throw std::runtime_error("fftw plan creation failed");
    return cache.emplace(key, p).first->second;
}

std::size_t spectrum_size(const TorusGrid& g) {
    return g.point_count() / g.n * (g.n / 2 + 1);
}

// Decode the multi-index of a half-spectrum entry; axes[dim-1] runs over
// 0..n/2 only. Returns signed frequencies.
template <typename F>
void for_each_mode(const TorusGrid& g, F&& body) {
    const int n = g.n;
    const int nh = n / 2 + 1;
    std::size_t planes = 1;
    for (int a = 0; a < g.dim - 1; a++) planes *= static_cast<std::size_t>(n);
    int idx[4] = {0, 0, 0, 0};
    int k[4] = {0, 0, 0, 0};
    for (std::size_t p = 0; p < planes; p++) {
        std::size_t rest = p;
        for (int a = g.dim - 2; a >= 0; a--) {
            idx[a] = static_cast<int>(rest % n);
            rest /= n;
            k[a] = Spectrum::frequency(idx[a], n);
        }
        std::size_t base = p * nh;
        for (int j = 0; j < nh; j++) {
            k[g.dim - 1] = j;
            body(base + j, k);
        }
    }
}

}  // namespace

TorusGrid make_grid(int dim, int n) {
    if (dim != 2 && dim != 4)
        throw std::invalid_argument("grid dim must be 2 or 4, got " + std::to_string(dim));
    if (!power_of_two(n) || n < 8)
        throw std::invalid_argument("grid n must be a power of two >= 8, got " + std::to_string(n));
    return TorusGrid{dim, n};
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("field grids differ");
    for (std::size_t i = 0; i < v_.size(); i++) v_[i] += o.v_[i];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("field grids differ");
    for (std::size_t i = 0; i < v_.size(); i++) v_[i] -= o.v_[i];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& x : v_) x *= s;
    return *this;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { a += b; return a; }
ScalarField operator-(ScalarField a, const ScalarField& b) { a -= b; return a; }
ScalarField operator*(double s, ScalarField a) { a *= s; return a; }

Spectrum::Spectrum(const TorusGrid& g) : grid_(g), c_(spectrum_size(g)) {}

Spectrum to_spectrum(const ScalarField& f) {
    Spectrum s(f.grid());
    PlanPair& p = plans_for(f.grid());
    // r2c destroys its input for multi-d transforms, so copy first.
    std::vector<double> tmp(f.values());
    fftw_execute_dft_r2c(p.fwd, tmp.data(), reinterpret_cast<fftw_complex*>(s.data()));
    double scale = 1.0 / static_cast<double>(f.grid().point_count());
    for (std::size_t i = 0; i < s.size(); i++) s.data()[i] *= scale;
    return s;
}

ScalarField from_spectrum(const Spectrum& s) {
    ScalarField f(s.grid());
    PlanPair& p = plans_for(s.grid());
    std::vector<std::complex<double>> tmp(s.data(), s.data() + s.size());
    fftw_execute_dft_c2r(p.bwd, reinterpret_cast<fftw_complex*>(tmp.data()), f.data());
    return f;
}

ScalarField spectral_derivative(const ScalarField& f, int axis) {
    const TorusGrid& g = f.grid();
    if (axis < 0 || axis >= g.dim) throw std::invalid_argument("derivative axis out of range");
    Spectrum s = to_spectrum(f);
    const int n = g.n;
    for_each_mode(g, [&](std::size_t i, const int* k) {
        int ka = k[axis];
        if (std::abs(ka) == n / 2) {
            s.data()[i] = 0.0;  // unmatched Nyquist mode
        } else {
            s.data()[i] *= std::complex<double>(0.0, kTwoPi * ka);
        }
    });
    return from_spectrum(s);
}

void dealias_in_place(ScalarField& f) {
    const TorusGrid& g = f.grid();
    const int cut = g.n / 3;
    Spectrum s = to_spectrum(f);
    for_each_mode(g, [&](std::size_t i, const int* k) {
        for (int a = 0; a < g.dim; a++) {
            if (std::abs(k[a]) > cut) {
                s.data()[i] = 0.0;
                return;
            }
        }
    });
    f = from_spectrum(s);
}

ScalarField dealias(const ScalarField& f) {
    ScalarField out = f;
    dealias_in_place(out);
    return out;
}

ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid())) throw std::invalid_argument("field grids differ");
    ScalarField out(a.grid());
    for (std::size_t i = 0; i < out.size(); i++) out[i] = a[i] * b[i];
    dealias_in_place(out);
    return out;
}

double integrate(const ScalarField& f) {
    // Neumaier compensated sum: reproducible and accurate at n^4 sizes.
    double sum = 0.0, comp = 0.0;
    for (double x : f.values()) {
        double t = sum + x;
        comp += (std::abs(sum) >= std::abs(x)) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return (sum + comp) / static_cast<double>(f.size());
}

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double x : f.values()) m = std::max(m, std::abs(x));
    return m;
}

double min_value(const ScalarField& f) {
    double m = f.size() ? f[0] : 0.0;
    for (double x : f.values()) m = std::min(m, x);
    return m;
}

// ---------------------------------------------------------------------------
// Off-grid evaluation

namespace {

// Order-8 Lagrange weights on the integer stencil {-3,...,4} at offset
// s in [0,1). denom[j] = prod_{l != j} (j - l) for node j-3.
void lagrange8(double s, double* w) {
    static const double denom[8] = {-5040.0, 720.0, -240.0, 144.0, -144.0, 240.0, -720.0, 5040.0};
    double d[8];
    double prod = 1.0;
    for (int j = 0; j < 8; j++) {
        d[j] = s - (j - 3);
        prod *= d[j];
    }
    for (int j = 0; j < 8; j++) {
        // prod / d[j] = product over the other nodes; d[j] is never 0 for
        // s in (0,1); s == 0 handled exactly by the limit below.
        w[j] = (d[j] != 0.0) ? prod / (d[j] * denom[j]) : 1.0;
    }
    if (prod == 0.0) {
        for (int j = 0; j < 8; j++) w[j] = (d[j] == 0.0) ? 1.0 : 0.0;
    }
}

}  // namespace

FieldSampler::FieldSampler(const ScalarField& f, InterpMode mode) : grid_(f.grid()) {
    if (mode == InterpMode::Auto)
        mode = (grid_.dim == 2 || grid_.n <= 8) ? InterpMode::Exact : InterpMode::Refined;
    mode_ = mode;
    const int n = grid_.n;
    Spectrum s = to_spectrum(f);

    if (mode_ == InterpMode::Exact) {
        // Expand to the full spectrum (FFTW index order per axis).
        full_.assign(grid_.point_count(), 0.0);
        const int nh = n / 2 + 1;
        for_each_mode(grid_, [&](std::size_t i, const int*) {
            std::size_t plane = i / nh;
            int j = static_cast<int>(i % nh);
            std::size_t fi = plane * n + j;
            full_[fi] = s.data()[i];
            if (j != 0 && j != n / 2) {
                // conjugate partner: negate every axis index mod n
                int digits[4] = {0, 0, 0, 0};
                std::size_t r = plane;
                for (int a = grid_.dim - 2; a >= 0; a--) {
                    digits[a] = static_cast<int>(r % n);
                    r /= n;
                }
                std::size_t ci = 0;
                for (int a = 0; a < grid_.dim - 1; a++) ci = ci * n + (n - digits[a]) % n;
                ci = ci * n + (n - j);
                full_[ci] = std::conj(s.data()[i]);
            }
        });
    } else {
        // Zero-pad the spectrum by 2x per axis and transform back. Nyquist
        // planes are dropped; flow states are dealiased well below them.
        nf_ = 2 * n;
        TorusGrid fine{grid_.dim, nf_};
        Spectrum sf(fine);
        const int nhc = n / 2 + 1;
        const int nhf = nf_ / 2 + 1;
        for_each_mode(grid_, [&](std::size_t i, const int* k) {
            int j = static_cast<int>(i % nhc);
            if (j == n / 2) return;
            for (int a = 0; a < grid_.dim - 1; a++)
                if (std::abs(k[a]) == n / 2) return;
            std::size_t fi = 0;
            for (int a = 0; a < grid_.dim - 1; a++) {
                int ia = k[a] >= 0 ? k[a] : k[a] + nf_;
                fi = fi * nf_ + ia;
            }
            fi = fi * nhf + j;
            sf.data()[fi] = s.data()[i];
        });
        fine_ = from_spectrum(sf).values();
    }
}

double FieldSampler::eval_exact(const double* pt) const {
    const int n = grid_.n;
    const int dim = grid_.dim;
    // per-axis phase tables exp(2 pi i k x_a), FFTW index order
    std::vector<std::complex<double>> ph(static_cast<std::size_t>(dim) * n);
    for (int a = 0; a < dim; a++) {
        double x = pt[a] - std::floor(pt[a]);
        for (int i = 0; i < n; i++) {
            double arg = kTwoPi * Spectrum::frequency(i, n) * x;
            ph[static_cast<std::size_t>(a) * n + i] = std::complex<double>(std::cos(arg), std::sin(arg));
        }
    }
    std::complex<double> acc = 0.0;
    if (dim == 2) {
        for (int i0 = 0; i0 < n; i0++) {
            std::complex<double> row = 0.0;
            const std::complex<double>* c = full_.data() + static_cast<std::size_t>(i0) * n;
            for (int i1 = 0; i1 < n; i1++) row += c[i1] * ph[static_cast<std::size_t>(n) + i1];
            acc += row * ph[i0];
        }
    } else {
        const std::complex<double>* p0 = ph.data();
        const std::complex<double>* p1 = p0 + n;
        const std::complex<double>* p2 = p1 + n;
        const std::complex<double>* p3 = p2 + n;
        std::size_t idx = 0;
        for (int i0 = 0; i0 < n; i0++)
            for (int i1 = 0; i1 < n; i1++) {
                std::complex<double> w01 = p0[i0] * p1[i1];
                for (int i2 = 0; i2 < n; i2++) {
                    std::complex<double> row = 0.0;
                    for (int i3 = 0; i3 < n; i3++) row += full_[idx++] * p3[i3];
                    acc += row * w01 * p2[i2];
                }
            }
    }
    return acc.real();
}

double FieldSampler::eval_refined(const double* pt) const {
    const int dim = grid_.dim;
    const int nf = nf_;
    const int mask = nf - 1;
    int base[4];
    double w[4][8];
    int wrap[4][8];
    for (int a = 0; a < dim; a++) {
        double x = pt[a] - std::floor(pt[a]);
        double t = x * nf;
        double fl = std::floor(t);
        base[a] = static_cast<int>(fl);
        lagrange8(t - fl, w[a]);
        for (int j = 0; j < 8; j++) wrap[a][j] = (base[a] + j - 3) & mask;
    }
    if (dim == 2) {
        double acc = 0.0;
        for (int j0 = 0; j0 < 8; j0++) {
            const double* row = fine_.data() + static_cast<std::size_t>(wrap[0][j0]) * nf;
            double r = 0.0;
            for (int j1 = 0; j1 < 8; j1++) r += row[wrap[1][j1]] * w[1][j1];
            acc += r * w[0][j0];
        }
        return acc;
    }
    const std::size_t s2 = nf;
    const std::size_t s1 = s2 * nf;
    const std::size_t s0 = s1 * nf;
    double acc = 0.0;
    for (int j0 = 0; j0 < 8; j0++) {
        std::size_t o0 = static_cast<std::size_t>(wrap[0][j0]) * s0;
        double a0 = 0.0;
        for (int j1 = 0; j1 < 8; j1++) {
            std::size_t o1 = o0 + static_cast<std::size_t>(wrap[1][j1]) * s1;
            double a1 = 0.0;
            for (int j2 = 0; j2 < 8; j2++) {
                const double* row = fine_.data() + o1 + static_cast<std::size_t>(wrap[2][j2]) * s2;
                double a2 = 0.0;
                for (int j3 = 0; j3 < 8; j3++) a2 += row[wrap[3][j3]] * w[3][j3];
                a1 += a2 * w[2][j2];
            }
            a0 += a1 * w[1][j1];
        }
        acc += a0 * w[0][j0];
    }
    return acc;
}

double FieldSampler::operator()(const double* pt) const {
    return mode_ == InterpMode::Exact ? eval_exact(pt) : eval_refined(pt);
}

void FieldSampler::eval(std::span<const double> pts, std::span<double> out) const {
    const int dim = grid_.dim;
    std::size_t count = pts.size() / dim;
    for (std::size_t i = 0; i < count; i++) out[i] = (*this)(pts.data() + i * dim);
}

std::vector<double> interpolate(const ScalarField& f, std::span<const double> pts, InterpMode mode) {
    FieldSampler s(f, mode);
    std::vector<double> out(pts.size() / f.grid().dim);
    s.eval(pts, out);
    return out;
}

// ---------------------------------------------------------------------------
// Deterministic randomness

std::uint64_t Rng::next_u64() {
    // splitmix64: tiny, portable, well mixed
    std::uint64_t z = (s_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(kTwoPi * u2);
    have_spare_ = true;
    return r * std::cos(kTwoPi * u2);
}

ScalarField random_band_limited(const TorusGrid& g, int kmax, double amplitude, Rng& rng) {
    if (kmax < 1 || kmax >= g.n / 2)
        throw std::invalid_argument("band limit must satisfy 1 <= kmax < n/2");
    ScalarField f(g);
    const int n = g.n;
    int k[4] = {0, 0, 0, 0};
    // one representative per +-k pair: first nonzero component positive
    std::vector<std::array<int, 4>> reps;
    std::function<void(int)> walk = [&](int a) {
        if (a == g.dim) {
            int lead = 0;
            for (int b = 0; b < g.dim; b++) {
                if (k[b] != 0) { lead = k[b]; break; }
            }
            if (lead > 0) reps.push_back({k[0], k[1], k[2], k[3]});
            return;
        }
        for (k[a] = -kmax; k[a] <= kmax; k[a]++) walk(a + 1);
    };
    walk(0);
    // assemble a * cos(2 pi k.x + phase) terms in spectral space:
    // coefficient a/2 e^{i phase} at +k plus the conjugate at -k
    Spectrum s(g);
    const int nh = n / 2 + 1;
    auto entry = [&](const int* kk) -> std::complex<double>& {
        std::size_t i = 0;
        for (int a = 0; a < g.dim - 1; a++) i = i * n + static_cast<std::size_t>((kk[a] + n) % n);
        return s.data()[i * nh + kk[g.dim - 1]];
    };
    for (const auto& kk : reps) {
        double k2 = 0.0;
        for (int a = 0; a < g.dim; a++) k2 += static_cast<double>(kk[a]) * kk[a];
        double amp = rng.normal() / (1.0 + k2);
        double phase = kTwoPi * rng.uniform();
        std::complex<double> c = 0.5 * amp * std::complex<double>(std::cos(phase), std::sin(phase));
        int last = kk[g.dim - 1];
        if (last > 0) {
            entry(kk.data()) += c;
        } else if (last < 0) {
            int neg[4];
            for (int a = 0; a < g.dim; a++) neg[a] = -kk[a];
            entry(neg) += std::conj(c);
        } else {
            // both the mode and its conjugate live in the stored k_last = 0 plane
            int neg[4];
            for (int a = 0; a < g.dim; a++) neg[a] = -kk[a];
            entry(kk.data()) += c;
            entry(neg) += std::conj(c);
        }
    }
    f = from_spectrum(s);
    double m = max_abs(f);
    if (m > 0.0) f *= amplitude / m;
    return f;
}

}  // namespace torusflow
