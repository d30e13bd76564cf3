#ifndef TORUSFLOW_GRID_HPP
#define TORUSFLOW_GRID_HPP

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace torusflow {

/** Uniform periodic grid on the unit torus [0,1)^dim.
 *
 * dim is 2 or 4 and n (points per axis) is a power of two >= 8. Grid
 * points are x_i = i/n per axis; fields are stored row-major with the
 * last axis contiguous. Total volume is 1, so integrals reduce to means. */
struct TorusGrid {
    int dim = 2;
    int n = 8;

    double spacing() const { return 1.0 / n; }
    std::size_t point_count() const {
        std::size_t p = 1;
        for (int a = 0; a < dim; a++) p *= static_cast<std::size_t>(n);
        return p;
    }
    bool operator==(const TorusGrid&) const = default;
};

/** Validated constructor: throws std::invalid_argument unless dim is 2 or 4
 * and n is a power of two with n >= 8. */
TorusGrid make_grid(int dim, int n);

/** Real scalar field sampled on a TorusGrid, value semantics. */
class ScalarField {
  public:
    ScalarField() = default;
    ScalarField(const TorusGrid& g, double fill = 0.0)
        : grid_(g), v_(g.point_count(), fill) {}

    const TorusGrid& grid() const { return grid_; }
    std::size_t size() const { return v_.size(); }
    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    double& operator[](std::size_t i) { return v_[i]; }
    double operator[](std::size_t i) const { return v_[i]; }
    std::vector<double>& values() { return v_; }
    const std::vector<double>& values() const { return v_; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);

  private:
    TorusGrid grid_;
    std::vector<double> v_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);

/** Fourier coefficients of a real field, half-spectrum layout: the last
 * axis holds n/2+1 complex entries (real-to-complex convention), the other
 * axes the full signed frequency range. Coefficients are normalized so
 * that f(x) = sum_k c_k exp(2 pi i k.x). */
class Spectrum {
  public:
    Spectrum() = default;
    Spectrum(const TorusGrid& g);

    const TorusGrid& grid() const { return grid_; }
    std::size_t size() const { return c_.size(); }
    std::complex<double>* data() { return c_.data(); }
    const std::complex<double>* data() const { return c_.data(); }

    /** Signed integer frequency on a full (non-halved) axis index. */
    static int frequency(int index, int n) { return index <= n / 2 ? index : index - n; }

  private:
    TorusGrid grid_;
    std::vector<std::complex<double>> c_;
};

/** Forward transform to normalized Fourier coefficients. */
Spectrum to_spectrum(const ScalarField& f);
/** Inverse transform back to grid values. */
ScalarField from_spectrum(const Spectrum& s);

/** Exact derivative of the trigonometric interpolant along one axis.
 * The unmatched Nyquist mode (|k| = n/2) is zeroed: an odd derivative of
 * a real signal has no consistent Nyquist representative. */
ScalarField spectral_derivative(const ScalarField& f, int axis);

/** Zero all modes with |k_a| > n/3 on any axis (2/3 rule). Applied inside
 * nonlinear product pipelines to keep aliasing from feeding back. */
ScalarField dealias(const ScalarField& f);
void dealias_in_place(ScalarField& f);

/** Pointwise product followed by the 2/3-rule filter. */
ScalarField multiply_dealiased(const ScalarField& a, const ScalarField& b);

/** Integral over the torus (volume 1): the mean of the samples, summed
 * sequentially so results are reproducible. */
double integrate(const ScalarField& f);

double max_abs(const ScalarField& f);
double min_value(const ScalarField& f);

/** Interpolation backend for off-grid evaluation.
 *
 * Exact sums the trigonometric interpolant over all modes: spectrally exact,
 * O(n^dim) per point. Refined zero-pads the spectrum by 2x and applies an
 * order-8 local Lagrange stencil on the refined grid; error is bounded by
 * ~1e-3 * (pi |k| / (2n))^8 per mode, far below every tolerance used here
 * for band-limited data, at O(8^dim) per point. Auto selects Exact for
 * dim 2 and for small 4-d grids (n = 8), Refined otherwise. */
enum class InterpMode { Auto, Exact, Refined };

/** Reusable off-grid evaluator of one scalar field. Construction performs
 * the spectral precomputation; evaluation is const and thread-safe. */
class FieldSampler {
  public:
    FieldSampler(const ScalarField& f, InterpMode mode = InterpMode::Auto);

    /** Evaluate at one point (coordinates in any real range; wrapped). */
    double operator()(const double* pt) const;

    /** Evaluate at many points, pts laid out [p0_x0..p0_xd, p1_x0, ...]. */
    void eval(std::span<const double> pts, std::span<double> out) const;

    InterpMode mode() const { return mode_; }

  private:
    TorusGrid grid_;
    InterpMode mode_ = InterpMode::Exact;
    std::vector<std::complex<double>> full_;  // exact: full spectrum
    std::vector<double> fine_;                // refined: 2x-upsampled values
    int nf_ = 0;

    double eval_exact(const double* pt) const;
    double eval_refined(const double* pt) const;
};

/** Convenience wrapper: interpolate f at a flat list of points. */
std::vector<double> interpolate(const ScalarField& f, std::span<const double> pts,
                                InterpMode mode = InterpMode::Auto);

/** Deterministic cross-platform RNG (fixed 64-bit generator plus an explicit
 * uint-to-double mapping; identical streams for identical seeds). */
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : s_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next_u64();
    double uniform();             // [0,1)
    double normal();              // standard normal, Box-Muller
  private:
    std::uint64_t s_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/** Random band-limited field: modes 1 <= |k|_inf <= kmax with a smooth
 * spectral decay, zero mean, scaled so max|f| = amplitude. Modes are filled
 * in a fixed lexicographic order, so the result depends only on the seed. */
ScalarField random_band_limited(const TorusGrid& g, int kmax, double amplitude, Rng& rng);

}  // namespace torusflow

#endif
