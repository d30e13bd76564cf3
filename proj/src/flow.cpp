#include "torusflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "torusflow/forms.hpp"

namespace torusflow {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

/** alpha_a = sum_b w[a][b] y_b: contraction of a vector field into the
 * constant structure form, as a 1-form. */
KForm structure_flat(const VectorField& y) {
    const TorusGrid& g = y.grid();
    double w[4][4];
    structure_contraction_matrix(g.dim, w);
    KForm alpha(g, 1);
    for (int a = 0; a < g.dim; a++) {
        ScalarField acc(g);
        for (int b = 0; b < g.dim; b++) {
            if (w[a][b] == 0.0) continue;
            ScalarField t = y[b];
            t *= w[a][b];
            acc += t;
        }
        alpha.comp(a) = acc;
    }
    return alpha;
}

void add_scaled(VectorField& acc, const VectorField& v, double s) {
    for (int a = 0; a < acc.grid().dim; a++) {
        ScalarField t = v[a];
        t *= s;
        acc[a] += t;
    }
}

TorusMap displaced(const TorusMap& f, const VectorField& v, double s) {
    TorusMap out = f;
    add_scaled(out.displacement(), v, s);
    return out;
}
}  // namespace

VectorField deturck_field_t2(const TorusMap& f) {
    const TorusGrid& g = f.grid();
    if (g.dim != 2) throw std::invalid_argument("deturck_field_t2 needs a 2-torus map");
    KForm alpha = structure_flat(f.displacement());
    KForm dh = exterior_derivative(codifferential(alpha));
    VectorField out = structure_sharp(dh);
    out *= -1.0;
    return out;
}

VectorField deturck_field_t4_from_inverse(const TorusMap& f, const TorusMap& finv,
                                          InterpMode mode) {
    const TorusGrid& g = f.grid();
    if (g.dim != 4) throw std::invalid_argument("deturck_field_t4 needs a 4-torus map");
    KForm alpha = structure_flat(finv.displacement());
    KForm h4 = codifferential(alpha);
    KForm pulled(g, 0);
    pulled.comp(0) = pullback_function(f, h4.comp(0), mode);
    return structure_sharp(exterior_derivative(pulled));
}

VectorField deturck_field_t4(const TorusMap& f, double tol, InterpMode mode) {
    return deturck_field_t4_from_inverse(f, inverse_map(f, tol, 60, nullptr, mode), mode);
}

VectorField modified_velocity(const TorusMap& f, double tol, InterpMode mode,
                              const TorusMap* inverse_warm_start, TorusMap* inverse_out) {
    const TorusGrid& g = f.grid();
    VectorField v;
    if (g.dim == 2) {
        VectorField w = deturck_field_t2(f);
        v = pushforward(f, w);
        v -= grad_t2(f);
    } else {
        TorusMap finv = inverse_map(f, tol, 60, inverse_warm_start, mode);
        VectorField w = deturck_field_t4_from_inverse(f, finv, mode);
        v = pushforward(f, w);
        v -= grad_t4_from_inverse(f, finv, mode);
        if (inverse_out) *inverse_out = std::move(finv);
    }
    for (int a = 0; a < g.dim; a++) dealias_in_place(v[a]);
    return v;
}

namespace {

/** Everything the stepper needs at an accepted state. */
struct StateEval {
    VectorField velocity;
    double phi = 0.0;
    double mu_inf = 0.0;
    double min_h = 1.0;
    double max_h = 1.0;
    double grad_norm = 0.0;
    VectorField w;   // reparametrizing field (pre-pushforward)
    TorusMap finv;   // dim 4 only
    bool has_finv = false;
};

StateEval evaluate_state(const TorusMap& f, const FlowOptions& opt,
                         const TorusMap* warm, bool with_diagnostics) {
    const TorusGrid& g = f.grid();
    StateEval e;
    ScalarField h = map_density(f);
    e.min_h = min_value(h);
    e.max_h = max_abs(h);
    if (g.dim == 2) {
        e.w = deturck_field_t2(f);
        VectorField r = grad_t2(f);
        e.grad_norm = g_norm(r);
        e.velocity = pushforward(f, e.w);
        e.velocity -= r;
        if (with_diagnostics) {
            MomentValueT2 m = moment_t2(f);
            e.mu_inf = max_abs(m.mu);
            ScalarField mu2 = m.mu;
            for (std::size_t i = 0; i < mu2.size(); i++) mu2[i] *= mu2[i];
            e.phi = 0.5 * integrate(mu2);
        }
    } else {
        e.finv = inverse_map(f, opt.inverse_tol, 60, warm, opt.interp);
        e.has_finv = true;
        e.w = deturck_field_t4_from_inverse(f, e.finv, opt.interp);
        VectorField r = grad_t4_from_inverse(f, e.finv, opt.interp);
        e.grad_norm = g_norm(r);
        e.velocity = pushforward(f, e.w);
        e.velocity -= r;
        e.phi = energy_from_inverse(e.finv);
        if (with_diagnostics) {
            auto mu = moment_hk(f);
            for (const auto& m : mu) e.mu_inf = std::max(e.mu_inf, max_abs(m));
        }
    }
    for (int a = 0; a < g.dim; a++) dealias_in_place(e.velocity[a]);
    return e;
}

/** phi and min H of a trial state, reusing (and handing back) its inverse. */
struct TrialEval {
    double phi = 0.0;
    double min_h = 0.0;
    TorusMap finv;
    bool has_finv = false;
};

TrialEval evaluate_trial(const TorusMap& f, const FlowOptions& opt, const TorusMap* warm) {
    TrialEval e;
    e.min_h = min_value(map_density(f));
    if (f.grid().dim == 2) {
        e.phi = energy(f);
    } else {
        e.finv = inverse_map(f, opt.inverse_tol, 60, warm, opt.interp);
        e.has_finv = true;
        e.phi = energy_from_inverse(e.finv);
    }
    return e;
}

TorusMap rk4_trial(const TorusMap& f, const StateEval& cur, double dt,
                   const FlowOptions& opt) {
    const TorusMap* warm = cur.has_finv ? &cur.finv : nullptr;
    TorusMap warm_store;
    TorusMap* warm_out = f.grid().dim == 4 ? &warm_store : nullptr;

    TorusMap f2 = displaced(f, cur.velocity, 0.5 * dt);
    VectorField k2 = modified_velocity(f2, opt.inverse_tol, opt.interp, warm, warm_out);
    if (warm_out) warm = warm_out;

    TorusMap f3 = displaced(f, k2, 0.5 * dt);
    VectorField k3 = modified_velocity(f3, opt.inverse_tol, opt.interp, warm, warm_out);

    TorusMap f4 = displaced(f, k3, dt);
    VectorField k4 = modified_velocity(f4, opt.inverse_tol, opt.interp, warm, warm_out);

    VectorField incr = cur.velocity;
    add_scaled(incr, k2, 2.0);
    add_scaled(incr, k3, 2.0);
    incr += k4;
    return displaced(f, incr, dt / 6.0);
}

/** One semi-implicit Euler step: the flat heat operator c*Laplace, with c
 * dominating the parabolic coefficient, is folded in implicitly by spectral
 * division; the full nonlinear velocity stays explicit. Unconditionally
 * stable for the stiff linear part. */
TorusMap imex_trial(const TorusMap& f, const StateEval& cur, double dt) {
    const TorusGrid& g = f.grid();
    const double c = std::max(1.0, cur.max_h * cur.max_h);
    TorusMap out = f;
    const int nh = g.n / 2 + 1;
    for (int a = 0; a < g.dim; a++) {
        Spectrum su = to_spectrum(f.displacement()[a]);
        Spectrum sv = to_spectrum(cur.velocity[a]);
        std::complex<double>* pu = su.data();
        const std::complex<double>* pv = sv.data();
        for (std::size_t i = 0; i < su.size(); i++) {
            std::size_t rest = i / static_cast<std::size_t>(nh);
            int klast = static_cast<int>(i % static_cast<std::size_t>(nh));
            double k2 = static_cast<double>(klast) * klast;
            for (int ax = g.dim - 2; ax >= 0; ax--) {
                int idx = static_cast<int>(rest % static_cast<std::size_t>(g.n));
                rest /= static_cast<std::size_t>(g.n);
                double kf = Spectrum::frequency(idx, g.n);
                k2 += kf * kf;
            }
            k2 *= kTwoPi * kTwoPi;
            pu[i] = (pu[i] + dt * (pv[i] + c * k2 * pu[i])) / (1.0 + dt * c * k2);
        }
        out.displacement()[a] = from_spectrum(su);
    }
    return out;
}

}  // namespace

FlowResult run_flow(const TorusMap& f0, const FlowOptions& opt, const StepCallback& on_accept) {
    const TorusGrid& g = f0.grid();
    if (!(opt.t_end > 0.0)) throw std::invalid_argument("run_flow: t_end must be positive");

    FlowResult res;
    res.f = f0;
    StateEval cur = evaluate_state(res.f, opt, nullptr, true);

    const double h = 1.0 / g.n;
    const double dt0 = opt.dt > 0.0
                           ? opt.dt
                           : 0.2 * h * h / std::max(1.0, cur.max_h * cur.max_h);
    double dt = dt0;
    double t = 0.0;
    const double phi0 = cur.phi;

    auto record = [&](double step_dt) {
        StepRecord r;
        r.t = t;
        r.phi = cur.phi;
        r.mu_inf = cur.mu_inf;
        r.min_h = cur.min_h;
        r.grad_norm = cur.grad_norm;
        r.dt = step_dt;
        res.history.push_back(r);
        if (opt.store_gauge_data) {
            res.w_samples.push_back(cur.w);
            res.trajectory.push_back(res.f);
        }
        if (on_accept) on_accept(r, res.f);
    };
    record(0.0);
    if (!(cur.min_h > opt.min_h_floor)) {
        res.aborted = true;
        res.abort_reason = "initial density at or below the acceptance floor";
        return res;
    }

    long accepted = 0;
    while (t < opt.t_end - 1e-15 && accepted < opt.max_steps) {
        const double dt_try = std::min(dt, opt.t_end - t);
        bool ok = false;
        TorusMap trial;
        TrialEval te;
        try {
            trial = opt.integrator == Integrator::Rk4 ? rk4_trial(res.f, cur, dt_try, opt)
                                                      : imex_trial(res.f, cur, dt_try);
            te = evaluate_trial(trial, opt, cur.has_finv ? &cur.finv : nullptr);
            ok = std::isfinite(te.phi) && te.phi <= cur.phi + 1e-12 &&
                 te.min_h > opt.min_h_floor;
        } catch (const std::runtime_error&) {
            ok = false;  // inversion stalled: treat as a failed trial
        }
        if (ok) {
            res.f = std::move(trial);
            t += dt_try;
            accepted++;
            cur = evaluate_state(res.f, opt, te.has_finv ? &te.finv : nullptr, true);
            record(dt_try);
            dt = std::min(dt * 1.25, dt0);
            if (opt.phi_stop_ratio > 0.0 && cur.phi <= phi0 * opt.phi_stop_ratio) {
                res.converged = true;
                break;
            }
        } else {
            dt *= 0.5;
            res.rejected_steps++;
            if (dt < opt.dt_min) {
                std::ostringstream msg;
                msg << "time step underflow at t = " << t << " (dt = " << dt
                    << ", phi = " << cur.phi << ", min H = " << cur.min_h << ")";
                res.aborted = true;
                res.abort_reason = msg.str();
                break;
            }
        }
    }
    return res;
}

std::vector<TorusMap> gauge_reconstruct(const std::vector<VectorField>& w_samples,
                                        const std::vector<double>& times,
                                        InterpMode mode) {
    if (w_samples.size() != times.size())
        throw std::invalid_argument("gauge_reconstruct: sample/time count mismatch");
    if (w_samples.empty()) return {};
    const TorusGrid& g = w_samples[0].grid();
    const int dim = g.dim;
    const std::size_t count = g.point_count();

    std::vector<double> pos(count * static_cast<std::size_t>(dim));
    for (std::size_t i = 0; i < count; i++) {
        std::size_t r = i;
        for (int a = dim - 1; a >= 0; a--) {
            pos[i * dim + static_cast<std::size_t>(a)] =
                static_cast<double>(r % static_cast<std::size_t>(g.n)) / g.n;
            r /= static_cast<std::size_t>(g.n);
        }
    }

    auto to_map = [&]() {
        TorusMap m(g);
        for (int a = 0; a < dim; a++) {
            ScalarField& u = m.displacement()[a];
            for (std::size_t i = 0; i < count; i++) {
                std::size_t r = i;
                for (int ax = dim - 1; ax > a; ax--) r /= static_cast<std::size_t>(g.n);
                double base = static_cast<double>(r % static_cast<std::size_t>(g.n)) / g.n;
                double d = pos[i * dim + static_cast<std::size_t>(a)] - base;
                d -= std::round(d);
                u[i] = d;
            }
        }
        return m;
    };

    std::vector<TorusMap> out;
    out.reserve(times.size());
    out.push_back(identity_map(g));

    using Samplers = std::vector<FieldSampler>;
    auto build = [&](const VectorField& w) {
        Samplers s;
        s.reserve(static_cast<std::size_t>(dim));
        for (int a = 0; a < dim; a++) s.emplace_back(w[a], mode);
        return s;
    };

    // Sliding window of sampler sets for the samples bracketing the current
    // segment.  The field is interpolated in time through up to four samples
    // (cubic Lagrange) so the time interpolation matches the fourth-order
    // accuracy of the per-point integrator.
    const std::size_t nsamp = times.size();
    std::deque<Samplers> window;
    std::size_t win_lo = 0;
    std::size_t win_next = 0;

    for (std::size_t seg = 0; seg + 1 < nsamp; seg++) {
        const double dt = times[seg + 1] - times[seg];
        if (!(dt > 0.0)) throw std::invalid_argument("gauge_reconstruct: times must increase");
        std::size_t lo = seg == 0 ? 0 : seg - 1;
        std::size_t hi = std::min(nsamp - 1, seg + 2);
        if (hi >= 3) lo = std::min(lo, hi - 3);
        while (win_next <= hi) window.push_back(build(w_samples[win_next++]));
        while (win_lo < lo) {
            window.pop_front();
            win_lo++;
        }
        const std::size_t m = hi - lo + 1;

        // Lagrange weights at the three integrator stage times.
        const double stage_t[3] = {times[seg], times[seg] + 0.5 * dt, times[seg + 1]};
        double wts[3][4];
        for (int s = 0; s < 3; s++) {
            for (std::size_t j = 0; j < m; j++) {
                double w = 1.0;
                for (std::size_t l = 0; l < m; l++) {
                    if (l == j) continue;
                    w *= (stage_t[s] - times[lo + l]) / (times[lo + j] - times[lo + l]);
                }
                wts[s][j] = w;
            }
        }

        auto vel = [&](int stage, const double* x, double* out_v) {
            for (int a = 0; a < dim; a++) {
                double acc = 0.0;
                for (std::size_t j = 0; j < m; j++)
                    acc += wts[stage][j] * window[j][static_cast<std::size_t>(a)](x);
                out_v[a] = -acc;
            }
        };
        for (std::size_t i = 0; i < count; i++) {
            double* x = &pos[i * dim];
            double k1[4], k2[4], k3[4], k4[4], y[4];
            vel(0, x, k1);
            for (int a = 0; a < dim; a++) y[a] = x[a] + 0.5 * dt * k1[a];
            vel(1, y, k2);
            for (int a = 0; a < dim; a++) y[a] = x[a] + 0.5 * dt * k2[a];
            vel(1, y, k3);
            for (int a = 0; a < dim; a++) y[a] = x[a] + dt * k3[a];
            vel(2, y, k4);
            for (int a = 0; a < dim; a++)
                x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        TorusMap recon = to_map();
        if (min_value(map_density(recon)) <= 0.0)
            throw std::runtime_error("gauge_reconstruct: reconstructed map lost invertibility");
        out.push_back(std::move(recon));
    }
    return out;
}

std::vector<double> deturck_residuals(const std::vector<TorusMap>& trajectory,
                                      const std::vector<TorusMap>& gauge,
                                      const std::vector<double>& times,
                                      double tol, InterpMode mode) {
    if (trajectory.size() != gauge.size() || trajectory.size() != times.size())
        throw std::invalid_argument("deturck_residuals: series lengths differ");
    const std::size_t m = trajectory.size();
    std::vector<double> res(m, 0.0);
    if (m < 3) return res;

    std::vector<TorusMap> recomposed;
    recomposed.reserve(m);
    for (std::size_t i = 0; i < m; i++)
        recomposed.push_back(compose(trajectory[i], gauge[i], mode));

    for (std::size_t i = 1; i + 1 < m; i++) {
        const double span = times[i + 1] - times[i - 1];
        VectorField grad = grad_energy(recomposed[i], tol, mode);
        double worst = 0.0;
        const int dim = grad.grid().dim;
        for (int a = 0; a < dim; a++) {
            const ScalarField& up = recomposed[i + 1].displacement()[a];
            const ScalarField& um = recomposed[i - 1].displacement()[a];
            const ScalarField& ga = grad[a];
            for (std::size_t p = 0; p < ga.size(); p++) {
                double r = (up[p] - um[p]) / span + ga[p];
                worst = std::max(worst, std::abs(r));
            }
        }
        res[i] = worst;
    }
    return res;
}

TorusMap random_initial_map(const TorusGrid& g, double amplitude, std::uint64_t seed,
                            int kmax) {
    if (kmax <= 0) kmax = std::max(1, g.n / 8);
    Rng rng(seed);
    TorusMap f(g);
    for (int a = 0; a < g.dim; a++)
        f.displacement()[a] = random_band_limited(g, kmax, amplitude, rng);
    return f;
}

TorusMap hamiltonian_map(const ScalarField& h, int substeps, InterpMode mode) {
    if (substeps < 1) throw std::invalid_argument("hamiltonian_map: substeps must be >= 1");
    const TorusGrid& g = h.grid();
    VectorField x_h = hamiltonian_field(h);
    std::vector<FieldSampler> s;
    s.reserve(static_cast<std::size_t>(g.dim));
    for (int a = 0; a < g.dim; a++) s.emplace_back(x_h[a], mode);

    const int dim = g.dim;
    const double dt = 1.0 / substeps;
    TorusMap f(g);
    const std::size_t count = g.point_count();
    for (std::size_t i = 0; i < count; i++) {
        double x[4], x0[4];
        std::size_t r = i;
        for (int a = dim - 1; a >= 0; a--) {
            x[a] = static_cast<double>(r % static_cast<std::size_t>(g.n)) / g.n;
            x0[a] = x[a];
            r /= static_cast<std::size_t>(g.n);
        }
        auto vel = [&](const double* p, double* v) {
            for (int a = 0; a < dim; a++) v[a] = s[static_cast<std::size_t>(a)](p);
        };
        for (int step = 0; step < substeps; step++) {
            double k1[4], k2[4], k3[4], k4[4], y[4];
            vel(x, k1);
            for (int a = 0; a < dim; a++) y[a] = x[a] + 0.5 * dt * k1[a];
            vel(y, k2);
            for (int a = 0; a < dim; a++) y[a] = x[a] + 0.5 * dt * k2[a];
            vel(y, k3);
            for (int a = 0; a < dim; a++) y[a] = x[a] + dt * k3[a];
            vel(y, k4);
            for (int a = 0; a < dim; a++)
                x[a] += dt / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        }
        for (int a = 0; a < dim; a++) {
            double d = x[a] - x0[a];
            d -= std::round(d);
            f.displacement()[a][i] = d;
        }
    }
    return f;
}

namespace {
/** Band-limited 1-d profile with unit-order coefficients. */
ScalarField axis_profile(const TorusGrid& g, int axis, Rng& rng, double amplitude) {
    double a1 = rng.normal(), b1 = rng.normal(), a2 = 0.5 * rng.normal(), b2 = 0.5 * rng.normal();
    ScalarField f(g);
    std::size_t stride = 1;
    for (int ax = g.dim - 1; ax > axis; ax--) stride *= static_cast<std::size_t>(g.n);
    for (std::size_t i = 0; i < f.size(); i++) {
        double x = static_cast<double>((i / stride) % static_cast<std::size_t>(g.n)) / g.n;
        f[i] = a1 * std::sin(kTwoPi * x) + b1 * std::cos(kTwoPi * x) +
               a2 * std::sin(2 * kTwoPi * x) + b2 * std::cos(2 * kTwoPi * x);
    }
    double peak = max_abs(f);
    if (peak > 0.0) f *= amplitude / peak;
    return f;
}

/** Scalar depending on one pair of axes only, band-limited to |k| <= 2. */
ScalarField pair_profile(const TorusGrid& g, int ax0, int ax1, Rng& rng, double amplitude) {
    ScalarField f(g);
    double c[5][5][2];
    for (int i = 0; i < 5; i++)
        for (int j = 0; j < 5; j++)
            for (int p = 0; p < 2; p++)
                c[i][j][p] = rng.normal() / (1.0 + i * i + j * j);
    std::size_t s0 = 1, s1 = 1;
    for (int ax = g.dim - 1; ax > ax0; ax--) s0 *= static_cast<std::size_t>(g.n);
    for (int ax = g.dim - 1; ax > ax1; ax--) s1 *= static_cast<std::size_t>(g.n);
    for (std::size_t i = 0; i < f.size(); i++) {
        double x = static_cast<double>((i / s0) % static_cast<std::size_t>(g.n)) / g.n;
        double y = static_cast<double>((i / s1) % static_cast<std::size_t>(g.n)) / g.n;
        double acc = 0.0;
        for (int ki = 0; ki <= 2; ki++)
            for (int kj = 0; kj <= 2; kj++) {
                if (ki == 0 && kj == 0) continue;
                double ph = kTwoPi * (ki * x + kj * y);
                acc += c[ki][kj][0] * std::cos(ph) + c[ki][kj][1] * std::sin(ph);
            }
        f[i] = acc;
    }
    double peak = max_abs(f);
    if (peak > 0.0) f *= amplitude / peak;
    return f;
}
}  // namespace

TorusMap shear_symplectomorphism(const TorusGrid& g, double amplitude,
                                 std::uint64_t seed, InterpMode mode) {
    Rng rng(seed ? seed : 1);
    if (g.dim == 2) {
        TorusMap a(g), b(g);
        a.displacement()[0] = axis_profile(g, 1, rng, amplitude);
        b.displacement()[1] = axis_profile(g, 0, rng, amplitude);
        return compose(b, a, mode);
    }
    // dim 4: generating functions h(x0,x1) and q(x2,x3); displacement
    // (0,0,d0 h,d1 h) and (d2 q,d3 q,0,0) each preserve the symplectic
    // structure exactly. Rescaling a generating function by a constant
    // keeps that exactness, so normalize the displacement peak afterwards.
    ScalarField h = pair_profile(g, 0, 1, rng, 1.0);
    ScalarField q = pair_profile(g, 2, 3, rng, 1.0);
    TorusMap a(g), b(g);
    a.displacement()[2] = spectral_derivative(h, 0);
    a.displacement()[3] = spectral_derivative(h, 1);
    b.displacement()[0] = spectral_derivative(q, 2);
    b.displacement()[1] = spectral_derivative(q, 3);
    double peak_a = std::max(max_abs(a.displacement()[2]), max_abs(a.displacement()[3]));
    double peak_b = std::max(max_abs(b.displacement()[0]), max_abs(b.displacement()[1]));
    if (peak_a > 0.0) {
        a.displacement()[2] *= amplitude / peak_a;
        a.displacement()[3] *= amplitude / peak_a;
    }
    if (peak_b > 0.0) {
        b.displacement()[0] *= amplitude / peak_b;
        b.displacement()[1] *= amplitude / peak_b;
    }
    return compose(b, a, mode);
}

}  // namespace torusflow
