#pragma once

/** The modified gradient flow: velocity assembly (energy gradient plus the
 * reparametrizing vector field that completes the operator to an elliptic
 * one), explicit and semi-implicit time steppers with an energy-monotone
 * accept/reject rule, reconstruction of the gauge family by characteristics,
 * and generators for initial and reference data. */

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "torusflow/maps.hpp"
#include "torusflow/moment.hpp"

namespace torusflow {

/** Reparametrizing field on the 2-torus. With u the displacement of f and
 * alpha = (contraction of u into the area form), this is
 *     W(f) = -sharp_sigma d d* alpha,
 * the Hamiltonian field of the function d* alpha. The linear (identity)
 * part of the lift contributes a coclosed form and drops out, so W depends
 * on the periodic displacement only. */
VectorField deturck_field_t2(const TorusMap& f);

/** Reparametrizing field on the 4-torus. With v the displacement of the
 * inverse map and h4 = d*(contraction of v into the symplectic form),
 *     W(f) = sharp_omega d(h4 compose F).
 * The sign is the one that makes the linearization of the full modified
 * velocity dissipative at the identity (the opposite choice leaves one
 * expanding direction per wave vector; see the linearization test). */
VectorField deturck_field_t4(const TorusMap& f, double tol = 1e-10,
                             InterpMode mode = InterpMode::Auto);
VectorField deturck_field_t4_from_inverse(const TorusMap& f, const TorusMap& finv,
                                          InterpMode mode = InterpMode::Auto);

/** Full right-hand side -grad phi(f) + f_* W(f) expressed as a displacement
 * velocity, componentwise 2/3-dealiased. When dim = 4 the inverse map is
 * computed once and shared; pass inverse_warm_start across consecutive
 * evaluations and collect the inverse through inverse_out to reuse it. */
VectorField modified_velocity(const TorusMap& f, double tol = 1e-10,
                              InterpMode mode = InterpMode::Auto,
                              const TorusMap* inverse_warm_start = nullptr,
                              TorusMap* inverse_out = nullptr);

enum class Integrator { Rk4, Imex };

struct FlowOptions {
    double t_end = 1.0;
    double dt = 0.0;  // <= 0 selects the parabolic heuristic 0.2 h^2 / max H^2
    Integrator integrator = Integrator::Rk4;
    double inverse_tol = 1e-10;
    InterpMode interp = InterpMode::Auto;
    double phi_stop_ratio = 0.0;  // stop once phi <= ratio * phi(0); 0 disables
    double min_h_floor = 0.1;     // reject steps whose density dips below this
    double dt_min = 1e-10;        // abort threshold for the halving cascade
    long max_steps = 200000;
    bool store_gauge_data = false;  // keep W samples and the map trajectory
};

struct StepRecord {
    double t = 0.0;
    double phi = 0.0;
    double mu_inf = 0.0;
    double min_h = 1.0;
    double grad_norm = 0.0;
    double dt = 0.0;        // step size that produced this state (0 at t = 0)
    double residual = 0.0;  // gauge-equivalence residual, filled on request
};

struct FlowResult {
    TorusMap f;                          // final state
    std::vector<StepRecord> history;     // one per accepted state, incl. t = 0
    std::vector<VectorField> w_samples;  // W(f_t) per accepted state (optional)
    std::vector<TorusMap> trajectory;    // f_t per accepted state (optional)
    long rejected_steps = 0;
    bool converged = false;  // phi_stop_ratio reached
    bool aborted = false;
    std::string abort_reason;
};

using StepCallback = std::function<void(const StepRecord&, const TorusMap&)>;

/** Integrates the modified flow from f0. A trial step is accepted only if
 * the energy does not increase (1e-12 slack) and the density stays above
 * min_h_floor; otherwise dt halves, aborting below dt_min. Accepted steps
 * regrow dt by 1.25x up to the initial value. */
FlowResult run_flow(const TorusMap& f0, const FlowOptions& opt,
                    const StepCallback& on_accept = {});

/** Solves d/ds p(s) = -W_s(p(s)) per grid point with one classical 4-stage
 * step per sample interval, interpolating W in time by a sliding cubic
 * (four-sample) polynomial and spectrally in space. Returns the gauge maps
 * at every sample time
 * (the first is the identity). Throws if a reconstructed map leaves the
 * invertible regime (non-positive density). */
std::vector<TorusMap> gauge_reconstruct(const std::vector<VectorField>& w_samples,
                                        const std::vector<double>& times,
                                        InterpMode mode = InterpMode::Auto);

/** Residuals of the recomposed (ungauged) trajectory g_t = f_t o phi_t:
 * centered time difference of the displacement plus the energy gradient,
 * in the max norm. Entries 0 and last are not defined and left at 0. */
std::vector<double> deturck_residuals(const std::vector<TorusMap>& trajectory,
                                      const std::vector<TorusMap>& gauge,
                                      const std::vector<double>& times,
                                      double tol = 1e-10,
                                      InterpMode mode = InterpMode::Auto);

/** id + amplitude-scaled random band-limited displacement; kmax = 0 picks
 * n/8. The amplitude is the max-norm of the largest component. */
TorusMap random_initial_map(const TorusGrid& g, double amplitude,
                            std::uint64_t seed, int kmax = 0);

/** Time-1 map of the Hamiltonian field of h, integrated per grid point by
 * the classical 4-stage scheme with the given number of substeps. Exactly
 * volume preserving in the continuum; the substep count controls how far
 * the discrete map sits from the symplectic group. */
TorusMap hamiltonian_map(const ScalarField& h, int substeps,
                         InterpMode mode = InterpMode::Auto);

/** Composition of two transverse shear maps, each an exact
 * symplectomorphism (dim 4) / area-preserving map (dim 2); the only
 * symplectic defect of the result is interpolation error in the
 * composition. Deterministic in the seed. */
TorusMap shear_symplectomorphism(const TorusGrid& g, double amplitude,
                                 std::uint64_t seed,
                                 InterpMode mode = InterpMode::Auto);

}  // namespace torusflow
