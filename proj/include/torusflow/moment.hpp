#ifndef TORUSFLOW_MOMENT_HPP
#define TORUSFLOW_MOMENT_HPP

#include <array>

#include "torusflow/forms.hpp"
#include "torusflow/maps.hpp"

namespace torusflow {

/** Moment data on the two-torus: mu = 1 - density(f). Zero exactly on
 * area-preserving maps; mean zero because the density of a degree-one map
 * integrates to one. */
struct MomentValueT2 {
    ScalarField mu;
};

/** Moment data on the four-torus: the three scalar moments mu_I, mu_J,
 * mu_K (diagnostic) and the anti-self-dual 2-form mu_tilde that drives the
 * energy. */
struct MomentValueT4 {
    ScalarField mu_i, mu_j, mu_k;
    KForm mu_tilde;
};

MomentValueT2 moment_t2(const TorusMap& f);

/** The scalar moment triple mu_• = -(f^* w_• ^ w)/vol, shifted by the
 * constant that makes mu_•(id) = 0 (moment maps are defined up to an
 * additive constant; without the shift the third component would sit at
 * w^w/vol = -2 for every map). */
std::array<ScalarField, 3> moment_hk(const TorusMap& f);

/** Anti-self-dual part of (f^{-1})^* w. Equals w itself (not zero) at the
 * identity under these coordinate conventions; the energy below therefore
 * measures its deviation from w. */
KForm mu_tilde(const TorusMap& f, double tol = 1e-10, InterpMode mode = InterpMode::Auto);

/** Same, with a caller-supplied inverse (lets flows reuse a warm one). */
KForm mu_tilde_from_inverse(const TorusMap& finv);

/** dev(f) = asd((f^{-1})^* w) - w: vanishes exactly at symplectomorphisms. */
KForm deviation_from_inverse(const TorusMap& finv);

MomentValueT4 moment_t4(const TorusMap& f, double tol = 1e-10,
                        InterpMode mode = InterpMode::Auto);

/** Energy driving the flow.
 * dim 2: (1/2) Int (1 - H_f)^2.
 * dim 4: (1/2) ||dev(f)||_{L2}^2. */
double energy(const TorusMap& f, double tol = 1e-10, InterpMode mode = InterpMode::Auto);

/** dim-4 energy from a precomputed inverse. */
double energy_from_inverse(const TorusMap& finv);

/** Flat L2 pairing of displacement-variation fields; the metric against
 * which grad_t2 / grad_t4 are gradients. */
double g_inner(const VectorField& a, const VectorField& b);
double g_norm(const VectorField& a);

/** Gradient of the dim-2 energy as a displacement-variation field R with
 * d/ds phi(u + s V)|_0 = g_inner(R, V):
 *   R = -W_s A q,  A = Df,  q = sharp d*(H_f sigma),
 * with W_s the structure contraction matrix. Derived from the variation of
 * the density determinant via the adjugate identity; vanishes iff
 * d*(f^* sigma) = 0, i.e. exactly on critical points. */
VectorField grad_t2(const TorusMap& f);

/** Gradient of the dim-4 energy in the same sense:
 *   R(x) = H_f(x) * M(x) q(f(x)),  M = A^{-T} W A^{-1},  q = sharp d* dev,
 * where M is the contraction matrix of (f^{-1})^* w transported to the
 * source point. Vanishes iff d* dev = 0. */
VectorField grad_t4(const TorusMap& f, double tol = 1e-10, InterpMode mode = InterpMode::Auto);
VectorField grad_t4_from_inverse(const TorusMap& f, const TorusMap& finv,
                                 InterpMode mode = InterpMode::Auto);

/** Dimension dispatch for the two gradients. */
VectorField grad_energy(const TorusMap& f, double tol = 1e-10,
                        InterpMode mode = InterpMode::Auto);

}  // namespace torusflow

#endif
