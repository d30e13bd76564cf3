#ifndef TORUSFLOW_MAPS_HPP
#define TORUSFLOW_MAPS_HPP

#include "torusflow/forms.hpp"
#include "torusflow/grid.hpp"

namespace torusflow {

/** Square matrix of scalar fields (row-major entries), used for Jacobians
 * and pointwise matrix algebra on the grid. */
class MatrixField {
  public:
    MatrixField() = default;
    explicit MatrixField(const TorusGrid& g)
        : grid_(g), e_(static_cast<std::size_t>(g.dim) * g.dim, ScalarField(g)) {}

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    ScalarField& at(int i, int j) { return e_[static_cast<std::size_t>(i) * dim() + j]; }
    const ScalarField& at(int i, int j) const { return e_[static_cast<std::size_t>(i) * dim() + j]; }

  private:
    TorusGrid grid_;
    std::vector<ScalarField> e_;
};

/** Pointwise determinant (Gaussian elimination per grid point). */
ScalarField determinant(const MatrixField& m);

/** Torus self-map f(x) = x + u(x) with periodic displacement u, sampled on
 * the grid. All maps handled here are smooth perturbations of the identity;
 * whether f is actually a diffeomorphism shows up through its density. */
class TorusMap {
  public:
    TorusMap() = default;
    explicit TorusMap(const TorusGrid& g) : u_(g) {}
    explicit TorusMap(VectorField u) : u_(std::move(u)) {}

    const TorusGrid& grid() const { return u_.grid(); }
    VectorField& displacement() { return u_; }
    const VectorField& displacement() const { return u_; }

  private:
    VectorField u_;
};

TorusMap identity_map(const TorusGrid& g);

/** Jacobian Df = I + Du with spectral derivatives. */
MatrixField jacobian(const TorusMap& f);

/** Density of the map: det Df, evaluated pointwise from the spectral
 * Jacobian. Positive everywhere iff f preserves orientation without folds
 * at the resolved scale. */
ScalarField map_density(const TorusMap& f);

/** Composition (f after g): u(x) = u_g(x) + u_f(x + u_g(x)). */
TorusMap compose(const TorusMap& f, const TorusMap& g, InterpMode mode = InterpMode::Auto);

/** Inverse map by a damped chord-Newton iteration per grid point. The
 * Jacobian is looked up at the nearest grid point; residuals use off-grid
 * sampling of u. warm_start (the previous inverse in a flow) seeds the
 * iteration. Throws std::runtime_error if some point cannot reach tol. */
TorusMap inverse_map(const TorusMap& f, double tol = 1e-10, int max_iter = 60,
                     const TorusMap* warm_start = nullptr, InterpMode mode = InterpMode::Auto);

/** max_x |g(f(x)) - x| with the shortest periodic representative; measures
 * how far g is from inverting f. */
double composition_distance(const TorusMap& f, const TorusMap& g,
                            InterpMode mode = InterpMode::Auto);

/** Pushforward of a vector field measured at the source point:
 * (f_* X)(x) = Df(x) X(x). */
VectorField pushforward(const TorusMap& f, const VectorField& x);

/** Pullback of a function: h o f. */
ScalarField pullback_function(const TorusMap& f, const ScalarField& h,
                              InterpMode mode = InterpMode::Auto);

/** Pullback of a k-form: components are sampled at f(x) and contracted with
 * minors of Df. */
KForm pullback(const TorusMap& f, const KForm& a, InterpMode mode = InterpMode::Auto);

/** Pullback of a 2-form with constant coefficients (no sampling needed):
 * component matrix Df^T C Df with C the constant component matrix of w. */
KForm pullback_constant_two_form(const TorusMap& f, const KForm& w);

}  // namespace torusflow

#endif
