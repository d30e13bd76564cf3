#ifndef TORUSFLOW_FORMS_HPP
#define TORUSFLOW_FORMS_HPP

#include <array>
#include <span>
#include <vector>

#include "torusflow/grid.hpp"

namespace torusflow {

/** Vector field on the torus, one scalar component per axis. */
class VectorField {
  public:
    VectorField() = default;
    explicit VectorField(const TorusGrid& g) : grid_(g), c_(g.dim, ScalarField(g)) {}

    const TorusGrid& grid() const { return grid_; }
    int dim() const { return grid_.dim; }
    ScalarField& operator[](int a) { return c_[static_cast<std::size_t>(a)]; }
    const ScalarField& operator[](int a) const { return c_[static_cast<std::size_t>(a)]; }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);

  private:
    TorusGrid grid_;
    std::vector<ScalarField> c_;
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

/** Binomial coefficient for component counting (small arguments only). */
int binom(int n, int k);

/** Increasing multi-index tuples of length k drawn from {0,...,dim-1}, in
 * lexicographic order. Only the first k entries of each array are valid.
 * This fixed order defines the component layout of every KForm. */
const std::vector<std::array<int, 4>>& index_tuples(int dim, int k);

/** Position of an increasing tuple in index_tuples(dim, k). */
int tuple_position(int dim, int k, std::span<const int> idx);

/** Differential k-form with one scalar component per increasing multi-index
 * (components in the index_tuples order). The metric is the flat one the
 * torus inherits from the unit cube, so index placement is trivial. */
class KForm {
  public:
    KForm() = default;
    KForm(const TorusGrid& g, int degree);

    const TorusGrid& grid() const { return grid_; }
    int degree() const { return degree_; }
    int component_count() const { return static_cast<int>(c_.size()); }
    ScalarField& comp(int i) { return c_[static_cast<std::size_t>(i)]; }
    const ScalarField& comp(int i) const { return c_[static_cast<std::size_t>(i)]; }

    KForm& operator+=(const KForm& o);
    KForm& operator-=(const KForm& o);
    KForm& operator*=(double s);

  private:
    TorusGrid grid_;
    int degree_ = 0;
    std::vector<ScalarField> c_;
};

KForm operator+(KForm a, const KForm& b);
KForm operator-(KForm a, const KForm& b);
KForm operator*(double s, KForm a);

/** Exterior derivative, spectral component derivatives. */
KForm exterior_derivative(const KForm& a);

/** Hodge star for the flat metric and the coordinate orientation
 * dx0 ^ ... ^ dx(dim-1). */
KForm hodge_star(const KForm& a);

/** Codifferential, the L2 adjoint of d. In even dimension this is -*d* in
 * every degree; the adjoint property is pinned by tests. */
KForm codifferential(const KForm& a);

/** Pointwise wedge product (no dealiasing; callers filter when the result
 * feeds back into a nonlinear pipeline). */
KForm wedge(const KForm& a, const KForm& b);

/** Interior product (contraction of the leading slot with X). */
KForm interior_product(const VectorField& x, const KForm& a);

/** Metric isomorphisms between 1-forms and vectors (identity components
 * in the flat metric). */
VectorField sharp(const KForm& one_form);
KForm flat(const VectorField& x);

/** L2 inner product: sum over increasing components of the integral of the
 * pointwise product. */
double l2_inner(const KForm& a, const KForm& b);

/** Standard constant structures.
 *
 * dim 2: area form dx0 ^ dx1.
 * dim 4: symplectic form dx0^dx2 + dx1^dx3, anti-self-dual for the
 * coordinate orientation, with a full anti-self-dual triple
 *   w1 = dx0^dx1 - dx2^dx3,  w2 = dx0^dx3 - dx1^dx2,  w3 = dx0^dx2 + dx1^dx3
 * satisfying wi ^ wj = -2 delta_ij vol. */
KForm standard_area(const TorusGrid& g);
KForm standard_symplectic(const TorusGrid& g);
std::array<KForm, 3> anti_self_dual_triple(const TorusGrid& g);

/** Structure form of the grid's dimension: area form for dim 2, standard
 * symplectic form for dim 4. */
KForm structure_form(const TorusGrid& g);

/** Component matrix W of the contraction against the standard structure:
 * (i_Y tau)_a = (W Y)_a, i.e. W is the transpose of the component matrix of
 * tau. Satisfies W*W = -I, and the structure sharp below is -W. */
void structure_contraction_matrix(int dim, double w[4][4]);

/** Inverse of Y -> i_Y tau for the standard structure tau of the grid's
 * dimension: returns Y with i_Y tau = alpha. */
VectorField structure_sharp(const KForm& one_form);

/** Hamiltonian vector field of h: the unique X with i_X tau = -dh for the
 * standard structure tau. Divergence-free with the flat volume. */
VectorField hamiltonian_field(const ScalarField& h);

/** Self-dual / anti-self-dual parts of a 2-form in dim 4. */
KForm self_dual_part(const KForm& two_form);
KForm anti_self_dual_part(const KForm& two_form);

}  // namespace torusflow

#endif
