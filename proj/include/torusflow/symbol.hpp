#pragma once

/** Principal symbols of the second-order operators that drive the modified
 * flows, plus a plane-wave probe that reads the symbol off any discrete
 * linear action on 1-forms. Used to verify ellipticity numerically. */

#include <array>
#include <functional>

#include "torusflow/forms.hpp"

namespace torusflow {

struct SymbolMatrix {
    int dim = 2;
    double coeff = 1.0;
    std::array<double, 4> xi{};                  // first dim entries used
    std::array<std::array<double, 4>, 4> m{};    // symmetric dim x dim block

    double at(int i, int j) const { return m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
};

/** Symbol of coeff * d*d + dd* on 1-forms of the 2-torus, assembled from the
 * componentwise action of the two operators:
 *   d*d  -> |xi|^2 I - xi xi^T,   dd* -> xi xi^T.
 * Requires coeff > 0 (it stands for a squared, positive density). */
SymbolMatrix symbol_t2(double coeff, const std::array<double, 2>& xi);

/** Symbol of coeff * d*(d .)^- + dd* on 1-forms of the 4-torus. The
 * anti-self-dual projection halves the rotational part:
 *   d*(d .)^- -> (|xi|^2 I - xi xi^T)/2,   dd* -> xi xi^T. */
SymbolMatrix symbol_t4(double coeff, const std::array<double, 4>& xi);

/** Determinant via LU with partial pivoting (independent of the closed
 * forms coeff*|xi|^4 and (coeff/2)^3*|xi|^8 that the tests check against). */
double symbol_det(const SymbolMatrix& s);

/** Eigenvalues by cyclic Jacobi rotations, ascending order. */
std::array<double, 4> symbol_eigenvalues(const SymbolMatrix& s);
double symbol_min_eigenvalue(const SymbolMatrix& s);

/** Matrix-covector product (symbol applied to a constant 1-form). */
std::array<double, 4> symbol_apply(const SymbolMatrix& s, const std::array<double, 4>& a);

/** Reads the symbol of a discrete linear action on 1-forms by applying it to
 * the plane-wave forms cos(2 pi k.x) dx_a and projecting the result back on
 * that wave. The returned matrix is tagged with xi = 2 pi k. Every |k_a|
 * must stay below n/2 so the wave is representable on the grid. */
SymbolMatrix symbol_probe(const std::function<KForm(const KForm&)>& op,
                          const TorusGrid& grid, const std::array<int, 4>& k,
                          double coeff = 1.0);

/** The discrete operators the probe is pointed at in the verification
 * suites: coeff * d*d + dd* (dim 2) and coeff * d*(d .)^- + dd* (dim 4),
 * with frozen constant coefficient. */
KForm elliptic_operator_t2(double coeff, const KForm& alpha);
KForm elliptic_operator_t4(double coeff, const KForm& alpha);

/** The same operators without the dd* completion; their symbols annihilate
 * xi-parallel covectors, which is the degeneracy the gauge term repairs. */
KForm rough_operator_t2(double coeff, const KForm& alpha);
KForm rough_operator_t4(double coeff, const KForm& alpha);

}  // namespace torusflow
