#ifndef TORUSFLOW_SMALL_LINALG_HPP
#define TORUSFLOW_SMALL_LINALG_HPP

#include <cmath>

namespace torusflow::detail {

/** Determinant of the leading dim x dim block, partial-pivot elimination. */
inline double det_small(int dim, const double m[4][4]) {
    double a[4][4];
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++) a[i][j] = m[i][j];
    double det = 1.0;
    for (int c = 0; c < dim; c++) {
        int p = c;
        for (int r = c + 1; r < dim; r++)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (p != c) {
            for (int j = 0; j < dim; j++) std::swap(a[c][j], a[p][j]);
            det = -det;
        }
        if (a[c][c] == 0.0) return 0.0;
        det *= a[c][c];
        for (int r = c + 1; r < dim; r++) {
            double f = a[r][c] / a[c][c];
            for (int j = c; j < dim; j++) a[r][j] -= f * a[c][j];
        }
    }
    return det;
}

/** Solve m x = b in place (x returned in b), partial pivoting.
 * Returns false if the matrix is numerically singular. */
inline bool solve_small(int dim, const double m[4][4], double b[4]) {
    double a[4][4];
    for (int i = 0; i < dim; i++)
        for (int j = 0; j < dim; j++) a[i][j] = m[i][j];
    for (int c = 0; c < dim; c++) {
        int p = c;
        for (int r = c + 1; r < dim; r++)
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        if (std::abs(a[p][c]) < 1e-300) return false;
        if (p != c) {
            for (int j = 0; j < dim; j++) std::swap(a[c][j], a[p][j]);
            std::swap(b[c], b[p]);
        }
        for (int r = c + 1; r < dim; r++) {
            double f = a[r][c] / a[c][c];
            b[r] -= f * b[c];
            for (int j = c; j < dim; j++) a[r][j] -= f * a[c][j];
        }
    }
    for (int c = dim - 1; c >= 0; c--) {
        for (int j = c + 1; j < dim; j++) b[c] -= a[c][j] * b[j];
        b[c] /= a[c][c];
    }
    return true;
}

/** Inverse of the leading dim x dim block. Returns false if singular. */
inline bool invert_small(int dim, const double m[4][4], double out[4][4]) {
    for (int c = 0; c < dim; c++) {
        double e[4] = {0.0, 0.0, 0.0, 0.0};
        e[c] = 1.0;
        if (!solve_small(dim, m, e)) return false;
        for (int r = 0; r < dim; r++) out[r][c] = e[r];
    }
    return true;
}

}  // namespace torusflow::detail

#endif
