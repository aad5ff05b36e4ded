#pragma once

#include "wapss/model.hpp"

namespace wapss {

// Largest singular value (matrix 2-norm).  All scaled tolerances in the
// library use this norm.
double spectral_norm(const Matrix& m);

// Largest real part over the spectrum.
double spectral_abscissa(const Matrix& m);

// Moore-Penrose pseudoinverse with singular values below
// rel_tol * sigma_max treated as zero.
Matrix pseudo_inverse(const Matrix& m, double rel_tol = 1e-12);

// Numerical rank with the same relative threshold convention.
Eigen::Index numerical_rank(const Matrix& m, double rel_tol = 1e-12);

// Smallest singular value of the stacked PBH matrix [A - lambda*I; C]; zero
// (up to scale) means the mode at lambda is unobservable through C.
double pbh_min_singular_value(const Matrix& a, const Matrix& c,
                              Complex lambda);

}  // namespace wapss
