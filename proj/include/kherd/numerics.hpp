#pragma once

#include <Eigen/Dense>

#include "kherd/errors.hpp"
#include "kherd/rng.hpp"

namespace kherd {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Throws Error if v has a NaN or infinite entry.
void check_finite(const Vec& v, const char* what = "vector");
void check_finite(const Mat& m, const char* what = "matrix");

// Symmetry to within a relative tolerance on the largest entry.
bool is_symmetric(const Mat& m, double rel_tol = 1e-12);

// Lower-triangular L with L L^T = m for symmetric positive definite m.
// A pivot below 1e-12 * max(diag) marks the matrix degenerate; one jitter of
// 1e-10 * I is added before NotPositiveDefinite is raised.
Mat cholesky(const Mat& m);

// PSD-tolerant factor used for sampling: pivots within tolerance of zero
// produce a zero column (point-mass directions), so cov = 0 yields L = 0.
// Clearly negative pivots still raise NotPositiveDefinite.
Mat cholesky_psd(const Mat& m);

// Log density of N(mean, cov) at x. cov must be positive definite.
double mvn_logpdf(const Vec& x, const Vec& mean, const Mat& cov);

// n draws from N(mean, cov), one per row. cov may be merely PSD.
Mat mvn_sample(Rng& rng, const Vec& mean, const Mat& cov, int n);

// Same, with the factor precomputed (chol_lower from cholesky_psd).
Mat mvn_sample_chol(Rng& rng, const Vec& mean, const Mat& chol_lower, int n);

}  // namespace kherd
