#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace fluxnet {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Largest system the dense Kronecker Lyapunov solver accepts.
inline constexpr int kMaxLyapunovDim = 64;

/// Matrix exponential by scaling and squaring with a fixed degree-13 Pade
/// approximant. Targets 1e-12 relative accuracy for ||A|| t <= 50.
Matrix expm(const Matrix& a);

/// Solves A C + C A^T + Q = 0 for symmetric Q through the Kronecker system
/// (I (x) A + A (x) I) vec(C) = -vec(Q), with iterative refinement of the
/// residual in extended precision. Throws Errc::TooLarge above
/// kMaxLyapunovDim and Errc::SolveFailure when the LU factorization is
/// numerically singular (the reciprocal condition estimate is reported).
Matrix solve_lyapunov(const Matrix& a, const Matrix& q);

/// Infinity norm of A C + C A^T + Q.
double lyapunov_residual(const Matrix& a, const Matrix& c, const Matrix& q);

std::vector<std::complex<double>> eigenvalues(const Matrix& a);

/// max Re(lambda) over the spectrum.
double spectral_abscissa(const Matrix& a);

/// min |Re(lambda)| over the spectrum.
double slowest_decay_rate(const Matrix& a);

/// max |Re(lambda)| over the spectrum.
double fastest_decay_rate(const Matrix& a);

/// Exact rank of an integer matrix (rows of equal length) by fraction-free
/// row reduction. Throws Errc::InvalidArgument on intermediate overflow.
int integer_rank(std::vector<std::vector<std::int64_t>> rows);

/// Ordinary least-squares line y = intercept + slope x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  /// Two-sided 95% confidence interval for the slope (Student t).
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  int n = 0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

/// Two-sided 97.5% Student t quantile for the given degrees of freedom.
double student_t975(int dof);

}  // namespace fluxnet
