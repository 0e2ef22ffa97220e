#include "fluxnet/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/LU>

#include "fluxnet/error.hpp"

namespace fluxnet {

namespace {

// Degree-13 Pade coefficients (Higham, 2005).
constexpr double kPade13[] = {64764752532480000.0,
                              32382376266240000.0,
                              7771770303897600.0,
                              1187353796428800.0,
                              129060195264000.0,
                              10559470521600.0,
                              670442572800.0,
                              33522128640.0,
                              1323241920.0,
                              40840800.0,
                              960960.0,
                              16380.0,
                              182.0,
                              1.0};
constexpr double kTheta13 = 5.371920351148152;

using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

}  // namespace

Matrix expm(const Matrix& a) {
  const Eigen::Index n = a.rows();
  if (n != a.cols()) {
    throw Error(Errc::InvalidArgument, "expm: matrix must be square");
  }
  if (n == 0) {
    return a;
  }
  const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
  if (!std::isfinite(norm1)) {
    throw Error(Errc::InvalidArgument, "expm: non-finite matrix entry");
  }
  int squarings = 0;
  if (norm1 > kTheta13) {
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
  }
  const Matrix scaled = a / std::ldexp(1.0, squarings);
  const Matrix ident = Matrix::Identity(n, n);
  const Matrix a2 = scaled * scaled;
  const Matrix a4 = a2 * a2;
  const Matrix a6 = a4 * a2;
  const double* b = kPade13;

  Matrix u_inner = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 +
                   b[5] * a4 + b[3] * a2 + b[1] * ident;
  const Matrix u = scaled * u_inner;
  const Matrix v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 +
                   b[4] * a4 + b[2] * a2 + b[0] * ident;

  Matrix r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) {
    r = r * r;
  }
  return r;
}

Matrix solve_lyapunov(const Matrix& a, const Matrix& q) {
  const Eigen::Index m = a.rows();
  if (m != a.cols() || q.rows() != m || q.cols() != m) {
    throw Error(Errc::InvalidArgument, "solve_lyapunov: dimension mismatch");
  }
  if (m > kMaxLyapunovDim) {
    throw Error(Errc::TooLarge,
                "solve_lyapunov: dimension " + std::to_string(m) +
                    " exceeds the dense solver limit of " +
                    std::to_string(kMaxLyapunovDim));
  }
  const Eigen::Index n = m * m;
  // Column-major vec: index(i, j) = i + j m.
  // (A C)_{ij} = sum_k a_ik c_kj ; (C A^T)_{ij} = sum_k c_ik a_jk.
  Matrix kron = Matrix::Zero(n, n);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::Index row = i + j * m;
      for (Eigen::Index k = 0; k < m; ++k) {
        kron(row, k + j * m) += a(i, k);
        kron(row, i + k * m) += a(j, k);
      }
    }
  }
  Eigen::PartialPivLU<Matrix> lu(kron);
  const double rcond = lu.rcond();
  if (!(rcond > 1e-15)) {
    std::ostringstream msg;
    msg << "solve_lyapunov: Kronecker system is numerically singular "
           "(reciprocal condition estimate "
        << rcond << ")";
    throw Error(Errc::SolveFailure, msg.str());
  }

  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n);
  Vector x = lu.solve(rhs);

  // Refinement: residual of the m x m equation accumulated in long double.
  const LongMatrix a_l = a.cast<long double>();
  const LongMatrix q_l = q.cast<long double>();
  for (int iter = 0; iter < 4; ++iter) {
    const LongMatrix c_l = Eigen::Map<const Matrix>(x.data(), m, m)
                               .cast<long double>();
    const LongMatrix res_l =
        -(a_l * c_l + c_l * a_l.transpose() + q_l);
    const Matrix res = res_l.cast<double>();
    const Vector dx = lu.solve(Eigen::Map<const Vector>(res.data(), n));
    x += dx;
    if (dx.lpNorm<Eigen::Infinity>() <=
        4 * std::numeric_limits<double>::epsilon() *
            x.lpNorm<Eigen::Infinity>()) {
      break;
    }
  }

  Matrix c = Eigen::Map<const Matrix>(x.data(), m, m);
  return 0.5 * (c + c.transpose());
}

double lyapunov_residual(const Matrix& a, const Matrix& c, const Matrix& q) {
  const Matrix r = a * c + c * a.transpose() + q;
  return r.cwiseAbs().rowwise().sum().maxCoeff();
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
  if (a.rows() == 0) {
    return {};
  }
  Eigen::EigenSolver<Matrix> solver(a, false);
  if (solver.info() != Eigen::Success) {
    throw Error(Errc::SolveFailure, "eigenvalue iteration did not converge");
  }
  const auto& ev = solver.eigenvalues();
  return {ev.data(), ev.data() + ev.size()};
}

double spectral_abscissa(const Matrix& a) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& z : eigenvalues(a)) {
    best = std::max(best, z.real());
  }
  return best;
}

double slowest_decay_rate(const Matrix& a) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& z : eigenvalues(a)) {
    best = std::min(best, std::abs(z.real()));
  }
  return best;
}

double fastest_decay_rate(const Matrix& a) {
  double best = 0.0;
  for (const auto& z : eigenvalues(a)) {
    best = std::max(best, std::abs(z.real()));
  }
  return best;
}

int integer_rank(std::vector<std::vector<std::int64_t>> rows) {
  if (rows.empty()) {
    return 0;
  }
  const std::size_t cols = rows.front().size();
  auto reduce_row = [](std::vector<std::int64_t>& row) {
    std::int64_t g = 0;
    for (auto v : row) {
      g = std::gcd(g, v < 0 ? -v : v);
    }
    if (g > 1) {
      for (auto& v : row) {
        v /= g;
      }
    }
  };
  int rank = 0;
  std::size_t pivot_row = 0;
  for (std::size_t col = 0; col < cols && pivot_row < rows.size(); ++col) {
    std::size_t sel = pivot_row;
    while (sel < rows.size() && rows[sel][col] == 0) {
      ++sel;
    }
    if (sel == rows.size()) {
      continue;
    }
    std::swap(rows[sel], rows[pivot_row]);
    const auto& pivot = rows[pivot_row];
    for (std::size_t r = pivot_row + 1; r < rows.size(); ++r) {
      const std::int64_t factor = rows[r][col];
      if (factor == 0) {
        continue;
      }
      const std::int64_t scale = pivot[col];
      for (std::size_t c = col; c < cols; ++c) {
        std::int64_t lhs = 0;
        std::int64_t rhs = 0;
        std::int64_t out = 0;
        if (__builtin_mul_overflow(rows[r][c], scale, &lhs) ||
            __builtin_mul_overflow(pivot[c], factor, &rhs) ||
            __builtin_sub_overflow(lhs, rhs, &out)) {
          throw Error(Errc::InvalidArgument,
                      "integer_rank: intermediate overflow");
        }
        rows[r][c] = out;
      }
      reduce_row(rows[r]);
    }
    ++pivot_row;
    ++rank;
  }
  return rank;
}

double student_t975(int dof) {
  static constexpr double table[] = {12.706, 4.303, 3.182, 2.776, 2.571,
                                     2.447,  2.365, 2.306, 2.262, 2.228,
                                     2.201,  2.179, 2.160, 2.145, 2.131,
                                     2.120,  2.110, 2.101, 2.093, 2.086,
                                     2.080,  2.074, 2.069, 2.064, 2.060,
                                     2.056,  2.052, 2.048, 2.045, 2.042};
  if (dof < 1) {
    return std::numeric_limits<double>::infinity();
  }
  if (dof <= 30) {
    return table[dof - 1];
  }
  // Cornish-Fisher style correction around the normal quantile.
  const double z = 1.959963984540054;
  const double d = static_cast<double>(dof);
  return z + (z * z * z + z) / (4.0 * d) +
         (5 * std::pow(z, 5) + 16 * std::pow(z, 3) + 3 * z) / (96.0 * d * d);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(Errc::InvalidArgument, "fit_line: need at least two points");
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0.0) {
    throw Error(Errc::InvalidArgument, "fit_line: degenerate abscissae");
  }
  LineFit fit;
  fit.n = static_cast<int>(x.size());
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - fit.intercept - fit.slope * x[i];
      sse += r * r;
    }
    fit.slope_stderr = std::sqrt(sse / (n - 2.0) / sxx);
    const double t = student_t975(fit.n - 2);
    fit.slope_lo = fit.slope - t * fit.slope_stderr;
    fit.slope_hi = fit.slope + t * fit.slope_stderr;
  } else {
    // Two points determine the line exactly; no residual dispersion.
    fit.slope_lo = fit.slope_hi = fit.slope;
  }
  return fit;
}

}  // namespace fluxnet
