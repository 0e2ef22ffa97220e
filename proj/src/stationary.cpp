#include "fluxnet/stationary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "fluxnet/error.hpp"

namespace fluxnet {

namespace {

void require_stable(const Matrix& a) {
  const double abscissa = spectral_abscissa(a);
  if (!(abscissa < -1e-12)) {
    std::ostringstream msg;
    msg << "rate matrix is not stable (max Re(lambda) = " << abscissa << ")";
    throw Error(Errc::UnstableMatrix, msg.str());
  }
}

void check_residual(const Matrix& a, const Matrix& c, const Matrix& q) {
  const double scale = q.cwiseAbs().rowwise().sum().maxCoeff();
  if (scale == 0.0) {
    return;
  }
  const double res = lyapunov_residual(a, c, q);
  if (!(res < 1e-9 * scale)) {
    std::ostringstream msg;
    msg << "stationary covariance residual " << res << " exceeds 1e-9 * "
        << scale;
    throw Error(Errc::SolveFailure, msg.str());
  }
}

Vector stable_mean(const Matrix& a, const Vector& input) {
  Eigen::PartialPivLU<Matrix> lu(a);
  Vector mean = lu.solve(-input);
  mean += lu.solve(-input - a * mean);
  return mean;
}

}  // namespace

DiffusionSpec white_diffusion(const Network& net) {
  const auto m = static_cast<Eigen::Index>(net.num_species());
  std::vector<std::pair<std::size_t, double>> cols;
  for (const auto& ch : net.noise()) {
    if (const auto* w = std::get_if<WhiteNoise>(&ch.kind)) {
      cols.emplace_back(ch.species, w->sigma);
    }
  }
  DiffusionSpec d;
  d.sigma = Matrix::Zero(m, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    d.sigma(static_cast<Eigen::Index>(cols[c].first),
            static_cast<Eigen::Index>(c)) = cols[c].second;
  }
  return d;
}

StationaryStats stationary_covariance(const RateMatrix& rm,
                                      const DiffusionSpec& diff,
                                      const Vector& input) {
  const Matrix& a = rm.a;
  if (diff.sigma.rows() != a.rows() || input.size() != a.rows()) {
    throw Error(Errc::InvalidArgument,
                "stationary_covariance: dimension mismatch");
  }
  if (a.rows() > kMaxLyapunovDim) {
    throw Error(Errc::TooLarge, "stationary_covariance: more than " +
                                    std::to_string(kMaxLyapunovDim) +
                                    " species");
  }
  require_stable(a);
  const Matrix q = diff.sigma * diff.sigma.transpose();
  StationaryStats out;
  out.cov = solve_lyapunov(a, q);
  check_residual(a, out.cov, q);
  out.joint_cov = out.cov;
  out.mean = stable_mean(a, input);
  return out;
}

AugmentedSystem augmented_system(const Network& net) {
  const std::size_t m = net.num_species();
  std::vector<std::size_t> ou;
  std::vector<std::size_t> white;
  for (std::size_t c = 0; c < net.noise().size(); ++c) {
    (std::holds_alternative<OuNoise>(net.noise()[c].kind) ? ou : white)
        .push_back(c);
  }
  const auto n = static_cast<Eigen::Index>(m + ou.size());
  const auto p = static_cast<Eigen::Index>(net.noise().size());
  AugmentedSystem sys;
  sys.num_species = m;
  sys.ou_channels = ou;
  sys.drift = Matrix::Zero(n, n);
  sys.offset = Vector::Zero(n);
  sys.diffusion = Matrix::Zero(n, p);
  const auto em = static_cast<Eigen::Index>(m);
  sys.drift.topLeftCorner(em, em) = rate_matrix(net).a;
  sys.offset.head(em) = net.input_vector();

  Eigen::Index col = 0;
  for (const std::size_t c : white) {
    const auto& ch = net.noise()[c];
    sys.diffusion(static_cast<Eigen::Index>(ch.species), col++) =
        std::get<WhiteNoise>(ch.kind).sigma;
  }
  for (std::size_t k = 0; k < ou.size(); ++k) {
    const auto& ch = net.noise()[ou[k]];
    const auto& o = std::get<OuNoise>(ch.kind);
    const Eigen::Index state = em + static_cast<Eigen::Index>(k);
    sys.drift(static_cast<Eigen::Index>(ch.species), state) = 1.0;
    sys.drift(state, state) = -1.0 / o.tau;
    sys.diffusion(state, col++) = o.stationary_sd * std::sqrt(2.0 / o.tau);
  }
  return sys;
}

StationaryStats stationary_stats(const Network& net) {
  const AugmentedSystem sys = augmented_system(net);
  const auto m = static_cast<Eigen::Index>(sys.num_species);
  if (sys.drift.rows() > kMaxLyapunovDim) {
    throw Error(Errc::TooLarge, "stationary_stats: more than " +
                                    std::to_string(kMaxLyapunovDim) +
                                    " state variables");
  }
  require_stable(sys.drift.topLeftCorner(m, m));
  const Matrix q = sys.diffusion * sys.diffusion.transpose();

  StationaryStats out;
  out.joint_cov = solve_lyapunov(sys.drift, q);
  check_residual(sys.drift, out.joint_cov, q);
  out.cov = out.joint_cov.topLeftCorner(m, m);
  out.mean = stable_mean(sys.drift.topLeftCorner(m, m), net.input_vector());
  for (const auto& r : net.reactions()) {
    const auto i = static_cast<Eigen::Index>(r.source.index());
    out.flux_var.push_back(r.rate * r.rate * out.cov(i, i));
  }
  for (const auto& ch : net.noise()) {
    if (const auto* o = std::get_if<OuNoise>(&ch.kind)) {
      out.input_var.emplace_back(o->variance());
    } else {
      out.input_var.emplace_back(std::nullopt);
    }
  }
  return out;
}

double min_relative_gap(const std::vector<double>& ks) {
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ks.size(); ++i) {
    for (std::size_t j = i + 1; j < ks.size(); ++j) {
      gap = std::min(gap, std::abs(ks[i] - ks[j]) / std::max(ks[i], ks[j]));
    }
  }
  return gap;
}

namespace {

template <unsigned Digits>
using Float = boost::multiprecision::number<
    boost::multiprecision::cpp_bin_float<Digits>>;

struct ChainEval {
  std::vector<double> var_x;
  Matrix p;
  bool accurate = true;
};

// Evaluates the explicit eigenvector sum at `Digits` decimal digits. The sum
// cancels heavily when rates are close, so the result is flagged inaccurate
// when the magnitude of the terms times the working precision is not far
// below double resolution of the result.
template <unsigned Digits>
ChainEval evaluate_chain(const std::vector<double>& ks, double sigma) {
  using T = Float<Digits>;
  const std::size_t m = ks.size();
  std::vector<T> k(ks.begin(), ks.end());
  std::vector<std::vector<T>> p(m, std::vector<T>(m, T(0)));
  ChainEval out;
  out.p = Matrix::Zero(static_cast<Eigen::Index>(m),
                       static_cast<Eigen::Index>(m));
  T upstream = 1;  // prod_{n < i} k_n
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      T denom = 1;
      for (std::size_t n = 0; n <= i; ++n) {
        if (n != j) denom *= k[n] - k[j];
      }
      p[i][j] = upstream / denom;
      out.p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          p[i][j].template convert_to<double>();
    }
    upstream *= k[i];
  }
  const T s2 = T(sigma) * T(sigma);
  const T eps = pow(T(10), -static_cast<int>(Digits) + 5);
  for (std::size_t i = 0; i < m; ++i) {
    T sum = 0;
    T magnitude = 0;
    for (std::size_t j = 0; j <= i; ++j) {
      for (std::size_t r = 0; r <= i; ++r) {
        const T term = p[i][j] * p[i][r] / (k[j] + k[r]);
        sum += term;
        magnitude += abs(term);
      }
    }
    if (magnitude * eps > T(1e-18) * abs(sum)) {
      out.accurate = false;
    }
    out.var_x.push_back((s2 * sum).template convert_to<double>());
  }
  return out;
}

}  // namespace

ChainVarianceTable chain_variances(const std::vector<double>& ks,
                                   double sigma) {
  if (ks.empty()) {
    throw Error(Errc::InvalidArgument, "chain_variances: empty chain");
  }
  for (const double k : ks) {
    if (!(k > 0.0) || !std::isfinite(k)) {
      throw Error(Errc::InvalidArgument,
                  "chain_variances: rate constants must be > 0");
    }
  }
  if (!(sigma >= 0.0)) {
    throw Error(Errc::InvalidArgument, "chain_variances: sigma must be >= 0");
  }
  const double gap = min_relative_gap(ks);
  if (gap < kDistinctRateGap) {
    std::ostringstream msg;
    msg << "chain_variances: rate constants nearly coincide (relative gap "
        << gap << " < " << kDistinctRateGap
        << "); use the Lyapunov route instead";
    throw Error(Errc::NearDegenerateRates, msg.str());
  }

  ChainEval eval = evaluate_chain<50>(ks, sigma);
  if (!eval.accurate) eval = evaluate_chain<250>(ks, sigma);
  if (!eval.accurate) eval = evaluate_chain<1000>(ks, sigma);

  ChainVarianceTable out;
  out.ks = ks;
  out.p = std::move(eval.p);
  out.var_x = std::move(eval.var_x);
  for (std::size_t i = 0; i < ks.size(); ++i) {
    out.var_flux.push_back(ks[i] * ks[i] * out.var_x[i]);
  }
  return out;
}

std::vector<double> chain_flux_variances(const std::vector<double>& ks,
                                         double sigma) {
  if (!ks.empty() && min_relative_gap(ks) >= kDistinctRateGap) {
    return chain_variances(ks, sigma).var_flux;
  }
  if (!(sigma > 0.0)) {
    return std::vector<double>(ks.size(), 0.0);
  }
  const Network chain = make_chain(ks, 1.0, WhiteNoise{sigma});
  return stationary_stats(chain).flux_var;
}

EqualRateVariance equal_rate_chain_variance(int i, double k, double sigma) {
  if (i < 1 || !(k > 0.0)) {
    throw Error(Errc::InvalidArgument,
                "equal_rate_chain_variance: need i >= 1 and k > 0");
  }
  // 2 (2i-2)! / (4^i ((i-1)!)^2) in log space.
  const double di = static_cast<double>(i);
  const double log_coeff = std::log(2.0) + std::lgamma(2.0 * di - 1.0) -
                           di * std::log(4.0) - 2.0 * std::lgamma(di);
  EqualRateVariance out;
  out.var_x = sigma * sigma * std::exp(log_coeff) / k;
  out.var_flux = k * k * out.var_x;
  out.flux_asymptote =
      sigma * sigma * k / (2.0 * std::sqrt(std::numbers::pi * di));
  return out;
}

double general_variance_bound(const Network& net, std::size_t species_index,
                              double input_variance) {
  if (net.noise().size() > 1) {
    throw Error(Errc::MultipleNoisyInputs,
                "the variance bound is implemented for a single noisy input");
  }
  if (net.inputs().size() != 1) {
    throw Error(Errc::InvalidArgument,
                "the variance bound needs exactly one input species");
  }
  const double input = net.inputs().begin()->second;
  if (!(input > 0.0)) {
    throw Error(Errc::InvalidArgument, "the variance bound needs I > 0");
  }
  if (species_index >= net.num_species()) {
    throw Error(Errc::InvalidArgument, "species index out of range");
  }
  if (!(input_variance >= 0.0)) {
    throw Error(Errc::InvalidArgument, "input variance must be >= 0");
  }
  const Vector mean = equilibrium(net);
  const double ratio = mean(static_cast<Eigen::Index>(species_index)) / input;
  return ratio * ratio * input_variance;
}

}  // namespace fluxnet
