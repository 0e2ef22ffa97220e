#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fluxnet/error.hpp"
#include "fluxnet/experiments.hpp"
#include "fluxnet/linalg.hpp"
#include "fluxnet/sde.hpp"
#include "fluxnet/stationary.hpp"

using namespace fluxnet;

namespace {

SimConfig quick(int ensemble = 8, std::uint64_t seed = 7) {
  SimConfig cfg;
  cfg.ensemble = ensemble;
  cfg.seed = seed;
  return cfg;
}

// Same topology with rates redrawn log-uniformly on [lo, hi] and white noise
// of unit intensity on every input.
Network retuned(const Network& net, Rng& rng, double lo, double hi) {
  std::vector<ReactionSpec> rs;
  for (const auto& r : net.reactions()) {
    rs.push_back({net.complex_name(r.source), net.complex_name(r.target), log_uniform(rng, lo, hi)});
  }
  std::vector<InputSpec> in;
  for (const auto& [j, rate] : net.inputs()) {
    in.push_back({net.species()[j], rate, NoiseKind{WhiteNoise{1.0}}});
  }
  return build_network(net.species(), rs, in);
}

}  // namespace

TEST(Seeds, TrajectorySeedsDiffer) {
  EXPECT_NE(trajectory_seed(1, 0), trajectory_seed(1, 1));
  EXPECT_NE(trajectory_seed(1, 0), trajectory_seed(2, 0));
  EXPECT_EQ(trajectory_seed(5, 3), trajectory_seed(5, 3));
}

TEST(Schemes, NamesRoundTrip) {
  EXPECT_EQ(parse_scheme("euler-maruyama"), Scheme::EulerMaruyama);
  EXPECT_EQ(parse_scheme("em"), Scheme::EulerMaruyama);
  EXPECT_EQ(parse_scheme(scheme_name(Scheme::Exact)), Scheme::Exact);
  EXPECT_THROW(parse_scheme("rk4"), Error);
}

TEST(ResolveConfig, AutomaticFields) {
  const SimConfig c = resolve_config(make_chain({1.0, 4.0}, 1.0, WhiteNoise{1.0}), SimConfig{});
  EXPECT_NEAR(c.dt, 0.0025, 1e-15);
  EXPECT_NEAR(c.burn_in, 10.0, 1e-12);
  EXPECT_NEAR(c.t_end, 1010.0, 1e-9);
  SimConfig bad;
  bad.dt = -1.0;
  EXPECT_THROW(resolve_config(make_chain({1.0}), bad), Error);
}

TEST(Simulate, SameSeedSameNumbersAcrossThreadCounts) {
  const Network net = make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0});
  SimConfig cfg = quick(6, 99);
  cfg.t_end = 200.0;
  const MomentEstimates a = simulate(net, cfg);
  cfg.threads = 3;
  const MomentEstimates b = simulate(net, cfg);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(a.flux_variance, b.flux_variance);
  cfg.seed = 100;
  EXPECT_NE(simulate(net, cfg).variance, a.variance);
}

TEST(Simulate, OneSpeciesVariance) {
  const MomentEstimates m = simulate(make_chain({1.0}, 1.0, WhiteNoise{1.0}), quick());
  EXPECT_NEAR(m.variance(0), 0.5, 4 * m.variance_stderr(0) + 0.005);
  EXPECT_NEAR(m.mean(0), 1.0, 4 * m.mean_stderr(0));
}

TEST(Simulate, NoNoiseMeansNoVariance) {
  SimConfig cfg = quick(2);
  cfg.t_end = 100.0;
  const MomentEstimates m = simulate(make_chain({1.0, 3.0}, 2.0), cfg);
  EXPECT_LT(m.variance.maxCoeff(), 1e-20);
  EXPECT_NEAR(m.mean(1), 2.0 / 3.0, 1e-10);
}

TEST(Simulate, ChainSecondSpecies) {
  const MomentEstimates m = simulate(make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0}), quick());
  EXPECT_NEAR(m.variance(1), 1.0 / 12.0, 4 * m.variance_stderr(1) + 1e-3);
  EXPECT_NEAR(m.flux_variance[1], 1.0 / 3.0, 4 * m.flux_variance_stderr[1] + 4e-3);
  EXPECT_NEAR(m.mean(1), 0.5, 4 * m.mean_stderr(1));
}

TEST(Simulate, OuChannelHasItsStationaryVariance) {
  const Network net = make_chain({1.0, 2.0}, 10.0, OuNoise{0.5, 3.0});
  const MomentEstimates m = simulate(net, quick());
  ASSERT_EQ(m.names.back(), "xi_X1");
  const auto xi = m.variance.size() - 1;
  EXPECT_NEAR(m.variance(xi), 9.0, 4 * m.variance_stderr(xi));
  EXPECT_NEAR(m.mean(xi), 0.0, 4 * m.mean_stderr(xi));
}

TEST(Simulate, EulerBiasMatchesDiscreteRecursion) {
  // x_{n+1} = (1 - k dt) x_n + sigma sqrt(dt) Z has variance
  // sigma^2 / (k (2 - k dt)); the exact scheme has none.
  const Network net = make_chain({1.0}, 1.0, WhiteNoise{1.0});
  for (const double dt : {0.2, 0.1}) {
    SimConfig cfg = quick(8, 3);
    cfg.dt = dt;
    cfg.t_end = 4000.0;
    const MomentEstimates em = simulate(net, cfg);
    EXPECT_NEAR(em.variance(0), 1.0 / (2.0 - dt), 4 * em.variance_stderr(0)) << dt;
    cfg.scheme = Scheme::Exact;
    const MomentEstimates ex = simulate(net, cfg);
    EXPECT_NEAR(ex.variance(0), 0.5, 4 * ex.variance_stderr(0)) << dt;
  }
}

TEST(Simulate, ObserverSeesRecordedSteps) {
  SimConfig cfg = quick(2);
  cfg.t_end = 5.0;
  cfg.burn_in = 1.0;
  cfg.dt = 0.01;
  cfg.record_stride = 10;
  int calls = 0;
  double last = -1.0;
  simulate(make_chain({1.0}, 1.0, WhiteNoise{1.0}), cfg, [&](double t, std::span<const double> z) {
    ++calls;
    EXPECT_GT(t, last);
    EXPECT_EQ(z.size(), 1u);
    last = t;
  });
  EXPECT_GE(calls, 50);
  EXPECT_NEAR(last, 5.0, 1e-9);
}

TEST(Simulate, RandomStableNetworksMatchLyapunov) {
  for (std::uint64_t s = 0; s < 6; ++s) {
    Rng rng(s + 500);
    const Network net = retuned(random_weakly_reversible_network(rng, 1 + static_cast<int>(s % 4)), rng, 0.3, 3.0);
    const StationaryStats exact = stationary_stats(net);
    for (const Scheme scheme : {Scheme::Exact, Scheme::EulerMaruyama}) {
      SimConfig cfg = quick(4, s);
      cfg.scheme = scheme;
      const MomentEstimates m = simulate(net, cfg);
      // The explicit scheme carries an O(dt) bias of about half a percent.
      const double bias = scheme == Scheme::Exact ? 0.0 : 0.01;
      for (Eigen::Index i = 0; i < exact.cov.rows(); ++i) {
        const double v = exact.cov(i, i);
        EXPECT_NEAR(m.variance(i), v, 4 * m.variance_stderr(i) + bias * v)
            << "seed " << s << " species " << i << " " << scheme_name(scheme);
      }
    }
  }
}

TEST(Convergence, IdenticalStartsStayTogether) {
  const Network net = make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0});
  const Vector x0 = Vector::Ones(2);
  const ConvergenceReport r = convergence_check(net, x0, x0, SimConfig{});
  EXPECT_TRUE(r.identical_start);
  EXPECT_EQ(r.max_relative_error, 0.0);
  EXPECT_TRUE(r.rate_ok);
}

TEST(Convergence, DifferenceFollowsDeterministicFlow) {
  const Network net = make_chain({1.0}, 1.0, WhiteNoise{1.0});
  Vector a(1), b(1);
  a << 5.0;
  b << 0.0;
  SimConfig cfg;
  cfg.dt = 1e-3;
  const ConvergenceReport r = convergence_check(net, a, b, cfg);
  EXPECT_LT(r.max_relative_error, 1e-2);
  EXPECT_NEAR(r.fitted_rate, 1.0, 0.01);
  EXPECT_TRUE(r.rate_ok);
  cfg.scheme = Scheme::Exact;
  EXPECT_LT(convergence_check(net, a, b, cfg).max_relative_error, 1e-9);
}

TEST(Convergence, ChainDecaysAtSlowestRate) {
  const Network net = make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0});
  Vector a(2), b(2);
  a << 3.0, 0.0;
  b << 0.0, 1.0;
  const ConvergenceReport r = convergence_check(net, a, b, SimConfig{});
  EXPECT_NEAR(r.lambda_min, 1.0, 1e-12);
  EXPECT_NEAR(r.fitted_rate, 1.0, 0.05);
  EXPECT_TRUE(r.rate_ok);
}

TEST(Observables, Parsing) {
  const Network net = make_chain({1.0, 2.0}, 1.0, OuNoise{1.0, 1.0});
  EXPECT_EQ(parse_observable(net, "X2").kind, Observable::Kind::Species);
  const Observable f = parse_observable(net, "X1 -> X2");
  EXPECT_EQ(f.kind, Observable::Kind::Flux);
  EXPECT_EQ(f.index, 0u);
  EXPECT_EQ(parse_observable(net, "xi_X1").kind, Observable::Kind::Input);
  EXPECT_THROW(parse_observable(net, "X7"), Error);
  EXPECT_THROW(parse_observable(net, "xi_X2"), Error);
}

TEST(VarianceRatio, InputAgainstItselfIsOne) {
  const Network net = make_chain({1.0}, 100.0, OuNoise{0.5, 30.0});
  const VarianceRatioReport r = variance_ratio(net, quick(), {parse_observable(net, "xi_X1")});
  EXPECT_NEAR(r.entries[0].r_exact, 1.0, 1e-12);
  EXPECT_NEAR(r.entries[0].r, 1.0, 4 * r.entries[0].r_stderr);
  EXPECT_EQ(r.input_variance, 900.0);
}

TEST(VarianceRatio, OneSpeciesMatchesAugmentedSolve) {
  const double k = 2.0, tau = 0.5;
  const Network net = make_chain({k}, 100.0, OuNoise{tau, 30.0});
  const VarianceRatioReport r = variance_ratio(net, quick(), {parse_observable(net, "X1")});
  EXPECT_NEAR(r.entries[0].r_exact, 1.0 / (k * (k + 1.0 / tau)), 1e-12);
  EXPECT_NEAR(r.entries[0].r, r.entries[0].r_exact, 4 * r.entries[0].r_stderr + 0.01 * r.entries[0].r_exact);
}

TEST(VarianceRatio, ExitFluxBelowFirstFlux) {
  const Network net = make_chain({1.0, 2.0, 0.5}, 100.0, OuNoise{0.5, 30.0});
  const VarianceRatioReport r = variance_ratio(
      net, quick(), {parse_observable(net, "X1->X2"), parse_observable(net, "X3->0")});
  EXPECT_LT(r.entries[1].r_exact, r.entries[0].r_exact);
  EXPECT_LT(r.entries[1].r, r.entries[0].r);
  EXPECT_LE(r.entries[0].r_exact, 1.0);
}

TEST(VarianceRatio, WhiteNoiseRejected) {
  const Network net = make_chain({1.0}, 1.0, WhiteNoise{1.0});
  try {
    variance_ratio(net, quick(), {parse_observable(net, "X1")});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::WhiteNoiseInput);
  }
}

TEST(Simulate, BlowUpIsReported) {
  // k dt = 5 makes the explicit update multiply by -4 each step.
  const Network net = build_network({"X1"}, {{"X1", "0", 1.0}}, {{"X1", 1.0, NoiseKind{WhiteNoise{1.0}}}});
  SimConfig cfg = quick(1);
  cfg.dt = 5.0;
  cfg.t_end = 1e5;
  cfg.burn_in = 0.0;
  try {
    simulate(net, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NonfiniteState);
  }
}
