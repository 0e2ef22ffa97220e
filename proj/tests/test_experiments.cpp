#include <cmath>

#include <gtest/gtest.h>

#include "fluxnet/error.hpp"
#include "fluxnet/experiments.hpp"
#include "fluxnet/sde.hpp"
#include "fluxnet/stationary.hpp"

using namespace fluxnet;

namespace {

const std::string kData = FLUXNET_DATA_DIR;

std::vector<double> log_grid(double lo, double hi, int per_decade) {
  std::vector<double> g;
  const int n = static_cast<int>(std::round(std::log10(hi / lo) * per_decade));
  for (int i = 0; i <= n; ++i) g.push_back(lo * std::pow(10.0, static_cast<double>(i) / per_decade));
  return g;
}

SideSystem single_species_side() { return SideSystem{1, {}, 0, 0}; }

SideSystem two_cycle_side(double a, double b) {
  SideSystem s;
  s.size = 2;
  s.edges = {{0, 1, a}, {1, 0, b}};
  s.entry = 0;
  s.exit = 1;
  return s;
}

Errc code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::InvalidArgument;
}

}  // namespace

TEST(Generators, LogUniformStaysInRange) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = log_uniform(rng);
    ASSERT_GE(v, 1e-2);
    ASSERT_LE(v, 1e2);
  }
}

TEST(Generators, RandomSideSystemsAreValid) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    Rng rng(s);
    const SideSystem side = random_side_system(rng, 4);
    ASSERT_GE(side.size, 1u);
    ASSERT_LE(side.size, 4u);
    EXPECT_NO_THROW(side_reaction_network(1.0, 1.0, 1.0, side, 1.0));
  }
}

TEST(ChainMonotonicity, FixedChains) {
  EXPECT_TRUE(check_chain_monotonicity({1.0, 2.0}).passed());
  EXPECT_TRUE(check_chain_monotonicity({1.0, 1.0, 1.0, 1.0}).passed());
  const ExperimentReport r = check_chain_monotonicity({5.0, 0.01, 80.0, 0.3});
  EXPECT_TRUE(r.passed());
  const auto fv = r.instances[0].observed["flux_variance"].get<std::vector<double>>();
  EXPECT_NEAR(fv[0], 2.5, 1e-12);
}

TEST(ChainMonotonicity, RandomTrialsAllPass) {
  TrialOptions opts;
  opts.trials = 50;
  const ExperimentReport r = chain_monotonicity_trials(opts, 10);
  EXPECT_EQ(r.instances.size(), 50u);
  EXPECT_EQ(r.violations(), 0u);
  const Json j = r.to_json();
  EXPECT_EQ(j["summary"]["instances"], 50);
  EXPECT_TRUE(j["summary"]["pass"].get<bool>());
  EXPECT_TRUE(j["instances"][0]["seed"].is_number_unsigned());
}

TEST(ChainMonotonicity, InstanceSeedReplaysOneInstance) {
  TrialOptions opts;
  opts.trials = 5;
  const ExperimentReport all = chain_monotonicity_trials(opts, 6);
  TrialOptions one = opts;
  one.instance_seed = *all.instances[3].seed;
  const ExperimentReport replay = chain_monotonicity_trials(one, 6);
  ASSERT_EQ(replay.instances.size(), 1u);
  EXPECT_EQ(replay.instances[0].params, all.instances[3].params);
}

TEST(ChainMonotonicity, ThreadCountDoesNotChangeResults) {
  TrialOptions opts;
  opts.trials = 20;
  const Json a = chain_monotonicity_trials(opts, 8).to_json();
  opts.threads = 3;
  EXPECT_EQ(chain_monotonicity_trials(opts, 8).to_json(), a);
}

TEST(SmallK, UnitChainLimit) {
  const ExperimentReport r = small_k_sweep({1.0, 1.0, 1.0, 1.0}, 2, log_grid(1e-4, 1e-1, 4));
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_TRUE(r.claims.at("slope_one"));
  for (const double v : r.summary["ratio_at_smallest_k"].get<std::vector<double>>()) {
    EXPECT_NEAR(v, 1.0, 0.05);
  }
}

TEST(ChainReduction, LargeRateRemovesSpecies) {
  const ExperimentReport r = chain_reduction_check({1.0, 2.0, 3.0}, 2, log_grid(1e2, 1e5, 4));
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  // With X2 removed the chain is (1, 3).
  const auto reduced = r.summary["reduced_flux_variance"].get<std::vector<double>>();
  const auto expected = chain_flux_variances({1.0, 3.0}, 1.0);
  EXPECT_NEAR(reduced.back(), expected.back(), 1e-12);
}

TEST(SideReaction, DetachedSideIsPlainDecay) {
  const ExperimentReport r = side_reaction_experiment(1.0, 0.0, 0.0, single_species_side());
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.instances[0].observed["var_without"].get<double>(), 0.5, 1e-14);
}

TEST(SideReaction, AttachedSideLowersExitVariance) {
  const ExperimentReport r = side_reaction_experiment(1.0, 1.0, 1.0, single_species_side());
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.instances[0].observed["var_with"].get<double>(), 0.5);
  EXPECT_TRUE(side_reaction_experiment(0.3, 7.0, 0.05, two_cycle_side(2.0, 0.4)).passed());
}

TEST(SideReaction, RandomTrialsAllPass) {
  TrialOptions opts;
  opts.trials = 50;
  EXPECT_EQ(side_reaction_trials(opts).violations(), 0u);
}

TEST(SideReaction, InvalidTopologyRejected) {
  SideSystem broken;
  broken.size = 2;
  broken.edges = {{0, 1, 1.0}};
  broken.entry = 1;
  broken.exit = 0;
  EXPECT_EQ(code_of([&] { side_reaction_network(1.0, 1.0, 1.0, broken, 1.0); }),
            Errc::InvalidSideTopology);
}

TEST(Feedback, DetachedLoopEqualsChain) {
  const ExperimentReport r = feedback_experiment({1.0, 2.0}, single_species_side(), 0.0, 1.0);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.instances[0].observed["var_loop"], r.instances[0].observed["var_chain"]);
}

TEST(Feedback, SmallLoopLowersExitVariance) {
  const ExperimentReport r = feedback_experiment({1.0, 2.0}, single_species_side(), 0.01, 1.0);
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.instances[0].observed["var_loop"].get<double>(),
            r.instances[0].observed["var_chain"].get<double>());
  EXPECT_EQ(code_of([] { feedback_network({}, single_species_side(), 1.0, 1.0, 1.0); }),
            Errc::InvalidLoopTopology);
}

TEST(Feedback, RandomTrialsAllPass) {
  TrialOptions opts;
  opts.trials = 50;
  EXPECT_EQ(feedback_trials(opts).violations(), 0u);
}

TEST(LargeL, SideBranchVarianceFallsAsOneOverL) {
  SweepSpec spec{load_network_file(kData + "/chain-side.rxn"), "L", log_grid(1e2, 1e5, 4), {}};
  const ExperimentReport r = large_L_sweep(spec);
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_EQ(r.summary["species"], "X2");
  const double slope = r.summary["fit"]["slope"].get<double>();
  EXPECT_NEAR(slope, -1.0, 0.05);
}

TEST(LargeL, LeakWorksToo) {
  SweepSpec spec{load_network_file(kData + "/chain-leak.rxn"), "L", log_grid(1e2, 1e5, 4), {}};
  EXPECT_TRUE(large_L_sweep(spec).passed());
}

TEST(LargeL, ParameterMustSitOnOneReaction) {
  const NetworkFile f = parse_network(
      "param L = 1\nspecies X1 X2\ninput X1 rate=1 noise=white sigma=1\n"
      "reaction X1 -> X2 k=L\nreaction X2 -> 0 k=L\n");
  SweepSpec spec{f, "L", log_grid(1e2, 1e4, 2), {}};
  EXPECT_EQ(code_of([&] { large_L_sweep(spec); }), Errc::HypothesisViolated);
}

TEST(EigenvalueScaling, SlowestRateGrowsWithL) {
  SweepSpec spec{load_network_file(kData + "/chain-side.rxn"), "L", log_grid(1e2, 1e5, 4), {}};
  const ExperimentReport r = eigenvalue_scaling(spec);
  EXPECT_TRUE(r.passed()) << r.to_json().dump(2);
  EXPECT_TRUE(r.summary["within_factor_2_of_median"].get<bool>());
  EXPECT_GT(r.summary["floor"].get<double>(), 0.0);
}

TEST(EigenvalueScaling, OneSpeciesDecay) {
  // lambda = L, so L lambda = L^2 is bounded below but not of one scale.
  const NetworkFile f = parse_network("species X\ninput X rate=1\nreaction X -> 0 k=L\n", {{"L", 1.0}});
  SweepSpec spec{f, "L", log_grid(1e2, 1e4, 2), {}};
  const ExperimentReport r = eigenvalue_scaling(spec);
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.summary["floor"].get<double>(), 1e4, 1e-6);
  EXPECT_FALSE(r.summary["within_factor_2_of_median"].get<bool>());
}

TEST(LargeL, OneSpeciesSlopeIsExactlyMinusOne) {
  const NetworkFile f = parse_network(
      "species X\ninput X rate=1 noise=white sigma=2\nreaction X -> 0 k=L\n", {{"L", 1.0}});
  const ExperimentReport r = large_L_sweep(SweepSpec{f, "L", log_grid(1e2, 1e5, 2), {}});
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.summary["fit"]["slope"].get<double>(), -1.0, 1e-9);
}

TEST(Structure, PositivityTrials) {
  TrialOptions opts;
  opts.trials = 40;
  EXPECT_EQ(positivity_trials(opts).violations(), 0u);
}

TEST(Structure, DeficiencyTrials) {
  TrialOptions opts;
  opts.trials = 200;
  const ExperimentReport r = deficiency_trials(opts);
  EXPECT_EQ(r.violations(), 0u);
}

TEST(Experiments, NamesListed) {
  const auto& names = experiment_names();
  EXPECT_EQ(names.size(), 9u);
  EXPECT_NE(std::find(names.begin(), names.end(), "large-L"), names.end());
}
