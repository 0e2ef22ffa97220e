// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any
// failure.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>

#include "fluxnet/error.hpp"
#include "fluxnet/experiments.hpp"
#include "fluxnet/netparse.hpp"
#include "fluxnet/sde.hpp"
#include "fluxnet/stationary.hpp"

using namespace fluxnet;

namespace {

const std::string kData = FLUXNET_DATA_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int n, const std::string& title, double time_limit_s,
               const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream line;
  line.precision(6);
  if (time_limit_s > 0.0 && secs > time_limit_s) {
    o.pass = false;
    line << "[over time limit " << time_limit_s << " s] ";
  }
  line << o.detail << " (" << secs << " s)";
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " -- "
            << line.str() << std::endl;
  if (!o.pass) ++failures;
}

bool within(double x, double target, double tol) { return std::abs(x - target) <= tol; }

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

// 2 (2i-2)! / (4^i ((i-1)!)^2) by the running product c_{i+1} = c_i (2i-1)/(2i).
long double equal_rate_coefficient(int i) {
  long double c = 0.5L;
  for (int j = 1; j < i; ++j) c *= static_cast<long double>(2 * j - 1) / (2 * j);
  return c;
}

}  // namespace

int main() {
  criterion(1, "two-species chain k=(1,2), sigma=1", 30.0, [] {
    const ChainVarianceTable t = chain_variances({1.0, 2.0}, 1.0);
    bool ok = within(t.var_flux[0], 0.5, 1e-12) && within(t.var_flux[1], 1.0 / 3.0, 1e-12) &&
              within(t.var_flux[1] / t.var_flux[0], 2.0 / 3.0, 1e-12);
    const Network net = make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0});
    const StationaryStats s = stationary_stats(net);
    ok = ok && within(s.flux_var[0], t.var_flux[0], 1e-10) &&
         within(s.flux_var[1], t.var_flux[1], 1e-10);
    SimConfig cfg;
    cfg.t_end = 2000.0;
    cfg.ensemble = 16;
    cfg.seed = kDefaultSeed;
    const MomentEstimates m = simulate(net, cfg);
    std::string mc;
    for (int r = 0; r < 2; ++r) {
      const double z = std::abs(m.flux_variance[r] - t.var_flux[r]) / m.flux_variance_stderr[r];
      ok = ok && z <= 4.0;
      mc += " MC Var(k" + std::to_string(r + 1) + "x" + std::to_string(r + 1) + ")=" +
            fmt(m.flux_variance[r]) + " (" + fmt(z) + " stderr)";
    }
    return Outcome{ok, "closed form " + fmt(t.var_flux[0]) + ", " + fmt(t.var_flux[1]) +
                           "; Lyapunov " + fmt(s.flux_var[0]) + ", " + fmt(s.flux_var[1]) +
                           ";" + mc + "; tol 1e-12 / 1e-10 / 4 stderr"};
  });

  criterion(2, "deficiency zero on 500 random networks, m <= 12", 10.0, [] {
    TrialOptions opts;
    opts.trials = 500;
    const ExperimentReport r = deficiency_trials(opts, 12);
    return Outcome{r.violations() == 0 && r.instances.size() == 500,
                   std::to_string(r.instances.size() - r.violations()) + "/500 with deficiency 0"};
  });

  criterion(3, "stability and positivity on 200 weakly reversible networks", 60.0, [] {
    TrialOptions opts;
    opts.trials = 200;
    const ExperimentReport r = positivity_trials(opts, 12);
    return Outcome{r.violations() == 0 && r.instances.size() == 200,
                   std::to_string(r.violations()) + " violations; tol min entry >= -1e-10"};
  });

  criterion(4, "flux variances decrease along 200 random chains, m = 10", 0.0, [] {
    TrialOptions opts;
    opts.trials = 200;
    const ExperimentReport r = chain_monotonicity_trials(opts, 10, 1.0);
    return Outcome{r.violations() == 0 && r.instances.size() == 200,
                   std::to_string(r.violations()) + " violations; cap sigma^2 k1/2 + 1e-12"};
  });

  criterion(5, "equal-rate chain against its asymptote", 0.0, [] {
    const EqualRateVariance v = equal_rate_chain_variance(25, 1.0, 1.0);
    const double oracle = static_cast<double>(equal_rate_coefficient(25));
    const double asym = 1.0 / (2.0 * std::sqrt(25.0 * std::numbers::pi));
    bool ok = std::abs(v.var_flux - oracle) <= 1e-12 * oracle && within(v.var_flux, 0.05728, 5e-6) &&
              within(v.flux_asymptote, asym, 1e-15) &&
              std::abs(v.var_flux - asym) / asym < 0.02;
    std::string errs;
    double prev = INFINITY;
    for (const int i : {10, 25, 50, 100}) {
      const EqualRateVariance w = equal_rate_chain_variance(i, 1.0, 1.0);
      const double e = std::abs(w.var_flux - w.flux_asymptote) / w.flux_asymptote;
      ok = ok && e < prev;
      prev = e;
      errs += " " + fmt(e);
    }
    return Outcome{ok, "Var(k x_25)=" + fmt(v.var_flux) + " product oracle " + fmt(oracle) +
                           " asymptote " + fmt(asym) + "; relative errors" + errs};
  });

  criterion(6, "side reactions lower the exit variance, 100 instances", 0.0, [] {
    TrialOptions opts;
    opts.trials = 100;
    const ExperimentReport r = side_reaction_trials(opts, 1.0);
    return Outcome{r.violations() == 0 && r.instances.size() == 100,
                   std::to_string(100 - r.violations()) + "/100 strictly below sigma^2 k1/2"};
  });

  criterion(7, "feedback loops lower the exit variance, 100 instances", 0.0, [] {
    TrialOptions opts;
    opts.trials = 100;
    const ExperimentReport r = feedback_trials(opts, 1.0);
    return Outcome{r.violations() == 0 && r.instances.size() == 100,
                   std::to_string(100 - r.violations()) + "/100 strictly below the plain chain"};
  });

  const std::vector<double> l_grid{1e2, 1e3, 1e4, 1e5};

  criterion(8, "large rate constant on the side-chain network", 0.0, [&] {
    const SweepSpec spec{load_network_file(kData + "/chain-side.rxn"), "L", l_grid, {}};
    const ExperimentReport r = large_L_sweep(spec);
    const Json fit = r.summary["fit"];
    const bool ok = r.claims.at("slope_in_[-1.15,-0.85]") && r.claims.at("downstream_ordered");
    return Outcome{ok, "slope " + fmt(fit["slope"].get<double>()) + " 95% CI [" +
                           fmt(fit["slope_lo"].get<double>()) + ", " +
                           fmt(fit["slope_hi"].get<double>()) + "], downstream ordered " +
                           (r.claims.at("downstream_ordered") ? "yes" : "no")};
  });

  criterion(9, "slowest decay rate scales like 1/L", 0.0, [&] {
    const SweepSpec spec{load_network_file(kData + "/chain-side.rxn"), "L", l_grid, {}};
    const ExperimentReport r = eigenvalue_scaling(spec);
    const bool within2 = r.summary["within_factor_2_of_median"].get<bool>();
    const bool ok = within2 && r.claims.at("stable_at_every_L");
    return Outcome{ok, "L*lambda median " + fmt(r.summary["median"].get<double>()) + " floor " +
                           fmt(r.summary["floor"].get<double>()) + ", within factor 2 " +
                           (within2 ? "yes" : "no")};
  });

  criterion(10, "small rate constant on a unit 4-chain", 0.0, [] {
    const ExperimentReport r = small_k_sweep({1.0, 1.0, 1.0, 1.0}, 2, {1e-4, 1e-3, 1e-2, 1e-1});
    const auto ratios = r.summary["ratio_at_smallest_k"].get<std::vector<double>>();
    bool ok = ratios.size() == 3;
    std::string rs;
    for (const double v : ratios) {
      ok = ok && v >= 0.95 && v <= 1.05;
      rs += " " + fmt(v);
    }
    const Json fit = r.summary["fit"];
    ok = ok && r.claims.at("slope_one");
    return Outcome{ok, "ratios at k2=1e-4" + rs + "; slope " + fmt(fit["slope"].get<double>()) +
                           " CI [" + fmt(fit["slope_lo"].get<double>()) + ", " +
                           fmt(fit["slope_hi"].get<double>()) + "]; tol [0.95, 1.05]"};
  });

  criterion(11, "coupled trajectories converge at the slowest rate", 0.0, [] {
    const Network net = make_chain({1.0, 2.0}, 1.0, WhiteNoise{1.0});
    Vector a(2), b(2);
    a << 3.0, 0.5;
    b << 0.2, 1.5;
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.scheme = Scheme::Exact;
    const ConvergenceReport r = convergence_check(net, a, b, cfg);
    const double rate_err = std::abs(r.fitted_rate - r.lambda_min) / r.lambda_min;
    const bool ok = r.max_relative_error < 1e-6 && rate_err < 0.1;
    return Outcome{ok, "max relative deviation " + fmt(r.max_relative_error) + " (tol 1e-6), fitted rate " +
                           fmt(r.fitted_rate) + " vs " + fmt(r.lambda_min) + " (tol 10%)"};
  });

  criterion(12, "variance ratio against the exact value on three OU networks", 0.0, [] {
    struct Case {
      Network net;
      std::vector<std::string> observables;
    };
    const std::vector<Case> cases{
        {load_network_file(kData + "/chain-ou.rxn").network, {"X1", "X2", "X3", "X3->0"}},
        {make_chain({2.0}, 50.0, OuNoise{0.25, 10.0}), {"X1", "xi_X1"}},
        {build_network({"X1", "X2", "S"},
                       {{"X1", "X2", 1.5}, {"X2", "S", 3.0}, {"S", "X2", 0.4}, {"X2", "0", 0.8}},
                       {{"X1", 20.0, NoiseKind{OuNoise{2.0, 5.0}}}}),
         {"X1", "X2", "X2->0"}},
    };
    bool ok = true;
    double worst = 0.0;
    std::string detail;
    for (std::size_t c = 0; c < cases.size(); ++c) {
      std::vector<Observable> obs;
      for (const auto& o : cases[c].observables) obs.push_back(parse_observable(cases[c].net, o));
      SimConfig cfg;
      cfg.ensemble = 16;
      cfg.seed = kDefaultSeed + c;
      const VarianceRatioReport r = variance_ratio(cases[c].net, cfg, obs);
      for (const auto& e : r.entries) {
        const double z = std::abs(e.r - e.r_exact) / e.r_stderr;
        worst = std::max(worst, z);
        ok = ok && z <= 4.0;
        detail += " " + e.label + ":" + fmt(e.r) + "/" + fmt(e.r_exact);
      }
    }
    return Outcome{ok, "MC/exact" + detail + "; worst " + fmt(worst) + " stderr (tol 4)"};
  });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
