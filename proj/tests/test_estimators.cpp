#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "pvangle/estimators.hpp"
#include "pvangle/experiments.hpp"

using namespace pvangle;

TEST(RunReplications, ConstantStatistic) {
  const auto rep = run_replications({10, 1, 1}, "const",
                                    [](RandomStream&, std::size_t) { return Outcome{3.0}; });
  EXPECT_EQ(rep.n_replications, 10u);
  EXPECT_EQ(rep.mean, 3.0);
  EXPECT_EQ(rep.std_error, 0.0);
  EXPECT_EQ(rep.ci95.lo, 3.0);
  EXPECT_EQ(rep.ci95.hi, 3.0);
}

TEST(RunReplications, FairCoin) {
  const auto rep = run_replications({10000, 42, 1}, "coin", [](RandomStream& s, std::size_t) {
    return Outcome{s.uniform() < 0.5 ? 1.0 : 0.0};
  });
  EXPECT_NEAR(rep.mean, 0.5, 3 * 0.005);
  EXPECT_NEAR(rep.std_error, 0.005, 1e-4);
  EXPECT_LE(rep.ci95.lo, rep.mean);
  EXPECT_GE(rep.ci95.hi, rep.mean);
}

TEST(RunReplications, OracleZScore) {
  const auto rep = run_replications(
      {100, 42, 1}, "shifted", [](RandomStream& s, std::size_t) { return Outcome{s.uniform()}; },
      oracles::make("half", 0.5));
  ASSERT_TRUE(rep.z_score.has_value());
  EXPECT_DOUBLE_EQ(*rep.z_score, (rep.mean - 0.5) / rep.std_error);
}

TEST(RunReplications, TooManyAbortsIsDegenerate) {
  auto stat = [](RandomStream&, std::size_t i) { return i % 4 == 0 ? Outcome{} : Outcome{1.0}; };
  EXPECT_THROW(run_replications({100, 1, 1}, "x", stat), DegenerateConfiguration);
  auto few = [](RandomStream&, std::size_t i) { return i % 10 == 0 ? Outcome{} : Outcome{1.0}; };
  const auto rep = run_replications({100, 1, 1}, "x", few);
  EXPECT_EQ(rep.aborted_replications, 10u);
  EXPECT_EQ(rep.n_replications, 90u);
}

TEST(RunReplications, NeedsTwoReplications) {
  EXPECT_THROW(run_replications({1, 1, 1}, "x", [](RandomStream&, std::size_t) { return Outcome{1.0}; }),
               Error);
}

TEST(RunReplications, ExceptionsPropagate) {
  auto bad = [](RandomStream&, std::size_t i) -> Outcome {
    if (i == 7) throw Error("boom");
    return Outcome{1.0};
  };
  EXPECT_THROW(run_replications({20, 1, 4}, "x", bad), Error);
}

TEST(RunReplications, IndependentOfWorkerCount) {
  auto stat = [](RandomStream& s, std::size_t) {
    auto sample = sample_poisson(1.0, Window<2>::centered(3), s);
    return Outcome{static_cast<double>(sample.size())};
  };
  const auto a = run_replications({64, 9, 1}, "n", stat);
  const auto b = run_replications({64, 9, 4}, "n", stat);
  EXPECT_EQ(a.mean, b.mean);
  EXPECT_EQ(a.std_error, b.std_error);
}

TEST(IntensityEstimate, ZeroCounts) {
  const std::vector<double> zeros(5, 0.0);
  EXPECT_EQ(intensity_estimate("z", zeros, 10.0).mean, 0.0);
  EXPECT_THROW(intensity_estimate("z", zeros, 0.0), Error);
}

TEST(IntensityEstimate, PoissonCounts) {
  std::vector<double> counts;
  for (std::size_t i = 0; i < 200; ++i) {
    RandomStream s = derive_stream(11, i);
    counts.push_back(static_cast<double>(sample_poisson(1.0, Window<2>::centered(5), s).size()));
  }
  const auto rep = intensity_estimate("poisson", counts, 100.0, oracles::make("lambda", 1.0));
  EXPECT_NEAR(rep.mean, 1.0, 3 * 0.1 / std::sqrt(200.0));
  EXPECT_TRUE(rep.within_sigmas(3));
}

TEST(IntensityEstimate, PsiQuarterTurn) {
  PsiConfig cfg;
  cfg.window_side = 30;
  cfg.thetas = {pi / 2};
  cfg.replication = {60, 42, 1};
  const auto run = run_psi(cfg);
  const auto& rep = run.reports.front();
  ASSERT_TRUE(rep.oracle.has_value());
  EXPECT_EQ(rep.oracle->value, oracles::gamma_theta(1, pi / 2));
  EXPECT_NEAR(rep.oracle->value, 1.0, 1e-15);
  EXPECT_TRUE(rep.within_sigmas(3)) << rep.mean << " ± " << rep.std_error;
}

TEST(RatioEstimate, TotalsAndDeltaMethod) {
  const std::vector<double> num{1, 2, 3, 4}, den{2, 4, 6, 8};
  const auto rep = ratio_estimate("r", num, den);
  EXPECT_DOUBLE_EQ(rep.mean, 0.5);
  EXPECT_EQ(rep.std_error, 0.0);
  const std::vector<double> zero{0, 0, 0, 0};
  EXPECT_THROW(ratio_estimate("r", num, zero), Error);
  EXPECT_THROW(ratio_estimate("r", num, std::vector<double>{1, 2}), Error);
}

TEST(RatioEstimate, StandardErrorAgreesWithBinomial) {
  // Bernoulli(0.3) trials grouped into replications of 50
  std::mt19937_64 gen(13);
  std::bernoulli_distribution coin(0.3);
  std::vector<double> num, den;
  for (int i = 0; i < 400; ++i) {
    int k = 0;
    for (int j = 0; j < 50; ++j) k += coin(gen);
    num.push_back(k);
    den.push_back(50);
  }
  const auto rep = ratio_estimate("p", num, den);
  EXPECT_NEAR(rep.std_error, std::sqrt(0.3 * 0.7 / 20000), 0.1 * std::sqrt(0.3 * 0.7 / 20000));
}

namespace {

// draws from ¼ sin(t/2) on (0, 2π): F(t) = (1 − cos(t/2)) / 2
std::vector<double> inversion_draws(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<double> out(n);
  for (auto& t : out) t = 2 * std::acos(1 - 2 * u(gen));
  return out;
}

}  // namespace

TEST(DensityGof, SelfConsistentDraws) {
  std::mt19937_64 gen(17);
  int passed = 0;
  const int runs = 200;
  for (int k = 0; k < runs; ++k) {
    const auto marks = inversion_draws(gen, 100000);
    const auto rep = density_gof(marks, oracles::angle_density_2d, 24, 0, two_pi);
    EXPECT_EQ(rep.dof, 23u);
    passed += rep.p_value > 0.01;
  }
  EXPECT_GE(passed, 196);
}

TEST(DensityGof, CountsBalance) {
  std::mt19937_64 gen(19);
  const auto marks = inversion_draws(gen, 5000);
  const auto rep = density_gof(marks, oracles::angle_density_2d, 12, 0, two_pi);
  double obs = 0, exp = 0;
  for (std::size_t b = 0; b < 12; ++b) {
    obs += rep.observed_counts[b];
    exp += rep.expected_counts[b];
  }
  EXPECT_NEAR(obs, exp, 1e-6 * obs);
  EXPECT_GE(rep.p_value, 0.0);
  EXPECT_LE(rep.p_value, 1.0);
}

TEST(DensityGof, Errors) {
  std::mt19937_64 gen(23);
  const auto few = inversion_draws(gen, 100);
  EXPECT_THROW(density_gof(few, oracles::angle_density_2d, 24, 0, two_pi), Error);
  // the 3D density vanishes at π, so a fine grid leaves a bin with tiny mass
  const auto many = inversion_draws(gen, 2000);
  try {
    density_gof(many, oracles::angle_density_3d, 100, 0, two_pi);
    FAIL() << "expected rebin";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "rebin");
  }
}

TEST(DensityGof, PlanarMarksAgainstSpatialDensity) {
  CrossingConfig cfg;
  cfg.segment_length = 200;
  cfg.replication = {20, 42, 1};
  const auto run = run_crossings(cfg);
  std::vector<double> betas;
  for (const auto& r : run.records)
    for (const auto& c : r.crossings) betas.push_back(c.beta);
  ASSERT_GE(betas.size(), 240u);
  EXPECT_GT(density_gof(betas, oracles::folded_density_2d, 12, 0, pi).p_value, 0.01);
  EXPECT_LT(density_gof(betas, oracles::folded_density_3d, 12, 0, pi).p_value, 0.01);
}

TEST(Coverage, NominalRate) {
  int covered = 0;
  const int meta = 200;
  for (int k = 0; k < meta; ++k) {
    const auto rep = run_replications(
        {100, static_cast<std::uint64_t>(1000 + k), 1}, "n",
        [](RandomStream& s, std::size_t) {
          return Outcome{static_cast<double>(sample_poisson(1.0, Window<2>::centered(2), s).size())};
        },
        oracles::make("mean", 16.0));
    covered += rep.ci95.lo <= 16.0 && 16.0 <= rep.ci95.hi;
  }
  EXPECT_GE(covered, 180);
  EXPECT_LE(covered, 198);
}

TEST(MirrorSymmetry, DetectsAsymmetry) {
  const std::vector<double> sym{10, 20, 30, 30, 20, 10};
  EXPECT_EQ(mirror_symmetry_test(sym).chi_square, 0.0);
  EXPECT_EQ(mirror_symmetry_test(sym).dof, 3u);
  const std::vector<double> skew{100, 20, 30, 30, 20, 10};
  EXPECT_LT(mirror_symmetry_test(skew).p_value, 0.01);
}

TEST(Summarize, EmptyIsAnError) {
  EXPECT_THROW(summarize("x", std::vector<double>{}), Error);
}
