#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <string>

#include "qss/mc_oracle.hpp"
#include "qss/metrics.hpp"
#include "qss/protocol.hpp"

using namespace qss;

namespace {

constexpr std::uint64_t kShots = 200000;

ReconstructionResult analytic(const ScenarioConfig& cfg, AccessStructure st) {
  const auto shares = dealer_encode(cfg);
  if (st == AccessStructure::s23 || st == AccessStructure::s13) {
    return apply_parametric(reconstruct_feedforward(shares, cfg, st, cfg.electronic_gain));
  }
  return reconstruct(shares, cfg, st);
}

double z_mean(const MCEstimate& e, double target) {
  return (e.mean - target) / e.std_error_mean();
}

double z_var(const MCEstimate& e, double target) {
  return (e.variance - target) / e.std_error_var();
}

// Compares sampled output moments of one structure against the analytic
// engine at 5 sigma.
void check_structure(const ScenarioConfig& cfg, AccessStructure st, std::uint64_t seed) {
  CAPTURE(to_string(st));
  CAPTURE(seed);
  const auto m = build_metrics(analytic(cfg, st));
  const auto est = sample_scenario(cfg, st, kShots, seed);
  CHECK(std::abs(z_mean(est.at("out_plus"), m.g_plus * cfg.secret_amp_plus)) < 5.0);
  CHECK(std::abs(z_mean(est.at("out_minus"), m.g_minus * cfg.secret_amp_minus)) < 5.0);
  CHECK(std::abs(z_var(est.at("out_plus"), m.v_out_plus)) < 5.0);
  CHECK(std::abs(z_var(est.at("out_minus"), m.v_out_minus)) < 5.0);
}

}  // namespace

TEST_CASE("same seed reproduces estimates exactly, different seeds do not") {
  const ScenarioConfig cfg;
  const auto a = sample_scenario(cfg, AccessStructure::s23, 20000, 7);
  const auto b = sample_scenario(cfg, AccessStructure::s23, 20000, 7);
  for (const auto& [key, est] : a) {
    CHECK(est.mean == b.at(key).mean);
    CHECK(est.variance == b.at(key).variance);
    CHECK(est.shots == b.at(key).shots);
  }
  const auto c = sample_scenario(cfg, AccessStructure::s23, 20000, 8);
  CHECK(a.at("out_plus").mean != c.at("out_plus").mean);
}

TEST_CASE("blocks are independently seeded and reproducible") {
  const ScenarioConfig cfg;
  const auto b0 = sample_batch(cfg, AccessStructure::s12, 0, 11, 512);
  const auto b0_again = sample_batch(cfg, AccessStructure::s12, 0, 11, 512);
  const auto b1 = sample_batch(cfg, AccessStructure::s12, 1, 11, 512);
  REQUIRE(b0.out_plus.size() == 512);
  CHECK(b0.out_plus == b0_again.out_plus);
  CHECK(b0.out_minus == b0_again.out_minus);
  CHECK(b0.out_plus != b1.out_plus);
}

TEST_CASE("sampled moments match the analytic engine at the experiment settings") {
  const ScenarioConfig cfg;
  check_structure(cfg, AccessStructure::s12, 101);
  check_structure(cfg, AccessStructure::s23, 102);
  check_structure(cfg, AccessStructure::s13, 103);
  check_structure(cfg, AccessStructure::adv1, 104);
  check_structure(cfg, AccessStructure::adv2, 105);
  check_structure(cfg, AccessStructure::adv3, 106);
}

TEST_CASE("sampled moments match with noise on the entangled beams") {
  ScenarioConfig cfg;
  cfg.noise_injection = NoiseInjection::epr_beams;
  check_structure(cfg, AccessStructure::s12, 201);
  check_structure(cfg, AccessStructure::s23, 202);
  check_structure(cfg, AccessStructure::adv3, 203);
}

TEST_CASE("sampled moments match with lossy channels and imperfect visibility") {
  ScenarioConfig cfg;
  cfg.channel_efficiency = {0.9, 0.85, 0.7};
  cfg.epr_visibility = 0.97;
  check_structure(cfg, AccessStructure::s12, 301);
  check_structure(cfg, AccessStructure::s13, 302);
  check_structure(cfg, AccessStructure::s23, 303);
}

TEST_CASE("entangled-pair combinations match the source-state covariance") {
  ScenarioConfig cfg;
  cfg.epr_visibility = 0.98;
  const auto epr = make_epr(cfg.sqz1, cfg.sqz2, cfg.epr_visibility);
  const double sum_plus = epr.cov(0, 0) + epr.cov(2, 2) + 2.0 * epr.cov(0, 2);
  const double diff_minus = epr.cov(1, 1) + epr.cov(3, 3) - 2.0 * epr.cov(1, 3);
  const auto est = sample_scenario(cfg, AccessStructure::s23, kShots, 404);
  CHECK(std::abs(z_mean(est.at("epr_sum_plus"), 0.0)) < 5.0);
  CHECK(std::abs(z_mean(est.at("epr_diff_minus"), 0.0)) < 5.0);
  CHECK(std::abs(z_var(est.at("epr_sum_plus"), sum_plus)) < 5.0);
  CHECK(std::abs(z_var(est.at("epr_diff_minus"), diff_minus)) < 5.0);
}

TEST_CASE("standard errors shrink like one over root n") {
  const ScenarioConfig cfg;
  const auto small = sample_scenario(cfg, AccessStructure::s23, 50000, 55);
  const auto large = sample_scenario(cfg, AccessStructure::s23, 200000, 55);
  const double ratio =
      small.at("out_plus").std_error_mean() / large.at("out_plus").std_error_mean();
  CHECK(ratio == doctest::Approx(2.0).epsilon(0.05));
  CHECK(large.at("out_plus").shots == 200000);
}

TEST_CASE("derived gain and fidelity estimates agree with the engine") {
  const ScenarioConfig cfg;
  const auto m = build_metrics(analytic(cfg, AccessStructure::s23));
  const auto est = sample_scenario(cfg, AccessStructure::s23, kShots, 77);

  const auto g = estimate_gain(est.at("out_plus"), cfg.secret_amp_plus);
  CHECK(g.std_error > 0.0);
  CHECK(std::abs(g.value - m.g_plus) < 5.0 * g.std_error);

  const auto f = estimate_fidelity(est.at("out_plus"), est.at("out_minus"),
                                   cfg.secret_amp_plus, cfg.secret_amp_minus);
  CHECK(f.std_error > 0.0);
  CHECK(std::abs(f.value - m.fidelity) < 5.0 * f.std_error);
}

TEST_CASE("fidelity estimate handles an undisplaced secret") {
  ScenarioConfig cfg;
  cfg.secret_amp_plus = 0.0;
  cfg.secret_amp_minus = 0.0;
  const auto m = build_metrics(analytic(cfg, AccessStructure::s23));
  const auto est = sample_scenario(cfg, AccessStructure::s23, kShots, 88);
  const auto f = estimate_fidelity(est.at("out_plus"), est.at("out_minus"), 0.0, 0.0);
  CHECK(std::isfinite(f.value));
  CHECK(f.std_error > 0.0);
  CHECK(std::abs(f.value - m.fidelity) < 5.0 * f.std_error);
}

TEST_CASE("a deliberate output bias is detected far beyond 5 sigma") {
  const ScenarioConfig cfg;
  const auto m = build_metrics(analytic(cfg, AccessStructure::s23));
  McPerturbation pert;
  pert.out_plus_bias = 0.05;
  const auto est = sample_scenario(cfg, AccessStructure::s23, kShots, 99, pert);
  CHECK(std::abs(z_mean(est.at("out_plus"), m.g_plus * cfg.secret_amp_plus)) > 5.0);
  CHECK(std::abs(z_mean(est.at("out_minus"), m.g_minus * cfg.secret_amp_minus)) < 5.0);
}
