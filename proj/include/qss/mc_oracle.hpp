#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "qss/protocol.hpp"

// Shot-by-shot sampler of the sharing protocol, written directly against the
// scalar input/output relations of each optical element. It shares no linear
// algebra with the covariance engine, so agreement between the two is a real
// consistency check rather than a tautology.

namespace qss {

inline constexpr std::size_t kBlockShots = 4096;

struct MCEstimate {
  double mean = 0.0;
  double variance = 0.0;
  std::uint64_t shots = 0;

  double std_error_mean() const {
    return shots > 0 ? std::sqrt(variance / static_cast<double>(shots)) : 0.0;
  }
  double std_error_var() const {
    return shots > 1 ? variance * std::sqrt(2.0 / static_cast<double>(shots - 1)) : 0.0;
  }
};

// Deliberate distortion of the sampled output, used to prove that the
// validation actually detects disagreement.
struct McPerturbation {
  double out_plus_bias = 0.0;
};

// One block of sampled quadratures. Blocks are seeded independently from
// (seed, block_index), so any prefix of blocks is reproducible in isolation.
struct SampleBatch {
  std::vector<double> in_plus, in_minus;
  std::vector<double> out_plus, out_minus;
  std::vector<double> epr_sum_plus, epr_diff_minus;  // source pair, before noise
};

SampleBatch sample_batch(const ScenarioConfig& cfg, AccessStructure structure,
                         std::uint64_t block_index, std::uint64_t seed, std::size_t n_shots,
                         const McPerturbation& pert = {});

// Accumulates n_shots across blocks. Keys: in_plus, in_minus, out_plus,
// out_minus, epr_sum_plus, epr_diff_minus. Output quadratures include the
// parametric stage for the feedforward structures, matching the reported
// analytic state.
std::map<std::string, MCEstimate> sample_scenario(const ScenarioConfig& cfg,
                                                  AccessStructure structure,
                                                  std::uint64_t n_shots, std::uint64_t seed,
                                                  const McPerturbation& pert = {});

struct DerivedEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Optical gain from the sampled output mean against the exact input amplitude.
DerivedEstimate estimate_gain(const MCEstimate& out, double in_amp);

// Fidelity from sampled output moments, with a first-order error propagated
// from the mean and variance uncertainties.
DerivedEstimate estimate_fidelity(const MCEstimate& out_plus, const MCEstimate& out_minus,
                                  double in_plus, double in_minus);

}  // namespace qss
