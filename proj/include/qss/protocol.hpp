#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qss/errors.hpp"
#include "qss/gaussian.hpp"

// The (2,3) threshold sharing protocol. A coherent secret is encoded with one
// arm of an entangled pair; any two players recover it, one player alone
// cannot. Reconstruction is either a direct recombination of shares 1 and 2
// or, for pairs holding share 3, a beam splitter plus electro-optic
// feedforward of an amplitude measurement.

namespace qss {

enum class AccessStructure { s12, s23, s13, adv1, adv2, adv3 };

inline const char* to_string(AccessStructure s) {
  switch (s) {
    case AccessStructure::s12: return "12";
    case AccessStructure::s23: return "23";
    case AccessStructure::s13: return "13";
    case AccessStructure::adv1: return "adv1";
    case AccessStructure::adv2: return "adv2";
    case AccessStructure::adv3: return "adv3";
  }
  return "?";
}

inline bool is_authorized(AccessStructure s) {
  return s == AccessStructure::s12 || s == AccessStructure::s23 || s == AccessStructure::s13;
}

// Where the dealer's classical amplitude/phase noise enters: directly onto
// the finished shares, or onto the entangled beams before transport to the
// encoding station (the transport rotations then mix it between quadratures).
enum class NoiseInjection { shares, epr_beams };

struct ScenarioConfig {
  double secret_amp_plus = 20.0;
  double secret_amp_minus = 10.0;
  SqueezerSpec sqz1{-4.5, 1.0};
  SqueezerSpec sqz2{-4.5, 1.0};
  double epr_visibility = 1.0;
  double noise_var = 2.2387211385683394;  // 10^0.35
  NoiseInjection noise_injection = NoiseInjection::shares;
  double ff_detector_efficiency = 0.93;
  double ff_electronic_noise_var = 0.05011872336272722;  // 13 dB below the QNL
  double electronic_gain = 2.9329423004270656;           // unit gain product at the above
  double homodyne_efficiency = 0.89;
  std::array<double, 3> channel_efficiency{1.0, 1.0, 1.0};
  long long mc_shots = 1000000;
  std::uint64_t mc_seed = 42;

  void validate() const {
    auto fin = [](double x) { return std::isfinite(x); };
    if (!fin(secret_amp_plus) || !fin(secret_amp_minus)) {
      throw ConfigError("secret amplitudes must be finite");
    }
    for (const SqueezerSpec* s : {&sqz1, &sqz2}) {
      if (!fin(s->squeezing_db) || s->squeezing_db > 0.0) {
        throw ConfigError("squeezing_db must be <= 0");
      }
      if (!fin(s->excess_factor) || s->excess_factor < 1.0) {
        throw ConfigError("squeezer excess factor must be >= 1");
      }
    }
    if (!(epr_visibility >= 0.0 && epr_visibility <= 1.0)) {
      throw ConfigError("epr_visibility must lie in [0,1]");
    }
    if (!(noise_var >= 0.0) || !fin(noise_var)) {
      throw ConfigError("noise_var must be >= 0");
    }
    if (!(ff_detector_efficiency > 0.0 && ff_detector_efficiency <= 1.0)) {
      throw ConfigError("ff_detector_efficiency must lie in (0,1]");
    }
    if (!(ff_electronic_noise_var >= 0.0) || !fin(ff_electronic_noise_var)) {
      throw ConfigError("ff_electronic_noise_var must be >= 0");
    }
    if (!(electronic_gain >= 0.0) || !fin(electronic_gain)) {
      throw ConfigError("electronic_gain must be >= 0");
    }
    if (!(homodyne_efficiency > 0.0 && homodyne_efficiency <= 1.0)) {
      throw ConfigError("homodyne_efficiency must lie in (0,1]");
    }
    for (double eta : channel_efficiency) {
      if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ConfigError("channel efficiencies must lie in [0,1]");
      }
    }
    if (mc_shots < 1) throw ConfigError("mc_shots must be >= 1");
  }
};

// The protocol pipeline is templated on the working scalar like the state
// layer underneath it. Double is the everyday instantiation; long double
// exists for regimes where -60 dB resources leave survivors nine orders of
// magnitude below the entries that cancel around them.
template <class Scalar = double>
GaussianState<Scalar> secret_state(const ScenarioConfig& cfg) {
  return coherent<Scalar>(Scalar(cfg.secret_amp_plus), Scalar(cfg.secret_amp_minus));
}

// Entangles two amplitude-squeezed beams on a balanced splitter with a
// quarter-wave relative phase. Sum amplitude and difference phase then probe
// the two squeezed inputs directly. Imperfect interference visibility acts
// as a transmission of v^2 on each output beam.
template <class Scalar = double>
GaussianState<Scalar> make_epr(const SqueezerSpec& sqz1, const SqueezerSpec& sqz2,
                               double visibility = 1.0) {
  if (!(visibility >= 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("make_epr: visibility outside [0,1]");
  }
  auto pair = tensor(squeezed<Scalar>(sqz1), squeezed<Scalar>(sqz2));
  auto epr = beam_splitter(pair, 0, 1, Scalar(0.5), Scalar(M_PI / 2.0));
  if (visibility < 1.0) {
    const Scalar eta = Scalar(visibility) * Scalar(visibility);
    epr = loss_channel(epr, 0, eta);
    epr = loss_channel(epr, 1, eta);
  }
  return epr;
}

template <class Scalar>
struct BasicShareSet {
  GaussianState<Scalar> state;  // three modes: share 1, share 2, share 3
  Eigen::Matrix<Scalar, 2, 1> secret_mean;
  // Amplitude of the secret mode appearing in each share (phase symmetric).
  std::array<Scalar, 3> secret_coupling{};
};

using ShareSet = BasicShareSet<double>;

template <class Scalar>
struct BasicReconstructionResult {
  GaussianState<Scalar> out_state;  // single mode
  Scalar g_plus = 0.0;
  Scalar g_minus = 0.0;
  AccessStructure structure = AccessStructure::s12;
  bool parametric_applied = false;
  Eigen::Matrix<Scalar, 2, 1> secret_mean = Eigen::Matrix<Scalar, 2, 1>::Zero();
};

using ReconstructionResult = BasicReconstructionResult<double>;

// Splits the secret against one entangled beam; the other entangled beam is
// share 3. The transport rotations of -pi/4 and -3pi/4 align the entangled
// quadratures so share 3 plus either partner closes the correlations exactly.
template <class Scalar = double>
BasicShareSet<Scalar> dealer_encode(const ScenarioConfig& cfg) {
  cfg.validate();
  using Vec = typename GaussianState<Scalar>::Vec;
  auto full =
      tensor(secret_state<Scalar>(cfg), make_epr<Scalar>(cfg.sqz1, cfg.sqz2, cfg.epr_visibility));

  if (cfg.noise_injection == NoiseInjection::epr_beams && cfg.noise_var > 0.0) {
    Vec dp = Vec::Zero(6);
    Vec dm = Vec::Zero(6);
    dp(2) = Scalar(1);   // X+ of beam 1
    dp(4) = Scalar(1);   // X+ of beam 2 (correlated copy)
    dm(3) = Scalar(1);   // X- of beam 1
    dm(5) = Scalar(-1);  // X- of beam 2 (conjugate copy)
    full = add_classical_noise(
        full, (Scalar(cfg.noise_var) * (dp * dp.transpose() + dm * dm.transpose())).eval());
  }

  full = phase_shift(full, 1, Scalar(-M_PI / 4.0));
  full = phase_shift(full, 2, Scalar(-3.0 * M_PI / 4.0));
  full = beam_splitter(full, 0, 1, Scalar(0.5), Scalar(0));  // modes now: share1, share2, share3

  if (cfg.noise_injection == NoiseInjection::shares && cfg.noise_var > 0.0) {
    const Scalar rt = Scalar(1) / std::sqrt(Scalar(2));
    Vec cp = Vec::Zero(6);
    Vec cm = Vec::Zero(6);
    cp(0) = rt;
    cp(2) = -rt;
    cp(4) = Scalar(1);
    cm(1) = rt;
    cm(3) = -rt;
    cm(5) = Scalar(-1);
    full = add_classical_noise(
        full, (Scalar(cfg.noise_var) * (cp * cp.transpose() + cm * cm.transpose())).eval());
  }

  std::array<Scalar, 3> coupling{Scalar(1) / std::sqrt(Scalar(2)),
                                 Scalar(1) / std::sqrt(Scalar(2)), Scalar(0)};
  for (int k = 0; k < 3; ++k) {
    if (cfg.channel_efficiency[k] < 1.0) {
      full = loss_channel(full, k, Scalar(cfg.channel_efficiency[k]));
    }
    coupling[static_cast<size_t>(k)] *= std::sqrt(Scalar(cfg.channel_efficiency[k]));
  }

  return BasicShareSet<Scalar>{
      std::move(full),
      Eigen::Matrix<Scalar, 2, 1>(Scalar(cfg.secret_amp_plus), Scalar(cfg.secret_amp_minus)),
      coupling};
}

// Players 1 and 2 recombine their shares on a balanced splitter; the
// entangled admixture cancels between the two arms.
template <class Scalar>
BasicReconstructionResult<Scalar> reconstruct_12(const BasicShareSet<Scalar>& shares) {
  auto mixed = beam_splitter(shares.state, 0, 1, Scalar(0.5), Scalar(0));
  auto out = partial_trace(mixed, {0});
  const Scalar g =
      (shares.secret_coupling[0] + shares.secret_coupling[1]) / std::sqrt(Scalar(2));
  return BasicReconstructionResult<Scalar>{std::move(out), g, g, AccessStructure::s12, false,
                                           shares.secret_mean};
}

// Pairs holding share 3 mix it against the secret-bearing share on a 2:1
// splitter, detect the amplitude quadrature of the dim port, and feed the
// photocurrent forward onto the bright port with electronic gain `gain`.
template <class Scalar>
BasicReconstructionResult<Scalar> reconstruct_feedforward(const BasicShareSet<Scalar>& shares,
                                                          const ScenarioConfig& cfg,
                                                          AccessStructure structure,
                                                          Scalar gain) {
  int p = 0;
  Scalar phase = Scalar(0);
  if (structure == AccessStructure::s23) {
    p = 1;
    phase = Scalar(M_PI);
  } else if (structure == AccessStructure::s13) {
    p = 0;
    phase = Scalar(0);
  } else {
    throw std::invalid_argument("reconstruct_feedforward: structure must pair with share 3");
  }

  auto mixed = beam_splitter(shares.state, p, 2, Scalar(2) / Scalar(3), phase);
  auto after = feedforward_displace(mixed, {2, Quad::amplitude}, {p, Quad::amplitude}, gain,
                                    Scalar(cfg.ff_detector_efficiency),
                                    Scalar(cfg.ff_electronic_noise_var));
  auto out = partial_trace(after, {p});

  const Scalar cp = shares.secret_coupling[static_cast<size_t>(p)];
  const Scalar g_minus = std::sqrt(Scalar(2) / Scalar(3)) * cp;
  const Scalar g_plus = g_minus + gain * std::sqrt(Scalar(cfg.ff_detector_efficiency)) *
                                      std::sqrt(Scalar(1) / Scalar(3)) * cp;
  return BasicReconstructionResult<Scalar>{std::move(out), g_plus, g_minus, structure, false,
                                           shares.secret_mean};
}

// What a single excluded player holds.
template <class Scalar>
BasicReconstructionResult<Scalar> adversary_state(const BasicShareSet<Scalar>& shares,
                                                  AccessStructure structure) {
  int k = 0;
  switch (structure) {
    case AccessStructure::adv1: k = 0; break;
    case AccessStructure::adv2: k = 1; break;
    case AccessStructure::adv3: k = 2; break;
    default:
      throw std::invalid_argument("adversary_state: structure must be a single player");
  }
  auto out = partial_trace(shares.state, {k});
  const Scalar g = shares.secret_coupling[static_cast<size_t>(k)];
  return BasicReconstructionResult<Scalar>{std::move(out), g, g, structure, false,
                                           shares.secret_mean};
}

template <class Scalar>
BasicReconstructionResult<Scalar> reconstruct(const BasicShareSet<Scalar>& shares,
                                              const ScenarioConfig& cfg,
                                              AccessStructure structure) {
  switch (structure) {
    case AccessStructure::s12: return reconstruct_12(shares);
    case AccessStructure::s23:
    case AccessStructure::s13:
      return reconstruct_feedforward(shares, cfg, structure, Scalar(cfg.electronic_gain));
    default: return adversary_state(shares, structure);
  }
}

// Noiseless phase-insensitive rescaling that trades the amplitude gain
// against the phase gain: X+ /= sqrt(3), X- *= sqrt(3). Symplectic, so
// signal transfer, conditional variances and purity are untouched, but at
// unit gain product it equalizes both gains to one.
template <class Scalar>
BasicReconstructionResult<Scalar> apply_parametric(const BasicReconstructionResult<Scalar>& r) {
  if (r.parametric_applied) {
    throw std::logic_error("apply_parametric: stage already applied");
  }
  const Scalar s = std::sqrt(Scalar(3));
  Eigen::Matrix<Scalar, 2, 2> m;
  m << Scalar(1) / s, Scalar(0), Scalar(0), s;
  auto st = make_state<Scalar>((m * r.out_state.mean).eval(),
                               (m * r.out_state.cov * m.transpose()).eval());
  return BasicReconstructionResult<Scalar>{std::move(st), r.g_plus / s,  r.g_minus * s,
                                           r.structure,   true,          r.secret_mean};
}

// Electronic gain at which the feedforward pair reaches unit gain product
// g+ g- = 1. The ideal-device value is 2*sqrt(2).
inline double gain_for_unitary() { return 2.0 * std::sqrt(2.0); }

inline double gain_for_unitary(const ScenarioConfig& cfg, AccessStructure structure) {
  int p = 0;
  if (structure == AccessStructure::s23) {
    p = 1;
  } else if (structure == AccessStructure::s13) {
    p = 0;
  } else {
    throw std::invalid_argument("gain_for_unitary: structure must pair with share 3");
  }
  const double cp = std::sqrt(cfg.channel_efficiency[static_cast<size_t>(p)] / 2.0);
  const double g_minus = std::sqrt(2.0 / 3.0) * cp;
  if (g_minus <= 0.0) {
    throw std::domain_error("gain_for_unitary: channel is opaque, no gain can compensate");
  }
  const double slope = std::sqrt(cfg.ff_detector_efficiency / 3.0) * cp;
  return (1.0 / g_minus - g_minus) / slope;
}

// Closed-form amplitude-quadrature composition of the feedforward output for
// ideal channels, as a function of the realized amplitude gain:
//   X+_out = g+ X+_in + c_sq (X+_s1 + X+_s2) + c_anti (X-_s1 - X-_s2)
//            -+ c_noise dN+
struct FeedforwardCoefficients {
  double secret = 0.0;
  double squeezed_pair = 0.0;
  double antisqueezed_diff = 0.0;
  double noise = 0.0;
};

inline FeedforwardCoefficients feedforward_coefficients(double gain, double eta_d = 1.0) {
  const double s3 = std::sqrt(3.0);
  const double g_plus = 1.0 / s3 + gain * std::sqrt(eta_d) / std::sqrt(6.0);
  return FeedforwardCoefficients{g_plus, (s3 / 2.0) * (1.0 - s3 * g_plus),
                                 0.5 * (g_plus - s3), s3 - g_plus};
}

}  // namespace qss
