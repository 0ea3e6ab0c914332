#include "qss/mc_oracle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "qss/metrics.hpp"

namespace qss {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Standard normal generator with its own Box-Muller transform so sampled
// streams are identical across standard library implementations.
class Normal {
 public:
  Normal(std::uint64_t seed, std::uint64_t block)
      : eng_(splitmix64(splitmix64(seed) ^ (block + 0xD1B54A32D192ED03ULL))) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  double uniform() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct Accumulator {
  std::uint64_t n = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  MCEstimate finish() const {
    return MCEstimate{mean, n > 1 ? m2 / static_cast<double>(n - 1) : 0.0, n};
  }
};

}  // namespace

SampleBatch sample_batch(const ScenarioConfig& cfg, AccessStructure structure,
                         std::uint64_t block_index, std::uint64_t seed, std::size_t n_shots,
                         const McPerturbation& pert) {
  cfg.validate();
  Normal rng(seed, block_index);

  const double rt2 = std::sqrt(0.5);
  const double s3 = std::sqrt(3.0);
  const double big = std::sqrt(2.0 / 3.0), small = std::sqrt(1.0 / 3.0);
  const double sd_s1p = std::sqrt(cfg.sqz1.squeezed_var());
  const double sd_s1m = std::sqrt(cfg.sqz1.antisqueezed_var());
  const double sd_s2p = std::sqrt(cfg.sqz2.squeezed_var());
  const double sd_s2m = std::sqrt(cfg.sqz2.antisqueezed_var());
  const double sd_noise = std::sqrt(cfg.noise_var);
  const double vis = cfg.epr_visibility;
  const double vis_mix = std::sqrt(std::max(0.0, 1.0 - vis * vis));
  const double eta_d = cfg.ff_detector_efficiency;
  const double sd_el = std::sqrt(cfg.ff_electronic_noise_var);
  const double gain = cfg.electronic_gain;

  SampleBatch batch;
  for (auto* v : {&batch.in_plus, &batch.in_minus, &batch.out_plus, &batch.out_minus,
                  &batch.epr_sum_plus, &batch.epr_diff_minus}) {
    v->reserve(n_shots);
  }

  for (std::size_t shot = 0; shot < n_shots; ++shot) {
    // Squeezed resources and the entangling splitter.
    const double s1p = sd_s1p * rng(), s1m = sd_s1m * rng();
    const double s2p = sd_s2p * rng(), s2m = sd_s2m * rng();
    double e1p = (s1p - s2m) * rt2, e1m = (s1m + s2p) * rt2;
    double e2p = (s1p + s2m) * rt2, e2m = (s1m - s2p) * rt2;
    if (vis < 1.0) {
      e1p = vis * e1p + vis_mix * rng();
      e1m = vis * e1m + vis_mix * rng();
      e2p = vis * e2p + vis_mix * rng();
      e2m = vis * e2m + vis_mix * rng();
    }
    batch.epr_sum_plus.push_back(e1p + e2p);
    batch.epr_diff_minus.push_back(e1m - e2m);

    if (cfg.noise_injection == NoiseInjection::epr_beams && cfg.noise_var > 0.0) {
      const double np = sd_noise * rng(), nm = sd_noise * rng();
      e1p += np;
      e2p += np;
      e1m += nm;
      e2m -= nm;
    }

    // Transport rotations of -pi/4 and -3pi/4.
    const double f1p = (e1p + e1m) * rt2, f1m = (-e1p + e1m) * rt2;
    const double f2p = (-e2p + e2m) * rt2, f2m = (-e2p - e2m) * rt2;

    const double inp = cfg.secret_amp_plus + rng();
    const double inm = cfg.secret_amp_minus + rng();
    batch.in_plus.push_back(inp);
    batch.in_minus.push_back(inm);

    double sh1p = (inp + f1p) * rt2, sh1m = (inm + f1m) * rt2;
    double sh2p = (inp - f1p) * rt2, sh2m = (inm - f1m) * rt2;
    double sh3p = f2p, sh3m = f2m;

    if (cfg.noise_injection == NoiseInjection::shares && cfg.noise_var > 0.0) {
      const double np = sd_noise * rng(), nm = sd_noise * rng();
      sh1p += np * rt2;
      sh2p -= np * rt2;
      sh3p += np;
      sh1m += nm * rt2;
      sh2m -= nm * rt2;
      sh3m -= nm;
    }

    double* shares[3][2] = {{&sh1p, &sh1m}, {&sh2p, &sh2m}, {&sh3p, &sh3m}};
    for (int k = 0; k < 3; ++k) {
      const double eta = cfg.channel_efficiency[static_cast<size_t>(k)];
      if (eta < 1.0) {
        const double keep = std::sqrt(eta), mix = std::sqrt(1.0 - eta);
        *shares[k][0] = keep * *shares[k][0] + mix * rng();
        *shares[k][1] = keep * *shares[k][1] + mix * rng();
      }
    }

    double outp = 0.0, outm = 0.0;
    switch (structure) {
      case AccessStructure::s12:
        outp = (sh1p + sh2p) * rt2;
        outm = (sh1m + sh2m) * rt2;
        break;
      case AccessStructure::s23:
      case AccessStructure::s13: {
        double detp = 0.0;
        if (structure == AccessStructure::s23) {
          outp = big * sh2p - small * sh3p;
          outm = big * sh2m - small * sh3m;
          detp = small * sh2p + big * sh3p;
        } else {
          outp = big * sh1p + small * sh3p;
          outm = big * sh1m + small * sh3m;
          detp = small * sh1p - big * sh3p;
        }
        double current = std::sqrt(eta_d) * detp;
        if (eta_d < 1.0) current += std::sqrt(1.0 - eta_d) * rng();
        if (sd_el > 0.0) current += sd_el * rng();
        outp += gain * current;
        outp /= s3;  // parametric stage, matching the reported state
        outm *= s3;
        break;
      }
      case AccessStructure::adv1:
        outp = sh1p;
        outm = sh1m;
        break;
      case AccessStructure::adv2:
        outp = sh2p;
        outm = sh2m;
        break;
      case AccessStructure::adv3:
        outp = sh3p;
        outm = sh3m;
        break;
    }
    batch.out_plus.push_back(outp + pert.out_plus_bias);
    batch.out_minus.push_back(outm);
  }
  return batch;
}

std::map<std::string, MCEstimate> sample_scenario(const ScenarioConfig& cfg,
                                                  AccessStructure structure,
                                                  std::uint64_t n_shots, std::uint64_t seed,
                                                  const McPerturbation& pert) {
  if (n_shots == 0) throw std::invalid_argument("sample_scenario: need at least one shot");
  Accumulator in_p, in_m, out_p, out_m, epr_s, epr_d;
  std::uint64_t done = 0, block = 0;
  while (done < n_shots) {
    const std::size_t take =
        static_cast<std::size_t>(std::min<std::uint64_t>(kBlockShots, n_shots - done));
    auto batch = sample_batch(cfg, structure, block, seed, take, pert);
    for (std::size_t i = 0; i < take; ++i) {
      in_p.add(batch.in_plus[i]);
      in_m.add(batch.in_minus[i]);
      out_p.add(batch.out_plus[i]);
      out_m.add(batch.out_minus[i]);
      epr_s.add(batch.epr_sum_plus[i]);
      epr_d.add(batch.epr_diff_minus[i]);
    }
    done += take;
    ++block;
  }
  return {{"in_plus", in_p.finish()},      {"in_minus", in_m.finish()},
          {"out_plus", out_p.finish()},    {"out_minus", out_m.finish()},
          {"epr_sum_plus", epr_s.finish()}, {"epr_diff_minus", epr_d.finish()}};
}

DerivedEstimate estimate_gain(const MCEstimate& out, double in_amp) {
  if (std::abs(in_amp) < 1e-12) {
    throw std::domain_error("estimate_gain: input amplitude too small");
  }
  return DerivedEstimate{out.mean / in_amp, out.std_error_mean() / std::abs(in_amp)};
}

DerivedEstimate estimate_fidelity(const MCEstimate& out_plus, const MCEstimate& out_minus,
                                  double in_plus, double in_minus) {
  auto f = [&](double mp, double mm, double vp, double vm) {
    const double gp = std::abs(in_plus) < 1e-12 ? 1.0 : mp / in_plus;
    const double gm = std::abs(in_minus) < 1e-12 ? 1.0 : mm / in_minus;
    return coherent_fidelity(in_plus, in_minus, gp, gm, vp, vm);
  };
  const double x[4] = {out_plus.mean, out_minus.mean, out_plus.variance, out_minus.variance};
  const double s[4] = {out_plus.std_error_mean(), out_minus.std_error_mean(),
                       out_plus.std_error_var(), out_minus.std_error_var()};
  const double value = f(x[0], x[1], x[2], x[3]);
  double var = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double h = std::max(1e-7, 1e-5 * std::abs(x[i]));
    double lo[4], hi[4];
    for (int j = 0; j < 4; ++j) lo[j] = hi[j] = x[j];
    lo[i] -= h;
    hi[i] += h;
    const double slope = (f(hi[0], hi[1], hi[2], hi[3]) - f(lo[0], lo[1], lo[2], lo[3])) /
                         (2.0 * h);
    var += slope * slope * s[i] * s[i];
  }
  return DerivedEstimate{value, std::sqrt(var)};
}

}  // namespace qss
