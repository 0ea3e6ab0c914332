#pragma once

#include <cmath>
#include <initializer_list>
#include <stdexcept>

#include "qss/gaussian.hpp"
#include "qss/protocol.hpp"

// Figures of merit for a reconstructed coherent secret: overlap fidelity,
// signal transfer T, conditional variance product V, joint-quadrature
// correlation products, and the classical benchmarks they are judged against.

namespace qss {

// Overlap between the coherent input and a Gaussian output reproducing it
// with amplitude gain g+ and phase gain g-. Amplitudes are quadrature means
// against a unit quantum noise limit:
//   F = 2 exp(-(k+ + k-)/4) / sqrt((1+V+)(1+V-)),
//   k+- = <X+->^2 (1 - g+-)^2 / (1 + V+-)
inline double coherent_fidelity(double in_plus, double in_minus, double g_plus,
                                double g_minus, double v_plus, double v_minus) {
  if (!(v_plus >= 0.0 && v_minus >= 0.0)) {
    throw std::invalid_argument("coherent_fidelity: negative output variance");
  }
  const double kp = in_plus * in_plus * (1.0 - g_plus) * (1.0 - g_plus) / (1.0 + v_plus);
  const double km =
      in_minus * in_minus * (1.0 - g_minus) * (1.0 - g_minus) / (1.0 + v_minus);
  return 2.0 * std::exp(-(kp + km) / 4.0) / std::sqrt((1.0 + v_plus) * (1.0 + v_minus));
}

inline double coherent_fidelity(const ReconstructionResult& r) {
  return coherent_fidelity(r.secret_mean(0), r.secret_mean(1), r.g_plus, r.g_minus,
                           r.out_state.var_of({0, Quad::amplitude}),
                           r.out_state.var_of({0, Quad::phase}));
}

struct OpticalGains {
  double g_plus = 0.0;
  double g_minus = 0.0;
};

// Gains measured from first moments, out/in per quadrature. Requires a
// displaced input on both quadratures.
inline OpticalGains optical_gains(const GaussianState<double>& in,
                                  const GaussianState<double>& out) {
  const double ip = in.mean_of({0, Quad::amplitude});
  const double im = in.mean_of({0, Quad::phase});
  if (std::abs(ip) < 1e-12 || std::abs(im) < 1e-12) {
    throw std::domain_error("optical_gains: input mean too small to divide by");
  }
  return OpticalGains{out.mean_of({0, Quad::amplitude}) / ip,
                      out.mean_of({0, Quad::phase}) / im};
}

// Signal transfer T = T+ + T- with T+- = g+-^2 V_in / V_out per quadrature.
// Inputs are coherent, so V_in = 1. Classical strategies cannot exceed T = 1.
inline double signal_transfer(double g_plus, double g_minus, double v_plus, double v_minus) {
  if (!(v_plus > 0.0 && v_minus > 0.0)) {
    throw std::invalid_argument("signal_transfer: output variances must be positive");
  }
  return g_plus * g_plus / v_plus + g_minus * g_minus / v_minus;
}

inline double signal_transfer(const ReconstructionResult& r) {
  return signal_transfer(r.g_plus, r.g_minus, r.out_state.var_of({0, Quad::amplitude}),
                         r.out_state.var_of({0, Quad::phase}));
}

struct ConditionalVariances {
  double plus = 0.0;
  double minus = 0.0;
  double product() const { return plus * minus; }
};

// Conditional variances V_cv(+-) = V_out - g^2 V_in of the output given the
// input (coherent, V_in = 1). Tiny negative values from floating point are
// clamped to zero; anything below -1e-6 indicates inconsistent inputs.
inline ConditionalVariances reconstruction_noise(double g_plus, double g_minus,
                                                 double v_plus, double v_minus) {
  auto cv = [](double v, double g) {
    const double x = v - g * g;
    if (x < -1e-6) {
      throw std::domain_error("reconstruction_noise: conditional variance below zero");
    }
    return x < 0.0 ? 0.0 : x;
  };
  return ConditionalVariances{cv(v_plus, g_plus), cv(v_minus, g_minus)};
}

inline ConditionalVariances reconstruction_noise(const ReconstructionResult& r) {
  return reconstruction_noise(r.g_plus, r.g_minus,
                              r.out_state.var_of({0, Quad::amplitude}),
                              r.out_state.var_of({0, Quad::phase}));
}

// Product of joint-quadrature variances between two modes,
//   <(X+_a + X+_b)^2> <(X-_a - X-_b)^2> / 4  (central moments).
// Below 1 certifies entanglement for symmetric pairs.
inline double duan_product(const GaussianState<double>& s, int mode_a = 0, int mode_b = 1) {
  if (mode_a == mode_b || mode_a < 0 || mode_b < 0 || mode_a >= s.modes() ||
      mode_b >= s.modes()) {
    throw std::invalid_argument("duan_product: bad mode pair");
  }
  const int ap = 2 * mode_a, am = 2 * mode_a + 1;
  const int bp = 2 * mode_b, bm = 2 * mode_b + 1;
  const double sum_plus = s.cov(ap, ap) + s.cov(bp, bp) + 2.0 * s.cov(ap, bp);
  const double diff_minus = s.cov(am, am) + s.cov(bm, bm) - 2.0 * s.cov(am, bm);
  return sum_plus * diff_minus / 4.0;
}

// Benchmarks no classical (measure-and-resend) dealer can beat for a (k,n)
// threshold scheme with coherent secrets: average fidelity over authorized
// sets at most k/n, any single set at most 1/2, signal transfer at most 1,
// conditional variance product at least 1.
struct ClassicalBounds {
  double average_fidelity = 0.0;
  double single_structure_fidelity = 0.5;
  double signal_transfer_limit = 1.0;
  double conditional_product_limit = 1.0;
};

inline ClassicalBounds classical_bounds(int k, int n) {
  if (k < 1 || n < 1 || k > n) {
    throw std::invalid_argument("classical_bounds: need 1 <= k <= n");
  }
  return ClassicalBounds{static_cast<double>(k) / static_cast<double>(n), 0.5, 1.0, 1.0};
}

inline double average_fidelity(std::initializer_list<double> fs) {
  if (fs.size() == 0) throw std::invalid_argument("average_fidelity: empty list");
  double acc = 0.0;
  for (double f : fs) acc += f;
  return acc / static_cast<double>(fs.size());
}

// Removes a known detection inefficiency from a measured variance,
// V_inferred = 1 + (V_measured - 1) / eta.
inline double infer_through_loss(double v_measured, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("infer_through_loss: efficiency outside (0,1]");
  }
  return 1.0 + (v_measured - 1.0) / eta;
}

// One-standard-deviation contour of the single-mode Wigner quasidistribution:
// an ellipse with semi-axes sqrt(eigenvalues) (ascending) and the minor axis
// direction measured from the amplitude axis, folded into (-pi/2, pi/2].
struct WignerContour {
  std::array<double, 2> semi_axes{};
  double angle = 0.0;
};

inline WignerContour wigner_contour(const GaussianState<double>& s, int mode = 0) {
  if (mode < 0 || mode >= s.modes()) throw std::invalid_argument("wigner_contour: bad mode");
  Eigen::Matrix2d block = s.cov.block<2, 2>(2 * mode, 2 * mode);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(block);
  const auto& vals = es.eigenvalues();  // ascending
  const auto v0 = es.eigenvectors().col(0);
  double angle = std::atan2(v0(1), v0(0));
  if (angle <= -M_PI / 2.0) angle += M_PI;
  if (angle > M_PI / 2.0) angle -= M_PI;
  return WignerContour{{std::sqrt(vals(0)), std::sqrt(vals(1))}, angle};
}

struct StructureMetrics {
  AccessStructure structure = AccessStructure::s12;
  double g_plus = 0.0;
  double g_minus = 0.0;
  double gain_product = 0.0;
  double v_out_plus = 0.0;
  double v_out_minus = 0.0;
  double fidelity = 0.0;
  double transfer = 0.0;
  ConditionalVariances conditional;
};

inline StructureMetrics build_metrics(const ReconstructionResult& r) {
  StructureMetrics m;
  m.structure = r.structure;
  m.g_plus = r.g_plus;
  m.g_minus = r.g_minus;
  m.gain_product = r.g_plus * r.g_minus;
  m.v_out_plus = r.out_state.var_of({0, Quad::amplitude});
  m.v_out_minus = r.out_state.var_of({0, Quad::phase});
  m.fidelity = coherent_fidelity(r);
  m.transfer = signal_transfer(r);
  m.conditional = reconstruction_noise(r);
  return m;
}

}  // namespace qss
