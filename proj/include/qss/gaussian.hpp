#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "qss/errors.hpp"

// Gaussian states over N optical modes in quadrature form.
//
// Conventions:
//  * quadratures interleaved per mode: (X+_0, X-_0, X+_1, X-_1, ...)
//  * vacuum variance is 1 (quantum noise limit), so a physical covariance
//    satisfies cov + i*Omega >= 0, i.e. all symplectic eigenvalues >= 1
//  * X+ is the amplitude quadrature, X- the phase quadrature

namespace qss {

enum class Quad { amplitude = 0, phase = 1 };

struct QuadratureIndex {
  int mode = 0;
  Quad quad = Quad::amplitude;
  constexpr int flat() const { return 2 * mode + static_cast<int>(quad); }
};

// An amplitude- or phase-squeezed single-mode resource. The squeezed
// variance is 10^(squeezing_db/10); the anti-squeezed variance is
// excess_factor / squeezed variance (excess_factor = 1 is a pure state).
struct SqueezerSpec {
  double squeezing_db = 0.0;
  double excess_factor = 1.0;

  double squeezed_var() const { return std::pow(10.0, squeezing_db / 10.0); }
  double antisqueezed_var() const { return excess_factor / squeezed_var(); }
};

template <class Scalar = double>
struct GaussianState {
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vec mean;
  Mat cov;

  int modes() const { return static_cast<int>(mean.size()) / 2; }

  Scalar mean_of(QuadratureIndex q) const { return mean(q.flat()); }
  Scalar var_of(QuadratureIndex q) const { return cov(q.flat(), q.flat()); }
};

namespace detail {

inline constexpr double kCovTol = 1e-9;

template <class Scalar>
Eigen::Matrix<Scalar, 2, 2> rot2(Scalar phi) {
  Eigen::Matrix<Scalar, 2, 2> r;
  using std::cos;
  using std::sin;
  r << cos(phi), -sin(phi), sin(phi), cos(phi);
  return r;
}

// Block-diagonal symplectic form, [[0,1],[-1,0]] per mode.
template <class Scalar>
typename GaussianState<Scalar>::Mat symplectic_form(int n_modes) {
  typename GaussianState<Scalar>::Mat omega =
      GaussianState<Scalar>::Mat::Zero(2 * n_modes, 2 * n_modes);
  for (int m = 0; m < n_modes; ++m) {
    omega(2 * m, 2 * m + 1) = Scalar(1);
    omega(2 * m + 1, 2 * m) = Scalar(-1);
  }
  return omega;
}

template <class Scalar>
using Promote =
    std::conditional_t<std::is_floating_point_v<Scalar> &&
                           (sizeof(Scalar) < sizeof(long double)),
                       long double, Scalar>;

// m * cov * m^T with the products accumulated in extended precision. The
// surviving entries of a congruence can be many orders of magnitude below
// the antisqueezed entries that cancel inside it, so working-precision
// accumulation would contaminate them with the large-entry rounding noise.
template <class DerivedM, class DerivedC>
Eigen::Matrix<typename DerivedM::Scalar, Eigen::Dynamic, Eigen::Dynamic> congruence(
    const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedC>& cov) {
  using Scalar = typename DerivedM::Scalar;
  using Wide = Promote<Scalar>;
  using WideMat = Eigen::Matrix<Wide, Eigen::Dynamic, Eigen::Dynamic>;
  const WideMat mw = m.template cast<Wide>();
  const WideMat out = mw * cov.template cast<Wide>() * mw.transpose();
  return out.template cast<Scalar>();
}

}  // namespace detail

// Checked constructor used by every operation: symmetrizes, then verifies
// the uncertainty relation cov + i*Omega >= -tol (which implies cov is PSD).
template <class Scalar = double>
GaussianState<Scalar> make_state(typename GaussianState<Scalar>::Vec mean,
                                 typename GaussianState<Scalar>::Mat cov) {
  const auto dim = mean.size();
  if (dim <= 0 || dim % 2 != 0 || cov.rows() != dim || cov.cols() != dim) {
    throw std::invalid_argument("gaussian state needs a 2N mean and 2Nx2N covariance");
  }
  // Tolerances scale with the matrix so strongly squeezed states (entries of
  // order 1e6) are not rejected for ordinary floating point error.
  const Scalar scale = std::max<Scalar>(Scalar(1), cov.template lpNorm<Eigen::Infinity>());
  const Scalar tol = Scalar(detail::kCovTol) * scale;
  const Scalar asym = (cov - cov.transpose()).template lpNorm<Eigen::Infinity>();
  if (!(asym <= tol)) {
    throw PhysicalityError("covariance asymmetry " + std::to_string(double(asym)));
  }
  cov = ((cov + cov.transpose()) / Scalar(2)).eval();

  using Cplx = std::complex<Scalar>;
  using CMat = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;
  CMat h = cov.template cast<Cplx>();
  const int n_modes = static_cast<int>(dim) / 2;
  for (int m = 0; m < n_modes; ++m) {
    h(2 * m, 2 * m + 1) += Cplx(0, 1);
    h(2 * m + 1, 2 * m) += Cplx(0, -1);
  }
  Eigen::SelfAdjointEigenSolver<CMat> es(h, Eigen::EigenvaluesOnly);
  const Scalar min_eig = es.eigenvalues().minCoeff();
  if (!(min_eig >= -tol)) {
    throw PhysicalityError("uncertainty relation violated, min eig(cov + i*Omega) = " +
                           std::to_string(double(min_eig)));
  }
  return GaussianState<Scalar>{std::move(mean), std::move(cov)};
}

template <class Scalar = double>
GaussianState<Scalar> vacuum(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("vacuum needs at least one mode");
  return make_state<Scalar>(GaussianState<Scalar>::Vec::Zero(2 * n_modes),
                            GaussianState<Scalar>::Mat::Identity(2 * n_modes, 2 * n_modes));
}

template <class Scalar = double>
GaussianState<Scalar> coherent(Scalar amp_plus, Scalar amp_minus) {
  typename GaussianState<Scalar>::Vec mean(2);
  mean << amp_plus, amp_minus;
  return make_state<Scalar>(mean, GaussianState<Scalar>::Mat::Identity(2, 2));
}

template <class Scalar = double>
GaussianState<Scalar> squeezed(const SqueezerSpec& spec, Quad squeezed_quad = Quad::amplitude) {
  if (spec.squeezing_db > 0.0) {
    throw std::invalid_argument("squeezing_db must be <= 0");
  }
  if (spec.excess_factor < 1.0) {
    throw std::invalid_argument("excess_factor must be >= 1");
  }
  typename GaussianState<Scalar>::Mat cov = GaussianState<Scalar>::Mat::Zero(2, 2);
  const Scalar v_sqz = Scalar(spec.squeezed_var());
  const Scalar v_anti = Scalar(spec.antisqueezed_var());
  if (squeezed_quad == Quad::amplitude) {
    cov(0, 0) = v_sqz;
    cov(1, 1) = v_anti;
  } else {
    cov(0, 0) = v_anti;
    cov(1, 1) = v_sqz;
  }
  return make_state<Scalar>(GaussianState<Scalar>::Vec::Zero(2), cov);
}

// Block-diagonal composition: modes of `a` first, then modes of `b`.
template <class Scalar>
GaussianState<Scalar> tensor(const GaussianState<Scalar>& a, const GaussianState<Scalar>& b) {
  const auto na = a.mean.size(), nb = b.mean.size();
  typename GaussianState<Scalar>::Vec mean(na + nb);
  mean << a.mean, b.mean;
  typename GaussianState<Scalar>::Mat cov =
      GaussianState<Scalar>::Mat::Zero(na + nb, na + nb);
  cov.topLeftCorner(na, na) = a.cov;
  cov.bottomRightCorner(nb, nb) = b.cov;
  return make_state<Scalar>(std::move(mean), std::move(cov));
}

template <class Scalar>
GaussianState<Scalar> displace(const GaussianState<Scalar>& s,
                               const typename GaussianState<Scalar>::Vec& shift) {
  if (shift.size() != s.mean.size()) {
    throw std::invalid_argument("displacement size mismatch");
  }
  return make_state<Scalar>(s.mean + shift, s.cov);
}

template <class Scalar>
GaussianState<Scalar> phase_shift(const GaussianState<Scalar>& s, int mode, Scalar angle) {
  if (mode < 0 || mode >= s.modes()) throw std::invalid_argument("phase_shift: bad mode");
  typename GaussianState<Scalar>::Mat m =
      GaussianState<Scalar>::Mat::Identity(s.mean.size(), s.mean.size());
  m.template block<2, 2>(2 * mode, 2 * mode) = detail::rot2<Scalar>(angle);
  return make_state<Scalar>((m * s.mean).eval(), detail::congruence(m, s.cov));
}

// Two-port beam splitter with reflectivity r and relative phase `phase` on
// input j:   a_i' = sqrt(r) a_i + sqrt(1-r) e^{i phase} a_j
//            a_j' = sqrt(1-r) a_i - sqrt(r) e^{i phase} a_j
template <class Scalar>
GaussianState<Scalar> beam_splitter(const GaussianState<Scalar>& s, int i, int j, Scalar r,
                                    Scalar phase) {
  if (i == j || i < 0 || j < 0 || i >= s.modes() || j >= s.modes()) {
    throw std::invalid_argument("beam_splitter: bad mode pair");
  }
  if (!(r >= Scalar(0) && r <= Scalar(1))) {
    throw std::invalid_argument("beam_splitter: reflectivity outside [0,1]");
  }
  using std::sqrt;
  const Scalar t = sqrt(Scalar(1) - r);
  const Scalar c = sqrt(r);
  const Eigen::Matrix<Scalar, 2, 2> rp = detail::rot2<Scalar>(phase);
  typename GaussianState<Scalar>::Mat m =
      GaussianState<Scalar>::Mat::Identity(s.mean.size(), s.mean.size());
  m.template block<2, 2>(2 * i, 2 * i) = c * Eigen::Matrix<Scalar, 2, 2>::Identity();
  m.template block<2, 2>(2 * i, 2 * j) = t * rp;
  m.template block<2, 2>(2 * j, 2 * i) = t * Eigen::Matrix<Scalar, 2, 2>::Identity();
  m.template block<2, 2>(2 * j, 2 * j) = -c * rp;
  return make_state<Scalar>((m * s.mean).eval(), detail::congruence(m, s.cov));
}

// Mixes one mode with vacuum through transmission efficiency eta.
template <class Scalar>
GaussianState<Scalar> loss_channel(const GaussianState<Scalar>& s, int mode, Scalar eta) {
  if (mode < 0 || mode >= s.modes()) throw std::invalid_argument("loss_channel: bad mode");
  if (!(eta >= Scalar(0) && eta <= Scalar(1))) {
    throw std::invalid_argument("loss_channel: efficiency outside [0,1]");
  }
  using std::sqrt;
  const Scalar root = sqrt(eta);
  typename GaussianState<Scalar>::Vec mean = s.mean;
  typename GaussianState<Scalar>::Mat cov = s.cov;
  const int k = 2 * mode;
  mean.template segment<2>(k) *= root;
  cov.middleRows(k, 2) *= root;
  cov.middleCols(k, 2) *= root;
  cov.template block<2, 2>(k, k) += (Scalar(1) - eta) * Eigen::Matrix<Scalar, 2, 2>::Identity();
  return make_state<Scalar>(std::move(mean), std::move(cov));
}

// Adds zero-mean classical (PSD) noise to the covariance.
template <class Scalar>
GaussianState<Scalar> add_classical_noise(const GaussianState<Scalar>& s,
                                          const typename GaussianState<Scalar>::Mat& noise_cov) {
  if (noise_cov.rows() != s.mean.size() || noise_cov.cols() != s.mean.size()) {
    throw std::invalid_argument("add_classical_noise: size mismatch");
  }
  const Scalar asym = (noise_cov - noise_cov.transpose()).template lpNorm<Eigen::Infinity>();
  if (!(asym <= Scalar(detail::kCovTol))) {
    throw std::invalid_argument("add_classical_noise: noise covariance not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<typename GaussianState<Scalar>::Mat> es(noise_cov,
                                                                        Eigen::EigenvaluesOnly);
  if (!(es.eigenvalues().minCoeff() >= Scalar(-detail::kCovTol))) {
    throw std::invalid_argument("add_classical_noise: noise covariance not PSD");
  }
  return make_state<Scalar>(s.mean, (s.cov + noise_cov).eval());
}

// Keeps the listed modes, in the order given (so this can also reorder).
template <class Scalar>
GaussianState<Scalar> partial_trace(const GaussianState<Scalar>& s, const std::vector<int>& keep) {
  if (keep.empty()) throw std::invalid_argument("partial_trace: empty keep list");
  std::vector<int> seen;
  for (int m : keep) {
    if (m < 0 || m >= s.modes()) throw std::invalid_argument("partial_trace: bad mode index");
    if (std::find(seen.begin(), seen.end(), m) != seen.end()) {
      throw std::invalid_argument("partial_trace: duplicate mode index");
    }
    seen.push_back(m);
  }
  const int n = static_cast<int>(keep.size());
  typename GaussianState<Scalar>::Vec mean(2 * n);
  typename GaussianState<Scalar>::Mat cov(2 * n, 2 * n);
  for (int a = 0; a < n; ++a) {
    mean.template segment<2>(2 * a) = s.mean.template segment<2>(2 * keep[a]);
    for (int b = 0; b < n; ++b) {
      cov.template block<2, 2>(2 * a, 2 * b) =
          s.cov.template block<2, 2>(2 * keep[a], 2 * keep[b]);
    }
  }
  return make_state<Scalar>(std::move(mean), std::move(cov));
}

template <class Scalar>
struct HomodyneConditioning {
  GaussianState<Scalar> remaining;  // unmeasured modes, prior mean
  // Conditional mean shift per unit of (outcome - outcome mean).
  typename GaussianState<Scalar>::Vec outcome_to_mean;
  Scalar outcome_variance;
};

// Conditions the unmeasured modes on a homodyne measurement of one
// quadrature. The measured mode is removed; the conditional covariance is
// the Schur complement. A (near) deterministic outcome contributes nothing,
// so variances below 1e-12 disable the conditioning term instead of dividing.
template <class Scalar>
HomodyneConditioning<Scalar> homodyne_condition(const GaussianState<Scalar>& s,
                                                QuadratureIndex measured) {
  if (measured.mode < 0 || measured.mode >= s.modes()) {
    throw std::invalid_argument("homodyne_condition: bad mode");
  }
  if (s.modes() < 2) {
    throw std::invalid_argument("homodyne_condition: nothing would remain");
  }
  std::vector<int> keep;
  for (int m = 0; m < s.modes(); ++m) {
    if (m != measured.mode) keep.push_back(m);
  }
  const int d = measured.flat();
  const int nk = 2 * static_cast<int>(keep.size());
  typename GaussianState<Scalar>::Vec cross(nk);
  for (int a = 0; a < static_cast<int>(keep.size()); ++a) {
    cross(2 * a) = s.cov(2 * keep[a], d);
    cross(2 * a + 1) = s.cov(2 * keep[a] + 1, d);
  }
  const Scalar sigma = s.cov(d, d);
  GaussianState<Scalar> marginal = partial_trace(s, keep);
  typename GaussianState<Scalar>::Vec gain = GaussianState<Scalar>::Vec::Zero(nk);
  typename GaussianState<Scalar>::Mat cond_cov = marginal.cov;
  if (sigma >= Scalar(1e-12)) {
    gain = cross / sigma;
    cond_cov -= cross * cross.transpose() / sigma;
  }
  return HomodyneConditioning<Scalar>{make_state<Scalar>(marginal.mean, std::move(cond_cov)),
                                      std::move(gain), sigma};
}

// Measures one quadrature through a detector of efficiency eta_d with input
// referred electronic noise variance v_el, and feeds the photocurrent back
// as a displacement of a target quadrature with electronic gain g:
//   i = sqrt(eta_d) X_detect + sqrt(1-eta_d) v + n_el,  X_target += g * i
// The full linear map is applied exactly, then the detected mode is removed.
template <class Scalar>
GaussianState<Scalar> feedforward_displace(const GaussianState<Scalar>& s,
                                           QuadratureIndex detect, QuadratureIndex target,
                                           Scalar g, Scalar eta_d, Scalar v_el) {
  if (detect.mode == target.mode) {
    throw std::invalid_argument("feedforward_displace: detect and target must differ");
  }
  if (detect.mode < 0 || detect.mode >= s.modes() || target.mode < 0 ||
      target.mode >= s.modes()) {
    throw std::invalid_argument("feedforward_displace: bad mode");
  }
  if (!(eta_d > Scalar(0) && eta_d <= Scalar(1))) {
    throw std::invalid_argument("feedforward_displace: efficiency outside (0,1]");
  }
  if (v_el < Scalar(0)) {
    throw std::invalid_argument("feedforward_displace: negative electronic noise");
  }
  using std::sqrt;
  const int t = target.flat();
  const int d = detect.flat();
  typename GaussianState<Scalar>::Mat a =
      GaussianState<Scalar>::Mat::Identity(s.mean.size(), s.mean.size());
  a(t, d) = g * sqrt(eta_d);
  typename GaussianState<Scalar>::Mat cov = detail::congruence(a, s.cov);
  cov(t, t) += g * g * ((Scalar(1) - eta_d) + v_el);
  typename GaussianState<Scalar>::Vec mean = a * s.mean;

  std::vector<int> keep;
  for (int m = 0; m < s.modes(); ++m) {
    if (m != detect.mode) keep.push_back(m);
  }
  // The intermediate map is not symplectic, so build the traced state directly.
  const int n = static_cast<int>(keep.size());
  typename GaussianState<Scalar>::Vec out_mean(2 * n);
  typename GaussianState<Scalar>::Mat out_cov(2 * n, 2 * n);
  for (int x = 0; x < n; ++x) {
    out_mean.template segment<2>(2 * x) = mean.template segment<2>(2 * keep[x]);
    for (int y = 0; y < n; ++y) {
      out_cov.template block<2, 2>(2 * x, 2 * y) =
          cov.template block<2, 2>(2 * keep[x], 2 * keep[y]);
    }
  }
  return make_state<Scalar>(std::move(out_mean), std::move(out_cov));
}

// Symplectic spectrum: moduli of the eigenvalues of Omega * cov, one per
// conjugate pair, ascending. Physical states have every value >= 1.
template <class Scalar>
typename GaussianState<Scalar>::Vec symplectic_eigenvalues(const GaussianState<Scalar>& s) {
  const auto omega = detail::symplectic_form<Scalar>(s.modes());
  Eigen::EigenSolver<typename GaussianState<Scalar>::Mat> es(omega * s.cov, false);
  std::vector<Scalar> mods(static_cast<size_t>(s.mean.size()));
  for (Eigen::Index k = 0; k < s.mean.size(); ++k) {
    mods[static_cast<size_t>(k)] = std::abs(es.eigenvalues()(k));
  }
  std::sort(mods.begin(), mods.end());
  typename GaussianState<Scalar>::Vec nu(s.modes());
  for (int m = 0; m < s.modes(); ++m) nu(m) = mods[static_cast<size_t>(2 * m)];
  return nu;
}

}  // namespace qss
