#pragma once

// Frozen oracle values (tests/oracle/fig4_fixtures.py: explicit 2x2 matrix
// products and adaptive quadrature, independent of this library) and the
// systems they describe.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "pathamp/inverse.hpp"
#include "pathamp/paths.hpp"
#include "pathamp/pointer.hpp"
#include "pathamp/qcore.hpp"

namespace fixtures {

using pathamp::CMatrix;
using pathamp::Complex;
using pathamp::CVector;

namespace fig4 {

inline const Complex kAmplitude1{0.093975987422079438, -0.2035339018848443};
inline const Complex kAmplitude2{0.034229140783048818, -0.77082507247412968};
inline constexpr double kArrival = 0.76339969099172811;
inline const Complex kTilde1{0.10755755164002796, -0.23294895603653049};
inline const Complex kTilde2{0.039175992488710752, -0.88222597934188285};
inline constexpr double kMasses[3] = {0.69737568297551977, 0.24752482695139261, 0.055099490073087717};
inline constexpr double kModuli[2] = {0.25658106522755475, 0.88309537254660087};
inline constexpr double kPhaseAcos = 0.38818200185899643;
inline const Complex kEvolved1{0.35078805441450578, 0.25679467851965437};
inline const Complex kEvolved2{0.89769224396719549, 0.071783487552597391};

inline constexpr double kDeltaF = 1.0;
inline const std::vector<double> kEigenvalues{1.0, -1.0};
inline const std::vector<double> kBoundaries{-0.33, 0.9};

}  // namespace fig4

inline CMatrix sigma_x() {
  CMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}

// cos(a) I - i sin(a) sigma_x
inline pathamp::qcore::Unitary rotation(double a) {
  return pathamp::qcore::Unitary(CMatrix(std::cos(a) * CMatrix::Identity(2, 2) -
                                         Complex(0.0, std::sin(a)) * sigma_x()));
}

inline pathamp::qcore::QuantumState fig4_preparation() {
  return pathamp::qcore::QuantumState{Complex(1, 8), Complex(2, 3)};
}

inline pathamp::qcore::QuantumState fig4_final() {
  return pathamp::qcore::QuantumState{Complex(3, 4), Complex(2, 7)};
}

inline pathamp::paths::PrePostSystem fig4_system() {
  return {rotation(std::numbers::pi / 3), pathamp::qcore::Observable::diagonal(fig4::kEigenvalues),
          rotation(std::numbers::pi / 6), fig4_final()};
}

inline pathamp::paths::PathAmplitudeSet fig4_amplitudes() {
  return fig4_system().amplitudes(fig4_preparation());
}

inline pathamp::pointer::PointerConfig fig4_pointer(double delta_f = fig4::kDeltaF) {
  return pathamp::pointer::PointerConfig::with_default_grid(delta_f, fig4::kEigenvalues);
}

inline CVector random_vector(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> g;
  CVector v(static_cast<Eigen::Index>(n));
  for (auto& x : v) x = Complex(g(rng), g(rng));
  return v;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, std::size_t n) {
  CMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) = random_vector(rng, n);
  return (a + a.adjoint()) / 2.0;
}

inline pathamp::qcore::Unitary random_unitary(std::mt19937_64& rng, std::size_t n) {
  CMatrix a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) = random_vector(rng, n);
  Eigen::HouseholderQR<CMatrix> qr(a);
  return pathamp::qcore::Unitary(CMatrix(qr.householderQ()));
}

// Post-selected reading density at f, evaluated directly from the
// renormalized amplitudes rather than from a tabulated grid.
inline double density_at(const pathamp::paths::PathAmplitudeSet& amps,
                         const pathamp::pointer::PointerConfig& config, double f) {
  const CVector a = pathamp::pointer::renormalized(amps, config);
  Complex s = 0.0;
  for (std::size_t j = 0; j < config.dimension(); ++j) {
    s += pathamp::pointer::gaussian(config, f, j) * a(static_cast<Eigen::Index>(j));
  }
  return std::norm(s);
}

struct RoundTrip {
  double error;     // largest pointwise density difference
  double delta_f;
  int redraws;      // spectra rejected for having no full-rank width
};

// Width maximizing sigma_min / sigma_max of the pointwise design, scanned
// over [0.1, 1] x eigenvalue span.
inline double best_width(const std::vector<double>& c, std::size_t probes) {
  const auto [lo, hi] = std::minmax_element(c.begin(), c.end());
  const double span = *hi - *lo;
  double best = 0.0, width = span;
  for (int i = 0; i <= 60; ++i) {
    const double df = span * std::pow(10.0, -1.0 + i / 60.0);
    const auto config = pathamp::pointer::PointerConfig::with_default_grid(df, c);
    const auto cond = pathamp::inverse::conditioning(
        pathamp::inverse::pointwise_design(config, pathamp::inverse::default_probes(config, probes)));
    if (cond.sigma_min / cond.sigma_max > best) {
      best = cond.sigma_min / cond.sigma_max;
      width = df;
    }
  }
  return width;
}

// Forward density -> pointwise solve -> amplitudes -> forward density for a
// random instance. Eigenvalues are j + U(-0.2, 0.2); spectra where two pairs
// nearly share a midpoint have no full-rank width and are redrawn.
inline RoundTrip round_trip(std::mt19937_64& rng, std::size_t n) {
  namespace inv = pathamp::inverse;
  std::uniform_real_distribution<double> jitter(-0.2, 0.2);
  const std::size_t m = 4 * inv::unknown_count(n);
  int redraws = 0;
  for (;;) {
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = static_cast<double>(j) + jitter(rng);
    const auto config = pathamp::pointer::PointerConfig::with_default_grid(best_width(c, m), c);
    const auto probes = inv::default_probes(config, m);
    if (inv::conditioning(inv::pointwise_design(config, probes)).rank < inv::unknown_count(n)) {
      ++redraws;
      continue;
    }
    const pathamp::paths::PathAmplitudeSet amps{random_vector(rng, n)};
    std::vector<double> rho;
    for (double f : probes) rho.push_back(density_at(amps, config, f));
    const auto solution = inv::solve_pointwise(rho, probes, config);
    const pathamp::paths::PathAmplitudeSet rebuilt{inv::amplitudes_from_gram(solution.gram).principal()};

    double worst = 0.0;
    const auto& grid = config.grid();
    for (std::size_t i = 0; i < grid.points; i += 2) {
      const double f = grid.at(i);
      worst = std::max(worst, std::abs(density_at(amps, config, f) - density_at(rebuilt, config, f)));
    }
    return {worst, config.delta_f(), redraws};
  }
}

// Final state making the first two paths cancel: with beta_j = <c_j|U1|b>
// and |d> = U2 (conj(beta_2) c_1 - conj(beta_1) c_2 + rest), A_1 = -A_2.
inline pathamp::qcore::QuantumState cancelling_final(const pathamp::qcore::QuantumState& b,
                                                     const pathamp::qcore::Unitary& u1,
                                                     const pathamp::qcore::Unitary& u2, std::size_t first,
                                                     std::size_t second, Complex rest = 1.0) {
  const CVector beta = u1.matrix() * b.coefficients();
  CVector delta = CVector::Constant(beta.size(), rest);
  delta(static_cast<Eigen::Index>(first)) = std::conj(beta(static_cast<Eigen::Index>(second)));
  delta(static_cast<Eigen::Index>(second)) = -std::conj(beta(static_cast<Eigen::Index>(first)));
  return pathamp::qcore::QuantumState(u2.matrix() * delta);
}

}  // namespace fixtures
