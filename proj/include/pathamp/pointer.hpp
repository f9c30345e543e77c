#pragma once

// Von Neumann pointer with a Gaussian initial state.
//
// The pointer is translated by the eigenvalue C_j on path j, so its
// wavefunction after the impulsive coupling is sum_j A_j G(f - C_j), with
//
//   G(f) = (pi df^2)^(-1/4) exp(-f^2 / (2 df^2)),   int G^2 df = 1.
//
// Momentum amplitudes use <f|lambda> = exp(i lambda f) / sqrt(2 pi). Under
// that convention the weak-limit mean momentum for a projector is
// +Im(alpha_n) / df^2.

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "pathamp/paths.hpp"
#include "pathamp/qcore.hpp"

namespace pathamp::pointer {

using paths::PathAmplitudeSet;

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr std::size_t kDefaultGridPoints = 4096;
inline constexpr std::size_t kMinGridPoints = 512;
// Grid margin beyond the eigenvalue range, in units of df.
inline constexpr double kGridMargin = 6.0;

struct Interval {
  double lower = -kInf;
  double upper = kInf;
};

// Uniform grid of `points` abscissae from `lower` to `upper` inclusive.
struct Grid {
  double lower = 0.0;
  double upper = 0.0;
  std::size_t points = 0;

  double spacing() const { return (upper - lower) / static_cast<double>(points - 1); }
  double at(std::size_t i) const;
  bool operator==(const Grid&) const = default;
};

class PointerConfig {
 public:
  PointerConfig(double delta_f, std::vector<double> eigenvalues, Grid grid);

  // Grid spanning [min C - 6 df, max C + 6 df].
  static PointerConfig with_default_grid(double delta_f, std::vector<double> eigenvalues,
                                         std::size_t points = kDefaultGridPoints);

  double delta_f() const { return delta_f_; }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  const Grid& grid() const { return grid_; }
  std::size_t dimension() const { return eigenvalues_.size(); }
  double eigenvalue(std::size_t j) const { return eigenvalues_.at(j); }
  double min_eigenvalue() const;
  double max_eigenvalue() const;

  // Same eigenvalues and grid resolution, new width, default grid.
  PointerConfig with_delta_f(double delta_f) const;

 private:
  double delta_f_;
  std::vector<double> eigenvalues_;
  Grid grid_;
};

// Tabulated density with a normalized cumulative table for sampling.
class ReadingDensity {
 public:
  ReadingDensity(Grid grid, std::vector<double> values);

  const Grid& grid() const { return grid_; }
  double abscissa(std::size_t i) const { return grid_.at(i); }
  const std::vector<double>& values() const { return values_; }
  // cdf()[i] is the trapezoid mass of [lower, x_i] divided by the total;
  // cdf().back() == 1.
  const std::vector<double>& cdf() const { return cdf_; }
  std::size_t size() const { return values_.size(); }

  double integral() const { return total_; }
  double mean() const;
  double min_value() const;
  // Inverse of the piecewise-linear cdf, u in [0, 1).
  double quantile(double u) const;
  // Value at f by linear interpolation, 0 outside the grid.
  double value_at(double f) const;

 private:
  Grid grid_;
  std::vector<double> values_;
  std::vector<double> cdf_;
  double total_;
};

// X_{jk} = Re[conj(A_k) A_j] of renormalized amplitudes.
struct GramMatrix {
  RMatrix x;

  static GramMatrix from_amplitudes(const CVector& amplitudes);

  std::size_t dimension() const { return static_cast<std::size_t>(x.rows()); }
  // max over (j, k) of |X_jk| - sqrt(X_jj X_kk); <= 0 when feasible.
  double cauchy_schwarz_violation() const;
  // sum_{jk} X_jk I^full_jk, 1 for correctly renormalized amplitudes.
  double normalization(const PointerConfig& config) const;
};

double gaussian_value(double delta_f, double x);

// G(f - C_j).
double gaussian(const PointerConfig& config, double f, std::size_t j);

// int_interval G(f - C_j) G(f - C_k) df, closed form (error functions).
double overlap(double delta_f, double cj, double ck, Interval interval);
RMatrix overlap_integrals(const PointerConfig& config, Interval interval);

// Arrival (post-selection) probability N^2 = sum_{jk} I^full_jk conj(A_k) A_j.
double arrival_probability(const PathAmplitudeSet& amps, const PointerConfig& config);

// A_j / N; throws PostselectionError when N^2 vanishes.
CVector renormalized(const PathAmplitudeSet& amps, const PointerConfig& config);

ReadingDensity reading_density(const PathAmplitudeSet& amps, const PointerConfig& config);

// sum_{jk} X_jk G_j G_k, divided by the Gram normalization.
ReadingDensity density_from_gram(const GramMatrix& gram, const PointerConfig& config);

// |sum_j G_j(f) A_j|^2 on the grid, without renormalization (integrates to N^2).
std::vector<double> joint_density_values(const PathAmplitudeSet& amps, const PointerConfig& config);

enum class Conditioning { joint, postselected };

// Probability that the reading lies in `interval`: joint with the arrival
// (unnormalized), or conditional on arrival.
double interval_probability(const PathAmplitudeSet& amps, const PointerConfig& config,
                            Interval interval, Conditioning conditioning);

struct ArrivalLimits {
  double strong;  // df -> 0: sum over degeneracy classes of |sum A|^2
  double weak;    // df -> inf: |sum_j A_j|^2
};

ArrivalLimits arrival_limits(const PathAmplitudeSet& amps, std::span<const double> eigenvalues);

std::vector<double> arrival_curve(const PathAmplitudeSet& amps, std::span<const double> eigenvalues,
                                  std::span<const double> delta_fs);

struct StrongLimitStats {
  std::vector<std::vector<std::size_t>> classes;
  std::vector<double> class_eigenvalues;
  std::vector<double> masses;  // point mass at each class eigenvalue
  double mean;                 // degenerate classes merged coherently
  double incoherent_mean;      // sum C_j |A_j|^2 / sum |A_j|^2
};

StrongLimitStats strong_limit_stats(const PathAmplitudeSet& amps, std::span<const double> eigenvalues);

struct WeakLimitStats {
  CVector alpha;         // A_j / sum A
  double mean_reading;   // Re sum C_j alpha_j
  double mean_momentum;  // Im sum C_j alpha_j / df^2
};

WeakLimitStats weak_limit_stats(const PathAmplitudeSet& amps, std::span<const double> eigenvalues,
                                double delta_f);

// Exact (finite df) first moments of the post-selected reading and
// momentum distributions.
double exact_mean_reading(const PathAmplitudeSet& amps, const PointerConfig& config);
double exact_mean_momentum(const PathAmplitudeSet& amps, const PointerConfig& config);

// Density of the pointer momentum after post-selection; the lambda grid
// spans +-8/df and resolves the interference between eigenvalues.
ReadingDensity momentum_density(const PathAmplitudeSet& amps, const PointerConfig& config);

// sum_j G_j^2 |A(c_j <- b)|^2 : reading density without post-selection.
ReadingDensity unconditional_density(const CVector& one_step_amps, const PointerConfig& config);

// sum_j C_j |A(c_j <- b)|^2, the mean of the unconditional density at any df.
double unconditional_mean(const CVector& one_step_amps, std::span<const double> eigenvalues);

// State after a reading f: coefficients proportional to G(f - C_j) <c_j|psi>.
qcore::QuantumState post_measurement_state(const qcore::QuantumState& state,
                                           const qcore::Observable& measured, double delta_f,
                                           double reading);

struct MixedReading {
  ReadingDensity density;
  std::vector<double> component_weights;  // w_a N_a^2 / sum w N^2
  double mean;         // exact mean at the configured df
  double strong_mean;  // df -> 0 limit
  double weak_mean;    // df -> inf limit; NaN when the weak arrival vanishes
};

MixedReading mixed_reading_density(const qcore::MixedState& mixed,
                                   const paths::PrePostSystem& system,
                                   const PointerConfig& config);

}  // namespace pathamp::pointer
