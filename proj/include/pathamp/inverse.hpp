#pragma once

// Recovering path amplitudes from pointer statistics.
//
// The post-selected reading density is linear in the real Gram matrix
// X_jk = Re[conj(A_k) A_j] of the renormalized amplitudes:
//
//   rho(f) = sum_j G_j^2 X_jj + 2 sum_{k<j} G_j G_k X_jk.
//
// Unknowns are ordered diagonal first (X_00 .. X_{N-1,N-1}), then the pairs
// (k, j) with k < j in lexicographic order: (0,1), (0,2), ..., (1,2), ...

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pathamp/paths.hpp"
#include "pathamp/pointer.hpp"
#include "pathamp/qcore.hpp"
#include "pathamp/sampler.hpp"

namespace pathamp::inverse {

using pointer::GramMatrix;
using pointer::PointerConfig;

// Relative singular-value floor below which a design counts as singular.
inline constexpr double kDefaultRcond = 1e-6;

std::size_t unknown_count(std::size_t n);
// (j, j) for the diagonal unknowns, (k, j) with k < j for the rest.
std::vector<std::pair<std::size_t, std::size_t>> unknown_pairs(std::size_t n);
RVector gram_to_unknowns(const GramMatrix& gram);
GramMatrix unknowns_to_gram(const RVector& x, std::size_t n);

// Which density the rows describe. Without post-selection the cross terms
// never appear, so their columns are identically zero.
enum class History { postselected, one_step };

struct DesignMatrix {
  RMatrix a;  // M x P
  std::size_t dimension = 0;

  std::size_t rows() const { return static_cast<std::size_t>(a.rows()); }
  std::size_t unknowns() const { return static_cast<std::size_t>(a.cols()); }
  // Columns whose entries are all exactly zero.
  std::vector<std::size_t> zero_columns() const;
};

DesignMatrix pointwise_design(const PointerConfig& config, std::span<const double> probes,
                              History history = History::postselected);
DesignMatrix interval_design(const PointerConfig& config, const sampler::IntervalPartition& partition,
                             History history = History::postselected);

// `count` probes equally spaced across [min C - df, max C + df].
std::vector<double> default_probes(const PointerConfig& config, std::size_t count);

// Equal-width cells over [min C - df, max C + df]: `cells` - 1 boundaries.
sampler::IntervalPartition default_partition(const PointerConfig& config, std::size_t cells);

struct Conditioning {
  double abs_det = 0.0;  // |det A| when square, product of singular values otherwise
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  std::size_t rank = 0;  // singular values above rcond * sigma_max
};

Conditioning conditioning(const DesignMatrix& design, double rcond = kDefaultRcond);

struct SolveOptions {
  double rcond = kDefaultRcond;
  // When false, singular directions are dropped (minimum-norm solution)
  // instead of raising RankDeficientError.
  bool enforce_rank = true;
  // Trials behind sampled frequencies; enables covariance propagation.
  std::optional<std::size_t> trials;
};

struct Solution {
  GramMatrix gram;
  Conditioning condition;
  double residual = 0.0;          // ||A x - b|| before feasibility projection
  double clamp_adjustment = 0.0;  // Frobenius size of the feasibility correction
  std::vector<std::string> warnings;
  RMatrix covariance;             // P x P covariance of x; empty without trials
};

// rho(f_mu) at distinct probes -> X.
Solution solve_pointwise(std::span<const double> density_values, std::span<const double> probes,
                         const PointerConfig& config, const SolveOptions& options = {});

// Cell frequencies W -> X (least squares when M > P).
Solution solve_intervals(std::span<const double> frequencies,
                         const sampler::IntervalPartition& partition, const PointerConfig& config,
                         const SolveOptions& options = {});

struct ReconstructionResult {
  std::vector<double> moduli;
  std::vector<double> phases;  // acos branch, [0, pi]; phases[0] = 0
  std::vector<int> phase_signs;
  GramMatrix gram;
  Conditioning condition;
  double residual = 0.0;
  double consistency_residual = 0.0;  // misfit of off-reference entries (N >= 3)
  double normalization_defect = 0.0;  // sum X I^full - 1
  double clamp_adjustment = 0.0;
  std::vector<double> se_moduli;  // empty when no covariance was available
  std::vector<double> se_phases;
  std::vector<std::string> warnings;

  std::size_t dimension() const { return moduli.size(); }
  // |A_j| exp(i s_j phi_j) and its complex conjugate.
  CVector principal() const;
  CVector conjugate() const;
};

ReconstructionResult amplitudes_from_gram(const GramMatrix& gram);
ReconstructionResult amplitudes_from_solution(const Solution& solution, const PointerConfig& config);

nlohmann::json to_json(const ReconstructionResult& result);

// Density for a commuting observable C' (eigenvalue per original
// eigenvector) at width df' built from the same Gram matrix.
pointer::ReadingDensity predict_commuting(const GramMatrix& gram, std::vector<double> new_eigenvalues,
                                          double new_delta_f,
                                          std::size_t grid_points = pointer::kDefaultGridPoints);

// As above for an observable given as a matrix; rejects observables that do
// not share the eigenbasis of `measured`.
pointer::ReadingDensity predict_commuting(const GramMatrix& gram, const qcore::Observable& measured,
                                          const qcore::Observable& candidate, double new_delta_f,
                                          std::size_t grid_points = pointer::kDefaultGridPoints);

// First-order standard error of a predicted density on `config`'s grid.
std::vector<double> prediction_band(const Solution& solution, const PointerConfig& config);

struct WeakInput {
  double mean_reading = 0.0;
  double se_reading = 0.0;
  double mean_momentum = 0.0;
  double se_momentum = 0.0;
};

struct WeakEstimate {
  CVector alpha;
  std::vector<double> se_real;
  std::vector<double> se_imag;
  Complex sum;
  bool consistent = true;
  double cost_factor = 0.0;  // trials must grow as df^2
  std::string cost_note;
};

inline constexpr double kWeakRegimeFactor = 10.0;

// One (mean reading, mean momentum) pair per projector |c_n><c_n| measured
// with pointer width df; `span` is the projector eigenvalue span (1).
WeakEstimate weak_reconstruct(std::span<const WeakInput> estimates, double delta_f, double span = 1.0,
                              double regime_factor = kWeakRegimeFactor);

// Sample mean and its standard error.
struct SampleMoments {
  double mean;
  double standard_error;
};
SampleMoments sample_moments(std::span<const double> values);

struct TomographyResult {
  qcore::QuantumState principal;
  qcore::QuantumState conjugate;
};

inline constexpr double kFinalComponentThreshold = 1e-8;

// <c_j|b(t')> proportional to A_j / <d(t')|c_j>, in the reference basis.
TomographyResult reconstruct_initial_state(const ReconstructionResult& result,
                                           const qcore::QuantumState& final_at_measurement,
                                           const qcore::Observable& measured);

struct SweepRow {
  double delta_f;
  double abs_det;
  double sigma_min;
  double recon_error;  // ||X_est - X_true||_F, NaN when not sampled
  double arrival_prob;
};

struct SweepOptions {
  std::size_t trials = 0;  // 0: diagnostics only
  std::uint64_t seed = 0;
  std::size_t grid_points = pointer::kDefaultGridPoints;
  unsigned workers = 1;
};

std::vector<SweepRow> conditioning_sweep(const paths::PathAmplitudeSet& amps,
                                         const std::vector<double>& eigenvalues,
                                         const sampler::IntervalPartition& partition,
                                         std::span<const double> delta_fs,
                                         const SweepOptions& options = {});

std::vector<double> log_spaced(double lower, double upper, std::size_t points);

}  // namespace pathamp::inverse
