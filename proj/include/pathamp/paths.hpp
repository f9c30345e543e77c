#pragma once

// Feynman path amplitudes for chains of accurate measurements.
//
// A chain starts from the state selected by the first measurement and lists
// the later measurements as (observable, propagator) steps, where the
// propagator carries the system from the previous measurement time to this
// one. Intermediate degeneracy classes interfere (amplitudes add); the last
// step never interferes (probabilities add).

#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "pathamp/qcore.hpp"

namespace pathamp::paths {

struct Step {
  qcore::Observable observable;
  qcore::Unitary propagator;
};

class MeasurementChain {
 public:
  MeasurementChain(qcore::QuantumState preparation, std::vector<Step> steps);

  const qcore::QuantumState& preparation() const { return preparation_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t dimension() const { return preparation_.dimension(); }
  // Number of measurements after the preparation (L - 1).
  std::size_t step_count() const { return steps_.size(); }

  // The same chain without its last measurement. Requires two or more steps.
  MeasurementChain truncated() const;

 private:
  qcore::QuantumState preparation_;
  std::vector<Step> steps_;
};

using PathIndex = std::vector<std::size_t>;

// Dense table of amplitudes indexed by (i_2, ..., i_L), row-major with the
// last step varying fastest.
class PathAmplitudeTable {
 public:
  PathAmplitudeTable(std::size_t dimension, std::size_t steps, std::vector<Complex> values);

  std::size_t dimension() const { return dimension_; }
  std::size_t steps() const { return steps_; }
  std::size_t size() const { return values_.size(); }

  Complex at(std::span<const std::size_t> path) const;
  Complex at_flat(std::size_t flat) const { return values_.at(flat); }
  PathIndex decode(std::size_t flat) const;
  std::size_t encode(std::span<const std::size_t> path) const;

  // Sum over all paths of |A|^2.
  double total_probability() const;

 private:
  std::size_t dimension_;
  std::size_t steps_;
  std::vector<Complex> values_;
};

// Probabilities keyed by degeneracy-class index per step.
struct OutcomeDistribution {
  // class_eigenvalues[step][class] is the eigenvalue shared by the class.
  std::vector<std::vector<double>> class_eigenvalues;
  std::map<std::vector<std::size_t>, double> probabilities;

  std::size_t steps() const { return class_eigenvalues.size(); }
  double total() const;
  double at(const std::vector<std::size_t>& classes) const;
  std::vector<double> eigenvalues_of(const std::vector<std::size_t>& classes) const;
};

// The N amplitudes A(d <- c_j <- b) of a single pre/post-selection.
struct PathAmplitudeSet {
  CVector values;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  Complex operator[](std::size_t j) const { return values(static_cast<Eigen::Index>(j)); }
  Complex sum() const { return values.sum(); }
};

// Three-measurement system: prepare b, evolve with `to_measurement`,
// measure `measured`, evolve with `to_final`, post-select on `final_state`.
struct PrePostSystem {
  qcore::Unitary to_measurement;
  qcore::Observable measured;
  qcore::Unitary to_final;
  qcore::QuantumState final_state;

  std::size_t dimension() const { return measured.dimension(); }
  PathAmplitudeSet amplitudes(const qcore::QuantumState& preparation) const;
  // <c_j|U_1|b> (no post-selection).
  CVector one_step_amplitudes(const qcore::QuantumState& preparation) const;
  // |d(t')> = U_2^dagger |d>.
  qcore::QuantumState final_state_at_measurement() const;
};

// <to| U |from>
Complex transition_amplitude(const qcore::QuantumState& from, const qcore::QuantumState& to,
                             const qcore::Unitary& u);

Complex path_amplitude(const MeasurementChain& chain, std::span<const std::size_t> path);

PathAmplitudeTable path_amplitudes(const MeasurementChain& chain);

OutcomeDistribution outcome_distribution(const MeasurementChain& chain);

OutcomeDistribution marginalize_last(const OutcomeDistribution& dist);

// p[C_j] for a two-step chain post-selected on eigenvector `final_index` of
// the last observable (its whole degeneracy class when it is degenerate).
std::vector<double> postselected_distribution(const MeasurementChain& chain,
                                              std::size_t final_index);

}  // namespace pathamp::paths
