#include "pathamp/paths.hpp"

#include <string>

#include "pathamp/error.hpp"
#include "pathamp/numeric.hpp"

namespace pathamp::paths {

using qcore::QuantumState;
using qcore::Unitary;

namespace {

constexpr double kImpossiblePostselection = 1e-15;

Complex bracket(const CVector& to, const CMatrix& u, const CVector& from) {
  return to.dot(u * from);
}

}  // namespace

MeasurementChain::MeasurementChain(QuantumState preparation, std::vector<Step> steps)
    : preparation_(std::move(preparation)), steps_(std::move(steps)) {
  if (steps_.empty()) {
    throw InvalidArgument("a measurement chain needs at least one step after the preparation");
  }
  const std::size_t n = preparation_.dimension();
  for (const auto& s : steps_) {
    if (s.observable.dimension() != n) {
      throw DimensionError("chain observable", n, s.observable.dimension());
    }
    if (s.propagator.dimension() != n) {
      throw DimensionError("chain propagator", n, s.propagator.dimension());
    }
  }
}

MeasurementChain MeasurementChain::truncated() const {
  if (steps_.size() < 2) throw InvalidArgument("cannot truncate a one-step chain");
  return MeasurementChain(preparation_, {steps_.begin(), steps_.end() - 1});
}

PathAmplitudeTable::PathAmplitudeTable(std::size_t dimension, std::size_t steps,
                                       std::vector<Complex> values)
    : dimension_(dimension), steps_(steps), values_(std::move(values)) {
  std::size_t expected = 1;
  for (std::size_t s = 0; s < steps_; ++s) expected *= dimension_;
  if (values_.size() != expected) {
    throw DimensionError("path table size", expected, values_.size());
  }
}

std::size_t PathAmplitudeTable::encode(std::span<const std::size_t> path) const {
  if (path.size() != steps_) {
    throw DimensionError("path length", steps_, path.size());
  }
  std::size_t flat = 0;
  for (std::size_t i : path) {
    if (i >= dimension_) {
      throw InvalidArgument("path index " + std::to_string(i) + " out of range");
    }
    flat = flat * dimension_ + i;
  }
  return flat;
}

PathIndex PathAmplitudeTable::decode(std::size_t flat) const {
  PathIndex path(steps_);
  for (std::size_t s = steps_; s-- > 0;) {
    path[s] = flat % dimension_;
    flat /= dimension_;
  }
  return path;
}

Complex PathAmplitudeTable::at(std::span<const std::size_t> path) const {
  return values_[encode(path)];
}

double PathAmplitudeTable::total_probability() const {
  std::vector<double> p(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) p[i] = std::norm(values_[i]);
  return pairwise_sum<double>(p);
}

double OutcomeDistribution::total() const {
  std::vector<double> p;
  p.reserve(probabilities.size());
  for (const auto& [key, value] : probabilities) p.push_back(value);
  return pairwise_sum<double>(p);
}

double OutcomeDistribution::at(const std::vector<std::size_t>& classes) const {
  auto it = probabilities.find(classes);
  return it == probabilities.end() ? 0.0 : it->second;
}

std::vector<double> OutcomeDistribution::eigenvalues_of(
    const std::vector<std::size_t>& classes) const {
  std::vector<double> out;
  for (std::size_t s = 0; s < classes.size(); ++s) out.push_back(class_eigenvalues.at(s).at(classes[s]));
  return out;
}

PathAmplitudeSet PrePostSystem::amplitudes(const QuantumState& preparation) const {
  const std::size_t n = dimension();
  if (preparation.dimension() != n) throw DimensionError("preparation", n, preparation.dimension());
  if (final_state.dimension() != n) throw DimensionError("final state", n, final_state.dimension());
  const CVector at_measurement = to_measurement.matrix() * preparation.coefficients();
  const CVector final_back = to_final.matrix().adjoint() * final_state.coefficients();
  CVector a(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) {
    const CVector c = measured.eigenvector(j);
    a(static_cast<Eigen::Index>(j)) = final_back.dot(c) * c.dot(at_measurement);
  }
  return {std::move(a)};
}

CVector PrePostSystem::one_step_amplitudes(const QuantumState& preparation) const {
  const CVector at_measurement = to_measurement.matrix() * preparation.coefficients();
  return measured.eigenvectors().adjoint() * at_measurement;
}

QuantumState PrePostSystem::final_state_at_measurement() const {
  return QuantumState(to_final.matrix().adjoint() * final_state.coefficients());
}

Complex transition_amplitude(const QuantumState& from, const QuantumState& to, const Unitary& u) {
  if (from.dimension() != u.dimension() || to.dimension() != u.dimension()) {
    throw DimensionError("transition amplitude", u.dimension(),
                         from.dimension() != u.dimension() ? from.dimension() : to.dimension());
  }
  return bracket(to.coefficients(), u.matrix(), from.coefficients());
}

Complex path_amplitude(const MeasurementChain& chain, std::span<const std::size_t> path) {
  if (path.size() != chain.step_count()) {
    throw DimensionError("path length", chain.step_count(), path.size());
  }
  Complex amplitude = 1.0;
  CVector from = chain.preparation().coefficients();
  for (std::size_t s = 0; s < path.size(); ++s) {
    const Step& step = chain.steps()[s];
    if (path[s] >= step.observable.dimension()) {
      throw InvalidArgument("path index " + std::to_string(path[s]) + " out of range at step " +
                            std::to_string(s + 1));
    }
    CVector to = step.observable.eigenvector(path[s]);
    amplitude *= bracket(to, step.propagator.matrix(), from);
    from = std::move(to);
  }
  return amplitude;
}

PathAmplitudeTable path_amplitudes(const MeasurementChain& chain) {
  const std::size_t n = chain.dimension();
  const std::size_t steps = chain.step_count();

  // Transition matrices T_s(i, k) = <v^s_i| U_s |v^{s-1}_k>; step 0 starts
  // from the preparation (a single column).
  std::vector<CMatrix> transitions;
  transitions.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    const Step& step = chain.steps()[s];
    if (s == 0) {
      transitions.push_back(step.observable.eigenvectors().adjoint() * step.propagator.matrix() *
                            chain.preparation().coefficients());
    } else {
      transitions.push_back(step.observable.eigenvectors().adjoint() * step.propagator.matrix() *
                            chain.steps()[s - 1].observable.eigenvectors());
    }
  }

  std::size_t total = 1;
  for (std::size_t s = 0; s < steps; ++s) total *= n;
  std::vector<Complex> values(total);
  PathIndex path(steps, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Complex a = transitions[0](static_cast<Eigen::Index>(path[0]), 0);
    for (std::size_t s = 1; s < steps; ++s) {
      a *= transitions[s](static_cast<Eigen::Index>(path[s]), static_cast<Eigen::Index>(path[s - 1]));
    }
    values[flat] = a;
    for (std::size_t s = steps; s-- > 0;) {
      if (++path[s] < n) break;
      path[s] = 0;
    }
  }
  return PathAmplitudeTable(n, steps, std::move(values));
}

OutcomeDistribution outcome_distribution(const MeasurementChain& chain) {
  const PathAmplitudeTable table = path_amplitudes(chain);
  const std::size_t steps = chain.step_count();

  OutcomeDistribution dist;
  for (const Step& step : chain.steps()) {
    std::vector<double> values;
    for (const auto& cls : step.observable.classes()) {
      values.push_back(step.observable.eigenvalues()(static_cast<Eigen::Index>(cls.front())));
    }
    dist.class_eigenvalues.push_back(std::move(values));
  }

  // Coherent groups: intermediate steps by class, last step by eigenvector.
  std::map<std::vector<std::size_t>, std::vector<Complex>> groups;
  for (std::size_t flat = 0; flat < table.size(); ++flat) {
    PathIndex key = table.decode(flat);
    for (std::size_t s = 0; s + 1 < steps; ++s) {
      key[s] = chain.steps()[s].observable.class_of(key[s]);
    }
    groups[key].push_back(table.at_flat(flat));
  }

  const qcore::Observable& last = chain.steps().back().observable;
  for (auto& [key, amplitudes] : groups) {
    const Complex sum = pairwise_sum<Complex>(amplitudes);
    std::vector<std::size_t> outcome = key;
    outcome.back() = last.class_of(key.back());
    dist.probabilities[outcome] += std::norm(sum);
  }
  return dist;
}

OutcomeDistribution marginalize_last(const OutcomeDistribution& dist) {
  if (dist.steps() < 2) {
    throw InvalidArgument("marginalizing the last measurement needs at least two steps");
  }
  OutcomeDistribution out;
  out.class_eigenvalues.assign(dist.class_eigenvalues.begin(), dist.class_eigenvalues.end() - 1);
  for (const auto& [key, p] : dist.probabilities) {
    out.probabilities[{key.begin(), key.end() - 1}] += p;
  }
  return out;
}

std::vector<double> postselected_distribution(const MeasurementChain& chain,
                                              std::size_t final_index) {
  if (chain.step_count() != 2) {
    throw InvalidArgument("post-selected distribution needs a three-measurement chain");
  }
  const qcore::Observable& middle = chain.steps()[0].observable;
  const qcore::Observable& last = chain.steps()[1].observable;
  if (!middle.nondegenerate()) {
    throw InvalidArgument("post-selected distribution needs a nondegenerate middle observable");
  }
  if (final_index >= last.dimension()) {
    throw InvalidArgument("final index " + std::to_string(final_index) + " out of range");
  }
  const OutcomeDistribution dist = outcome_distribution(chain);
  const std::size_t final_class = last.class_of(final_index);
  const std::size_t n = middle.dimension();
  std::vector<double> p(n);
  for (std::size_t j = 0; j < n; ++j) p[j] = dist.at({middle.class_of(j), final_class});
  const double denominator = pairwise_sum<double>(p);
  if (!(denominator > kImpossiblePostselection)) {
    throw PostselectionError(
        "post-selection impossible: total probability of the final outcome is " +
            std::to_string(denominator),
        denominator);
  }
  for (double& v : p) v /= denominator;
  return p;
}

}  // namespace pathamp::paths
