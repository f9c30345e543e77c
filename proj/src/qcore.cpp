#include "pathamp/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pathamp/error.hpp"

namespace pathamp::qcore {

void check_dimension(std::size_t n) {
  if (n < 2) {
    throw InvalidArgument("Hilbert space dimension must be at least 2, got " + std::to_string(n));
  }
  if (n > kMaxDimension) {
    throw InvalidArgument("Hilbert space dimension " + std::to_string(n) +
                          " exceeds the configured maximum " + std::to_string(kMaxDimension));
  }
}

QuantumState::QuantumState(CVector coefficients) : coeffs_(std::move(coefficients)) {
  check_dimension(dimension());
  const double norm = coeffs_.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw InvalidArgument("state vector has zero or non-finite norm", norm);
  }
  coeffs_ /= norm;
}

QuantumState::QuantumState(std::initializer_list<Complex> coefficients)
    : QuantumState(Eigen::Map<const CVector>(coefficients.begin(),
                                             static_cast<Eigen::Index>(coefficients.size()))) {}

QuantumState QuantumState::basis(std::size_t dimension, std::size_t index) {
  if (index >= dimension) {
    throw InvalidArgument("basis index " + std::to_string(index) + " out of range");
  }
  CVector v = CVector::Zero(static_cast<Eigen::Index>(dimension));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return QuantumState(std::move(v));
}

std::vector<std::vector<std::size_t>> degeneracy_classes(std::span<const double> eigenvalues,
                                                          double tolerance) {
  const std::size_t n = eigenvalues.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return eigenvalues[a] < eigenvalues[b]; });

  std::vector<std::vector<std::size_t>> classes;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    if (k > 0 && eigenvalues[j] - eigenvalues[order[k - 1]] <= tolerance) {
      classes.back().push_back(j);
    } else {
      classes.push_back({j});
    }
  }
  for (auto& c : classes) std::sort(c.begin(), c.end());
  std::sort(classes.begin(), classes.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return classes;
}

double default_degeneracy_tolerance(std::span<const double> eigenvalues) {
  double scale = 0.0;
  for (double c : eigenvalues) scale = std::max(scale, std::abs(c));
  return 1e-9 * scale;
}

Observable::Observable(CMatrix eigenvectors, RVector eigenvalues,
                       std::optional<double> degeneracy_tolerance)
    : vectors_(std::move(eigenvectors)), values_(std::move(eigenvalues)) {
  const auto n = static_cast<std::size_t>(values_.size());
  check_dimension(n);
  if (static_cast<std::size_t>(vectors_.rows()) != n ||
      static_cast<std::size_t>(vectors_.cols()) != n) {
    throw DimensionError("eigenvector matrix must be square and match the eigenvalue count", n,
                         static_cast<std::size_t>(vectors_.cols()));
  }
  const double defect =
      (vectors_.adjoint() * vectors_ - CMatrix::Identity(vectors_.rows(), vectors_.cols()))
          .cwiseAbs()
          .maxCoeff();
  if (defect > kOrthonormalityTolerance) {
    throw InvalidArgument("observable eigenvectors are not orthonormal (max defect " +
                              std::to_string(defect) + ")",
                          defect);
  }
  for (Eigen::Index j = 0; j < values_.size(); ++j) {
    if (!std::isfinite(values_(j))) throw InvalidArgument("non-finite eigenvalue");
  }
  const std::vector<double> list = eigenvalue_list();
  tolerance_ = degeneracy_tolerance.value_or(default_degeneracy_tolerance(list));
  if (tolerance_ < 0.0) throw InvalidArgument("degeneracy tolerance must be non-negative");
  classes_ = degeneracy_classes(list, tolerance_);
  class_index_.assign(n, 0);
  for (std::size_t c = 0; c < classes_.size(); ++c) {
    for (std::size_t j : classes_[c]) class_index_[j] = c;
  }
}

Observable Observable::from_hermitian(const CMatrix& h, std::optional<double> degeneracy_tolerance) {
  const double defect = hermiticity_defect(h);
  if (defect > kHermiticityTolerance) {
    throw InvalidArgument("observable matrix is not Hermitian: ||H - H^dagger|| = " +
                              std::to_string(defect),
                          defect);
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h);
  return Observable(solver.eigenvectors(), solver.eigenvalues(), degeneracy_tolerance);
}

Observable Observable::diagonal(std::vector<double> eigenvalues) {
  const auto n = static_cast<Eigen::Index>(eigenvalues.size());
  return Observable(CMatrix::Identity(n, n), Eigen::Map<const RVector>(eigenvalues.data(), n));
}

Observable Observable::projector(const Observable& basis_source, std::size_t k) {
  const std::size_t members[] = {k};
  return subspace_projector(basis_source, members);
}

Observable Observable::subspace_projector(const Observable& basis_source,
                                          std::span<const std::size_t> members) {
  RVector values = RVector::Zero(static_cast<Eigen::Index>(basis_source.dimension()));
  for (std::size_t k : members) {
    if (k >= basis_source.dimension()) throw InvalidArgument("projector index out of range");
    values(static_cast<Eigen::Index>(k)) = 1.0;
  }
  return Observable(basis_source.vectors_, std::move(values));
}

std::vector<double> Observable::eigenvalue_list() const {
  return {values_.data(), values_.data() + values_.size()};
}

CMatrix Observable::matrix() const {
  return vectors_ * values_.cast<Complex>().asDiagonal() * vectors_.adjoint();
}

Observable Observable::with_eigenvalues(RVector eigenvalues,
                                        std::optional<double> degeneracy_tolerance) const {
  return Observable(vectors_, std::move(eigenvalues), degeneracy_tolerance);
}

Unitary::Unitary(CMatrix matrix) : m_(std::move(matrix)) {
  if (m_.rows() != m_.cols()) {
    throw DimensionError("unitary must be square", static_cast<std::size_t>(m_.rows()),
                         static_cast<std::size_t>(m_.cols()));
  }
  check_dimension(static_cast<std::size_t>(m_.rows()));
  const double defect =
      (m_.adjoint() * m_ - CMatrix::Identity(m_.rows(), m_.cols())).cwiseAbs().maxCoeff();
  if (!(defect <= kUnitarityTolerance)) {
    throw InvalidArgument("matrix is not unitary (max |U^dagger U - I| = " +
                              std::to_string(defect) + ")",
                          defect);
  }
}

Unitary Unitary::identity(std::size_t dimension) {
  const auto n = static_cast<Eigen::Index>(dimension);
  return Unitary(CMatrix::Identity(n, n));
}

Unitary Unitary::adjoint() const { return Unitary(m_.adjoint()); }

Unitary Unitary::then(const Unitary& later) const {
  if (later.dimension() != dimension()) {
    throw DimensionError("cannot compose unitaries", dimension(), later.dimension());
  }
  return Unitary(later.m_ * m_);
}

MixedState::MixedState(std::vector<MixtureComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) throw InvalidArgument("mixture needs at least one component");
  double total = 0.0;
  for (const auto& c : components_) {
    if (!(c.weight > 0.0 && c.weight <= 1.0)) {
      throw InvalidArgument("mixture weights must lie in (0, 1]", c.weight);
    }
    if (c.state.dimension() != components_.front().state.dimension()) {
      throw DimensionError("mixture components differ in dimension",
                           components_.front().state.dimension(), c.state.dimension());
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw InvalidArgument("mixture weights must sum to 1", total);
  }
}

double hermiticity_defect(const CMatrix& h) {
  if (h.rows() != h.cols()) {
    throw DimensionError("generator must be square", static_cast<std::size_t>(h.rows()),
                         static_cast<std::size_t>(h.cols()));
  }
  return (h - h.adjoint()).norm();
}

Unitary unitary_from_hamiltonian(const CMatrix& h, double dt) {
  const double defect = hermiticity_defect(h);
  if (defect > kHermiticityTolerance) {
    throw InvalidArgument("Hamiltonian is not Hermitian: ||H - H^dagger|| = " +
                              std::to_string(defect),
                          defect);
  }
  check_dimension(static_cast<std::size_t>(h.rows()));
  // Symmetrize so tiny anti-Hermitian noise cannot leak into the spectrum.
  const CMatrix sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(sym);
  const CVector phases =
      (solver.eigenvalues() * (-dt)).unaryExpr([](double a) { return std::polar(1.0, a); });
  const CMatrix& v = solver.eigenvectors();
  return Unitary(v * phases.asDiagonal() * v.adjoint());
}

QuantumState evolve(const QuantumState& state, const Unitary& u) {
  if (state.dimension() != u.dimension()) {
    throw DimensionError("cannot evolve state", u.dimension(), state.dimension());
  }
  return QuantumState(u.matrix() * state.coefficients());
}

Complex inner(const QuantumState& a, const QuantumState& b) {
  if (a.dimension() != b.dimension()) {
    throw DimensionError("inner product of states", a.dimension(), b.dimension());
  }
  return a.coefficients().dot(b.coefficients());
}

double fidelity(const QuantumState& a, const QuantumState& b) { return std::norm(inner(a, b)); }

}  // namespace pathamp::qcore
