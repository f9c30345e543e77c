#pragma once

// Finite-dimensional complex linear algebra for pure and mixed states:
// states, observables, unitary propagators and the bra-ket inner product.
//
// Inner products are conjugate-linear in the FIRST argument, so
// inner(a, b) = <a|b>. Every amplitude formula elsewhere relies on this.

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pathamp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Dense O(N^3) algorithms throughout; larger systems are rejected.
inline constexpr std::size_t kMaxDimension = 64;

}  // namespace pathamp

namespace pathamp::qcore {

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kOrthonormalityTolerance = 1e-10;
inline constexpr double kHermiticityTolerance = 1e-10;
inline constexpr double kUnitarityTolerance = 1e-10;

void check_dimension(std::size_t n);

class QuantumState {
 public:
  // Normalizes the input; throws if it has zero norm or N < 2.
  explicit QuantumState(CVector coefficients);
  QuantumState(std::initializer_list<Complex> coefficients);

  static QuantumState basis(std::size_t dimension, std::size_t index);

  std::size_t dimension() const { return static_cast<std::size_t>(coeffs_.size()); }
  const CVector& coefficients() const { return coeffs_; }
  Complex operator[](std::size_t i) const { return coeffs_(static_cast<Eigen::Index>(i)); }

 private:
  CVector coeffs_;
};

// Partition of eigenvalue indices into classes of (numerically) equal
// eigenvalues. Single-linkage on the sorted values, which makes the
// partition transitively closed. Classes are ordered by their smallest
// member index; members are ascending.
std::vector<std::vector<std::size_t>> degeneracy_classes(std::span<const double> eigenvalues,
                                                          double tolerance);

double default_degeneracy_tolerance(std::span<const double> eigenvalues);

class Observable {
 public:
  // `eigenvectors` holds one eigenvector per column. When no tolerance is
  // given, 1e-9 * max|C_j| is used.
  Observable(CMatrix eigenvectors, RVector eigenvalues,
             std::optional<double> degeneracy_tolerance = std::nullopt);

  static Observable from_hermitian(const CMatrix& h,
                                   std::optional<double> degeneracy_tolerance = std::nullopt);
  // Diagonal in the reference basis.
  static Observable diagonal(std::vector<double> eigenvalues);
  // |v_k><v_k| built from the k-th eigenvector of `basis_source`.
  static Observable projector(const Observable& basis_source, std::size_t k);
  // Sum of |v_k><v_k| over `members`.
  static Observable subspace_projector(const Observable& basis_source,
                                       std::span<const std::size_t> members);

  std::size_t dimension() const { return static_cast<std::size_t>(values_.size()); }
  const CMatrix& eigenvectors() const { return vectors_; }
  CVector eigenvector(std::size_t j) const { return vectors_.col(static_cast<Eigen::Index>(j)); }
  const RVector& eigenvalues() const { return values_; }
  std::vector<double> eigenvalue_list() const;
  double degeneracy_tolerance() const { return tolerance_; }

  const std::vector<std::vector<std::size_t>>& classes() const { return classes_; }
  std::size_t class_of(std::size_t j) const { return class_index_.at(j); }
  bool nondegenerate() const { return classes_.size() == dimension(); }

  // V diag(C) V^dagger.
  CMatrix matrix() const;
  // Same eigenbasis, new spectrum.
  Observable with_eigenvalues(RVector eigenvalues,
                              std::optional<double> degeneracy_tolerance = std::nullopt) const;

 private:
  CMatrix vectors_;
  RVector values_;
  double tolerance_;
  std::vector<std::vector<std::size_t>> classes_;
  std::vector<std::size_t> class_index_;
};

class Unitary {
 public:
  explicit Unitary(CMatrix matrix);
  static Unitary identity(std::size_t dimension);

  std::size_t dimension() const { return static_cast<std::size_t>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Unitary adjoint() const;
  // Apply `this` first, then `later`.
  Unitary then(const Unitary& later) const;

 private:
  CMatrix m_;
};

struct MixtureComponent {
  double weight;
  QuantumState state;
};

class MixedState {
 public:
  explicit MixedState(std::vector<MixtureComponent> components);

  std::size_t dimension() const { return components_.front().state.dimension(); }
  const std::vector<MixtureComponent>& components() const { return components_; }

 private:
  std::vector<MixtureComponent> components_;
};

// Frobenius norm of H - H^dagger.
double hermiticity_defect(const CMatrix& h);

// exp(-i H dt) via the eigendecomposition of the Hermitian generator.
Unitary unitary_from_hamiltonian(const CMatrix& h, double dt);

QuantumState evolve(const QuantumState& state, const Unitary& u);

Complex inner(const QuantumState& a, const QuantumState& b);

// |<a|b>|^2
double fidelity(const QuantumState& a, const QuantumState& b);

}  // namespace pathamp::qcore
