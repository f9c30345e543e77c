#pragma once

// Experiment configuration: flat `key = value` text.
//
//   # comment
//   dimension = 2
//   preparation = 1+8i, 2+3i          complex lists, unnormalized allowed
//   hamiltonian = 0, 1; 1, 0          matrix rows separated by ';'
//   t_prime = pi/3                    reals accept k*pi/m shorthand
//
// Either `hamiltonian` (with t_prime, t_double_prime) or both `unitary_1`
// and `unitary_2` define the evolution. `observable_basis` lists the
// eigenvectors as matrix columns and defaults to the reference basis.

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "pathamp/qcore.hpp"

namespace pathamp::config {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::size_t line, std::string field)
      : std::runtime_error(what), line_(line), field_(std::move(field)) {}
  // 0 when the problem is not tied to one line (e.g. a missing key).
  std::size_t line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  std::size_t line_;
  std::string field_;
};

using ComplexList = std::vector<Complex>;
using ComplexRows = std::vector<ComplexList>;

struct ExperimentConfig {
  std::string mode = "forward";
  std::size_t dimension = 2;
  ComplexList preparation;
  ComplexList final_state;
  ComplexRows hamiltonian;
  double t_prime = 0.0;
  double t_double_prime = 0.0;
  ComplexRows unitary_1;
  ComplexRows unitary_2;
  std::vector<double> observable_eigenvalues;
  ComplexRows observable_basis;
  double delta_f = 1.0;
  std::size_t grid_points = 4096;
  std::vector<double> partition;
  std::size_t trials = 100000;
  std::uint64_t seed = 1;
  std::size_t trace_every = 100;
  std::vector<double> predict_delta_f;
  std::vector<double> predict_eigenvalues;
  double sweep_min = 1e-3;
  double sweep_max = 1e3;
  std::size_t sweep_points = 0;
  bool report_fidelity = false;
  unsigned workers = 1;

  bool operator==(const ExperimentConfig&) const = default;
};

inline const std::vector<std::string>& modes() {
  static const std::vector<std::string> m{"forward", "simulate", "reconstruct", "sweep", "tomography"};
  return m;
}

ExperimentConfig parse(std::istream& in);
ExperimentConfig parse_string(const std::string& text);
ExperimentConfig load(const std::string& path);
std::string serialize(const ExperimentConfig& config);

// Module-level objects built from a validated configuration.
struct BuiltSystem {
  qcore::QuantumState preparation;
  qcore::Observable observable;
  qcore::Unitary to_measurement;
  qcore::Unitary to_final;
  qcore::QuantumState final_state;
};

BuiltSystem build(const ExperimentConfig& config);

// Helpers shared with tests.
Complex parse_complex(const std::string& text);
double parse_real(const std::string& text);
std::string format_complex(Complex z);

}  // namespace pathamp::config
