#include "pathamp/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <sstream>

#include "pathamp/error.hpp"
#include "pathamp/format.hpp"

namespace pathamp::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double plain_number(const std::string& s) {
  std::string_view v = s;
  if (!v.empty() && v.front() == '+') v.remove_prefix(1);
  double out = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || r.ec != std::errc{} || r.ptr != v.data() + v.size()) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  return out;
}

template <typename T>
T parse_integer(const std::string& s) {
  T out{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  if (s.empty() || r.ec != std::errc{} || r.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a non-negative integer: '" + s + "'");
  }
  return out;
}

bool parse_bool(const std::string& s) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw std::invalid_argument("expected true or false, got '" + s + "'");
}

std::vector<double> parse_reals(const std::string& s) {
  std::vector<double> out;
  if (s.empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(parse_real(item));
  return out;
}

ComplexList parse_complexes(const std::string& s) {
  ComplexList out;
  if (s.empty()) return out;
  for (const auto& item : split(s, ',')) out.push_back(parse_complex(item));
  return out;
}

ComplexRows parse_rows(const std::string& s) {
  ComplexRows out;
  if (s.empty()) return out;
  for (const auto& row : split(s, ';')) out.push_back(parse_complexes(row));
  return out;
}

std::string join_reals(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_double(v[i]);
  return out;
}

std::string join_complexes(const ComplexList& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + format_complex(v[i]);
  return out;
}

std::string join_rows(const ComplexRows& rows) {
  std::string out;
  for (std::size_t i = 0; i < rows.size(); ++i) out += (i ? "; " : "") + join_complexes(rows[i]);
  return out;
}

CVector to_vector(const ComplexList& v) {
  CVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
  return out;
}

CMatrix to_matrix(const ComplexRows& rows, std::size_t n, const std::string& field) {
  if (rows.size() != n) throw DimensionError(field + " rows", n, rows.size());
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (rows[r].size() != n) throw DimensionError(field + " columns", n, rows[r].size());
    for (std::size_t c = 0; c < n; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return m;
}

using Setter = std::function<void(ExperimentConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> s{
      {"mode", [](auto& c, const auto& v) { c.mode = v; }},
      {"dimension", [](auto& c, const auto& v) { c.dimension = parse_integer<std::size_t>(v); }},
      {"preparation", [](auto& c, const auto& v) { c.preparation = parse_complexes(v); }},
      {"final", [](auto& c, const auto& v) { c.final_state = parse_complexes(v); }},
      {"hamiltonian", [](auto& c, const auto& v) { c.hamiltonian = parse_rows(v); }},
      {"t_prime", [](auto& c, const auto& v) { c.t_prime = parse_real(v); }},
      {"t_double_prime", [](auto& c, const auto& v) { c.t_double_prime = parse_real(v); }},
      {"unitary_1", [](auto& c, const auto& v) { c.unitary_1 = parse_rows(v); }},
      {"unitary_2", [](auto& c, const auto& v) { c.unitary_2 = parse_rows(v); }},
      {"observable_eigenvalues", [](auto& c, const auto& v) { c.observable_eigenvalues = parse_reals(v); }},
      {"observable_basis", [](auto& c, const auto& v) { c.observable_basis = parse_rows(v); }},
      {"delta_f", [](auto& c, const auto& v) { c.delta_f = parse_real(v); }},
      {"grid_points", [](auto& c, const auto& v) { c.grid_points = parse_integer<std::size_t>(v); }},
      {"partition", [](auto& c, const auto& v) { c.partition = parse_reals(v); }},
      {"trials", [](auto& c, const auto& v) { c.trials = parse_integer<std::size_t>(v); }},
      {"seed", [](auto& c, const auto& v) { c.seed = parse_integer<std::uint64_t>(v); }},
      {"trace_every", [](auto& c, const auto& v) { c.trace_every = parse_integer<std::size_t>(v); }},
      {"predict_delta_f", [](auto& c, const auto& v) { c.predict_delta_f = parse_reals(v); }},
      {"predict_eigenvalues", [](auto& c, const auto& v) { c.predict_eigenvalues = parse_reals(v); }},
      {"sweep_min", [](auto& c, const auto& v) { c.sweep_min = parse_real(v); }},
      {"sweep_max", [](auto& c, const auto& v) { c.sweep_max = parse_real(v); }},
      {"sweep_points", [](auto& c, const auto& v) { c.sweep_points = parse_integer<std::size_t>(v); }},
      {"report_fidelity", [](auto& c, const auto& v) { c.report_fidelity = parse_bool(v); }},
      {"workers", [](auto& c, const auto& v) { c.workers = parse_integer<unsigned>(v); }},
  };
  return s;
}

void validate(const ExperimentConfig& c, const std::map<std::string, std::size_t>& lines) {
  auto fail = [&](const std::string& field, const std::string& msg) {
    const auto it = lines.find(field);
    throw ConfigError(field + ": " + msg, it == lines.end() ? 0 : it->second, field);
  };
  auto require = [&](const std::string& field) {
    if (!lines.contains(field)) fail(field, "required key is missing");
  };

  if (std::find(modes().begin(), modes().end(), c.mode) == modes().end()) {
    fail("mode", "unknown mode '" + c.mode + "'");
  }
  if (c.dimension < 2 || c.dimension > kMaxDimension) {
    fail("dimension", "must be between 2 and " + std::to_string(kMaxDimension));
  }
  require("preparation");
  require("final");
  require("observable_eigenvalues");
  require("delta_f");
  const std::size_t n = c.dimension;
  auto check_state = [&](const std::string& field, const ComplexList& v) {
    if (v.size() != n) fail(field, "expected " + std::to_string(n) + " components, got " + std::to_string(v.size()));
    if (!(to_vector(v).norm() > 0.0)) fail(field, "state vector must not vanish");
  };
  check_state("preparation", c.preparation);
  check_state("final", c.final_state);

  const bool has_h = !c.hamiltonian.empty();
  const bool has_u = !c.unitary_1.empty() || !c.unitary_2.empty();
  if (has_h && has_u) fail("hamiltonian", "give either a Hamiltonian or explicit unitaries, not both");
  if (!has_h && !has_u) fail("hamiltonian", "evolution missing: give hamiltonian or unitary_1 and unitary_2");
  if (has_h) {
    try {
      const CMatrix h = to_matrix(c.hamiltonian, n, "hamiltonian");
      if (qcore::hermiticity_defect(h) > qcore::kHermiticityTolerance) fail("hamiltonian", "matrix is not Hermitian");
    } catch (const InvalidArgument& e) {
      fail("hamiltonian", e.what());
    }
    if (!std::isfinite(c.t_prime) || c.t_prime < 0.0) fail("t_prime", "must be finite and non-negative");
    if (!std::isfinite(c.t_double_prime) || c.t_double_prime < c.t_prime) {
      fail("t_double_prime", "must not precede t_prime");
    }
  } else {
    for (const auto& [field, rows] : {std::pair{"unitary_1", &c.unitary_1}, std::pair{"unitary_2", &c.unitary_2}}) {
      if (rows->empty()) fail(field, "both unitary_1 and unitary_2 are required");
      try {
        qcore::Unitary(to_matrix(*rows, n, field));
      } catch (const InvalidArgument& e) {
        fail(field, e.what());
      }
    }
  }

  if (c.observable_eigenvalues.size() != n) {
    fail("observable_eigenvalues", "expected " + std::to_string(n) + " eigenvalues");
  }
  if (!c.observable_basis.empty()) {
    try {
      qcore::Unitary(to_matrix(c.observable_basis, n, "observable_basis"));
    } catch (const InvalidArgument& e) {
      fail("observable_basis", std::string("eigenvectors must be orthonormal columns: ") + e.what());
    }
  }
  if (!(c.delta_f > 0.0) || !std::isfinite(c.delta_f)) fail("delta_f", "must be positive");
  if (c.grid_points < 512) fail("grid_points", "must be at least 512");
  for (std::size_t i = 1; i < c.partition.size(); ++i) {
    if (!(c.partition[i] > c.partition[i - 1])) fail("partition", "boundaries must be strictly increasing");
  }
  if (c.trials == 0) fail("trials", "must be positive");
  if (c.trace_every == 0) fail("trace_every", "must be positive");
  for (double df : c.predict_delta_f) {
    if (!(df > 0.0)) fail("predict_delta_f", "widths must be positive");
  }
  if (!c.predict_eigenvalues.empty() && c.predict_eigenvalues.size() != n) {
    fail("predict_eigenvalues", "expected " + std::to_string(n) + " eigenvalues");
  }
  if (!(c.sweep_min > 0.0)) fail("sweep_min", "must be positive");
  if (!(c.sweep_max >= c.sweep_min)) fail("sweep_max", "must not be below sweep_min");
  if (c.workers == 0) fail("workers", "must be at least 1");
}

}  // namespace

double parse_real(const std::string& text) {
  const std::string s = trim(text);
  const auto pi_pos = s.find("pi");
  if (pi_pos == std::string::npos) return plain_number(s);
  // [sign][k*]pi[/m]
  std::string head = s.substr(0, pi_pos);
  std::string tail = s.substr(pi_pos + 2);
  double factor = 1.0;
  if (!head.empty() && (head.front() == '-' || head.front() == '+')) {
    if (head.front() == '-') factor = -1.0;
    head.erase(0, 1);
  }
  if (!head.empty()) {
    if (head.back() != '*') throw std::invalid_argument("malformed multiple of pi: '" + s + "'");
    head.pop_back();
    factor *= plain_number(head);
  }
  double value = factor * std::numbers::pi;
  if (!tail.empty()) {
    if (tail.front() != '/') throw std::invalid_argument("malformed multiple of pi: '" + s + "'");
    value /= plain_number(tail.substr(1));
  }
  return value;
}

Complex parse_complex(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (ch != ' ' && ch != '\t') s += ch;
  }
  if (s.empty()) throw std::invalid_argument("empty complex number");
  if (s.back() != 'i') return {parse_real(s), 0.0};
  s.pop_back();
  // Split at the last sign that is not an exponent sign or the leading sign.
  std::size_t split_at = std::string::npos;
  for (std::size_t k = s.size(); k-- > 1;) {
    if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  auto imag_part = [](const std::string& t) {
    if (t.empty() || t == "+") return 1.0;
    if (t == "-") return -1.0;
    return parse_real(t);
  };
  if (split_at == std::string::npos) return {0.0, imag_part(s)};
  return {parse_real(s.substr(0, split_at)), imag_part(s.substr(split_at))};
}

std::string format_complex(Complex z) {
  std::string im = format_double(z.imag());
  if (im.front() != '-') im = "+" + im;
  return format_double(z.real()) + im + "i";
}

ExperimentConfig parse(std::istream& in) {
  ExperimentConfig c;
  std::map<std::string, std::size_t> lines;
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value'", number, "");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown key '" + key + "'", number, key);
    if (lines.contains(key)) throw ConfigError("duplicate key '" + key + "'", number, key);
    lines[key] = number;
    try {
      it->second(c, value);
    } catch (const std::exception& e) {
      throw ConfigError(key + ": " + e.what(), number, key);
    }
  }
  validate(c, lines);
  return c;
}

ExperimentConfig parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

ExperimentConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse(in);
}

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream o;
  o << "mode = " << c.mode << "\n";
  o << "dimension = " << c.dimension << "\n";
  o << "preparation = " << join_complexes(c.preparation) << "\n";
  o << "final = " << join_complexes(c.final_state) << "\n";
  if (!c.hamiltonian.empty()) o << "hamiltonian = " << join_rows(c.hamiltonian) << "\n";
  o << "t_prime = " << format_double(c.t_prime) << "\n";
  o << "t_double_prime = " << format_double(c.t_double_prime) << "\n";
  if (!c.unitary_1.empty()) o << "unitary_1 = " << join_rows(c.unitary_1) << "\n";
  if (!c.unitary_2.empty()) o << "unitary_2 = " << join_rows(c.unitary_2) << "\n";
  o << "observable_eigenvalues = " << join_reals(c.observable_eigenvalues) << "\n";
  if (!c.observable_basis.empty()) o << "observable_basis = " << join_rows(c.observable_basis) << "\n";
  o << "delta_f = " << format_double(c.delta_f) << "\n";
  o << "grid_points = " << c.grid_points << "\n";
  if (!c.partition.empty()) o << "partition = " << join_reals(c.partition) << "\n";
  o << "trials = " << c.trials << "\n";
  o << "seed = " << c.seed << "\n";
  o << "trace_every = " << c.trace_every << "\n";
  if (!c.predict_delta_f.empty()) o << "predict_delta_f = " << join_reals(c.predict_delta_f) << "\n";
  if (!c.predict_eigenvalues.empty()) {
    o << "predict_eigenvalues = " << join_reals(c.predict_eigenvalues) << "\n";
  }
  o << "sweep_min = " << format_double(c.sweep_min) << "\n";
  o << "sweep_max = " << format_double(c.sweep_max) << "\n";
  o << "sweep_points = " << c.sweep_points << "\n";
  o << "report_fidelity = " << (c.report_fidelity ? "true" : "false") << "\n";
  o << "workers = " << c.workers << "\n";
  return o.str();
}

BuiltSystem build(const ExperimentConfig& c) {
  const std::size_t n = c.dimension;
  const CMatrix basis =
      c.observable_basis.empty() ? CMatrix(CMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)))
                                 : to_matrix(c.observable_basis, n, "observable_basis");
  RVector eig(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j) eig(static_cast<Eigen::Index>(j)) = c.observable_eigenvalues[j];

  auto evolution = [&]() -> std::pair<qcore::Unitary, qcore::Unitary> {
    if (!c.hamiltonian.empty()) {
      const CMatrix h = to_matrix(c.hamiltonian, n, "hamiltonian");
      return {qcore::unitary_from_hamiltonian(h, c.t_prime),
              qcore::unitary_from_hamiltonian(h, c.t_double_prime - c.t_prime)};
    }
    return {qcore::Unitary(to_matrix(c.unitary_1, n, "unitary_1")),
            qcore::Unitary(to_matrix(c.unitary_2, n, "unitary_2"))};
  };
  auto [u1, u2] = evolution();
  return {qcore::QuantumState(to_vector(c.preparation)), qcore::Observable(basis, eig), std::move(u1),
          std::move(u2), qcore::QuantumState(to_vector(c.final_state))};
}

}  // namespace pathamp::config
