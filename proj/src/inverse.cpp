#include "pathamp/inverse.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/SVD>

#include "pathamp/error.hpp"
#include "pathamp/numeric.hpp"

namespace pathamp::inverse {

namespace {

constexpr double kDropSingular = 1e-14;
constexpr std::size_t kMaxSweepGridPoints = std::size_t{1} << 20;

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

std::size_t unknown_index(std::size_t n, std::size_t j, std::size_t k) {
  if (j == k) return j;
  if (j < k) std::swap(j, k);
  // Pairs (k, j), k < j, enumerated row by row after the n diagonal entries.
  std::size_t offset = n;
  for (std::size_t r = 0; r < k; ++r) offset += n - 1 - r;
  return offset + (j - k - 1);
}

struct SvdSolve {
  RVector x;
  RMatrix pinv;
  Conditioning condition;
};

// 1/||column||, 1 for all-zero columns.
RVector column_scaling(const RMatrix& a) {
  RVector d(a.cols());
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    const double n = a.col(j).norm();
    d(j) = n > 0.0 ? 1.0 / n : 1.0;
  }
  return d;
}

SvdSolve svd_solve(const RMatrix& a, const RVector& b, const SolveOptions& options) {
  const auto p = static_cast<std::size_t>(a.cols());
  if (static_cast<std::size_t>(a.rows()) < p) {
    throw InvalidArgument("need at least P = " + std::to_string(p) + " equations, got " +
                          std::to_string(a.rows()));
  }
  SvdSolve out;
  out.condition = conditioning(DesignMatrix{a, 0}, options.rcond);
  if (options.enforce_rank && out.condition.rank < p) {
    throw RankDeficientError("design matrix is rank deficient (rank " +
                                 std::to_string(out.condition.rank) + " of " + std::to_string(p) +
                                 "); the pointer width is outside the well-conditioned band",
                             out.condition.sigma_min);
  }
  const RVector d = column_scaling(a);
  Eigen::JacobiSVD<RMatrix> svd(a * d.asDiagonal(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  RVector inv_s = RVector::Zero(s.size());
  const double floor = options.enforce_rank ? 0.0 : kDropSingular * (s.size() > 0 ? s(0) : 0.0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > floor) inv_s(i) = 1.0 / s(i);
  }
  out.pinv = d.asDiagonal() * (svd.matrixV() * inv_s.asDiagonal() * svd.matrixU().transpose());
  out.x = out.pinv * b;
  return out;
}

// Clamp negative diagonals, then pull cross terms inside the Cauchy-Schwarz
// bound; rescale to unit normalization when anything moved.
void make_feasible(Solution& sol, const PointerConfig& config) {
  RMatrix& x = sol.gram.x;
  const RMatrix before = x;
  const double scale = std::max(1e-300, x.diagonal().cwiseAbs().sum());
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    if (x(j, j) < 0.0) {
      if (x(j, j) < -1e-12 * scale) {
        sol.warnings.push_back("negative diagonal X_" + std::to_string(j + 1) + std::to_string(j + 1) +
                               " = " + std::to_string(x(j, j)) +
                               " clamped to 0 (statistical noise)");
      }
      x(j, j) = 0.0;
    }
  }
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      const double bound = std::sqrt(x(j, j) * x(k, k));
      if (std::abs(x(j, k)) > bound) {
        if (std::abs(x(j, k)) - bound > 1e-12 * scale) {
          sol.warnings.push_back("|X_" + std::to_string(k + 1) + std::to_string(j + 1) + "| = " +
                                 std::to_string(std::abs(x(j, k))) +
                                 " exceeds the Cauchy-Schwarz bound, clamped to " + std::to_string(bound));
        }
        x(j, k) = std::copysign(bound, x(j, k));
        x(k, j) = x(j, k);
      }
    }
  }
  sol.clamp_adjustment = (x - before).norm();
  if (sol.clamp_adjustment > 0.0) {
    const double norm = sol.gram.normalization(config);
    if (norm > 0.0) x /= norm;
  }
}

RVector coefficient_row(const PointerConfig& config, double f) {
  const std::size_t n = config.dimension();
  RVector row(idx(unknown_count(n)));
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = pointer::gaussian(config, f, j);
  const auto pairs = unknown_pairs(n);
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [k, j] = pairs[p];
    row(idx(p)) = (j == k ? 1.0 : 2.0) * g[j] * g[k];
  }
  return row;
}

RVector normalization_row(const PointerConfig& config) {
  const auto pairs = unknown_pairs(config.dimension());
  RVector row(idx(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    const auto [k, j] = pairs[p];
    const double d = config.eigenvalue(j) - config.eigenvalue(k);
    row(idx(p)) = (j == k ? 1.0 : 2.0) * std::exp(-d * d / (4.0 * config.delta_f() * config.delta_f()));
  }
  return row;
}

}  // namespace

std::size_t unknown_count(std::size_t n) { return n * (n + 1) / 2; }

std::vector<std::pair<std::size_t, std::size_t>> unknown_pairs(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(unknown_count(n));
  for (std::size_t j = 0; j < n; ++j) out.emplace_back(j, j);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t j = k + 1; j < n; ++j) out.emplace_back(k, j);
  }
  return out;
}

RVector gram_to_unknowns(const GramMatrix& gram) {
  const auto pairs = unknown_pairs(gram.dimension());
  RVector x(idx(pairs.size()));
  for (std::size_t p = 0; p < pairs.size(); ++p) x(idx(p)) = gram.x(idx(pairs[p].second), idx(pairs[p].first));
  return x;
}

GramMatrix unknowns_to_gram(const RVector& x, std::size_t n) {
  if (static_cast<std::size_t>(x.size()) != unknown_count(n)) {
    throw DimensionError("Gram unknowns", unknown_count(n), static_cast<std::size_t>(x.size()));
  }
  const auto pairs = unknown_pairs(n);
  RMatrix m(idx(n), idx(n));
  for (std::size_t p = 0; p < pairs.size(); ++p) {
    m(idx(pairs[p].first), idx(pairs[p].second)) = x(idx(p));
    m(idx(pairs[p].second), idx(pairs[p].first)) = x(idx(p));
  }
  return {std::move(m)};
}

std::vector<std::size_t> DesignMatrix::zero_columns() const {
  std::vector<std::size_t> out;
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    if ((a.col(c).array() == 0.0).all()) out.push_back(static_cast<std::size_t>(c));
  }
  return out;
}

DesignMatrix pointwise_design(const PointerConfig& config, std::span<const double> probes,
                              History history) {
  const std::size_t n = config.dimension();
  std::vector<double> sorted(probes.begin(), probes.end());
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw InvalidArgument("probe points must be pairwise distinct");
  }
  DesignMatrix d{RMatrix(idx(probes.size()), idx(unknown_count(n))), n};
  for (std::size_t m = 0; m < probes.size(); ++m) d.a.row(idx(m)) = coefficient_row(config, probes[m]);
  if (history == History::one_step) d.a.rightCols(idx(unknown_count(n) - n)).setZero();
  return d;
}

DesignMatrix interval_design(const PointerConfig& config, const sampler::IntervalPartition& partition,
                             History history) {
  const std::size_t n = config.dimension();
  const auto pairs = unknown_pairs(n);
  DesignMatrix d{RMatrix(idx(partition.cells()), idx(pairs.size())), n};
  for (std::size_t nu = 0; nu < partition.cells(); ++nu) {
    const RMatrix j = pointer::overlap_integrals(config, partition.cell(nu));
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      const auto [k, jj] = pairs[p];
      const bool cross = k != jj;
      d.a(idx(nu), idx(p)) =
          cross ? (history == History::one_step ? 0.0 : 2.0 * j(idx(jj), idx(k))) : j(idx(jj), idx(jj));
    }
  }
  return d;
}

std::vector<double> default_probes(const PointerConfig& config, std::size_t count) {
  if (count == 0) throw InvalidArgument("at least one probe point is required");
  const double lo = config.min_eigenvalue() - config.delta_f();
  const double hi = config.max_eigenvalue() + config.delta_f();
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  out.back() = hi;
  return out;
}

sampler::IntervalPartition default_partition(const PointerConfig& config, std::size_t cells) {
  if (cells < 2) throw InvalidArgument("a partition needs at least two cells");
  const double lo = config.min_eigenvalue() - config.delta_f();
  const double hi = config.max_eigenvalue() + config.delta_f();
  std::vector<double> b(cells - 1);
  for (std::size_t i = 0; i + 1 < cells; ++i) {
    b[i] = lo + (hi - lo) * static_cast<double>(i + 1) / static_cast<double>(cells);
  }
  return sampler::IntervalPartition(std::move(b));
}

Conditioning conditioning(const DesignMatrix& design, double rcond) {
  Eigen::JacobiSVD<RMatrix> svd(design.a);
  const RVector& s = svd.singularValues();
  Conditioning c;
  const bool underdetermined = design.a.rows() < design.a.cols();
  c.sigma_max = s.size() > 0 ? s(0) : 0.0;
  c.sigma_min = underdetermined || s.size() == 0 ? 0.0 : s(s.size() - 1);
  c.abs_det = underdetermined ? 0.0 : s.prod();
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > rcond * c.sigma_max) ++c.rank;
  }
  return c;
}

Solution solve_pointwise(std::span<const double> density_values, std::span<const double> probes,
                         const PointerConfig& config, const SolveOptions& options) {
  if (density_values.size() != probes.size()) {
    throw DimensionError("density values vs probe points", probes.size(), density_values.size());
  }
  const DesignMatrix design = pointwise_design(config, probes);
  const RVector b = Eigen::Map<const RVector>(density_values.data(), idx(density_values.size()));
  SvdSolve s = svd_solve(design.a, b, options);
  Solution sol{unknowns_to_gram(s.x, config.dimension()), s.condition, (design.a * s.x - b).norm(), 0.0,
               {}, {}};
  make_feasible(sol, config);
  return sol;
}

Solution solve_intervals(std::span<const double> frequencies,
                         const sampler::IntervalPartition& partition, const PointerConfig& config,
                         const SolveOptions& options) {
  if (frequencies.size() != partition.cells()) {
    throw DimensionError("frequencies vs partition cells", partition.cells(), frequencies.size());
  }
  RVector w = Eigen::Map<const RVector>(frequencies.data(), idx(frequencies.size()));
  if ((w.array() < 0.0).any()) throw InvalidArgument("frequencies must be non-negative");
  const double total = w.sum();
  if (!(total > 0.0)) throw InvalidArgument("frequencies must not all vanish", total);
  w /= total;

  const DesignMatrix design = interval_design(config, partition);
  SvdSolve s = svd_solve(design.a, w, options);
  Solution sol{unknowns_to_gram(s.x, config.dimension()), s.condition, (design.a * s.x - w).norm(), 0.0,
               {}, {}};
  if (options.trials) {
    if (*options.trials == 0) throw InvalidArgument("trial count must be positive");
    const RMatrix cov_w =
        (RMatrix(w.asDiagonal()) - w * w.transpose()) / static_cast<double>(*options.trials);
    sol.covariance = s.pinv * cov_w * s.pinv.transpose();
  }
  make_feasible(sol, config);
  return sol;
}

CVector ReconstructionResult::principal() const {
  CVector a(idx(moduli.size()));
  for (std::size_t j = 0; j < moduli.size(); ++j) {
    a(idx(j)) = std::polar(moduli[j], phase_signs[j] * phases[j]);
  }
  return a;
}

CVector ReconstructionResult::conjugate() const { return principal().conjugate(); }

ReconstructionResult amplitudes_from_gram(const GramMatrix& gram) {
  const std::size_t n = gram.dimension();
  if (n == 0) throw InvalidArgument("empty Gram matrix");
  const RMatrix& x = gram.x;
  const double trace = std::max(0.0, x.trace());
  const double violation = gram.cauchy_schwarz_violation();
  if (violation > 1e-8 * std::max(trace, 1e-300)) {
    throw InvalidArgument("Gram matrix violates the Cauchy-Schwarz bound", violation);
  }
  if (!(x(0, 0) > 1e-15 * trace)) {
    Eigen::Index largest = 0;
    x.diagonal().maxCoeff(&largest);
    throw NumericalError("reference amplitude vanishes (X_11 = 0); re-reference to the largest "
                         "diagonal entry, index " + std::to_string(largest + 1),
                         x(0, 0));
  }

  ReconstructionResult r;
  r.gram = gram;
  r.moduli.resize(n);
  r.phases.assign(n, 0.0);
  r.phase_signs.assign(n, 1);
  for (std::size_t j = 0; j < n; ++j) r.moduli[j] = std::sqrt(std::max(0.0, x(idx(j), idx(j))));
  for (std::size_t j = 1; j < n; ++j) {
    if (r.moduli[j] == 0.0) continue;
    const double c = x(idx(j), 0) / (r.moduli[j] * r.moduli[0]);
    r.phases[j] = std::acos(std::clamp(c, -1.0, 1.0));
  }

  // Relative signs from the entries not involving the reference. The
  // largest |A_j sin phi_j| fixes the overall conjugation branch.
  std::vector<std::size_t> order;
  for (std::size_t j = 1; j < n; ++j) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return r.moduli[a] * std::sin(r.phases[a]) > r.moduli[b] * std::sin(r.phases[b]);
  });
  auto misfit = [&](std::size_t j, std::size_t k) {
    return x(idx(j), idx(k)) -
           r.moduli[j] * r.moduli[k] * std::cos(r.phase_signs[j] * r.phases[j] - r.phase_signs[k] * r.phases[k]);
  };
  for (std::size_t i = 1; i < order.size(); ++i) {
    const std::size_t j = order[i];
    double cost[2] = {0.0, 0.0};
    for (int s = 0; s < 2; ++s) {
      r.phase_signs[j] = s == 0 ? 1 : -1;
      for (std::size_t q = 0; q < i; ++q) cost[s] += std::pow(misfit(j, order[q]), 2);
    }
    r.phase_signs[j] = cost[1] < cost[0] ? -1 : 1;
  }
  double sq = 0.0;
  for (std::size_t j = 1; j < n; ++j) {
    for (std::size_t k = 1; k < j; ++k) sq += std::pow(misfit(j, k), 2);
  }
  r.consistency_residual = std::sqrt(sq);
  return r;
}

ReconstructionResult amplitudes_from_solution(const Solution& solution, const PointerConfig& config) {
  ReconstructionResult r = amplitudes_from_gram(solution.gram);
  r.condition = solution.condition;
  r.residual = solution.residual;
  r.clamp_adjustment = solution.clamp_adjustment;
  r.normalization_defect = solution.gram.normalization(config) - 1.0;
  r.warnings = solution.warnings;
  if (solution.covariance.size() == 0) return r;

  const std::size_t n = r.dimension();
  const RMatrix& cov = solution.covariance;
  const RMatrix& x = solution.gram.x;
  r.se_moduli.resize(n);
  r.se_phases.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double var = cov(idx(j), idx(j));
    r.se_moduli[j] = r.moduli[j] > 0.0 ? std::sqrt(std::max(0.0, var)) / (2.0 * r.moduli[j])
                                       : std::sqrt(std::sqrt(std::max(0.0, var)));
  }
  for (std::size_t j = 1; j < n; ++j) {
    if (r.moduli[j] == 0.0) {
      r.se_phases[j] = std::numbers::pi;
      continue;
    }
    const double root = r.moduli[j] * r.moduli[0];
    const double c = std::clamp(x(idx(j), 0) / root, -1.0, 1.0);
    const double dphi_dc = -1.0 / std::max(std::sqrt(1.0 - c * c), 1e-12);
    RVector g = RVector::Zero(cov.rows());
    g(idx(unknown_index(n, j, 0))) += dphi_dc / root;
    g(idx(j)) += dphi_dc * (-c / (2.0 * x(idx(j), idx(j))));
    g(0) += dphi_dc * (-c / (2.0 * x(0, 0)));
    r.se_phases[j] = std::sqrt(std::max(0.0, g.dot(cov * g)));
  }
  return r;
}

nlohmann::json to_json(const ReconstructionResult& r) {
  using nlohmann::json;
  auto complex_list = [](const CVector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
    return out;
  };
  json gram = json::array();
  for (Eigen::Index j = 0; j < r.gram.x.rows(); ++j) {
    json row = json::array();
    for (Eigen::Index k = 0; k < r.gram.x.cols(); ++k) row.push_back(r.gram.x(j, k));
    gram.push_back(row);
  }
  json order = json::array();
  for (const auto& [k, j] : unknown_pairs(r.dimension())) order.push_back({j + 1, k + 1});
  return {
      {"dimension", r.dimension()},
      {"moduli", r.moduli},
      {"phases", r.phases},
      {"phase_signs", r.phase_signs},
      {"amplitudes_principal", complex_list(r.principal())},
      {"amplitudes_conjugate", complex_list(r.conjugate())},
      {"gram", gram},
      {"unknown_order", order},
      {"condition",
       {{"abs_det", r.condition.abs_det},
        {"sigma_min", r.condition.sigma_min},
        {"sigma_max", r.condition.sigma_max},
        {"rank", r.condition.rank}}},
      {"residual", r.residual},
      {"consistency_residual", r.consistency_residual},
      {"normalization_defect", r.normalization_defect},
      {"clamp_adjustment", r.clamp_adjustment},
      {"se_moduli", r.se_moduli},
      {"se_phases", r.se_phases},
      {"warnings", r.warnings},
  };
}

pointer::ReadingDensity predict_commuting(const GramMatrix& gram, std::vector<double> new_eigenvalues,
                                          double new_delta_f, std::size_t grid_points) {
  if (new_eigenvalues.size() != gram.dimension()) {
    throw DimensionError("commuting observable eigenvalues", gram.dimension(), new_eigenvalues.size());
  }
  const auto config =
      PointerConfig::with_default_grid(new_delta_f, std::move(new_eigenvalues), grid_points);
  return pointer::density_from_gram(gram, config);
}

pointer::ReadingDensity predict_commuting(const GramMatrix& gram, const qcore::Observable& measured,
                                          const qcore::Observable& candidate, double new_delta_f,
                                          std::size_t grid_points) {
  if (candidate.dimension() != measured.dimension()) {
    throw DimensionError("commuting observable", measured.dimension(), candidate.dimension());
  }
  const CMatrix& v = measured.eigenvectors();
  const CMatrix m = v.adjoint() * candidate.matrix() * v;
  double off = 0.0;
  for (Eigen::Index j = 0; j < m.rows(); ++j) {
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      if (j != k) off = std::max(off, std::abs(m(j, k)));
    }
  }
  const double scale = std::max(1.0, candidate.eigenvalues().cwiseAbs().maxCoeff());
  if (off > qcore::kOrthonormalityTolerance * scale) {
    throw InvalidArgument(
        "observable does not commute with the measured one: its statistics need cross-amplitude "
        "terms between different eigenvectors of the measured observable, which remain unknown",
        off);
  }
  std::vector<double> c(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index j = 0; j < m.rows(); ++j) c[static_cast<std::size_t>(j)] = m(j, j).real();
  return predict_commuting(gram, std::move(c), new_delta_f, grid_points);
}

std::vector<double> prediction_band(const Solution& solution, const PointerConfig& config) {
  if (solution.covariance.size() == 0) {
    throw InvalidArgument("prediction band needs a solution with propagated covariance");
  }
  if (solution.gram.dimension() != config.dimension()) {
    throw DimensionError("prediction band", config.dimension(), solution.gram.dimension());
  }
  const RVector x = gram_to_unknowns(solution.gram);
  const RVector nrow = normalization_row(config);
  const double norm = nrow.dot(x);
  std::vector<double> se(config.grid().points);
  for (std::size_t i = 0; i < se.size(); ++i) {
    const RVector c = coefficient_row(config, config.grid().at(i));
    const RVector g = c / norm - (c.dot(x) / (norm * norm)) * nrow;
    se[i] = std::sqrt(std::max(0.0, g.dot(solution.covariance * g)));
  }
  return se;
}

WeakEstimate weak_reconstruct(std::span<const WeakInput> estimates, double delta_f, double span,
                              double regime_factor) {
  if (estimates.empty()) throw InvalidArgument("weak reconstruction needs at least one projector");
  if (!(span > 0.0)) throw InvalidArgument("eigenvalue span must be positive", span);
  if (!(delta_f >= regime_factor * span)) {
    throw InvalidArgument("pointer width " + std::to_string(delta_f) +
                              " is outside the weak regime (needs at least " +
                              std::to_string(regime_factor * span) + ")",
                          delta_f);
  }
  const double df2 = delta_f * delta_f;
  WeakEstimate out;
  out.alpha.resize(idx(estimates.size()));
  double var_re = 0.0;
  double var_im = 0.0;
  for (std::size_t n = 0; n < estimates.size(); ++n) {
    const WeakInput& e = estimates[n];
    out.alpha(idx(n)) = Complex(e.mean_reading, e.mean_momentum * df2);
    out.se_real.push_back(e.se_reading);
    out.se_imag.push_back(e.se_momentum * df2);
    var_re += e.se_reading * e.se_reading;
    var_im += out.se_imag.back() * out.se_imag.back();
  }
  out.sum = out.alpha.sum();
  constexpr double kSlack = 1e-9;
  out.consistent = std::abs(out.sum.real() - 1.0) <= 4.0 * std::sqrt(var_re) + kSlack &&
                   std::abs(out.sum.imag()) <= 4.0 * std::sqrt(var_im) + kSlack;
  out.cost_factor = df2;
  out.cost_note = "standard errors grow in proportion to the pointer width; equal precision needs "
                  "trials growing as df^2";
  return out;
}

SampleMoments sample_moments(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("sample moments need at least two values");
  const double n = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / n;
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  const double var = pairwise_sum<double>(sq) / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

TomographyResult reconstruct_initial_state(const ReconstructionResult& result,
                                           const qcore::QuantumState& final_at_measurement,
                                           const qcore::Observable& measured) {
  const std::size_t n = result.dimension();
  if (measured.dimension() != n || final_at_measurement.dimension() != n) {
    throw DimensionError("tomography", n,
                         measured.dimension() != n ? measured.dimension() : final_at_measurement.dimension());
  }
  const CMatrix& v = measured.eigenvectors();
  const CVector d = v.adjoint() * final_at_measurement.coefficients();
  for (std::size_t j = 0; j < n; ++j) {
    if (std::abs(d(idx(j))) < kFinalComponentThreshold) {
      throw NumericalError("division by the final-state component <c_" + std::to_string(j + 1) +
                               "|d(t')>, which vanishes",
                           std::abs(d(idx(j))));
    }
  }
  auto build = [&](const CVector& a) {
    CVector coeff(idx(n));
    for (std::size_t j = 0; j < n; ++j) coeff(idx(j)) = a(idx(j)) / std::conj(d(idx(j)));
    return qcore::QuantumState(v * coeff);
  };
  return {build(result.principal()), build(result.conjugate())};
}

std::vector<SweepRow> conditioning_sweep(const paths::PathAmplitudeSet& amps,
                                         const std::vector<double>& eigenvalues,
                                         const sampler::IntervalPartition& partition,
                                         std::span<const double> delta_fs,
                                         const SweepOptions& options) {
  if (amps.size() != eigenvalues.size()) {
    throw DimensionError("sweep amplitudes vs eigenvalues", eigenvalues.size(), amps.size());
  }
  for (double df : delta_fs) {
    if (!(df > 0.0)) throw InvalidArgument("pointer widths in a sweep must be positive", df);
  }
  const double span = *std::max_element(eigenvalues.begin(), eigenvalues.end()) -
                      *std::min_element(eigenvalues.begin(), eigenvalues.end());
  std::vector<SweepRow> rows(delta_fs.size());

  auto run_one = [&](std::size_t i) {
    const double df = delta_fs[i];
    // Keep the grid spacing below df / 8 so narrow pointers are resolved.
    const double needed = (span + 2.0 * pointer::kGridMargin * df) / (df / 8.0) + 1.0;
    const std::size_t points = std::clamp<std::size_t>(static_cast<std::size_t>(std::ceil(needed)),
                                                       options.grid_points, kMaxSweepGridPoints);
    const auto config = PointerConfig::with_default_grid(df, eigenvalues, points);
    const Conditioning c = conditioning(interval_design(config, partition));
    SweepRow row{df, c.abs_det, c.sigma_min, std::nan(""), pointer::arrival_probability(amps, config)};
    if (options.trials > 0) {
      try {
        const GramMatrix truth = GramMatrix::from_amplitudes(pointer::renormalized(amps, config));
        const auto record = sampler::sample(pointer::reading_density(amps, config), options.trials,
                                            sampler::derive_seed(options.seed, i));
        const auto freq = sampler::count(record, partition).frequencies();
        SolveOptions so;
        so.enforce_rank = false;
        const Solution s = solve_intervals(freq, partition, config, so);
        row.recon_error = (s.gram.x - truth.x).norm();
      } catch (const std::exception&) {
        row.recon_error = std::nan("");
      }
    }
    rows[i] = row;
  };

  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, std::max<std::size_t>(1, rows.size()));
  if (workers == 1) {
    for (std::size_t i = 0; i < rows.size(); ++i) run_one(i);
    return rows;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < rows.size(); i = next++) run_one(i);
    });
  }
  pool.clear();
  return rows;
}

std::vector<double> log_spaced(double lower, double upper, std::size_t points) {
  if (points == 0) return {};
  if (!(lower > 0.0) || !(upper >= lower)) {
    throw InvalidArgument("log spacing needs 0 < lower <= upper");
  }
  if (points == 1) return {lower};
  std::vector<double> out(points);
  const double a = std::log(lower);
  const double b = std::log(upper);
  for (std::size_t i = 0; i < points; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(points - 1));
  }
  out.front() = lower;
  out.back() = upper;
  return out;
}

}  // namespace pathamp::inverse
