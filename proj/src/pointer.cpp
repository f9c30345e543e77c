#include "pathamp/pointer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "pathamp/error.hpp"
#include "pathamp/numeric.hpp"

namespace pathamp {

double trapezoid(std::span<const double> values, double spacing) {
  if (values.size() < 2) return 0.0;
  std::vector<double> interior(values.begin() + 1, values.end() - 1);
  return spacing * (0.5 * (values.front() + values.back()) + pairwise_sum<double>(interior));
}

}  // namespace pathamp

namespace pathamp::pointer {

namespace {

constexpr double kVanishingArrival = 1e-300;
constexpr std::size_t kMaxMomentumPoints = std::size_t{1} << 22;

// P(a < X < b) for X ~ Normal(mean, sd), evaluated on the tail side to keep
// relative accuracy for intervals far from the mean.
double normal_mass(double a, double b, double mean, double sd) {
  const double scale = sd * std::numbers::sqrt2;
  const double za = (a - mean) / scale;
  const double zb = (b - mean) / scale;
  if (za >= 0.0) return 0.5 * (std::erfc(za) - std::erfc(zb));
  if (zb <= 0.0) return 0.5 * (std::erfc(-zb) - std::erfc(-za));
  return 1.0 - 0.5 * std::erfc(zb) - 0.5 * std::erfc(-za);
}

void check_amplitudes(const PathAmplitudeSet& amps, const PointerConfig& config) {
  if (amps.size() != config.dimension()) {
    throw DimensionError("path amplitudes vs pointer eigenvalues", config.dimension(), amps.size());
  }
}

// Pairwise overlap weights exp(-(C_j - C_k)^2 / (4 df^2)).
RMatrix full_overlaps(std::span<const double> c, double delta_f) {
  const auto n = static_cast<Eigen::Index>(c.size());
  RMatrix e(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) {
      const double d = c[static_cast<std::size_t>(j)] - c[static_cast<std::size_t>(k)];
      e(j, k) = std::exp(-d * d / (4.0 * delta_f * delta_f));
    }
  }
  return e;
}

double quadratic_form(const CVector& a, const RMatrix& weights) {
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      acc += weights(j, k) * (std::conj(a(k)) * a(j)).real();
    }
  }
  return acc;
}

std::vector<double> grid_values(const Grid& grid, auto&& fn) {
  std::vector<double> v(grid.points);
  for (std::size_t i = 0; i < grid.points; ++i) v[i] = fn(grid.at(i));
  return v;
}

}  // namespace

double Grid::at(std::size_t i) const {
  if (i + 1 == points) return upper;
  return lower + static_cast<double>(i) * spacing();
}

PointerConfig::PointerConfig(double delta_f, std::vector<double> eigenvalues, Grid grid)
    : delta_f_(delta_f), eigenvalues_(std::move(eigenvalues)), grid_(grid) {
  if (!(delta_f_ > 0.0) || !std::isfinite(delta_f_)) {
    throw InvalidArgument("pointer width must be positive and finite", delta_f_);
  }
  if (eigenvalues_.empty()) throw InvalidArgument("pointer needs at least one eigenvalue");
  for (double c : eigenvalues_) {
    if (!std::isfinite(c)) throw InvalidArgument("non-finite pointer eigenvalue");
  }
  if (grid_.points < kMinGridPoints) {
    throw InvalidArgument("density grid needs at least " + std::to_string(kMinGridPoints) +
                          " points, got " + std::to_string(grid_.points));
  }
  const double need_lo = min_eigenvalue() - kGridMargin * delta_f_;
  const double need_hi = max_eigenvalue() + kGridMargin * delta_f_;
  const double slack = 1e-12 * std::max({1.0, std::abs(need_lo), std::abs(need_hi)});
  if (grid_.lower > need_lo + slack || grid_.upper < need_hi - slack) {
    throw InvalidArgument("density grid must cover [min C - 6 df, max C + 6 df] = [" +
                          std::to_string(need_lo) + ", " + std::to_string(need_hi) + "]");
  }
}

PointerConfig PointerConfig::with_default_grid(double delta_f, std::vector<double> eigenvalues,
                                               std::size_t points) {
  if (eigenvalues.empty()) throw InvalidArgument("pointer needs at least one eigenvalue");
  const auto [lo, hi] = std::minmax_element(eigenvalues.begin(), eigenvalues.end());
  const Grid grid{*lo - kGridMargin * delta_f, *hi + kGridMargin * delta_f, points};
  return PointerConfig(delta_f, std::move(eigenvalues), grid);
}

double PointerConfig::min_eigenvalue() const {
  return *std::min_element(eigenvalues_.begin(), eigenvalues_.end());
}

double PointerConfig::max_eigenvalue() const {
  return *std::max_element(eigenvalues_.begin(), eigenvalues_.end());
}

PointerConfig PointerConfig::with_delta_f(double delta_f) const {
  return with_default_grid(delta_f, eigenvalues_, grid_.points);
}

ReadingDensity::ReadingDensity(Grid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.points || grid_.points < 2) {
    throw DimensionError("density values vs grid", grid_.points, values_.size());
  }
  const double h = grid_.spacing();
  cdf_.assign(values_.size(), 0.0);
  double running = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i) {
    running += 0.5 * h * (values_[i - 1] + values_[i]);
    cdf_[i] = running;
  }
  total_ = trapezoid(values_, h);
  if (!(running > 0.0)) throw NumericalError("density has no mass on its grid", running);
  for (double& c : cdf_) c /= running;
  cdf_.back() = 1.0;
}

double ReadingDensity::mean() const {
  std::vector<double> weighted(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) weighted[i] = grid_.at(i) * values_[i];
  return trapezoid(weighted, grid_.spacing()) / total_;
}

double ReadingDensity::min_value() const { return *std::min_element(values_.begin(), values_.end()); }

double ReadingDensity::quantile(double u) const {
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  if (it == cdf_.begin()) return grid_.lower;
  if (it == cdf_.end()) return grid_.upper;
  const auto i = static_cast<std::size_t>(it - cdf_.begin());
  const double lo = cdf_[i - 1];
  const double hi = cdf_[i];
  const double x0 = grid_.at(i - 1);
  return x0 + (u - lo) / (hi - lo) * (grid_.at(i) - x0);
}

double ReadingDensity::value_at(double f) const {
  if (!(f >= grid_.lower && f <= grid_.upper)) return 0.0;
  const double pos = (f - grid_.lower) / grid_.spacing();
  const auto i = std::min(static_cast<std::size_t>(pos), values_.size() - 2);
  const double t = pos - static_cast<double>(i);
  return (1.0 - t) * values_[i] + t * values_[i + 1];
}

GramMatrix GramMatrix::from_amplitudes(const CVector& amplitudes) {
  const auto n = amplitudes.size();
  RMatrix x(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k) x(j, k) = (std::conj(amplitudes(k)) * amplitudes(j)).real();
  }
  return {std::move(x)};
}

double GramMatrix::cauchy_schwarz_violation() const {
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index j = 0; j < x.rows(); ++j) {
    worst = std::max(worst, -x(j, j));
    for (Eigen::Index k = 0; k < x.cols(); ++k) {
      const double bound = std::sqrt(std::max(0.0, x(j, j)) * std::max(0.0, x(k, k)));
      worst = std::max(worst, std::abs(x(j, k)) - bound);
    }
  }
  return worst;
}

double GramMatrix::normalization(const PointerConfig& config) const {
  if (dimension() != config.dimension()) {
    throw DimensionError("Gram matrix vs pointer eigenvalues", config.dimension(), dimension());
  }
  return (x.array() * full_overlaps(config.eigenvalues(), config.delta_f()).array()).sum();
}

double gaussian_value(double delta_f, double x) {
  const double prefactor = std::pow(std::numbers::pi * delta_f * delta_f, -0.25);
  return prefactor * std::exp(-x * x / (2.0 * delta_f * delta_f));
}

double gaussian(const PointerConfig& config, double f, std::size_t j) {
  return gaussian_value(config.delta_f(), f - config.eigenvalue(j));
}

double overlap(double delta_f, double cj, double ck, Interval interval) {
  if (!(interval.lower < interval.upper)) {
    throw InvalidArgument("interval must satisfy lower < upper");
  }
  const double d = cj - ck;
  const double weight = std::exp(-d * d / (4.0 * delta_f * delta_f));
  if (weight == 0.0) return 0.0;
  return weight * normal_mass(interval.lower, interval.upper, 0.5 * (cj + ck),
                              delta_f / std::numbers::sqrt2);
}

RMatrix overlap_integrals(const PointerConfig& config, Interval interval) {
  const auto n = static_cast<Eigen::Index>(config.dimension());
  RMatrix m(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k <= j; ++k) {
      m(j, k) = overlap(config.delta_f(), config.eigenvalue(static_cast<std::size_t>(j)),
                        config.eigenvalue(static_cast<std::size_t>(k)), interval);
      m(k, j) = m(j, k);
    }
  }
  return m;
}

double arrival_probability(const PathAmplitudeSet& amps, const PointerConfig& config) {
  check_amplitudes(amps, config);
  return quadratic_form(amps.values, full_overlaps(config.eigenvalues(), config.delta_f()));
}

CVector renormalized(const PathAmplitudeSet& amps, const PointerConfig& config) {
  const double n2 = arrival_probability(amps, config);
  if (!(n2 > kVanishingArrival)) {
    throw PostselectionError("post-selection impossible: all path amplitudes vanish", n2);
  }
  return amps.values / std::sqrt(n2);
}

std::vector<double> joint_density_values(const PathAmplitudeSet& amps, const PointerConfig& config) {
  check_amplitudes(amps, config);
  const std::size_t n = amps.size();
  return grid_values(config.grid(), [&](double f) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += gaussian(config, f, j) * amps[j];
    return std::norm(s);
  });
}

ReadingDensity reading_density(const PathAmplitudeSet& amps, const PointerConfig& config) {
  const PathAmplitudeSet tilde{renormalized(amps, config)};
  return ReadingDensity(config.grid(), joint_density_values(tilde, config));
}

ReadingDensity density_from_gram(const GramMatrix& gram, const PointerConfig& config) {
  const double norm = gram.normalization(config);
  if (!(norm > 0.0)) throw NumericalError("Gram matrix has non-positive normalization", norm);
  const std::size_t n = gram.dimension();
  std::vector<double> g(n);
  auto values = grid_values(config.grid(), [&](double f) {
    for (std::size_t j = 0; j < n; ++j) g[j] = gaussian(config, f, j);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      acc += gram.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) * g[j] * g[j];
      for (std::size_t k = 0; k < j; ++k) {
        acc += 2.0 * gram.x(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) * g[j] * g[k];
      }
    }
    return acc / norm;
  });
  return ReadingDensity(config.grid(), std::move(values));
}

double interval_probability(const PathAmplitudeSet& amps, const PointerConfig& config,
                            Interval interval, Conditioning conditioning) {
  check_amplitudes(amps, config);
  const double joint = quadratic_form(amps.values, overlap_integrals(config, interval));
  if (conditioning == Conditioning::joint) return joint;
  const double n2 = arrival_probability(amps, config);
  if (!(n2 > kVanishingArrival)) {
    throw PostselectionError("post-selection impossible: all path amplitudes vanish", n2);
  }
  return joint / n2;
}

ArrivalLimits arrival_limits(const PathAmplitudeSet& amps, std::span<const double> eigenvalues) {
  if (amps.size() != eigenvalues.size()) {
    throw DimensionError("amplitudes vs eigenvalues", eigenvalues.size(), amps.size());
  }
  double strong = 0.0;
  for (const auto& cls : qcore::degeneracy_classes(eigenvalues,
                                                   qcore::default_degeneracy_tolerance(eigenvalues))) {
    Complex s = 0.0;
    for (std::size_t j : cls) s += amps[j];
    strong += std::norm(s);
  }
  return {strong, std::norm(amps.sum())};
}

std::vector<double> arrival_curve(const PathAmplitudeSet& amps, std::span<const double> eigenvalues,
                                  std::span<const double> delta_fs) {
  if (amps.size() != eigenvalues.size()) {
    throw DimensionError("amplitudes vs eigenvalues", eigenvalues.size(), amps.size());
  }
  std::vector<double> out;
  out.reserve(delta_fs.size());
  for (double df : delta_fs) {
    if (!(df > 0.0)) throw InvalidArgument("pointer width samples must be positive", df);
    out.push_back(quadratic_form(amps.values, full_overlaps(eigenvalues, df)));
  }
  return out;
}

StrongLimitStats strong_limit_stats(const PathAmplitudeSet& amps, std::span<const double> eigenvalues) {
  if (amps.size() != eigenvalues.size()) {
    throw DimensionError("amplitudes vs eigenvalues", eigenvalues.size(), amps.size());
  }
  StrongLimitStats out;
  out.classes =
      qcore::degeneracy_classes(eigenvalues, qcore::default_degeneracy_tolerance(eigenvalues));
  double total = 0.0;
  for (const auto& cls : out.classes) {
    Complex s = 0.0;
    for (std::size_t j : cls) s += amps[j];
    out.class_eigenvalues.push_back(eigenvalues[cls.front()]);
    out.masses.push_back(std::norm(s));
    total += out.masses.back();
  }
  if (!(total > kVanishingArrival)) {
    throw PostselectionError("post-selection impossible in the strong limit", total);
  }
  out.mean = 0.0;
  for (std::size_t c = 0; c < out.masses.size(); ++c) {
    out.masses[c] /= total;
    out.mean += out.class_eigenvalues[c] * out.masses[c];
  }
  double num = 0.0;
  double den = 0.0;
  for (std::size_t j = 0; j < amps.size(); ++j) {
    num += eigenvalues[j] * std::norm(amps[j]);
    den += std::norm(amps[j]);
  }
  out.incoherent_mean = num / den;
  return out;
}

WeakLimitStats weak_limit_stats(const PathAmplitudeSet& amps, std::span<const double> eigenvalues,
                                double delta_f) {
  if (amps.size() != eigenvalues.size()) {
    throw DimensionError("amplitudes vs eigenvalues", eigenvalues.size(), amps.size());
  }
  if (!(delta_f > 0.0)) throw InvalidArgument("pointer width must be positive", delta_f);
  const Complex total = amps.sum();
  if (!(std::abs(total) > 1e-15 * amps.values.norm())) {
    throw NumericalError("weak value undefined: the path amplitudes sum to zero", std::abs(total));
  }
  WeakLimitStats out;
  out.alpha = amps.values / total;
  Complex weighted = 0.0;
  for (std::size_t j = 0; j < amps.size(); ++j) {
    weighted += eigenvalues[j] * out.alpha(static_cast<Eigen::Index>(j));
  }
  out.mean_reading = weighted.real();
  out.mean_momentum = weighted.imag() / (delta_f * delta_f);
  return out;
}

double exact_mean_reading(const PathAmplitudeSet& amps, const PointerConfig& config) {
  const CVector a = renormalized(amps, config);
  const RMatrix e = full_overlaps(config.eigenvalues(), config.delta_f());
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      const double mid = 0.5 * (config.eigenvalue(static_cast<std::size_t>(j)) +
                                config.eigenvalue(static_cast<std::size_t>(k)));
      acc += (std::conj(a(k)) * a(j)).real() * e(j, k) * mid;
    }
  }
  return acc;
}

double exact_mean_momentum(const PathAmplitudeSet& amps, const PointerConfig& config) {
  const CVector a = renormalized(amps, config);
  const RMatrix e = full_overlaps(config.eigenvalues(), config.delta_f());
  const double df2 = config.delta_f() * config.delta_f();
  double acc = 0.0;
  for (Eigen::Index j = 0; j < a.size(); ++j) {
    for (Eigen::Index k = 0; k < a.size(); ++k) {
      const double d = config.eigenvalue(static_cast<std::size_t>(j)) -
                       config.eigenvalue(static_cast<std::size_t>(k));
      acc += (a(j) * std::conj(a(k))).imag() * d * e(j, k) / (2.0 * df2);
    }
  }
  return acc;
}

ReadingDensity momentum_density(const PathAmplitudeSet& amps, const PointerConfig& config) {
  const CVector a = renormalized(amps, config);
  const double df = config.delta_f();
  const double span = config.max_eigenvalue() - config.min_eigenvalue();
  const double half_width = 8.0 / df;
  // At least ~40 points per interference period 2 pi / span.
  const double needed = 2.0 * half_width * span * 40.0 / (2.0 * std::numbers::pi);
  const std::size_t points = std::min(
      kMaxMomentumPoints,
      std::max(config.grid().points, static_cast<std::size_t>(std::ceil(needed)) + 1));
  const Grid grid{-half_width, half_width, points};
  const double envelope_norm = df / std::sqrt(std::numbers::pi);
  const std::size_t n = config.dimension();
  auto values = grid_values(grid, [&](double lambda) {
    Complex s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      s += std::polar(1.0, -lambda * config.eigenvalue(j)) * a(static_cast<Eigen::Index>(j));
    }
    return envelope_norm * std::exp(-lambda * lambda * df * df) * std::norm(s);
  });
  return ReadingDensity(grid, std::move(values));
}

ReadingDensity unconditional_density(const CVector& one_step_amps, const PointerConfig& config) {
  if (static_cast<std::size_t>(one_step_amps.size()) != config.dimension()) {
    throw DimensionError("one-step amplitudes vs pointer eigenvalues", config.dimension(),
                         static_cast<std::size_t>(one_step_amps.size()));
  }
  const std::size_t n = config.dimension();
  auto values = grid_values(config.grid(), [&](double f) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double g = gaussian(config, f, j);
      acc += g * g * std::norm(one_step_amps(static_cast<Eigen::Index>(j)));
    }
    return acc;
  });
  return ReadingDensity(config.grid(), std::move(values));
}

double unconditional_mean(const CVector& one_step_amps, std::span<const double> eigenvalues) {
  if (static_cast<std::size_t>(one_step_amps.size()) != eigenvalues.size()) {
    throw DimensionError("one-step amplitudes vs eigenvalues", eigenvalues.size(),
                         static_cast<std::size_t>(one_step_amps.size()));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < eigenvalues.size(); ++j) {
    acc += eigenvalues[j] * std::norm(one_step_amps(static_cast<Eigen::Index>(j)));
  }
  return acc;
}

qcore::QuantumState post_measurement_state(const qcore::QuantumState& state,
                                           const qcore::Observable& measured, double delta_f,
                                           double reading) {
  if (state.dimension() != measured.dimension()) {
    throw DimensionError("post-measurement state", measured.dimension(), state.dimension());
  }
  if (!(delta_f > 0.0)) throw InvalidArgument("pointer width must be positive", delta_f);
  const CVector components = measured.eigenvectors().adjoint() * state.coefficients();
  CVector weighted = components;
  for (Eigen::Index j = 0; j < weighted.size(); ++j) {
    weighted(j) *= gaussian_value(delta_f, reading - measured.eigenvalues()(j));
  }
  const double norm = weighted.norm();
  if (!(norm > 0.0)) {
    throw NumericalError("reading " + std::to_string(reading) + " is impossible from this state",
                         norm);
  }
  return qcore::QuantumState(measured.eigenvectors() * weighted);
}

MixedReading mixed_reading_density(const qcore::MixedState& mixed,
                                   const paths::PrePostSystem& system,
                                   const PointerConfig& config) {
  const auto& components = mixed.components();
  std::vector<PathAmplitudeSet> amps;
  std::vector<double> joint_weight;
  double total = 0.0;
  for (const auto& c : components) {
    amps.push_back(system.amplitudes(c.state));
    joint_weight.push_back(c.weight * arrival_probability(amps.back(), config));
    total += joint_weight.back();
  }
  if (!(total > kVanishingArrival)) {
    throw PostselectionError("no mixture component can reach the post-selected state", total);
  }

  std::vector<double> weights;
  for (double w : joint_weight) weights.push_back(w / total);

  std::vector<double> values(config.grid().points, 0.0);
  double mean = 0.0;
  bool first = true;
  for (std::size_t a = 0; a < components.size(); ++a) {
    if (weights[a] == 0.0) continue;
    const ReadingDensity rho = reading_density(amps[a], config);
    for (std::size_t i = 0; i < values.size(); ++i) {
      values[i] = first ? weights[a] * rho.values()[i] : values[i] + weights[a] * rho.values()[i];
    }
    first = false;
    mean += weights[a] * exact_mean_reading(amps[a], config);
  }

  const std::span<const double> c = config.eigenvalues();
  const auto classes = qcore::degeneracy_classes(c, qcore::default_degeneracy_tolerance(c));
  double strong_num = 0.0;
  double strong_den = 0.0;
  Complex weak_num = 0.0;
  double weak_den = 0.0;
  for (std::size_t a = 0; a < components.size(); ++a) {
    const double w = components[a].weight;
    for (const auto& cls : classes) {
      Complex s = 0.0;
      for (std::size_t j : cls) s += amps[a][j];
      strong_num += c[cls.front()] * w * std::norm(s);
      strong_den += w * std::norm(s);
    }
    const Complex total_amp = amps[a].sum();
    for (std::size_t j = 0; j < c.size(); ++j) weak_num += c[j] * w * std::conj(total_amp) * amps[a][j];
    weak_den += w * std::norm(total_amp);
  }

  MixedReading out{ReadingDensity(config.grid(), std::move(values)), std::move(weights), mean,
                   strong_num / strong_den,
                   weak_den > kVanishingArrival ? weak_num.real() / weak_den
                                                : std::nan("")};
  return out;
}

}  // namespace pathamp::pointer
