#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "pathamp/error.hpp"
#include "pathamp/numeric.hpp"
#include "pathamp/pointer.hpp"

using namespace pathamp;
using namespace pathamp::pointer;
using paths::PathAmplitudeSet;
using paths::PrePostSystem;
using qcore::Observable;
using qcore::QuantumState;

namespace {

namespace f4 = fixtures::fig4;

double integrate(const std::vector<double>& v, const Grid& g) { return trapezoid(v, g.spacing()); }

// Fine trapezoid integral of |sum_j G_j(f) a_j|^2 over [a, b], infinite ends
// cut 20 df beyond the eigenvalue range.
double direct_mass(const CVector& a, const PointerConfig& config, double lo, double hi) {
  lo = std::max(lo, config.min_eigenvalue() - 20.0 * config.delta_f());
  hi = std::min(hi, config.max_eigenvalue() + 20.0 * config.delta_f());
  const std::size_t n = 400001;
  const double h = (hi - lo) / static_cast<double>(n - 1);
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double f = lo + static_cast<double>(i) * h;
    Complex s = 0.0;
    for (std::size_t j = 0; j < config.dimension(); ++j) s += gaussian(config, f, j) * a(static_cast<Eigen::Index>(j));
    v[i] = std::norm(s);
  }
  return trapezoid(v, h);
}

PathAmplitudeSet amplitude_set(std::initializer_list<Complex> values) {
  CVector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (Complex z : values) v(i++) = z;
  return {v};
}

// Orthonormal basis whose first column is d.
CMatrix completed_basis(const CVector& d) {
  const auto n = d.size();
  CMatrix seed(n, n);
  seed << d, CMatrix::Identity(n, n).rightCols(n - 1);
  CMatrix q = Eigen::HouseholderQR<CMatrix>(seed).householderQ();
  q.col(0) = d;
  return q;
}

}  // namespace

TEST_CASE("Gaussian pointer normalization") {
  for (double df : {0.1, 1.0, 7.5}) {
    const PointerConfig config = PointerConfig::with_default_grid(df, {-1.0, 1.0});
    CHECK(gaussian(config, -1.0, 0) == doctest::Approx(std::pow(std::numbers::pi * df * df, -0.25)).epsilon(1e-15));
    std::vector<double> g2(config.grid().points);
    std::vector<double> ggpp(config.grid().points);
    const double h = 1e-4 * df;
    for (std::size_t i = 0; i < g2.size(); ++i) {
      const double f = config.grid().at(i);
      const double g = gaussian(config, f, 1);
      g2[i] = g * g;
      const double second =
          (gaussian(config, f + h, 1) - 2.0 * g + gaussian(config, f - h, 1)) / (h * h);
      ggpp[i] = g * second;
    }
    CHECK(std::abs(integrate(g2, config.grid()) - 1.0) < 1e-10);
    CHECK(integrate(ggpp, config.grid()) == doctest::Approx(-1.0 / (2.0 * df * df)).epsilon(1e-5));
  }
}

TEST_CASE("pointer configuration validation") {
  CHECK_THROWS_AS(PointerConfig::with_default_grid(0.0, {1.0, -1.0}), InvalidArgument);
  CHECK_THROWS_AS(PointerConfig::with_default_grid(1.0, {1.0, -1.0}, 100), InvalidArgument);
  CHECK_THROWS_AS(PointerConfig(1.0, {1.0, -1.0}, Grid{-5.0, 7.0, 1024}), InvalidArgument);
  CHECK_NOTHROW(PointerConfig(1.0, {1.0, -1.0}, Grid{-7.0, 7.0, 1024}));
}

TEST_CASE("overlap integrals") {
  const PointerConfig config = fixtures::fig4_pointer();
  const RMatrix full = overlap_integrals(config, {});
  CHECK(full(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(full(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(full(0, 1) - std::exp(-1.0)) < 1e-15);
  CHECK(full(0, 1) == full(1, 0));

  // Closed form against quadrature on the grid, full line and a finite cell.
  std::vector<double> prod(config.grid().points);
  std::vector<double> cell(config.grid().points);
  for (std::size_t i = 0; i < prod.size(); ++i) {
    const double f = config.grid().at(i);
    prod[i] = gaussian(config, f, 0) * gaussian(config, f, 1);
  }
  CHECK(std::abs(integrate(prod, config.grid()) - std::exp(-1.0)) < 1e-10);
  const Interval middle{-0.33, 0.9};
  const double fine = [&] {
    const std::size_t n = 400001;
    const double h = (middle.upper - middle.lower) / static_cast<double>(n - 1);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double f = middle.lower + static_cast<double>(i) * h;
      v[i] = gaussian(config, f, 0) * gaussian(config, f, 1);
    }
    return trapezoid(v, h);
  }();
  CHECK(std::abs(overlap_integrals(config, middle)(0, 1) - fine) < 1e-10);

  const RMatrix narrow = overlap_integrals(fixtures::fig4_pointer(1e-3), {});
  CHECK(narrow(0, 1) == 0.0);
  CHECK_THROWS_AS(overlap(1.0, 0.0, 1.0, {1.0, 1.0}), InvalidArgument);
}

TEST_CASE("reading density") {
  SUBCASE("single path gives a squared Gaussian") {
    const PointerConfig config = fixtures::fig4_pointer();
    const ReadingDensity rho = reading_density(amplitude_set({0.0, Complex(0.3, -0.2)}), config);
    for (std::size_t i = 0; i < rho.size(); i += 97) {
      const double g = gaussian(config, rho.abscissa(i), 1);
      CHECK(std::abs(rho.values()[i] - g * g) < 1e-14);
    }
  }
  SUBCASE("reference system masses match quadrature fixtures") {
    const PointerConfig config = fixtures::fig4_pointer();
    const PathAmplitudeSet amps = fixtures::fig4_amplitudes();
    const ReadingDensity rho = reading_density(amps, config);
    CHECK(std::abs(rho.integral() - 1.0) < 1e-8);
    CHECK(rho.min_value() >= 0.0);
    const double b0 = f4::kBoundaries[0];
    const double b1 = f4::kBoundaries[1];
    const Interval cells[3] = {{-kInf, b0}, {b0, b1}, {b1, kInf}};
    for (int m = 0; m < 3; ++m) {
      const double p = interval_probability(amps, config, cells[m], Conditioning::postselected);
      CHECK(std::abs(p - f4::kMasses[m]) < 1e-12);
      CHECK(std::abs(direct_mass(renormalized(amps, config), config, cells[m].lower, cells[m].upper) - p) < 1e-8);
    }
  }
  SUBCASE("cancelling amplitudes vanish at the symmetric point") {
    const PointerConfig config = PointerConfig::with_default_grid(0.7, {-1.0, 1.0}, 4097);
    const ReadingDensity rho = reading_density(amplitude_set({Complex(0.4, 0.3), Complex(-0.4, -0.3)}), config);
    CHECK(rho.values()[2048] == doctest::Approx(0.0));
    CHECK(std::abs(rho.abscissa(2048)) < 1e-14);
    CHECK(std::abs(rho.value_at(0.0)) < 1e-15);
  }
  SUBCASE("impossible post-selection") {
    CHECK_THROWS_AS(reading_density(amplitude_set({0.0, 0.0}), fixtures::fig4_pointer()), PostselectionError);
  }
}

TEST_CASE("densities integrate to one for random amplitudes") {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> width(0.05, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
    std::vector<double> c(n);
    for (std::size_t j = 0; j < n; ++j) c[j] = static_cast<double>(j) - 0.3 * static_cast<double>(trial % 2);
    const PointerConfig config = PointerConfig::with_default_grid(width(rng), c);
    const PathAmplitudeSet amps{fixtures::random_vector(rng, n)};
    const ReadingDensity rho = reading_density(amps, config);
    CHECK(std::abs(rho.integral() - 1.0) < 1e-8);
    CHECK(rho.min_value() >= 0.0);
    CHECK(std::abs(rho.mean() - exact_mean_reading(amps, config)) < 1e-8);
    const GramMatrix x = GramMatrix::from_amplitudes(renormalized(amps, config));
    CHECK(x.cauchy_schwarz_violation() <= 1e-12);
    CHECK(std::abs(x.normalization(config) - 1.0) < 1e-12);
  }
}

TEST_CASE("interval probabilities") {
  const PointerConfig config = fixtures::fig4_pointer();
  const PathAmplitudeSet amps = fixtures::fig4_amplitudes();
  CHECK(interval_probability(amps, config, {}, Conditioning::postselected) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(interval_probability(amps, config, {}, Conditioning::joint) - f4::kArrival) < 1e-13);
  CHECK(std::abs(arrival_probability(amps, config) - f4::kArrival) < 1e-13);
}

TEST_CASE("degenerate eigenvalues merge coherently") {
  std::mt19937_64 rng(7);
  const PathAmplitudeSet amps{fixtures::random_vector(rng, 3)};
  const PointerConfig triple = PointerConfig::with_default_grid(0.6, {1.0, 1.0, -1.0});
  const PointerConfig pair = PointerConfig::with_default_grid(0.6, {1.0, -1.0});
  CVector merged(2);
  merged << amps[0] + amps[1], amps[2];
  const ReadingDensity a = reading_density(amps, triple);
  const ReadingDensity b = reading_density({merged}, pair);
  REQUIRE(a.grid() == b.grid());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a.values()[i] - b.values()[i]) < 1e-13);
}

TEST_CASE("arrival probability between its limits") {
  const PathAmplitudeSet amps = fixtures::fig4_amplitudes();
  const ArrivalLimits limits = arrival_limits(amps, f4::kEigenvalues);
  CHECK(std::abs(limits.strong - (std::norm(amps[0]) + std::norm(amps[1]))) < 1e-15);
  CHECK(std::abs(limits.weak - std::norm(amps.sum())) < 1e-15);

  const std::vector<double> ends{2e-3, 2e3};
  const auto curve = arrival_curve(amps, f4::kEigenvalues, ends);
  CHECK(std::abs(curve[0] - limits.strong) < 1e-6);
  CHECK(std::abs(curve[1] - limits.weak) < 1e-6);

  std::vector<double> widths;
  for (int i = 0; i <= 40; ++i) widths.push_back(std::pow(10.0, -3.0 + 0.15 * i));
  const auto full = arrival_curve(amps, f4::kEigenvalues, widths);
  for (std::size_t i = 1; i < full.size(); ++i) CHECK(full[i] >= full[i - 1] - 1e-15);

  // Cross terms Re(conj(A_2) A_1) = 0: flat curve.
  const auto flat = arrival_curve(amplitude_set({0.6, Complex(0.0, 0.5)}), f4::kEigenvalues, widths);
  for (double v : flat) CHECK(std::abs(v - 0.61) < 1e-15);
}

TEST_CASE("strong limit") {
  SUBCASE("equal moduli with symmetric eigenvalues") {
    const auto s = strong_limit_stats(amplitude_set({Complex(0.5, 0.1), Complex(-0.1, 0.5)}), f4::kEigenvalues);
    CHECK(std::abs(s.mean) < 1e-15);
  }
  SUBCASE("reference system point masses") {
    const PathAmplitudeSet amps = fixtures::fig4_amplitudes();
    const auto s = strong_limit_stats(amps, f4::kEigenvalues);
    const double total = std::norm(amps[0]) + std::norm(amps[1]);
    CHECK(std::abs(s.masses[0] - std::norm(amps[0]) / total) < 1e-15);
    CHECK(std::abs(s.masses[1] - std::norm(amps[1]) / total) < 1e-15);
    CHECK(std::abs(s.masses[0] - f4::kModuli[0] * f4::kModuli[0] / (f4::kModuli[0] * f4::kModuli[0] + f4::kModuli[1] * f4::kModuli[1])) < 1e-12);

    // Intervals of +-3 df around each eigenvalue at df = 1e-3 * gap.
    const PointerConfig narrow = fixtures::fig4_pointer(2e-3);
    for (std::size_t j = 0; j < 2; ++j) {
      const double c = f4::kEigenvalues[j];
      const double p = interval_probability(amps, narrow, {c - 6e-3, c + 6e-3}, Conditioning::postselected);
      CHECK(std::abs(p - s.masses[j]) < 1e-4);
    }
  }
  SUBCASE("projector mean with a cancelling complement") {
    std::mt19937_64 rng(9);
    const QuantumState b(fixtures::random_vector(rng, 3));
    const qcore::Unitary u1 = fixtures::random_unitary(rng, 3);
    const qcore::Unitary u2 = fixtures::random_unitary(rng, 3);
    const QuantumState d = fixtures::cancelling_final(b, u1, u2, 1, 2);
    const std::vector<double> projector{1.0, 0.0, 0.0};
    const PrePostSystem system{u1, Observable::diagonal(projector), u2, d};
    const PathAmplitudeSet amps = system.amplitudes(b);
    REQUIRE(std::abs(amps[0]) > 1e-3);
    const auto s = strong_limit_stats(amps, projector);
    CHECK(std::abs(s.mean - 1.0) < 1e-12);
    CHECK(s.incoherent_mean < 0.99);

    // Generic complement: coherent and incoherent expressions differ.
    const PathAmplitudeSet generic{fixtures::random_vector(rng, 3)};
    const auto g = strong_limit_stats(generic, projector);
    const double a1 = std::norm(generic[0]);
    CHECK(std::abs(g.mean - a1 / (a1 + std::norm(generic[1] + generic[2]))) < 1e-14);
    CHECK(std::abs(g.mean - g.incoherent_mean) > 1e-3);
  }
}

TEST_CASE("weak limit") {
  const PathAmplitudeSet amps = fixtures::fig4_amplitudes();
  SUBCASE("relative amplitudes sum to one") {
    const auto w = weak_limit_stats(amps, f4::kEigenvalues, 1.0);
    CHECK(std::abs(w.alpha.sum() - Complex(1.0, 0.0)) < 1e-15);
  }
  SUBCASE("real amplitudes carry no momentum shift") {
    const std::vector<double> c{1.0, 0.0, -2.0};
    const auto w = weak_limit_stats(amplitude_set({0.3, -0.8, 0.2}), c, 3.0);
    CHECK(w.mean_momentum == 0.0);
  }
  SUBCASE("vanishing amplitude sum") {
    CHECK_THROWS_AS(weak_limit_stats(amplitude_set({0.3, -0.3}), f4::kEigenvalues, 1.0), NumericalError);
  }
  SUBCASE("projector reading converges to Re alpha") {
    const std::vector<double> projector{1.0, 0.0};
    const auto w = weak_limit_stats(amps, projector, 1.0);
    double previous = kInf;
    for (double df : {5.0, 10.0, 20.0, 40.0}) {
      const PointerConfig config = PointerConfig::with_default_grid(df, projector);
      const double err = std::abs(exact_mean_reading(amps, config) - w.alpha(0).real());
      CHECK(err < previous);
      previous = err;
    }
    CHECK(previous < 1e-3);

    const PointerConfig wide = PointerConfig::with_default_grid(50.0, projector);
    const ReadingDensity rho = reading_density(amps, wide);
    CHECK(std::abs(rho.mean() - w.alpha(0).real()) < 1e-3);
  }
  SUBCASE("momentum density mean matches Im alpha / df^2") {
    const std::vector<double> projector{1.0, 0.0};
    const double df = 50.0;
    const PointerConfig wide = PointerConfig::with_default_grid(df, projector);
    const auto w = weak_limit_stats(amps, projector, df);
    const ReadingDensity lambda = momentum_density(amps, wide);
    CHECK(std::abs(lambda.integral() - 1.0) < 1e-8);
    const double expected = std::abs(w.alpha(0).imag()) / (df * df);
    CHECK(std::abs(std::abs(lambda.mean()) - expected) < 0.05 * expected);
    // Sign convention: the density, the exact moment and the weak formula agree.
    CHECK(lambda.mean() * w.mean_momentum > 0.0);
    CHECK(std::abs(lambda.mean() - exact_mean_momentum(amps, wide)) < 1e-6 * expected);
  }
}

TEST_CASE("momentum density symmetries") {
  const PointerConfig config = PointerConfig::with_default_grid(0.8, {-1.0, 1.0});
  SUBCASE("single path has zero mean") {
    const ReadingDensity lambda = momentum_density(amplitude_set({0.0, Complex(0.2, 0.9)}), config);
    CHECK(std::abs(lambda.mean()) < 1e-12);
    const double df = config.delta_f();
    for (std::size_t i = 0; i < lambda.size(); i += 211) {
      const double l = lambda.abscissa(i);
      CHECK(std::abs(lambda.values()[i] - df / std::sqrt(std::numbers::pi) * std::exp(-l * l * df * df)) < 1e-14);
    }
  }
  SUBCASE("real amplitudes with symmetric eigenvalues give an even density") {
    const ReadingDensity lambda = momentum_density(amplitude_set({0.7, -0.2}), config);
    const std::size_t n = lambda.size();
    for (std::size_t i = 0; i < n; i += 37) CHECK(std::abs(lambda.values()[i] - lambda.values()[n - 1 - i]) < 1e-13);
    CHECK(std::abs(lambda.mean()) < 1e-12);
  }
}

TEST_CASE("no post-selection") {
  SUBCASE("eigenstate input") {
    const PointerConfig config = fixtures::fig4_pointer(0.4);
    CVector one(2);
    one << 0.0, Complex(0.0, 1.0);
    const ReadingDensity rho = unconditional_density(one, config);
    for (std::size_t i = 0; i < rho.size(); i += 101) {
      const double g = gaussian(config, rho.abscissa(i), 1);
      CHECK(std::abs(rho.values()[i] - g * g) < 1e-15);
    }
  }
  SUBCASE("equal superposition has zero mean at every width") {
    CVector half(2);
    half << std::sqrt(0.5), Complex(0.0, std::sqrt(0.5));
    CHECK(unconditional_mean(half, f4::kEigenvalues) == 0.0);
    for (double df : {0.01, 0.3, 1.0, 10.0}) {
      CHECK(std::abs(unconditional_density(half, fixtures::fig4_pointer(df)).mean()) < 1e-10);
    }
  }
  SUBCASE("summing post-selected joint densities over a final basis") {
    const auto system = fixtures::fig4_system();
    const QuantumState b = fixtures::fig4_preparation();
    const CMatrix basis = completed_basis(fixtures::fig4_final().coefficients());
    for (double df : {0.1, 1.0, 4.0}) {
      const PointerConfig config = fixtures::fig4_pointer(df);
      std::vector<double> sum(config.grid().points, 0.0);
      for (Eigen::Index k = 0; k < basis.cols(); ++k) {
        const PrePostSystem post{system.to_measurement, system.measured, system.to_final,
                                 QuantumState(CVector(basis.col(k)))};
        const auto joint = joint_density_values(post.amplitudes(b), config);
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += joint[i];
      }
      const ReadingDensity rho = unconditional_density(system.one_step_amplitudes(b), config);
      double worst = 0.0;
      for (std::size_t i = 0; i < sum.size(); ++i) worst = std::max(worst, std::abs(sum[i] - rho.values()[i]));
      CHECK(worst < 1e-10);
      CHECK(std::abs(rho.mean() - unconditional_mean(system.one_step_amplitudes(b), f4::kEigenvalues)) < 1e-10);
    }
  }
  SUBCASE("the same identity for a random three-level system") {
    std::mt19937_64 rng(13);
    const QuantumState b(fixtures::random_vector(rng, 3));
    const PrePostSystem base{fixtures::random_unitary(rng, 3), Observable::diagonal({-1.0, 0.5, 2.0}),
                             fixtures::random_unitary(rng, 3), QuantumState::basis(3, 0)};
    const PointerConfig config = PointerConfig::with_default_grid(0.7, {-1.0, 0.5, 2.0});
    std::vector<double> sum(config.grid().points, 0.0);
    for (std::size_t k = 0; k < 3; ++k) {
      PrePostSystem post = base;
      post.final_state = QuantumState::basis(3, k);
      const auto joint = joint_density_values(post.amplitudes(b), config);
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += joint[i];
    }
    const ReadingDensity rho = unconditional_density(base.one_step_amplitudes(b), config);
    for (std::size_t i = 0; i < sum.size(); ++i) CHECK(std::abs(sum[i] - rho.values()[i]) < 1e-10);
  }
}

TEST_CASE("post-measurement state") {
  const Observable z = Observable::diagonal(f4::kEigenvalues);
  const QuantumState psi = fixtures::fig4_preparation();
  SUBCASE("accurate reading projects") {
    const QuantumState after = post_measurement_state(psi, z, 1e-2, -1.0);
    CHECK(qcore::fidelity(after, QuantumState::basis(2, 1)) > 1.0 - 1e-12);
  }
  SUBCASE("inaccurate reading barely perturbs") {
    for (double f : {-0.5, 0.0, 0.3}) {
      CHECK(qcore::fidelity(post_measurement_state(psi, z, 1e3, f), psi) > 1.0 - 1e-4);
    }
  }
  SUBCASE("eigenstate input is unchanged") {
    const QuantumState after = post_measurement_state(QuantumState::basis(2, 0), z, 0.5, 3.0);
    CHECK(qcore::fidelity(after, QuantumState::basis(2, 0)) == doctest::Approx(1.0).epsilon(1e-15));
  }
  SUBCASE("impossible reading") {
    CHECK_THROWS_AS(post_measurement_state(QuantumState::basis(2, 0), z, 1e-3, 40.0), NumericalError);
  }
}

TEST_CASE("mixed preparations") {
  const auto system = fixtures::fig4_system();
  const PointerConfig config = fixtures::fig4_pointer();
  const QuantumState b = fixtures::fig4_preparation();

  SUBCASE("single component reproduces the pure density exactly") {
    const MixedReading m = mixed_reading_density(qcore::MixedState({{1.0, b}}), system, config);
    const ReadingDensity pure = reading_density(system.amplitudes(b), config);
    CHECK(m.density.values() == pure.values());
    CHECK(m.mean == exact_mean_reading(system.amplitudes(b), config));
  }
  SUBCASE("identical components reproduce the pure density") {
    const MixedReading m = mixed_reading_density(qcore::MixedState({{0.5, b}, {0.5, b}}), system, config);
    const ReadingDensity pure = reading_density(system.amplitudes(b), config);
    for (std::size_t i = 0; i < pure.size(); ++i) CHECK(std::abs(m.density.values()[i] - pure.values()[i]) < 1e-15);
  }
  SUBCASE("orthogonal preparations against brute-force limits") {
    const CVector v = b.coefficients();
    CVector w(2);
    w << -std::conj(v(1)), std::conj(v(0));
    const QuantumState b2(w);
    const double weights[2] = {0.3, 0.7};
    const qcore::MixedState mixed({{weights[0], b}, {weights[1], b2}});
    const MixedReading m = mixed_reading_density(mixed, system, config);
    CHECK(std::abs(m.density.integral() - 1.0) < 1e-8);

    const QuantumState comps[2] = {b, b2};
    double strong_num = 0.0;
    double strong_den = 0.0;
    Complex weak_num = 0.0;
    double weak_den = 0.0;
    double joint_weights[2];
    for (int a = 0; a < 2; ++a) {
      const CVector beta = system.to_measurement.matrix() * comps[a].coefficients();
      const CVector dt = system.to_final.matrix().adjoint() * system.final_state.coefficients();
      Complex total = 0.0;
      Complex amp[2];
      for (int j = 0; j < 2; ++j) {
        amp[j] = std::conj(dt(j)) * beta(j);
        total += amp[j];
        strong_num += weights[a] * f4::kEigenvalues[static_cast<std::size_t>(j)] * std::norm(amp[j]);
        strong_den += weights[a] * std::norm(amp[j]);
      }
      for (int j = 0; j < 2; ++j) weak_num += weights[a] * f4::kEigenvalues[static_cast<std::size_t>(j)] * std::conj(total) * amp[j];
      weak_den += weights[a] * std::norm(total);
      joint_weights[a] = weights[a] * (std::norm(amp[0]) + std::norm(amp[1]) +
                                       2.0 * std::exp(-1.0) * (std::conj(amp[1]) * amp[0]).real());
    }
    CHECK(std::abs(m.strong_mean - strong_num / strong_den) < 1e-10);
    CHECK(std::abs(m.weak_mean - weak_num.real() / weak_den) < 1e-10);
    const double sum_w = joint_weights[0] + joint_weights[1];
    CHECK(std::abs(m.component_weights[0] - joint_weights[0] / sum_w) < 1e-12);

    // Strong and weak means are the limits of the exact mean.
    const MixedReading narrow = mixed_reading_density(mixed, system, fixtures::fig4_pointer(1e-3));
    CHECK(std::abs(narrow.mean - m.strong_mean) < 1e-10);
    const MixedReading wide = mixed_reading_density(mixed, system, fixtures::fig4_pointer(2e3));
    CHECK(std::abs(wide.mean - m.weak_mean) < 1e-5);
  }
  SUBCASE("unreachable post-selection") {
    const PrePostSystem blocked{qcore::Unitary::identity(2), Observable::diagonal(f4::kEigenvalues),
                                qcore::Unitary::identity(2), QuantumState::basis(2, 1)};
    CHECK_THROWS_AS(mixed_reading_density(qcore::MixedState({{1.0, QuantumState::basis(2, 0)}}), blocked, config),
                    PostselectionError);
  }
}
