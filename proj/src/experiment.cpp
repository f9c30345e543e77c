#include "pathamp/experiment.hpp"

#include <cerrno>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pathamp/error.hpp"
#include "pathamp/format.hpp"
#include "pathamp/sampler.hpp"

namespace pathamp::experiment {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::vector<std::string>& header) : path_(path), out_(path) {
    if (!out_) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
    for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
    out_ << "\n";
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << "\n";
  }

  void close() {
    out_.close();
    if (!out_) throw IoError("failed writing " + path_.string());
  }

 private:
  fs::path path_;
  std::ofstream out_;
};

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + ": " + std::strerror(errno));
  out << j.dump(2) << "\n";
  out.close();
  if (!out) throw IoError("failed writing " + path.string());
}

json complex_list(const CVector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back({v(i).real(), v(i).imag()});
  return out;
}

std::vector<double> interval_row(const sampler::IntervalPartition& p, std::size_t nu) {
  const auto cell = p.cell(nu);
  return {static_cast<double>(nu + 1), cell.lower, cell.upper};
}

double nan() { return std::nan(""); }

inverse::ReconstructionResult ground_truth(const paths::PathAmplitudeSet& amps,
                                           const pointer::PointerConfig& pointer) {
  return inverse::amplitudes_from_gram(
      pointer::GramMatrix::from_amplitudes(pointer::renormalized(amps, pointer)));
}

sampler::TrialRecord draw(const Setup& s, const paths::PathAmplitudeSet& amps) {
  return sampler::sample(pointer::reading_density(amps, s.pointer), s.config.trials, s.config.seed,
                         s.config.workers);
}

inverse::ReconstructionResult solve_counts(const Setup& s, const sampler::CountVector& counts) {
  inverse::SolveOptions options;
  options.trials = counts.total();
  const auto sol = inverse::solve_intervals(counts.frequencies(), s.partition, s.pointer, options);
  return inverse::amplitudes_from_solution(sol, s.pointer);
}

std::vector<fs::path> run_forward(const Setup& s, const fs::path& dir) {
  const auto amps = s.system.amplitudes(s.preparation);
  const CVector tilde = pointer::renormalized(amps, s.pointer);
  const auto& eig = s.pointer.eigenvalues();

  CsvWriter a(dir / "amplitudes.csv",
              {"j", "eigenvalue", "re_A", "im_A", "abs_A", "re_A_tilde", "im_A_tilde", "abs_A_tilde"});
  for (std::size_t j = 0; j < amps.size(); ++j) {
    const Complex t = tilde(static_cast<Eigen::Index>(j));
    a.row({static_cast<double>(j + 1), eig[j], amps[j].real(), amps[j].imag(), std::abs(amps[j]), t.real(),
           t.imag(), std::abs(t)});
  }
  a.close();

  const auto rho = pointer::reading_density(amps, s.pointer);
  const auto uncond = pointer::unconditional_density(s.system.one_step_amplitudes(s.preparation), s.pointer);
  CsvWriter d(dir / "density.csv", {"delta_f", "f", "rho", "rho_unconditional"});
  for (std::size_t i = 0; i < rho.size(); ++i) {
    d.row({s.pointer.delta_f(), rho.abscissa(i), rho.values()[i], uncond.values()[i]});
  }
  d.close();

  CsvWriter iv(dir / "intervals.csv", {"cell", "lower", "upper", "probability"});
  for (std::size_t nu = 0; nu < s.partition.cells(); ++nu) {
    auto row = interval_row(s.partition, nu);
    row.push_back(pointer::interval_probability(amps, s.pointer, s.partition.cell(nu),
                                                pointer::Conditioning::postselected));
    iv.row(row);
  }
  iv.close();

  const auto truth = ground_truth(amps, s.pointer);
  const auto strong = pointer::strong_limit_stats(amps, eig);
  const auto limits = pointer::arrival_limits(amps, eig);
  const auto cond = inverse::conditioning(inverse::interval_design(s.pointer, s.partition));
  json summary{
      {"delta_f", s.pointer.delta_f()},
      {"amplitudes", complex_list(amps.values)},
      {"renormalized_amplitudes", complex_list(tilde)},
      {"moduli", truth.moduli},
      {"phases", truth.phases},
      {"arrival_probability", pointer::arrival_probability(amps, s.pointer)},
      {"arrival_strong_limit", limits.strong},
      {"arrival_weak_limit", limits.weak},
      {"mean_reading", pointer::exact_mean_reading(amps, s.pointer)},
      {"mean_momentum", pointer::exact_mean_momentum(amps, s.pointer)},
      {"mean_reading_unconditional",
       pointer::unconditional_mean(s.system.one_step_amplitudes(s.preparation), eig)},
      {"strong_limit", {{"class_eigenvalues", strong.class_eigenvalues}, {"masses", strong.masses},
                        {"mean", strong.mean}}},
      {"interval_design", {{"abs_det", cond.abs_det}, {"sigma_min", cond.sigma_min}, {"rank", cond.rank}}},
  };
  try {
    const auto weak = pointer::weak_limit_stats(amps, eig, s.pointer.delta_f());
    summary["weak_limit"] = {{"alpha", complex_list(weak.alpha)}, {"mean_reading", weak.mean_reading},
                             {"mean_momentum", weak.mean_momentum}};
  } catch (const NumericalError&) {
    summary["weak_limit"] = nullptr;
  }
  write_json(dir / "summary.json", summary);
  return {dir / "amplitudes.csv", dir / "density.csv", dir / "intervals.csv", dir / "summary.json"};
}

std::vector<fs::path> run_simulate(const Setup& s, const fs::path& dir) {
  const auto amps = s.system.amplitudes(s.preparation);
  const auto record = draw(s, amps);
  {
    std::ofstream out(dir / "trials.csv");
    if (!out) throw IoError("cannot open " + (dir / "trials.csv").string() + ": " + std::strerror(errno));
    sampler::write_trials(out, record);
  }
  const auto counts = sampler::count(record, s.partition);
  const auto freq = counts.frequencies();
  CsvWriter c(dir / "counts.csv", {"cell", "lower", "upper", "count", "frequency", "probability"});
  for (std::size_t nu = 0; nu < s.partition.cells(); ++nu) {
    auto row = interval_row(s.partition, nu);
    row.push_back(static_cast<double>(counts.counts[nu]));
    row.push_back(freq[nu]);
    row.push_back(pointer::interval_probability(amps, s.pointer, s.partition.cell(nu),
                                                pointer::Conditioning::postselected));
    c.row(row);
  }
  c.close();
  return {dir / "trials.csv", dir / "counts.csv"};
}

std::vector<double> trace_values(std::size_t k, const inverse::ReconstructionResult& r, std::size_t n) {
  std::vector<double> row{static_cast<double>(k)};
  for (std::size_t j = 0; j < n; ++j) row.push_back(r.moduli[j]);
  for (std::size_t j = 1; j < n; ++j) row.push_back(r.phases[j]);
  for (std::size_t j = 0; j < n; ++j) row.push_back(r.se_moduli[j]);
  for (std::size_t j = 1; j < n; ++j) row.push_back(r.se_phases[j]);
  return row;
}

std::vector<fs::path> run_reconstruct(const Setup& s, const fs::path& dir) {
  const auto amps = s.system.amplitudes(s.preparation);
  const auto record = draw(s, amps);
  const std::size_t n = s.system.dimension();
  const std::size_t every = s.config.trace_every;

  CsvWriter trace(dir / "trace.csv", trace_header(n));
  sampler::CountVector counts{std::vector<std::size_t>(s.partition.cells(), 0)};
  for (std::size_t k = 0; k < record.trials(); ++k) {
    ++counts.counts[s.partition.cell_of(record.readings[k])];
    const std::size_t done = k + 1;
    if (done % every != 0 && done != record.trials()) continue;
    try {
      trace.row(trace_values(done, solve_counts(s, counts), n));
    } catch (const NumericalError&) {
      std::vector<double> row(trace_header(n).size(), nan());
      row[0] = static_cast<double>(done);
      trace.row(row);
    }
  }
  trace.close();

  inverse::SolveOptions options;
  options.trials = record.trials();
  const auto solution = inverse::solve_intervals(counts.frequencies(), s.partition, s.pointer, options);
  const auto result = inverse::amplitudes_from_solution(solution, s.pointer);
  const auto truth = ground_truth(amps, s.pointer);
  json report{
      {"trials", record.trials()},
      {"seed", record.seed},
      {"partition", s.partition.boundaries()},
      {"delta_f", s.pointer.delta_f()},
      {"result", inverse::to_json(result)},
      {"ground_truth", {{"moduli", truth.moduli}, {"phases", truth.phases}}},
  };
  write_json(dir / "reconstruction.json", report);
  std::vector<fs::path> written{dir / "trace.csv", dir / "reconstruction.json"};

  if (!s.config.predict_delta_f.empty()) {
    const std::vector<double> eig =
        s.config.predict_eigenvalues.empty() ? s.pointer.eigenvalues() : s.config.predict_eigenvalues;
    CsvWriter overlay(dir / "density_overlay.csv", {"delta_f", "f", "rho_reconstructed", "rho_exact", "rho_se"});
    for (double df : s.config.predict_delta_f) {
      const auto cfg = pointer::PointerConfig::with_default_grid(df, eig, s.config.grid_points);
      const auto predicted = inverse::predict_commuting(solution.gram, eig, df, s.config.grid_points);
      const auto exact = pointer::reading_density(amps, cfg);
      const auto band = inverse::prediction_band(solution, cfg);
      for (std::size_t i = 0; i < predicted.size(); ++i) {
        overlay.row({df, predicted.abscissa(i), predicted.values()[i], exact.values()[i], band[i]});
      }
    }
    overlay.close();
    written.push_back(dir / "density_overlay.csv");
  }
  return written;
}

std::vector<fs::path> run_sweep(const Setup& s, const fs::path& dir) {
  const auto amps = s.system.amplitudes(s.preparation);
  const auto widths = inverse::log_spaced(s.config.sweep_min, s.config.sweep_max, s.config.sweep_points);
  inverse::SweepOptions options;
  options.trials = s.config.trials;
  options.seed = s.config.seed;
  options.grid_points = s.config.grid_points;
  options.workers = s.config.workers;
  const auto rows = inverse::conditioning_sweep(amps, s.pointer.eigenvalues(), s.partition, widths, options);
  CsvWriter out(dir / "sweep.csv", {"delta_f", "abs_det", "sigma_min", "recon_error", "arrival_prob"});
  for (const auto& r : rows) out.row({r.delta_f, r.abs_det, r.sigma_min, r.recon_error, r.arrival_prob});
  out.close();
  return {dir / "sweep.csv"};
}

json state_json(const qcore::QuantumState& s) { return complex_list(s.coefficients()); }

std::vector<fs::path> run_tomography(const Setup& s, const fs::path& dir) {
  const auto amps = s.system.amplitudes(s.preparation);
  const auto record = draw(s, amps);
  const auto result = solve_counts(s, sampler::count(record, s.partition));
  const auto states = inverse::reconstruct_initial_state(result, s.system.final_state_at_measurement(),
                                                         s.system.measured);
  json report{
      {"trials", record.trials()},
      {"seed", record.seed},
      {"principal", state_json(states.principal)},
      {"conjugate", state_json(states.conjugate)},
      {"reconstruction", inverse::to_json(result)},
  };
  if (s.config.report_fidelity) {
    const auto truth = qcore::evolve(s.preparation, s.system.to_measurement);
    const double fp = qcore::fidelity(states.principal, truth);
    const double fc = qcore::fidelity(states.conjugate, truth);
    report["true_state"] = state_json(truth);
    report["fidelity_principal"] = fp;
    report["fidelity_conjugate"] = fc;
    report["fidelity_best"] = std::max(fp, fc);
  }
  write_json(dir / "tomography.json", report);
  return {dir / "tomography.json"};
}

}  // namespace

sampler::IntervalPartition default_partition(const pointer::PointerConfig& pointer) {
  return inverse::default_partition(pointer, 4 * inverse::unknown_count(pointer.dimension()));
}

Setup prepare(const config::ExperimentConfig& c) {
  auto built = config::build(c);
  auto pointer = pointer::PointerConfig::with_default_grid(c.delta_f, c.observable_eigenvalues, c.grid_points);
  auto partition = c.partition.empty() ? default_partition(pointer) : sampler::IntervalPartition(c.partition);
  paths::PrePostSystem system{built.to_measurement, built.observable, built.to_final, built.final_state};
  return {c, std::move(system), std::move(built.preparation), std::move(pointer), std::move(partition)};
}

std::vector<std::string> trace_header(std::size_t n) {
  std::vector<std::string> h{"K"};
  auto phase_name = [&](const std::string& prefix, std::size_t j) {
    return n == 2 ? prefix + "phi" : prefix + "phi_" + std::to_string(j + 1);
  };
  for (std::size_t j = 0; j < n; ++j) h.push_back("mod_A" + std::to_string(j + 1));
  for (std::size_t j = 1; j < n; ++j) h.push_back(phase_name("", j));
  for (std::size_t j = 0; j < n; ++j) h.push_back("se_mod_A" + std::to_string(j + 1));
  for (std::size_t j = 1; j < n; ++j) h.push_back(phase_name("se_", j));
  return h;
}

std::vector<fs::path> run(const config::ExperimentConfig& c, const std::string& mode, const fs::path& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  const Setup s = prepare(c);
  if (mode == "forward") return run_forward(s, out_dir);
  if (mode == "simulate") return run_simulate(s, out_dir);
  if (mode == "reconstruct") return run_reconstruct(s, out_dir);
  if (mode == "sweep") return run_sweep(s, out_dir);
  if (mode == "tomography") return run_tomography(s, out_dir);
  throw InvalidArgument("unknown mode '" + mode + "'");
}

}  // namespace pathamp::experiment
