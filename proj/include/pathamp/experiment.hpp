#pragma once

// Mode dispatch for the command-line runner. Every mode writes into an
// output directory; file names and CSV headers are fixed:
//
//   forward      amplitudes.csv  j,eigenvalue,re_A,im_A,abs_A,re_A_tilde,im_A_tilde,abs_A_tilde
//                density.csv     delta_f,f,rho,rho_unconditional
//                intervals.csv   cell,lower,upper,probability
//                summary.json
//   simulate     trials.csv      '# seed=S K=N', then one reading per line
//                counts.csv      cell,lower,upper,count,frequency,probability
//   reconstruct  reconstruction.json
//                trace.csv       K,mod_A1,mod_A2,phi,se_mod_A1,se_mod_A2,se_phi  (N = 2)
//                density_overlay.csv  delta_f,f,rho_reconstructed,rho_exact,rho_se
//   sweep        sweep.csv       delta_f,abs_det,sigma_min,recon_error,arrival_prob
//   tomography   tomography.json
//
// For N > 2 the trace lists mod_A1..mod_AN, phi_2..phi_N and the matching
// se_ columns.

#include <filesystem>
#include <string>
#include <vector>

#include "pathamp/config.hpp"
#include "pathamp/inverse.hpp"
#include "pathamp/paths.hpp"
#include "pathamp/pointer.hpp"

namespace pathamp::experiment {

struct Setup {
  config::ExperimentConfig config;
  paths::PrePostSystem system;
  qcore::QuantumState preparation;
  pointer::PointerConfig pointer;
  sampler::IntervalPartition partition;
};

Setup prepare(const config::ExperimentConfig& config);

// Cells used when a config gives no partition: 4P equal-width cells over
// [min C - df, max C + df].
sampler::IntervalPartition default_partition(const pointer::PointerConfig& pointer);

std::vector<std::string> trace_header(std::size_t dimension);

// Runs `mode` (one of config::modes()) and returns the files written.
std::vector<std::filesystem::path> run(const config::ExperimentConfig& config, const std::string& mode,
                                       const std::filesystem::path& out_dir);

}  // namespace pathamp::experiment
