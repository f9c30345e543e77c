// pathamp: run forward computations, simulations, reconstructions, sweeps
// and tomography from a key = value configuration.
//
// Exit codes: 0 success, CLI11 codes on usage errors, 2 configuration, 3 numerical failure,
// 4 I/O. Errors are reported on stderr as one JSON object.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathamp/config.hpp"
#include "pathamp/error.hpp"
#include "pathamp/experiment.hpp"

namespace {

int report(int code, nlohmann::json error) {
  std::cerr << error.dump() << "\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Path-amplitude pointer experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trace_every;

  for (const auto& mode : pathamp::config::modes()) {
    auto* sub = app.add_subcommand(mode, "run the " + mode + " mode");
    sub->add_option("--config", config_path, "configuration file")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "override the configured seed");
    sub->add_option("--trace-every", trace_every, "trials between convergence trace rows");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  const std::string mode = app.get_subcommands().front()->get_name();

  using nlohmann::json;
  try {
    auto config = pathamp::config::load(config_path);
    if (seed) config.seed = *seed;
    if (trace_every) {
      if (*trace_every == 0) throw pathamp::config::ConfigError("trace_every: must be positive", 0, "trace_every");
      config.trace_every = *trace_every;
    }
    for (const auto& path : pathamp::experiment::run(config, mode, out_dir)) std::cout << path.string() << "\n";
    return 0;
  } catch (const pathamp::config::ConfigError& e) {
    return report(2, {{"error", "config"}, {"message", e.what()}, {"line", e.line()}, {"field", e.field()}});
  } catch (const pathamp::RankDeficientError& e) {
    return report(3, {{"error", "rank_deficient"}, {"message", e.what()}, {"sigma_min", e.sigma_min()}});
  } catch (const pathamp::PostselectionError& e) {
    return report(3, {{"error", "postselection"}, {"message", e.what()}, {"denominator", e.denominator()}});
  } catch (const pathamp::NumericalError& e) {
    return report(3, {{"error", "numerical"}, {"message", e.what()}, {"diagnostic", e.diagnostic()}});
  } catch (const pathamp::IoError& e) {
    return report(4, {{"error", "io"}, {"message", e.what()}});
  } catch (const pathamp::InvalidArgument& e) {
    return report(2, {{"error", "invalid_argument"}, {"message", e.what()}, {"diagnostic", e.diagnostic()}});
  } catch (const std::exception& e) {
    return report(3, {{"error", "internal"}, {"message", e.what()}});
  }
}
