#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace embedgeom {

inline constexpr std::uint64_t kDefaultSeed = 42;

/// Fully resolved run configuration: defaults, then the optional JSON config
/// file, then EMBEDGEOM_SEED (seed only), then command-line flags.
struct RunConfig {
  std::string command;
  std::optional<std::string> items;
  std::optional<std::string> queries;
  std::optional<std::string> relevance;
  std::optional<std::string> sessions;
  std::optional<std::string> pca_model;
  std::optional<std::size_t> components;
  bool center_only = false;
  std::string measure = "cosine";
  std::size_t pool_size = 50;
  std::vector<std::size_t> cutoffs;  // command default: {100} search, {10, 50} sequential
  std::vector<double> epsilon{0.80, 0.95, 1.00};
  std::uint64_t sample_size = 100000;
  std::uint64_t seed = kDefaultSeed;
  std::size_t resamples = 10000;
  std::string aggregator = "last";
  double lambda = 0.8;
  std::string scope = "full";
  bool include_history = false;
  std::optional<std::vector<std::size_t>> grid;  // nullopt: auto
  std::string metric;
  std::string format;  // convert: evec | tsv (empty: from output extension)
  std::vector<std::string> inputs;  // positional: compare reports / convert source+destination
  std::string out = "out";
  std::size_t workers = 1;
};

/// Thrown by parse_run_config for --help; carries the rendered usage text.
struct HelpRequested {
  std::string text;
};

/// Parses and resolves a command line (args[0] is the program name).
/// Throws InputError on invalid configuration.
RunConfig parse_run_config(const std::vector<std::string>& args);

/// Config echo embedded in every output. Worker count and output directory
/// are omitted: neither affects results.
nlohmann::ordered_json config_echo(const RunConfig& config);

/// Runs the command; returns the process exit code (0 ok, 2 input/config
/// error, 3 numerical error).
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// parse_run_config + run with error-to-exit-code mapping.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace embedgeom
