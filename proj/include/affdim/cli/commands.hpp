#pragma once

// The affine-dim commands. Each one takes a parsed spec and writes a report;
// all sampling is driven by a single seed so repeated runs are byte-identical.
//
// Real numbers in JSON reports are {"value": x, "error": e}, where e is the
// error estimate or tolerance documented in the README. NaN prints as null.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "affdim/cli/system_spec.hpp"
#include "json.hpp"

namespace affdim::cli {

using Json = nlohmann::ordered_json;

struct CommandOptions {
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> depth;
  std::optional<double> tol;
  bool relaxed_bound = false;
  std::vector<double> s_grid;      // pressure; empty → 0, 0.1, …, 2
  std::vector<std::string> words;  // directions; empty → all words of length depth
  std::size_t samples = 50;
};

/// "0:2:0.25" (inclusive range) or "0,0.5,1".
std::vector<double> parse_s_grid(const std::string& text);

Json cmd_dimension(const SystemSpec& spec, const CommandOptions& opts);
/// CSV n,s,pressure,movement; movement = |P_n(s) − P_{n−1}(s)|, inf at n = 1.
void cmd_pressure(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv);
/// CSV word,es_angle,es_error,ess_angle,ess_error; angles in radians in [0, π).
void cmd_directions(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv);
Json cmd_transversality(const SystemSpec& spec, const CommandOptions& opts);
/// Writes the point cloud as CSV and SVG and returns a short summary.
Json cmd_render(const SystemSpec& spec, const CommandOptions& opts, std::ostream& csv, std::ostream& svg);

/// Loads the system file, runs one command and routes its output to `out` or to
/// files under opts.out_dir. Returns the process exit code: 0 on success,
/// 1 for spec/schema errors, 2 for violated preconditions.
int run_command(const std::string& command, const std::string& spec_path, const CommandOptions& opts,
                std::ostream& out, std::ostream& err);

}  // namespace affdim::cli
