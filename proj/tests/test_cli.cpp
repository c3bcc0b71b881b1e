#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "affdim/cli/commands.hpp"
#include "affdim/cli/system_spec.hpp"

using namespace affdim;
using namespace affdim::cli;
using doctest::Approx;

namespace {

std::string data(const std::string& name) { return std::string(AFFDIM_TEST_DATA) + "/" + name; }

SpecError spec_error(const std::string& text) {
  try {
    parse_system_spec(text);
  } catch (const SpecError& e) {
    return e;
  }
  FAIL("expected a spec error");
  return SpecError(0, "", "");
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    out.push_back(line);
  }
  return out;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string f; std::getline(in, f, ',');) {
    out.push_back(f);
  }
  return out;
}

}  // namespace

TEST_CASE("spec parsing") {
  const auto spec = load_system_spec(data("positive.json"));
  CHECK(spec.matrices.size() == 3);
  REQUIRE(spec.translations.has_value());
  CHECK(spec.translations->size() == 3);
  CHECK(spec.potential.kind == "kaenmaki");
  CHECK(spec.budgets.pressure_depth == 10);
  CHECK(spec.budgets.cylinder_depth == 6);
  CHECK(spec.tolerances.pressure == 1e-4);
  check_preconditions(spec);
}

TEST_CASE("schema errors name the line and the field") {
  const auto bad_matrix = spec_error("{\n  \"version\": 1,\n  \"matrices\": [[0.5, 0, 0]]\n}");
  CHECK(bad_matrix.line() == 3);
  CHECK(bad_matrix.field() == "/matrices/0");

  const auto unknown = spec_error("{\n  \"version\": 1,\n  \"matrices\": [[0.5, 0, 0, 0.5]],\n  \"colour\": 3\n}");
  CHECK(unknown.line() == 4);
  CHECK(unknown.field() == "/colour");

  const auto version = spec_error("{\"version\": 2, \"matrices\": [[0.5, 0, 0, 0.5]]}");
  CHECK(version.field() == "/version");

  const auto missing = spec_error("{\n  \"version\": 1\n}");
  CHECK(missing.field() == "/matrices");

  const auto translations =
      spec_error("{\"version\": 1, \"matrices\": [[0.5,0,0,0.5],[0.5,0,0,0.5]], \"translations\": [[0,0]]}");
  CHECK(translations.field() == "/translations");

  const auto weights = spec_error(
      "{\"version\": 1, \"matrices\": [[0.5,0,0,0.5]],\n \"potential\": {\"kind\": \"bernoulli\", \"weights\": [-1]}}");
  CHECK(weights.line() == 2);

  const auto budget = spec_error("{\"version\": 1, \"matrices\": [[0.5,0,0,0.5]], \"budgets\": {\"cloud_depth\": -3}}");
  CHECK(budget.field() == "/budgets/cloud_depth");

  const auto malformed = spec_error("{\n\"version\": 1,\n\"matrices\": [[0.5, 0, 0, 0.5]\n");
  CHECK(malformed.line() >= 3);

  CHECK_THROWS_AS(check_preconditions(parse_system_spec("{\"version\": 1, \"matrices\": [[1,0,0,1]]}")),
                  std::invalid_argument);
  CHECK_THROWS_AS(check_preconditions(parse_system_spec("{\"version\": 1, \"matrices\": [[0.5,0.5,0.25,0.25]]}")),
                  std::invalid_argument);
}

TEST_CASE("exit codes") {
  const auto dir = std::filesystem::temp_directory_path() / "affdim_cli_exit";
  std::filesystem::create_directories(dir);
  const auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  std::ostringstream out;
  std::ostringstream err;
  CommandOptions opts;
  CHECK(run_command("dimension", write("schema.json", "{\"version\": 1}"), opts, out, err) == 1);
  CHECK(err.str().find("spec error at line") != std::string::npos);
  err.str("");
  CHECK(run_command("dimension", write("singular.json", "{\"version\": 1, \"matrices\": [[0.5,0.5,0.25,0.25]]}"), opts,
                    out, err) == 2);
  CHECK(err.str().find("precondition violated") != std::string::npos);
  CHECK(run_command("dimension", (dir / "missing.json").string(), opts, out, err) == 1);
  // Directions need a splitting certificate.
  CHECK(run_command("directions", data("conformal.json"), opts, out, err) == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("pressure CSV on a conformal system") {
  const auto spec = load_system_spec(data("conformal.json"));
  CommandOptions opts;
  opts.depth = 4;
  opts.s_grid = parse_s_grid("0:2:0.5");
  REQUIRE(opts.s_grid.size() == 5);
  std::ostringstream csv;
  cmd_pressure(spec, opts, csv);
  const auto lines = split_lines(csv.str());
  CHECK(lines.front() == "n,s,pressure,movement");
  CHECK(lines.size() == 1 + 4 * 5);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 4);
    const double s = std::stod(f[1]);
    CHECK(std::abs(std::stod(f[2]) - std::log(2.0 * std::pow(3.0, -s))) < 1e-12);
    if (f[0] == "1") {
      CHECK(f[3] == "inf");
    }
  }
  CHECK(parse_s_grid("0,0.5,1") == std::vector<double>{0.0, 0.5, 1.0});
  CHECK_THROWS(parse_s_grid("1:0:0.1"));
}

TEST_CASE("directions CSV on a diagonal system") {
  const auto spec = load_system_spec(data("two_map.json"));
  CommandOptions opts;
  opts.depth = 3;
  std::ostringstream csv;
  cmd_directions(spec, opts, csv);
  const auto lines = split_lines(csv.str());
  CHECK(lines.front() == "word,es_angle,es_error,ess_angle,ess_error");
  CHECK(lines.size() == 1 + 8);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto f = split_fields(lines[i]);
    REQUIRE(f.size() == 5);
    CHECK(std::stod(f[1]) == 0.0);
    CHECK(std::stod(f[3]) == Approx(std::numbers::pi / 2).epsilon(1e-15));
  }
}

TEST_CASE("render writes one point per word") {
  const auto spec = load_system_spec(data("two_map.json"));
  CommandOptions opts;
  std::ostringstream csv;
  std::ostringstream svg;
  const Json summary = cmd_render(spec, opts, csv, svg);
  CHECK(summary["points"] == 16384);
  CHECK(split_lines(csv.str()).size() == 16385);
  CHECK(svg.str().find("</svg>") != std::string::npos);
}

TEST_CASE("dimension report on the diagonal three-map system") {
  const auto spec = load_system_spec(data("diagonal3.json"));
  CommandOptions opts;
  opts.seed = 3;
  const Json r = cmd_dimension(spec, opts);
  const double s0 = 1.0 + std::log(1.5) / std::log(4.0);
  CHECK(std::abs(r["affinity_dimension"]["s0"]["value"].get<double>() - s0) < 1e-4);
  CHECK(std::abs(r["dimension"]["lyapunov_dim"]["value"].get<double>() - s0) < 1e-2);
  CHECK(r["splitting"]["certified"] == true);
  CHECK(r["ssc"] == "verified");
  // Diagonal matrices are not sign-definite, so 𝔐 fails and the chain does not apply.
  CHECK(r["conditions"]["system_in_M"] == false);
  CHECK(r["dimension_chain"]["applicable"] == false);
}

TEST_CASE("a system failing separation is not eligible for the dimension chain") {
  const auto spec = load_system_spec(data("same_maps.json"));
  const Json r = cmd_dimension(spec, CommandOptions{});
  CHECK(r["ssc"] == "violated");
  CHECK(r["dimension_chain"]["applicable"] == false);
  bool named = false;
  for (const auto& reason : r["dimension_chain"]["reasons"]) {
    named = named || reason.get<std::string>() == "ssc: violated";
  }
  CHECK(named);
}

TEST_CASE("relaxed bound reports both flags") {
  // Five near-copies of a matrix in 𝔐 with s₀ between 3/2 and 5/3.
  SystemSpec spec;
  const double eps[] = {0.0, 0.002, -0.002, 0.004, -0.004};
  for (double e : eps) {
    spec.matrices.push_back({0.4 + e, 0.4, 0.3, 0.5 - e});
  }
  spec.budgets.pressure_depth = 6;
  spec.budgets.cylinder_depth = 3;
  spec.budgets.cloud_depth = 4;
  CommandOptions opts;
  opts.relaxed_bound = true;
  const Json r = cmd_dimension(spec, opts);
  const double s0 = r["affinity_dimension"]["s0"]["value"].get<double>();
  INFO("s0 = " << s0);
  CHECK(s0 > 1.5);
  CHECK(s0 < 5.0 / 3.0);
  const Json& c = r["conditions"];
  CHECK(c["system_in_M"] == true);
  CHECK(c["s0_above_five_thirds"] == false);
  CHECK(c["s0_above_three_halves"] == true);
  CHECK(c["in_O"] == false);
  REQUIRE(c.contains("in_O_relaxed"));
  CHECK(c["in_O_relaxed"] == true);

  opts.relaxed_bound = false;
  CHECK_FALSE(cmd_dimension(spec, opts)["conditions"].contains("in_O_relaxed"));
}

TEST_CASE("repeated runs are byte-identical") {
  const auto spec = load_system_spec(data("positive.json"));
  CommandOptions opts;
  opts.seed = 11;
  CHECK(cmd_dimension(spec, opts).dump(2) == cmd_dimension(spec, opts).dump(2));
  CHECK(cmd_transversality(spec, opts).dump(2) == cmd_transversality(spec, opts).dump(2));
  std::ostringstream a;
  std::ostringstream b;
  cmd_directions(spec, opts, a);
  cmd_directions(spec, opts, b);
  CHECK(a.str() == b.str());
}
