#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "check_error.hpp"
#include "chronos/commands.hpp"
#include "chronos/scenario_io.hpp"

using namespace chronos;
namespace fs = std::filesystem;

namespace {

const fs::path corpus_dir = CHRONOS_TEST_SCENARIOS;
const fs::path bundled = CHRONOS_BUNDLED_SCENARIO;

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("chronos_test_" + name); }

fs::path write_temp(const std::string& name, const std::string& text) {
  const fs::path p = temp_path(name);
  std::ofstream(p, std::ios::binary) << text;
  return p;
}

const char* minimal =
    R"({"constants": {"hbar": 1, "mass": 1, "c": 1, "omega": 1}, "preset": "energy-aligned",)"
    R"( "model": "oscillator", "initial": {"level": 0}, "steps": []})";

std::string with_steps(const std::string& steps) {
  return R"({"constants": {"hbar": 1, "mass": 1, "c": 1, "omega": 1}, "preset": "energy-aligned",)"
         R"( "model": "oscillator", "initial": {"level": 0}, "steps": )" +
         steps + "}";
}

std::string error_text(const std::string& text) {
  try {
    parse_scenario(text);
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

CommandOptions options_for(const fs::path& config) {
  CommandOptions o;
  o.config = config.string();
  return o;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CHRONOS_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("result tables") {
  ResultTable t({"n", "x", "tag"});
  t.add_row({1LL, 0.1, std::string("a,b")});
  t.add_row({2LL, 1.0 / 3.0, std::string("plain")});
  CHECK(t.to_csv() == "n,x,tag\n1,0.10000000000000001,\"a,b\"\n2,0.33333333333333331,plain\n");
  CHECK(std::stod(format_real(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(t.real(1, "n") == 2.0);
  CHECK_ERRC(t.add_row({1LL}), Errc::dimension_mismatch);
  CHECK_ERRC(t.column_index("missing"), Errc::invalid_argument);
  CHECK(ResultTable({"a", "b"}).to_csv() == "a,b\n");
}

TEST_CASE("minimal scenario gets defaults") {
  const Scenario sc = parse_scenario(minimal);
  CHECK(sc.preset == GridPreset::energy_aligned);
  CHECK(sc.q_grid == default_position_grid(sc.constants));
  CHECK(sc.t_grid == energy_aligned_time_grid(sc.constants));
  CHECK(sc.tolerances.constraint_tol == 1e-6);
  CHECK(sc.tolerances.eigen_tol == 1e-9);
  CHECK(sc.steps.empty());
  CHECK(std::get<InitialLevel>(sc.initial).level == 0);
}

TEST_CASE("scenario validation errors name the field") {
  std::string bad = minimal;
  bad.insert(bad.size() - 1, R"(, "foo": 1)");
  CHECK(error_text(bad).find("foo") != std::string::npos);
  CHECK_ERRC(parse_scenario(bad), Errc::validation_error);

  const std::string same_level = error_text(with_steps(R"([{"evolve": 1}, {"jump": {"from": 1, "to": 1, "at": 1.5}}])"));
  CHECK(same_level.find("steps[1]") != std::string::npos);

  CHECK(error_text(with_steps(R"([{"jump": {"from": 0, "to": 1, "at": 0.7}}])")).find("steps[0].jump.at") !=
        std::string::npos);
  CHECK(error_text(with_steps(R"([{"evolve": "soon"}])")).find("steps[0].evolve") != std::string::npos);
  CHECK(error_text(with_steps(R"([{"wait": 1}])")).find("steps[0]") != std::string::npos);
  CHECK(error_text(R"({"constants": {"hbar": -1, "mass": 1, "c": 1, "omega": 1}, "preset": "energy-aligned",)"
                   R"( "model": "oscillator", "initial": {"level": 0}})")
            .find("constants.hbar") != std::string::npos);
  CHECK(error_text(R"({"constants": {"hbar": 1, "mass": 1, "c": 1, "omega": 1}, "preset": "energy-aligned",)"
                   R"( "model": "rotor", "initial": {"level": 0}})")
            .find("model") != std::string::npos);
  CHECK(error_text(R"({"constants": {"hbar": 1, "mass": 1, "c": 1}, "preset": "energy-aligned",)"
                   R"( "model": "oscillator", "initial": {"level": 0}})")
            .find("constants.omega") != std::string::npos);
}

TEST_CASE("malformed JSON reports its position") {
  try {
    parse_scenario("{\n  \"constants\": {\n    \"hbar\": 1,,\n  }\n}");
    FAIL("expected a syntax error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::syntax_error);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("scenario corpus round-trips") {
  int files = 0;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.path().extension() != ".json") continue;
    ++files;
    CAPTURE(entry.path().filename().string());
    const Scenario first = load_scenario(entry.path().string());
    const std::string text = serialize_scenario(first);
    const Scenario second = parse_scenario(text);
    CHECK(first == second);
    CHECK(serialize_scenario(second) == text);
  }
  CHECK(files >= 10);
  CHECK_ERRC(load_scenario((corpus_dir / "absent.json").string()), Errc::io_error);
}

TEST_CASE("spectrum command") {
  CommandOptions o;
  const CommandResult r = cmd_spectrum(o);
  CHECK(r.exit_code == 0);
  REQUIRE(r.table.row_count() == 8);
  CHECK(r.table.columns() == std::vector<std::string>{"n", "E_n", "t_n", "t_n_predicted", "abs_error"});
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(r.table.real(i, "abs_error") <= 1e-7);
    CHECK(r.table.real(i, "t_n_predicted") == static_cast<double>(i) + 0.5);
  }

  const CommandResult fp = cmd_spectrum(options_for(corpus_dir / "free_particle.json"));
  const AxisGrid q = default_position_grid(PhysicalConstants{});
  const Eigen::VectorXd p2 = q.frequencies().array().square();
  std::vector<double> sorted(p2.data(), p2.data() + p2.size());
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < fp.table.row_count(); ++i) {
    CHECK(std::abs(fp.table.real(i, "t_n") - sorted[i]) <= 1e-9);
    CHECK(fp.table.real(i, "abs_error") <= 1e-9);
  }

  CommandOptions none;
  none.levels = 0;
  CHECK(cmd_spectrum(none).table.to_csv() == "n,E_n,t_n,t_n_predicted,abs_error\n");
}

TEST_CASE("check command") {
  CommandOptions o;
  o.suite = "commutators";
  const CommandResult comm = cmd_check(o);
  CHECK(comm.exit_code == 0);
  CHECK(comm.table.row_count() >= 5);
  for (std::size_t i = 0; i < comm.table.row_count(); ++i)
    CHECK(std::get<std::string>(comm.table.at(i, 3)) == "pass");

  CommandOptions detuned = options_for(corpus_dir / "detuned.json");
  detuned.suite = "constraint1";
  const CommandResult empty = cmd_check(detuned);
  CHECK(empty.exit_code == 0);
  REQUIRE(empty.table.row_count() >= 1);
  CHECK(std::get<std::string>(empty.table.at(0, 0)) == "matched_pairs");
  CHECK(empty.table.real(0, "value") == 0.0);
  for (std::size_t i = 0; i < empty.table.row_count(); ++i)
    CHECK(std::get<std::string>(empty.table.at(i, 3)) == "pass-empty");

  for (const std::string suite : {"constraint1", "constraint2", "uncertainty", "ladder"}) {
    CommandOptions s;
    s.suite = suite;
    CAPTURE(suite);
    CHECK(cmd_check(s).exit_code == 0);
  }

  CommandOptions strict;
  strict.suite = "constraint1";
  strict.tol = 1e-15;
  CHECK_ERRC(cmd_check(strict), Errc::no_convergence);
  strict.tol = 1e-13;
  CHECK(cmd_check(strict).exit_code == exit_check_failed);

  CommandOptions bad;
  bad.suite = "nonsense";
  CHECK_ERRC(cmd_check(bad), Errc::unknown_suite);
}

TEST_CASE("run command") {
  const CommandResult empty = cmd_run(options_for(corpus_dir / "minimal.json"));
  CHECK(empty.table.row_count() == 1);
  const auto& cols = empty.table.columns();
  REQUIRE(cols.size() == 15);
  CHECK(std::vector<std::string>(cols.begin(), cols.begin() + 7) ==
        std::vector<std::string>{"step_index", "kind", "q_mean", "p_mean", "energy_mean", "residual1",
                                 "subspace_weight"});
  CHECK(cols[7] == "p0");
  CHECK(cols[14] == "p7");

  const CommandResult evolve = cmd_run(options_for(corpus_dir / "evolve_only.json"));
  REQUIRE(evolve.table.row_count() == 4);
  const double r0 = evolve.table.real(0, "residual1");
  for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(evolve.table.real(i, "residual1") - r0) <= 1e-6);

  const CommandResult jump = cmd_run(options_for(corpus_dir / "jump_up.json"));
  REQUIRE(jump.table.row_count() == 2);
  CHECK(std::get<std::string>(jump.table.at(1, 1)) == "jump");
  CHECK(std::abs(jump.table.real(1, "p1") - 1.0) <= 1e-10);
  CHECK(jump.table.real(1, "p0") <= 1e-10);

  const std::string csv = cmd_run(options_for(bundled)).table.to_csv();
  CHECK(csv.find('\r') == std::string::npos);
  CHECK(csv == cmd_run(options_for(bundled)).table.to_csv());
}

TEST_CASE("run command aborts with a partial table") {
  const fs::path p = write_temp("abort.json", R"({"constants": {"hbar": 1, "mass": 1, "c": 1, "omega": 1},)"
                                              R"( "preset": "time-aligned", "model": "oscillator",)"
                                              R"( "initial": {"level": 0},)"
                                              R"( "steps": [{"evolve": 0.5}, {"jump": {"from": 0, "to": 1, "at": 0.5}}]})");
  const CommandResult r = cmd_run(options_for(p));
  CHECK(r.exit_code == exit_usage);
  CHECK(r.table.row_count() == 2);
  CHECK(r.trailer.rfind("# aborted: ", 0) == 0);
  CHECK(r.trailer.find("step 2") != std::string::npos);
  CHECK(r.trailer.back() == '\n');
  fs::remove(p);
}

TEST_CASE("subspace command") {
  CommandOptions o;
  const CommandResult r = cmd_subspace(o);
  CHECK(r.table.columns() == std::vector<std::string>{"index", "label", "multiplet", "residual"});
  REQUIRE(r.table.row_count() == 8);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(std::abs(r.table.real(i, "label") - (static_cast<double>(i) + 0.5)) <= 1e-7);
    CHECK(r.table.real(i, "residual") <= 2e-6);
  }
  CommandOptions second;
  second.equation = "second";
  CHECK(cmd_subspace(second).table.row_count() > 0);
  CommandOptions bad;
  bad.equation = "third";
  CHECK_ERRC(cmd_subspace(bad), Errc::invalid_argument);
}

TEST_CASE("command-line exit codes") {
  CHECK(run_cli("spectrum") == 0);
  CHECK(run_cli("check --suite ladder") == 0);
  CHECK(run_cli("check --suite nonsense") == 2);
  CHECK(run_cli("check --suite constraint1 --tol 1e-15") == 3);
  CHECK(run_cli("check --suite constraint1 --tol 1e-13") == 1);
  CHECK(run_cli("bogus") == 2);
  CHECK(run_cli("run") == 2);
  const fs::path bad = write_temp("bad.json", "{\"constants\": ");
  CHECK(run_cli("run --config " + bad.string()) == 2);
  fs::remove(bad);

  const fs::path out = temp_path("out.csv");
  CHECK(run_cli("run --config " + bundled.string() + " --out " + out.string()) == 0);
  CHECK(read_file(out) == cmd_run(options_for(bundled)).table.to_csv());
  fs::remove(out);
}
