#include "doctest.h"

#include <fstream>
#include <sstream>

#include "covsel/cli.hpp"
#include "covsel/error.hpp"
#include "covsel/io.hpp"
#include "covsel/random_instances.hpp"
#include "json.hpp"

using namespace covsel;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("covsel_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

TEST_CASE("format_double round-trips") {
  auto rng = sim::make_rng(401);
  std::uniform_real_distribution<double> unif(-1e6, 1e6);
  for (int k = 0; k < 1000; ++k) {
    const double v = unif(rng) * std::pow(10.0, k % 30 - 15);
    CHECK(std::stod(io::format_double(v)) == v);
  }
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("sample CSV") {
  SUBCASE("round trip is exact") {
    auto rng = sim::make_rng(409);
    const auto samples = sim::random_samples(rng, 7, 5);
    const auto back = io::parse_samples_csv(io::samples_to_csv(samples));
    CHECK(back.grid() == samples.grid());
    CHECK(back.data() == samples.data());
  }
  SUBCASE("tolerates blank lines, CRLF and spaces") {
    const auto s = io::parse_samples_csv("0, 1\r\n\r\n1 ,0\r\n0,+1\r\n");
    CHECK(s.n() == 2);
    CHECK(s.data()(1, 1) == 1.0);
  }
  SUBCASE("errors name the line") {
    try {
      io::parse_samples_csv("0,1\n1,0\n1,x\n", "f.csv");
      FAIL("expected an InputError");
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("f.csv:3") != std::string::npos);
    }
    CHECK_THROWS_AS(io::parse_samples_csv("0,1\n1,0\n1\n"), InputError);
    CHECK_THROWS_AS(io::parse_samples_csv(""), InputError);
    CHECK_THROWS_AS(io::parse_samples_csv("0,1\n1,0\n"), InputError);
    CHECK_THROWS_AS(io::parse_samples_csv("1,0\n1,0\n0,1\n"), InputError);
    CHECK_THROWS_AS(io::parse_samples_csv("0,1\n1,nan\n0,1\n"), InputError);
    CHECK_THROWS_AS(io::read_samples_csv("/nonexistent/covsel.csv"), InputError);
  }
}

TEST_CASE("config parsing") {
  const auto cfg = cli::parse_config(
      "[basis]\nfamily = polynomial\nmax_index = 4\n"
      "[collection]\nscheme = all_subsets\nsubset_size = 2\n"
      "[selection]\ntheta = 2.5\n"
      "[run]\nseed = 77\nthreads = 2\n"
      "[kernel]\nkind = finite_rank\nindices = 0, 2\npsi = 1, 0.5\n"
      "[simulate]\nn_grid = 20,50\ndiagnostics = true\n");
  CHECK(cfg.family == dict::BasisKind::polynomial);
  CHECK(cfg.max_index == 4u);
  CHECK(cfg.scheme == dict::SchemeKind::all_subsets);
  CHECK(cfg.subset_size == 2);
  CHECK(cfg.theta == 2.5);
  CHECK(cfg.seed == 77);
  CHECK(cfg.threads == 2);
  CHECK(cfg.kernel.kind == sim::KernelKind::finite_rank);
  CHECK(cfg.kernel.indices == dict::IndexSet{0, 2});
  CHECK(cfg.kernel.psi(1, 1) == 0.5);
  CHECK(cfg.kernel.psi(0, 1) == 0.0);
  CHECK(cfg.n_grid == std::vector<std::size_t>{20, 50});
  CHECK(cfg.diagnostics);

  CHECK_THROWS_AS(cli::parse_config("[selection]\ntheta_typo = 1\n"), InputError);
  CHECK_THROWS_AS(cli::parse_config("[nosuch]\nx = 1\n"), InputError);
  CHECK_THROWS_AS(cli::parse_config("[selection]\ntheta = abc\n"), InputError);
  CHECK_THROWS_AS(cli::parse_config("[run]\nseed = -3\n"), InputError);
  CHECK_THROWS_AS(cli::parse_config("[basis]\nfamily = spline\n"), InputError);
  CHECK_THROWS_AS(cli::load_config("/nonexistent/covsel.ini"), InputError);

  auto over = cfg;
  cli::Overrides o;
  o.theta = 0.25;
  o.seed = 5;
  cli::apply(over, o);
  CHECK(over.theta == 0.25);
  CHECK(over.seed == 5);
  CHECK(over.threads == 2);
  CHECK(nlohmann::json::parse(cli::config_to_json(over)).is_object());
}

TEST_CASE("select command") {
  const auto dir = scratch("select");
  io::write_file(dir / "toy.csv", "0,1\n1,0\n0,1\n");
  std::ostringstream log, err;

  SUBCASE("toy data") {
    cli::RunConfig cfg;
    cfg.input = dir / "toy.csv";
    cfg.family = dict::BasisKind::polynomial;
    cfg.out = dir / "out";
    REQUIRE(cli::cmd_select(cfg, log, err) == cli::kOk);
    const auto report = nlohmann::json::parse(slurp(dir / "out" / "selection_report.json"));
    // Constant model: loss 0.75, penalty 0. Full model: loss 0.5, penalty 0.5.
    CHECK(report["selected"]["indices"] == nlohmann::json::array({0}));
    const auto& rows = report["criterion_table"];
    REQUIRE(rows.size() == 2);
    CHECK(rows[0]["loss"].get<double>() == doctest::Approx(0.75));
    CHECK(rows[0]["penalty"].get<double>() == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(rows[1]["loss"].get<double>() == doctest::Approx(0.5));
    CHECK(rows[1]["penalty"].get<double>() == doctest::Approx(0.5));
    for (const auto& r : rows)
      CHECK(r["criterion"].get<double>() == r["loss"].get<double>() + r["penalty"].get<double>());
    const auto sigma = io::parse_samples_csv(slurp(dir / "out" / "sigma_hat.csv"));
    CHECK(sigma.data()(0, 1) == doctest::Approx(0.25));
    CHECK(slurp(dir / "out" / "criterion_table.csv").rfind("indices,dim,", 0) == 0);
  }
  SUBCASE("single-model collection") {
    cli::RunConfig cfg;
    cfg.input = dir / "toy.csv";
    cfg.max_dim = 1;
    cfg.out = dir / "one";
    CHECK(cli::cmd_select(cfg, log, err) == cli::kOk);
  }
  SUBCASE("missing input is an input error") {
    cli::RunConfig cfg;
    cfg.input = dir / "missing.csv";
    cfg.out = dir / "x";
    CHECK(cli::cmd_select(cfg, log, err) == cli::kInputError);
    CHECK(err.str().find("missing.csv") != std::string::npos);
    cfg.input.clear();
    CHECK(cli::cmd_select(cfg, log, err) == cli::kInputError);
  }
  SUBCASE("all candidates degenerate") {
    // Two histogram cells on [0, 1]; both grid points fall in the second.
    io::write_file(dir / "late.csv", "0.6,0.7\n1,0\n0,1\n");
    cli::RunConfig cfg;
    cfg.input = dir / "late.csv";
    cfg.family = dict::BasisKind::histogram;
    cfg.basis_t_min = 0.0;
    cfg.basis_t_max = 1.0;
    cfg.max_index = 1;
    cfg.max_dim = 1;
    cfg.out = dir / "deg";
    CHECK(cli::cmd_select(cfg, log, err) == cli::kDegenerateCollection);
  }
  SUBCASE("invalid theta") {
    cli::RunConfig cfg;
    cfg.input = dir / "toy.csv";
    cfg.theta = -1.0;
    cfg.out = dir / "x";
    CHECK(cli::cmd_select(cfg, log, err) == cli::kInputError);
  }
  fs::remove_all(dir);
}

TEST_CASE("simulate command is deterministic") {
  const auto dir = scratch("simulate");
  cli::RunConfig cfg;
  cfg.grid_p = 6;
  cfg.kernel.kind = sim::KernelKind::ornstein_uhlenbeck;
  cfg.kernel.length_scale = 0.4;
  cfg.reps = 20;
  cfg.n_grid = {20, 40};
  cfg.seed = 3;
  cfg.replications_csv = true;
  cfg.out = dir / "run";
  std::ostringstream log, err;
  REQUIRE(cli::cmd_simulate(cfg, log, err) == cli::kOk);
  const auto first = slurp(dir / "run" / "experiment_report.json");
  CHECK(fs::exists(dir / "run" / "risk_vs_n.csv"));
  CHECK(fs::exists(dir / "run" / "selection_frequencies.csv"));
  CHECK(fs::exists(dir / "run" / "replications.csv"));
  cfg.threads = 2;
  REQUIRE(cli::cmd_simulate(cfg, log, err) == cli::kOk);
  const auto second = slurp(dir / "run" / "experiment_report.json");
  // The embedded config records the thread count; everything else must match.
  auto a = nlohmann::json::parse(first);
  auto b = nlohmann::json::parse(second);
  a.erase("config");
  b.erase("config");
  CHECK(a == b);
  cfg.threads = 1;
  REQUIRE(cli::cmd_simulate(cfg, log, err) == cli::kOk);
  CHECK(slurp(dir / "run" / "experiment_report.json") == first);

  cfg.kernel.kind = sim::KernelKind::brownian;
  cfg.grid_t_min = -1.0;
  CHECK(cli::cmd_simulate(cfg, log, err) == cli::kInputError);
  fs::remove_all(dir);
}

TEST_CASE("validate command") {
  const auto dir = scratch("validate");
  cli::RunConfig cfg;
  cfg.validate_instances = 10;
  cfg.out = dir;
  std::ostringstream log, err;
  CHECK(cli::cmd_validate(cfg, log, err) == cli::kOk);
  CHECK(log.str().find("FAIL") == std::string::npos);
  CHECK(fs::exists(dir / "validation_log.txt"));
  cfg.inject_fault = true;
  std::ostringstream log2;
  CHECK(cli::cmd_validate(cfg, log2, err) == cli::kValidationFailure);
  CHECK(log2.str().find("FAIL gaussian_closed_form_matches_dense") != std::string::npos);
  fs::remove_all(dir);
}
