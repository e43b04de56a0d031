#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "json.hpp"
#include "khardy/errors.hpp"
#include "khardy/geometry.hpp"
#include "khardy/json_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace khardy;
namespace fs = std::filesystem;

namespace {

std::string g_cli;   // path to the khardy binary, passed as --cli <path>

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

// run the CLI through the shell, capturing exit code and both streams
RunResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path();
  const fs::path out = dir / ("khardy_out_" + std::to_string(++counter));
  const fs::path err = dir / ("khardy_err_" + std::to_string(counter));
  const std::string cmd = env + (env.empty() ? "" : " ") + g_cli + " " +
                          args + " > " + out.string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  fs::remove(out);
  fs::remove(err);
  return r;
}

fs::path write_file(const std::string& name, const std::string& body) {
  const fs::path p = fs::temp_directory_path() / name;
  std::ofstream f(p);
  f << body;
  return p;
}

const char* kAr1 =
    R"({"sigma": 2.5066282746310002, "d": 0.0, "poles": [[0.5, 0.0]], "zeros": []})";
const char* kArfima =
    R"({"sigma": 2.5066282746310002, "d": 0.2, "poles": [[0.5, 0.0]], "zeros": []})";

}   // namespace

TEST_CASE("model json round trip") {
  ArfimaModel m;
  m.sigma = 1.7;
  m.d = -0.3;
  m.poles = {{0.5, 0.25}, {-0.125, 0.0}};
  m.zeros = {{0.0, 0.7071067811865476}};
  const ArfimaModel back = model_from_json(model_to_json(m));
  CHECK(back.sigma == m.sigma);
  CHECK(back.d == m.d);
  CHECK(back.poles == m.poles);
  CHECK(back.zeros == m.zeros);
}

TEST_CASE("model json rejects malformed input") {
  CHECK_THROWS_AS(model_from_json("{"), InvalidInput);
  CHECK_THROWS_AS(model_from_json(R"({"sigma": 1.0})"), InvalidInput);
  CHECK_THROWS_AS(
      model_from_json(
          R"({"sigma": 1, "d": 0, "poles": [[0.1]], "zeros": []})"),
      InvalidInput);
  CHECK_THROWS_AS(
      model_from_json(
          R"({"sigma": 1, "d": 0, "poles": [], "zeros": [], "label": "x"})"),
      InvalidInput);
  CHECK_THROWS_AS(
      model_from_json(
          R"({"sigma": 1, "d": "zero", "poles": [], "zeros": []})"),
      InvalidInput);

  // messages name the offending field
  try {
    model_from_json(R"({"sigma": 1.0, "d": 0.0, "zeros": []})");
    CHECK(false);
  } catch (const InvalidInput& e) {
    CHECK(std::string(e.what()).find("poles") != std::string::npos);
  }
}

TEST_CASE("weight json round trip") {
  const WeightSequence cases[] = {
      WeightSequence::hardy(),
      WeightSequence::sobolev(2),
      WeightSequence::dirichlet(),
      WeightSequence::bergman(),
      WeightSequence::power(-0.75),
      WeightSequence::custom({1.0, 0.5, 0.25},
                             WeightSequence::Extension::repeat_last),
  };
  for (const auto& w : cases)
    CHECK(weight_from_json(weight_to_json(w)) == w);

  CHECK(weight_from_json(R"({"family": "power", "m": 1.5})") ==
        WeightSequence::power(1.5));
  CHECK_THROWS_AS(weight_from_json(R"({"family": "sobolev", "m": 1.5})"),
                  InvalidInput);
  CHECK_THROWS_AS(weight_from_json(R"({"family": "gaussian"})"),
                  InvalidInput);
  CHECK_THROWS_AS(weight_from_json(R"({"family": "hardy", "m": 2})"),
                  InvalidInput);
  CHECK_THROWS_AS(
      weight_from_json(R"({"family": "custom", "table": []})"),
      InvalidInput);
  CHECK_THROWS_AS(
      weight_from_json(
          R"({"family": "custom", "table": [1.0], "extension": "mirror"})"),
      InvalidInput);
}

TEST_CASE("weight spec accepts inline json or a file") {
  CHECK(weight_from_spec(R"({"family": "bergman"})") ==
        WeightSequence::bergman());
  const auto p = write_file("weight_spec.json",
                            R"({"family": "power", "m": 0.5})");
  CHECK(weight_from_spec(p.string()) == WeightSequence::power(0.5));
  CHECK_THROWS_AS(weight_from_spec("/nonexistent/weight.json"), InvalidInput);
}

TEST_CASE("report serialization carries the contract keys") {
  GeometryConfig cfg;
  cfg.model.d = 0.2;
  cfg.model.poles = {{0.5, 0.0}};
  cfg.weight = WeightSequence::power(0.0);
  ReportRequest req;
  req.connection = true;
  req.ricci = true;
  req.check = true;
  const GeometryReport rep = geometry_report(cfg, req);
  const auto j = nlohmann::json::parse(report_to_json(rep));

  for (const char* key :
       {"labels", "dim", "potential", "potential_closed", "metric",
        "metric_closed", "connection", "connection_closed", "ricci",
        "hermitian_residual", "closed_form_residual", "convergence"})
    CHECK(j.contains(key));
  CHECK(j["dim"] == 2);
  CHECK(j["labels"][0] == "d");
  // matrices are row-major lists of [re, im] pairs
  CHECK(j["metric"].size() == 4);
  CHECK(j["metric"][0].size() == 2);
  CHECK(j["metric"][0][0].get<double>() ==
        doctest::Approx(1.6449340668482264).epsilon(1e-12));
  CHECK(j["connection"].size() == 8);
  CHECK(j["convergence"].contains("terms"));
  CHECK(j["convergence"].contains("tail_bound"));
  CHECK(j["convergence"].contains("truncation"));
  CHECK(j["convergence"].contains("fd_step"));
  CHECK(j["hermitian_residual"].get<double>() <= 1e-6);
  CHECK(j["closed_form_residual"].get<double>() <= 1e-6);
}

TEST_CASE("series and distance matrix serialization") {
  CoefficientSeries s;
  s.coeffs = {{1.0, 0.0}, {0.5, -0.25}};
  s.kind = SeriesKind::complex_cepstrum;
  const auto j = nlohmann::json::parse(series_to_json(s));
  CHECK(j["kind"] == "complex-cepstrum");
  CHECK(j["truncation"] == 1);
  CHECK(j["coeffs"][1][1].get<double>() == -0.25);
  CHECK(series_to_csv(s) ==
        "s,value_re,value_im\n0,1,0\n1,0.5,-0.25\n");

  Eigen::MatrixXd dm(2, 2);
  dm << 0.0, 1.5, 1.5, 0.0;
  CHECK(distance_matrix_to_csv(dm, {"a", "b"}) ==
        "model,a,b\na,0,1.5\nb,1.5,0\n");
  const auto dj =
      nlohmann::json::parse(distance_matrix_to_json(dm, {"a", "b"}));
  CHECK(dj["models"][1] == "b");
  CHECK(dj["distances"][0][1].get<double>() == 1.5);
}

TEST_CASE("cli: cepstrum and metric round trips") {
  const auto ar1 = write_file("cli_ar1.json", kAr1);

  auto r = run_cli("cepstrum --model " + ar1.string() + " --truncation 3");
  CHECK(r.code == 0);
  CHECK(r.err.empty());
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["coeffs"][1][0].get<double>() == doctest::Approx(0.5));

  r = run_cli("metric --model " + ar1.string() + " --order-m 1");
  CHECK(r.code == 0);
  j = nlohmann::json::parse(r.out);
  CHECK(j["metric_closed"][0][0].get<double>() ==
        doctest::Approx(16.0 / 9.0).epsilon(1e-12));

  // gain-only filter: flat cepstrum
  const auto gain = write_file(
      "cli_gain.json",
      R"({"sigma": 2.5066282746310002, "d": 0.0, "poles": [], "zeros": []})");
  r = run_cli("cepstrum --model " + gain.string() + " --truncation 4");
  j = nlohmann::json::parse(r.out);
  CHECK(j["coeffs"][0][0].get<double>() == 1.0);
  for (int s = 1; s <= 4; ++s)
    CHECK(j["coeffs"][s][0].get<double>() == 0.0);
}

TEST_CASE("cli: exit codes") {
  const auto ar1 = write_file("cli_ar1.json", kAr1);
  const auto arfima = write_file("cli_arfima.json", kArfima);
  const auto bad = write_file("cli_bad.json", R"({"sigma": )");
  const auto unstable = write_file(
      "cli_unstable.json",
      R"({"sigma": 1.0, "d": 0.0, "poles": [[1.5, 0.0]], "zeros": []})");
  const auto dup = write_file(
      "cli_dup.json",
      R"({"sigma": 1.0, "d": 0.0, "poles": [[0.5, 0.0], [0.5, 0.0]], "zeros": []})");

  CHECK(run_cli("metric --model " + ar1.string()).code == 0);
  CHECK(run_cli("metric --model " + bad.string()).code == 2);
  CHECK(run_cli("metric --model " + unstable.string()).code == 2);
  CHECK(run_cli("metric --model " + ar1.string() + " --order-m 1 --weight " +
                R"('{"family": "hardy"}')")
            .code == 2);
  CHECK(run_cli("metric --model " + ar1.string() + " --no-such-flag").code ==
        2);
  CHECK(run_cli("--help").code == 0);
  CHECK(run_cli("metric --help").code == 0);

  // divergent weighted potential: d != 0 against m >= 1
  const auto div = run_cli("potential --model " + arfima.string() +
                           " --order-m 1");
  CHECK(div.code == 4);
  CHECK(div.err.find("diverges") != std::string::npos);

  // contour refuses a grid that cannot certify the requested terms
  CHECK(run_cli("cepstrum --model " + arfima.string() +
                " --route contour --truncation 8 --grid 64")
            .code == 3);

  // repeated pole: singular metric
  CHECK(run_cli("ricci --model " + dup.string()).code == 5);

  // verify: clean pass and injected failure
  CHECK(run_cli("verify --models 8 --triples 40").code == 0);
  const auto inj = run_cli(
      "verify --models 8 --triples 40 --inject-metric-sign-flip");
  CHECK(inj.code == 1);
  CHECK(inj.out.find("FAIL closed_vs_fd") != std::string::npos);
}

TEST_CASE("cli: chart selection") {
  const auto arfima = write_file("cli_arfima.json", kArfima);
  // auto promotes d to a coordinate when nonzero
  auto r = run_cli("metric --model " + arfima.string() + " --order-m 0");
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["dim"] == 2);
  CHECK(j["metric"][0][0].get<double>() ==
        doctest::Approx(1.6449340668482264).epsilon(1e-9));

  r = run_cli("metric --model " + arfima.string() +
              " --order-m 0 --chart roots-only");
  j = nlohmann::json::parse(r.out);
  CHECK(j["dim"] == 1);

  const auto ar1 = write_file("cli_ar1.json", kAr1);
  r = run_cli("metric --model " + ar1.string() + " --chart with-d");
  j = nlohmann::json::parse(r.out);
  CHECK(j["dim"] == 2);
}

TEST_CASE("cli: distance and kernel") {
  const auto a = write_file("cli_a.json", kAr1);
  const auto b = write_file(
      "cli_b.json",
      R"({"sigma": 2.5066282746310002, "d": 0.0, "poles": [[0.25, 0.0]], "zeros": []})");
  auto r = run_cli("distance --model " + a.string() + " " + b.string());
  CHECK(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["distance"].get<double>() ==
        doctest::Approx(0.26995851839822373).epsilon(1e-12));
  double sum = 0.0;
  for (const auto& c : j["contributions"]) sum += c.get<double>();
  CHECK(std::sqrt(sum) == doctest::Approx(j["distance"].get<double>()));

  r = run_cli("kernel --u 0.5 0 --v 0.5 0 --weight "
              R"('{"family": "bergman"}')");
  j = nlohmann::json::parse(r.out);
  CHECK(j["kernel"][0].get<double>() ==
        doctest::Approx(1.0 / (0.75 * 0.75)).epsilon(1e-12));

  r = run_cli("kernel --u 0.5 0 --v 0.5 0 --route series --truncation 255 "
              "--weight " R"('{"family": "bergman"}')");
  j = nlohmann::json::parse(r.out);
  CHECK(j["kernel"][0].get<double>() ==
        doctest::Approx(1.0 / (0.75 * 0.75)).epsilon(1e-10));
}

TEST_CASE("cli: distance matrix over a directory") {
  const fs::path dir = fs::temp_directory_path() / "khardy_models";
  fs::create_directories(dir);
  std::ofstream(dir / "a.json") << kAr1;
  std::ofstream(dir / "b.json")
      << R"({"sigma": 2.5066282746310002, "d": 0.0, "poles": [[0.25, 0.0]], "zeros": []})";
  std::ofstream(dir / "c.json") << kArfima;

  auto r = run_cli("distance-matrix --models " + dir.string());
  CHECK(r.code == 0);
  CHECK(r.out.substr(0, 12) == "model,a,b,c\n");

  const fs::path out = fs::temp_directory_path() / "khardy_dm.json";
  r = run_cli("distance-matrix --models " + dir.string() +
              " --output json --out " + out.string());
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j["models"].size() == 3);
  CHECK(j["distances"][0][1].get<double>() ==
        doctest::Approx(0.26995851839822373).epsilon(1e-12));
  fs::remove_all(dir);
  fs::remove(out);
}

TEST_CASE("cli: thread cap preserves output") {
  const auto arfima = write_file("cli_arfima.json", kArfima);
  const std::string cmd = "ricci --model " + arfima.string() +
                          " --order-m 0.5 --check --exec parallel";
  const auto one = run_cli(cmd, "KAHLER_HARDY_THREADS=1");
  const auto four = run_cli(cmd, "KAHLER_HARDY_THREADS=4");
  CHECK(one.code == 0);
  CHECK(one.out == four.out);
}

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--cli") g_cli = argv[i + 1];
  if (g_cli.empty()) {
    std::fprintf(stderr, "usage: test_json_cli --cli <path-to-khardy>\n");
    return 1;
  }
  doctest::Context ctx;
  ctx.applyCommandLine(argc, argv);
  return ctx.run();
}
