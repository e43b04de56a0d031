#include "CLI11.hpp"
#include "json.hpp"

#include "khardy/batch.hpp"
#include "khardy/errors.hpp"
#include "khardy/geometry.hpp"
#include "khardy/hardy.hpp"
#include "khardy/json_io.hpp"
#include "khardy/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace {

using namespace khardy;

// Everything the subcommands share.  stdout carries exactly one payload;
// all diagnostics go to stderr.
struct Options {
  std::vector<std::string> models;
  std::string models_dir;
  std::string weight_spec;
  double order_m = 0.0;
  bool order_m_set = false;
  std::string transform = "log";
  std::string chart = "auto";
  std::string c0 = "one";
  std::string route = "analytic";
  std::string kind = "complex";
  std::string exec = "parallel";
  std::string output;
  std::string out_path;
  long truncation = -1;
  double tolerance = 1e-10;
  double fd_step = 1e-4;
  double fd_step_outer = 1e-3;
  long grid = 2048;
  bool check = false;
  unsigned long long seed = 20260815;
  long verify_models = 40;
  long verify_triples = 1000;
  bool inject_flip = false;
  std::vector<double> u_parts{0.0, 0.0};
  std::vector<double> v_parts{0.0, 0.0};
};

WeightSequence pick_weight(const Options& o) {
  if (!o.weight_spec.empty()) return weight_from_spec(o.weight_spec);
  return WeightSequence::power(o.order_m_set ? o.order_m : 0.0);
}

Transform pick_transform(const Options& o) {
  if (o.transform == "identity") return Transform::identity;
  if (o.transform == "log") return Transform::log;
  if (o.transform == "log-squared-modulus")
    return Transform::log_squared_modulus;
  throw InvalidInput("config: --transform must be identity, log, or "
                     "log-squared-modulus");
}

C0 pick_c0(const Options& o) {
  if (o.c0 == "one") return C0::one;
  if (o.c0 == "log-gain") return C0::log_gain;
  throw InvalidInput("config: --c0 must be one or log-gain");
}

Exec pick_exec(const Options& o) {
  if (o.exec == "serial") return Exec::serial;
  if (o.exec == "parallel") return Exec::parallel;
  throw InvalidInput("config: --exec must be serial or parallel");
}

GeometryConfig make_config(const Options& o, const ArfimaModel& m) {
  GeometryConfig cfg;
  cfg.model = m;
  if (o.chart == "auto")
    cfg.chart.include_d = m.d != 0.0;
  else if (o.chart == "with-d")
    cfg.chart.include_d = true;
  else if (o.chart == "roots-only")
    cfg.chart.include_d = false;
  else
    throw InvalidInput("config: --chart must be auto, with-d, or roots-only");
  cfg.weight = pick_weight(o);
  cfg.transform = pick_transform(o);
  cfg.c0 = pick_c0(o);
  if (o.truncation >= 0) cfg.truncation = o.truncation;
  cfg.tolerance = o.tolerance;
  cfg.fd_step = o.fd_step;
  cfg.fd_step_outer = o.fd_step_outer;
  cfg.grid = o.grid;
  return cfg;
}

int emit(const std::string& payload, const Options& o) {
  if (o.out_path.empty()) {
    std::fwrite(payload.data(), 1, payload.size(), stdout);
    return 0;
  }
  std::ofstream f(o.out_path);
  if (!f) {
    std::fprintf(stderr, "cannot write '%s'\n", o.out_path.c_str());
    return 2;
  }
  f << payload;
  return 0;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

int run_cepstrum(const Options& o, bool impulse_cmd) {
  const ArfimaModel model = load_model(o.models.at(0));
  const long terms = (o.truncation >= 0 ? o.truncation : 16) + 1;
  const std::string kind = impulse_cmd ? "impulse" : o.kind;
  CoefficientSeries series;
  if (kind == "impulse") {
    series = impulse_response(model, terms);
  } else if (kind == "power") {
    ContourOptions copt;
    copt.grid = o.grid;
    copt.exec = pick_exec(o);
    series = power_cepstrum(ChartPoint::of(model), terms, copt);
  } else if (kind == "complex") {
    if (o.route == "contour") {
      ContourOptions copt;
      copt.grid = o.grid;
      copt.exec = pick_exec(o);
      series = cepstrum_contour_oracle(ChartPoint::of(model), terms, copt);
    } else if (o.route == "analytic") {
      series = complex_cepstrum(model, terms, pick_c0(o));
    } else {
      throw InvalidInput("config: --route must be analytic or contour");
    }
  } else {
    throw InvalidInput("config: --kind must be complex, impulse, or power");
  }
  return emit(o.output == "csv" ? series_to_csv(series)
                                : series_to_json(series) + "\n",
              o);
}

int run_geometry(const Options& o, const ReportRequest& req,
                 const char* principal) {
  const ArfimaModel model = load_model(o.models.at(0));
  const GeometryConfig cfg = make_config(o, model);
  ReportRequest want = req;
  want.check = want.check || o.check;
  const GeometryReport rep = geometry_report(cfg, want, pick_exec(o));

  if (o.output != "csv") return emit(report_to_json(rep) + "\n", o);

  const std::string p = principal;
  if (p == "metric")
    return emit(complex_matrix_to_csv(rep.metric, rep.labels), o);
  if (p == "ricci")
    return emit(complex_matrix_to_csv(*rep.ricci, rep.labels), o);
  if (p == "connection") {
    std::string out = "k,i,j,value_re,value_im\n";
    const auto& conn = *rep.connection;
    for (std::size_t k = 0; k < conn.size(); ++k)
      for (long i = 0; i < conn[k].rows(); ++i)
        for (long j = 0; j < conn[k].cols(); ++j)
          out += rep.labels[k] + "," + rep.labels[static_cast<std::size_t>(i)] +
                 "," + rep.labels[static_cast<std::size_t>(j)] + "," +
                 fmt17(conn[k](i, j).real()) + "," +
                 fmt17(conn[k](i, j).imag()) + "\n";
    return emit(out, o);
  }
  std::string out = "key,value\n";
  out += "potential," + fmt17(rep.potential) + "\n";
  if (rep.potential_closed)
    out += "potential_closed," + fmt17(*rep.potential_closed) + "\n";
  out += "terms," + std::to_string(rep.potential_info.terms) + "\n";
  out += "tail_bound," + fmt17(rep.potential_info.tail_bound) + "\n";
  return emit(out, o);
}

DistanceOptions make_distance_options(const Options& o) {
  DistanceOptions d;
  d.weight = pick_weight(o);
  d.transform = pick_transform(o);
  d.c0 = pick_c0(o);
  d.terms = (o.truncation >= 0 ? o.truncation : 255) + 1;
  d.contour.grid = std::max<long>(o.grid, 4 * d.terms);
  d.exec = pick_exec(o);
  return d;
}

int run_distance(const Options& o) {
  const ArfimaModel a = load_model(o.models.at(0));
  const ArfimaModel b = load_model(o.models.at(1));
  const DistanceOptions d = make_distance_options(o);
  const auto fa = transform_series(a, d);
  const auto fb = transform_series(b, d);
  const double dist = weighted_distance(fa, fb, d.weight);

  // per-coefficient contributions: omega_s |f_s - g_s|^2, summing to dist^2
  std::vector<double> contrib(fa.coeffs.size());
  for (std::size_t s = 0; s < fa.coeffs.size(); ++s) {
    const auto w = d.weight.maybe(static_cast<long>(s));
    contrib[s] = w ? *w * std::norm(fa.coeffs[s] - fb.coeffs[s]) : 0.0;
  }
  if (o.output == "csv") {
    std::string out = "distance," + fmt17(dist) + "\ns,contribution\n";
    for (std::size_t s = 0; s < contrib.size(); ++s)
      out += std::to_string(s) + "," + fmt17(contrib[s]) + "\n";
    return emit(out, o);
  }
  nlohmann::json j;
  j["distance"] = dist;
  j["contributions"] = contrib;
  return emit(j.dump(2) + "\n", o);
}

int run_distance_matrix(const Options& o) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(o.models_dir))
    throw InvalidInput("distance-matrix: '" + o.models_dir +
                       "' is not a directory");
  std::vector<std::string> paths;
  for (const auto& e : fs::directory_iterator(o.models_dir))
    if (e.is_regular_file() && e.path().extension() == ".json")
      paths.push_back(e.path().string());
  std::sort(paths.begin(), paths.end());
  if (paths.empty())
    throw InvalidInput("distance-matrix: no .json model files in '" +
                       o.models_dir + "'");
  std::vector<ArfimaModel> models;
  std::vector<std::string> names;
  for (const auto& p : paths) {
    models.push_back(load_model(p));
    names.push_back(fs::path(p).stem().string());
  }
  const Eigen::MatrixXd dm = distance_matrix(models, make_distance_options(o));
  return emit(o.output == "json" ? distance_matrix_to_json(dm, names) + "\n"
                                 : distance_matrix_to_csv(dm, names),
              o);
}

int run_kernel(const Options& o) {
  const WeightSequence w = pick_weight(o);
  const cplx u(o.u_parts.at(0), o.u_parts.at(1));
  const cplx v(o.v_parts.at(0), o.v_parts.at(1));
  cplx val;
  if (o.route == "series")
    val = reproducing_kernel_series(w, u, v,
                                    (o.truncation >= 0 ? o.truncation : 255) +
                                        1);
  else if (o.route == "analytic" || o.route == "closed")
    val = reproducing_kernel(w, u, v, o.tolerance);
  else
    throw InvalidInput("config: --route must be closed or series");
  if (o.output == "csv")
    return emit("kernel_re,kernel_im\n" + fmt17(val.real()) + "," +
                    fmt17(val.imag()) + "\n",
                o);
  nlohmann::json j;
  j["kernel"] = {val.real(), val.imag()};
  return emit(j.dump(2) + "\n", o);
}

int run_verify_cmd(const Options& o) {
  VerifyOptions vo;
  vo.seed = o.seed;
  vo.models = o.verify_models;
  vo.triples = o.verify_triples;
  vo.inject_metric_sign_flip = o.inject_flip;
  vo.exec = pick_exec(o);
  const VerifyReport rep = run_verify(vo);
  if (o.output == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& c : rep.checks) {
      nlohmann::json e;
      e["name"] = c.name;
      e["residual"] = c.residual;
      e["tolerance"] = c.tolerance;
      e["cases"] = c.cases;
      e["pass"] = c.pass;
      if (!c.note.empty()) e["note"] = c.note;
      j.push_back(e);
    }
    emit(j.dump(2) + "\n", o);
  } else {
    emit(rep.summary(), o);
  }
  return rep.all_pass() ? 0 : 1;
}

}   // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Kähler information geometry of ARMA/ARFIMA filters in weighted "
      "Hardy spaces"};
  app.require_subcommand(1);
  Options o;

  const auto add_weight_flags = [&o](CLI::App* cmd) {
    auto* ws = cmd->add_option("--weight", o.weight_spec,
                               "weight as inline JSON or a file path");
    auto* om = cmd->add_option("--order-m", o.order_m,
                               "power-weight order m (omega_s = s^m)");
    ws->excludes(om);
    om->excludes(ws);
    om->each([&o](const std::string&) { o.order_m_set = true; });
  };
  const auto add_io_flags = [&o](CLI::App* cmd) {
    cmd->add_option("--output", o.output, "json or csv");
    cmd->add_option("--out", o.out_path, "write the payload to a file");
  };

  auto* cep = app.add_subcommand("cepstrum", "complex or power cepstrum");
  cep->add_option("--model", o.models, "model JSON file")
      ->required()
      ->expected(1);
  cep->add_option("--kind", o.kind, "complex, impulse, or power");
  cep->add_option("--route", o.route, "analytic or contour");
  cep->add_option("--truncation", o.truncation, "top index N (N+1 terms)");
  cep->add_option("--c0", o.c0, "one or log-gain");
  cep->add_option("--grid", o.grid, "contour grid");
  cep->add_option("--exec", o.exec, "serial or parallel");
  add_io_flags(cep);

  auto* imp = app.add_subcommand("impulse", "impulse response h_s");
  imp->add_option("--model", o.models, "model JSON file")
      ->required()
      ->expected(1);
  imp->add_option("--truncation", o.truncation, "top index N (N+1 terms)");
  add_io_flags(imp);

  const auto add_geometry = [&](const char* name, const char* help) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--model", o.models, "model JSON file")
        ->required()
        ->expected(1);
    add_weight_flags(cmd);
    cmd->add_option("--transform", o.transform,
                    "identity, log, or log-squared-modulus");
    cmd->add_option("--chart", o.chart, "auto, with-d, or roots-only");
    cmd->add_option("--truncation", o.truncation, "series truncation cap");
    cmd->add_option("--tolerance", o.tolerance, "adaptive series tolerance");
    cmd->add_option("--fd-step", o.fd_step, "finite-difference step");
    cmd->add_option("--fd-step-outer", o.fd_step_outer,
                    "outer step for third derivatives");
    cmd->add_option("--grid", o.grid, "contour grid");
    cmd->add_option("--c0", o.c0, "one or log-gain");
    cmd->add_option("--exec", o.exec, "serial or parallel");
    cmd->add_flag("--check", o.check, "embed check_kahler residuals");
    add_io_flags(cmd);
    return cmd;
  };
  auto* pot = add_geometry("potential", "Kähler potential");
  auto* met = add_geometry("metric", "metric tensor");
  auto* con = add_geometry("connection", "Levi-Civita connection");
  auto* ric = add_geometry("ricci", "Ricci tensor");

  auto* dst = app.add_subcommand("distance", "weighted cepstrum distance");
  dst->add_option("--model", o.models, "two model JSON files")
      ->required()
      ->expected(2);
  add_weight_flags(dst);
  dst->add_option("--transform", o.transform,
                  "identity, log, or log-squared-modulus");
  dst->add_option("--truncation", o.truncation, "top index N (N+1 terms)");
  dst->add_option("--c0", o.c0, "one or log-gain");
  dst->add_option("--grid", o.grid, "contour grid");
  dst->add_option("--exec", o.exec, "serial or parallel");
  add_io_flags(dst);

  auto* dmx = app.add_subcommand("distance-matrix",
                                 "pairwise distances over a directory");
  dmx->add_option("--models", o.models_dir, "directory of model JSON files")
      ->required();
  add_weight_flags(dmx);
  dmx->add_option("--transform", o.transform,
                  "identity, log, or log-squared-modulus");
  dmx->add_option("--truncation", o.truncation, "top index N (N+1 terms)");
  dmx->add_option("--c0", o.c0, "one or log-gain");
  dmx->add_option("--grid", o.grid, "contour grid");
  dmx->add_option("--exec", o.exec, "serial or parallel");
  add_io_flags(dmx);

  auto* ker = app.add_subcommand("kernel", "reproducing kernel k_u(v)");
  add_weight_flags(ker);
  ker->add_option("--u", o.u_parts, "u as RE IM")->expected(2);
  ker->add_option("--v", o.v_parts, "v as RE IM")->expected(2);
  ker->add_option("--route", o.route, "closed or series");
  ker->add_option("--truncation", o.truncation, "series terms for --route series");
  ker->add_option("--tolerance", o.tolerance, "closed-form tolerance");
  add_io_flags(ker);

  auto* ver = app.add_subcommand("verify", "cross-verification suite");
  ver->add_option("--seed", o.seed, "random-model seed");
  ver->add_option("--models", o.verify_models, "cases per geometry suite");
  ver->add_option("--triples", o.verify_triples, "distance-axiom triples");
  ver->add_flag("--inject-metric-sign-flip", o.inject_flip,
                "debug mutation: negate the closed metric");
  ver->add_option("--exec", o.exec, "serial or parallel");
  add_io_flags(ver);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }

  o.route = ker->parsed() && o.route == "analytic" ? "closed" : o.route;
  if (o.output.empty())
    o.output = dmx->parsed() ? "csv" : ver->parsed() ? "text" : "json";

  try {
    const bool output_ok =
        o.output == "json" || o.output == "csv" ||
        (ver->parsed() && o.output == "text");
    if (!output_ok)
      throw InvalidInput("config: --output must be json or csv");
    if (cep->parsed()) return run_cepstrum(o, false);
    if (imp->parsed()) return run_cepstrum(o, true);
    ReportRequest req;
    if (pot->parsed()) return run_geometry(o, req, "potential");
    if (met->parsed()) return run_geometry(o, req, "metric");
    if (con->parsed()) {
      req.connection = true;
      return run_geometry(o, req, "connection");
    }
    if (ric->parsed()) {
      req.ricci = true;
      return run_geometry(o, req, "ricci");
    }
    if (dst->parsed()) return run_distance(o);
    if (dmx->parsed()) return run_distance_matrix(o);
    if (ker->parsed()) return run_kernel(o);
    if (ver->parsed()) return run_verify_cmd(o);
    std::fprintf(stderr, "no subcommand\n");
    return 2;
  } catch (const NonConvergent& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const GridTooCoarse& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  } catch (const Divergent& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const DivergentInput& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const DegenerateMetric& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 5;
  } catch (const std::exception& e) {
    // InvalidInput, IncompatibleWeight, step and schema problems
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  }
}
