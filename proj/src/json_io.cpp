#include "khardy/json_io.hpp"

#include "khardy/errors.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace khardy {

namespace {

using nlohmann::json;

// shortest decimal that parses back to the same double
std::string fmt(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json parse_or_throw(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string(what) + ": malformed JSON: " + e.what());
  }
}

double number_field(const json& j, const char* owner, const char* key) {
  if (!j.contains(key))
    throw InvalidInput(std::string(owner) + ": missing field '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_number())
    throw InvalidInput(std::string(owner) + ": field '" + key +
                       "' must be a number");
  return v.get<double>();
}

std::vector<cplx> complex_list(const json& j, const char* owner,
                               const char* key) {
  if (!j.contains(key))
    throw InvalidInput(std::string(owner) + ": missing field '" + key + "'");
  const auto& v = j.at(key);
  if (!v.is_array())
    throw InvalidInput(std::string(owner) + ": field '" + key +
                       "' must be an array of [re, im] pairs");
  std::vector<cplx> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() ||
        !e[1].is_number())
      throw InvalidInput(std::string(owner) + ": field '" + key +
                         "' must hold [re, im] pairs of two numbers");
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

json pair_of(cplx v) { return json::array({v.real(), v.imag()}); }

json flat_pairs(const Matrix& m) {
  json out = json::array();
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) out.push_back(pair_of(m(i, j)));
  return out;
}

json flat_pairs(const Tensor3& t) {
  json out = json::array();
  for (const auto& m : t)
    for (long i = 0; i < m.rows(); ++i)
      for (long j = 0; j < m.cols(); ++j) out.push_back(pair_of(m(i, j)));
  return out;
}

const char* kind_name(SeriesKind k) {
  switch (k) {
    case SeriesKind::transfer: return "transfer";
    case SeriesKind::complex_cepstrum: return "complex-cepstrum";
    case SeriesKind::power_cepstrum: return "power-cepstrum";
    case SeriesKind::generic: return "generic";
  }
  return "generic";
}

}   // namespace

ArfimaModel model_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "model");
  if (!j.is_object()) throw InvalidInput("model: top level must be an object");
  for (const auto& item : j.items())
    if (item.key() != "sigma" && item.key() != "d" && item.key() != "poles" &&
        item.key() != "zeros")
      throw InvalidInput("model: unknown field '" + item.key() + "'");
  ArfimaModel m;
  m.sigma = number_field(j, "model", "sigma");
  m.d = number_field(j, "model", "d");
  m.poles = complex_list(j, "model", "poles");
  m.zeros = complex_list(j, "model", "zeros");
  return m;
}

std::string model_to_json(const ArfimaModel& m) {
  json j;
  j["sigma"] = m.sigma;
  j["d"] = m.d;
  j["poles"] = json::array();
  for (cplx v : m.poles) j["poles"].push_back(pair_of(v));
  j["zeros"] = json::array();
  for (cplx v : m.zeros) j["zeros"].push_back(pair_of(v));
  return j.dump(2);
}

ArfimaModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("model file: cannot read '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return model_from_json(buf.str());
  } catch (const InvalidInput& e) {
    throw InvalidInput("'" + path + "': " + e.what());
  }
}

WeightSequence weight_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "weight");
  if (!j.is_object())
    throw InvalidInput("weight: top level must be an object");
  if (!j.contains("family") || !j.at("family").is_string())
    throw InvalidInput("weight: missing string field 'family'");
  const std::string family = j.at("family").get<std::string>();

  const auto reject_unknown = [&](std::initializer_list<const char*> ok) {
    for (const auto& item : j.items()) {
      bool known = item.key() == "family";
      for (const char* k : ok) known = known || item.key() == k;
      if (!known)
        throw InvalidInput("weight: unknown field '" + item.key() +
                           "' for family '" + family + "'");
    }
  };

  if (family == "hardy" || family == "bergman" || family == "dirichlet") {
    reject_unknown({});
    if (family == "hardy") return WeightSequence::hardy();
    if (family == "bergman") return WeightSequence::bergman();
    return WeightSequence::dirichlet();
  }
  if (family == "sobolev") {
    reject_unknown({"m"});
    const double m = number_field(j, "weight", "m");
    if (m < 0.0 || m != std::floor(m))
      throw InvalidInput("weight: sobolev 'm' must be a non-negative integer");
    return WeightSequence::sobolev(static_cast<int>(m));
  }
  if (family == "power") {
    reject_unknown({"m"});
    return WeightSequence::power(number_field(j, "weight", "m"));
  }
  if (family == "custom") {
    reject_unknown({"table", "extension"});
    if (!j.contains("table") || !j.at("table").is_array() ||
        j.at("table").empty())
      throw InvalidInput("weight: custom needs a non-empty 'table' array");
    std::vector<double> table;
    for (const auto& e : j.at("table")) {
      if (!e.is_number())
        throw InvalidInput("weight: 'table' entries must be numbers");
      table.push_back(e.get<double>());
    }
    auto ext = WeightSequence::Extension::error_beyond_table;
    if (j.contains("extension")) {
      const auto& e = j.at("extension");
      if (!e.is_string())
        throw InvalidInput("weight: 'extension' must be a string");
      const std::string name = e.get<std::string>();
      if (name == "repeat-last")
        ext = WeightSequence::Extension::repeat_last;
      else if (name != "error")
        throw InvalidInput(
            "weight: 'extension' must be 'error' or 'repeat-last'");
    }
    return WeightSequence::custom(std::move(table), ext);
  }
  throw InvalidInput("weight: unknown family '" + family + "'");
}

std::string weight_to_json(const WeightSequence& w) {
  using F = WeightSequence::Family;
  json j;
  switch (w.family()) {
    case F::hardy: j["family"] = "hardy"; break;
    case F::bergman: j["family"] = "bergman"; break;
    case F::dirichlet: j["family"] = "dirichlet"; break;
    case F::sobolev:
      j["family"] = "sobolev";
      j["m"] = w.order();
      break;
    case F::power:
      j["family"] = "power";
      j["m"] = w.order();
      break;
    case F::custom:
      j["family"] = "custom";
      j["table"] = w.table();
      j["extension"] =
          w.extension() == WeightSequence::Extension::repeat_last
              ? "repeat-last"
              : "error";
      break;
  }
  return j.dump(2);
}

WeightSequence weight_from_spec(const std::string& spec) {
  const auto first = spec.find_first_not_of(" \t\n\r");
  if (first != std::string::npos && spec[first] == '{')
    return weight_from_json(spec);
  std::ifstream in(spec);
  if (!in) throw InvalidInput("weight file: cannot read '" + spec + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return weight_from_json(buf.str());
}

std::string series_to_json(const CoefficientSeries& f) {
  json j;
  j["kind"] = kind_name(f.kind);
  j["truncation"] = f.truncation();
  j["coeffs"] = json::array();
  for (cplx v : f.coeffs) j["coeffs"].push_back(pair_of(v));
  if (f.tail_bound && std::isfinite(*f.tail_bound))
    j["tail_bound"] = *f.tail_bound;
  return j.dump(2);
}

std::string series_to_csv(const CoefficientSeries& f) {
  std::string out = "s,value_re,value_im\n";
  for (std::size_t s = 0; s < f.coeffs.size(); ++s)
    out += std::to_string(s) + "," + fmt(f.coeffs[s].real()) + "," +
           fmt(f.coeffs[s].imag()) + "\n";
  return out;
}

std::string report_to_json(const GeometryReport& rep) {
  json j;
  j["labels"] = rep.labels;
  j["dim"] = rep.metric.rows();
  j["potential"] = rep.potential;
  if (rep.potential_closed) j["potential_closed"] = *rep.potential_closed;
  j["metric"] = flat_pairs(rep.metric);
  if (rep.metric_closed) j["metric_closed"] = flat_pairs(*rep.metric_closed);
  if (rep.connection) j["connection"] = flat_pairs(*rep.connection);
  if (rep.connection_closed)
    j["connection_closed"] = flat_pairs(*rep.connection_closed);
  if (rep.ricci) j["ricci"] = flat_pairs(*rep.ricci);
  if (rep.residuals) {
    j["hermitian_residual"] = rep.residuals->hermitian;
    j["closed_form_residual"] = rep.residuals->closedness;
  }
  json conv;
  conv["terms"] = rep.potential_info.terms;
  conv["tail_bound"] = rep.potential_info.tail_bound;   // null when infinite
  conv["truncation"] = rep.truncation;
  conv["fd_step"] = rep.fd_step;
  if (rep.grid > 0) conv["grid"] = rep.grid;
  j["convergence"] = conv;
  return j.dump(2);
}

std::string complex_matrix_to_csv(const Matrix& m,
                                  const std::vector<std::string>& labels) {
  std::string out = "coordinate";
  for (long c = 0; c < m.cols(); ++c) {
    const std::string name = c < static_cast<long>(labels.size())
                                 ? labels[static_cast<std::size_t>(c)]
                                 : std::to_string(c);
    out += "," + name + "_re," + name + "_im";
  }
  out += "\n";
  for (long r = 0; r < m.rows(); ++r) {
    out += r < static_cast<long>(labels.size())
               ? labels[static_cast<std::size_t>(r)]
               : std::to_string(r);
    for (long c = 0; c < m.cols(); ++c)
      out += "," + fmt(m(r, c).real()) + "," + fmt(m(r, c).imag());
    out += "\n";
  }
  return out;
}

std::string distance_matrix_to_csv(const Eigen::MatrixXd& m,
                                   const std::vector<std::string>& names) {
  std::string out = "model";
  for (long c = 0; c < m.cols(); ++c)
    out += "," + names[static_cast<std::size_t>(c)];
  out += "\n";
  for (long r = 0; r < m.rows(); ++r) {
    out += names[static_cast<std::size_t>(r)];
    for (long c = 0; c < m.cols(); ++c) out += "," + fmt(m(r, c));
    out += "\n";
  }
  return out;
}

std::string distance_matrix_to_json(const Eigen::MatrixXd& m,
                                    const std::vector<std::string>& names) {
  json j;
  j["models"] = names;
  json rows = json::array();
  for (long r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (long c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  j["distances"] = rows;
  return j.dump(2);
}

}
