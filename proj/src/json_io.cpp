#include "scl/json_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace scl {

namespace {

template <class T>
T field(const Json& j, const char* name) {
  if (!j.contains(name)) throw ContractError(std::string("model spec is missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ContractError(std::string("model spec field '") + name + "' has the wrong type");
  }
}

}  // namespace

Model model_from_json(const Json& spec) {
  if (!spec.is_object()) throw ContractError("model spec must be a JSON object");
  const ModelKind kind = model_kind_from_string(field<std::string>(spec, "kind"));
  if (spec.contains("tied") && !spec.at("tied").get<bool>() &&
      (kind == ModelKind::boltzmann_chain || kind == ModelKind::linear_chain_crf))
    throw ContractError("model spec field 'tied': chain parameters are always tied");
  switch (kind) {
    case ModelKind::boltzmann_machine: return Model::boltzmann_machine(field<int>(spec, "m"));
    case ModelKind::generic: {
      auto cards = field<std::vector<int>>(spec, "cardinalities");
      if (spec.contains("m") && field<int>(spec, "m") != static_cast<int>(cards.size()))
        throw ContractError("model spec field 'm' disagrees with 'cardinalities'");
      auto cliques = field<std::vector<std::vector<int>>>(spec, "cliques");
      CliqueFeature f = CliqueFeature::product;
      if (spec.contains("feature")) {
        const auto name = field<std::string>(spec, "feature");
        if (name == "indicator") f = CliqueFeature::indicator;
        else if (name != "product") throw ContractError("model spec field 'feature' must be product or indicator");
      }
      return Model::generic(std::move(cards), std::move(cliques), f);
    }
    case ModelKind::boltzmann_chain:
      return Model::boltzmann_chain(field<int>(spec, "states"), field<int>(spec, "symbols"));
    case ModelKind::linear_chain_crf: {
      const int S = field<int>(spec, "states");
      const int K = field<int>(spec, "num_obs_features");
      std::vector<std::pair<int, int>> pairs;
      if (spec.contains("supported")) {
        for (const auto& p : spec.at("supported")) pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
      } else {
        for (int s = 0; s < S; ++s)
          for (int k = 0; k < K; ++k) pairs.emplace_back(s, k);
      }
      return Model::linear_chain_crf(S, K, std::move(pairs));
    }
  }
  throw ContractError("unsupported model kind");
}

Json model_to_json(const Model& model) {
  Json j;
  j["kind"] = to_string(model.kind());
  switch (model.kind()) {
    case ModelKind::boltzmann_machine: j["m"] = model.num_vars(); break;
    case ModelKind::generic:
      j["m"] = model.num_vars();
      j["cardinalities"] = model.cardinalities();
      j["cliques"] = model.cliques();
      j["feature"] = model.clique_feature() == CliqueFeature::product ? "product" : "indicator";
      break;
    case ModelKind::boltzmann_chain:
      j["states"] = model.states();
      j["symbols"] = model.symbols();
      j["tied"] = true;
      break;
    case ModelKind::linear_chain_crf:
      j["states"] = model.states();
      j["num_obs_features"] = model.num_obs_features();
      j["supported"] = model.supported_pairs();
      j["tied"] = true;
      break;
  }
  j["num_params"] = model.num_params();
  return j;
}

SelectionPolicy policy_from_json(const Json& spec) {
  SelectionPolicy p;
  p.family = policy_family_from_string(spec.at("family").get<std::string>());
  p.lambda = vector_from_json(spec.at("lambda"));
  if (spec.contains("blocks")) p.blocks = spec.at("blocks").get<std::vector<std::vector<int>>>();
  p.validate();
  return p;
}

Json policy_to_json(const SelectionPolicy& policy) {
  Json j;
  j["family"] = to_string(policy.family);
  j["lambda"] = std::vector<double>(policy.lambda.data(), policy.lambda.data() + policy.lambda.size());
  if (!policy.blocks.empty()) j["blocks"] = policy.blocks;
  return j;
}

Json matrix_to_json(const Matrix& m) {
  Json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  std::vector<double> data;
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  j["data"] = data;
  return j;
}

Json vector_to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from_json(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(data.size()) != rows * cols) throw DimensionError("matrix data length mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[r * cols + c];
  return m;
}

Vector vector_from_json(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Json ledger_to_json(const FlopLedger& l) {
  Json j;
  j["objective_total"] = l.objective_total;
  j["gradient_total"] = l.gradient_total;
  j["per_component"] = l.per_component;
  j["per_sample"] = l.per_sample;
  return j;
}

Json fit_to_json(const Model& model, const FitResult& fit) {
  Json j;
  Json theta = Json::object();
  for (int p = 0; p < model.num_params(); ++p) theta[model.param_name(p)] = fit.theta_hat[p];
  j["theta_hat"] = theta;
  j["objective"] = fit.objective;
  j["converged"] = fit.converged;
  j["gradient_norm"] = fit.gradient_norm;
  j["iterations"] = fit.iterations;
  j["evaluations"] = fit.evaluations;
  j["objective_trace"] = fit.objective_trace;
  j["ledger"] = ledger_to_json(fit.ledger);
  j["flops_total"] = fit.flops_total;
  return j;
}

Json report_to_json(const AsymReport& r) {
  Json j;
  j["upsilon_inv"] = matrix_to_json(r.upsilon_inv);
  j["sigma"] = matrix_to_json(r.sigma);
  j["variance"] = matrix_to_json(r.variance);
  j["trace"] = r.trace;
  j["log_det"] = r.log_det;
  if (r.eff) j["eff"] = *r.eff;
  if (r.eff_trace) j["eff_trace"] = *r.eff_trace;
  j["sigma_selection"] = matrix_to_json(r.sigma_selection);
  j["variance_selection"] = matrix_to_json(r.variance_selection);
  j["trace_selection"] = r.trace_selection;
  j["log_det_selection"] = r.log_det_selection;
  if (r.eff_selection) j["eff_selection"] = *r.eff_selection;
  if (r.eff_trace_selection) j["eff_trace_selection"] = *r.eff_trace_selection;
  return j;
}

Json robust_to_json(const RobustReport& r) {
  Json j;
  j["theta0"] = vector_to_json(r.theta0);
  j["bread"] = matrix_to_json(r.bread);
  j["meat"] = matrix_to_json(r.meat);
  j["sandwich"] = matrix_to_json(r.sandwich);
  j["residual"] = r.residual;
  return j;
}

Json synthetic_to_json(const Model& model, const SyntheticData& d) {
  Json j;
  j["model"] = model_to_json(model);
  j["theta0"] = vector_to_json(d.theta0);
  j["seed"] = d.seed;
  if (d.length) j["length"] = d.length;
  Json samples = Json::array();
  for (const auto& s : d.data.samples) {
    Json x;
    x["values"] = s.values;
    if (!s.observed.empty()) x["observed"] = s.observed;
    samples.push_back(std::move(x));
  }
  j["samples"] = std::move(samples);
  return j;
}

SyntheticData synthetic_from_json(const Json& j) {
  SyntheticData d;
  d.theta0 = vector_from_json(j.at("theta0"));
  d.seed = j.at("seed").get<std::uint64_t>();
  d.length = j.value("length", 0);
  for (const auto& x : j.at("samples")) {
    Sample s;
    s.values = x.at("values").get<std::vector<int>>();
    if (x.contains("observed")) s.observed = x.at("observed").get<std::vector<std::vector<int>>>();
    d.data.samples.push_back(std::move(s));
  }
  return d;
}

void write_dataset(std::ostream& out, const Dataset& data) {
  for (const auto& s : data.samples) {
    for (std::size_t i = 0; i < s.values.size(); ++i) out << (i ? " " : "") << s.values[i];
    out << '\n';
  }
}

namespace {

std::vector<int> parse_ints(const std::string& line, char sep, std::size_t lineno) {
  std::vector<int> v;
  std::string tok;
  std::istringstream in(line);
  while (std::getline(in, tok, sep)) {
    if (tok.empty()) continue;
    int x = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || p != tok.data() + tok.size()) throw ParseError("bad integer '" + tok + "'", lineno);
    v.push_back(x);
  }
  return v;
}

}  // namespace

Dataset read_dataset(std::istream& in) {
  Dataset d;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto v = parse_ints(line, ' ', lineno);
    if (v.empty()) continue;
    d.samples.push_back(Sample{std::move(v), {}});
  }
  return d;
}

void write_conditional(std::ostream& y_out, std::ostream& x_out, const Dataset& data) {
  write_dataset(y_out, data);
  for (const auto& s : data.samples) {
    for (std::size_t t = 0; t < s.observed.size(); ++t) {
      x_out << (t ? " " : "");
      for (std::size_t i = 0; i < s.observed[t].size(); ++i) x_out << (i ? "," : "") << s.observed[t][i];
    }
    x_out << '\n';
  }
}

Dataset read_conditional(std::istream& y_in, std::istream& x_in) {
  Dataset d = read_dataset(y_in);
  std::string line;
  std::size_t lineno = 0, i = 0;
  while (std::getline(x_in, line)) {
    ++lineno;
    std::istringstream pos(line);
    std::vector<std::vector<int>> obs;
    for (std::string p; pos >> p;) obs.push_back(parse_ints(p, ',', lineno));
    if (obs.empty()) continue;
    if (i >= d.size()) throw ParseError("more observation lines than label lines", lineno);
    if (obs.size() != d.samples[i].values.size()) throw ParseError("observation length differs from labels", lineno);
    d.samples[i++].observed = std::move(obs);
  }
  if (i != d.size()) throw ParseError("fewer observation lines than label lines", lineno);
  return d;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

}  // namespace scl
