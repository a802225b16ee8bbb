#include "scl/cli.hpp"

#include "scl/asymptotics.hpp"
#include "scl/beta_select.hpp"
#include "scl/conll.hpp"
#include "scl/estimator.hpp"
#include "scl/features.hpp"
#include "scl/json_io.hpp"
#include "scl/rng.hpp"
#include "scl/synthetic.hpp"

#include "CLI11.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

namespace scl {

namespace {

namespace fs = std::filesystem;

struct Run {
  Json cfg;
  std::uint64_t seed = 0;
  fs::path out;
  std::string hash;
  bool auto_beta = false;
  std::ostream* log = nullptr;
};

std::vector<double> parse_grid(const std::string& text, const char* flag) {
  std::vector<double> v;
  std::stringstream in(text);
  for (std::string tok; std::getline(in, tok, ',');) {
    if (tok.empty()) continue;
    try {
      v.push_back(tok == "inf" || tok == "none" ? std::numeric_limits<double>::infinity() : std::stod(tok));
    } catch (const std::exception&) {
      throw ContractError(std::string("bad value '") + tok + "' in " + flag);
    }
  }
  if (v.empty()) throw ContractError(std::string(flag) + " is empty");
  return v;
}

std::vector<double> grid(const Run& run, const char* key, std::vector<double> fallback) {
  if (!run.cfg.contains(key)) return fallback;
  std::vector<double> v;
  for (const auto& x : run.cfg.at(key))
    v.push_back(x.is_string() ? std::numeric_limits<double>::infinity() : x.get<double>());
  if (v.empty()) throw ContractError(std::string("config field '") + key + "' is an empty grid");
  return v;
}

const Json& require(const Json& j, const char* key) {
  if (!j.contains(key)) throw ContractError(std::string("config field '") + key + "' is missing");
  return j.at(key);
}

Model config_model(const Run& run) {
  const Json& spec = require(run.cfg, "model");
  try {
    return model_from_json(spec);
  } catch (const ContractError& e) {
    throw ContractError(std::string("config field 'model': ") + e.what());
  }
}

Vector config_theta(const Json& spec, const Model& model) {
  if (spec.is_string()) {
    const auto s = spec.get<std::string>();
    if (s == "alternating") return alternating_theta(model.num_params());
    if (s == "zero") return Vector::Zero(model.num_params());
    throw ContractError("config field 'theta0' must be \"alternating\", \"zero\" or a list");
  }
  Vector t = vector_from_json(spec);
  model.validate_theta(t);
  return t;
}

FitConfig config_fit(const Run& run) {
  FitConfig fc;
  if (run.cfg.contains("fit")) {
    const Json& f = run.cfg.at("fit");
    fc.max_iterations = f.value("max_iterations", fc.max_iterations);
    fc.gradient_tolerance = f.value("gradient_tolerance", fc.gradient_tolerance);
    if (f.contains("method")) fc.method = method_from_string(f.at("method").get<std::string>());
  }
  if (run.cfg.contains("sigma2") && run.cfg.at("sigma2").is_number()) fc.sigma2 = run.cfg.at("sigma2").get<double>();
  return fc;
}

std::optional<double> finite_or_none(double s2) {
  if (std::isfinite(s2)) return s2;
  return std::nullopt;
}

Json seeds_json(const std::vector<std::pair<std::string, std::uint64_t>>& seeds) {
  Json j = Json::object();
  for (const auto& [k, v] : seeds) j[k] = v;
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write '" + path.string() + "'");
  f << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

class Csv {
 public:
  Csv(const Run& run, const std::vector<std::pair<std::string, std::uint64_t>>& seeds,
      std::vector<std::string> header, const std::string& note = {}) {
    text_ << "# config_hash=" << run.hash << "\n# seeds=" << seeds_json(seeds).dump() << "\n";
    if (!note.empty()) text_ << "# " << note << "\n";
    for (std::size_t i = 0; i < header.size(); ++i) text_ << (i ? "," : "") << header[i];
    text_ << "\n";
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) text_ << (i ? "," : "") << cells[i];
    text_ << "\n";
  }
  std::string str() const { return text_.str(); }

 private:
  std::ostringstream text_;
};

struct Loaded {
  Model model;
  Dataset data;
  std::optional<Vector> theta0;
  std::uint64_t data_seed = 0;
};

Loaded load_data(const Run& run, std::uint64_t stream = 1) {
  Model model = config_model(run);
  const Json data = run.cfg.value("data", Json::object());
  if (data.contains("path")) {
    const fs::path p = data.at("path").get<std::string>();
    std::ifstream in(p);
    if (!in) throw ContractError("config field 'data.path': cannot open '" + p.string() + "'");
    Loaded l{model, {}, std::nullopt, 0};
    if (p.extension() == ".json") {
      Json j = Json::parse(in);
      SyntheticData s = synthetic_from_json(j);
      l.data = std::move(s.data);
      l.theta0 = s.theta0;
      l.data_seed = s.seed;
    } else if (data.contains("x_path")) {
      std::ifstream xin(data.at("x_path").get<std::string>());
      if (!xin) throw ContractError("config field 'data.x_path': cannot open file");
      l.data = read_conditional(in, xin);
    } else {
      l.data = read_dataset(in);
    }
    for (const auto& x : l.data.samples) model.validate(x);
    return l;
  }
  SyntheticOptions so;
  so.length = data.value("length", 0);
  const std::size_t n = data.value("n", std::size_t{100});
  const std::uint64_t seed = data.contains("seed") ? data.at("seed").get<std::uint64_t>() : derive_seed(run.seed, stream);
  Vector theta0 = config_theta(data.value("theta0", Json("alternating")), model);
  SyntheticData s = make_synthetic(model, theta0, n, seed, so);
  return {model, std::move(s.data), theta0, seed};
}

// ---------------------------------------------------------------------------

int cmd_sample(const Run& run) {
  Model model = config_model(run);
  const Json data = run.cfg.value("data", Json::object());
  SyntheticOptions so;
  so.length = data.value("length", 0);
  const std::size_t n = data.value("n", std::size_t{100});
  const std::uint64_t seed = data.contains("seed") ? data.at("seed").get<std::uint64_t>() : derive_seed(run.seed, 1);
  Vector theta0 = config_theta(data.value("theta0", Json("alternating")), model);
  SyntheticData s = make_synthetic(model, theta0, n, seed, so);
  Json j;
  j["config_hash"] = run.hash;
  j["seeds"] = seeds_json({{"seed", run.seed}, {"data", seed}});
  j.update(synthetic_to_json(model, s));
  write_json(run.out / "data.json", j);
  std::ostringstream txt;
  if (model.is_conditional()) {
    std::ostringstream x;
    write_conditional(txt, x, s.data);
    write_text(run.out / "data_x.txt", x.str());
    write_text(run.out / "data_y.txt", txt.str());
  } else {
    write_dataset(txt, s.data);
    write_text(run.out / "data.txt", txt.str());
  }
  *run.log << "wrote " << s.data.size() << " samples to " << run.out.string() << "\n";
  return 0;
}

int cmd_fit(const Run& run) {
  Loaded l = load_data(run);
  const std::string expr = run.cfg.value("policy", std::string("PL1"));
  PolicySpec spec = parse_policy(l.model, expr);
  FitConfig fc = config_fit(run);
  if (!fc.sigma2 && run.cfg.contains("sigma2_grid"))
    fc.sigma2 = finite_or_none(grid(run, "sigma2_grid", {}).front());
  const std::uint64_t zseed = derive_seed(run.seed, 2);
  fc.seed = zseed;

  Json j;
  j["config_hash"] = run.hash;
  j["seeds"] = seeds_json({{"seed", run.seed}, {"data", l.data_seed}, {"indicators", zseed}});
  j["model"] = model_to_json(l.model);
  j["policy"] = expr;
  j["selection"] = policy_to_json(spec.policy);
  std::vector<std::string> names;
  for (const auto& c : spec.components.components()) names.push_back(c.name);
  j["components"] = names;
  j["n"] = l.data.size();
  j["sigma2"] = fc.sigma2 ? Json(*fc.sigma2) : Json(nullptr);

  FitResult fr;
  Vector beta = spec.components.beta();
  if (run.auto_beta) {
    AutoBetaConfig ac;
    ac.constraints.groups = spec.term;
    AutoBetaResult ar = fit_auto_beta(l.model, l.data, spec.components, spec.policy, fc, ac);
    fr = ar.fit;
    beta = ar.beta;
    j["auto_beta"] = {{"rounds", ar.rounds}, {"converged", ar.converged}, {"j_before", ar.j_before},
                      {"j_after", ar.j_after}};
  } else {
    IndicatorMatrix z = draw_indicators(spec.policy, l.data.size(), zseed);
    fr = fit(l.model, l.data, spec.components, z, fc);
  }
  j["beta"] = vector_to_json(beta);
  j["fit"] = fit_to_json(l.model, fr);
  if (l.theta0) {
    j["theta0"] = vector_to_json(*l.theta0);
    j["error_sup"] = (fr.theta_hat - *l.theta0).cwiseAbs().maxCoeff();
    j["error_l2"] = (fr.theta_hat - *l.theta0).norm();
  }
  try {
    j["train_mean_loglik"] = mean_log_likelihood(l.model, fr.theta_hat, l.data);
  } catch (const InfeasibleError&) {
  }
  write_json(run.out / "fit.json", j);
  *run.log << "fit " << expr << (run.auto_beta ? " (auto beta)" : "") << ": converged=" << fr.converged
           << " iterations=" << fr.iterations << " |grad|=" << fr.gradient_norm << "\n";
  return 0;
}

std::string sweep_policy(int order, double alpha) {
  return num(alpha) + "PL" + std::to_string(order + 1) + "+" + num(1.0 - alpha) + "PL" + std::to_string(order);
}

int cmd_asymvar(const Run& run) {
  Model model = config_model(run);
  if (model.is_chain()) throw ContractError("asymvar needs a fixed-size model");
  Vector theta0 = config_theta(run.cfg.value("theta0", Json("alternating")), model);
  std::vector<std::string> policies = {"FL", "PL1", "0.7PL1+0.3PL2"};
  if (run.cfg.contains("policies")) policies = run.cfg.at("policies").get<std::vector<std::string>>();
  else if (run.cfg.contains("policy")) policies = {run.cfg.at("policy").get<std::string>()};

  Csv csv(run, {{"seed", run.seed}},
          {"policy", "eff", "eff_trace", "eff_selection", "eff_trace_selection", "trace", "log_det"},
          "eff = det(variance) / det(I^-1); *_selection uses the policy's E[Z_i Z_j]");
  Json reports = Json::array();
  auto add = [&](const std::string& expr) {
    PolicySpec spec = parse_policy(model, expr);
    ScoreCov cov = score_cov(model, theta0, spec.components);
    AsymReport rep = asymptotic_variance(cov, spec.policy, spec.components.beta());
    csv.row({expr, num(*rep.eff), num(*rep.eff_trace), num(*rep.eff_selection), num(*rep.eff_trace_selection),
             num(rep.trace), num(rep.log_det)});
    Json r = report_to_json(rep);
    r["policy"] = expr;
    reports.push_back(std::move(r));
    *run.log << expr << ": eff=" << num(*rep.eff) << " eff_trace=" << num(*rep.eff_trace) << "\n";
  };
  for (const auto& p : policies) add(p);
  if (run.cfg.contains("alpha_sweep") || run.cfg.contains("lambda_grid")) {
    const Json sw = run.cfg.value("alpha_sweep", Json::object());
    const auto orders = sw.value("orders", std::vector<int>{1, 2, 3});
    const auto alphas = grid(run, "lambda_grid", sw.value("alphas", std::vector<double>{0, 0.25, 0.5, 0.75, 1}));
    for (int l : orders)
      for (double a : alphas) add(sweep_policy(l, a));
  }
  Json j;
  j["config_hash"] = run.hash;
  j["seeds"] = seeds_json({{"seed", run.seed}});
  j["model"] = model_to_json(model);
  j["theta0"] = vector_to_json(theta0);
  j["reports"] = std::move(reports);
  write_json(run.out / "asymvar.json", j);
  write_text(run.out / "eff.csv", csv.str());
  return 0;
}

// ---------------------------------------------------------------------------

struct Point {
  double flops;
  double loss;
};

std::vector<bool> pareto_frontier(const std::vector<Point>& pts) {
  std::vector<bool> front(pts.size(), true);
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = 0; j < pts.size() && front[i]; ++j) {
      if (i == j) continue;
      const bool le = pts[j].flops <= pts[i].flops && pts[j].loss <= pts[i].loss;
      const bool lt = pts[j].flops < pts[i].flops || pts[j].loss < pts[i].loss;
      if (le && lt) front[i] = false;
    }
  return front;
}

int cmd_tradeoff(const Run& run) {
  Model model = config_model(run);
  if (model.is_chain()) throw ContractError("tradeoff needs a fixed-size model");
  Vector theta0 = config_theta(run.cfg.value("theta0", Json("alternating")), model);
  std::vector<std::vector<std::string>> families = {{"PL1", "PL2"}, {"PL1", "PL3"}, {"PL2", "PL3"}};
  if (run.cfg.contains("families")) families = run.cfg.at("families").get<std::vector<std::vector<std::string>>>();
  const auto lambdas = grid(run, "lambda_grid", {0.25, 0.5, 1.0});
  const auto betas = grid(run, "beta_grid", {0.5});
  const auto sigma2s = grid(run, "sigma2_grid", {std::numeric_limits<double>::infinity()});
  const int replicates = run.cfg.value("replicates", 1);
  const bool do_fit = run.cfg.value("fit_models", true);
  const Json data = run.cfg.value("data", Json::object());
  const std::size_t n = data.value("n", std::size_t{1000});
  FitConfig fc = config_fit(run);

  struct Row {
    std::vector<std::string> cells;
    Point point;
    bool ok;
  };
  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::uint64_t>> seeds = {{"seed", run.seed}};
  std::vector<Dataset> train(replicates), test(replicates);
  if (do_fit)
    for (int rep = 0; rep < replicates; ++rep) {
      const std::uint64_t s_train = derive_seed(run.seed, 1000 + rep), s_test = derive_seed(run.seed, 2000 + rep);
      train[rep] = make_synthetic(model, theta0, n, s_train).data;
      test[rep] = make_synthetic(model, theta0, n, s_test).data;
      seeds.emplace_back("train_" + std::to_string(rep), s_train);
      seeds.emplace_back("test_" + std::to_string(rep), s_test);
    }

  for (const auto& fam : families) {
    if (fam.size() != 2) throw ContractError("each tradeoff family needs two policy terms");
    const std::string fname = fam[0] + "+" + fam[1];
    const PolicySpec lo = parse_policy(model, fam[0]);
    const PolicySpec hi = parse_policy(model, fam[1]);
    const ComponentSet all = ComponentSet::concat(lo.components, hi.components);
    std::optional<ScoreCov> cov;
    std::string cov_error;
    try {
      cov = score_cov(model, theta0, all);
    } catch (const Error& e) {
      cov_error = e.what();
    }
    for (double l1 : lambdas)
      for (double l2 : lambdas)
        for (double b : betas)
          for (double s2 : sigma2s)
            for (int rep = 0; rep < (do_fit ? replicates : 1); ++rep) {
              const std::string pid = num(l1) + "*" + num(b) + fam[0] + "+" + num(l2) + "*" + num(1.0 - b) + fam[1];
              std::vector<std::string> cells = {fname, pid, num(l1), num(l2), num(b), num(s2), std::to_string(rep)};
              try {
                Vector lambda(all.size()), beta(all.size());
                for (int j = 0; j < all.size(); ++j) {
                  const bool first = j < lo.components.size();
                  lambda[j] = first ? l1 : l2;
                  beta[j] = first ? b : 1.0 - b;
                }
                const SelectionPolicy policy = SelectionPolicy::independence(lambda);
                const ComponentSet comps = all.with_beta(beta);
                double eff = std::numeric_limits<double>::quiet_NaN(), eff_tr = eff;
                if (cov) {
                  AsymReport rep_a = asymptotic_variance(*cov, policy, beta);
                  eff = *rep_a.eff;
                  eff_tr = *rep_a.eff_trace;
                }
                const double expected = expected_flops(model, comps, policy, n);
                double train_nll = std::numeric_limits<double>::quiet_NaN(), test_nll = train_nll;
                double realized = train_nll;
                if (do_fit) {
                  FitConfig f = fc;
                  f.sigma2 = finite_or_none(s2);
                  const IndicatorMatrix z = draw_indicators(policy, n, derive_seed(run.seed, 3000 + rep));
                  FitResult fr = fit(model, train[rep], comps, z, f);
                  train_nll = -mean_log_likelihood(model, fr.theta_hat, train[rep]);
                  test_nll = -mean_log_likelihood(model, fr.theta_hat, test[rep]);
                  realized = static_cast<double>(fr.ledger.objective_total);
                }
                cells.insert(cells.end(), {num(train_nll), num(test_nll), num(eff), num(eff_tr), num(expected),
                                           num(realized)});
                rows.push_back({cells, {expected, cov ? eff : test_nll}, true});
              } catch (const Error& e) {
                std::string msg = e.what();
                for (char& c : msg)
                  if (c == ',' || c == '\n') c = ';';
                cells.insert(cells.end(), {"nan", "nan", "nan", "nan", "nan", "nan"});
                rows.push_back({cells, {0, 0}, false});
                rows.back().cells.push_back("");
                rows.back().cells.push_back("");
                rows.back().cells.push_back(msg + (cov_error.empty() ? "" : " / " + cov_error));
              }
            }
  }
  // Frontier within each family, and across all rows.
  std::vector<bool> flag(rows.size(), false), global(rows.size(), false);
  auto mark = [&](const std::function<bool(const Row&)>& keep, std::vector<bool>& out) {
    std::vector<Point> pts;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (rows[i].ok && keep(rows[i])) {
        pts.push_back(rows[i].point);
        idx.push_back(i);
      }
    const auto front = pareto_frontier(pts);
    for (std::size_t i = 0; i < idx.size(); ++i) out[idx[i]] = front[i];
  };
  for (const auto& fam : families) {
    const std::string fname = fam[0] + "+" + fam[1];
    mark([&](const Row& r) { return r.cells[0] == fname; }, flag);
  }
  mark([](const Row&) { return true; }, global);

  Csv csv(run, seeds,
          {"family", "policy", "lambda_low", "lambda_high", "beta", "sigma2", "replicate", "train_nll", "test_nll",
           "eff", "eff_trace", "expected_flops", "realized_flops", "frontier", "global_frontier", "error"},
          "nll = negative mean log-likelihood per sample (natural log); frontier over (expected_flops, eff) "
          "within the family, global_frontier over all rows; test_nll replaces eff when it is unavailable");
  std::size_t nf = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto cells = rows[i].cells;
    if (rows[i].ok) {
      cells.push_back(flag[i] ? "1" : "0");
      cells.push_back(global[i] ? "1" : "0");
      cells.push_back("");
      nf += flag[i];
    }
    csv.row(cells);
  }
  write_text(run.out / "tradeoff.csv", csv.str());
  *run.log << rows.size() << " rows, " << nf << " on the frontier\n";
  return 0;
}

// ---------------------------------------------------------------------------

std::vector<TokenSequence> subsample(std::vector<TokenSequence> s, std::size_t k, std::uint64_t seed) {
  if (k >= s.size()) return s;
  Rng rng(seed);
  for (std::size_t i = 0; i < k; ++i) std::swap(s[i], s[i + rng.below(s.size() - i)]);
  s.resize(k);
  return s;
}

int cmd_chunk(const Run& run) {
  const Json c = run.cfg.value("conll", Json::object());
  const std::string train_path = c.value("train", std::string("data/conll2000/train.txt"));
  const std::string test_path = c.value("test", std::string("data/conll2000/test.txt"));
  if (!fs::exists(train_path) || !fs::exists(test_path)) {
    *run.log << "CoNLL-2000 corpus not found (" << train_path << ", " << test_path << "); chunk run skipped\n";
    return 0;
  }
  const auto train_all = parse_conll(train_path);
  const auto test_all = parse_conll(test_path);
  const std::size_t k = c.value("train_sentences", std::size_t{100});
  const std::uint64_t sub_seed = derive_seed(run.seed, 10);
  auto train_seq = subsample(train_all, k, sub_seed);
  auto test_seq = test_all;
  if (c.contains("test_sentences")) test_seq = subsample(test_all, c.at("test_sentences").get<std::size_t>(), derive_seed(run.seed, 11));
  const FeatureSpec spec = FeatureSpec::build(train_seq);

  std::vector<std::string> kinds = {"boltzmann_chain", "linear_chain_crf"};
  if (run.cfg.contains("models")) kinds = run.cfg.at("models").get<std::vector<std::string>>();
  std::vector<std::vector<std::string>> families = {{"PL1", "FL"}, {"PL1", "PL2"}};
  if (run.cfg.contains("families")) families = run.cfg.at("families").get<std::vector<std::vector<std::string>>>();
  const auto lambdas = grid(run, "lambda_grid", {0.0, 0.2, 0.5, 1.0});
  const auto betas = grid(run, "beta_grid", {1.0});
  const auto sigma2s = grid(run, "sigma2_grid", {1.0, 10.0, 100.0});
  FitConfig fc = config_fit(run);
  const std::uint64_t zseed = derive_seed(run.seed, 12);

  Csv csv(run, {{"seed", run.seed}, {"train_subsample", sub_seed}, {"indicators", zseed}},
          {"model", "family", "lambda", "beta", "sigma2", "mode", "train_perplexity", "test_perplexity",
           "expected_flops", "realized_flops", "converged"},
          "perplexity = negative mean log-likelihood per sequence (natural log); train tokens=" +
              std::to_string(token_count(train_seq)) + " test tokens=" + std::to_string(token_count(test_seq)));
  for (const auto& kind : kinds) {
    Model model = Model::boltzmann_machine(2);
    Dataset train, test;
    if (kind == "boltzmann_chain") {
      model = Model::boltzmann_chain(static_cast<int>(chunk_labels().size()), spec.num_word_symbols());
      train = chain_samples(train_seq, spec);
      test = chain_samples(test_seq, spec);
    } else if (kind == "linear_chain_crf") {
      train = extract_features(train_seq, spec);
      test = extract_features(test_seq, spec);
      model = Model::linear_chain_crf(static_cast<int>(chunk_labels().size()), spec.num_features(),
                                      supported_pairs(train));
    } else {
      throw ContractError("config field 'models': unknown chunking model '" + kind + "'");
    }
    for (const auto& fam : families) {
      const ComponentSet lo = parse_policy(model, fam[0]).components;
      const ComponentSet hi = parse_policy(model, fam[1]).components;
      for (double lam : lambdas)
        for (double s2 : sigma2s) {
          FitConfig f = fc;
          f.sigma2 = finite_or_none(s2);
          auto emit = [&](const ComponentSet& comps, const SelectionPolicy& policy, const std::string& mode,
                          const FitResult& fr, double beta) {
            const double tr = -mean_log_likelihood(model, fr.theta_hat, train);
            const double te = -mean_log_likelihood(model, fr.theta_hat, test);
            csv.row({kind, fam[0] + "/" + fam[1], num(lam), num(beta), num(s2), mode, num(tr), num(te),
                     num(expected_flops(model, train, comps, policy)), num(double(fr.ledger.objective_total)),
                     fr.converged ? "1" : "0"});
            *run.log << kind << " " << fam[0] << "/" << fam[1] << " lambda=" << num(lam) << " beta=" << num(beta)
                     << " sigma2=" << num(s2) << " " << mode << ": train=" << num(tr) << " test=" << num(te) << "\n";
          };
          if (lam == 0.0) {
            const SelectionPolicy policy = SelectionPolicy::always(1);
            const IndicatorMatrix z = draw_indicators(policy, train.size(), zseed);
            emit(lo, policy, "grid", fit(model, train, lo, z, f), 1.0);
            continue;
          }
          const ComponentSet base = ComponentSet::concat(lo, hi);
          const SelectionPolicy policy = SelectionPolicy::independence((Vector(2) << 1.0, lam).finished());
          for (double b : betas) {
            const ComponentSet comps = base.with_beta((Vector(2) << 1.0, b).finished());
            const IndicatorMatrix z = draw_indicators(policy, train.size(), zseed);
            emit(comps, policy, "grid", fit(model, train, comps, z, f), b);
          }
          if (run.auto_beta) {
            f.seed = zseed;
            AutoBetaResult ar = fit_auto_beta(model, train, base, policy, f);
            emit(base.with_beta(ar.beta), policy, "auto", ar.fit, ar.beta[1] / ar.beta[0]);
          }
        }
    }
  }
  write_text(run.out / "chunk.csv", csv.str());
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic composite likelihood experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir = "out", policy, lambda_grid, beta_grid, sigma2_grid;
  std::optional<std::uint64_t> seed;
  std::optional<int> replicates;
  bool auto_beta = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "experiment config (JSON)");
    sub->add_option("--seed", seed, "master seed");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_flag("--auto-beta", auto_beta, "select beta by alternating optimization");
    sub->add_option("--policy", policy, "policy expression, e.g. 0.7PL1+0.3PL2");
    sub->add_option("--lambda-grid", lambda_grid, "comma-separated selection probabilities");
    sub->add_option("--beta-grid", beta_grid, "comma-separated component weights");
    sub->add_option("--sigma2-grid", sigma2_grid, "comma-separated regularizer variances (inf = none)");
    sub->add_option("--replicates", replicates, "replicate count");
  };
  std::map<std::string, int (*)(const Run&)> commands = {
      {"sample", cmd_sample}, {"fit", cmd_fit}, {"asymvar", cmd_asymvar}, {"tradeoff", cmd_tradeoff},
      {"chunk", cmd_chunk}};
  std::map<std::string, CLI::App*> subs;
  subs["sample"] = app.add_subcommand("sample", "generate a synthetic dataset");
  subs["fit"] = app.add_subcommand("fit", "fit an SCL estimator");
  subs["asymvar"] = app.add_subcommand("asymvar", "exact asymptotic variance and efficiency");
  subs["tradeoff"] = app.add_subcommand("tradeoff", "computation/accuracy grid with Pareto flags");
  subs["chunk"] = app.add_subcommand("chunk", "CoNLL-2000 chunking perplexity grid");
  for (auto& [name, sub] : subs) common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }
  try {
    Run run;
    run.log = &out;
    run.auto_beta = auto_beta;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ContractError("cannot open config '" + config_path + "'");
      try {
        run.cfg = Json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw ContractError("config '" + config_path + "' is not valid JSON: " + e.what());
      }
    } else {
      run.cfg = Json::object();
    }
    auto to_json_grid = [](const std::string& s, const char* flag) {
      Json j = Json::array();
      for (double v : parse_grid(s, flag)) j.push_back(std::isinf(v) ? Json("inf") : Json(v));
      return j;
    };
    if (seed) run.cfg["seed"] = *seed;
    if (!policy.empty()) run.cfg["policy"] = policy;
    if (!lambda_grid.empty()) run.cfg["lambda_grid"] = to_json_grid(lambda_grid, "--lambda-grid");
    if (!beta_grid.empty()) run.cfg["beta_grid"] = to_json_grid(beta_grid, "--beta-grid");
    if (!sigma2_grid.empty()) run.cfg["sigma2_grid"] = to_json_grid(sigma2_grid, "--sigma2-grid");
    if (replicates) run.cfg["replicates"] = *replicates;
    if (auto_beta) run.cfg["auto_beta"] = true;
    run.seed = run.cfg.value("seed", std::uint64_t{0});
    run.auto_beta = run.cfg.value("auto_beta", false);
    run.hash = fnv1a_hex(run.cfg.dump());
    run.out = out_dir;
    fs::create_directories(run.out);
    for (auto& [name, sub] : subs)
      if (sub->parsed()) return commands.at(name)(run);
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace scl
