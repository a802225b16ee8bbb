#include "scl/model.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <unordered_map>

namespace scl {

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::generic: return "generic";
    case ModelKind::boltzmann_machine: return "boltzmann_machine";
    case ModelKind::boltzmann_chain: return "boltzmann_chain";
    case ModelKind::linear_chain_crf: return "linear_chain_crf";
  }
  return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
  if (name == "generic") return ModelKind::generic;
  if (name == "boltzmann_machine") return ModelKind::boltzmann_machine;
  if (name == "boltzmann_chain") return ModelKind::boltzmann_chain;
  if (name == "linear_chain_crf") return ModelKind::linear_chain_crf;
  throw ContractError("unknown model kind '" + name + "'");
}

// ---------------------------------------------------------------------------
// FeatureTable

FeatureTable::FeatureTable(std::vector<int> cards) : cards_(std::move(cards)), num_configs_(1) {
  for (int c : cards_) {
    if (c < 1) throw DimensionError("feature table cardinality must be positive");
    num_configs_ *= static_cast<std::size_t>(c);
  }
  staging_.resize(num_configs_);
}

void FeatureTable::add(std::size_t config, int param, double value) {
  if (config >= num_configs_) throw DimensionError("feature table config out of range");
  staging_[config].emplace_back(param, value);
}

void FeatureTable::finalize() {
  begin_.assign(num_configs_ + 1, 0);
  params_.clear();
  values_.clear();
  for (std::size_t c = 0; c < num_configs_; ++c) {
    begin_[c] = static_cast<std::uint32_t>(params_.size());
    for (auto [p, v] : staging_[c]) {
      params_.push_back(p);
      values_.push_back(v);
    }
  }
  begin_[num_configs_] = static_cast<std::uint32_t>(params_.size());
  staging_.clear();
  staging_.shrink_to_fit();
}

// ---------------------------------------------------------------------------
// FactorGraph

FactorGraph::FactorGraph(std::vector<int> cards, std::vector<Factor> factors, int num_params)
    : cards_(std::move(cards)), factors_(std::move(factors)), num_params_(num_params) {
  var_factors_.resize(cards_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    if (fac.table->cards().size() != fac.scope.size()) throw DimensionError("factor scope/table mismatch");
    for (std::size_t i = 0; i < fac.scope.size(); ++i) {
      int v = fac.scope[i];
      if (v < 0 || v >= num_vars()) throw DimensionError("factor scope variable out of range");
      if (fac.table->cards()[i] != cards_[v]) throw DimensionError("factor table cardinality mismatch");
      var_factors_[v].push_back(static_cast<int>(f));
    }
  }
}

std::size_t FactorGraph::config_of(const Factor& f, std::span<const int> values) const {
  std::size_t c = 0;
  for (int v : f.scope) c = c * static_cast<std::size_t>(cards_[v]) + static_cast<std::size_t>(values[v]);
  return c;
}

double FactorGraph::score(const Vector& theta, std::span<const int> values) const {
  double s = 0.0;
  for (const auto& f : factors_) s += f.table->log_potential(config_of(f, values), theta);
  return s;
}

void FactorGraph::add_stats(std::span<const int> values, double weight, Vector& out) const {
  for (const auto& f : factors_) f.table->add_features(config_of(f, values), weight, out);
}

std::uint64_t FactorGraph::state_space_size() const {
  std::uint64_t n = 1;
  for (int c : cards_) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(c))
      return std::numeric_limits<std::uint64_t>::max();
    n *= static_cast<std::uint64_t>(c);
  }
  return n;
}

// ---------------------------------------------------------------------------
// Model

struct Model::Impl {
  ModelKind kind{};
  int num_params = 0;

  // fixed-size
  std::vector<int> cards;
  std::vector<std::vector<int>> cliques;
  CliqueFeature clique_feature = CliqueFeature::product;
  std::shared_ptr<const FactorGraph> fixed_graph;

  // chains
  int states = 0;
  int symbols = 0;  // Boltzmann chain symbols or CRF observation features
  std::vector<std::pair<int, int>> supported;
  std::vector<std::vector<std::pair<int, int>>> by_feature;
  std::unordered_map<long long, int> emission_index;
  std::shared_ptr<const FeatureTable> start_table, transition_table, emission_table;

  mutable std::mutex cache_mutex;
  mutable std::map<int, std::shared_ptr<const FactorGraph>> chain_graphs;

  int emission_offset() const { return states + states * states; }
};

namespace {

std::shared_ptr<const FeatureTable> make_start_table(int S) {
  auto t = std::make_shared<FeatureTable>(std::vector<int>{S});
  for (int s = 0; s < S; ++s) t->add(s, s, 1.0);
  t->finalize();
  return t;
}

std::shared_ptr<const FeatureTable> make_transition_table(int S) {
  auto t = std::make_shared<FeatureTable>(std::vector<int>{S, S});
  for (int a = 0; a < S; ++a)
    for (int b = 0; b < S; ++b) t->add(static_cast<std::size_t>(a) * S + b, S + a * S + b, 1.0);
  t->finalize();
  return t;
}

}  // namespace

Model Model::boltzmann_machine(int m) {
  if (m < 2) throw ContractError("Boltzmann machine needs m >= 2");
  std::vector<std::vector<int>> cliques;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) cliques.push_back({i, j});
  Model model = generic(std::vector<int>(m, 2), std::move(cliques), CliqueFeature::product);
  auto impl = std::const_pointer_cast<Impl>(model.impl_);
  impl->kind = ModelKind::boltzmann_machine;
  return model;
}

Model Model::generic(std::vector<int> cards, std::vector<std::vector<int>> cliques, CliqueFeature feature) {
  const int m = static_cast<int>(cards.size());
  if (m < 1) throw ContractError("model needs at least one variable");
  for (int c : cards)
    if (c < 2) throw ContractError("every cardinality must be >= 2");
  std::set<std::vector<int>> seen;
  for (const auto& c : cliques) {
    if (c.empty()) throw ContractError("empty clique");
    std::vector<int> sorted = c;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
      throw ContractError("clique repeats a variable");
    for (int v : sorted)
      if (v < 0 || v >= m) throw ContractError("clique index " + std::to_string(v) + " out of range");
    if (!seen.insert(sorted).second) throw ContractError("duplicate clique");
  }

  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::generic;
  impl->cards = cards;
  impl->cliques = cliques;
  impl->clique_feature = feature;

  std::vector<Factor> factors;
  int next = 0;
  for (const auto& c : cliques) {
    std::vector<int> fc;
    for (int v : c) fc.push_back(cards[v]);
    auto table = std::make_shared<FeatureTable>(fc);
    if (feature == CliqueFeature::product) {
      for (std::size_t cfg = 0; cfg < table->num_configs(); ++cfg) {
        std::size_t rest = cfg;
        double prod = 1.0;
        for (int i = static_cast<int>(fc.size()) - 1; i >= 0; --i) {
          prod *= static_cast<double>(rest % fc[i]);
          rest /= fc[i];
        }
        if (prod != 0.0) table->add(cfg, next, prod);
      }
      ++next;
    } else {
      for (std::size_t cfg = 1; cfg < table->num_configs(); ++cfg) table->add(cfg, next++, 1.0);
    }
    table->finalize();
    factors.push_back({c, std::move(table)});
  }
  impl->num_params = next;
  impl->fixed_graph = std::make_shared<FactorGraph>(cards, std::move(factors), next);
  return Model(impl);
}

Model Model::boltzmann_chain(int states, int symbols) {
  if (states < 1 || symbols < 1) throw ContractError("Boltzmann chain needs >= 1 state and symbol");
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::boltzmann_chain;
  impl->states = states;
  impl->symbols = symbols;
  impl->num_params = states + states * states + states * symbols;
  impl->start_table = make_start_table(states);
  impl->transition_table = make_transition_table(states);
  auto em = std::make_shared<FeatureTable>(std::vector<int>{states, symbols});
  for (int s = 0; s < states; ++s)
    for (int v = 0; v < symbols; ++v)
      em->add(static_cast<std::size_t>(s) * symbols + v, impl->emission_offset() + s * symbols + v, 1.0);
  em->finalize();
  impl->emission_table = em;
  return Model(impl);
}

Model Model::linear_chain_crf(int states, int num_obs_features, std::vector<std::pair<int, int>> supported_pairs) {
  if (states < 1) throw ContractError("CRF needs >= 1 state");
  if (num_obs_features < 1) throw ContractError("CRF needs >= 1 observation feature");
  std::sort(supported_pairs.begin(), supported_pairs.end());
  supported_pairs.erase(std::unique(supported_pairs.begin(), supported_pairs.end()), supported_pairs.end());
  auto impl = std::make_shared<Impl>();
  impl->kind = ModelKind::linear_chain_crf;
  impl->states = states;
  impl->symbols = num_obs_features;
  impl->supported = supported_pairs;
  impl->by_feature.resize(num_obs_features);
  int p = impl->emission_offset();
  for (auto [s, k] : supported_pairs) {
    if (s < 0 || s >= states || k < 0 || k >= num_obs_features)
      throw ContractError("supported (state, feature) pair out of range");
    impl->emission_index[static_cast<long long>(s) * num_obs_features + k] = p;
    impl->by_feature[k].emplace_back(s, p);
    ++p;
  }
  impl->num_params = p;
  impl->start_table = make_start_table(states);
  impl->transition_table = make_transition_table(states);
  return Model(impl);
}

ModelKind Model::kind() const { return impl_->kind; }
int Model::num_params() const { return impl_->num_params; }
bool Model::is_chain() const {
  return impl_->kind == ModelKind::boltzmann_chain || impl_->kind == ModelKind::linear_chain_crf;
}

int Model::num_vars() const {
  if (is_chain()) throw ContractError("chain models have per-sample size");
  return static_cast<int>(impl_->cards.size());
}
const std::vector<int>& Model::cardinalities() const {
  if (is_chain()) throw ContractError("chain models have per-sample size");
  return impl_->cards;
}
const std::vector<std::vector<int>>& Model::cliques() const { return impl_->cliques; }
CliqueFeature Model::clique_feature() const { return impl_->clique_feature; }

std::shared_ptr<const FactorGraph> Model::graph() const {
  if (is_chain()) throw ContractError("chain models need a sample to fix their shape");
  return impl_->fixed_graph;
}

std::shared_ptr<const FactorGraph> Model::graph(const Sample& sample) const {
  if (!is_chain()) return impl_->fixed_graph;
  const int T = sequence_length(sample);
  const int S = impl_->states;
  if (impl_->kind == ModelKind::boltzmann_chain) {
    std::lock_guard lock(impl_->cache_mutex);
    auto it = impl_->chain_graphs.find(T);
    if (it != impl_->chain_graphs.end()) return it->second;
    std::vector<int> cards(2 * T, S);
    for (int t = 0; t < T; ++t) cards[T + t] = impl_->symbols;
    std::vector<Factor> factors;
    factors.push_back({{0}, impl_->start_table});
    for (int t = 1; t < T; ++t) factors.push_back({{t - 1, t}, impl_->transition_table});
    for (int t = 0; t < T; ++t) factors.push_back({{t, T + t}, impl_->emission_table});
    auto g = std::make_shared<const FactorGraph>(std::move(cards), std::move(factors), impl_->num_params);
    impl_->chain_graphs.emplace(T, g);
    return g;
  }
  std::vector<Factor> factors;
  factors.push_back({{0}, impl_->start_table});
  for (int t = 1; t < T; ++t) factors.push_back({{t - 1, t}, impl_->transition_table});
  for (int t = 0; t < T; ++t) {
    auto em = std::make_shared<FeatureTable>(std::vector<int>{S});
    for (int k : sample.observed[t])
      for (auto [s, p] : impl_->by_feature[k]) em->add(s, p, 1.0);
    em->finalize();
    factors.push_back({{t}, std::move(em)});
  }
  return std::make_shared<const FactorGraph>(std::vector<int>(T, S), std::move(factors), impl_->num_params);
}

int Model::states() const { return impl_->states; }
int Model::symbols() const { return impl_->symbols; }
int Model::num_obs_features() const { return impl_->symbols; }
int Model::start_param(int s) const { return s; }
int Model::transition_param(int a, int b) const { return impl_->states + a * impl_->states + b; }

int Model::emission_param(int s, int v) const {
  if (impl_->kind == ModelKind::boltzmann_chain) return impl_->emission_offset() + s * impl_->symbols + v;
  auto it = impl_->emission_index.find(static_cast<long long>(s) * impl_->symbols + v);
  return it == impl_->emission_index.end() ? -1 : it->second;
}

const std::vector<std::pair<int, int>>& Model::emission_by_feature(int feature) const {
  return impl_->by_feature.at(feature);
}
const std::vector<std::pair<int, int>>& Model::supported_pairs() const { return impl_->supported; }

int Model::sequence_length(const Sample& sample) const {
  switch (impl_->kind) {
    case ModelKind::boltzmann_chain: return static_cast<int>(sample.values.size() / 2);
    case ModelKind::linear_chain_crf: return static_cast<int>(sample.values.size());
    default: return static_cast<int>(sample.values.size());
  }
}

void Model::validate(const Sample& sample) const {
  const auto& v = sample.values;
  switch (impl_->kind) {
    case ModelKind::generic:
    case ModelKind::boltzmann_machine: {
      if (v.size() != impl_->cards.size())
        throw DimensionError("assignment has " + std::to_string(v.size()) + " values, model has " +
                             std::to_string(impl_->cards.size()) + " variables");
      for (std::size_t i = 0; i < v.size(); ++i)
        if (v[i] < 0 || v[i] >= impl_->cards[i])
          throw DimensionError("value " + std::to_string(v[i]) + " out of range for variable " + std::to_string(i));
      return;
    }
    case ModelKind::boltzmann_chain: {
      if (v.empty() || v.size() % 2 != 0) throw DimensionError("Boltzmann chain sample must hold (y, x) pairs");
      const std::size_t T = v.size() / 2;
      for (std::size_t t = 0; t < T; ++t) {
        if (v[t] < 0 || v[t] >= impl_->states) throw DimensionError("label out of range");
        if (v[T + t] < 0 || v[T + t] >= impl_->symbols) throw DimensionError("symbol out of range");
      }
      return;
    }
    case ModelKind::linear_chain_crf: {
      if (v.empty() || sample.observed.size() != v.size())
        throw DimensionError("CRF sample needs one observation per label");
      for (std::size_t t = 0; t < v.size(); ++t) {
        if (v[t] < 0 || v[t] >= impl_->states) throw DimensionError("label out of range");
        for (int k : sample.observed[t])
          if (k < 0 || k >= impl_->symbols) throw DimensionError("observation feature out of range");
      }
      return;
    }
  }
}

void Model::validate_theta(const Vector& theta) const {
  if (theta.size() != impl_->num_params)
    throw DimensionError("theta has length " + std::to_string(theta.size()) + ", model has " +
                         std::to_string(impl_->num_params) + " parameters");
}

std::string Model::param_name(int p) const {
  if (p < 0 || p >= impl_->num_params) throw DimensionError("parameter index out of range");
  if (!is_chain()) {
    int q = p;
    for (const auto& c : impl_->cliques) {
      std::size_t n = impl_->clique_feature == CliqueFeature::product ? 1 : 0;
      if (impl_->clique_feature == CliqueFeature::indicator) {
        n = 1;
        for (int v : c) n *= impl_->cards[v];
        n -= 1;
      }
      if (q < static_cast<int>(n)) {
        std::string name = "theta";
        for (int v : c) name += "_" + std::to_string(v);
        if (impl_->clique_feature == CliqueFeature::indicator) name += "#" + std::to_string(q + 1);
        return name;
      }
      q -= static_cast<int>(n);
    }
  }
  const int S = impl_->states;
  if (p < S) return "start[" + std::to_string(p) + "]";
  if (p < S + S * S) return "A[" + std::to_string((p - S) / S) + "," + std::to_string((p - S) % S) + "]";
  if (impl_->kind == ModelKind::boltzmann_chain) {
    int e = p - impl_->emission_offset();
    return "B[" + std::to_string(e / impl_->symbols) + "," + std::to_string(e % impl_->symbols) + "]";
  }
  auto [s, k] = impl_->supported[p - impl_->emission_offset()];
  return "B[" + std::to_string(s) + ",f" + std::to_string(k) + "]";
}

void validate_pair(const MPair& pair, int num_vars) {
  if (pair.A.empty()) throw ContractError("m-pair needs a non-empty A");
  std::vector<char> seen(num_vars, 0);
  for (int v : pair.A) {
    if (v < 0 || v >= num_vars) throw ContractError("m-pair index out of range");
    if (seen[v]) throw ContractError("m-pair repeats a variable");
    seen[v] = 1;
  }
  for (int v : pair.B) {
    if (v < 0 || v >= num_vars) throw ContractError("m-pair index out of range");
    if (seen[v]) throw ContractError("m-pair sets A and B must be disjoint");
    seen[v] = 2;
  }
}

}  // namespace scl
