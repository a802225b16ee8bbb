#include "scl/components.hpp"

#include <cctype>
#include <functional>

namespace scl {

ComponentSet::ComponentSet(std::vector<Component> components, Vector beta)
    : components_(std::move(components)), beta_(std::move(beta)) {
  if (beta_.size() != static_cast<Eigen::Index>(components_.size()))
    throw DimensionError("beta has " + std::to_string(beta_.size()) + " entries for " +
                         std::to_string(components_.size()) + " components");
  for (Eigen::Index j = 0; j < beta_.size(); ++j)
    if (!(beta_[j] > 0.0)) throw ContractError("beta[" + std::to_string(j) + "] must be positive");
}

namespace {

std::string set_name(const std::vector<int>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s + "}";
}

Component chain_template(int order) {
  Component c;
  c.kind = Component::Kind::chain_template;
  c.order = order;
  c.name = order == 0 ? "FL" : "PL" + std::to_string(order);
  return c;
}

}  // namespace

ComponentSet ComponentSet::full_likelihood(const Model& model) {
  if (model.is_chain()) return ComponentSet({chain_template(0)}, Vector::Ones(1));
  Component c;
  for (int v = 0; v < model.num_vars(); ++v) c.pair.A.push_back(v);
  c.name = "FL";
  return ComponentSet({c}, Vector::Ones(1));
}

ComponentSet ComponentSet::pseudo_likelihood(const Model& model, int order) {
  if (order < 1) throw ContractError("pseudo-likelihood order must be >= 1");
  if (model.is_chain()) return ComponentSet({chain_template(order)}, Vector::Ones(1));
  const int m = model.num_vars();
  if (order > m) throw ContractError("pseudo-likelihood order exceeds the number of variables");
  std::vector<Component> comps;
  std::vector<int> a;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(a.size()) == order) {
      Component c;
      c.pair.A = a;
      std::vector<char> in(m, 0);
      for (int v : a) in[v] = 1;
      for (int v = 0; v < m; ++v)
        if (!in[v]) c.pair.B.push_back(v);
      c.name = "PL" + std::to_string(order) + set_name(a);
      comps.push_back(std::move(c));
      return;
    }
    for (int v = start; v < m; ++v) {
      a.push_back(v);
      rec(v + 1);
      a.pop_back();
    }
  };
  rec(0);
  const auto k = static_cast<Eigen::Index>(comps.size());
  return ComponentSet(std::move(comps), Vector::Ones(k));
}

ComponentSet ComponentSet::custom(const Model& model, std::vector<MPair> pairs) {
  if (model.is_chain()) throw ContractError("chain models take window templates, not explicit pairs");
  std::vector<Component> comps;
  for (auto& p : pairs) {
    validate_pair(p, model.num_vars());
    Component c;
    c.name = set_name(p.A) + "|" + set_name(p.B);
    c.pair = std::move(p);
    comps.push_back(std::move(c));
  }
  const auto k = static_cast<Eigen::Index>(comps.size());
  return ComponentSet(std::move(comps), Vector::Ones(k));
}

ComponentSet ComponentSet::concat(const ComponentSet& a, const ComponentSet& b) {
  std::vector<Component> comps = a.components_;
  comps.insert(comps.end(), b.components_.begin(), b.components_.end());
  Vector beta(a.size() + b.size());
  beta << a.beta_, b.beta_;
  return ComponentSet(std::move(comps), std::move(beta));
}

ComponentSet ComponentSet::with_beta(Vector beta) const { return ComponentSet(components_, std::move(beta)); }

void ComponentSet::validate(const Model& model) const {
  for (const auto& c : components_) {
    if (model.is_chain()) {
      if (c.kind != Component::Kind::chain_template) throw ContractError("chain model needs template components");
      if (c.order < 0) throw ContractError("window order must be >= 0");
    } else {
      if (c.kind != Component::Kind::pair) throw ContractError("fixed-size model needs m-pair components");
      validate_pair(c.pair, model.num_vars());
    }
  }
}

PolicySpec drop_unselected(const ComponentSet& comps, const SelectionPolicy& policy) {
  const int k = comps.size();
  if (policy.size() != k) throw DimensionError("policy and component set sizes differ");
  std::vector<int> keep, remap(k, -1);
  for (int j = 0; j < k; ++j)
    if (policy.lambda[j] != 0.0) {
      remap[j] = static_cast<int>(keep.size());
      keep.push_back(j);
    }
  if (keep.empty()) throw ContractError("every component has lambda = 0");
  std::vector<Component> c;
  Vector beta(keep.size()), lambda(keep.size());
  for (std::size_t i = 0; i < keep.size(); ++i) {
    c.push_back(comps[keep[i]]);
    beta[i] = comps.beta()[keep[i]];
    lambda[i] = policy.lambda[keep[i]];
  }
  SelectionPolicy p{policy.family, lambda, {}};
  for (const auto& b : policy.blocks) {
    std::vector<int> nb;
    for (int j : b)
      if (remap[j] >= 0) nb.push_back(remap[j]);
    if (!nb.empty()) p.blocks.push_back(std::move(nb));
  }
  p.validate();
  std::vector<int> term(keep.size(), 0);
  return {ComponentSet(std::move(c), std::move(beta)), std::move(p), std::move(term)};
}

PolicySpec parse_policy(const Model& model, const std::string& expr) {
  std::vector<std::string> terms;
  std::string cur;
  for (char ch : expr) {
    if (std::isspace(static_cast<unsigned char>(ch))) continue;
    if (ch == '+') {
      terms.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  terms.push_back(cur);

  ComponentSet all;
  std::vector<double> lambda;
  std::vector<int> term_of;
  for (std::size_t t = 0; t < terms.size(); ++t) {
    const std::string& s = terms[t];
    std::size_t pos = 0;
    while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) || s[pos] == '.' || s[pos] == 'e' ||
                              s[pos] == '-'))
      ++pos;
    double w = 1.0;
    if (pos > 0) {
      try {
        w = std::stod(s.substr(0, pos));
      } catch (const std::exception&) {
        throw ContractError("bad coefficient in policy term '" + s + "'");
      }
    }
    const std::string name = s.substr(pos);
    ComponentSet part;
    if (name == "FL") {
      part = ComponentSet::full_likelihood(model);
    } else if (name.size() > 2 && name.compare(0, 2, "PL") == 0) {
      int order = 0;
      try {
        order = std::stoi(name.substr(2));
      } catch (const std::exception&) {
        throw ContractError("bad pseudo-likelihood order in policy term '" + s + "'");
      }
      part = ComponentSet::pseudo_likelihood(model, order);
    } else {
      throw ContractError("unknown policy term '" + s + "' (expected FL or PL<order>)");
    }
    if (w < 0.0 || w > 1.0) throw ContractError("selection probability in '" + s + "' is outside [0, 1]");
    all = all.size() ? ComponentSet::concat(all, part) : part;
    for (int j = 0; j < part.size(); ++j) {
      lambda.push_back(w);
      term_of.push_back(static_cast<int>(t));
    }
  }
  SelectionPolicy raw{PolicyFamily::independence, Eigen::Map<Vector>(lambda.data(), lambda.size()), {}};
  PolicySpec spec = drop_unselected(all, raw);
  spec.term.clear();
  for (std::size_t j = 0; j < lambda.size(); ++j)
    if (lambda[j] != 0.0) spec.term.push_back(term_of[j]);
  return spec;
}

}  // namespace scl
