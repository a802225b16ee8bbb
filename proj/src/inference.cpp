#include "scl/inference.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

namespace scl {

std::uint64_t enumeration_cap() {
  constexpr std::uint64_t kDefault = std::uint64_t{1} << 25;
  const char* env = std::getenv("SCL_ENUM_CAP");
  if (!env || !*env) return kDefault;
  try {
    return std::stoull(env);
  } catch (const std::exception&) {
    return kDefault;
  }
}

double log_sum_exp(const double* v, std::size_t n) {
  double mx = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, v[i]);
  if (!std::isfinite(mx)) return mx;
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::exp(v[i] - mx);
  return mx + std::log(s);
}

namespace {

// Mixed-radix counter over a subset of variables, first variable fastest.
class Odometer {
 public:
  Odometer(const std::vector<int>& vars, const std::vector<int>& cards, std::vector<int>& values)
      : vars_(vars), cards_(cards), values_(values) {
    for (int v : vars_) values_[v] = 0;
  }
  bool next() {
    for (int v : vars_) {
      if (++values_[v] < cards_[v]) return true;
      values_[v] = 0;
    }
    return false;
  }

 private:
  const std::vector<int>& vars_;
  const std::vector<int>& cards_;
  std::vector<int>& values_;
};

std::uint64_t table_size(const std::vector<int>& vars, const std::vector<int>& cards) {
  std::uint64_t n = 1;
  for (int v : vars) {
    if (n > std::numeric_limits<std::uint64_t>::max() / static_cast<std::uint64_t>(cards[v]))
      return std::numeric_limits<std::uint64_t>::max();
    n *= static_cast<std::uint64_t>(cards[v]);
  }
  return n;
}

void check_cap(std::uint64_t n) {
  if (n > enumeration_cap())
    throw InfeasibleError("enumeration of " + std::to_string(n) + " configurations exceeds the cap of " +
                          std::to_string(enumeration_cap()));
}

std::vector<int> summed_vars(const FactorGraph& g, const MPair& pair) {
  validate_pair(pair, g.num_vars());
  std::vector<char> role(g.num_vars(), 0);
  for (int v : pair.A) role[v] = 1;
  for (int v : pair.B) role[v] = 2;
  std::vector<int> summed = pair.A;
  for (int v = 0; v < g.num_vars(); ++v)
    if (role[v] == 0) summed.push_back(v);
  return summed;
}

std::vector<int> touching_factors(const FactorGraph& g, const std::vector<int>& vars) {
  std::vector<char> used(g.factors().size(), 0);
  std::vector<int> out;
  for (int v : vars)
    for (int f : g.factors_of(v))
      if (!used[f]) {
        used[f] = 1;
        out.push_back(f);
      }
  return out;
}

double partial_score(const FactorGraph& g, const std::vector<int>& factors, const Vector& theta,
                     std::span<const int> values) {
  double s = 0.0;
  for (int f : factors) {
    const auto& fac = g.factors()[f];
    s += fac.table->log_potential(g.config_of(fac, values), theta);
  }
  return s;
}

}  // namespace

SubTable conditional_sub_table(const FactorGraph& graph, const MPair& pair) {
  auto summed = summed_vars(graph, pair);
  return {table_size(summed, graph.cardinalities()), static_cast<int>(touching_factors(graph, summed).size())};
}

ConditionalKernel::ConditionalKernel(std::shared_ptr<const FactorGraph> graph, MPair pair)
    : graph_(std::move(graph)), pair_(std::move(pair)) {
  summed_ = summed_vars(*graph_, pair_);
  factors_ = touching_factors(*graph_, summed_);
  total_ = table_size(summed_, graph_->cardinalities());
}

double ConditionalKernel::accumulate(const Vector& theta, std::span<const int> values, double weight, Vector* grad,
                                     Matrix* hess) const {
  const FactorGraph& g = *graph_;
  check_cap(total_);

  std::vector<int> work(values.begin(), values.end());
  std::vector<double> scores;
  std::vector<char> match;
  scores.reserve(total_);
  match.reserve(total_);
  {
    Odometer odo(summed_, g.cardinalities(), work);
    do {
      scores.push_back(partial_score(g, factors_, theta, work));
      bool m = true;
      for (int v : pair_.A)
        if (work[v] != values[v]) {
          m = false;
          break;
        }
      match.push_back(m);
    } while (odo.next());
  }
  const double log_den = log_sum_exp(scores);
  std::vector<double> num_scores;
  for (std::size_t c = 0; c < scores.size(); ++c)
    if (match[c]) num_scores.push_back(scores[c]);
  const double log_num = log_sum_exp(num_scores);
  const double value = log_num - log_den;

  if (grad || hess) {
    const int r = g.num_params();
    Vector f_dense;
    Vector mean_num, mean_den;
    Matrix sec_num, sec_den;
    if (hess) {
      f_dense = Vector::Zero(r);
      mean_num = Vector::Zero(r);
      mean_den = Vector::Zero(r);
      sec_num = Matrix::Zero(r, r);
      sec_den = Matrix::Zero(r, r);
    }
    Odometer odo(summed_, g.cardinalities(), work);
    std::size_t c = 0;
    do {
      const double p_den = std::exp(scores[c] - log_den);
      const double p_num = match[c] ? std::exp(scores[c] - log_num) : 0.0;
      if (grad) {
        const double w = weight * (p_num - p_den);
        if (w != 0.0)
          for (int f : factors_) {
            const auto& fac = g.factors()[f];
            fac.table->add_features(g.config_of(fac, work), w, *grad);
          }
      }
      if (hess) {
        f_dense.setZero();
        for (int f : factors_) {
          const auto& fac = g.factors()[f];
          fac.table->add_features(g.config_of(fac, work), 1.0, f_dense);
        }
        mean_den += p_den * f_dense;
        sec_den.noalias() += p_den * f_dense * f_dense.transpose();
        if (p_num != 0.0) {
          mean_num += p_num * f_dense;
          sec_num.noalias() += p_num * f_dense * f_dense.transpose();
        }
      }
      ++c;
    } while (odo.next());
    if (hess) {
      Matrix cov_num = sec_num - mean_num * mean_num.transpose();
      Matrix cov_den = sec_den - mean_den * mean_den.transpose();
      *hess += weight * (cov_num - cov_den);
    }
  }
  return value;
}

double conditional_accumulate(const FactorGraph& g, const Vector& theta, const MPair& pair,
                              std::span<const int> values, double weight, Vector* grad, Matrix* hess) {
  // Non-owning alias; the kernel does not outlive this call.
  ConditionalKernel kernel(std::shared_ptr<const FactorGraph>(std::shared_ptr<const FactorGraph>{}, &g), pair);
  return kernel.accumulate(theta, values, weight, grad, hess);
}

double log_partition_enumerate(const FactorGraph& g, const Vector& theta) {
  check_cap(g.state_space_size());
  std::vector<int> all(g.num_vars());
  for (int v = 0; v < g.num_vars(); ++v) all[v] = v;
  std::vector<int> work(g.num_vars(), 0);
  std::vector<double> scores;
  scores.reserve(g.state_space_size());
  Odometer odo(all, g.cardinalities(), work);
  do {
    scores.push_back(g.score(theta, work));
  } while (odo.next());
  return log_sum_exp(scores);
}

double log_partition(const Model& model, const Vector& theta) {
  model.validate_theta(theta);
  return log_partition_enumerate(*model.graph(), theta);
}

double log_partition(const Model& model, const Vector& theta, const Sample& shape) {
  model.validate_theta(theta);
  model.validate(shape);
  if (!model.is_chain()) return log_partition_enumerate(*model.graph(), theta);
  ChainPotentials pot(model, theta);
  const int T = model.sequence_length(shape);
  return sufficient_stats(model, shape).dot(theta) - chain_window(pot, shape, 0, T, 1.0, nullptr);
}

double log_prob(const Model& model, const Vector& theta, const Sample& x) {
  model.validate_theta(theta);
  model.validate(x);
  if (model.is_chain()) {
    ChainPotentials pot(model, theta);
    return chain_window(pot, x, 0, model.sequence_length(x), 1.0, nullptr);
  }
  auto g = model.graph();
  return g->score(theta, x.values) - log_partition_enumerate(*g, theta);
}

Vector sufficient_stats(const Model& model, const Sample& x) {
  model.validate(x);
  Vector s = Vector::Zero(model.num_params());
  model.graph(x)->add_stats(x.values, 1.0, s);
  return s;
}

Vector expected_stats(const Model& model, const Vector& theta, const Sample& shape) {
  model.validate_theta(theta);
  model.validate(shape);
  const int r = model.num_params();
  if (model.is_chain()) {
    ChainPotentials pot(model, theta);
    Vector grad = Vector::Zero(r);
    {
      ChainAccumulator acc(pot, grad);
      chain_window(pot, shape, 0, model.sequence_length(shape), 1.0, &acc);
      acc.finalize();
    }
    return sufficient_stats(model, shape) - grad;
  }
  auto g = model.graph();
  const double logz = log_partition_enumerate(*g, theta);
  std::vector<int> all(g->num_vars());
  for (int v = 0; v < g->num_vars(); ++v) all[v] = v;
  std::vector<int> work(g->num_vars(), 0);
  Vector e = Vector::Zero(r);
  Odometer odo(all, g->cardinalities(), work);
  do {
    g->add_stats(work, std::exp(g->score(theta, work) - logz), e);
  } while (odo.next());
  return e;
}

double conditional_log_prob(const Model& model, const Vector& theta, const MPair& pair, const Sample& x) {
  model.validate_theta(theta);
  model.validate(x);
  auto g = model.graph(x);
  return conditional_accumulate(*g, theta, pair, x.values, 1.0, nullptr, nullptr);
}

}  // namespace scl
