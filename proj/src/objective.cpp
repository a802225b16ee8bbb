#include "scl/objective.hpp"

#include <map>

namespace scl {

ThetaContext::ThetaContext(const Model& model, const Vector& theta_) : theta(theta_) {
  model.validate_theta(theta_);
  if (model.is_chain()) chain.emplace(model, theta_);
}

ComponentEvaluator::ComponentEvaluator(Model model, ComponentSet comps)
    : model_(std::move(model)), comps_(std::move(comps)) {
  comps_.validate(model_);
  if (!model_.is_chain())
    for (const auto& c : comps_.components()) kernels_.emplace_back(model_.graph(), c.pair);
}

std::vector<std::pair<int, int>> ComponentEvaluator::windows(int j, const Sample& x) const {
  const int T = model_.sequence_length(x);
  const int order = comps_[j].order;
  if (order == 0 || T <= order) return {{0, T}};
  std::vector<std::pair<int, int>> w;
  for (int t = 0; t + order <= T; ++t) w.emplace_back(t, t + order);
  return w;
}

double ComponentEvaluator::evaluate(const ThetaContext& ctx, int j, const Sample& x, double weight, Vector* grad,
                                    Matrix* hess, ChainAccumulator* acc) const {
  if (!model_.is_chain()) return kernels_[j].accumulate(ctx.theta, x.values, weight, grad, hess);
  if (hess) throw ContractError("Hessians of chain components are not available");
  const ChainPotentials& pot = *ctx.chain;
  std::optional<ChainAccumulator> local;
  if (grad && !acc) acc = &local.emplace(pot, *grad);
  double v = 0.0;
  for (auto [b, e] : windows(j, x)) v += chain_window(pot, x, b, e, weight, grad ? acc : nullptr);
  if (local) local->finalize();
  return v;
}

namespace {

std::uint64_t emission_terms(const Model& model, const Sample& x, int t) {
  return model.kind() == ModelKind::boltzmann_chain ? static_cast<std::uint64_t>(model.symbols())
                                                    : static_cast<std::uint64_t>(x.observed[t].size());
}

}  // namespace

std::uint64_t ComponentEvaluator::objective_cost(int j, const Sample& x) const {
  if (!model_.is_chain()) {
    const SubTable t = kernels_[j].sub_table();
    return t.configurations * static_cast<std::uint64_t>(t.factors) +
           static_cast<std::uint64_t>(model_.num_params()) + comps_[j].pair.B.size();
  }
  const auto S = static_cast<std::uint64_t>(model_.states());
  const int T = model_.sequence_length(x);
  std::uint64_t c = 0;
  for (auto [b, e] : windows(j, x)) {
    c += static_cast<std::uint64_t>(e - b) * S * S;
    for (int t = b; t < e; ++t) c += S * emission_terms(model_, x, t);
    c += (b > 0) + (e < T);
  }
  return c;
}

std::uint64_t ComponentEvaluator::gradient_cost(int j, const Sample& x) const {
  if (!model_.is_chain()) {
    const SubTable t = kernels_[j].sub_table();
    return objective_cost(j, x) + t.configurations * static_cast<std::uint64_t>(t.factors) +
           static_cast<std::uint64_t>(model_.num_params());
  }
  const auto S = static_cast<std::uint64_t>(model_.states());
  std::uint64_t c = objective_cost(j, x);
  for (auto [b, e] : windows(j, x)) {
    c += static_cast<std::uint64_t>(e - b) * S * S;
    for (int t = b; t < e; ++t) c += S * emission_terms(model_, x, t);
  }
  return c;
}

SclObjective::SclObjective(Model model, const Dataset& data, ComponentSet comps, const IndicatorMatrix& z)
    : evaluator_(std::move(model), std::move(comps)), n_(data.size()) {
  const Model& m = evaluator_.model();
  const int k = evaluator_.components().size();
  if (z.rows() != data.size() || z.cols() != k)
    throw DimensionError("indicator matrix is " + std::to_string(z.rows()) + "x" + std::to_string(z.cols()) +
                         ", expected " + std::to_string(data.size()) + "x" + std::to_string(k));
  if (data.empty()) throw ContractError("dataset is empty");
  std::map<std::pair<Sample, std::vector<std::uint8_t>>, std::size_t> index;
  for (std::size_t i = 0; i < data.size(); ++i) {
    m.validate(data.samples[i]);
    auto row = z.row(i);
    auto [it, fresh] = index.try_emplace({data.samples[i], row}, groups_.size());
    if (fresh) {
      Group g;
      g.sample = data.samples[i];
      for (int j = 0; j < k; ++j)
        if (row[j]) g.selected.push_back(j);
      groups_.push_back(std::move(g));
    }
    groups_[it->second].count += 1.0;
  }
  ledger_ = flop_count(m, data, evaluator_.components(), z);
}

double SclObjective::run(const Vector& theta, Vector* grad, Matrix* hess) const {
  const Model& model = evaluator_.model();
  const ComponentSet& comps = evaluator_.components();
  const int r = model.num_params();
  ThetaContext ctx(model, theta);
  const double inv_n = 1.0 / static_cast<double>(n_);
  constexpr std::size_t kBlock = 256;

  std::vector<double> values;
  std::vector<Vector> grads;
  std::vector<Matrix> hessians;
  for (std::size_t start = 0; start < groups_.size(); start += kBlock) {
    const std::size_t stop = std::min(groups_.size(), start + kBlock);
    double v = 0.0;
    Vector g;
    Matrix h;
    if (grad) g = Vector::Zero(r);
    if (hess) h = Matrix::Zero(r, r);
    std::optional<ChainAccumulator> acc;
    if (grad && ctx.chain) acc.emplace(*ctx.chain, g);
    for (std::size_t gi = start; gi < stop; ++gi) {
      const Group& grp = groups_[gi];
      for (int j : grp.selected) {
        const double w = comps.beta()[j] * grp.count * inv_n;
        v += w * evaluator_.evaluate(ctx, j, grp.sample, w, grad ? &g : nullptr, hess ? &h : nullptr,
                                     acc ? &*acc : nullptr);
      }
    }
    if (acc) acc->finalize();
    values.push_back(v);
    if (grad) grads.push_back(std::move(g));
    if (hess) hessians.push_back(std::move(h));
  }
  // Pairwise reduction with a shape fixed by the number of blocks.
  for (std::size_t width = 1; width < values.size(); width *= 2)
    for (std::size_t i = 0; i + width < values.size(); i += 2 * width) {
      values[i] += values[i + width];
      if (grad) grads[i] += grads[i + width];
      if (hess) hessians[i] += hessians[i + width];
    }
  if (grad) *grad = grads.empty() ? Vector::Zero(r) : grads[0];
  if (hess) *hess = hessians.empty() ? Matrix::Zero(r, r) : hessians[0];
  return values.empty() ? 0.0 : values[0];
}

double SclObjective::value(const Vector& theta) const { return run(theta, nullptr, nullptr); }

double SclObjective::value_and_gradient(const Vector& theta, Vector& grad) const {
  return run(theta, &grad, nullptr);
}

Matrix SclObjective::hessian(const Vector& theta) const {
  if (evaluator_.model().is_chain()) throw ContractError("Hessians of chain objectives are not available");
  Matrix h;
  run(theta, nullptr, &h);
  return h;
}

double scl_value(const Model& model, const Vector& theta, const Dataset& data, const ComponentSet& comps,
                 const IndicatorMatrix& z) {
  return SclObjective(model, data, comps, z).value(theta);
}

Vector scl_gradient(const Model& model, const Vector& theta, const Dataset& data, const ComponentSet& comps,
                    const IndicatorMatrix& z) {
  Vector g;
  SclObjective(model, data, comps, z).value_and_gradient(theta, g);
  return g;
}

FlopLedger flop_count(const Model& model, const Dataset& data, const ComponentSet& comps, const IndicatorMatrix& z) {
  const int k = comps.size();
  if (z.rows() != data.size() || z.cols() != k) throw DimensionError("indicator matrix does not match data");
  ComponentEvaluator ev(model, comps);
  FlopLedger l;
  l.per_component.assign(k, 0);
  l.per_sample.assign(data.size(), 0);
  for (std::size_t i = 0; i < data.size(); ++i)
    for (int j = 0; j < k; ++j) {
      if (!z(i, j)) continue;
      const std::uint64_t c = ev.objective_cost(j, data.samples[i]);
      l.per_component[j] += c;
      l.per_sample[i] += c;
      l.objective_total += c;
      l.gradient_total += ev.gradient_cost(j, data.samples[i]);
    }
  return l;
}

FlopLedger flop_count(const Model& model, const ComponentSet& comps, const IndicatorMatrix& z) {
  if (model.is_chain()) throw ContractError("chain costs depend on the data; pass the dataset");
  Dataset shape;
  shape.samples.assign(z.rows(), Sample{std::vector<int>(model.num_vars(), 0), {}});
  return flop_count(model, shape, comps, z);
}

double expected_flops(const Model& model, const ComponentSet& comps, const SelectionPolicy& policy, std::size_t n) {
  if (model.is_chain()) throw ContractError("chain costs depend on the data; pass the dataset");
  if (policy.size() != comps.size()) throw DimensionError("policy and component set sizes differ");
  ComponentEvaluator ev(model, comps);
  const Sample x{std::vector<int>(model.num_vars(), 0), {}};
  double total = 0.0;
  for (int j = 0; j < comps.size(); ++j)
    total += static_cast<double>(n) * policy.lambda[j] * static_cast<double>(ev.objective_cost(j, x));
  return total;
}

double expected_flops(const Model& model, const Dataset& data, const ComponentSet& comps,
                      const SelectionPolicy& policy) {
  if (policy.size() != comps.size()) throw DimensionError("policy and component set sizes differ");
  ComponentEvaluator ev(model, comps);
  double total = 0.0;
  for (const auto& x : data.samples)
    for (int j = 0; j < comps.size(); ++j)
      total += policy.lambda[j] * static_cast<double>(ev.objective_cost(j, x));
  return total;
}

}  // namespace scl
