#include "scl/asymptotics.hpp"

#include "scl/inference.hpp"
#include "scl/objective.hpp"
#include "scl/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace scl {

class ScoreCovBuilder {
 public:
  static ScoreCov build(const Model& model, const Vector& theta, const ComponentSet& comps,
                        const std::vector<const Sample*>& xs, const std::vector<double>& w, CovSource source,
                        const ScoreCovOptions& options, bool with_fisher) {
    const int k = comps.size();
    const int r = model.num_params();
    ScoreCov c;
    c.k_ = k;
    c.r_ = r;
    c.source_ = source;
    c.centered_ = options.center;
    for (int p = 0; p < r; ++p) c.names_.push_back(model.param_name(p));

    ComponentEvaluator ev(model, comps);
    ThetaContext ctx(model, theta);
    const auto N = static_cast<Eigen::Index>(xs.size());
    const bool cross = static_cast<long long>(N) * k * r <= options.max_score_entries;
    if (cross) c.scores_ = Matrix::Zero(N, static_cast<Eigen::Index>(k) * r);
    c.mean_ = Matrix::Zero(k, r);
    c.diag_ = Matrix::Zero(static_cast<Eigen::Index>(k) * k, r);
    Vector fmean;
    Matrix fsec;
    if (with_fisher) {
      fmean = Vector::Zero(r);
      fsec = Matrix::Zero(r, r);
    }

    Matrix G(k, r);
    Vector g(r);
    for (Eigen::Index n = 0; n < N; ++n) {
      const Sample& x = *xs[n];
      for (int j = 0; j < k; ++j) {
        g.setZero();
        ev.evaluate(ctx, j, x, 1.0, &g, nullptr);
        G.row(j) = g.transpose();
      }
      const double p = w[n];
      c.mean_ += p * G;
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) c.diag_.row(i * k + j) += p * G.row(i).cwiseProduct(G.row(j));
      if (cross) {
        const double s = std::sqrt(p);
        for (int j = 0; j < k; ++j) c.scores_.block(n, static_cast<Eigen::Index>(j) * r, 1, r) = s * G.row(j);
      }
      if (with_fisher) {
        Vector f = sufficient_stats(model, x);
        fmean += p * f;
        fsec.noalias() += p * f * f.transpose();
      }
    }
    if (options.center)
      for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) c.diag_.row(i * k + j) -= c.mean_.row(i).cwiseProduct(c.mean_.row(j));
    if (with_fisher) c.fisher_ = Matrix(fsec - fmean * fmean.transpose());
    return c;
  }
};

namespace {

void require_cross(const ScoreCov& c) {
  if (!c.has_cross()) throw ContractError("score covariance was built without cross-blocks");
}

}  // namespace

Matrix ScoreCov::block(int i, int j) const {
  require_cross(*this);
  Matrix m = scores_.middleCols(static_cast<Eigen::Index>(i) * r_, r_).transpose() *
             scores_.middleCols(static_cast<Eigen::Index>(j) * r_, r_);
  if (centered_) m.noalias() -= mean_.row(i).transpose() * mean_.row(j);
  return m;
}

Vector ScoreCov::block_diagonal(int i, int j) const { return diag_.row(i * k_ + j).transpose(); }

Matrix ScoreCov::weighted_diagonal_blocks(const Vector& w) const {
  require_cross(*this);
  Matrix m = Matrix::Zero(r_, r_);
  for (int j = 0; j < k_; ++j)
    if (w[j] != 0.0)
      m.selfadjointView<Eigen::Lower>().rankUpdate(
          scores_.middleCols(static_cast<Eigen::Index>(j) * r_, r_).transpose(), w[j]);
  m = m.selfadjointView<Eigen::Lower>();
  if (centered_) m.noalias() -= mean_.transpose() * w.asDiagonal() * mean_;
  return m;
}

// sum_ij W_ij A_i^T A_j through the eigenvectors of the symmetric part of W.
Matrix ScoreCov::weighted_blocks(const Matrix& W) const {
  require_cross(*this);
  if (W.rows() != k_ || W.cols() != k_) throw DimensionError("weight matrix must be k x k");
  const Matrix Ws = 0.5 * (W + W.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Ws);
  const Vector& lam = eig.eigenvalues();
  const double cut = 1e-15 * std::max(lam.cwiseAbs().maxCoeff(), 1e-300);
  Matrix m = Matrix::Zero(r_, r_);
  Matrix Y(scores_.rows(), r_);
  for (int e = 0; e < k_; ++e) {
    if (std::abs(lam[e]) <= cut) continue;
    const Vector v = eig.eigenvectors().col(e);
    Y.setZero();
    for (int j = 0; j < k_; ++j)
      if (v[j] != 0.0) Y.noalias() += v[j] * scores_.middleCols(static_cast<Eigen::Index>(j) * r_, r_);
    m.selfadjointView<Eigen::Lower>().rankUpdate(Y.transpose(), lam[e]);
  }
  m = m.selfadjointView<Eigen::Lower>();
  if (centered_) m.noalias() -= mean_.transpose() * Ws * mean_;
  return m;
}

Vector ScoreCov::weighted_diagonal_blocks_diag(const Vector& w) const {
  Vector d = Vector::Zero(r_);
  for (int j = 0; j < k_; ++j) d += w[j] * block_diagonal(j, j);
  return d;
}

Vector ScoreCov::weighted_blocks_diag(const Matrix& W) const {
  Vector d = Vector::Zero(r_);
  for (int i = 0; i < k_; ++i)
    for (int j = 0; j < k_; ++j)
      if (W(i, j) != 0.0) d += W(i, j) * block_diagonal(i, j);
  return d;
}

namespace {

struct Support {
  std::vector<Sample> samples;
  std::vector<double> weights;
  std::vector<const Sample*> pointers() const {
    std::vector<const Sample*> p;
    for (const auto& s : samples) p.push_back(&s);
    return p;
  }
};

Support enumerate_support(const Model& model, const Vector& theta, const Sample* shape) {
  Support s;
  if (!model.is_chain()) {
    ExactSampler sampler(model, theta);
    const auto& prob = sampler.probabilities();
    for (std::size_t c = 0; c < prob.size(); ++c) {
      s.samples.push_back(sampler.configuration(c));
      s.weights.push_back(prob[c]);
    }
    return s;
  }
  if (model.kind() != ModelKind::boltzmann_chain || !shape)
    throw InfeasibleError("exact score covariance for chains needs a Boltzmann chain and a sequence shape");
  auto g = model.graph(*shape);
  const std::uint64_t total = g->state_space_size();
  if (total > enumeration_cap()) throw InfeasibleError("chain state space exceeds the enumeration cap");
  const double logz = log_partition(model, theta, *shape);
  std::vector<int> values(g->num_vars(), 0);
  const auto& cards = g->cardinalities();
  for (std::uint64_t c = 0; c < total; ++c) {
    s.samples.push_back(Sample{values, {}});
    s.weights.push_back(std::exp(g->score(theta, values) - logz));
    for (std::size_t v = 0; v < values.size(); ++v) {
      if (++values[v] < cards[v]) break;
      values[v] = 0;
    }
  }
  return s;
}

}  // namespace

ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps,
                   const ScoreCovOptions& options, const Sample* shape) {
  Support s = enumerate_support(model, theta0, shape);
  return ScoreCovBuilder::build(model, theta0, comps, s.pointers(), s.weights, CovSource::exact, options,
                                !model.is_conditional());
}

ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps, const Dataset& data,
                   const ScoreCovOptions& options) {
  if (data.empty()) throw ContractError("empirical score covariance needs data");
  std::map<Sample, std::size_t> counts;
  for (const auto& x : data.samples) {
    model.validate(x);
    ++counts[x];
  }
  Support s;
  for (const auto& [x, c] : counts) {
    s.samples.push_back(x);
    s.weights.push_back(static_cast<double>(c) / static_cast<double>(data.size()));
  }
  return ScoreCovBuilder::build(model, theta0, comps, s.pointers(), s.weights, CovSource::empirical, options, false);
}

TrueDistribution TrueDistribution::from_model(const Model& model, const Vector& theta) {
  Support s = enumerate_support(model, theta, nullptr);
  return {std::move(s.samples), std::move(s.weights)};
}

TrueDistribution TrueDistribution::from_log_weights(const std::vector<int>& cards,
                                                    const std::function<double(const std::vector<int>&)>& log_weight) {
  TrueDistribution t;
  std::vector<int> values(cards.size(), 0);
  std::vector<double> lw;
  while (true) {
    t.support.push_back(Sample{values, {}});
    lw.push_back(log_weight(values));
    std::size_t v = 0;
    for (; v < values.size(); ++v) {
      if (++values[v] < cards[v]) break;
      values[v] = 0;
    }
    if (v == values.size()) break;
  }
  const double lse = log_sum_exp(lw);
  for (double x : lw) t.prob.push_back(std::exp(x - lse));
  return t;
}

ScoreCov score_cov(const Model& model, const Vector& theta0, const ComponentSet& comps,
                   const TrueDistribution& truth, const ScoreCovOptions& options) {
  if (truth.support.size() != truth.prob.size()) throw DimensionError("true distribution support/prob mismatch");
  std::vector<const Sample*> p;
  for (const auto& x : truth.support) {
    model.validate(x);
    p.push_back(&x);
  }
  return ScoreCovBuilder::build(model, theta0, comps, p, truth.prob, CovSource::true_distribution, options,
                                !model.is_conditional());
}

double log_det_spd(const Matrix& m, const std::string& what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SingularError("eigendecomposition of " + what + " failed");
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const double ev = es.eigenvalues()[i];
    if (!(ev > 0.0)) throw SingularError(what + " is not positive definite");
    s += std::log(ev);
  }
  return s;
}

namespace {

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// Inverse of a symmetric PD matrix; names the null directions on failure.
Matrix spd_inverse(const Matrix& m, const std::string& what, const std::vector<std::string>& names) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m));
  const Vector& ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);
  std::ostringstream null;
  int nulls = 0;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > 1e-12 * scale) continue;
    const Vector v = es.eigenvectors().col(i);
    null << (nulls++ ? "; " : "") << "[";
    bool first = true;
    for (Eigen::Index p = 0; p < v.size(); ++p)
      if (std::abs(v[p]) > 1e-6) {
        null << (first ? "" : " ") << (p < static_cast<Eigen::Index>(names.size()) ? names[p] : std::to_string(p))
             << ":" << v[p];
        first = false;
      }
    null << "]";
  }
  if (nulls) throw SingularError(what + " is singular; null directions " + null.str());
  return symmetrize(es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace

AsymReport asymptotic_variance(const ScoreCov& cov, const SelectionPolicy& policy, const Vector& beta) {
  const int k = cov.num_components();
  if (policy.size() != k || beta.size() != k) throw DimensionError("policy/beta sizes do not match the score covariance");
  policy.validate();
  const Vector w = beta.cwiseProduct(policy.lambda);
  AsymReport rep;
  rep.upsilon_inv = symmetrize(cov.weighted_diagonal_blocks(w));
  const Matrix upsilon = spd_inverse(rep.upsilon_inv, "Upsilon^-1", cov.param_names());
  rep.sigma = symmetrize(cov.weighted_blocks(w * w.transpose()));
  rep.variance = symmetrize(upsilon * rep.sigma * upsilon);
  rep.trace = rep.variance.trace();
  rep.log_det = log_det_spd(rep.variance, "asymptotic variance");
  const Matrix W = beta.asDiagonal() * policy.second_moment() * beta.asDiagonal();
  rep.sigma_selection = symmetrize(cov.weighted_blocks(W));
  rep.variance_selection = symmetrize(upsilon * rep.sigma_selection * upsilon);
  rep.trace_selection = rep.variance_selection.trace();
  rep.log_det_selection = log_det_spd(rep.variance_selection, "asymptotic variance (selection moments)");
  if (cov.fisher()) {
    const Matrix mle = mle_variance(cov);
    const EfficiencyRatio e = efficiency(rep.variance, mle);
    const EfficiencyRatio es = efficiency(rep.variance_selection, mle);
    rep.eff = e.determinant;
    rep.eff_trace = e.trace;
    rep.eff_selection = es.determinant;
    rep.eff_trace_selection = es.trace;
  }
  return rep;
}

Matrix mle_variance(const ScoreCov& cov) {
  if (!cov.fisher()) throw ContractError("score covariance carries no Fisher information");
  return spd_inverse(*cov.fisher(), "Fisher information", cov.param_names());
}

EfficiencyRatio efficiency(const Matrix& variance, const Matrix& mle_variance) {
  if (variance.rows() != mle_variance.rows() || variance.cols() != mle_variance.cols() ||
      variance.rows() != variance.cols())
    throw DimensionError("efficiency needs two square matrices of equal size");
  EfficiencyRatio e;
  e.determinant = std::exp(log_det_spd(symmetrize(variance), "variance") -
                           log_det_spd(symmetrize(mle_variance), "MLE variance"));
  e.trace = variance.trace() / mle_variance.trace();
  return e;
}

double efficiency(const AsymReport& report, const Matrix& mle_variance) {
  return efficiency(report.variance, mle_variance).determinant;
}

RobustReport sandwich_variance(const Model& model, const ComponentSet& comps, const SelectionPolicy& policy,
                               const TrueDistribution& truth, double tolerance) {
  if (model.is_chain()) throw ContractError("sandwich variance needs a fixed-size model");
  policy.validate();
  const int k = comps.size();
  if (policy.size() != k) throw DimensionError("policy and component set sizes differ");
  const int r = model.num_params();
  ComponentEvaluator ev(model, comps);
  const Vector w = comps.beta().cwiseProduct(policy.lambda);

  auto M = [&](const Vector& theta, Vector& grad) {
    ThetaContext ctx(model, theta);
    grad = Vector::Zero(r);
    double v = 0.0;
    for (std::size_t s = 0; s < truth.support.size(); ++s)
      for (int j = 0; j < k; ++j) {
        const double a = truth.prob[s] * w[j];
        v += a * ev.evaluate(ctx, j, truth.support[s], a, &grad, nullptr);
      }
    return v;
  };
  OptimizerConfig oc;
  oc.gradient_tolerance = tolerance;
  oc.max_iterations = 2000;
  OptimizerResult opt = maximize(M, Vector::Zero(r), oc);

  RobustReport rep{model, comps, policy, opt.x, Matrix::Zero(r, r), Matrix(), Matrix(), 0.0};
  ThetaContext ctx(model, rep.theta0);
  Vector residual = Vector::Zero(r);
  for (std::size_t s = 0; s < truth.support.size(); ++s)
    for (int j = 0; j < k; ++j) {
      const double a = truth.prob[s] * w[j];
      ev.evaluate(ctx, j, truth.support[s], a, &residual, &rep.bread);
    }
  rep.residual = residual.cwiseAbs().maxCoeff();
  rep.bread = symmetrize(rep.bread);
  ScoreCovOptions raw;
  raw.center = false;
  ScoreCov second = score_cov(model, rep.theta0, comps, truth, raw);
  const Matrix W = comps.beta().asDiagonal() * policy.second_moment() * comps.beta().asDiagonal();
  rep.meat = symmetrize(second.weighted_blocks(W));
  const Matrix bread_inv = spd_inverse(-rep.bread, "bread", second.param_names());
  rep.sandwich = symmetrize(bread_inv * rep.meat * bread_inv);
  return rep;
}

Vector influence(const RobustReport& robust, const Sample& x, const std::vector<std::uint8_t>& z, std::size_t n) {
  const int k = robust.components.size();
  if (static_cast<int>(z.size()) != k) throw DimensionError("indicator vector length differs from component count");
  if (n == 0) throw ContractError("n must be positive");
  ComponentEvaluator ev(robust.model, robust.components);
  ThetaContext ctx(robust.model, robust.theta0);
  Vector psi = Vector::Zero(robust.model.num_params());
  for (int j = 0; j < k; ++j)
    if (z[j]) ev.evaluate(ctx, j, x, robust.components.beta()[j], &psi, nullptr);
  Eigen::LDLT<Matrix> ldlt(robust.bread);
  if (ldlt.info() != Eigen::Success) throw SingularError("bread is singular");
  return -ldlt.solve(psi) / static_cast<double>(n);
}

}  // namespace scl
