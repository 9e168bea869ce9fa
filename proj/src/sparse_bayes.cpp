#include "cofib/sparse_bayes.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <unordered_set>

namespace cofib {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double lse(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double hi = std::max(a, b), lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// Shared per-call quantities of the Bernoulli-Gaussian support score
//   score(S) = -R/2 log 2pi - 1/2 [ (R-|S|) log sn2 + |S| log sa2 + log det A_S ]
//              - (|y|^2 - beta_S' A_S^-1 beta_S) / (2 sn2)
//              + sum_{i in S} log l_i + sum_{i not in S} log(1 - l_i)
// with A_S = G_SS + (sn2/sa2) I.
struct ScoreContext {
  const Eigen::MatrixXd& gram;
  Eigen::VectorXd beta;        // D' y
  double yy = 0.0;             // |y|^2
  int dim = 0;                 // R
  double log_sn2 = 0.0, log_sa2 = 0.0, inv_2sn2 = 0.0, ridge = 0.0;
  Eigen::VectorXd delta;       // log l_i - log(1 - l_i), lambda clamped below 1
  double prior_base = 0.0;     // sum_i log(1 - l_i)
  std::vector<int> candidates; // atoms with lambda > 0

  ScoreContext(const Eigen::MatrixXd& g, const Eigen::MatrixXd& atoms,
               const Eigen::VectorXd& signal, const ActivityPrior& prior)
      : gram(g) {
    beta = atoms.transpose() * signal;
    yy = signal.squaredNorm();
    dim = static_cast<int>(atoms.rows());
    log_sn2 = std::log(prior.noise_variance);
    log_sa2 = std::log(prior.coeff_variance);
    inv_2sn2 = 0.5 / prior.noise_variance;
    ridge = prior.noise_variance / prior.coeff_variance;
    const Eigen::Index m = prior.lambda.size();
    delta.resize(m);
    prior_base = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double l = std::min(prior.lambda[i], 1.0 - 1e-12);
      if (l > 0.0) {
        delta[i] = std::log(l) - std::log1p(-l);
        candidates.push_back(static_cast<int>(i));
      } else {
        delta[i] = kNegInf;
      }
      prior_base += std::log1p(-l);
    }
  }

  double empty_score() const {
    return -0.5 * kLog2Pi * dim - 0.5 * dim * log_sn2 - yy * inv_2sn2 + prior_base;
  }

  double assemble(int support_size, double logdet, double quad, double prior_sum) const {
    return -0.5 * kLog2Pi * dim
           - 0.5 * ((dim - support_size) * log_sn2 + support_size * log_sa2 + logdet)
           - (yy - quad) * inv_2sn2 + prior_base + prior_sum;
  }
};

// One support under search: insertion-ordered indices, sorted key, and the
// Cholesky state of A_S for incremental extension.
struct BeamState {
  std::vector<int> order;
  std::vector<int> key;
  Eigen::MatrixXd chol;  // lower triangular, order-indexed
  Eigen::VectorXd z;     // chol^-1 beta_S
  double quad = 0.0, logdet = 0.0, prior_sum = 0.0, score = kNegInf;
};

std::string key_bytes(const std::vector<int>& key) {
  return std::string(reinterpret_cast<const char*>(key.data()), key.size() * sizeof(int));
}

// Extends `st` by atom `i`; returns false when the bordered Cholesky pivot
// degenerates (atom numerically dependent on the support).
bool extend_state(const ScoreContext& ctx, const BeamState& st, int i, int max_support,
                  BeamState& out) {
  const int s = static_cast<int>(st.order.size());
  Eigen::VectorXd l(s);
  for (int r = 0; r < s; ++r) {
    double v = ctx.gram(st.order[r], i);
    for (int q = 0; q < r; ++q) v -= st.chol(r, q) * l[q];
    l[r] = v / st.chol(r, r);
  }
  const double d2 = ctx.gram(i, i) + ctx.ridge - l.squaredNorm();
  if (d2 <= 1e-12) return false;
  const double ld = std::sqrt(d2);
  const double zn = (ctx.beta[i] - l.dot(st.z.head(s))) / ld;

  out.order = st.order;
  out.order.push_back(i);
  out.key = st.key;
  out.key.insert(std::lower_bound(out.key.begin(), out.key.end(), i), i);
  out.chol.resize(max_support, max_support);
  out.chol.topLeftCorner(s, s) = st.chol.topLeftCorner(s, s);
  out.chol.row(s).head(s) = l.transpose();
  out.chol(s, s) = ld;
  out.z.resize(max_support);
  out.z.head(s) = st.z.head(s);
  out.z[s] = zn;
  out.quad = st.quad + zn * zn;
  out.logdet = st.logdet + 2.0 * std::log(ld);
  out.prior_sum = st.prior_sum + ctx.delta[i];
  out.score = ctx.assemble(s + 1, out.logdet, out.quad, out.prior_sum);
  return true;
}

void validate_prior(const Dictionary& dict, const Eigen::VectorXd& signal,
                    const ActivityPrior& prior) {
  if (signal.size() != dict.atom_dim())
    throw std::invalid_argument("sparse solver: signal length mismatch");
  if (prior.lambda.size() != dict.num_atoms())
    throw std::invalid_argument("sparse solver: lambda length mismatch");
  if (!(prior.coeff_variance > 0.0) || !(prior.noise_variance > 0.0))
    throw std::invalid_argument("sparse solver: variances must be positive");
  for (Eigen::Index i = 0; i < prior.lambda.size(); ++i) {
    if (!(prior.lambda[i] >= 0.0) || !(prior.lambda[i] <= 1.0))
      throw std::invalid_argument("sparse solver: lambda entries must be in [0, 1]");
  }
}

}  // namespace

SparseSolution bmp_estimate(const Dictionary& dict, const Eigen::VectorXd& signal,
                            const ActivityPrior& prior, int max_support, int beam_width,
                            const Eigen::MatrixXd* gram) {
  validate_prior(dict, signal, prior);
  const int R = dict.atom_dim();
  const int M = dict.num_atoms();
  if (max_support < 1 || max_support > R)
    throw std::invalid_argument("bmp_estimate: max_support out of [1, R]");
  if (beam_width < 1) throw std::invalid_argument("bmp_estimate: beam_width must be >= 1");
  if ((prior.lambda.array() > 0.0).count() == 0)
    throw std::invalid_argument("bmp_estimate: all-zero lambda");

  Eigen::MatrixXd local_gram;
  if (!gram) {
    local_gram = dict.atoms.transpose() * dict.atoms;
    gram = &local_gram;
  }
  ScoreContext ctx(*gram, dict.atoms, signal, prior);

  // activity marginals over every evaluated support, in log space
  double log_total = kNegInf;
  std::vector<double> log_active(static_cast<std::size_t>(M), kNegInf);
  auto accumulate = [&](const BeamState& st) {
    log_total = lse(log_total, st.score);
    for (int i : st.key) log_active[i] = lse(log_active[i], st.score);
  };

  BeamState empty;
  empty.chol.resize(max_support, max_support);
  empty.z.resize(max_support);
  empty.score = ctx.empty_score();
  accumulate(empty);

  std::unordered_set<std::string> seen;
  seen.insert(key_bytes(empty.key));

  BeamState best = empty;
  std::vector<BeamState> beam{empty};

  for (int step = 0; step < max_support; ++step) {
    std::vector<BeamState> exts;
    for (const BeamState& st : beam) {
      for (int i : ctx.candidates) {
        if (std::binary_search(st.key.begin(), st.key.end(), i)) continue;
        std::vector<int> key = st.key;
        key.insert(std::lower_bound(key.begin(), key.end(), i), i);
        if (!seen.insert(key_bytes(key)).second) continue;
        BeamState ext;
        if (!extend_state(ctx, st, i, max_support, ext)) continue;
        accumulate(ext);
        exts.push_back(std::move(ext));
      }
    }
    if (exts.empty()) break;
    std::sort(exts.begin(), exts.end(), [](const BeamState& a, const BeamState& b) {
      if (a.score != b.score) return a.score > b.score;
      return a.key < b.key;
    });
    if (exts.front().score <= best.score) break;
    best = exts.front();
    if (exts.size() > static_cast<std::size_t>(beam_width)) exts.resize(beam_width);
    beam = std::move(exts);
  }

  SparseSolution sol;
  sol.coeffs = Eigen::VectorXd::Zero(M);
  const int s = static_cast<int>(best.order.size());
  if (s > 0) {
    // posterior mean on the best support: back-substitute chol' x = z
    Eigen::VectorXd x(s);
    for (int r = s - 1; r >= 0; --r) {
      double v = best.z[r];
      for (int q = r + 1; q < s; ++q) v -= best.chol(q, r) * x[q];
      x[r] = v / best.chol(r, r);
    }
    for (int r = 0; r < s; ++r) sol.coeffs[best.order[r]] = x[r];
  }
  for (int i : best.key) {
    if (sol.coeffs[i] != 0.0) sol.support.push_back(i);
  }
  sol.log_evidence = best.score;
  sol.posterior_lambda = Eigen::VectorXd::Zero(M);
  for (int i : ctx.candidates) {
    if (log_active[i] != kNegInf)
      sol.posterior_lambda[i] = std::exp(log_active[i] - log_total);
  }
  return sol;
}

std::pair<Eigen::VectorXd, std::vector<int>> support_posterior_exhaustive(
    const Dictionary& dict, const Eigen::VectorXd& signal, const ActivityPrior& prior,
    int max_support, std::vector<std::pair<std::vector<int>, double>>* support_posteriors) {
  validate_prior(dict, signal, prior);
  const int M = dict.num_atoms();
  if (M > 16 || max_support > 4 || max_support < 0)
    throw std::invalid_argument("support_posterior_exhaustive: enumeration bound exceeded");

  const Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;
  ScoreContext ctx(gram, dict.atoms, signal, prior);

  std::uint32_t zero_mask = 0;
  for (int i = 0; i < M; ++i) {
    if (!(prior.lambda[i] > 0.0)) zero_mask |= 1u << i;
  }

  std::vector<std::pair<std::vector<int>, double>> scored;  // (support, log score)
  for (std::uint32_t mask = 0; mask < (1u << M); ++mask) {
    if (mask & zero_mask) continue;
    const int s = std::popcount(mask);
    if (s > max_support) continue;
    std::vector<int> sup;
    sup.reserve(s);
    for (int i = 0; i < M; ++i) {
      if (mask & (1u << i)) sup.push_back(i);
    }
    double score;
    if (s == 0) {
      score = ctx.empty_score();
    } else {
      Eigen::MatrixXd a(s, s);
      Eigen::VectorXd b(s);
      for (int r = 0; r < s; ++r) {
        b[r] = ctx.beta[sup[r]];
        for (int c = 0; c < s; ++c) a(r, c) = gram(sup[r], sup[c]);
        a(r, r) += ctx.ridge;
      }
      const Eigen::LLT<Eigen::MatrixXd> llt(a);
      if (llt.info() != Eigen::Success) continue;
      double logdet = 0.0;
      for (int r = 0; r < s; ++r) logdet += 2.0 * std::log(llt.matrixL()(r, r));
      const Eigen::VectorXd z = llt.matrixL().solve(b);
      double prior_sum = 0.0;
      for (int i : sup) prior_sum += ctx.delta[i];
      score = ctx.assemble(s, logdet, z.squaredNorm(), prior_sum);
    }
    scored.emplace_back(std::move(sup), score);
  }

  double log_total = kNegInf;
  for (const auto& [sup, sc] : scored) log_total = lse(log_total, sc);

  Eigen::VectorXd marginal = Eigen::VectorXd::Zero(M);
  std::vector<double> log_active(static_cast<std::size_t>(M), kNegInf);
  const std::vector<int>* map_support = nullptr;
  double map_score = kNegInf;
  for (const auto& [sup, sc] : scored) {
    for (int i : sup) log_active[i] = lse(log_active[i], sc);
    if (sc > map_score || (sc == map_score && map_support && sup < *map_support)) {
      map_score = sc;
      map_support = &sup;
    }
  }
  for (int i = 0; i < M; ++i) {
    if (log_active[i] != kNegInf) marginal[i] = std::exp(log_active[i] - log_total);
  }
  if (support_posteriors) {
    support_posteriors->clear();
    for (const auto& [sup, sc] : scored)
      support_posteriors->emplace_back(sup, std::exp(sc - log_total));
  }
  return {marginal, map_support ? *map_support : std::vector<int>{}};
}

}  // namespace cofib
