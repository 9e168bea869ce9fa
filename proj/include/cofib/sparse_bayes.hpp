#pragma once

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "cofib/dictionary.hpp"

namespace cofib {

// Bernoulli-Gaussian prior for the Bayesian matching pursuit: atom i is
// active with probability lambda[i]; active coefficients are
// N(0, coeff_variance); observations carry N(0, noise_variance) noise.
struct ActivityPrior {
  Eigen::VectorXd lambda;
  double coeff_variance = 1.0;
  double noise_variance = 1.0;
};

struct SparseSolution {
  Eigen::VectorXd coeffs;            // M-length, nonzero on the support
  Eigen::VectorXd posterior_lambda;  // per-atom activity posterior in [0, 1]
  std::vector<int> support;          // sorted indices of nonzero coeffs
  double log_evidence = 0.0;         // log posterior score of the support
};

// Greedy beam search over supports under the Bernoulli-Gaussian model: each
// step extends the current beam by the atoms that maximize the support's log
// posterior (Gaussian evidence plus Bernoulli prior), keeping the best
// beam_width supports. Stops when no extension improves the best support or
// max_support is reached. Coefficients are the posterior mean on the best
// support (ridge-regularized least squares, ridge noise/coeff variance);
// posterior_lambda marginalizes atom activity over every support evaluated
// during the search, weighted by exp(log posterior). Atoms with zero prior
// are never selected and get posterior 0.
//
// `gram` may supply a precomputed dict.atoms' * dict.atoms.
SparseSolution bmp_estimate(const Dictionary& dict, const Eigen::VectorXd& signal,
                            const ActivityPrior& prior, int max_support, int beam_width = 4,
                            const Eigen::MatrixXd* gram = nullptr);

// Test oracle: enumerates every support of size <= max_support (requires
// M <= 16, max_support <= 4), computes exact normalized posteriors under the
// same model, and returns the exact activity marginals plus the MAP support.
// When support_posteriors is given it receives every enumerated support with
// its normalized probability.
std::pair<Eigen::VectorXd, std::vector<int>> support_posterior_exhaustive(
    const Dictionary& dict, const Eigen::VectorXd& signal, const ActivityPrior& prior,
    int max_support,
    std::vector<std::pair<std::vector<int>, double>>* support_posteriors = nullptr);

}  // namespace cofib
