#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

namespace cofib {

// Overcomplete sparse-coding dictionary for one cluster: R x M matrix of
// unit-norm column atoms, M > R, no (near-)duplicate columns.
struct Dictionary {
  Eigen::MatrixXd atoms;

  int atom_dim() const { return static_cast<int>(atoms.rows()); }
  int num_atoms() const { return static_cast<int>(atoms.cols()); }
};

// Orthogonal matching pursuit: greedy max-|correlation| atom selection with
// a least-squares refit on the active set each step. Stops at max_sparsity
// atoms or when the residual norm drops to residual_tol. Returns a dense
// M-length coefficient vector, nonzero on the selected support.
Eigen::VectorXd omp(const Dictionary& dict, const Eigen::VectorXd& signal, int max_sparsity,
                    double residual_tol = 0.0);

// K-SVD dictionary learning: alternate OMP sparse coding of all signals with
// rank-1 atom/coefficient updates on the restricted residual (power
// iteration, fixed sign convention). Unused atoms are replaced by the worst
// represented signal. Initialization picks num_atoms distinct signals
// (seeded), normalized. When objective_trace is given it receives the total
// squared representation error measured at each iteration's coding stage.
Dictionary ksvd_train(const Eigen::MatrixXd& signals, int num_atoms, int sparsity, int iterations,
                      std::uint64_t seed, std::vector<double>* objective_trace = nullptr);

// Flat binary dictionary file: magic "COFD", then version, R, M as
// little-endian u32, then R*M little-endian f64, column-major.
void save_dictionary(const Dictionary& dict, const std::string& path);
Dictionary load_dictionary(const std::string& path);

}  // namespace cofib
