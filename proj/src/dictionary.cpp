#include "cofib/dictionary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "cofib/parallel.hpp"
#include "cofib/rng.hpp"

namespace cofib {

namespace {

constexpr double kDuplicateIp = 1.0 - 1e-9;  // |inner product| above this = duplicate atoms

// Incremental-Cholesky OMP on precomputed Gram data. Writes the selected
// indices/values and returns the final squared residual norm.
double omp_gram(const Eigen::MatrixXd& gram, const Eigen::VectorXd& beta, double signal_energy,
                int max_sparsity, double residual_tol, std::vector<int>& idx,
                std::vector<double>& val) {
  idx.clear();
  val.clear();
  const int m = static_cast<int>(gram.cols());
  max_sparsity = std::min(max_sparsity, m);
  double res2 = signal_energy;
  const double tol2 = residual_tol * residual_tol;
  // numerically-zero residual guard so exact representations terminate
  const double floor2 = 1e-26 * std::max(signal_energy, 1.0);
  if (max_sparsity <= 0 || res2 <= std::max(tol2, 0.0)) return res2;

  Eigen::MatrixXd chol(max_sparsity, max_sparsity);  // lower triangular, grown per step
  Eigen::VectorXd z(max_sparsity);                   // chol^-1 * beta_S
  std::vector<char> active(static_cast<std::size_t>(m), 0);
  Eigen::VectorXd corr = beta;  // correlations with the current residual

  while (static_cast<int>(idx.size()) < max_sparsity) {
    int best = -1;
    double best_abs = 0.0;
    for (int i = 0; i < m; ++i) {
      if (active[i]) continue;
      const double a = std::abs(corr[i]);
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (best < 0 || best_abs * best_abs <= floor2) break;

    // Cholesky border for the normal equations G_SS
    const int s = static_cast<int>(idx.size());
    double d2 = gram(best, best);
    for (int r = 0; r < s; ++r) {
      double l = gram(idx[r], best);
      for (int c = 0; c < r; ++c) l -= chol(r, c) * chol(s, c);
      l /= chol(r, r);
      chol(s, r) = l;
      d2 -= l * l;
    }
    if (d2 <= 1e-12) break;  // atom numerically dependent on the active set
    chol(s, s) = std::sqrt(d2);
    double zn = beta[best];
    for (int c = 0; c < s; ++c) zn -= chol(s, c) * z[c];
    z[s] = zn / chol(s, s);

    idx.push_back(best);
    active[best] = 1;
    res2 = signal_energy - z.head(s + 1).squaredNorm();

    // back-substitute for the refit coefficients
    val.assign(idx.size(), 0.0);
    for (int r = static_cast<int>(idx.size()) - 1; r >= 0; --r) {
      double x = z[r];
      for (int c = r + 1; c < static_cast<int>(idx.size()); ++c) x -= chol(c, r) * val[c];
      val[r] = x / chol(r, r);
    }
    if (res2 <= std::max(tol2, floor2)) break;

    // corr = beta - G_S * gamma_S
    corr = beta;
    for (std::size_t j = 0; j < idx.size(); ++j) corr -= val[j] * gram.col(idx[j]);
  }
  return std::max(res2, 0.0);
}

void fix_sign(Eigen::VectorXd& u, Eigen::VectorXd& v) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (std::abs(u[i]) > 1e-12) {
      if (u[i] < 0.0) {
        u = -u;
        v = -v;
      }
      return;
    }
  }
}

Eigen::VectorXd random_unit_atom(Rng& rng, Eigen::Index dim) {
  Eigen::VectorXd a(dim);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < dim; ++i) a[i] = rng.normal();
    norm = a.norm();
  } while (norm < 1e-12);
  return a / norm;
}

}  // namespace

Eigen::VectorXd omp(const Dictionary& dict, const Eigen::VectorXd& signal, int max_sparsity,
                    double residual_tol) {
  const int R = dict.atom_dim();
  const int M = dict.num_atoms();
  if (signal.size() != R) throw std::invalid_argument("omp: signal length mismatch");
  if (max_sparsity < 0 || max_sparsity > R)
    throw std::invalid_argument("omp: max_sparsity out of [0, R]");
  if (residual_tol < 0.0) throw std::invalid_argument("omp: negative residual_tol");

  const Eigen::MatrixXd gram = dict.atoms.transpose() * dict.atoms;
  const Eigen::VectorXd beta = dict.atoms.transpose() * signal;
  std::vector<int> idx;
  std::vector<double> val;
  omp_gram(gram, beta, signal.squaredNorm(), max_sparsity, residual_tol, idx, val);

  Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(M);
  for (std::size_t j = 0; j < idx.size(); ++j) coeffs[idx[j]] = val[j];
  return coeffs;
}

Dictionary ksvd_train(const Eigen::MatrixXd& signals, int num_atoms, int sparsity, int iterations,
                      std::uint64_t seed, std::vector<double>* objective_trace) {
  const Eigen::Index R = signals.rows();
  const Eigen::Index N = signals.cols();
  if (N < num_atoms) throw std::invalid_argument("ksvd_train: fewer signals than atoms");
  if (sparsity < 1) throw std::invalid_argument("ksvd_train: sparsity must be >= 1");
  if (iterations < 1) throw std::invalid_argument("ksvd_train: iterations must be >= 1");
  if (objective_trace) objective_trace->clear();

  Rng rng(seed);
  Eigen::MatrixXd atoms(R, num_atoms);

  // init: distinct randomly chosen signals, normalized
  {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(N));
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      std::swap(order[i], order[i + rng.uniform_int(order.size() - i)]);
    }
    int chosen = 0;
    for (Eigen::Index cand : order) {
      if (chosen == num_atoms) break;
      const double norm = signals.col(cand).norm();
      if (norm < 1e-12) continue;
      Eigen::VectorXd a = signals.col(cand) / norm;
      bool dup = false;
      for (int j = 0; j < chosen && !dup; ++j) dup = std::abs(a.dot(atoms.col(j))) > kDuplicateIp;
      if (dup) continue;
      atoms.col(chosen++) = a;
    }
    if (chosen == 0) throw std::invalid_argument("ksvd_train: degenerate all-zero signals");
    if (chosen == 1 && num_atoms > 1)
      throw std::invalid_argument("ksvd_train: degenerate corpus, all signals identical");
    while (chosen < num_atoms) atoms.col(chosen++) = random_unit_atom(rng, R);
  }

  std::vector<std::vector<int>> code_idx(static_cast<std::size_t>(N));
  std::vector<std::vector<double>> code_val(static_cast<std::size_t>(N));
  std::vector<double> res2(static_cast<std::size_t>(N), 0.0);

  for (int iter = 0; iter < iterations; ++iter) {
    // sparse coding stage
    const Eigen::MatrixXd gram = atoms.transpose() * atoms;
    parallel_for(static_cast<std::size_t>(N), 64, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        const Eigen::VectorXd beta = atoms.transpose() * signals.col(static_cast<Eigen::Index>(i));
        res2[i] = omp_gram(gram, beta, signals.col(static_cast<Eigen::Index>(i)).squaredNorm(),
                           sparsity, 0.0, code_idx[i], code_val[i]);
      }
    });
    if (objective_trace)
      objective_trace->push_back(std::accumulate(res2.begin(), res2.end(), 0.0));

    // users of each atom
    std::vector<std::vector<int>> users(static_cast<std::size_t>(num_atoms));
    for (Eigen::Index i = 0; i < N; ++i) {
      for (std::size_t j = 0; j < code_idx[i].size(); ++j) {
        if (code_val[i][j] != 0.0) users[code_idx[i][j]].push_back(static_cast<int>(i));
      }
    }

    // atom-by-atom rank-1 updates (sequential: each update sees the latest D)
    std::vector<int> dead;
    for (int j = 0; j < num_atoms; ++j) {
      const auto& I = users[j];
      if (I.empty()) {
        dead.push_back(j);
        continue;
      }
      // restricted residual with atom j's contribution added back
      Eigen::MatrixXd E(R, static_cast<Eigen::Index>(I.size()));
      for (std::size_t u = 0; u < I.size(); ++u) {
        const int s = I[u];
        Eigen::VectorXd e = signals.col(s);
        for (std::size_t q = 0; q < code_idx[s].size(); ++q) {
          if (code_idx[s][q] != j) e -= code_val[s][q] * atoms.col(code_idx[s][q]);
        }
        E.col(static_cast<Eigen::Index>(u)) = e;
      }
      if (E.squaredNorm() < 1e-28) {
        // users are fully represented without this atom; retire it
        for (int s : I) {
          for (std::size_t q = 0; q < code_idx[s].size(); ++q)
            if (code_idx[s][q] == j) code_val[s][q] = 0.0;
        }
        dead.push_back(j);
        continue;
      }
      // dominant singular pair by power iteration, warm-started on the atom
      Eigen::VectorXd u = atoms.col(j);
      Eigen::VectorXd v;
      double sigma = 0.0;
      for (int it = 0; it < 100; ++it) {
        v = E.transpose() * u;
        const double vn = v.norm();
        if (vn < 1e-300) {
          v.setZero();
          break;
        }
        v /= vn;
        Eigen::VectorXd u_next = E * v;
        sigma = u_next.norm();
        u_next /= sigma;
        const double delta = (u_next - u).norm();
        u = u_next;
        if (delta < 1e-10) break;
      }
      fix_sign(u, v);
      atoms.col(j) = u;
      for (std::size_t q = 0; q < I.size(); ++q) {
        const int s = I[q];
        for (std::size_t t = 0; t < code_idx[s].size(); ++t) {
          if (code_idx[s][t] == j) code_val[s][t] = sigma * v[static_cast<Eigen::Index>(q)];
        }
      }
    }

    // replace dead atoms with the worst-represented signals
    if (!dead.empty()) {
      for (Eigen::Index i = 0; i < N; ++i) {
        Eigen::VectorXd e = signals.col(i);
        for (std::size_t q = 0; q < code_idx[i].size(); ++q)
          e -= code_val[i][q] * atoms.col(code_idx[i][q]);
        res2[static_cast<std::size_t>(i)] = e.squaredNorm();
      }
      std::vector<char> taken(static_cast<std::size_t>(N), 0);
      for (int j : dead) {
        int worst = -1;
        double worst_e = -1.0;
        for (Eigen::Index i = 0; i < N; ++i) {
          if (taken[static_cast<std::size_t>(i)]) continue;
          if (signals.col(i).norm() < 1e-12) continue;
          if (res2[static_cast<std::size_t>(i)] > worst_e) {
            worst_e = res2[static_cast<std::size_t>(i)];
            worst = static_cast<int>(i);
          }
        }
        if (worst >= 0) {
          taken[static_cast<std::size_t>(worst)] = 1;
          atoms.col(j) = signals.col(worst) / signals.col(worst).norm();
        } else {
          atoms.col(j) = random_unit_atom(rng, R);
        }
      }
    }

    // scrub near-duplicate columns (keeps the Dictionary invariant)
    for (int j = 1; j < num_atoms; ++j) {
      bool dup = false;
      for (int i = 0; i < j && !dup; ++i) dup = std::abs(atoms.col(i).dot(atoms.col(j))) > kDuplicateIp;
      if (dup) atoms.col(j) = random_unit_atom(rng, R);
    }
  }

  return Dictionary{std::move(atoms)};
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms unsupported");

template <typename T>
void write_le(std::ostream& out, T value) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char buf[sizeof(T)];
  in.read(reinterpret_cast<char*>(buf), sizeof(T));
  if (!in) throw std::runtime_error("dictionary file: truncated");
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T value;
  std::memcpy(&value, buf, sizeof(T));
  return value;
}

}  // namespace

void save_dictionary(const Dictionary& dict, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("dictionary file: cannot write '" + path + "'");
  out.write("COFD", 4);
  write_le<std::uint32_t>(out, 1);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dict.atom_dim()));
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dict.num_atoms()));
  for (int c = 0; c < dict.num_atoms(); ++c)
    for (int r = 0; r < dict.atom_dim(); ++r) write_le<double>(out, dict.atoms(r, c));
  if (!out) throw std::runtime_error("dictionary file: write failed for '" + path + "'");
}

Dictionary load_dictionary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("dictionary file: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "COFD", 4) != 0)
    throw std::runtime_error("dictionary file: bad magic");
  const auto version = read_le<std::uint32_t>(in);
  if (version != 1) throw std::runtime_error("dictionary file: unsupported version");
  const auto R = read_le<std::uint32_t>(in);
  const auto M = read_le<std::uint32_t>(in);
  if (R == 0 || M == 0 || R > (1u << 20) || M > (1u << 20))
    throw std::runtime_error("dictionary file: implausible dimensions");
  Dictionary dict;
  dict.atoms.resize(R, M);
  for (std::uint32_t c = 0; c < M; ++c)
    for (std::uint32_t r = 0; r < R; ++r) dict.atoms(r, c) = read_le<double>(in);
  if (!dict.atoms.allFinite()) throw std::runtime_error("dictionary file: non-finite atom values");
  return dict;
}

}  // namespace cofib
