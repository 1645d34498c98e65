#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "lgbh/couplings.hpp"
#include "lgbh/errors.hpp"

namespace lgbh {

constexpr std::size_t kDefaultBasisCap = 200000;

/// Fixed-photon-number Fock basis of M modes and N photons. States are
/// occupation vectors in ascending lexicographic order, (0,...,0,N) first.
class FockBasis {
 public:
  FockBasis(int modes, int photons, std::size_t cap = kDefaultBasisCap)
      : modes_(modes), photons_(photons) {
    if (modes < 1) throw ValidationError("Fock basis needs at least one mode");
    if (photons < 0) throw ValidationError("photon number must be >= 0");
    // completions_[m][n] = number of ways to place n photons in m modes.
    completions_.assign(modes + 1, std::vector<double>(photons + 1, 0.0));
    completions_[0][0] = 1.0;
    for (int m = 1; m <= modes; ++m)
      for (int n = 0; n <= photons; ++n)
        for (int v = 0; v <= n; ++v) completions_[m][n] += completions_[m - 1][n - v];
    const double dim = completions_[modes][photons];
    if (dim > static_cast<double>(cap))
      throw BasisTooLarge("Fock basis of " + std::to_string(modes) + " modes and " +
                          std::to_string(photons) + " photons has dimension " +
                          std::to_string(static_cast<long long>(dim)) + " > cap " + std::to_string(cap));
    dimension_ = static_cast<std::size_t>(dim);
    occupations_.reserve(dimension_ * modes_);
    std::vector<int> state(modes_, 0);
    enumerate(state, 0, photons_);
  }

  int modes() const { return modes_; }
  int photons() const { return photons_; }
  std::size_t dimension() const { return dimension_; }

  /// Occupation vector of basis state i.
  std::span<const int> state(std::size_t i) const {
    return {occupations_.data() + i * modes_, static_cast<std::size_t>(modes_)};
  }

  /// Position of an occupation vector in the basis (combinatorial ranking).
  std::size_t index_of(std::span<const int> occupation) const {
    double rank = 0.0;
    int remaining = photons_;
    for (int i = 0; i < modes_; ++i) {
      for (int v = 0; v < occupation[i]; ++v) rank += completions_[modes_ - i - 1][remaining - v];
      remaining -= occupation[i];
    }
    return static_cast<std::size_t>(rank);
  }

 private:
  void enumerate(std::vector<int>& state, int pos, int remaining) {
    if (pos == modes_ - 1) {
      state[pos] = remaining;
      occupations_.insert(occupations_.end(), state.begin(), state.end());
      return;
    }
    for (int v = 0; v <= remaining; ++v) {
      state[pos] = v;
      enumerate(state, pos + 1, remaining - v);
    }
  }

  int modes_;
  int photons_;
  std::size_t dimension_ = 0;
  std::vector<int> occupations_;
  std::vector<std::vector<double>> completions_;
};

/// Bose-Hubbard Hamiltonian restricted to one photon-number sector.
struct ManyBodyOperator {
  FockBasis basis;
  Eigen::SparseMatrix<complex> matrix;
};

/// Assembles
///   H = sum_a mu_a n_a + sum_{a != b} t(a,b) b_b^dag b_a
///       - s sum_{a,b} U(a,b) (3 n_a + 4 n_a n_b),
/// with s = +1 for attractive and -1 for repulsive interactions. The double
/// sum includes a = b. The hopping term is the normal-ordered form of
/// t(a,b) b_a b_b^dag; reordering would only shift mu.
inline ManyBodyOperator build_hamiltonian(const CouplingSet& cs, const FockBasis& basis) {
  const int m = cs.size();
  if (basis.modes() != m)
    throw DimensionMismatch("basis has " + std::to_string(basis.modes()) + " modes, couplings have " +
                            std::to_string(m));
  const double sign = cs.beam.interaction_sign();
  Eigen::VectorXd u_rows = cs.U.rowwise().sum();

  std::vector<Eigen::Triplet<complex>> entries;
  std::vector<int> target(m);
  for (std::size_t col = 0; col < basis.dimension(); ++col) {
    const auto n = basis.state(col);
    double diag = 0.0;
    for (int a = 0; a < m; ++a) {
      if (n[a] == 0) continue;
      diag += cs.mu(a) * n[a] - sign * 3.0 * u_rows(a) * n[a];
      for (int b = 0; b < m; ++b) diag -= sign * 4.0 * cs.U(a, b) * n[a] * n[b];
    }
    if (diag != 0.0) entries.emplace_back(col, col, diag);

    for (int a = 0; a < m; ++a) {
      if (n[a] == 0) continue;
      for (int b = 0; b < m; ++b) {
        if (b == a || cs.t(a, b) == 0.0) continue;
        std::copy(n.begin(), n.end(), target.begin());
        --target[a];
        ++target[b];
        const double boson = std::sqrt(static_cast<double>(n[a])) * std::sqrt(n[b] + 1.0);
        entries.emplace_back(basis.index_of(target), col, cs.t(a, b) * boson);
      }
    }
  }
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Eigen::SparseMatrix<complex> h(dim, dim);
  h.setFromTriplets(entries.begin(), entries.end());
  return {basis, std::move(h)};
}

/// Single-photon matrix: mu on the diagonal, hops off-diagonal, laid out like
/// the N = 1 block of build_hamiltonian (element (b, a) = t(a, b)).
inline Eigen::MatrixXcd single_particle_matrix(const CouplingSet& cs,
                                               bool include_interaction_shift = false) {
  Eigen::MatrixXcd h = cs.t.transpose();
  for (int a = 0; a < cs.size(); ++a) {
    h(a, a) = cs.mu(a);
    if (include_interaction_shift)
      h(a, a) -= cs.beam.interaction_sign() * (3.0 * cs.U.row(a).sum() + 4.0 * cs.U(a, a));
  }
  return h;
}

/// Eigenvalues of the single-photon matrix, ascending. With
/// include_interaction_shift the diagonal also carries the N = 1 interaction
/// energy -s (3 sum_b U(a,b) + 4 U(a,a)), reproducing the N = 1 sector.
inline Eigen::VectorXd single_particle_spectrum(const CouplingSet& cs,
                                                bool include_interaction_shift = false) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(
      single_particle_matrix(cs, include_interaction_shift), Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

struct EigenOptions {
  std::size_t dense_threshold = 2000;  // dense solver below this dimension
  double tolerance = 1e-9;             // residual relative to ||H||_inf
  int max_restarts = 2000;
  unsigned seed = 20240607;            // start vector of the iterative path
};

struct EigenResult {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns
  double max_residual = 0.0;
  double norm_estimate = 0.0;
  bool dense = true;
};

/// Max absolute row sum; bounds the spectral norm of a Hermitian matrix.
inline double inf_norm(const Eigen::SparseMatrix<complex>& h) {
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(h.rows());
  for (int k = 0; k < h.outerSize(); ++k)
    for (Eigen::SparseMatrix<complex>::InnerIterator it(h, k); it; ++it) rows(it.row()) += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

namespace detail {

inline double max_residual(const Eigen::SparseMatrix<complex>& h, const Eigen::VectorXd& values,
                           const Eigen::MatrixXcd& vectors) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < values.size(); ++j) {
    const Eigen::VectorXcd r = h * vectors.col(j) - values(j) * vectors.col(j);
    worst = std::max(worst, r.norm());
  }
  return worst;
}

/// Thick-restart Lanczos with full reorthogonalization. The projected problem
/// is solved by Rayleigh-Ritz on V^H H V; on restart the lowest Ritz vectors
/// are kept and the residual of the first unconverged one continues the
/// Krylov sequence. Finds each eigenvalue once, so exactly degenerate
/// eigenvalues beyond the first copy may be missed.
inline EigenResult lanczos(const Eigen::SparseMatrix<complex>& h, int count, const EigenOptions& opt,
                           double norm) {
  const Eigen::Index n = h.rows();
  const Eigen::Index basis_max = std::min<Eigen::Index>(n, std::max(2 * count + 20, 60));
  const Eigen::Index keep = std::min<Eigen::Index>(basis_max - 2, count + std::max(count, 8));
  Eigen::MatrixXcd v(n, basis_max), w(n, basis_max);
  Eigen::Index cols = 0;
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> gauss;
  auto random_vector = [&] {
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = complex(gauss(rng), gauss(rng));
    return x;
  };
  auto append = [&](Eigen::VectorXcd x) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      const double before = x.norm();
      for (int pass = 0; pass < 2; ++pass)
        if (cols > 0) x -= v.leftCols(cols) * (v.leftCols(cols).adjoint() * x);
      if (x.norm() > 1e-10 * before && x.norm() > 0.0) break;
      x = random_vector();  // invariant subspace reached
    }
    x.normalize();
    v.col(cols) = x;
    w.col(cols) = h * x;
    ++cols;
  };

  append(random_vector());
  EigenResult result;
  result.dense = false;
  result.norm_estimate = norm;
  for (int restart = 0; restart <= opt.max_restarts; ++restart) {
    while (cols < basis_max) append(w.col(cols - 1));
    Eigen::MatrixXcd t = v.leftCols(cols).adjoint() * w.leftCols(cols);
    t = 0.5 * (t + t.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ritz(t);
    const Eigen::MatrixXcd& s = ritz.eigenvectors();
    Eigen::Index first_bad = -1;
    double worst = 0.0;
    for (Eigen::Index j = 0; j < count; ++j) {
      const Eigen::VectorXcd r = w.leftCols(cols) * s.col(j) - ritz.eigenvalues()(j) * (v.leftCols(cols) * s.col(j));
      const double rn = r.norm();
      worst = std::max(worst, rn);
      if (first_bad < 0 && rn > opt.tolerance * norm) first_bad = j;
    }
    result.max_residual = worst;
    if (first_bad < 0 || cols == n) {
      result.values = ritz.eigenvalues().head(count);
      result.vectors = v.leftCols(cols) * s.leftCols(count);
      result.max_residual = max_residual(h, result.values, result.vectors);
      if (result.max_residual > opt.tolerance * norm)
        throw ConvergenceFailure("Lanczos eigenpairs inaccurate", result.max_residual);
      return result;
    }
    const Eigen::VectorXcd r = w.leftCols(cols) * s.col(first_bad) -
                               ritz.eigenvalues()(first_bad) * (v.leftCols(cols) * s.col(first_bad));
    const Eigen::MatrixXcd v_keep = v.leftCols(cols) * s.leftCols(keep);
    const Eigen::MatrixXcd w_keep = w.leftCols(cols) * s.leftCols(keep);
    v.leftCols(keep) = v_keep;
    w.leftCols(keep) = w_keep;
    cols = keep;
    append(r);
  }
  throw ConvergenceFailure("Lanczos did not converge", result.max_residual);
}

}  // namespace detail

/// Lowest `count` eigenpairs, ascending; residuals are at most
/// tolerance * ||H||_inf. Dense below options.dense_threshold, Lanczos above.
inline EigenResult eigensolve(const ManyBodyOperator& op, int count, const EigenOptions& options = {}) {
  const auto dim = static_cast<Eigen::Index>(op.basis.dimension());
  if (count < 1) throw ValidationError("eigensolve needs count >= 1");
  count = static_cast<int>(std::min<Eigen::Index>(count, dim));
  const double norm = std::max(inf_norm(op.matrix), 1e-300);
  if (static_cast<std::size_t>(dim) >= options.dense_threshold && count < dim) {
    return detail::lanczos(op.matrix, count, options, norm);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver{Eigen::MatrixXcd(op.matrix)};
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("dense eigensolver failed", -1.0);
  EigenResult result;
  result.values = solver.eigenvalues().head(count);
  result.vectors = solver.eigenvectors().leftCols(count);
  result.norm_estimate = norm;
  result.max_residual = detail::max_residual(op.matrix, result.values, result.vectors);
  if (result.max_residual > options.tolerance * norm)
    throw ConvergenceFailure("dense eigenpairs inaccurate", result.max_residual);
  return result;
}

/// Largest dimension the dense propagator accepts.
constexpr std::size_t kMaxPropagatorDimension = 6000;

/// exp(-i H t) through one dense eigendecomposition, reusable across times.
class Propagator {
 public:
  explicit Propagator(const ManyBodyOperator& op) {
    if (op.basis.dimension() > kMaxPropagatorDimension)
      throw BasisTooLarge("time evolution is dense; dimension " + std::to_string(op.basis.dimension()) +
                          " exceeds " + std::to_string(kMaxPropagatorDimension));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver{Eigen::MatrixXcd(op.matrix)};
    energies_ = solver.eigenvalues();
    vectors_ = solver.eigenvectors();
  }

  Eigen::VectorXcd evolve(const Eigen::VectorXcd& state, double time) const {
    if (state.size() != vectors_.rows())
      throw DimensionMismatch("state has " + std::to_string(state.size()) + " amplitudes, basis has " +
                              std::to_string(vectors_.rows()));
    if (time == 0.0) return state;
    Eigen::VectorXcd coeffs = vectors_.adjoint() * state;
    for (Eigen::Index i = 0; i < coeffs.size(); ++i) coeffs(i) *= std::polar(1.0, -energies_(i) * time);
    return vectors_ * coeffs;
  }

 private:
  Eigen::VectorXd energies_;
  Eigen::MatrixXcd vectors_;
};

inline Eigen::VectorXcd time_evolve(const ManyBodyOperator& op, const Eigen::VectorXcd& state, double time) {
  if (state.size() != static_cast<Eigen::Index>(op.basis.dimension()))
    throw DimensionMismatch("state dimension does not match the operator");
  if (time == 0.0) return state;
  return Propagator(op).evolve(state, time);
}

/// <psi|H|psi>.
inline complex expectation(const ManyBodyOperator& op, const Eigen::VectorXcd& state) {
  return state.dot(op.matrix * state);
}

/// <n_a> for every mode in the given state.
inline Eigen::VectorXd occupations(const FockBasis& basis, const Eigen::VectorXcd& state) {
  Eigen::VectorXd occ = Eigen::VectorXd::Zero(basis.modes());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double weight = std::norm(state(static_cast<Eigen::Index>(i)));
    const auto n = basis.state(i);
    for (int a = 0; a < basis.modes(); ++a) occ(a) += weight * n[a];
  }
  return occ;
}

}  // namespace lgbh
