#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/types.hpp"

namespace unifilter {

enum class BasisKind { Homophily, Heterophily, Orthonormal, Uni };

std::string to_string(BasisKind kind);
BasisKind parse_basis_kind(const std::string& name);

struct BasisOptions {
  /// Unit-normalise every homophily hop column. When false, hops are the raw
  /// powers P^k x.
  bool normalize_homophily = true;
  /// Re-orthogonalise each v_k against all earlier v's (two Gram-Schmidt
  /// passes). Costs O(K^2 n) per column instead of O(K n).
  bool reorthogonalize = false;
  /// Columns are distributed over this many threads.
  std::size_t workers = 1;
};

/// K + 1 matrices of shape n x d. Column j of matrices[k] is hop k of the
/// basis built from feature column j.
struct BasisTensor {
  BasisKind kind = BasisKind::Homophily;
  Index hops = 0;  // K
  std::vector<Matrix> matrices;
  double theta = 0.0;  // heterophily and uni only
  double tau = 1.0;    // uni only
  /// Sorted feature columns whose construction degenerated (zero input, zero
  /// homophily hop, or exhausted Krylov space).
  std::vector<Index> degenerate_columns;
  /// Negative radicands in the t_k update that were clamped to zero.
  Index clamp_events = 0;

  Index rows() const { return matrices.empty() ? 0 : matrices.front().rows(); }
  Index cols() const { return matrices.empty() ? 0 : matrices.front().cols(); }
  bool is_degenerate(Index column) const;
};

/// theta = (1 - h_hat) * pi / 2.
double heterophily_angle(double h_hat);

/// Output of the heterophily recurrence for a single signal.
struct HeterophilyColumn {
  std::vector<Vector> u;  // heterophily basis u_0..u_K
  std::vector<Vector> v;  // orthonormal auxiliary basis v_0..v_K
  /// First hop at which the Krylov space was exhausted, or -1. From that hop
  /// on, u repeats u_{k-1} and v is zero.
  Index degenerate_from = -1;
  Index clamp_events = 0;
};

/// Runs the heterophily recurrence on one signal: v_k is P v_{k-1} made
/// orthogonal to v_{k-1} and v_{k-2}; u_k is the normalised mean of u_0..u_{k-1}
/// pushed along v_k by t_k so every pair of u's meets at angle theta.
HeterophilyColumn heterophily_column(const PropagationOperator& op, const Vector& x, Index hops,
                                     double theta, bool reorthogonalize = false);

/// {X, PX, ..., P^K X}; columns unit-normalised unless disabled in options.
BasisTensor homophily_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                            const BasisOptions& options = {});

/// {u_0, ..., u_K} per column with theta from h_hat.
BasisTensor heterophily_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                              double h_hat, const BasisOptions& options = {});

/// {v_0, ..., v_K} per column: the orthonormal Krylov basis used to steer the
/// heterophily vectors.
BasisTensor orthonormal_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                              const BasisOptions& options = {});

/// tau * H_k + (1 - tau) * U_k columnwise. tau = 1 and tau = 0 return the
/// homophily and heterophily matrices unchanged.
BasisTensor unibasis(const PropagationOperator& op, const Matrix& x, Index hops, double h_hat,
                     double tau, const BasisOptions& options = {});

/// Mean signal frequency per hop over non-degenerate, nonzero columns.
std::vector<double> basis_spectrum(const Graph& g, const BasisTensor& basis);

/// Worst deviations from the angle law and orthonormality, over
/// non-degenerate columns.
struct BasisCheck {
  double max_pair_deviation = 0.0;  // |b_i . b_j - target| for i != j
  double max_unit_deviation = 0.0;  // |b_i . b_i - 1|
  Index columns_checked = 0;
};

/// Target dot product is cos(theta) for heterophily tensors and 0 for
/// orthonormal tensors.
BasisCheck check_basis(const BasisTensor& basis);

/// max |v_{k+1} . u_j| over j <= k, per non-degenerate column.
double max_auxiliary_leak(const BasisTensor& heterophily, const BasisTensor& orthonormal);

/// Writes hop_<k>.csv for every hop and meta.json into `dir`.
void export_basis(const std::filesystem::path& dir, const BasisTensor& basis);

}  // namespace unifilter
