#pragma once

// Dense eigendecomposition of the normalized Laplacian. O(n^3); intended for
// verifying the sparse paths on small graphs only.

#include "unifilter/graph.hpp"
#include "unifilter/types.hpp"

namespace unifilter {

struct EigenDecomposition {
  Vector eigenvalues;  // ascending
  Matrix eigenvectors; // column i pairs with eigenvalues[i]
};

inline constexpr Index kDefaultEigenNodeCap = 500;

Matrix dense_laplacian(const Graph& g);
/// Dense P = I - L (or with self-loops), for comparing against sparse apply.
Matrix dense_propagation(const Graph& g, PropagationKind kind = PropagationKind::NoSelfLoops);

/// Throws when n exceeds `node_cap`.
EigenDecomposition dense_eigen_oracle(const Graph& g, Index node_cap = kDefaultEigenNodeCap);

/// (sum_i lambda_i (U^T x)_i^2) / 2 for unit-normalised x.
double spectral_form_frequency(const EigenDecomposition& eig, const Vector& x);

}  // namespace unifilter
