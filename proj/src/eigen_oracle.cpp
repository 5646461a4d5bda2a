#include "unifilter/eigen_oracle.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

namespace unifilter {

Matrix dense_propagation(const Graph& g, PropagationKind kind) {
  const Index n = g.num_nodes();
  const Index shift = kind == PropagationKind::SelfLoops ? 1 : 0;
  Vector isd(n);
  for (Index u = 0; u < n; ++u) {
    const Index d = g.degree(u) + shift;
    if (d == 0) throw Error(fmt::format("node {} is isolated", u));
    isd[u] = 1.0 / std::sqrt(static_cast<double>(d));
  }
  Matrix p = Matrix::Zero(n, n);
  for (Index u = 0; u < n; ++u) {
    if (shift) p(u, u) = isd[u] * isd[u];
    for (Index v : g.neighbors(u)) p(u, v) = isd[u] * isd[v];
  }
  return p;
}

Matrix dense_laplacian(const Graph& g) {
  const Index n = g.num_nodes();
  return Matrix::Identity(n, n) - dense_propagation(g);
}

EigenDecomposition dense_eigen_oracle(const Graph& g, Index node_cap) {
  if (g.num_nodes() > node_cap)
    throw Error(fmt::format("dense eigen oracle refused: n={} exceeds cap {}", g.num_nodes(),
                            node_cap));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense_laplacian(g));
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

double spectral_form_frequency(const EigenDecomposition& eig, const Vector& x) {
  const double norm = x.norm();
  if (!(norm > 0.0)) throw Error("zero signal");
  const Vector coeffs = eig.eigenvectors.transpose() * (x / norm);
  return eig.eigenvalues.dot(coeffs.cwiseProduct(coeffs)) / 2.0;
}

}  // namespace unifilter
