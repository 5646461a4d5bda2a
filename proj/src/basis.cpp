#include "unifilter/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "unifilter/io.hpp"
#include "unifilter/log.hpp"
#include "unifilter/parallel.hpp"
#include "unifilter/spectral.hpp"

namespace unifilter {
namespace {

constexpr double kKrylovExhausted = 1e-10;
constexpr double kCosUnderflow = 1e-8;

void check_hops(Index hops) {
  if (hops < 0) throw Error(fmt::format("hop count must be >= 0, got {}", hops));
}

void check_rows(const PropagationOperator& op, const Matrix& x) {
  if (x.rows() != op.size())
    throw ShapeError(fmt::format("feature matrix has {} rows, graph has {} nodes", x.rows(),
                                 op.size()));
}

std::vector<Matrix> zero_hops(Index hops, Index n, Index d) {
  return std::vector<Matrix>(static_cast<std::size_t>(hops + 1), Matrix::Zero(n, d));
}

std::vector<Index> collect(const std::vector<char>& flags) {
  std::vector<Index> out;
  for (std::size_t j = 0; j < flags.size(); ++j)
    if (flags[j]) out.push_back(static_cast<Index>(j));
  return out;
}

// Runs the recurrence once per column and returns both u and v tensors.
struct HeterophilyPair {
  BasisTensor u;
  BasisTensor v;
};

HeterophilyPair heterophily_pair(const PropagationOperator& op, const Matrix& x, Index hops,
                                 double theta, const BasisOptions& options) {
  check_hops(hops);
  check_rows(op, x);
  const Index n = x.rows();
  const Index d = x.cols();
  HeterophilyPair out;
  out.u.kind = BasisKind::Heterophily;
  out.v.kind = BasisKind::Orthonormal;
  out.u.hops = out.v.hops = hops;
  out.u.theta = out.v.theta = theta;
  out.u.matrices = zero_hops(hops, n, d);
  out.v.matrices = zero_hops(hops, n, d);
  std::vector<char> degenerate(static_cast<std::size_t>(d), 0);
  std::vector<Index> clamps(static_cast<std::size_t>(d), 0);

  parallel_for(
      static_cast<std::size_t>(d),
      [&](std::size_t j) {
        const Vector column = x.col(static_cast<Index>(j));
        if (!(column.norm() > 0.0)) {
          degenerate[j] = 1;
          return;
        }
        HeterophilyColumn c = heterophily_column(op, column, hops, theta, options.reorthogonalize);
        for (Index k = 0; k <= hops; ++k) {
          out.u.matrices[k].col(static_cast<Index>(j)) = c.u[k];
          out.v.matrices[k].col(static_cast<Index>(j)) = c.v[k];
        }
        degenerate[j] = c.degenerate_from >= 0;
        clamps[j] = c.clamp_events;
      },
      options.workers);

  out.u.degenerate_columns = out.v.degenerate_columns = collect(degenerate);
  for (Index c : clamps) out.u.clamp_events += c;
  out.v.clamp_events = out.u.clamp_events;
  if (!out.u.degenerate_columns.empty())
    warn(fmt::format("{} of {} feature column(s) degenerated during heterophily construction",
                     out.u.degenerate_columns.size(), d));
  return out;
}

}  // namespace

std::string to_string(BasisKind kind) {
  switch (kind) {
    case BasisKind::Homophily: return "homophily";
    case BasisKind::Heterophily: return "heterophily";
    case BasisKind::Orthonormal: return "orthonormal";
    case BasisKind::Uni: return "uni";
  }
  return "unknown";
}

BasisKind parse_basis_kind(const std::string& name) {
  if (name == "homophily" || name == "homo") return BasisKind::Homophily;
  if (name == "heterophily" || name == "hetero") return BasisKind::Heterophily;
  if (name == "orthonormal" || name == "ortho") return BasisKind::Orthonormal;
  if (name == "uni") return BasisKind::Uni;
  throw Error(fmt::format("unknown basis kind \"{}\"", name));
}

bool BasisTensor::is_degenerate(Index column) const {
  return std::binary_search(degenerate_columns.begin(), degenerate_columns.end(), column);
}

double heterophily_angle(double h_hat) {
  if (!(h_hat >= 0.0 && h_hat <= 1.0))
    throw Error(fmt::format("homophily ratio must be in [0,1], got {}", h_hat));
  return (1.0 - h_hat) * std::numbers::pi / 2.0;
}

HeterophilyColumn heterophily_column(const PropagationOperator& op, const Vector& x, Index hops,
                                     double theta, bool reorthogonalize) {
  check_hops(hops);
  const Index n = op.size();
  if (x.size() != n) throw ShapeError(fmt::format("signal length {} != {}", x.size(), n));
  const double norm = x.norm();
  if (!(norm > 0.0)) throw Error("zero signal");

  HeterophilyColumn c;
  c.u.reserve(hops + 1);
  c.v.reserve(hops + 1);
  c.u.push_back(x / norm);
  c.v.push_back(c.u[0]);
  Vector s = c.u[0];
  const double cos_theta = std::cos(theta);
  Vector w(n);

  for (Index k = 1; k <= hops; ++k) {
    if (c.degenerate_from >= 0) {
      c.u.push_back(c.u.back());
      c.v.push_back(Vector::Zero(n));
      continue;
    }
    // Three-term recurrence: orthogonalise P v_{k-1} against v_{k-1}, v_{k-2}.
    op.apply(std::span<const double>(c.v[k - 1].data(), n), std::span<double>(w.data(), n));
    w -= w.dot(c.v[k - 1]) * c.v[k - 1];
    if (k >= 2) w -= w.dot(c.v[k - 2]) * c.v[k - 2];
    if (reorthogonalize) {
      for (int pass = 0; pass < 2; ++pass)
        for (Index i = 0; i < k; ++i) w -= w.dot(c.v[i]) * c.v[i];
    }
    const double wnorm = w.norm();
    if (wnorm < kKrylovExhausted) {
      c.degenerate_from = k;
      c.u.push_back(c.u.back());
      c.v.push_back(Vector::Zero(n));
      continue;
    }
    c.v.push_back(w / wnorm);
    const Vector& vk = c.v[k];

    const double kk = static_cast<double>(k);
    Vector uk;
    if (cos_theta < kCosUnderflow) {
      // t_k -> infinity; the normalised update tends to v_k itself.
      uk = vk;
    } else {
      uk = s / kk;
      const double a = s.dot(c.u[k - 1]) / (kk * cos_theta);
      double radicand = a * a - ((kk - 1.0) * cos_theta + 1.0) / kk;
      if (radicand < 0.0) {
        ++c.clamp_events;
        radicand = 0.0;
      }
      const double t = std::sqrt(radicand);
      uk += t * vk;
      uk /= uk.norm();
    }
    s += uk;
    c.u.push_back(std::move(uk));
  }
  return c;
}

BasisTensor homophily_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                            const BasisOptions& options) {
  check_hops(hops);
  check_rows(op, x);
  const Index n = x.rows();
  const Index d = x.cols();
  BasisTensor b;
  b.kind = BasisKind::Homophily;
  b.hops = hops;
  b.matrices = zero_hops(hops, n, d);
  std::vector<char> degenerate(static_cast<std::size_t>(d), 0);

  parallel_for(
      static_cast<std::size_t>(d),
      [&](std::size_t jj) {
        const Index j = static_cast<Index>(jj);
        Vector current = x.col(j);
        Vector next(n);
        for (Index k = 0; k <= hops; ++k) {
          if (k > 0) {
            op.apply(std::span<const double>(current.data(), n), std::span<double>(next.data(), n));
            current.swap(next);
          }
          if (options.normalize_homophily) {
            const double norm = current.norm();
            if (!(norm > 0.0)) {
              degenerate[jj] = 1;
              current.setZero();
              continue;
            }
            current /= norm;
          } else if (!(current.norm() > 0.0)) {
            degenerate[jj] = 1;
          }
          b.matrices[k].col(j) = current;
        }
      },
      options.workers);

  b.degenerate_columns = collect(degenerate);
  return b;
}

BasisTensor heterophily_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                              double h_hat, const BasisOptions& options) {
  return heterophily_pair(op, x, hops, heterophily_angle(h_hat), options).u;
}

BasisTensor orthonormal_basis(const PropagationOperator& op, const Matrix& x, Index hops,
                              const BasisOptions& options) {
  // theta does not influence v; pi/4 avoids the cos-underflow branch.
  BasisTensor v = heterophily_pair(op, x, hops, std::numbers::pi / 4.0, options).v;
  v.theta = 0.0;
  return v;
}

BasisTensor unibasis(const PropagationOperator& op, const Matrix& x, Index hops, double h_hat,
                     double tau, const BasisOptions& options) {
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(fmt::format("tau must be in [0,1], got {}", tau));
  const double theta = heterophily_angle(h_hat);
  BasisTensor out;
  if (tau == 1.0) {
    out = homophily_basis(op, x, hops, options);
  } else if (tau == 0.0) {
    out = heterophily_pair(op, x, hops, theta, options).u;
  } else {
    BasisTensor hom = homophily_basis(op, x, hops, options);
    BasisTensor het = heterophily_pair(op, x, hops, theta, options).u;
    out.matrices.reserve(hom.matrices.size());
    for (std::size_t k = 0; k < hom.matrices.size(); ++k)
      out.matrices.push_back(tau * hom.matrices[k] + (1.0 - tau) * het.matrices[k]);
    std::set_union(hom.degenerate_columns.begin(), hom.degenerate_columns.end(),
                   het.degenerate_columns.begin(), het.degenerate_columns.end(),
                   std::back_inserter(out.degenerate_columns));
    out.clamp_events = het.clamp_events;
  }
  out.kind = BasisKind::Uni;
  out.hops = hops;
  out.theta = theta;
  out.tau = tau;
  return out;
}

std::vector<double> basis_spectrum(const Graph& g, const BasisTensor& basis) {
  if (basis.rows() != g.num_nodes())
    throw ShapeError(fmt::format("basis has {} rows, graph has {} nodes", basis.rows(),
                                 g.num_nodes()));
  std::vector<double> spectrum;
  spectrum.reserve(basis.matrices.size());
  for (std::size_t k = 0; k < basis.matrices.size(); ++k) {
    const Matrix& m = basis.matrices[k];
    double sum = 0.0;
    Index used = 0;
    for (Index j = 0; j < m.cols(); ++j) {
      if (basis.is_degenerate(j)) continue;
      const Vector col = m.col(j);
      if (!(col.norm() > 0.0)) continue;
      sum += signal_frequency(g, col);
      ++used;
    }
    if (used == 0) throw Error(fmt::format("no usable column at hop {}", k));
    spectrum.push_back(sum / static_cast<double>(used));
  }
  return spectrum;
}

BasisCheck check_basis(const BasisTensor& basis) {
  const double target =
      basis.kind == BasisKind::Orthonormal ? 0.0 : std::cos(basis.theta);
  BasisCheck check;
  for (Index j = 0; j < basis.cols(); ++j) {
    if (basis.is_degenerate(j)) continue;
    ++check.columns_checked;
    for (std::size_t a = 0; a < basis.matrices.size(); ++a) {
      const auto ca = basis.matrices[a].col(j);
      check.max_unit_deviation = std::max(check.max_unit_deviation, std::abs(ca.dot(ca) - 1.0));
      for (std::size_t b = a + 1; b < basis.matrices.size(); ++b) {
        const double dot = ca.dot(basis.matrices[b].col(j));
        check.max_pair_deviation = std::max(check.max_pair_deviation, std::abs(dot - target));
      }
    }
  }
  return check;
}

double max_auxiliary_leak(const BasisTensor& heterophily, const BasisTensor& orthonormal) {
  double worst = 0.0;
  for (Index j = 0; j < heterophily.cols(); ++j) {
    if (heterophily.is_degenerate(j)) continue;
    for (std::size_t k = 1; k < orthonormal.matrices.size(); ++k)
      for (std::size_t i = 0; i < k; ++i)
        worst = std::max(worst, std::abs(orthonormal.matrices[k].col(j).dot(
                                    heterophily.matrices[i].col(j))));
  }
  return worst;
}

void export_basis(const std::filesystem::path& dir, const BasisTensor& basis) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < basis.matrices.size(); ++k)
    write_features(dir / fmt::format("hop_{}.csv", k), basis.matrices[k]);
  nlohmann::json meta;
  meta["kind"] = to_string(basis.kind);
  meta["K"] = basis.hops;
  meta["theta"] = basis.theta;
  meta["tau"] = basis.tau;
  meta["degenerate_columns"] = basis.degenerate_columns;
  meta["clamp_events"] = basis.clamp_events;
  write_text(dir / "meta.json", meta.dump(2) + "\n");
}

}  // namespace unifilter
