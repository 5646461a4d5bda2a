#include "unifilter/spectral.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "unifilter/io.hpp"
#include "unifilter/parallel.hpp"
#include "unifilter/random_graphs.hpp"

namespace unifilter {

double signal_frequency(const Graph& g, std::span<const double> x) {
  const Index n = g.num_nodes();
  if (static_cast<Index>(x.size()) != n)
    throw ShapeError(fmt::format("signal has length {}, graph has {} nodes", x.size(), n));
  double norm2 = 0.0;
  for (double v : x) norm2 += v * v;
  if (!(norm2 > 0.0)) throw Error("zero signal");
  if (Index u = g.first_isolated_node(); u >= 0)
    throw Error(fmt::format("node {} is isolated; normalized Laplacian undefined", u));

  std::vector<double> isd(n);
  for (Index u = 0; u < n; ++u) isd[u] = 1.0 / std::sqrt(static_cast<double>(g.degree(u)));
  // x^T L x = sum over undirected edges of (x_u/sqrt(d_u) - x_v/sqrt(d_v))^2.
  double quad = 0.0;
  for (Index u = 0; u < n; ++u)
    for (Index v : g.neighbors(u))
      if (u < v) {
        const double diff = x[u] * isd[u] - x[v] * isd[v];
        quad += diff * diff;
      }
  double f = quad / norm2 / 2.0;
  if (f > 1.0) {
    if (f > 1.0 + 1e-12) throw Error(fmt::format("frequency {} exceeds 1", f));
    f = 1.0;
  }
  return f;
}

double signal_frequency(const Graph& g, const Vector& x) {
  return signal_frequency(g, std::span<const double>(x.data(), x.size()));
}

double dirichlet_energy(const Graph& g, const Matrix& x) {
  const Index n = g.num_nodes();
  if (x.rows() != n)
    throw ShapeError(fmt::format("matrix has {} rows, graph has {} nodes", x.rows(), n));
  if (n == 0) return 0.0;
  double total = 0.0;
  for (Index u = 0; u < n; ++u)
    for (Index v : g.neighbors(u))
      if (u < v) total += (x.row(u) - x.row(v)).squaredNorm();
  return 2.0 * total / static_cast<double>(n);
}

double expected_frequency_regular(Index n, double alignment) {
  if (n < 2) throw Error("expected frequency needs n >= 2");
  const double nn = static_cast<double>(n);
  return (nn + 1.0 - 2.0 * alignment * alignment) / (4.0 * (nn - 1.0));
}

double expected_frequency_regular_exact(Index n, double alignment) {
  if (n < 2) throw Error("expected frequency needs n >= 2");
  const double nn = static_cast<double>(n);
  return nn * (1.0 - alignment * alignment) / (2.0 * (nn - 1.0));
}

Vector aligned_signal(Index n, double alignment, Rng& rng) {
  if (alignment < -1.0 || alignment > 1.0) throw Error("alignment must lie in [-1, 1]");
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  Vector r(n);
  for (Index i = 0; i < n; ++i) r[i] = rng.normal();
  r.array() -= r.mean();  // orthogonal to the all-ones direction
  r.normalize();
  Vector x = Vector::Constant(n, alignment * inv_sqrt_n) +
             std::sqrt(std::max(0.0, 1.0 - alignment * alignment)) * r;
  return x / x.norm();
}

std::vector<RegularFrequencySample> monte_carlo_regular_frequency(
    Index n, Index degree, const std::vector<double>& alignments, Index samples,
    std::uint64_t seed, std::size_t workers) {
  if (samples < 2) throw Error("need at least two Monte-Carlo samples");
  if (alignments.empty()) throw Error("no alignment values given");
  for (double a : alignments)
    if (a < -1.0 || a > 1.0) throw Error("alignment must lie in [-1, 1]");
  const std::size_t na = alignments.size();
  std::vector<double> values(static_cast<std::size_t>(samples) * na);
  parallel_for(
      static_cast<std::size_t>(samples),
      [&](std::size_t s) {
        Rng rng(splitmix64(seed + 0x51ed27ULL * (s + 1)));
        Graph g = random_regular_graph(n, degree, rng);
        for (std::size_t i = 0; i < na; ++i)
          values[s * na + i] = signal_frequency(g, aligned_signal(n, alignments[i], rng));
      },
      workers);
  std::vector<RegularFrequencySample> out(na);
  for (std::size_t i = 0; i < na; ++i) {
    double sum = 0.0;
    for (Index s = 0; s < samples; ++s) sum += values[s * na + i];
    const double mean = sum / static_cast<double>(samples);
    double var = 0.0;
    for (Index s = 0; s < samples; ++s) {
      const double d = values[s * na + i] - mean;
      var += d * d;
    }
    var /= static_cast<double>(samples - 1);
    out[i] = {mean, std::sqrt(var / static_cast<double>(samples)), samples};
  }
  return out;
}

RegularFrequencySample monte_carlo_regular_frequency(Index n, Index degree, double alignment,
                                                     Index samples, std::uint64_t seed,
                                                     std::size_t workers) {
  return monte_carlo_regular_frequency(n, degree, std::vector<double>{alignment}, samples, seed,
                                       workers)
      .front();
}

std::string spectrum_csv(const SpectrumReport& report) {
  std::string out = "hop,frequency,weight\n";
  for (const auto& e : report.entries)
    out += fmt::format("{},{},{}\n", e.hop, format_double17(e.frequency), format_double17(e.weight));
  return out;
}

void write_spectrum_csv(const std::filesystem::path& file, const SpectrumReport& report) {
  write_text(file, spectrum_csv(report));
}

}  // namespace unifilter
