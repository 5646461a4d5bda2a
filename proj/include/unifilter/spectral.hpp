#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "unifilter/graph.hpp"
#include "unifilter/rng.hpp"
#include "unifilter/types.hpp"

namespace unifilter {

/// Spectral signal frequency x^T L x / 2 of the unit-normalised signal, with
/// L = I - D^{-1/2} A D^{-1/2}. Lies in [0, 1]; values within 1e-12 outside
/// are clamped, anything further is a logic error and throws.
double signal_frequency(const Graph& g, std::span<const double> x);
double signal_frequency(const Graph& g, const Vector& x);

/// (1/n) * sum_v sum_{u in N(v)} ||X_v - X_u||^2. Each undirected edge is
/// visited once and its contribution doubled.
double dirichlet_energy(const Graph& g, const Matrix& x);

/// Closed form (n + 1 - 2 a^2) / (4 (n - 1)) for the expected frequency of a
/// unit signal with alignment a = phi . x to the normalised all-ones vector,
/// over random regular graphs.
double expected_frequency_regular(Index n, double alignment);

/// Exact expectation n (1 - a^2) / (2 (n - 1)) of the same quantity, obtained
/// from P(u ~ v) = t / (n - 1) without dropping cross terms. Note that it
/// vanishes at a = 1, where x is the all-ones direction and f(x) = 0 on every
/// regular graph.
double expected_frequency_regular_exact(Index n, double alignment);

/// Unit signal with the given alignment to the normalised all-ones vector
/// and a random orthogonal remainder.
Vector aligned_signal(Index n, double alignment, Rng& rng);

struct RegularFrequencySample {
  double mean = 0.0;
  double std_error = 0.0;
  Index samples = 0;
};

/// Mean f(x) over `samples` independent random `degree`-regular graphs, each
/// paired with a fresh random unit signal at `alignment`. Graph s is drawn
/// from the substream (seed, s), so the result does not depend on `workers`.
RegularFrequencySample monte_carlo_regular_frequency(Index n, Index degree, double alignment,
                                                     Index samples, std::uint64_t seed,
                                                     std::size_t workers = 1);
/// Several alignments at once: every sampled graph is shared by all of them,
/// with one fresh signal per alignment.
std::vector<RegularFrequencySample> monte_carlo_regular_frequency(
    Index n, Index degree, const std::vector<double>& alignments, Index samples,
    std::uint64_t seed, std::size_t workers = 1);

struct SpectrumEntry {
  Index hop = 0;
  double frequency = 0.0;
  double weight = 0.0;
};

struct SpectrumReport {
  std::string basis_kind;
  std::string dataset;
  std::vector<SpectrumEntry> entries;
};

/// "hop,frequency,weight" followed by one row per hop.
std::string spectrum_csv(const SpectrumReport& report);
void write_spectrum_csv(const std::filesystem::path& file, const SpectrumReport& report);

}  // namespace unifilter
