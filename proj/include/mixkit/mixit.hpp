#pragma once

#include <cstdint>
#include <vector>

#include "mixkit/types.hpp"

namespace mixkit {
namespace mixit {

inline constexpr std::uint64_t kDefaultSearchCap = 1ull << 20;

/// N x M zero/one mixing matrix with exactly one 1 per column, stored as the
/// reference index each source column is assigned to.
struct BinaryMixingMatrix {
  std::size_t num_refs = 0;
  std::vector<int> ref_of_source;  // size M, entries in [0, num_refs)

  std::size_t num_sources() const { return ref_of_source.size(); }
  int entry(std::size_t n, std::size_t m) const {
    return ref_of_source[m] == static_cast<int>(n) ? 1 : 0;
  }
  bool operator==(const BinaryMixingMatrix&) const = default;
};

struct MixitResult {
  BinaryMixingMatrix assignment;
  double total_loss = 0.0;
  std::vector<double> per_reference_loss;
};

/// Inner products shared by the exhaustive search and the least-squares path.
/// Both evaluate the Eq.-style objective through the same numbers, which is
/// what makes the bound efficient >= exhaustive hold exactly.
struct MixitPrecomp {
  std::size_t num_refs = 0;
  std::size_t num_sources = 0;
  std::vector<double> gram;        // M*M, <s_m, s_m'>
  std::vector<double> cross;       // N*M, <x_n, s_m>
  std::vector<double> ref_energy;  // N,   ||x_n||^2
};

/// Throws std::invalid_argument if any reference mixture is all-zero.
MixitPrecomp make_precomp(const MixtureBatch& batch, const SourceSet& s);

/// Per-reference thresholded SNR losses of the remix A*s, from precomputed
/// inner products only.
std::vector<double> assignment_losses(const MixitPrecomp& pre,
                                      const BinaryMixingMatrix& assignment,
                                      double snr_max_db);

/// Remixed waveforms A*s (row n = sum of sources assigned to reference n).
std::vector<Waveform> remix(const SourceSet& s,
                            const BinaryMixingMatrix& assignment);

/// Minimizes the summed thresholded SNR loss over all N^M binary mixing
/// matrices. Assignments are enumerated in lexicographic column order and the
/// first minimum is kept, so ties break to the lexicographically smallest
/// assignment. Throws std::runtime_error when N^M exceeds search_cap.
MixitResult exhaustive_mixit(const MixtureBatch& batch, const SourceSet& s,
                             double snr_max_db,
                             std::uint64_t search_cap = kDefaultSearchCap);

/// Real-valued least-squares mixing matrix A = X S^T (S S^T + rho I)^{-1}
/// with ridge rho = 1e-6 * trace(S S^T) / M. Always finite, also for
/// rank-deficient S (duplicated or silent sources).
Matrix least_squares_mixing(const MixtureBatch& batch, const SourceSet& s);

/// Per column, 1 at the row of the maximum value, 0 elsewhere; ties break to
/// the lowest row index.
BinaryMixingMatrix project_to_binary(const Matrix& mixing);

/// Least-squares mixing projected onto the binary constraint set, then scored
/// with the same objective as the exhaustive search.
MixitResult efficient_mixit(const MixtureBatch& batch, const SourceSet& s,
                            double snr_max_db);

/// Gradient of the summed thresholded SNR loss with respect to the sources,
/// holding the assignment fixed (envelope rule).
SourceSet mixit_loss_gradient(const MixtureBatch& batch, const SourceSet& s,
                              double snr_max_db,
                              const BinaryMixingMatrix& assignment);

/// N^M with saturation, used for the feasibility cap.
std::uint64_t assignment_count(std::size_t num_refs, std::size_t num_sources);

}  // namespace mixit
}  // namespace mixkit
