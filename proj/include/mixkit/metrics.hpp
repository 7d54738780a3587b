#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mixkit/mixit.hpp"
#include "mixkit/types.hpp"

namespace mixkit {
namespace metrics {

/// Display cap for infinite/huge SI-SNR values; applied by report writers,
/// never inside si_snr itself.
inline constexpr double kDisplayCapDb = 100.0;

/// Finite surrogate for infinite SI-SNR sentinels inside Hungarian costs.
inline constexpr double kSentinelCost = 1e9;

/// A reference counts as active when its plain RMS exceeds this factor times
/// the input mixture's RMS.
inline constexpr double kActiveRmsFactor = 1e-4;

/// One evaluation unit: ground-truth sources, their sum as the model input,
/// the model's estimates, and optional weak labels.
struct EvalExample {
  std::vector<Waveform> references;
  Waveform input_mixture;
  SourceSet estimates;
  std::vector<int> label_vector;
};

/// Sentinel-aware clamp to [-kDisplayCapDb, kDisplayCapDb].
double present_db(double value);

/// Minimum-total-cost injective row->column assignment of an R x C matrix,
/// R <= C, by the O(R*C^2) potentials method. Exact, not heuristic. Costs
/// must be finite (map SI-SNR sentinels to -/+kSentinelCost first).
std::vector<int> hungarian_assign(const Matrix& cost);

double hungarian_total_cost(const Matrix& cost, const std::vector<int>& rows_to_cols);

/// Indices of active references per kActiveRmsFactor.
std::vector<std::size_t> active_reference_indices(const EvalExample& example);

/// Mean SI-SNR improvement over Hungarian-aligned (active reference, estimate)
/// pairs, for examples with >= 2 active references; std::nullopt for
/// single-source examples. May carry infinity sentinels; display goes through
/// present_db.
std::optional<double> msi(const EvalExample& example);

/// Best single-output reconstruction SI-SNR for an example with exactly one
/// active reference.
double one_s(const EvalExample& example);

/// Mean SI-SNR improvement of the reference mixtures reconstructed through
/// the optimal binary mixing matrix (exhaustive when N^M is within the cap,
/// efficient otherwise). References whose optimal remix is all-zero are
/// skipped; throws if none remain.
double momi(const MixtureBatch& batch, const SourceSet& s,
            double snr_max_db = 30.0,
            std::uint64_t search_cap = mixit::kDefaultSearchCap);

/// Number of sources whose RMS clears rms(sum of sources) * 10^(db/20).
int active_source_count(const SourceSet& s, double threshold_db = -30.0);

}  // namespace metrics
}  // namespace mixkit
