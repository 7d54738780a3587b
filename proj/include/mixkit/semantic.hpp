#pragma once

#include <vector>

#include "mixkit/types.hpp"

namespace mixkit {
namespace semantic {

inline constexpr double kCeEpsilon = 1e-7;    // clamp inside the logs
inline constexpr double kCosEpsilon = 1e-12;  // cosine denominator guard

enum class Aggregator { kOr, kXor };

/// M per-source class posteriors in [0,1]^K plus the mixture's K binary labels.
struct PosteriorMatrix {
  Matrix p;                // M x K
  std::vector<int> labels; // K entries in {0,1}

  std::size_t num_sources() const { return p.rows; }
  std::size_t num_classes() const { return p.cols; }
};

void validate(const PosteriorMatrix& pm);

/// Soft logical OR per class: 1 - prod_m (1 - p_m[k]).
std::vector<double> aggregate_or(const PosteriorMatrix& pm);

/// Soft logical XOR per class: sum_m p_m[k] * prod_{m' != m} (1 - p_m'[k]).
/// One-hot behavior: 1 iff exactly one source provides certain evidence.
std::vector<double> aggregate_xor(const PosteriorMatrix& pm);

/// Binary cross entropy between the aggregated prediction and the labels,
/// natural log, aggregate clamped to [kCeEpsilon, 1 - kCeEpsilon].
double ce_loss(const PosteriorMatrix& pm, Aggregator aggregator);

/// Gradient of ce_loss with respect to the posterior entries (M x K). Zero
/// wherever the clamp is active.
Matrix ce_loss_grad(const PosteriorMatrix& pm, Aggregator aggregator);

/// Mean over source pairs of 1 + cos(p_m, p_m'); in [1, 2] for nonnegative
/// posteriors. Throws for fewer than two sources.
double cosine_loss(const PosteriorMatrix& pm);

Matrix cosine_loss_grad(const PosteriorMatrix& pm);

/// One frequency band [lo, hi] in Hz.
struct FrequencyBand {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

struct BandSpec {
  std::vector<FrequencyBand> bands;
  double probe_spacing_hz = 25.0;
  double reference_amplitude = 0.5;
  // Calibration knobs, recorded in dataset manifests: the sigmoid midpoint
  // sits score_margin_db below a reference tone's band level.
  double score_slope_per_db = 0.45;
  double score_margin_db = 20.0;
};

/// Probe frequencies per band: the requested spacing snapped up to a whole
/// number of cycles per clip, so probes at distinct frequencies are exactly
/// orthogonal over the analysis window. Throws on invalid bands. The datagen
/// module draws archetype frequencies from this same grid.
std::vector<std::vector<double>> probe_grid(const BandSpec& spec,
                                            int sample_rate,
                                            std::size_t length);

/// Deterministic stand-in for a pretrained sound event classifier: per class,
/// a sigmoid of the log band power measured at a grid of integer-cycle probe
/// frequencies. Calibrated per band so a full-support on-grid tone at the
/// reference amplitude scores > 0.95 and out-of-band tones score < 0.05.
/// Band power is a smooth quadratic form of the waveform, so the chain rule
/// back into sample space is available for gradient-based optimization.
class ToyClassifier {
 public:
  /// Throws std::invalid_argument for overlapping/empty bands, bands beyond
  /// Nyquist, or a band too narrow to hold a probe.
  ToyClassifier(BandSpec spec, int sample_rate, std::size_t length);

  std::size_t num_classes() const { return spec_.bands.size(); }
  std::size_t length() const { return length_; }
  const BandSpec& spec() const { return spec_; }

  /// Snapped probe frequencies of one band (integer cycles per clip).
  const std::vector<double>& probe_frequencies(std::size_t band) const {
    return probe_freqs_[band];
  }

  /// Per-band calibration, recorded in dataset manifests.
  double midpoint_db(std::size_t band) const { return midpoint_db_[band]; }
  double slope_per_db(std::size_t band) const { return slope_per_db_[band]; }

  /// K class scores in (0,1) for a waveform of the configured length.
  std::vector<double> posteriors(const Waveform& w) const;

  /// Accumulates d(loss)/d(w[t]) into grad given d(loss)/d(score_k).
  void accumulate_waveform_gradient(const Waveform& w,
                                    const std::vector<double>& dloss_dscore,
                                    std::vector<double>* grad) const;

  /// Posterior matrix for a whole source set plus the mixture labels.
  PosteriorMatrix classify(const SourceSet& s,
                           const std::vector<int>& labels) const;

 private:
  struct BandState {
    std::vector<double> cos_table;  // probes * length
    std::vector<double> sin_table;
  };

  void band_power_terms(const Waveform& w, std::size_t band,
                        std::vector<double>* cos_proj,
                        std::vector<double>* sin_proj, double* power) const;

  BandSpec spec_;
  int sample_rate_;
  std::size_t length_;
  std::vector<std::vector<double>> probe_freqs_;
  std::vector<BandState> tables_;
  std::vector<double> midpoint_db_;
  std::vector<double> slope_per_db_;
};

}  // namespace semantic
}  // namespace mixkit
