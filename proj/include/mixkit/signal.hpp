#pragma once

#include "mixkit/types.hpp"

namespace mixkit {
namespace signal {

/// Smoothing constant inside the RMS square root. Keeps the sparsity losses
/// differentiable at silent sources; shared by every activity computation so
/// the two sparsity losses see identical values.
inline constexpr double kRmsEpsilon = 1e-8;

/// sqrt(mean(w^2) + kRmsEpsilon). Strictly positive; an all-zero signal
/// returns sqrt(kRmsEpsilon).
double rms(const Waveform& w);

/// Plain root-mean-square with no smoothing term (metric-side activity tests).
double rms_raw(const Waveform& w);

/// Negative thresholded SNR between a reference y and an estimate yhat,
/// clamped at snr_max_db: tau = 10^(-snr_max_db/10) and the loss is
/// -10*log10(||y||^2 / (||y-yhat||^2 + tau*||y||^2)), evaluated as
/// -snr_max_db + 10*log10(1 + ||y-yhat||^2/(tau*||y||^2)) so a perfect
/// reconstruction returns exactly -snr_max_db. Lower is better.
/// Throws std::invalid_argument for an all-zero reference.
double thresholded_snr_loss(const Waveform& y, const Waveform& yhat,
                            double snr_max_db);

/// Scale-invariant SNR in dB: the estimate is compared against the reference
/// scaled by alpha = <est,ref>/||ref||^2. Returns +infinity when the residual
/// is exactly zero and -infinity when the projection is zero (orthogonal or
/// silent estimate); callers cap for display, never this function.
/// Throws std::invalid_argument for an all-zero reference.
double si_snr(const Waveform& ref, const Waveform& est);

/// Distributes the residual mix - sum(s) uniformly over the M sources so the
/// result sums to mix exactly (up to rounding). Idempotent.
SourceSet mixture_consistency_project(const SourceSet& s, const Waveform& mix);

}  // namespace signal
}  // namespace mixkit
