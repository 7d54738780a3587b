#pragma once

#include <vector>

#include "mixkit/types.hpp"

namespace mixkit {
namespace regularizers {

enum class RegLoss { kL1, kL1OverL2, kCovariance };

/// Smoothed RMS activity r_m per source (signal::rms, so both sparsity losses
/// see identical values).
std::vector<double> activity(const SourceSet& s);

/// (1/M) * ||r||_1 / ||r||_2 on an explicit activity vector; in [1/M, 1/sqrt(M)]
/// for any nonnegative nonzero r.
double l1_over_l2_ratio(const std::vector<double>& r);

/// (1/M) * sum_m r_m / rms(mix). Throws for an all-zero mix.
double sparsity_l1(const SourceSet& s, const Waveform& mix);

/// (1/M) * ||r||_1 / ||r||_2 with r the smoothed activities. Scale-invariant
/// up to the RMS smoothing term; minimized by a single active source.
double sparsity_l1_l2(const SourceSet& s);

/// sum_{m != m'} |cov(s_m, s_m')| with population covariance (means removed,
/// divided by T); both orders counted. Throws for fewer than two sources.
double covariance_loss(const SourceSet& s);

/// Analytic gradient of the selected loss with respect to the sources. The
/// |.| in the covariance loss uses subgradient 0 at zero.
SourceSet regularizer_gradients(const SourceSet& s, const Waveform& mix,
                                RegLoss which);

}  // namespace regularizers
}  // namespace mixkit
