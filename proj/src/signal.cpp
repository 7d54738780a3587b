#include "mixkit/signal.hpp"

#include <cmath>
#include <limits>

namespace mixkit {
namespace signal {

double rms(const Waveform& w) {
  const double msq = sum_squares(w.samples) / static_cast<double>(w.size());
  return std::sqrt(msq + kRmsEpsilon);
}

double rms_raw(const Waveform& w) {
  return std::sqrt(sum_squares(w.samples) / static_cast<double>(w.size()));
}

double thresholded_snr_loss(const Waveform& y, const Waveform& yhat,
                            double snr_max_db) {
  if (y.size() != yhat.size()) {
    throw std::invalid_argument("thresholded_snr_loss: length mismatch");
  }
  const double ref_energy = sum_squares(y.samples);
  if (ref_energy == 0.0) {
    throw std::invalid_argument("thresholded_snr_loss: undefined reference");
  }
  double resid = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    const double d = y.samples[t] - yhat.samples[t];
    resid += d * d;
  }
  const double tau = std::pow(10.0, -snr_max_db / 10.0);
  return -snr_max_db + 10.0 * std::log10(1.0 + resid / (tau * ref_energy));
}

double si_snr(const Waveform& ref, const Waveform& est) {
  if (ref.size() != est.size()) {
    throw std::invalid_argument("si_snr: length mismatch");
  }
  const double ref_energy = sum_squares(ref.samples);
  if (ref_energy == 0.0) {
    throw std::invalid_argument("si_snr: undefined reference");
  }
  const double alpha = inner_product(est.samples, ref.samples) / ref_energy;
  const double target_energy = alpha * alpha * ref_energy;
  if (target_energy == 0.0) {
    return -std::numeric_limits<double>::infinity();
  }
  double resid = 0.0;
  for (std::size_t t = 0; t < ref.size(); ++t) {
    const double d = est.samples[t] - alpha * ref.samples[t];
    resid += d * d;
  }
  if (resid == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return 10.0 * std::log10(target_energy / resid);
}

SourceSet mixture_consistency_project(const SourceSet& s, const Waveform& mix) {
  const std::size_t len = s.length();
  if (len != mix.size()) {
    throw std::invalid_argument("mixture_consistency_project: length mismatch");
  }
  const std::size_t num_sources = s.count();
  std::vector<double> residual(mix.samples);
  for (const Waveform& src : s.sources) {
    for (std::size_t t = 0; t < len; ++t) residual[t] -= src.samples[t];
  }
  const double share = 1.0 / static_cast<double>(num_sources);
  SourceSet out = s;
  for (Waveform& src : out.sources) {
    for (std::size_t t = 0; t < len; ++t) src.samples[t] += share * residual[t];
  }
  return out;
}

}  // namespace signal
}  // namespace mixkit
