#include "mixkit/semantic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "mixkit/detmath.hpp"

namespace mixkit {
namespace semantic {

namespace {

constexpr double kPowerFloor = 1e-12;  // keeps log10 finite on silence

double clamp01(double v, double eps) {
  return std::min(std::max(v, eps), 1.0 - eps);
}

}  // namespace

std::vector<std::vector<double>> probe_grid(const BandSpec& spec,
                                            int sample_rate,
                                            std::size_t length) {
  if (spec.bands.empty()) {
    throw std::invalid_argument("band spec: needs at least one band");
  }
  if (length == 0 || sample_rate <= 0) {
    throw std::invalid_argument("band spec: bad sample rate or length");
  }
  const double nyquist = 0.5 * static_cast<double>(sample_rate);
  const double bin_hz =
      static_cast<double>(sample_rate) / static_cast<double>(length);
  const double spacing =
      std::max(1.0, std::ceil(spec.probe_spacing_hz / bin_hz)) * bin_hz;

  std::vector<std::vector<double>> grid;
  double prev_hi = 0.0;
  for (const FrequencyBand& band : spec.bands) {
    if (!(band.lo_hz > 0.0) || !(band.hi_hz > band.lo_hz) ||
        band.hi_hz >= nyquist) {
      throw std::invalid_argument("band spec: invalid band");
    }
    if (band.lo_hz < prev_hi) {
      throw std::invalid_argument("band spec: overlapping bands");
    }
    prev_hi = band.hi_hz;

    std::vector<double> freqs;
    double f = std::ceil(band.lo_hz / spacing) * spacing;
    for (; f <= band.hi_hz; f += spacing) freqs.push_back(f);
    if (freqs.empty()) {
      throw std::invalid_argument("band spec: band narrower than probe spacing");
    }
    grid.push_back(std::move(freqs));
  }
  return grid;
}

void validate(const PosteriorMatrix& pm) {
  if (pm.p.rows == 0 || pm.p.cols == 0) {
    throw std::invalid_argument("posterior matrix: empty");
  }
  if (pm.labels.size() != pm.p.cols) {
    throw std::invalid_argument("posterior matrix: label count != classes");
  }
  for (double v : pm.p.data) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw std::invalid_argument("posterior matrix: entry outside [0,1]");
    }
  }
  for (int l : pm.labels) {
    if (l != 0 && l != 1) {
      throw std::invalid_argument("posterior matrix: label not in {0,1}");
    }
  }
}

std::vector<double> aggregate_or(const PosteriorMatrix& pm) {
  std::vector<double> out(pm.num_classes());
  for (std::size_t k = 0; k < pm.num_classes(); ++k) {
    double prod = 1.0;
    for (std::size_t m = 0; m < pm.num_sources(); ++m) {
      prod *= 1.0 - pm.p.at(m, k);
    }
    out[k] = 1.0 - prod;
  }
  return out;
}

std::vector<double> aggregate_xor(const PosteriorMatrix& pm) {
  std::vector<double> out(pm.num_classes());
  for (std::size_t k = 0; k < pm.num_classes(); ++k) {
    double acc = 0.0;
    for (std::size_t m = 0; m < pm.num_sources(); ++m) {
      double term = pm.p.at(m, k);
      for (std::size_t j = 0; j < pm.num_sources(); ++j) {
        if (j != m) term *= 1.0 - pm.p.at(j, k);
      }
      acc += term;
    }
    out[k] = acc;
  }
  return out;
}

double ce_loss(const PosteriorMatrix& pm, Aggregator aggregator) {
  validate(pm);
  const std::vector<double> agg =
      aggregator == Aggregator::kOr ? aggregate_or(pm) : aggregate_xor(pm);
  double loss = 0.0;
  for (std::size_t k = 0; k < pm.num_classes(); ++k) {
    const double a = clamp01(agg[k], kCeEpsilon);
    if (pm.labels[k] == 1) {
      loss -= std::log(a);
    } else {
      loss -= std::log(1.0 - a);
    }
  }
  return loss;
}

Matrix ce_loss_grad(const PosteriorMatrix& pm, Aggregator aggregator) {
  validate(pm);
  const std::size_t num_sources = pm.num_sources();
  const std::size_t num_classes = pm.num_classes();
  const std::vector<double> agg =
      aggregator == Aggregator::kOr ? aggregate_or(pm) : aggregate_xor(pm);
  Matrix grad(num_sources, num_classes);
  for (std::size_t k = 0; k < num_classes; ++k) {
    // Clamp boundary: the loss is locally constant there.
    if (agg[k] < kCeEpsilon || agg[k] > 1.0 - kCeEpsilon) continue;
    const double dloss_dagg =
        pm.labels[k] == 1 ? -1.0 / agg[k] : 1.0 / (1.0 - agg[k]);
    for (std::size_t m = 0; m < num_sources; ++m) {
      double dagg_dp = 0.0;
      if (aggregator == Aggregator::kOr) {
        double prod = 1.0;
        for (std::size_t j = 0; j < num_sources; ++j) {
          if (j != m) prod *= 1.0 - pm.p.at(j, k);
        }
        dagg_dp = prod;
      } else {
        double own = 1.0;
        for (std::size_t j = 0; j < num_sources; ++j) {
          if (j != m) own *= 1.0 - pm.p.at(j, k);
        }
        double others = 0.0;
        for (std::size_t i = 0; i < num_sources; ++i) {
          if (i == m) continue;
          double term = pm.p.at(i, k);
          for (std::size_t j = 0; j < num_sources; ++j) {
            if (j != i && j != m) term *= 1.0 - pm.p.at(j, k);
          }
          others += term;
        }
        dagg_dp = own - others;
      }
      grad.at(m, k) = dloss_dagg * dagg_dp;
    }
  }
  return grad;
}

double cosine_loss(const PosteriorMatrix& pm) {
  if (pm.num_sources() < 2) {
    throw std::invalid_argument("cosine_loss: needs at least two sources");
  }
  const std::size_t num_sources = pm.num_sources();
  const std::size_t num_classes = pm.num_classes();
  std::vector<double> norms(num_sources);
  for (std::size_t m = 0; m < num_sources; ++m) {
    double sq = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      sq += pm.p.at(m, k) * pm.p.at(m, k);
    }
    norms[m] = std::sqrt(sq);
  }
  double acc = 0.0;
  for (std::size_t m = 0; m < num_sources; ++m) {
    for (std::size_t j = m + 1; j < num_sources; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < num_classes; ++k) {
        dot += pm.p.at(m, k) * pm.p.at(j, k);
      }
      acc += 1.0 + dot / (norms[m] * norms[j] + kCosEpsilon);
    }
  }
  const double pairs =
      0.5 * static_cast<double>(num_sources) * static_cast<double>(num_sources - 1);
  return acc / pairs;
}

Matrix cosine_loss_grad(const PosteriorMatrix& pm) {
  if (pm.num_sources() < 2) {
    throw std::invalid_argument("cosine_loss: needs at least two sources");
  }
  const std::size_t num_sources = pm.num_sources();
  const std::size_t num_classes = pm.num_classes();
  std::vector<double> norms(num_sources);
  for (std::size_t m = 0; m < num_sources; ++m) {
    double sq = 0.0;
    for (std::size_t k = 0; k < num_classes; ++k) {
      sq += pm.p.at(m, k) * pm.p.at(m, k);
    }
    norms[m] = std::sqrt(sq);
  }
  const double pairs =
      0.5 * static_cast<double>(num_sources) * static_cast<double>(num_sources - 1);
  Matrix grad(num_sources, num_classes);
  for (std::size_t m = 0; m < num_sources; ++m) {
    for (std::size_t j = m + 1; j < num_sources; ++j) {
      double dot = 0.0;
      for (std::size_t k = 0; k < num_classes; ++k) {
        dot += pm.p.at(m, k) * pm.p.at(j, k);
      }
      const double denom = norms[m] * norms[j] + kCosEpsilon;
      for (std::size_t k = 0; k < num_classes; ++k) {
        double dm = pm.p.at(j, k) / denom;
        double dj = pm.p.at(m, k) / denom;
        if (norms[m] > 0.0) {
          dm -= dot * (pm.p.at(m, k) / norms[m]) * norms[j] / (denom * denom);
        }
        if (norms[j] > 0.0) {
          dj -= dot * (pm.p.at(j, k) / norms[j]) * norms[m] / (denom * denom);
        }
        grad.at(m, k) += dm / pairs;
        grad.at(j, k) += dj / pairs;
      }
    }
  }
  return grad;
}

ToyClassifier::ToyClassifier(BandSpec spec, int sample_rate, std::size_t length)
    : spec_(std::move(spec)), sample_rate_(sample_rate), length_(length) {
  probe_freqs_ = probe_grid(spec_, sample_rate_, length_);

  const double inv_rate = 1.0 / static_cast<double>(sample_rate_);
  for (const std::vector<double>& freqs : probe_freqs_) {
    BandState state;
    state.cos_table.resize(freqs.size() * length_);
    state.sin_table.resize(freqs.size() * length_);
    for (std::size_t p = 0; p < freqs.size(); ++p) {
      for (std::size_t t = 0; t < length_; ++t) {
        const double turns = freqs[p] * static_cast<double>(t) * inv_rate;
        state.cos_table[p * length_ + t] = detmath::cos_turns(turns);
        state.sin_table[p * length_ + t] = detmath::sin_turns(turns);
      }
    }
    tables_.push_back(std::move(state));
  }

  // Calibration: an on-grid full-support tone at the reference amplitude
  // lands all its power on one probe, band power a^2/2. Out-of-band response
  // of such a tone is exactly zero by probe orthogonality, so the midpoint
  // margin below that level separates in-band tones (> 0.95) from the gating
  // leakage of time-limited archetypes (< 0.05).
  const double a = spec_.reference_amplitude;
  const double in_band_db = 10.0 * std::log10(0.5 * a * a);
  for (std::size_t band = 0; band < spec_.bands.size(); ++band) {
    midpoint_db_.push_back(in_band_db - spec_.score_margin_db);
    slope_per_db_.push_back(spec_.score_slope_per_db);
  }
}

void ToyClassifier::band_power_terms(const Waveform& w, std::size_t band,
                                     std::vector<double>* cos_proj,
                                     std::vector<double>* sin_proj,
                                     double* power) const {
  const BandState& state = tables_[band];
  const std::size_t num_probes = probe_freqs_[band].size();
  cos_proj->assign(num_probes, 0.0);
  sin_proj->assign(num_probes, 0.0);
  const double scale = 2.0 / static_cast<double>(length_);
  double acc = 0.0;
  for (std::size_t p = 0; p < num_probes; ++p) {
    const double* ct = &state.cos_table[p * length_];
    const double* st = &state.sin_table[p * length_];
    double c = 0.0;
    double s = 0.0;
    for (std::size_t t = 0; t < length_; ++t) {
      c += w.samples[t] * ct[t];
      s += w.samples[t] * st[t];
    }
    (*cos_proj)[p] = c;
    (*sin_proj)[p] = s;
    // Mean-square contribution of this probe; an exact-probe tone of
    // amplitude a yields a^2/2.
    acc += 0.5 * scale * scale * (c * c + s * s);
  }
  *power = acc;
}

std::vector<double> ToyClassifier::posteriors(const Waveform& w) const {
  if (w.size() != length_) {
    throw std::invalid_argument("toy classifier: waveform length mismatch");
  }
  std::vector<double> scores(num_classes());
  std::vector<double> cos_proj, sin_proj;
  for (std::size_t band = 0; band < num_classes(); ++band) {
    double power = 0.0;
    band_power_terms(w, band, &cos_proj, &sin_proj, &power);
    const double level_db = 10.0 * std::log10(power + kPowerFloor);
    const double z = slope_per_db_[band] * (level_db - midpoint_db_[band]);
    scores[band] = 1.0 / (1.0 + std::exp(-z));
  }
  return scores;
}

void ToyClassifier::accumulate_waveform_gradient(
    const Waveform& w, const std::vector<double>& dloss_dscore,
    std::vector<double>* grad) const {
  if (w.size() != length_ || grad->size() != length_) {
    throw std::invalid_argument("toy classifier: gradient length mismatch");
  }
  std::vector<double> cos_proj, sin_proj;
  for (std::size_t band = 0; band < num_classes(); ++band) {
    if (dloss_dscore[band] == 0.0) continue;
    double power = 0.0;
    band_power_terms(w, band, &cos_proj, &sin_proj, &power);
    const double level_db = 10.0 * std::log10(power + kPowerFloor);
    const double z = slope_per_db_[band] * (level_db - midpoint_db_[band]);
    const double sig = 1.0 / (1.0 + std::exp(-z));
    const double dscore_dlevel = sig * (1.0 - sig) * slope_per_db_[band];
    const double dlevel_dpower =
        10.0 / (std::numbers::ln10 * (power + kPowerFloor));
    const double outer = dloss_dscore[band] * dscore_dlevel * dlevel_dpower;
    const BandState& state = tables_[band];
    const double scale = 2.0 / static_cast<double>(length_);
    for (std::size_t p = 0; p < probe_freqs_[band].size(); ++p) {
      const double* ct = &state.cos_table[p * length_];
      const double* st = &state.sin_table[p * length_];
      const double cc = outer * scale * scale * cos_proj[p];
      const double ss = outer * scale * scale * sin_proj[p];
      for (std::size_t t = 0; t < length_; ++t) {
        (*grad)[t] += cc * ct[t] + ss * st[t];
      }
    }
  }
}

PosteriorMatrix ToyClassifier::classify(const SourceSet& s,
                                        const std::vector<int>& labels) const {
  if (labels.size() != num_classes()) {
    throw std::invalid_argument("toy classifier: label count mismatch");
  }
  PosteriorMatrix pm;
  pm.p = Matrix(s.count(), num_classes());
  pm.labels = labels;
  for (std::size_t m = 0; m < s.count(); ++m) {
    const std::vector<double> scores = posteriors(s[m]);
    for (std::size_t k = 0; k < num_classes(); ++k) pm.p.at(m, k) = scores[k];
  }
  return pm;
}

}  // namespace semantic
}  // namespace mixkit
