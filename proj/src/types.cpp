#include "mixkit/types.hpp"

#include <cmath>

namespace mixkit {

Waveform make_waveform(std::vector<double> samples, int sample_rate) {
  Waveform w{std::move(samples), sample_rate};
  validate(w);
  return w;
}

void validate(const Waveform& w) {
  if (w.samples.empty()) {
    throw std::invalid_argument("waveform: length must be >= 1");
  }
  if (w.sample_rate <= 0) {
    throw std::invalid_argument("waveform: sample rate must be positive");
  }
  for (double v : w.samples) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("waveform: non-finite sample");
    }
  }
}

SourceSet make_source_set(std::vector<Waveform> sources) {
  if (sources.empty()) {
    throw std::invalid_argument("source set: needs at least one source");
  }
  const std::size_t len = sources.front().size();
  const int rate = sources.front().sample_rate;
  for (const Waveform& s : sources) {
    if (s.size() != len) {
      throw std::invalid_argument("source set: sources differ in length");
    }
    if (s.sample_rate != rate) {
      throw std::invalid_argument("source set: sources differ in sample rate");
    }
  }
  return SourceSet{std::move(sources)};
}

MixtureBatch MixtureBatch::from_references(std::vector<Waveform> references) {
  if (references.empty()) {
    throw std::invalid_argument("mixture batch: needs at least one reference");
  }
  const std::size_t len = references.front().size();
  for (const Waveform& r : references) {
    if (r.size() != len) {
      throw std::invalid_argument("mixture batch: references differ in length");
    }
  }
  Waveform mom;
  mom.sample_rate = references.front().sample_rate;
  mom.samples.assign(len, 0.0);
  for (const Waveform& r : references) {
    for (std::size_t t = 0; t < len; ++t) mom.samples[t] += r.samples[t];
  }
  return MixtureBatch{std::move(references), std::move(mom)};
}

double sum_squares(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return acc;
}

double inner_product(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  const std::size_t n = a.size();
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace mixkit
