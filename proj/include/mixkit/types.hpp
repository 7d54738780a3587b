#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mixkit {

/// A mono waveform: finite real samples at a fixed sample rate.
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 8000;

  std::size_t size() const { return samples.size(); }
  double& operator[](std::size_t t) { return samples[t]; }
  double operator[](std::size_t t) const { return samples[t]; }
};

Waveform make_waveform(std::vector<double> samples, int sample_rate);

/// Throws std::invalid_argument if the waveform is empty, the sample rate is
/// not positive, or any sample is NaN/Inf.
void validate(const Waveform& w);

/// M estimated (or reference) sources of common length and sample rate.
struct SourceSet {
  std::vector<Waveform> sources;

  std::size_t count() const { return sources.size(); }
  std::size_t length() const { return sources.empty() ? 0 : sources.front().size(); }
  Waveform& operator[](std::size_t m) { return sources[m]; }
  const Waveform& operator[](std::size_t m) const { return sources[m]; }
};

SourceSet make_source_set(std::vector<Waveform> sources);

/// N reference mixtures and their elementwise sum (the mixture of mixtures).
struct MixtureBatch {
  std::vector<Waveform> references;
  Waveform mom;

  std::size_t count() const { return references.size(); }
  std::size_t length() const { return mom.size(); }

  /// Builds the batch; mom is the fixed-order sum of the references.
  static MixtureBatch from_references(std::vector<Waveform> references);
};

/// Dense row-major matrix, just enough for N×M mixing matrices and cost tables.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// Low-level kernels shared across modules. Fixed left-to-right accumulation
// order; results must not depend on threading.
double sum_squares(std::span<const double> x);
double inner_product(std::span<const double> a, std::span<const double> b);

}  // namespace mixkit
