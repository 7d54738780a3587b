#include "mixkit/regularizers.hpp"

#include <cmath>
#include <stdexcept>

#include "mixkit/signal.hpp"

namespace mixkit {
namespace regularizers {

namespace {

std::vector<double> source_means(const SourceSet& s) {
  std::vector<double> means(s.count());
  const double inv_len = 1.0 / static_cast<double>(s.length());
  for (std::size_t m = 0; m < s.count(); ++m) {
    double acc = 0.0;
    for (double v : s[m].samples) acc += v;
    means[m] = acc * inv_len;
  }
  return means;
}

double sign_or_zero(double v) {
  if (v > 0.0) return 1.0;
  if (v < 0.0) return -1.0;
  return 0.0;
}

}  // namespace

std::vector<double> activity(const SourceSet& s) {
  std::vector<double> r(s.count());
  for (std::size_t m = 0; m < s.count(); ++m) r[m] = signal::rms(s[m]);
  return r;
}

double l1_over_l2_ratio(const std::vector<double>& r) {
  double l1 = 0.0;
  double sq = 0.0;
  for (double v : r) {
    l1 += v;
    sq += v * v;
  }
  return l1 / (static_cast<double>(r.size()) * std::sqrt(sq));
}

double sparsity_l1(const SourceSet& s, const Waveform& mix) {
  if (sum_squares(mix.samples) == 0.0) {
    throw std::invalid_argument("sparsity_l1: degenerate mixture");
  }
  double l1 = 0.0;
  for (double v : activity(s)) l1 += v;
  return l1 / (static_cast<double>(s.count()) * signal::rms(mix));
}

double sparsity_l1_l2(const SourceSet& s) { return l1_over_l2_ratio(activity(s)); }

double covariance_loss(const SourceSet& s) {
  if (s.count() < 2) {
    throw std::invalid_argument("covariance_loss: needs at least two sources");
  }
  const std::size_t len = s.length();
  const std::vector<double> means = source_means(s);
  const double inv_len = 1.0 / static_cast<double>(len);
  double total = 0.0;
  for (std::size_t m = 0; m < s.count(); ++m) {
    for (std::size_t k = m + 1; k < s.count(); ++k) {
      double cov = 0.0;
      for (std::size_t t = 0; t < len; ++t) {
        cov += (s[m].samples[t] - means[m]) * (s[k].samples[t] - means[k]);
      }
      total += 2.0 * std::abs(cov * inv_len);
    }
  }
  return total;
}

SourceSet regularizer_gradients(const SourceSet& s, const Waveform& mix,
                                RegLoss which) {
  const std::size_t num_sources = s.count();
  const std::size_t len = s.length();
  const double inv_len = 1.0 / static_cast<double>(len);
  SourceSet grad = s;
  for (Waveform& g : grad.sources) g.samples.assign(len, 0.0);

  switch (which) {
    case RegLoss::kL1: {
      if (sum_squares(mix.samples) == 0.0) {
        throw std::invalid_argument("sparsity_l1: degenerate mixture");
      }
      const std::vector<double> r = activity(s);
      const double denom = static_cast<double>(num_sources) * signal::rms(mix);
      // d r_m / d s_m[t] = s_m[t] / (T r_m)
      for (std::size_t m = 0; m < num_sources; ++m) {
        const double c = inv_len / (r[m] * denom);
        for (std::size_t t = 0; t < len; ++t) {
          grad[m].samples[t] = c * s[m].samples[t];
        }
      }
      break;
    }
    case RegLoss::kL1OverL2: {
      const std::vector<double> r = activity(s);
      double l1 = 0.0;
      double sq = 0.0;
      for (double v : r) {
        l1 += v;
        sq += v * v;
      }
      const double l2 = std::sqrt(sq);
      const double inv_m = 1.0 / static_cast<double>(num_sources);
      for (std::size_t m = 0; m < num_sources; ++m) {
        const double dc_dr = inv_m / l2 * (1.0 - l1 * r[m] / sq);
        const double c = dc_dr * inv_len / r[m];
        for (std::size_t t = 0; t < len; ++t) {
          grad[m].samples[t] = c * s[m].samples[t];
        }
      }
      break;
    }
    case RegLoss::kCovariance: {
      if (num_sources < 2) {
        throw std::invalid_argument("covariance_loss: needs at least two sources");
      }
      const std::vector<double> means = source_means(s);
      for (std::size_t m = 0; m < num_sources; ++m) {
        for (std::size_t k = m + 1; k < num_sources; ++k) {
          double cov = 0.0;
          for (std::size_t t = 0; t < len; ++t) {
            cov += (s[m].samples[t] - means[m]) * (s[k].samples[t] - means[k]);
          }
          const double sgn = sign_or_zero(cov * inv_len);
          if (sgn == 0.0) continue;
          // The (m,k) and (k,m) terms of the double sum contribute equally.
          const double c = 2.0 * sgn * inv_len;
          for (std::size_t t = 0; t < len; ++t) {
            grad[m].samples[t] += c * (s[k].samples[t] - means[k]);
            grad[k].samples[t] += c * (s[m].samples[t] - means[m]);
          }
        }
      }
      break;
    }
  }
  return grad;
}

}  // namespace regularizers
}  // namespace mixkit
