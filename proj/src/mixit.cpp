#include "mixkit/mixit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mixkit/signal.hpp"

namespace mixkit {
namespace mixit {

namespace {

// Solves (G + rho I) z = b for symmetric positive definite G via an in-place
// Cholesky factorization. G is m x m row-major; b and z are m-vectors.
class CholeskySolver {
 public:
  CholeskySolver(std::vector<double> matrix, std::size_t m, double ridge)
      : factor_(std::move(matrix)), m_(m) {
    for (std::size_t i = 0; i < m_; ++i) factor_[i * m_ + i] += ridge;
    for (std::size_t j = 0; j < m_; ++j) {
      double diag = factor_[j * m_ + j];
      for (std::size_t k = 0; k < j; ++k) {
        const double l = factor_[j * m_ + k];
        diag -= l * l;
      }
      diag = std::max(diag, std::numeric_limits<double>::min());
      const double root = std::sqrt(diag);
      factor_[j * m_ + j] = root;
      for (std::size_t i = j + 1; i < m_; ++i) {
        double v = factor_[i * m_ + j];
        for (std::size_t k = 0; k < j; ++k) {
          v -= factor_[i * m_ + k] * factor_[j * m_ + k];
        }
        factor_[i * m_ + j] = v / root;
      }
    }
  }

  std::vector<double> solve(const std::vector<double>& b) const {
    std::vector<double> y(m_);
    for (std::size_t i = 0; i < m_; ++i) {
      double v = b[i];
      for (std::size_t k = 0; k < i; ++k) v -= factor_[i * m_ + k] * y[k];
      y[i] = v / factor_[i * m_ + i];
    }
    std::vector<double> z(m_);
    for (std::size_t ii = m_; ii-- > 0;) {
      double v = y[ii];
      for (std::size_t k = ii + 1; k < m_; ++k) v -= factor_[k * m_ + ii] * z[k];
      z[ii] = v / factor_[ii * m_ + ii];
    }
    return z;
  }

 private:
  std::vector<double> factor_;
  std::size_t m_;
};

double total_of(const std::vector<double>& losses) {
  double total = 0.0;
  for (double v : losses) total += v;
  return total;
}

}  // namespace

std::uint64_t assignment_count(std::size_t num_refs, std::size_t num_sources) {
  const std::uint64_t cap = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t count = 1;
  for (std::size_t m = 0; m < num_sources; ++m) {
    if (count > cap / num_refs) return cap;
    count *= num_refs;
  }
  return count;
}

MixitPrecomp make_precomp(const MixtureBatch& batch, const SourceSet& s) {
  if (batch.length() != s.length()) {
    throw std::invalid_argument("mixit: batch/source length mismatch");
  }
  const std::size_t num_refs = batch.count();
  const std::size_t num_sources = s.count();
  MixitPrecomp pre;
  pre.num_refs = num_refs;
  pre.num_sources = num_sources;
  pre.gram.resize(num_sources * num_sources);
  pre.cross.resize(num_refs * num_sources);
  pre.ref_energy.resize(num_refs);
  for (std::size_t m = 0; m < num_sources; ++m) {
    for (std::size_t k = m; k < num_sources; ++k) {
      const double v = inner_product(s[m].samples, s[k].samples);
      pre.gram[m * num_sources + k] = v;
      pre.gram[k * num_sources + m] = v;
    }
  }
  for (std::size_t n = 0; n < num_refs; ++n) {
    pre.ref_energy[n] = sum_squares(batch.references[n].samples);
    if (pre.ref_energy[n] == 0.0) {
      throw std::invalid_argument("mixit: undefined reference (all-zero)");
    }
    for (std::size_t m = 0; m < num_sources; ++m) {
      pre.cross[n * num_sources + m] =
          inner_product(batch.references[n].samples, s[m].samples);
    }
  }
  return pre;
}

std::vector<double> assignment_losses(const MixitPrecomp& pre,
                                      const BinaryMixingMatrix& assignment,
                                      double snr_max_db) {
  const std::size_t num_refs = pre.num_refs;
  const std::size_t num_sources = pre.num_sources;
  const double tau = std::pow(10.0, -snr_max_db / 10.0);
  std::vector<double> losses(num_refs);
  // ||x_n - r_n||^2 expanded in precomputed inner products; clamped at zero
  // against cancellation when the remix is near-exact.
  for (std::size_t n = 0; n < num_refs; ++n) {
    double resid = pre.ref_energy[n];
    for (std::size_t m = 0; m < num_sources; ++m) {
      if (assignment.ref_of_source[m] != static_cast<int>(n)) continue;
      resid -= 2.0 * pre.cross[n * num_sources + m];
      for (std::size_t k = 0; k < num_sources; ++k) {
        if (assignment.ref_of_source[k] != static_cast<int>(n)) continue;
        resid += pre.gram[m * num_sources + k];
      }
    }
    resid = std::max(resid, 0.0);
    losses[n] = -snr_max_db +
                10.0 * std::log10(1.0 + resid / (tau * pre.ref_energy[n]));
  }
  return losses;
}

std::vector<Waveform> remix(const SourceSet& s,
                            const BinaryMixingMatrix& assignment) {
  const std::size_t len = s.length();
  std::vector<Waveform> out(assignment.num_refs);
  for (Waveform& w : out) {
    w.sample_rate = s.sources.front().sample_rate;
    w.samples.assign(len, 0.0);
  }
  for (std::size_t m = 0; m < s.count(); ++m) {
    Waveform& dst = out[assignment.ref_of_source[m]];
    for (std::size_t t = 0; t < len; ++t) dst.samples[t] += s[m].samples[t];
  }
  return out;
}

MixitResult exhaustive_mixit(const MixtureBatch& batch, const SourceSet& s,
                             double snr_max_db, std::uint64_t search_cap) {
  const std::size_t num_refs = batch.count();
  const std::size_t num_sources = s.count();
  if (assignment_count(num_refs, num_sources) > search_cap) {
    throw std::runtime_error("exhaustive search infeasible: N^M exceeds cap");
  }
  const MixitPrecomp pre = make_precomp(batch, s);

  BinaryMixingMatrix current{num_refs, std::vector<int>(num_sources, 0)};
  MixitResult best;
  best.total_loss = std::numeric_limits<double>::infinity();
  while (true) {
    const std::vector<double> losses =
        assignment_losses(pre, current, snr_max_db);
    const double total = total_of(losses);
    if (total < best.total_loss) {
      best.assignment = current;
      best.total_loss = total;
      best.per_reference_loss = losses;
    }
    // Odometer on the last column first = lexicographic order over
    // (a_0, ..., a_{M-1}); keeping strict minima yields the smallest
    // minimizer.
    std::size_t m = num_sources;
    while (m-- > 0) {
      if (++current.ref_of_source[m] < static_cast<int>(num_refs)) break;
      current.ref_of_source[m] = 0;
      if (m == 0) return best;
    }
  }
}

Matrix least_squares_mixing(const MixtureBatch& batch, const SourceSet& s) {
  const MixitPrecomp pre = make_precomp(batch, s);
  const std::size_t num_refs = pre.num_refs;
  const std::size_t num_sources = pre.num_sources;

  double trace = 0.0;
  for (std::size_t m = 0; m < num_sources; ++m) {
    trace += pre.gram[m * num_sources + m];
  }
  double ridge = 1e-6 * trace / static_cast<double>(num_sources);
  if (ridge <= 0.0) ridge = std::numeric_limits<double>::min();

  const CholeskySolver solver(pre.gram, num_sources, ridge);
  Matrix mixing(num_refs, num_sources);
  std::vector<double> rhs(num_sources);
  std::vector<double> residual(num_sources);
  for (std::size_t n = 0; n < num_refs; ++n) {
    for (std::size_t m = 0; m < num_sources; ++m) {
      rhs[m] = pre.cross[n * num_sources + m];
    }
    std::vector<double> row = solver.solve(rhs);
    // One refinement step against the unridged normal equations knocks the
    // ridge bias down to second order while the factorization keeps handling
    // rank-deficient Gram matrices.
    for (std::size_t m = 0; m < num_sources; ++m) {
      double acc = rhs[m];
      for (std::size_t k = 0; k < num_sources; ++k) {
        acc -= pre.gram[m * num_sources + k] * row[k];
      }
      residual[m] = acc;
    }
    const std::vector<double> correction = solver.solve(residual);
    for (std::size_t m = 0; m < num_sources; ++m) {
      mixing.at(n, m) = row[m] + correction[m];
    }
  }
  return mixing;
}

BinaryMixingMatrix project_to_binary(const Matrix& mixing) {
  if (mixing.rows == 0 || mixing.cols == 0) {
    throw std::invalid_argument("project_to_binary: empty matrix");
  }
  BinaryMixingMatrix out{mixing.rows, std::vector<int>(mixing.cols, 0)};
  for (std::size_t m = 0; m < mixing.cols; ++m) {
    int best_row = 0;
    double best_value = mixing.at(0, m);
    for (std::size_t n = 1; n < mixing.rows; ++n) {
      if (mixing.at(n, m) > best_value) {
        best_value = mixing.at(n, m);
        best_row = static_cast<int>(n);
      }
    }
    out.ref_of_source[m] = best_row;
  }
  return out;
}

MixitResult efficient_mixit(const MixtureBatch& batch, const SourceSet& s,
                            double snr_max_db) {
  const MixitPrecomp pre = make_precomp(batch, s);
  const BinaryMixingMatrix assignment =
      project_to_binary(least_squares_mixing(batch, s));
  MixitResult result;
  result.assignment = assignment;
  result.per_reference_loss = assignment_losses(pre, assignment, snr_max_db);
  result.total_loss = total_of(result.per_reference_loss);
  return result;
}

SourceSet mixit_loss_gradient(const MixtureBatch& batch, const SourceSet& s,
                              double snr_max_db,
                              const BinaryMixingMatrix& assignment) {
  if (assignment.num_refs != batch.count() ||
      assignment.num_sources() != s.count()) {
    throw std::invalid_argument("mixit_loss_gradient: assignment shape mismatch");
  }
  const std::size_t len = s.length();
  const double tau = std::pow(10.0, -snr_max_db / 10.0);
  const std::vector<Waveform> remixes = remix(s, assignment);

  // d loss_n / d remix_n = -(20/ln10) * (x_n - r_n) / (||x_n - r_n||^2 + tau e_n)
  std::vector<double> scale(batch.count());
  std::vector<std::vector<double>> error(batch.count());
  for (std::size_t n = 0; n < batch.count(); ++n) {
    const double ref_energy = sum_squares(batch.references[n].samples);
    if (ref_energy == 0.0) {
      throw std::invalid_argument("mixit: undefined reference (all-zero)");
    }
    error[n].resize(len);
    double resid = 0.0;
    for (std::size_t t = 0; t < len; ++t) {
      const double d = batch.references[n].samples[t] - remixes[n].samples[t];
      error[n][t] = d;
      resid += d * d;
    }
    scale[n] = -(20.0 / std::numbers::ln10) / (resid + tau * ref_energy);
  }

  SourceSet grad = s;
  for (std::size_t m = 0; m < s.count(); ++m) {
    const int n = assignment.ref_of_source[m];
    for (std::size_t t = 0; t < len; ++t) {
      grad[m].samples[t] = scale[n] * error[n][t];
    }
  }
  return grad;
}

}  // namespace mixit
}  // namespace mixkit
