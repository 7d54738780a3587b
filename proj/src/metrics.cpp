#include "mixkit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "mixkit/signal.hpp"

namespace mixkit {
namespace metrics {

namespace {

double sentinel_cost(double si_snr_db) {
  if (std::isinf(si_snr_db)) {
    return si_snr_db > 0 ? -kSentinelCost : kSentinelCost;
  }
  return -si_snr_db;
}

}  // namespace

double present_db(double value) {
  if (std::isinf(value)) return std::copysign(kDisplayCapDb, value);
  return std::clamp(value, -kDisplayCapDb, kDisplayCapDb);
}

std::vector<int> hungarian_assign(const Matrix& cost) {
  const std::size_t num_rows = cost.rows;
  const std::size_t num_cols = cost.cols;
  if (num_rows == 0 || num_cols == 0) {
    throw std::invalid_argument("hungarian: empty cost matrix");
  }
  if (num_rows > num_cols) {
    throw std::invalid_argument("hungarian: more rows than columns");
  }
  for (double v : cost.data) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("hungarian: non-finite cost");
    }
  }

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> row_pot(num_rows + 1, 0.0);
  std::vector<double> col_pot(num_cols + 1, 0.0);
  std::vector<int> col_row(num_cols + 1, 0);  // row matched to column (1-based)
  std::vector<int> way(num_cols + 1, 0);

  for (std::size_t i = 1; i <= num_rows; ++i) {
    col_row[0] = static_cast<int>(i);
    std::size_t j0 = 0;
    std::vector<double> min_reduced(num_cols + 1, kInf);
    std::vector<char> used(num_cols + 1, 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = static_cast<std::size_t>(col_row[j0]);
      double delta = kInf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= num_cols; ++j) {
        if (used[j]) continue;
        const double reduced =
            cost.at(i0 - 1, j - 1) - row_pot[i0] - col_pot[j];
        if (reduced < min_reduced[j]) {
          min_reduced[j] = reduced;
          way[j] = static_cast<int>(j0);
        }
        if (min_reduced[j] < delta) {
          delta = min_reduced[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= num_cols; ++j) {
        if (used[j]) {
          row_pot[static_cast<std::size_t>(col_row[j])] += delta;
          col_pot[j] -= delta;
        } else {
          min_reduced[j] -= delta;
        }
      }
      j0 = j1;
    } while (col_row[j0] != 0);
    do {
      const std::size_t j1 = static_cast<std::size_t>(way[j0]);
      col_row[j0] = col_row[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> rows_to_cols(num_rows, -1);
  for (std::size_t j = 1; j <= num_cols; ++j) {
    if (col_row[j] != 0) rows_to_cols[col_row[j] - 1] = static_cast<int>(j - 1);
  }
  return rows_to_cols;
}

double hungarian_total_cost(const Matrix& cost,
                            const std::vector<int>& rows_to_cols) {
  double total = 0.0;
  for (std::size_t i = 0; i < rows_to_cols.size(); ++i) {
    total += cost.at(i, static_cast<std::size_t>(rows_to_cols[i]));
  }
  return total;
}

std::vector<std::size_t> active_reference_indices(const EvalExample& example) {
  const double mix_rms = signal::rms_raw(example.input_mixture);
  std::vector<std::size_t> active;
  for (std::size_t i = 0; i < example.references.size(); ++i) {
    if (signal::rms_raw(example.references[i]) > kActiveRmsFactor * mix_rms) {
      active.push_back(i);
    }
  }
  return active;
}

std::optional<double> msi(const EvalExample& example) {
  if (example.estimates.count() == 0) {
    throw std::invalid_argument("msi: no estimates");
  }
  const std::vector<std::size_t> active = active_reference_indices(example);
  if (active.empty()) {
    throw std::invalid_argument("msi: no active references");
  }
  if (active.size() < 2) return std::nullopt;

  const std::size_t num_est = example.estimates.count();
  Matrix cost(active.size(), num_est);
  Matrix snr(active.size(), num_est);
  for (std::size_t i = 0; i < active.size(); ++i) {
    for (std::size_t j = 0; j < num_est; ++j) {
      const double v =
          signal::si_snr(example.references[active[i]], example.estimates[j]);
      snr.at(i, j) = v;
      cost.at(i, j) = sentinel_cost(v);
    }
  }
  const std::vector<int> aligned = hungarian_assign(cost);

  double acc = 0.0;
  for (std::size_t i = 0; i < active.size(); ++i) {
    const double input_snr =
        signal::si_snr(example.references[active[i]], example.input_mixture);
    acc += snr.at(i, static_cast<std::size_t>(aligned[i])) - input_snr;
  }
  return acc / static_cast<double>(active.size());
}

double one_s(const EvalExample& example) {
  const std::vector<std::size_t> active = active_reference_indices(example);
  if (active.size() != 1) {
    throw std::invalid_argument("one_s: not a single-source example");
  }
  const Waveform& ref = example.references[active.front()];
  double best = -std::numeric_limits<double>::infinity();
  for (const Waveform& est : example.estimates.sources) {
    best = std::max(best, signal::si_snr(ref, est));
  }
  return best;
}

double momi(const MixtureBatch& batch, const SourceSet& s, double snr_max_db,
            std::uint64_t search_cap) {
  if (batch.count() < 2) {
    throw std::invalid_argument("momi: needs at least two references");
  }
  const mixit::MixitResult result =
      mixit::assignment_count(batch.count(), s.count()) <= search_cap
          ? mixit::exhaustive_mixit(batch, s, snr_max_db, search_cap)
          : mixit::efficient_mixit(batch, s, snr_max_db);
  const std::vector<Waveform> remixes = mixit::remix(s, result.assignment);

  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t n = 0; n < batch.count(); ++n) {
    if (sum_squares(remixes[n].samples) == 0.0) continue;  // dead reference
    const double remix_snr = signal::si_snr(batch.references[n], remixes[n]);
    const double input_snr = signal::si_snr(batch.references[n], batch.mom);
    acc += remix_snr - input_snr;
    ++counted;
  }
  if (counted == 0) {
    throw std::invalid_argument("momi: every optimal remix is all-zero");
  }
  return acc / static_cast<double>(counted);
}

int active_source_count(const SourceSet& s, double threshold_db) {
  const std::size_t len = s.length();
  Waveform total;
  total.sample_rate = s.sources.front().sample_rate;
  total.samples.assign(len, 0.0);
  for (const Waveform& src : s.sources) {
    for (std::size_t t = 0; t < len; ++t) total.samples[t] += src.samples[t];
  }
  const double total_rms = signal::rms_raw(total);
  if (total_rms == 0.0) return 0;
  const double threshold = total_rms * std::pow(10.0, threshold_db / 20.0);
  int count = 0;
  for (const Waveform& src : s.sources) {
    if (signal::rms_raw(src) >= threshold) ++count;
  }
  return count;
}

}  // namespace metrics
}  // namespace mixkit
