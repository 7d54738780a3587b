#include <doctest.h>

#include <cmath>

#include "mixkit/datagen.hpp"
#include "mixkit/semantic.hpp"
#include "oracles.hpp"

using namespace mixkit;
using semantic::Aggregator;
using semantic::PosteriorMatrix;

namespace {

PosteriorMatrix pm_from(const std::vector<std::vector<double>>& rows,
                        std::vector<int> labels) {
  PosteriorMatrix pm;
  pm.p = Matrix(rows.size(), rows.front().size());
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t k = 0; k < rows[m].size(); ++k) pm.p.at(m, k) = rows[m][k];
  }
  pm.labels = std::move(labels);
  return pm;
}

PosteriorMatrix random_pm(Rng& rng, std::size_t sources, std::size_t classes,
                          double lo = 0.05, double hi = 0.95) {
  PosteriorMatrix pm;
  pm.p = Matrix(sources, classes);
  for (double& v : pm.p.data) v = rng.uniform(lo, hi);
  pm.labels.resize(classes);
  for (int& l : pm.labels) l = static_cast<int>(rng.bounded(2));
  return pm;
}

double fd_posterior(const std::function<double(const PosteriorMatrix&)>& loss,
                    const PosteriorMatrix& pm, std::size_t m, std::size_t k,
                    double step) {
  PosteriorMatrix plus = pm;
  PosteriorMatrix minus = pm;
  plus.p.at(m, k) += step;
  minus.p.at(m, k) -= step;
  return (loss(plus) - loss(minus)) / (2.0 * step);
}

}  // namespace

TEST_CASE("aggregate_or: absorbing ones, zeros, and the 0.75 case") {
  const PosteriorMatrix certain = pm_from({{1.0, 0.0}, {0.3, 0.0}}, {1, 0});
  CHECK(semantic::aggregate_or(certain)[0] == 1.0);
  CHECK(semantic::aggregate_or(certain)[1] == 0.0);

  const PosteriorMatrix halves = pm_from({{0.5}, {0.5}}, {1});
  CHECK(semantic::aggregate_or(halves)[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("aggregate_xor truth-table cases") {
  CHECK(semantic::aggregate_xor(pm_from({{1.0}, {0.0}, {0.0}}, {1}))[0] == 1.0);
  CHECK(semantic::aggregate_xor(pm_from({{1.0}, {1.0}}, {1}))[0] == 0.0);
  CHECK(semantic::aggregate_xor(pm_from({{0.5}, {0.5}}, {1}))[0] ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("aggregates: OR dominates per-source scores and XOR, both in [0,1]") {
  Rng rng(51);
  for (int trial = 0; trial < 60; ++trial) {
    const PosteriorMatrix pm = random_pm(rng, 2 + rng.bounded(4), 3, 0.0, 1.0);
    const std::vector<double> or_agg = semantic::aggregate_or(pm);
    const std::vector<double> xor_agg = semantic::aggregate_xor(pm);
    for (std::size_t k = 0; k < 3; ++k) {
      double max_p = 0.0;
      for (std::size_t m = 0; m < pm.num_sources(); ++m) {
        max_p = std::max(max_p, pm.p.at(m, k));
      }
      CHECK(or_agg[k] >= max_p - 1e-12);
      CHECK(xor_agg[k] <= or_agg[k] + 1e-12);
      CHECK(xor_agg[k] >= 0.0);
      CHECK(xor_agg[k] <= 1.0);
    }
  }
}

TEST_CASE("aggregates are symmetric under source permutation") {
  Rng rng(52);
  const PosteriorMatrix pm = random_pm(rng, 4, 3);
  PosteriorMatrix shuffled = pm;
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  for (std::size_t m = 0; m < 4; ++m) {
    for (std::size_t k = 0; k < 3; ++k) {
      shuffled.p.at(m, k) = pm.p.at(perm[m], k);
    }
  }
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(semantic::aggregate_or(shuffled)[k] ==
          doctest::Approx(semantic::aggregate_or(pm)[k]).epsilon(1e-12));
    CHECK(semantic::aggregate_xor(shuffled)[k] ==
          doctest::Approx(semantic::aggregate_xor(pm)[k]).epsilon(1e-12));
  }
  CHECK(semantic::ce_loss(shuffled, Aggregator::kOr) ==
        doctest::Approx(semantic::ce_loss(pm, Aggregator::kOr)).epsilon(1e-12));
  CHECK(semantic::cosine_loss(shuffled) ==
        doctest::Approx(semantic::cosine_loss(pm)).epsilon(1e-12));
}

TEST_CASE("ce_loss closed forms") {
  // Perfect prediction: only the clamp term remains.
  const PosteriorMatrix perfect = pm_from({{1.0, 0.0}}, {1, 0});
  CHECK(semantic::ce_loss(perfect, Aggregator::kOr) ==
        doctest::Approx(-2.0 * std::log(1.0 - semantic::kCeEpsilon)).epsilon(1e-9));
  CHECK(semantic::ce_loss(perfect, Aggregator::kOr) < 1e-6);

  const PosteriorMatrix half = pm_from({{0.5}}, {1});
  CHECK(semantic::ce_loss(half, Aggregator::kOr) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  const PosteriorMatrix two = pm_from({{0.9, 0.1}}, {1, 0});
  CHECK(semantic::ce_loss(two, Aggregator::kOr) ==
        doctest::Approx(-2.0 * std::log(0.9)).epsilon(1e-12));
  CHECK(semantic::ce_loss(two, Aggregator::kOr) == doctest::Approx(0.2107).epsilon(1e-3));
}

TEST_CASE("cosine loss: identical, orthogonal, and the 3-source mixed case") {
  const PosteriorMatrix same = pm_from({{0.4, 0.2}, {0.4, 0.2}}, {1, 0});
  CHECK(semantic::cosine_loss(same) == doctest::Approx(2.0).epsilon(1e-9));

  const PosteriorMatrix ortho = pm_from({{1.0, 0.0}, {0.0, 1.0}}, {1, 1});
  CHECK(semantic::cosine_loss(ortho) == 1.0);

  const PosteriorMatrix mixed =
      pm_from({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, {1, 1});
  CHECK(semantic::cosine_loss(mixed) == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
}

TEST_CASE("cosine loss: invariant to positive rescaling of one posterior") {
  Rng rng(53);
  const PosteriorMatrix pm = random_pm(rng, 3, 4, 0.1, 0.5);
  PosteriorMatrix scaled = pm;
  for (std::size_t k = 0; k < 4; ++k) scaled.p.at(1, k) *= 1.9;
  CHECK(semantic::cosine_loss(scaled) ==
        doctest::Approx(semantic::cosine_loss(pm)).epsilon(1e-9));
  CHECK_THROWS_AS(semantic::cosine_loss(pm_from({{0.5}}, {1})),
                  std::invalid_argument);
}

TEST_CASE("ce and cosine gradients match finite differences in posterior space") {
  Rng rng(54);
  for (int trial = 0; trial < 10; ++trial) {
    const PosteriorMatrix pm = random_pm(rng, 3, 4, 0.1, 0.9);

    for (Aggregator agg : {Aggregator::kOr, Aggregator::kXor}) {
      const Matrix grad = semantic::ce_loss_grad(pm, agg);
      for (int probe = 0; probe < 20; ++probe) {
        const std::size_t m = rng.bounded(3);
        const std::size_t k = rng.bounded(4);
        const double fd = fd_posterior(
            [&](const PosteriorMatrix& q) { return semantic::ce_loss(q, agg); },
            pm, m, k, 1e-6);
        const double an = grad.at(m, k);
        CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}) < 1e-4);
      }
    }

    const Matrix cos_grad = semantic::cosine_loss_grad(pm);
    for (int probe = 0; probe < 20; ++probe) {
      const std::size_t m = rng.bounded(3);
      const std::size_t k = rng.bounded(4);
      const double fd = fd_posterior(
          [&](const PosteriorMatrix& q) { return semantic::cosine_loss(q); },
          pm, m, k, 1e-6);
      const double an = cos_grad.at(m, k);
      CHECK(std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-6}) < 1e-4);
    }
  }
}

TEST_CASE("toy classifier: calibration targets on datagen archetypes") {
  const datagen::Manifest m = datagen::default_manifest();
  const std::size_t len = m.clip_length();
  const semantic::ToyClassifier classifier(m.bands, m.sample_rate, len);
  const auto& grid = classifier.probe_frequencies(1);

  datagen::SourceArchetype tone;
  tone.kind = datagen::ArchetypeKind::kTone;
  tone.frequency_hz = grid[grid.size() / 2];
  tone.amplitude = m.bands.reference_amplitude;
  tone.onset_sec = 0.0;
  tone.offset_sec = m.clip_seconds;
  tone.seed = 99;
  const Waveform pure = datagen::synth_source(tone, m.sample_rate, len);
  const std::vector<double> scores = classifier.posteriors(pure);
  for (std::size_t k = 0; k < scores.size(); ++k) {
    if (k == 1) CHECK(scores[k] > 0.95);
    else CHECK(scores[k] < 0.05);
  }

  const Waveform silence{std::vector<double>(len, 0.0), m.sample_rate};
  for (double v : classifier.posteriors(silence)) CHECK(v < 0.05);

  // Two tones in distinct bands score on both.
  datagen::SourceArchetype other = tone;
  other.frequency_hz = classifier.probe_frequencies(3)[2];
  other.seed = 100;
  Waveform duet = pure;
  const Waveform second = datagen::synth_source(other, m.sample_rate, len);
  for (std::size_t t = 0; t < len; ++t) duet.samples[t] += second.samples[t];
  const std::vector<double> duet_scores = classifier.posteriors(duet);
  CHECK(duet_scores[1] > 0.9);
  CHECK(duet_scores[3] > 0.9);
  CHECK(duet_scores[0] < 0.05);
  CHECK(duet_scores[2] < 0.05);
}

TEST_CASE("toy classifier rejects invalid band specs") {
  semantic::BandSpec overlapping;
  overlapping.bands = {{200.0, 900.0}, {800.0, 1200.0}};
  CHECK_THROWS_AS(semantic::ToyClassifier(overlapping, 8000, 1000),
                  std::invalid_argument);
  semantic::BandSpec beyond;
  beyond.bands = {{3500.0, 4200.0}};
  CHECK_THROWS_AS(semantic::ToyClassifier(beyond, 8000, 1000),
                  std::invalid_argument);
}

TEST_CASE("toy classifier: waveform-space gradient matches finite differences") {
  const datagen::Manifest m = datagen::default_manifest();
  const std::size_t len = 400;  // short clip keeps FD affordable
  const semantic::ToyClassifier classifier(m.bands, m.sample_rate, len);

  Rng rng(55);
  Waveform w = oracles::random_wave(rng, len, 0.2, m.sample_rate);
  const auto& probes = classifier.probe_frequencies(0);
  for (std::size_t t = 0; t < len; ++t) {
    w.samples[t] += 0.4 * std::sin(2.0 * 3.14159265358979 * probes[1] * t / m.sample_rate);
  }

  // d(sum of scores)/d(w) against FD.
  std::vector<double> dscore(classifier.num_classes(), 1.0);
  std::vector<double> grad(len, 0.0);
  classifier.accumulate_waveform_gradient(w, dscore, &grad);

  const auto total_score = [&](const Waveform& x) {
    double acc = 0.0;
    for (double v : classifier.posteriors(x)) acc += v;
    return acc;
  };
  for (int probe = 0; probe < 40; ++probe) {
    const std::size_t t = rng.bounded(len);
    Waveform plus = w, minus = w;
    plus.samples[t] += 1e-5;
    minus.samples[t] -= 1e-5;
    const double fd = (total_score(plus) - total_score(minus)) / 2e-5;
    CHECK(std::abs(fd - grad[t]) /
              std::max({std::abs(fd), std::abs(grad[t]), 1e-6}) <
          1e-4);
  }
}
