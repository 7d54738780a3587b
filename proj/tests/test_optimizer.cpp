#include <doctest.h>

#include <cmath>

#include "mixkit/datagen.hpp"
#include "mixkit/metrics.hpp"
#include "mixkit/optimizer.hpp"
#include "mixkit/semantic.hpp"
#include "mixkit/signal.hpp"
#include "oracles.hpp"

using namespace mixkit;

namespace {

// Two full-support tones in different bands, probe-grid aligned.
MixtureBatch tone_pair_batch(const datagen::Manifest& m, std::uint64_t seed) {
  const auto grid =
      semantic::probe_grid(m.bands, m.sample_rate, m.clip_length());
  Rng rng(seed);
  std::vector<Waveform> refs;
  for (int band : {0, 2}) {
    datagen::SourceArchetype arch;
    arch.kind = datagen::ArchetypeKind::kTone;
    arch.amplitude = rng.uniform(0.3, 0.6);
    arch.onset_sec = 0.0;
    arch.offset_sec = m.clip_seconds;
    arch.frequency_hz = grid[band][1 + rng.bounded(grid[band].size() - 2)];
    arch.seed = rng.next();
    refs.push_back(datagen::synth_source(arch, m.sample_rate, m.clip_length()));
  }
  return MixtureBatch::from_references(std::move(refs));
}

datagen::Manifest short_manifest() {
  datagen::Manifest m = datagen::default_manifest();
  m.clip_seconds = 0.125;
  return m;
}

}  // namespace

TEST_CASE("composite loss with zero weights equals the MixIT loss alone") {
  Rng rng(81);
  const MixtureBatch batch = oracles::random_batch(rng, 2, 64);
  const SourceSet s = oracles::random_sources(rng, 4, 64);
  optimizer::LossConfig cfg;
  cfg.num_sources = 4;
  const optimizer::LossBreakdown out =
      optimizer::composite_loss_and_grad(batch, s, cfg, nullptr, nullptr);
  const mixit::MixitResult expected = mixit::exhaustive_mixit(batch, s, 30.0);
  CHECK(out.total == expected.total_loss);
  CHECK(out.mixit_loss == expected.total_loss);
  CHECK(out.assignment == expected.assignment);
}

TEST_CASE("composite loss value is permutation-invariant over sources") {
  Rng rng(82);
  const MixtureBatch batch = oracles::random_batch(rng, 2, 48);
  const SourceSet s = oracles::random_sources(rng, 4, 48);
  optimizer::LossConfig cfg;
  cfg.num_sources = 4;
  cfg.weight_l1 = 0.7;
  cfg.weight_l1l2 = 1.3;
  cfg.weight_cov = 0.4;
  const double base =
      optimizer::composite_loss_and_grad(batch, s, cfg, nullptr, nullptr).total;
  SourceSet shuffled = make_source_set({s[2], s[0], s[3], s[1]});
  const double permuted =
      optimizer::composite_loss_and_grad(batch, shuffled, cfg, nullptr, nullptr)
          .total;
  CHECK(permuted == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("composite gradient matches finite differences with all weights on") {
  const datagen::Manifest m = short_manifest();
  const MixtureBatch batch = tone_pair_batch(m, 83);
  const semantic::ToyClassifier classifier(m.bands, m.sample_rate,
                                           batch.length());
  optimizer::SemanticContext sem;
  sem.classifier = &classifier;
  sem.labels = {1, 0, 1, 0};

  optimizer::LossConfig cfg;
  cfg.num_sources = 3;
  cfg.weight_l1 = 1.0;
  cfg.weight_l1l2 = 1.0;
  cfg.weight_cov = 1.0;
  cfg.weight_ce = 1.0;
  cfg.weight_cos = 1.0;

  Rng rng(84);
  SourceSet s = oracles::random_sources(rng, 3, batch.length(), 0.3);
  SourceSet grad;
  optimizer::composite_loss_and_grad(batch, s, cfg, &sem, &grad);
  const auto loss = [&](const SourceSet& point) {
    return optimizer::composite_loss_and_grad(batch, point, cfg, &sem, nullptr)
        .total;
  };
  CHECK(oracles::max_grad_mismatch(loss, s, grad, 80, rng, 1e-6) < 1e-4);
}

TEST_CASE("composite loss at fixed posteriors adds constants only") {
  Rng rng(85);
  const MixtureBatch batch = oracles::random_batch(rng, 2, 40);
  const SourceSet s = oracles::random_sources(rng, 3, 40);

  semantic::PosteriorMatrix pm;
  pm.p = Matrix(3, 4);
  for (double& v : pm.p.data) v = rng.uniform(0.1, 0.9);
  pm.labels = {1, 0, 0, 1};

  optimizer::LossConfig cfg;
  cfg.num_sources = 3;
  cfg.weight_ce = 2.0;
  cfg.weight_cos = 1.5;

  SourceSet grad_with, grad_without;
  const optimizer::LossBreakdown with_sem =
      optimizer::composite_loss_at_posteriors(batch, s, cfg, &pm, &grad_with);
  optimizer::LossConfig plain = cfg;
  plain.weight_ce = 0.0;
  plain.weight_cos = 0.0;
  const optimizer::LossBreakdown without_sem =
      optimizer::composite_loss_and_grad(batch, s, plain, nullptr,
                                         &grad_without);

  CHECK(with_sem.total ==
        doctest::Approx(without_sem.total + 2.0 * semantic::ce_loss(pm, cfg.aggregator) +
                        1.5 * semantic::cosine_loss(pm))
            .epsilon(1e-12));
  for (std::size_t m = 0; m < 3; ++m) {
    CHECK(grad_with[m].samples == grad_without[m].samples);
  }
  CHECK_THROWS_AS(
      optimizer::composite_loss_at_posteriors(batch, s, cfg, nullptr, nullptr),
      std::invalid_argument);
}

TEST_CASE("optimizer: separable tones with zero weights reach the true-source level") {
  const datagen::Manifest m = short_manifest();
  const MixtureBatch batch = tone_pair_batch(m, 86);
  optimizer::LossConfig cfg;
  cfg.num_sources = 4;

  const optimizer::OptimResult run = optimizer::optimize_estimates(
      batch, cfg, 1500, optimizer::kDefaultStepSize, 5);
  CHECK(run.loss_trace.back() <= -50.0);

  // Within 1 dB of the loss achieved when starting at the true sources.
  const std::size_t len = batch.length();
  SourceSet truth = make_source_set(
      {batch.references[0], batch.references[1],
       Waveform{std::vector<double>(len, 0.0), m.sample_rate},
       Waveform{std::vector<double>(len, 0.0), m.sample_rate}});
  const double truth_loss =
      optimizer::composite_loss_and_grad(batch, truth, cfg, nullptr, nullptr)
          .total;
  CHECK(run.loss_trace.back() <= truth_loss + 1.0);
}

TEST_CASE("optimizer: determinism and mixture consistency at every step") {
  const datagen::Manifest m = short_manifest();
  const MixtureBatch batch = tone_pair_batch(m, 87);
  optimizer::LossConfig cfg;
  cfg.num_sources = 4;
  cfg.weight_l1l2 = 8.0;

  optimizer::EstimateOptimizer opt(batch, cfg, optimizer::kDefaultStepSize, 9);
  const double mom_rms = signal::rms_raw(batch.mom);
  for (int step = 0; step < 120; ++step) {
    opt.step();
    double worst = 0.0;
    for (std::size_t t = 0; t < batch.length(); ++t) {
      double sum = 0.0;
      for (std::size_t j = 0; j < opt.estimates().count(); ++j) {
        sum += opt.estimates()[j].samples[t];
      }
      worst = std::max(worst, std::abs(sum - batch.mom.samples[t]));
    }
    CHECK(worst <= 1e-6 * mom_rms);
  }

  const optimizer::OptimResult a =
      optimizer::optimize_estimates(batch, cfg, 150, 3e-3, 17);
  const optimizer::OptimResult b =
      optimizer::optimize_estimates(batch, cfg, 150, 3e-3, 17);
  for (std::size_t j = 0; j < a.estimates.count(); ++j) {
    CHECK(a.estimates[j].samples == b.estimates[j].samples);
  }
  CHECK(a.loss_trace == b.loss_trace);
}

TEST_CASE("optimizer: envelope gradient is a descent direction at sampled iterates") {
  const datagen::Manifest m = short_manifest();
  const MixtureBatch batch = tone_pair_batch(m, 88);
  optimizer::LossConfig cfg;
  cfg.num_sources = 3;
  cfg.weight_l1l2 = 2.0;
  cfg.weight_cov = 0.5;

  optimizer::EstimateOptimizer opt(batch, cfg, optimizer::kDefaultStepSize, 21);
  for (int checkpoint = 0; checkpoint < 4; ++checkpoint) {
    for (int i = 0; i < 40; ++i) opt.step();
    SourceSet grad;
    const optimizer::LossBreakdown here = optimizer::composite_loss_and_grad(
        batch, opt.estimates(), cfg, nullptr, &grad);
    double grad_sq = 0.0;
    for (std::size_t j = 0; j < grad.count(); ++j) {
      grad_sq += sum_squares(grad[j].samples);
    }
    if (grad_sq < 1e-16) continue;  // saturated; nothing to descend
    const double eta = 1e-7 / std::sqrt(grad_sq);
    SourceSet moved = opt.estimates();
    for (std::size_t j = 0; j < moved.count(); ++j) {
      for (std::size_t t = 0; t < moved.length(); ++t) {
        moved[j].samples[t] -= eta * grad[j].samples[t];
      }
    }
    const double after =
        optimizer::composite_loss_and_grad(batch, moved, cfg, nullptr, nullptr)
            .total;
    CHECK(after <= here.total + 1e-12);
  }
}

TEST_CASE("optimizer: loss trace is softly non-increasing over 50-step windows") {
  const datagen::Manifest m = short_manifest();
  const MixtureBatch batch = tone_pair_batch(m, 89);
  optimizer::LossConfig cfg;
  cfg.num_sources = 4;
  const optimizer::OptimResult run = optimizer::optimize_estimates(
      batch, cfg, 600, optimizer::kDefaultStepSize, 31);

  std::vector<double> window_means;
  for (std::size_t begin = 0; begin + 50 <= 600; begin += 50) {
    double acc = 0.0;
    for (std::size_t i = begin; i < begin + 50; ++i) acc += run.loss_trace[i];
    window_means.push_back(acc / 50.0);
  }
  for (std::size_t w = 1; w < window_means.size(); ++w) {
    CHECK(window_means[w] <= window_means[w - 1] + 0.5);  // soft check
  }
}

TEST_CASE("optimizer rejects bad configs and traces divergence") {
  Rng rng(90);
  const MixtureBatch batch = oracles::random_batch(rng, 2, 32);
  optimizer::LossConfig cfg;
  cfg.num_sources = 0;
  CHECK_THROWS_AS(optimizer::optimize_estimates(batch, cfg, 10, 1e-2, 1),
                  std::invalid_argument);
  cfg.num_sources = 2;
  cfg.weight_l1 = -1.0;
  CHECK_THROWS_AS(optimizer::optimize_estimates(batch, cfg, 10, 1e-2, 1),
                  std::invalid_argument);
  cfg.weight_l1 = 0.0;
  CHECK_THROWS_AS(optimizer::optimize_estimates(batch, cfg, 0, 1e-2, 1),
                  std::invalid_argument);
  cfg.weight_ce = 1.0;  // semantic weight without a classifier context
  CHECK_THROWS_AS(optimizer::optimize_estimates(batch, cfg, 10, 1e-2, 1),
                  std::invalid_argument);
}

TEST_CASE("sweep: one tiny config row has all fields populated; grid rules hold") {
  datagen::Manifest m = datagen::default_manifest();
  m.clip_seconds = 0.125;
  m.train_examples = 0;
  m.eval_examples = 4;
  m.seed = 777;
  const datagen::Dataset dataset = datagen::generate_dataset(m);

  optimizer::SweepRow row;
  row.family = "l1l2";
  row.lambda = 4.0;
  row.cfg.num_sources = 8;
  row.cfg.weight_l1l2 = 4.0;

  const std::vector<optimizer::SweepRow> rows =
      optimizer::sweep({row}, dataset, 60, 3e-3, 11);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].best);
  CHECK(rows[0].mom_runs == 2);
  CHECK(std::isfinite(rows[0].msi_db));
  CHECK(std::isfinite(rows[0].momi_db));
  CHECK(rows[0].selection_score ==
        doctest::Approx(3.0 * rows[0].msi_db + rows[0].one_s_db));

  CHECK_THROWS_AS(optimizer::sweep({}, dataset, 10, 1e-2, 1),
                  std::invalid_argument);

  // Determinism: identical calls, identical rows.
  const std::vector<optimizer::SweepRow> again =
      optimizer::sweep({row}, dataset, 60, 3e-3, 11);
  CHECK(again[0].msi_db == rows[0].msi_db);
  CHECK(again[0].one_s_db == rows[0].one_s_db);
  CHECK(again[0].momi_db == rows[0].momi_db);
  CHECK(again[0].mean_active_sources == rows[0].mean_active_sources);
}

TEST_CASE("sweep rejects semantic weights on band-unconfined manifests") {
  datagen::Manifest m = datagen::default_manifest();  // includes impulse_train
  m.clip_seconds = 0.125;
  m.train_examples = 0;
  m.eval_examples = 2;
  const datagen::Dataset dataset = datagen::generate_dataset(m);
  optimizer::SweepRow row;
  row.cfg.num_sources = 2;
  row.cfg.weight_ce = 1.0;
  CHECK_THROWS_AS(optimizer::sweep({row}, dataset, 5, 1e-2, 1),
                  std::invalid_argument);
}
