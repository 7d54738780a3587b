#include "mixkit/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "mixkit/metrics.hpp"
#include "mixkit/parallel.hpp"
#include "mixkit/regularizers.hpp"
#include "mixkit/rng.hpp"
#include "mixkit/signal.hpp"

namespace mixkit {
namespace optimizer {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEpsilon = 1e-8;
constexpr double kInitNoiseDb = -40.0;

void axpy(double a, const SourceSet& x, SourceSet* y) {
  for (std::size_t m = 0; m < x.count(); ++m) {
    for (std::size_t t = 0; t < x.length(); ++t) {
      y->sources[m].samples[t] += a * x[m].samples[t];
    }
  }
}

mixit::MixitResult solve_assignment(const MixtureBatch& batch,
                                    const SourceSet& s, double snr_max_db) {
  if (mixit::assignment_count(batch.count(), s.count()) <= kAssignmentAutoCap) {
    return mixit::exhaustive_mixit(batch, s, snr_max_db, kAssignmentAutoCap);
  }
  return mixit::efficient_mixit(batch, s, snr_max_db);
}

}  // namespace

void validate(const LossConfig& cfg) {
  if (cfg.snr_max_db <= 0.0) {
    throw std::invalid_argument("loss config: snr_max_db must be positive");
  }
  if (cfg.weight_l1 < 0.0 || cfg.weight_l1l2 < 0.0 || cfg.weight_cov < 0.0 ||
      cfg.weight_ce < 0.0 || cfg.weight_cos < 0.0) {
    throw std::invalid_argument("loss config: weights must be nonnegative");
  }
  if (cfg.num_sources < 1) {
    throw std::invalid_argument("loss config: num_sources must be >= 1");
  }
}

LossBreakdown composite_loss_and_grad(const MixtureBatch& batch,
                                      const SourceSet& s, const LossConfig& cfg,
                                      const SemanticContext* sem,
                                      SourceSet* grad_out) {
  validate(cfg);
  if (cfg.uses_semantic() && (sem == nullptr || sem->classifier == nullptr)) {
    throw std::invalid_argument(
        "composite loss: semantic weights need a classifier context");
  }

  LossBreakdown out;
  const mixit::MixitResult mixit_result =
      solve_assignment(batch, s, cfg.snr_max_db);
  out.assignment = mixit_result.assignment;
  out.mixit_loss = mixit_result.total_loss;
  out.total = mixit_result.total_loss;

  if (grad_out != nullptr) {
    *grad_out =
        mixit::mixit_loss_gradient(batch, s, cfg.snr_max_db, out.assignment);
  }

  if (cfg.weight_l1 > 0.0) {
    out.l1 = regularizers::sparsity_l1(s, batch.mom);
    out.total += cfg.weight_l1 * out.l1;
    if (grad_out != nullptr) {
      axpy(cfg.weight_l1,
           regularizers::regularizer_gradients(s, batch.mom,
                                               regularizers::RegLoss::kL1),
           grad_out);
    }
  }
  if (cfg.weight_l1l2 > 0.0) {
    out.l1_l2 = regularizers::sparsity_l1_l2(s);
    out.total += cfg.weight_l1l2 * out.l1_l2;
    if (grad_out != nullptr) {
      axpy(cfg.weight_l1l2,
           regularizers::regularizer_gradients(
               s, batch.mom, regularizers::RegLoss::kL1OverL2),
           grad_out);
    }
  }
  if (cfg.weight_cov > 0.0) {
    out.covariance = regularizers::covariance_loss(s);
    out.total += cfg.weight_cov * out.covariance;
    if (grad_out != nullptr) {
      axpy(cfg.weight_cov,
           regularizers::regularizer_gradients(
               s, batch.mom, regularizers::RegLoss::kCovariance),
           grad_out);
    }
  }

  if (cfg.uses_semantic()) {
    const semantic::PosteriorMatrix pm =
        sem->classifier->classify(s, sem->labels);
    Matrix dloss_dp(pm.num_sources(), pm.num_classes());
    if (cfg.weight_ce > 0.0) {
      out.ce = semantic::ce_loss(pm, cfg.aggregator);
      out.total += cfg.weight_ce * out.ce;
      const Matrix g = semantic::ce_loss_grad(pm, cfg.aggregator);
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        dloss_dp.data[i] += cfg.weight_ce * g.data[i];
      }
    }
    if (cfg.weight_cos > 0.0) {
      out.cosine = semantic::cosine_loss(pm);
      out.total += cfg.weight_cos * out.cosine;
      const Matrix g = semantic::cosine_loss_grad(pm);
      for (std::size_t i = 0; i < g.data.size(); ++i) {
        dloss_dp.data[i] += cfg.weight_cos * g.data[i];
      }
    }
    if (grad_out != nullptr) {
      std::vector<double> dscore(pm.num_classes());
      for (std::size_t m = 0; m < s.count(); ++m) {
        for (std::size_t k = 0; k < pm.num_classes(); ++k) {
          dscore[k] = dloss_dp.at(m, k);
        }
        sem->classifier->accumulate_waveform_gradient(
            s[m], dscore, &grad_out->sources[m].samples);
      }
    }
  }
  return out;
}

LossBreakdown composite_loss_at_posteriors(
    const MixtureBatch& batch, const SourceSet& s, const LossConfig& cfg,
    const semantic::PosteriorMatrix* posteriors, SourceSet* grad_out) {
  validate(cfg);
  if (cfg.uses_semantic() && posteriors == nullptr) {
    throw std::invalid_argument(
        "composite loss: semantic weights need posteriors");
  }

  LossConfig without_semantic = cfg;
  without_semantic.weight_ce = 0.0;
  without_semantic.weight_cos = 0.0;
  LossBreakdown out =
      composite_loss_and_grad(batch, s, without_semantic, nullptr, grad_out);

  // Fixed posteriors: the semantic terms are constants of the sources here,
  // so they add to the value only.
  if (cfg.weight_ce > 0.0) {
    out.ce = semantic::ce_loss(*posteriors, cfg.aggregator);
    out.total += cfg.weight_ce * out.ce;
  }
  if (cfg.weight_cos > 0.0) {
    out.cosine = semantic::cosine_loss(*posteriors);
    out.total += cfg.weight_cos * out.cosine;
  }
  return out;
}

EstimateOptimizer::EstimateOptimizer(const MixtureBatch& batch,
                                     const LossConfig& cfg, double step_size,
                                     std::uint64_t seed,
                                     const SemanticContext* sem)
    : batch_(batch), cfg_(cfg), sem_(sem), step_size_(step_size) {
  validate(cfg);
  const std::size_t len = batch.length();
  const std::size_t num_sources = static_cast<std::size_t>(cfg.num_sources);

  // mom/M plus seeded noise at -40 dB relative; identical sources would
  // receive identical gradients forever.
  Rng rng(seed);
  const double noise_rms =
      signal::rms_raw(batch.mom) * std::pow(10.0, kInitNoiseDb / 20.0);
  const double share = 1.0 / static_cast<double>(num_sources);
  std::vector<Waveform> sources(num_sources);
  for (Waveform& src : sources) {
    src.sample_rate = batch.mom.sample_rate;
    src.samples.resize(len);
    for (std::size_t t = 0; t < len; ++t) {
      src.samples[t] = share * batch.mom.samples[t] + noise_rms * rng.gaussian();
    }
  }
  estimates_ = make_source_set(std::move(sources));
  estimates_ = signal::mixture_consistency_project(estimates_, batch.mom);

  moment1_.assign(num_sources, std::vector<double>(len, 0.0));
  moment2_.assign(num_sources, std::vector<double>(len, 0.0));
}

double EstimateOptimizer::current_loss() const {
  return composite_loss_and_grad(batch_, estimates_, cfg_, sem_, nullptr).total;
}

void EstimateOptimizer::step() {
  SourceSet grad;
  last_ = composite_loss_and_grad(batch_, estimates_, cfg_, sem_, &grad);
  trace_.push_back(last_.total);
  if (!std::isfinite(last_.total)) {
    throw std::runtime_error("optimizer diverged at step " +
                             std::to_string(steps_done_));
  }

  ++steps_done_;
  const double bias1 = 1.0 - std::pow(kAdamBeta1, steps_done_);
  const double bias2 = 1.0 - std::pow(kAdamBeta2, steps_done_);
  for (std::size_t m = 0; m < estimates_.count(); ++m) {
    std::vector<double>& m1 = moment1_[m];
    std::vector<double>& m2 = moment2_[m];
    for (std::size_t t = 0; t < estimates_.length(); ++t) {
      const double g = grad[m].samples[t];
      m1[t] = kAdamBeta1 * m1[t] + (1.0 - kAdamBeta1) * g;
      m2[t] = kAdamBeta2 * m2[t] + (1.0 - kAdamBeta2) * g * g;
      const double mhat = m1[t] / bias1;
      const double vhat = m2[t] / bias2;
      estimates_[m].samples[t] -=
          step_size_ * mhat / (std::sqrt(vhat) + kAdamEpsilon);
    }
  }
  estimates_ = signal::mixture_consistency_project(estimates_, batch_.mom);
}

OptimResult optimize_estimates(const MixtureBatch& batch, const LossConfig& cfg,
                               int steps, double step_size, std::uint64_t seed,
                               const SemanticContext* sem) {
  if (steps < 1) {
    throw std::invalid_argument("optimize_estimates: steps must be >= 1");
  }
  EstimateOptimizer opt(batch, cfg, step_size, seed, sem);
  for (int i = 0; i < steps; ++i) opt.step();
  OptimResult result;
  result.estimates = opt.estimates();
  result.loss_trace = opt.loss_trace();
  result.loss_trace.push_back(opt.current_loss());
  return result;
}

std::vector<SweepRow> sweep(const std::vector<SweepRow>& configs,
                            const datagen::Dataset& dataset, int steps,
                            double step_size, std::uint64_t seed) {
  if (configs.empty()) {
    throw std::invalid_argument("sweep: empty config grid");
  }
  if (dataset.eval.empty()) {
    throw std::invalid_argument("sweep: empty dataset");
  }

  const datagen::Manifest& manifest = dataset.manifest;
  bool any_semantic = false;
  for (const SweepRow& row : configs) {
    if (row.cfg.uses_semantic()) any_semantic = true;
  }
  semantic::ToyClassifier* classifier = nullptr;
  std::unique_ptr<semantic::ToyClassifier> classifier_storage;
  if (any_semantic) {
    for (datagen::ArchetypeKind kind : manifest.class_kinds) {
      if (kind != datagen::ArchetypeKind::kTone &&
          kind != datagen::ArchetypeKind::kChirp) {
        throw std::invalid_argument(
            "sweep: classification losses need band-confined (tone/chirp) "
            "archetypes");
      }
    }
    classifier_storage = std::make_unique<semantic::ToyClassifier>(
        manifest.bands, manifest.sample_rate, manifest.clip_length());
    classifier = classifier_storage.get();
  }

  // MoM pairs from consecutive eval examples; single-source examples double
  // as the 1S probes.
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i + 1 < dataset.eval.size(); i += 2) {
    pairs.push_back({i, i + 1});
  }
  for (const auto& [a, b] : pairs) {
    const std::size_t combined =
        dataset.eval[a].references.size() + dataset.eval[b].references.size();
    for (const SweepRow& row : configs) {
      if (static_cast<std::size_t>(row.cfg.num_sources) < combined) {
        throw std::invalid_argument(
            "sweep: num_sources must cover the references of every MoM pair "
            "(need >= " +
            std::to_string(combined) + ")");
      }
    }
  }
  std::vector<std::size_t> probes;
  for (std::size_t i = 0; i < dataset.eval.size(); ++i) {
    if (dataset.eval[i].references.size() == 1) probes.push_back(i);
  }

  std::vector<SweepRow> rows = configs;
  for (SweepRow& row : rows) {
    struct MomOutcome {
      double msi = 0.0;
      double momi = 0.0;
      double active = 0.0;
    };
    std::vector<MomOutcome> mom_out(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
      const metrics::EvalExample& a = dataset.eval[pairs[i].first];
      const metrics::EvalExample& b = dataset.eval[pairs[i].second];
      const MixtureBatch batch = MixtureBatch::from_references(
          {a.input_mixture, b.input_mixture});

      SemanticContext sem;
      SemanticContext* sem_ptr = nullptr;
      if (row.cfg.uses_semantic()) {
        sem.classifier = classifier;
        sem.labels.resize(manifest.num_classes());
        for (std::size_t k = 0; k < sem.labels.size(); ++k) {
          sem.labels[k] = a.label_vector[k] | b.label_vector[k];
        }
        sem_ptr = &sem;
      }

      const OptimResult result = optimize_estimates(
          batch, row.cfg, steps, step_size,
          Rng::derive(seed, 101, static_cast<std::uint64_t>(i)), sem_ptr);

      metrics::EvalExample combined;
      combined.references = a.references;
      combined.references.insert(combined.references.end(),
                                 b.references.begin(), b.references.end());
      combined.input_mixture = batch.mom;
      combined.estimates = result.estimates;

      const std::optional<double> msi_value = metrics::msi(combined);
      mom_out[i].msi = metrics::present_db(
          msi_value.value_or(-metrics::kDisplayCapDb));
      mom_out[i].momi =
          metrics::present_db(metrics::momi(batch, result.estimates,
                                            row.cfg.snr_max_db));
      mom_out[i].active = metrics::active_source_count(result.estimates);
    });

    std::vector<double> probe_out(probes.size(), 0.0);
    parallel_for(probes.size(), [&](std::size_t i) {
      const metrics::EvalExample& example = dataset.eval[probes[i]];
      const MixtureBatch batch =
          MixtureBatch::from_references({example.input_mixture});

      SemanticContext sem;
      SemanticContext* sem_ptr = nullptr;
      if (row.cfg.uses_semantic()) {
        sem.classifier = classifier;
        sem.labels = example.label_vector;
        sem_ptr = &sem;
      }

      const OptimResult result = optimize_estimates(
          batch, row.cfg, steps, step_size,
          Rng::derive(seed, 202, static_cast<std::uint64_t>(i)), sem_ptr);

      metrics::EvalExample probe = example;
      probe.estimates = result.estimates;
      probe_out[i] = metrics::present_db(metrics::one_s(probe));
    });

    double msi_acc = 0.0, momi_acc = 0.0, active_acc = 0.0;
    for (const MomOutcome& o : mom_out) {
      msi_acc += o.msi;
      momi_acc += o.momi;
      active_acc += o.active;
    }
    double one_s_acc = 0.0;
    for (double v : probe_out) one_s_acc += v;

    row.mom_runs = static_cast<int>(pairs.size());
    row.probe_runs = static_cast<int>(probes.size());
    row.msi_db = pairs.empty() ? 0.0 : msi_acc / pairs.size();
    row.momi_db = pairs.empty() ? 0.0 : momi_acc / pairs.size();
    row.mean_active_sources = pairs.empty() ? 0.0 : active_acc / pairs.size();
    row.one_s_db = probes.empty() ? 0.0 : one_s_acc / probes.size();
    row.selection_score = 3.0 * row.msi_db + row.one_s_db;
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].selection_score > rows[best].selection_score) best = i;
  }
  rows[best].best = true;
  return rows;
}

}  // namespace optimizer
}  // namespace mixkit
