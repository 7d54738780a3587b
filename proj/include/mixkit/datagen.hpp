#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mixkit/metrics.hpp"
#include "mixkit/rng.hpp"
#include "mixkit/semantic.hpp"
#include "mixkit/types.hpp"

namespace mixkit {
namespace datagen {

enum class ArchetypeKind { kTone, kChirp, kAmNoise, kImpulseTrain };

std::string kind_name(ArchetypeKind kind);
ArchetypeKind kind_from_name(const std::string& name);

/// Parameters of one synthetic source. Frequencies are in Hz; a tone uses
/// frequency_hz alone, a chirp steps through num_components frequencies
/// frequency_hz + i * frequency_step_hz (phase-continuous), AM noise sums
/// num_components random-phase carriers on the same ladder under a
/// (1 + 0.3 sin) envelope at envelope_hz, and an impulse train fires at
/// multiples of round(sample_rate / frequency_hz).
struct SourceArchetype {
  ArchetypeKind kind = ArchetypeKind::kTone;
  int class_id = 0;
  double frequency_hz = 440.0;
  double frequency_step_hz = 0.0;
  int num_components = 1;
  double envelope_hz = 0.0;
  double amplitude = 0.5;
  double onset_sec = 0.0;
  double offset_sec = 1.0;
  std::uint64_t seed = 0;
};

/// Deterministic generation recipe. Identical manifests generate
/// bit-identical corpora.
struct Manifest {
  int format_version = 1;
  std::uint64_t seed = 7;
  int sample_rate = 8000;
  double clip_seconds = 1.0;
  int train_examples = 16;
  int eval_examples = 16;
  double amplitude_lo = 0.25;
  double amplitude_hi = 0.7;
  std::vector<ArchetypeKind> class_kinds = {
      ArchetypeKind::kTone, ArchetypeKind::kChirp, ArchetypeKind::kAmNoise,
      ArchetypeKind::kImpulseTrain};
  semantic::BandSpec bands;
  std::string rng_name = "xoshiro256++";

  std::size_t num_classes() const { return class_kinds.size(); }
  std::size_t clip_length() const {
    return static_cast<std::size_t>(clip_seconds * sample_rate + 0.5);
  }
};

Manifest default_manifest();

/// Manifest whose classes are all band-confined (tone/chirp), for experiments
/// that enable the classification losses.
Manifest semantic_manifest();

/// Plain-text key/value serialization with a leading format-version line.
/// Fixed key order and number formatting; this is the hashing input.
std::string canonical_manifest(const Manifest& m);

/// Throws std::runtime_error on unknown keys, bad values, or a missing/wrong
/// format-version line.
Manifest parse_manifest(const std::string& text);

Manifest load_manifest(const std::string& path);

/// FNV-1a 64 over the canonical serialization, as 16 hex digits.
std::string manifest_hash(const Manifest& m);

/// Deterministic waveform for one archetype; samples are quantized to
/// float32 so WAV round-trips are bit-exact. Throws on invalid parameters
/// (frequency beyond Nyquist, onset >= offset, RMS outside [0.01, 1]).
Waveform synth_source(const SourceArchetype& a, int sample_rate,
                      std::size_t length);

/// Draws 1-4 archetypes with distinct class ids, sums them into the input
/// mixture, and records the one-hot label union. Estimates are left empty.
metrics::EvalExample make_eval_example(Rng& rng, const Manifest& m);

struct MomExample {
  MixtureBatch batch;
  std::vector<int> labels;  // elementwise OR of the constituents
  /// References of both constituents against the MoM input, for MSi.
  metrics::EvalExample combined;
};

/// Two independently drawn eval examples; their mixtures become the
/// references and their sum the mixture of mixtures.
MomExample make_mom_example(Rng& rng, const Manifest& m);

struct Dataset {
  Manifest manifest;
  std::vector<metrics::EvalExample> train;
  std::vector<metrics::EvalExample> eval;
};

/// Every example is keyed by an index-derived sub-seed, so regeneration of
/// any single example is independent of the rest.
Dataset generate_dataset(const Manifest& m);

/// Layout: <root>/manifest.txt, <root>/manifest.hash,
/// <root>/<split>/<example_id>/{mixture.wav, source_0.wav, ..., labels.txt}.
void write_dataset(const std::string& root, const Dataset& dataset);

/// Verifies the stored manifest hash before loading; throws on mismatch or
/// malformed contents.
Dataset read_dataset(const std::string& root);

}  // namespace datagen
}  // namespace mixkit
