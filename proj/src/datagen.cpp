#include "mixkit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mixkit/detmath.hpp"
#include "mixkit/signal.hpp"
#include "mixkit/wav_io.hpp"

namespace fs = std::filesystem;

namespace mixkit {
namespace datagen {

namespace {

std::string fmt_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_example_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06zu", index);
  return buf;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

double quantize_f32(double v) { return static_cast<double>(static_cast<float>(v)); }

std::string trim(const std::string& s) {
  const std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string item;
  while (std::getline(stream, item, ',')) parts.push_back(trim(item));
  return parts;
}

}  // namespace

std::string kind_name(ArchetypeKind kind) {
  switch (kind) {
    case ArchetypeKind::kTone: return "tone";
    case ArchetypeKind::kChirp: return "chirp";
    case ArchetypeKind::kAmNoise: return "am_noise";
    case ArchetypeKind::kImpulseTrain: return "impulse_train";
  }
  throw std::logic_error("unknown archetype kind");
}

ArchetypeKind kind_from_name(const std::string& name) {
  if (name == "tone") return ArchetypeKind::kTone;
  if (name == "chirp") return ArchetypeKind::kChirp;
  if (name == "am_noise") return ArchetypeKind::kAmNoise;
  if (name == "impulse_train") return ArchetypeKind::kImpulseTrain;
  throw std::runtime_error("manifest: unknown archetype kind: " + name);
}

Manifest default_manifest() {
  Manifest m;
  m.bands.bands = {{200.0, 600.0}, {700.0, 1300.0}, {1500.0, 2300.0},
                   {2600.0, 3400.0}};
  return m;
}

Manifest semantic_manifest() {
  Manifest m = default_manifest();
  m.class_kinds = {ArchetypeKind::kTone, ArchetypeKind::kChirp,
                   ArchetypeKind::kTone, ArchetypeKind::kChirp};
  m.amplitude_lo = 0.4;
  m.amplitude_hi = 0.7;
  return m;
}

std::string canonical_manifest(const Manifest& m) {
  std::string out = "mixkit-manifest v" + std::to_string(m.format_version) + "\n";
  out += "seed = " + std::to_string(m.seed) + "\n";
  out += "sample_rate = " + std::to_string(m.sample_rate) + "\n";
  out += "clip_seconds = " + fmt_number(m.clip_seconds) + "\n";
  out += "train_examples = " + std::to_string(m.train_examples) + "\n";
  out += "eval_examples = " + std::to_string(m.eval_examples) + "\n";
  out += "amplitude_lo = " + fmt_number(m.amplitude_lo) + "\n";
  out += "amplitude_hi = " + fmt_number(m.amplitude_hi) + "\n";
  out += "class_kinds = ";
  for (std::size_t i = 0; i < m.class_kinds.size(); ++i) {
    if (i > 0) out += ",";
    out += kind_name(m.class_kinds[i]);
  }
  out += "\n";
  for (std::size_t i = 0; i < m.bands.bands.size(); ++i) {
    out += "band_" + std::to_string(i) + " = " +
           fmt_number(m.bands.bands[i].lo_hz) + "," +
           fmt_number(m.bands.bands[i].hi_hz) + "\n";
  }
  out += "probe_spacing_hz = " + fmt_number(m.bands.probe_spacing_hz) + "\n";
  out += "reference_amplitude = " + fmt_number(m.bands.reference_amplitude) + "\n";
  out += "score_slope_per_db = " + fmt_number(m.bands.score_slope_per_db) + "\n";
  out += "score_margin_db = " + fmt_number(m.bands.score_margin_db) + "\n";
  out += "rng = " + m.rng_name + "\n";
  return out;
}

Manifest parse_manifest(const std::string& text) {
  std::stringstream stream(text);
  std::string line;
  if (!std::getline(stream, line) || trim(line) != "mixkit-manifest v1") {
    throw std::runtime_error("manifest: missing or unsupported format-version line");
  }
  Manifest m = default_manifest();
  m.bands.bands.clear();
  bool saw_kinds = false;
  std::vector<std::pair<std::size_t, semantic::FrequencyBand>> bands;

  while (std::getline(stream, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("manifest: malformed line: " + line);
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "seed") {
        m.seed = std::stoull(value);
      } else if (key == "sample_rate") {
        m.sample_rate = std::stoi(value);
      } else if (key == "clip_seconds") {
        m.clip_seconds = std::stod(value);
      } else if (key == "train_examples") {
        m.train_examples = std::stoi(value);
      } else if (key == "eval_examples") {
        m.eval_examples = std::stoi(value);
      } else if (key == "amplitude_lo") {
        m.amplitude_lo = std::stod(value);
      } else if (key == "amplitude_hi") {
        m.amplitude_hi = std::stod(value);
      } else if (key == "class_kinds") {
        m.class_kinds.clear();
        for (const std::string& name : split_csv(value)) {
          m.class_kinds.push_back(kind_from_name(name));
        }
        saw_kinds = true;
      } else if (key.rfind("band_", 0) == 0) {
        const std::size_t index = std::stoul(key.substr(5));
        const std::vector<std::string> parts = split_csv(value);
        if (parts.size() != 2) {
          throw std::runtime_error("manifest: band needs lo,hi: " + line);
        }
        bands.push_back(
            {index, {std::stod(parts[0]), std::stod(parts[1])}});
      } else if (key == "probe_spacing_hz") {
        m.bands.probe_spacing_hz = std::stod(value);
      } else if (key == "reference_amplitude") {
        m.bands.reference_amplitude = std::stod(value);
      } else if (key == "score_slope_per_db") {
        m.bands.score_slope_per_db = std::stod(value);
      } else if (key == "score_margin_db") {
        m.bands.score_margin_db = std::stod(value);
      } else if (key == "rng") {
        m.rng_name = value;
      } else {
        throw std::runtime_error("manifest: unknown key: " + key);
      }
    } catch (const std::invalid_argument&) {
      throw std::runtime_error("manifest: bad value for key: " + key);
    } catch (const std::out_of_range&) {
      throw std::runtime_error("manifest: value out of range for key: " + key);
    }
  }

  std::sort(bands.begin(), bands.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 0; i < bands.size(); ++i) {
    if (bands[i].first != i) {
      throw std::runtime_error("manifest: band indices must be contiguous from 0");
    }
    m.bands.bands.push_back(bands[i].second);
  }
  if (m.bands.bands.empty()) m.bands = default_manifest().bands;
  if (!saw_kinds && m.class_kinds.size() != m.bands.bands.size()) {
    m.class_kinds.resize(m.bands.bands.size(), ArchetypeKind::kTone);
  }
  if (m.class_kinds.size() != m.bands.bands.size()) {
    throw std::runtime_error("manifest: class_kinds count must match band count");
  }
  if (m.rng_name != "xoshiro256++") {
    throw std::runtime_error("manifest: unsupported rng: " + m.rng_name);
  }
  if (m.sample_rate <= 0 || m.clip_seconds <= 0.0 || m.train_examples < 0 ||
      m.eval_examples < 0 || m.amplitude_lo <= 0.0 ||
      m.amplitude_hi < m.amplitude_lo) {
    throw std::runtime_error("manifest: invalid field value");
  }
  return m;
}

Manifest load_manifest(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("manifest: cannot open: " + path);
  std::stringstream buffer;
  buffer << file.rdbuf();
  return parse_manifest(buffer.str());
}

std::string manifest_hash(const Manifest& m) {
  char buf[24];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_manifest(m))));
  return buf;
}

Waveform synth_source(const SourceArchetype& a, int sample_rate,
                      std::size_t length) {
  const double nyquist = 0.5 * sample_rate;
  if (a.amplitude <= 0.0 || a.frequency_hz <= 0.0 ||
      a.frequency_hz >= nyquist || a.onset_sec < 0.0 ||
      a.onset_sec >= a.offset_sec ||
      a.offset_sec > static_cast<double>(length) / sample_rate + 1e-9 ||
      a.num_components < 1) {
    throw std::invalid_argument("synth_source: invalid archetype parameters");
  }

  Rng rng(a.seed);
  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(length, 0.0);
  const std::size_t on = static_cast<std::size_t>(a.onset_sec * sample_rate);
  const std::size_t off = std::min(
      length, static_cast<std::size_t>(a.offset_sec * sample_rate + 0.5));
  const double inv_rate = 1.0 / sample_rate;

  switch (a.kind) {
    case ArchetypeKind::kTone: {
      const double phase = rng.uniform();
      for (std::size_t t = on; t < off; ++t) {
        w.samples[t] = a.amplitude * detmath::sin_turns(
                                         a.frequency_hz * t * inv_rate + phase);
      }
      break;
    }
    case ArchetypeKind::kChirp: {
      // Phase-continuous frequency steps; the boundary discontinuities would
      // otherwise spray energy across every band.
      const std::size_t segments = static_cast<std::size_t>(a.num_components);
      const std::size_t span = off - on;
      double phase = rng.uniform();
      for (std::size_t seg = 0; seg < segments; ++seg) {
        const std::size_t seg_begin = on + span * seg / segments;
        const std::size_t seg_end = on + span * (seg + 1) / segments;
        const double freq = a.frequency_hz + a.frequency_step_hz * seg;
        if (freq >= nyquist) {
          throw std::invalid_argument("synth_source: chirp exceeds Nyquist");
        }
        for (std::size_t t = seg_begin; t < seg_end; ++t) {
          w.samples[t] = a.amplitude *
                         detmath::sin_turns(
                             phase + freq * (t - seg_begin) * inv_rate);
        }
        phase += freq * static_cast<double>(seg_end - seg_begin) * inv_rate;
      }
      break;
    }
    case ArchetypeKind::kAmNoise: {
      const int carriers = a.num_components;
      const double carrier_amp = a.amplitude / std::sqrt(carriers);
      std::vector<double> phases(carriers);
      for (double& p : phases) p = rng.uniform();
      const double env_phase = rng.uniform();
      for (std::size_t t = on; t < off; ++t) {
        double acc = 0.0;
        for (int c = 0; c < carriers; ++c) {
          const double freq = a.frequency_hz + a.frequency_step_hz * c;
          acc += carrier_amp *
                 detmath::sin_turns(freq * t * inv_rate + phases[c]);
        }
        const double env =
            1.0 + 0.3 * detmath::sin_turns(a.envelope_hz * t * inv_rate +
                                           env_phase);
        w.samples[t] = acc * env;
      }
      break;
    }
    case ArchetypeKind::kImpulseTrain: {
      const std::size_t period = static_cast<std::size_t>(
          std::max(1.0, std::round(sample_rate / a.frequency_hz)));
      for (std::size_t t = on; t < off; ++t) {
        if (t % period == 0) w.samples[t] = a.amplitude;
      }
      break;
    }
  }

  for (double& v : w.samples) v = quantize_f32(v);
  const double level = signal::rms_raw(w);
  if (level < 0.01 || level > 1.0) {
    throw std::invalid_argument("synth_source: RMS outside [0.01, 1]");
  }
  return w;
}

metrics::EvalExample make_eval_example(Rng& rng, const Manifest& m) {
  const std::size_t length = m.clip_length();
  const std::vector<std::vector<double>> grid =
      semantic::probe_grid(m.bands, m.sample_rate, length);
  const std::size_t num_classes = m.num_classes();

  std::size_t count = 1 + rng.bounded(4);
  count = std::min(count, num_classes);

  std::vector<std::size_t> classes(num_classes);
  for (std::size_t i = 0; i < num_classes; ++i) classes[i] = i;
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t j = i + rng.bounded(num_classes - i);
    std::swap(classes[i], classes[j]);
  }
  classes.resize(count);
  std::sort(classes.begin(), classes.end());

  metrics::EvalExample example;
  example.label_vector.assign(num_classes, 0);
  for (std::size_t class_id : classes) {
    const std::vector<double>& probes = grid[class_id];
    const double spacing = probes.size() > 1 ? probes[1] - probes[0] : 0.0;

    SourceArchetype a;
    a.kind = m.class_kinds[class_id];
    a.class_id = static_cast<int>(class_id);
    a.amplitude = rng.uniform(m.amplitude_lo, m.amplitude_hi);
    a.onset_sec = rng.uniform(0.0, 0.2) * m.clip_seconds;
    a.offset_sec = m.clip_seconds - rng.uniform(0.0, 0.2) * m.clip_seconds;
    a.seed = rng.next();

    switch (a.kind) {
      case ArchetypeKind::kTone: {
        const std::size_t n = probes.size();
        const std::size_t idx =
            n >= 3 ? 1 + rng.bounded(n - 2) : rng.bounded(n);
        a.frequency_hz = probes[idx];
        a.num_components = 1;
        break;
      }
      case ArchetypeKind::kChirp: {
        const std::size_t n = probes.size();
        const std::size_t segments = std::min<std::size_t>(4, n);
        const std::size_t stride =
            segments > 1 ? std::max<std::size_t>(1, (n - 1) / (segments - 1))
                         : 1;
        const std::size_t reach = (segments - 1) * stride;
        const std::size_t idx = rng.bounded(n - reach);
        a.frequency_hz = probes[idx];
        a.frequency_step_hz = spacing * static_cast<double>(stride);
        a.num_components = static_cast<int>(segments);
        break;
      }
      case ArchetypeKind::kAmNoise: {
        const std::size_t n = probes.size();
        const std::size_t carriers = std::min<std::size_t>(6, n);
        const std::size_t idx = rng.bounded(n - carriers + 1);
        a.frequency_hz = probes[idx];
        a.frequency_step_hz = spacing;
        a.num_components = static_cast<int>(carriers);
        const double bin_hz =
            static_cast<double>(m.sample_rate) / static_cast<double>(length);
        a.envelope_hz = bin_hz * static_cast<double>(1 + rng.bounded(4));
        break;
      }
      case ArchetypeKind::kImpulseTrain: {
        a.frequency_hz = 40.0 * static_cast<double>(1 + rng.bounded(2));
        a.num_components = 1;
        break;
      }
    }
    example.references.push_back(synth_source(a, m.sample_rate, length));
    example.label_vector[class_id] = 1;
  }

  example.input_mixture.sample_rate = m.sample_rate;
  example.input_mixture.samples.assign(length, 0.0);
  for (const Waveform& ref : example.references) {
    for (std::size_t t = 0; t < length; ++t) {
      example.input_mixture.samples[t] += ref.samples[t];
    }
  }
  // Stored as float32 WAV; quantizing here keeps the on-disk corpus equal to
  // the in-memory one.
  for (double& v : example.input_mixture.samples) v = quantize_f32(v);
  return example;
}

MomExample make_mom_example(Rng& rng, const Manifest& m) {
  metrics::EvalExample first = make_eval_example(rng, m);
  metrics::EvalExample second = make_eval_example(rng, m);

  MomExample mom;
  mom.batch = MixtureBatch::from_references(
      {first.input_mixture, second.input_mixture});
  mom.labels.resize(m.num_classes());
  for (std::size_t k = 0; k < m.num_classes(); ++k) {
    mom.labels[k] = (first.label_vector[k] | second.label_vector[k]);
  }
  mom.combined.references = first.references;
  mom.combined.references.insert(mom.combined.references.end(),
                                 second.references.begin(),
                                 second.references.end());
  mom.combined.input_mixture = mom.batch.mom;
  mom.combined.label_vector = mom.labels;
  return mom;
}

Dataset generate_dataset(const Manifest& m) {
  Dataset dataset;
  dataset.manifest = m;
  dataset.train.reserve(m.train_examples);
  dataset.eval.reserve(m.eval_examples);
  for (int i = 0; i < m.train_examples; ++i) {
    Rng rng(Rng::derive(m.seed, 1, static_cast<std::uint64_t>(i)));
    dataset.train.push_back(make_eval_example(rng, m));
  }
  for (int i = 0; i < m.eval_examples; ++i) {
    Rng rng(Rng::derive(m.seed, 2, static_cast<std::uint64_t>(i)));
    dataset.eval.push_back(make_eval_example(rng, m));
  }
  return dataset;
}

namespace {

void write_example(const fs::path& dir, const metrics::EvalExample& example) {
  fs::create_directories(dir);
  wav::write_wav((dir / "mixture.wav").string(), example.input_mixture);
  for (std::size_t i = 0; i < example.references.size(); ++i) {
    wav::write_wav((dir / ("source_" + std::to_string(i) + ".wav")).string(),
                   example.references[i]);
  }
  std::ofstream labels(dir / "labels.txt");
  for (std::size_t k = 0; k < example.label_vector.size(); ++k) {
    if (k > 0) labels << ' ';
    labels << example.label_vector[k];
  }
  labels << '\n';
  if (!labels) throw std::runtime_error("dataset: cannot write labels");
}

metrics::EvalExample read_example(const fs::path& dir, std::size_t num_classes) {
  metrics::EvalExample example;
  example.input_mixture = wav::read_wav((dir / "mixture.wav").string());
  for (std::size_t i = 0;; ++i) {
    const fs::path src = dir / ("source_" + std::to_string(i) + ".wav");
    if (!fs::exists(src)) break;
    example.references.push_back(wav::read_wav(src.string()));
  }
  if (example.references.empty()) {
    throw std::runtime_error("dataset: example without sources: " + dir.string());
  }
  std::ifstream labels(dir / "labels.txt");
  if (!labels) throw std::runtime_error("dataset: missing labels.txt");
  int value = 0;
  while (labels >> value) example.label_vector.push_back(value);
  if (example.label_vector.size() != num_classes) {
    throw std::runtime_error("dataset: label count mismatch");
  }
  return example;
}

}  // namespace

void write_dataset(const std::string& root, const Dataset& dataset) {
  fs::create_directories(root);
  {
    std::ofstream manifest(fs::path(root) / "manifest.txt",
                           std::ios::binary | std::ios::trunc);
    manifest << canonical_manifest(dataset.manifest);
    if (!manifest) throw std::runtime_error("dataset: cannot write manifest");
  }
  {
    std::ofstream hash(fs::path(root) / "manifest.hash",
                       std::ios::binary | std::ios::trunc);
    hash << manifest_hash(dataset.manifest) << '\n';
    if (!hash) throw std::runtime_error("dataset: cannot write manifest hash");
  }
  for (std::size_t i = 0; i < dataset.train.size(); ++i) {
    write_example(fs::path(root) / "train" / fmt_example_id(i),
                  dataset.train[i]);
  }
  for (std::size_t i = 0; i < dataset.eval.size(); ++i) {
    write_example(fs::path(root) / "eval" / fmt_example_id(i), dataset.eval[i]);
  }
}

Dataset read_dataset(const std::string& root) {
  Dataset dataset;
  dataset.manifest = load_manifest((fs::path(root) / "manifest.txt").string());

  std::ifstream hash_file(fs::path(root) / "manifest.hash");
  if (!hash_file) throw std::runtime_error("dataset: missing manifest.hash");
  std::string stored;
  hash_file >> stored;
  if (stored != manifest_hash(dataset.manifest)) {
    throw std::runtime_error("dataset: manifest hash mismatch");
  }

  const std::size_t num_classes = dataset.manifest.num_classes();
  for (int i = 0; i < dataset.manifest.train_examples; ++i) {
    dataset.train.push_back(read_example(
        fs::path(root) / "train" / fmt_example_id(i), num_classes));
  }
  for (int i = 0; i < dataset.manifest.eval_examples; ++i) {
    dataset.eval.push_back(read_example(
        fs::path(root) / "eval" / fmt_example_id(i), num_classes));
  }
  return dataset;
}

}  // namespace datagen
}  // namespace mixkit
