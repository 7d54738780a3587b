#pragma once

#include <string>

#include "mixkit/types.hpp"

namespace mixkit {
namespace wav {

/// Writes a mono RIFF WAV, format tag 3 (IEEE float), 32 bits per sample,
/// little endian. Samples are stored as float32; writing a waveform whose
/// samples already are float32-representable round-trips bit-exactly.
void write_wav(const std::string& path, const Waveform& w);

/// Reads the format written by write_wav. Throws std::runtime_error with a
/// "wav:" prefix on malformed headers, unsupported encodings, truncation, or
/// non-finite samples.
Waveform read_wav(const std::string& path);

}  // namespace wav
}  // namespace mixkit
