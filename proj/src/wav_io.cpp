#include "mixkit/wav_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace mixkit {
namespace wav {

namespace {

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t get_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

void write_wav(const std::string& path, const Waveform& w) {
  const std::uint32_t data_bytes = static_cast<std::uint32_t>(w.size() * 4);
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  put_u32(out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  put_u32(out, 16);
  put_u16(out, 3);  // IEEE float
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(w.sample_rate) * 4);
  put_u16(out, 4);
  put_u16(out, 32);
  out += "data";
  put_u32(out, data_bytes);
  for (double v : w.samples) {
    const float f = static_cast<float>(v);
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    put_u32(out, bits);
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw std::runtime_error("wav: cannot open for writing: " + path);
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("wav: write failed: " + path);
}

Waveform read_wav(const std::string& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("wav: cannot open: " + path);
  std::string bytes((std::istreambuf_iterator<char>(file)),
                    std::istreambuf_iterator<char>());
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || bytes.compare(0, 4, "RIFF") != 0 ||
      bytes.compare(8, 4, "WAVE") != 0) {
    throw std::runtime_error("wav: not a RIFF/WAVE file: " + path);
  }

  Waveform w;
  bool have_fmt = false;
  bool have_data = false;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t chunk_size = get_u32(p + pos + 4);
    pos += 8;
    if (pos + chunk_size > size) {
      throw std::runtime_error("wav: truncated chunk: " + path);
    }
    if (id == "fmt ") {
      if (chunk_size < 16) throw std::runtime_error("wav: short fmt chunk");
      const std::uint16_t tag = get_u16(p + pos);
      const std::uint16_t channels = get_u16(p + pos + 2);
      const std::uint32_t rate = get_u32(p + pos + 4);
      const std::uint16_t bits = get_u16(p + pos + 14);
      if (tag != 3 || bits != 32) {
        throw std::runtime_error("wav: expected 32-bit IEEE float data");
      }
      if (channels != 1) throw std::runtime_error("wav: expected mono");
      w.sample_rate = static_cast<int>(rate);
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw std::runtime_error("wav: data before fmt chunk");
      if (chunk_size % 4 != 0) throw std::runtime_error("wav: odd data size");
      const std::size_t count = chunk_size / 4;
      w.samples.resize(count);
      for (std::size_t i = 0; i < count; ++i) {
        const std::uint32_t bits = get_u32(p + pos + 4 * i);
        float f;
        std::memcpy(&f, &bits, 4);
        if (!std::isfinite(f)) throw std::runtime_error("wav: non-finite sample");
        w.samples[i] = static_cast<double>(f);
      }
      have_data = true;
    }
    pos += chunk_size + (chunk_size & 1);
  }
  if (!have_fmt || !have_data) {
    throw std::runtime_error("wav: missing fmt or data chunk: " + path);
  }
  return w;
}

}  // namespace wav
}  // namespace mixkit
