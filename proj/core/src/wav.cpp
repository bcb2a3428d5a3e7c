#include "rdl/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "rdl/errors.hpp"
#include "rdl/file_util.hpp"

namespace rdl::dsp {
namespace {

std::uint32_t u32le(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

std::uint16_t u16le(const std::uint8_t* p) { return std::uint16_t(p[0] | p[1] << 8); }

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(char((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(char(v & 0xff));
  s.push_back(char(v >> 8));
}

}  // namespace

AudioSignal read_wav(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  auto fail = [&](const std::string& why) { return DataError(path + ": " + why); };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 || std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw fail("not a RIFF/WAVE file");
  }
  bool have_fmt = false;
  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint32_t rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::uint32_t size = u32le(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw fail("truncated chunk");
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw fail("short fmt chunk");
      const std::uint16_t format = u16le(bytes.data() + body);
      channels = u16le(bytes.data() + body + 2);
      rate = u32le(bytes.data() + body + 4);
      bits = u16le(bytes.data() + body + 14);
      if (format != 1) throw fail("unsupported encoding (format tag " + std::to_string(format) + "), need PCM");
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      if (!have_fmt) throw fail("data chunk before fmt chunk");
      if (channels != 1) throw fail("expected mono audio, got " + std::to_string(channels) + " channels");
      if (bits != 16) throw fail("expected 16-bit samples, got " + std::to_string(bits));
      if (rate != std::uint32_t(kSampleRate)) {
        throw SampleRateMismatch(path + ": expected " + std::to_string(kSampleRate) + " Hz, got " +
                                 std::to_string(rate));
      }
      AudioSignal out;
      out.sample_rate = int(rate);
      out.samples.resize(size / 2);
      for (std::size_t i = 0; i < out.samples.size(); ++i) {
        const auto raw = std::int16_t(u16le(bytes.data() + body + 2 * i));
        out.samples[i] = double(raw) / 32768.0;
      }
      return out;
    }
    pos = body + size + (size & 1);
  }
  throw fail("no data chunk");
}

void write_wav(const std::string& path, const AudioSignal& signal) {
  const auto n = std::uint32_t(signal.samples.size());
  std::string out;
  out.reserve(44 + 2 * std::size_t(n));
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);
  put_u16(out, 1);
  put_u32(out, std::uint32_t(signal.sample_rate));
  put_u32(out, std::uint32_t(signal.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : signal.samples) {
    const double clamped = std::clamp(s, -1.0, 1.0);
    const auto q = std::int16_t(std::lround(std::clamp(clamped * 32768.0, -32768.0, 32767.0)));
    put_u16(out, std::uint16_t(q));
  }
  write_file_atomic(path, out);
}

}  // namespace rdl::dsp
