#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "oracles.hpp"
#include "rdl/dsp.hpp"
#include "rdl/errors.hpp"
#include "rdl/fft.hpp"
#include "rdl/random.hpp"
#include "rdl/wav.hpp"

using namespace rdl;
using namespace rdl::dsp;

namespace {

AudioSignal white(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  AudioSignal s;
  s.samples.resize(n);
  for (auto& v : s.samples) v = 0.1 * rng.normal();
  return s;
}

AudioSignal tone(std::size_t n, double freq) {
  AudioSignal s;
  s.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.samples[i] = 0.5 * std::sin(2 * std::numbers::pi * freq * double(i) / kSampleRate);
  return s;
}

// Error energy relative to signal energy over samples not covered by the
// first or last frame.
double interior_error_db(const AudioSignal& ref, const AudioSignal& out, double scale = 1.0) {
  const std::size_t end = std::min(ref.samples.size(), out.samples.size()) - kFrameLength;
  double err = 0, sig = 0;
  for (std::size_t i = kFrameLength; i < end; ++i) {
    const double e = out.samples[i] - scale * ref.samples[i];
    err += e * e;
    sig += scale * scale * ref.samples[i] * ref.samples[i];
  }
  return 10 * std::log10(err / sig);
}

}  // namespace

TEST(Fft, MatchesDirectDft) {
  Rng rng(3);
  std::vector<double> x(512);
  for (auto& v : x) v = rng.uniform(-1, 1);
  const auto fast = rfft(x);
  ASSERT_EQ(fast.size(), 257u);
  for (std::size_t k = 0; k < 257; ++k) {
    std::complex<double> ref = 0;
    for (std::size_t n = 0; n < 512; ++n) ref += x[n] * std::polar(1.0, -2 * std::numbers::pi * double(k * n) / 512);
    EXPECT_LT(std::abs(fast[k] - ref), 1e-9) << k;
  }
  const auto back = irfft(fast);
  for (std::size_t n = 0; n < 512; ++n) EXPECT_NEAR(back[n], x[n], 1e-12);
}

TEST(Fft, RejectsNonPowerOfTwo) {
  std::vector<std::complex<double>> data(12);
  EXPECT_THROW(fft_inplace(data, false), ConfigError);
}

TEST(Framing, CountsAndWindow) {
  EXPECT_EQ(frame_count(16000), 61u);
  EXPECT_EQ(frame_count(512), 1u);
  EXPECT_EQ(frame_count(767), 1u);
  EXPECT_EQ(frame_count(768), 2u);
  EXPECT_EQ(synthesis_length(61), 60u * 256u + 512u);
  EXPECT_NEAR(hamming_window()[0], 0.08, 1e-15);
  EXPECT_NEAR(hamming_window()[256], 1.0, 1e-15);
  EXPECT_THROW(analyze(AudioSignal{std::vector<double>(100), kSampleRate}), DataError);
  EXPECT_THROW(analyze(AudioSignal{std::vector<double>(1000), 8000}), DataError);
}

TEST(Analysis, DcLandsInLowestBins) {
  AudioSignal dc{std::vector<double>(512, 0.3), kSampleRate};
  const auto s = analyze(dc);
  ASSERT_EQ(s.frames, 1u);
  for (std::size_t k = 2; k < kBins; ++k) EXPECT_LT(s.mag(0, k), 1e-9 * s.mag(0, 0));
  EXPECT_NEAR(s.mag(0, 0), 0.3 * 0.54 * 512, 1e-9);
}

TEST(Analysis, LinearInAmplitude) {
  const AudioSignal x = white(4000, 8);
  AudioSignal y = x;
  for (auto& v : y.samples) v *= 2.5;
  const auto a = analyze(x);
  const auto b = analyze(y);
  for (std::size_t i = 0; i < a.magnitude.size(); ++i) {
    EXPECT_NEAR(b.magnitude[i], 2.5 * a.magnitude[i], 1e-9 * (1 + a.magnitude[i]));
    if (a.magnitude[i] > 1e-6) EXPECT_NEAR(b.phase[i], a.phase[i], 1e-9);
  }
}

TEST(Synthesis, RoundTripBelowMinus50dB) {
  for (const AudioSignal& x : {white(16000, 1), tone(16000, 440), oracle::speech_like(32000, 2)}) {
    const AudioSignal y = synthesize(analyze(x));
    EXPECT_EQ(y.samples.size(), synthesis_length(frame_count(x.samples.size())));
    EXPECT_LT(interior_error_db(x, y), -50.0);
  }
  AudioSignal impulses{std::vector<double>(8000, 0.0), kSampleRate};
  for (std::size_t i = 600; i < 7000; i += 777) impulses.samples[i] = 1;
  EXPECT_LT(interior_error_db(impulses, synthesize(analyze(impulses))), -50.0);
}

TEST(Synthesis, ZeroAndHalfGain) {
  const AudioSignal x = white(8000, 4);
  auto s = analyze(x);
  auto half = s;
  for (auto& m : half.magnitude) m *= 0.5;
  EXPECT_LT(interior_error_db(x, synthesize(half), 0.5), -50.0);
  for (auto& m : s.magnitude) m = 0;
  for (double v : synthesize(s).samples) EXPECT_EQ(v, 0.0);
}

TEST(Mixing, AlphaForEqualPower) {
  const AudioSignal a = tone(4000, 300);
  AudioSignal b = tone(4000, 300);
  std::reverse(b.samples.begin(), b.samples.end());
  const double pa = mean_power(a.samples), pb = mean_power(b.samples);
  for (auto& v : b.samples) v *= std::sqrt(pa / pb);
  EXPECT_NEAR(mix_at_snr(a, b, 0).alpha, 1.0, 1e-12);
  EXPECT_NEAR(mix_at_snr(a, b, 20).alpha, 0.1, 1e-12);
}

TEST(Mixing, AchievedSnrAtEveryTrainingLevel) {
  const AudioSignal clean = oracle::speech_like(16000, 5);
  const AudioSignal noise = white(16000, 6);
  for (int snr = -10; snr <= 20; ++snr) {
    const Mixture m = mix_at_snr(clean, noise, snr);
    EXPECT_NEAR(measured_snr_db(clean, m.scaled_noise), double(snr), 1e-9);
    for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(m.noisy.samples[i], clean.samples[i] + m.scaled_noise.samples[i]);
  }
}

TEST(Mixing, Errors) {
  const AudioSignal x = white(1000, 1);
  EXPECT_THROW(mix_at_snr(x, white(999, 2), 0), ConfigError);
  EXPECT_THROW(mix_at_snr(x, AudioSignal{std::vector<double>(1000), kSampleRate}, 0), DataError);
  EXPECT_THROW(mix_at_snr(AudioSignal{std::vector<double>(1000), kSampleRate}, x, 0), DataError);
}

namespace {

void write_raw_wav(const std::string& path, std::uint16_t format, std::uint16_t channels, std::uint32_t rate,
                   std::uint16_t bits, std::size_t data_bytes) {
  std::ofstream f(path, std::ios::binary);
  auto u32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
  auto u16 = [&](std::uint16_t v) { f.write(reinterpret_cast<const char*>(&v), 2); };
  f << "RIFF";
  u32(std::uint32_t(36 + data_bytes));
  f << "WAVEfmt ";
  u32(16);
  u16(format);
  u16(channels);
  u32(rate);
  u32(rate * channels * bits / 8);
  u16(std::uint16_t(channels * bits / 8));
  u16(bits);
  f << "data";
  u32(std::uint32_t(data_bytes));
  f << std::string(data_bytes, '\0');
}

}  // namespace

TEST(Wav, RoundTripQuantizes) {
  oracle::TempDir dir("wav");
  const AudioSignal x = tone(1000, 440);
  write_wav(dir.file("a.wav"), x);
  const AudioSignal y = read_wav(dir.file("a.wav"));
  ASSERT_EQ(y.samples.size(), x.samples.size());
  for (std::size_t i = 0; i < x.samples.size(); ++i) EXPECT_NEAR(y.samples[i], x.samples[i], 1.0 / 32768);
  AudioSignal loud{{2.0, -2.0}, kSampleRate};
  write_wav(dir.file("b.wav"), loud);
  const AudioSignal clipped = read_wav(dir.file("b.wav"));
  EXPECT_NEAR(clipped.samples[0], 32767.0 / 32768, 1e-12);
  EXPECT_EQ(clipped.samples[1], -1.0);
}

TEST(Wav, RejectsNonConformingFiles) {
  oracle::TempDir dir("wavbad");
  write_raw_wav(dir.file("stereo.wav"), 1, 2, 16000, 16, 400);
  write_raw_wav(dir.file("8bit.wav"), 1, 1, 16000, 8, 400);
  write_raw_wav(dir.file("float.wav"), 3, 1, 16000, 32, 400);
  write_raw_wav(dir.file("rate.wav"), 1, 1, 8000, 16, 400);
  std::ofstream(dir.file("junk.wav")) << "not audio";
  EXPECT_THROW(read_wav(dir.file("stereo.wav")), DataError);
  EXPECT_THROW(read_wav(dir.file("8bit.wav")), DataError);
  EXPECT_THROW(read_wav(dir.file("float.wav")), DataError);
  EXPECT_THROW(read_wav(dir.file("rate.wav")), SampleRateMismatch);
  EXPECT_THROW(read_wav(dir.file("junk.wav")), DataError);
  EXPECT_THROW(read_wav(dir.file("absent.wav")), DataError);
}
