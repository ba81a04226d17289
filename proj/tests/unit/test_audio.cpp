#include "nprsim/audio.hpp"

#include <cmath>

#include <gtest/gtest.h>

#include "nprsim/errors.hpp"

namespace nprsim {
namespace {

TEST(Wav, RoundTripWithinQuantization) {
  AudioBuffer a;
  a.sample_rate_hz = 44100;
  for (int i = 0; i < 1000; ++i) a.samples.push_back(0.8 * std::sin(0.01 * i));
  const auto b = decode_wav(encode_wav(a));
  EXPECT_EQ(b.sample_rate_hz, 44100);
  ASSERT_EQ(b.samples.size(), a.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) EXPECT_NEAR(a.samples[i], b.samples[i], 1.0 / 32767);
}

TEST(Wav, HeaderIsLittleEndianPcm16) {
  AudioBuffer a;
  a.samples = {0.0, 1.0, -1.0};
  const auto bytes = encode_wav(a);
  ASSERT_EQ(bytes.size(), 44u + 6u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RIFF");
  EXPECT_EQ(bytes[20], 1);   // PCM
  EXPECT_EQ(bytes[22], 1);   // mono
  EXPECT_EQ(bytes[34], 16);  // bits
  EXPECT_EQ(bytes[46], 0xFF);
  EXPECT_EQ(bytes[47], 0x7F);
}

TEST(Wav, StereoIsAveraged) {
  // 48 kHz stereo, two frames: (1000, 3000), (-2000, 0)
  std::vector<unsigned char> b = {'R', 'I', 'F', 'F', 44, 0, 0, 0, 'W', 'A', 'V', 'E', 'f', 'm', 't', ' ',
                                  16, 0, 0, 0, 1, 0, 2, 0, 0x80, 0xBB, 0, 0, 0, 0xEE, 2, 0, 4, 0, 16, 0,
                                  'd', 'a', 't', 'a', 8, 0, 0, 0};
  auto put = [&](int16_t v) {
    b.push_back(static_cast<unsigned char>(v & 0xFF));
    b.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
  };
  put(1000);
  put(3000);
  put(-2000);
  put(0);
  const auto a = decode_wav(b);
  ASSERT_EQ(a.samples.size(), 2u);
  EXPECT_NEAR(a.samples[0], 2000.0 / 32768, 1e-4);
  EXPECT_NEAR(a.samples[1], -1000.0 / 32768, 1e-4);
}

TEST(Wav, RejectsGarbageAndUnsupportedRates) {
  EXPECT_THROW(decode_wav({'n', 'o', 'p', 'e'}), WavError);
  AudioBuffer a;
  a.sample_rate_hz = 22050;
  a.samples = {0.0};
  EXPECT_THROW(a.validate(), ValidationError);
}

}  // namespace
}  // namespace nprsim
