#pragma once

#include <filesystem>
#include <vector>

namespace nprsim {

/// Mono audio normalized to [-1, 1].
struct AudioBuffer {
  int sample_rate_hz = 48000;
  std::vector<double> samples;

  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate_hz; }
  double peak() const;
  /// Throws ValidationError on an unsupported rate or out-of-range sample.
  void validate() const;
};

bool supported_sample_rate(int hz);

/// Reads 16-bit PCM WAV (mono or stereo; stereo is averaged to mono).
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer decode_wav(const std::vector<unsigned char>& bytes);

/// Writes mono 16-bit PCM WAV, little-endian.
void write_wav(const std::filesystem::path& path, const AudioBuffer& audio);
std::vector<unsigned char> encode_wav(const AudioBuffer& audio);

}  // namespace nprsim
