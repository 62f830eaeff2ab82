#pragma once

#include "audiorep/dsp.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace audiorep {

enum class WavEncoding { pcm16, float32 };

// Mono PCM16 (scaled by 1/32768) or IEEE float32. Other layouts raise
// FormatError.
AudioBuffer parse_wav(std::span<const std::uint8_t> bytes);
AudioBuffer read_wav(const std::filesystem::path& path);

// Samples are written unclamped as float32; PCM16 clamps to [-1, 1).
std::vector<std::uint8_t> serialize_wav(const AudioBuffer& audio, WavEncoding encoding = WavEncoding::float32);
void write_wav(const AudioBuffer& audio, const std::filesystem::path& path,
               WavEncoding encoding = WavEncoding::float32);

} // namespace audiorep
