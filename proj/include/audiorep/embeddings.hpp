#pragma once

#include "audiorep/dsp.hpp"
#include "audiorep/metrics.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace audiorep {

// EMB1: "EMB1", u8 version, u32 n, u32 d, n*d float32, then optionally
// u32 count (== n) and count u32 labels. PRB1: "PRB1", u8 version, u32 n,
// u32 C, n*C float32. Little-endian throughout.
inline constexpr std::uint8_t kEmbVersion = 1;
inline constexpr std::uint8_t kPrbVersion = 1;
inline constexpr double kProbFileRowTolerance = 1e-4;

struct EmbeddingFile {
    EmbeddingSet set;
    std::vector<std::uint32_t> labels; // empty when the file has no label block
};

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingSet& set, std::span<const std::uint32_t> labels = {});
EmbeddingFile deserialize_embeddings(std::span<const std::uint8_t> bytes);
void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path,
                      std::span<const std::uint32_t> labels = {});
EmbeddingFile read_embeddings(const std::filesystem::path& path);

std::vector<std::uint8_t> serialize_probs(const ProbMatrix& probs);
// Rows must sum to 1 within kProbFileRowTolerance.
ProbMatrix deserialize_probs(std::span<const std::uint8_t> bytes);
void write_probs(const ProbMatrix& probs, const std::filesystem::path& path);
ProbMatrix read_probs(const std::filesystem::path& path);

// Per-band mean then per-band standard deviation of the 128-band log-mel
// spectrogram: 256 values.
inline constexpr std::size_t kBaselineDim = 256;
std::vector<double> baseline_embed(const AudioBuffer& audio);

} // namespace audiorep
