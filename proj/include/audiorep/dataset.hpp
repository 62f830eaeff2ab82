#pragma once

#include "audiorep/dsp.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace audiorep {

inline constexpr int kMinPitch = 44;
inline constexpr int kMaxPitch = 70;
inline constexpr std::array<std::string_view, 5> kFamilies{"brass", "flute", "guitar", "keyboard", "mallet"};
inline constexpr std::uint64_t kDefaultSeed = 42;

enum class Split { train, eval };

struct DatasetEntry {
    std::string id;
    std::filesystem::path wav_path; // absolute, or relative to the working directory
    int pitch = 0;
    std::string instrument_family;
    std::string source;
    Split split = Split::train;
};

struct DatasetIndex {
    std::vector<DatasetEntry> entries; // sorted by id
    std::size_t skipped_records = 0;   // unparseable metadata lines

    std::vector<const DatasetEntry*> select(Split split) const;
};

// Stable 64-bit FNV-1a hash, used for split assignment and per-clip seeds.
std::uint64_t stable_hash(std::string_view s);

// Assigns the lowest 80% of hash(id) ^ seed keys to train, the rest to eval.
void assign_splits(std::vector<DatasetEntry>& entries, std::uint64_t seed);

// Reads JSON-lines metadata ({"id", "pitch", "instrument_family", "source",
// "wav"}), keeps acoustic notes of the five families within the pitch range,
// and checks every kept WAV exists under root.
DatasetIndex ingest(const std::filesystem::path& root, const std::filesystem::path& metadata, std::uint64_t seed);

// First kClipLength samples of the entry's WAV; must be 16 kHz mono.
AudioBuffer load_clip(const DatasetEntry& entry);

inline double midi_to_hz(int midi) { return 440.0 * std::pow(2.0, (midi - 69) / 12.0); }

struct TimbreProfile {
    std::string_view family;
    std::array<double, 12> harmonics;
    double decay; // 1/s
};

const std::array<TimbreProfile, 5>& timbre_profiles();

// One synthetic note: harmonic partials of the profile with seeded phases and
// +-10% amplitude jitter, exponential decay and a 5 ms attack.
std::vector<double> synth_note(int pitch, std::size_t profile, std::uint64_t seed);

struct SynthOptions {
    std::size_t n_per_class = 100;
    int min_pitch = kMinPitch;
    int max_pitch = kMaxPitch;
    std::size_t profiles = 5;
    std::uint64_t seed = kDefaultSeed;
};

// Writes float32 WAVs plus metadata.jsonl into out_dir and ingests them.
DatasetIndex synth_dataset(const std::filesystem::path& out_dir, const SynthOptions& options);

} // namespace audiorep
