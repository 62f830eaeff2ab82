#include "audiorep/dataset.hpp"

#include "audiorep/wav.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <stdexcept>

namespace audiorep {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

bool wanted_family(std::string_view family) {
    return std::find(kFamilies.begin(), kFamilies.end(), family) != kFamilies.end();
}

} // namespace

std::vector<const DatasetEntry*> DatasetIndex::select(Split split) const {
    std::vector<const DatasetEntry*> out;
    for (const auto& e : entries) {
        if (e.split == split) out.push_back(&e);
    }
    return out;
}

std::uint64_t stable_hash(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

void assign_splits(std::vector<DatasetEntry>& entries, std::uint64_t seed) {
    std::vector<std::pair<std::uint64_t, std::size_t>> keys;
    keys.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size(); ++i) keys.emplace_back(mix64(stable_hash(entries[i].id) ^ seed), i);
    std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
        return a.first != b.first ? a.first < b.first : entries[a.second].id < entries[b.second].id;
    });
    const std::size_t n_train = (entries.size() * 8 + 5) / 10;
    for (std::size_t rank = 0; rank < keys.size(); ++rank) {
        entries[keys[rank].second].split = rank < n_train ? Split::train : Split::eval;
    }
}

DatasetIndex ingest(const std::filesystem::path& root, const std::filesystem::path& metadata, std::uint64_t seed) {
    std::ifstream in(metadata);
    if (!in) throw std::runtime_error("cannot open metadata " + metadata.string());

    DatasetIndex index;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto record = nlohmann::json::parse(line, nullptr, false);
        const bool well_formed = record.is_object() && record.contains("id") && record["id"].is_string() &&
                                 record.contains("pitch") && record["pitch"].is_number_integer() &&
                                 record.contains("instrument_family") && record["instrument_family"].is_string() &&
                                 record.contains("source") && record["source"].is_string() &&
                                 record.contains("wav") && record["wav"].is_string();
        if (!well_formed) {
            ++index.skipped_records;
            continue;
        }
        DatasetEntry e;
        e.id = record["id"].get<std::string>();
        e.pitch = record["pitch"].get<int>();
        e.instrument_family = record["instrument_family"].get<std::string>();
        e.source = record["source"].get<std::string>();
        if (e.pitch < kMinPitch || e.pitch > kMaxPitch || !wanted_family(e.instrument_family) ||
            e.source != "acoustic") {
            continue;
        }
        if (!seen.insert(e.id).second) {
            throw std::runtime_error(metadata.string() + ":" + std::to_string(line_no) + ": duplicate id " + e.id);
        }
        e.wav_path = root / record["wav"].get<std::string>();
        if (!std::filesystem::is_regular_file(e.wav_path)) {
            throw std::runtime_error("missing WAV for " + e.id + ": " + e.wav_path.string());
        }
        index.entries.push_back(std::move(e));
    }
    if (index.entries.empty()) {
        throw std::runtime_error("no entries left after filtering " + metadata.string());
    }
    std::sort(index.entries.begin(), index.entries.end(),
              [](const DatasetEntry& a, const DatasetEntry& b) { return a.id < b.id; });
    assign_splits(index.entries, seed);
    return index;
}

AudioBuffer load_clip(const DatasetEntry& entry) {
    const auto audio = read_wav(entry.wav_path);
    if (audio.sample_rate() != kSampleRate) {
        throw std::runtime_error(entry.wav_path.string() + ": expected " + std::to_string(kSampleRate) +
                                 " Hz, got " + std::to_string(audio.sample_rate()));
    }
    if (audio.size() <= kClipLength) return audio;
    return AudioBuffer(std::vector<double>(audio.samples().begin(), audio.samples().begin() + kClipLength),
                       kSampleRate);
}

const std::array<TimbreProfile, 5>& timbre_profiles() {
    static const std::array<TimbreProfile, 5> profiles{{
        {"brass", {1.0, 0.71, 0.58, 0.5, 0.45, 0.41, 0.38, 0.35, 0.33, 0.32, 0.3, 0.29}, 1.0},
        {"flute", {1.0, 0.35, 0.12, 0.05, 0.02, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0}, 0.7},
        {"guitar", {1.0, 0.5, 0.33, 0.25, 0.2, 0.17, 0.14, 0.12, 0.11, 0.1, 0.0, 0.0}, 3.5},
        {"keyboard", {1.0, 0.6, 0.3, 0.25, 0.1, 0.08, 0.05, 0.03, 0.0, 0.0, 0.0, 0.0}, 2.5},
        {"mallet", {1.0, 0.0, 0.4, 0.0, 0.15, 0.0, 0.05, 0.0, 0.0, 0.0, 0.0, 0.0}, 6.0},
    }};
    return profiles;
}

std::vector<double> synth_note(int pitch, std::size_t profile, std::uint64_t seed) {
    if (profile >= timbre_profiles().size()) throw std::invalid_argument("synth_note: unknown profile");
    const auto& p = timbre_profiles()[profile];
    const double f0 = midi_to_hz(pitch);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> jitter(0.9, 1.1);

    double total = 0.0;
    for (double a : p.harmonics) total += a;
    const double scale = 0.5 / total;
    const std::size_t attack = kSampleRate / 200;

    std::vector<double> x(kClipLength, 0.0);
    for (std::size_t h = 0; h < p.harmonics.size(); ++h) {
        const double ph = phase(rng);
        const double amp = p.harmonics[h] * jitter(rng) * scale;
        const double f = f0 * static_cast<double>(h + 1);
        if (amp == 0.0 || f > 7500.0) continue;
        const double w = 2.0 * std::numbers::pi * f / kSampleRate;
        for (std::size_t i = 0; i < x.size(); ++i) x[i] += amp * std::sin(w * static_cast<double>(i) + ph);
    }
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double t = static_cast<double>(i) / kSampleRate;
        const double env = std::exp(-p.decay * t) * std::min(1.0, static_cast<double>(i) / attack);
        x[i] *= env;
    }
    return x;
}

DatasetIndex synth_dataset(const std::filesystem::path& out_dir, const SynthOptions& options) {
    if (options.n_per_class == 0 || options.profiles == 0) throw std::invalid_argument("synth_dataset: empty dataset");
    if (options.profiles > timbre_profiles().size()) {
        throw std::invalid_argument("synth_dataset: at most " + std::to_string(timbre_profiles().size()) +
                                    " timbre profiles");
    }
    if (options.min_pitch < kMinPitch || options.max_pitch > kMaxPitch || options.min_pitch > options.max_pitch) {
        throw std::invalid_argument("synth_dataset: pitches must lie in [44, 70]");
    }
    std::filesystem::create_directories(out_dir / "audio");
    const auto metadata = out_dir / "metadata.jsonl";
    std::ofstream meta(metadata, std::ios::trunc);
    if (!meta) throw std::runtime_error("cannot write " + metadata.string());

    const int range = options.max_pitch - options.min_pitch + 1;
    for (std::size_t p = 0; p < options.profiles; ++p) {
        const auto family = timbre_profiles()[p].family;
        for (std::size_t i = 0; i < options.n_per_class; ++i) {
            char id[64];
            std::snprintf(id, sizeof id, "synth_%s_%05zu", std::string(family).c_str(), i);
            const int pitch = options.min_pitch + static_cast<int>(i % static_cast<std::size_t>(range));
            const auto rel = std::filesystem::path("audio") / (std::string(id) + ".wav");
            const auto samples = synth_note(pitch, p, options.seed ^ stable_hash(id));
            write_wav(AudioBuffer(samples, kSampleRate), out_dir / rel);
            nlohmann::json record{{"id", id},
                                  {"pitch", pitch},
                                  {"instrument_family", family},
                                  {"source", "acoustic"},
                                  {"wav", rel.generic_string()}};
            meta << record.dump() << '\n';
        }
    }
    meta.close();
    if (!meta) throw std::runtime_error("failed writing " + metadata.string());
    return ingest(out_dir, metadata, options.seed);
}

} // namespace audiorep
