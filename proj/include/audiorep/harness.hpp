#pragma once

#include "audiorep/codecs.hpp"
#include "audiorep/dataset.hpp"
#include "audiorep/metrics.hpp"

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace audiorep {

// Per-item failures from a parallel batch, sorted by item index.
class BatchError : public std::runtime_error {
public:
    struct Failure {
        std::size_t index;
        std::string message;
    };

    explicit BatchError(std::vector<Failure> failures, std::size_t total);
    const std::vector<Failure>& failures() const { return failures_; }

private:
    std::vector<Failure> failures_;
};

unsigned default_jobs();

// Runs fn(0..n-1) on up to `jobs` threads. Every item runs even if some throw.
void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn);

std::vector<AudioBuffer> load_clips(std::span<const DatasetEntry* const> entries, unsigned jobs);

using Embedder = std::function<std::vector<double>(const AudioBuffer&)>;

EmbeddingSet embed_all(std::span<const AudioBuffer> clips, const Embedder& embedder, unsigned jobs);

struct ReportRow {
    std::string name;
    std::optional<double> pis;
    std::optional<double> iis;
    std::optional<double> pkid;
    std::optional<double> ikid;
    std::optional<double> fad;
    std::optional<double> kid; // KID on the generic embeddings used for FAD
    std::optional<double> encode_s;
    std::optional<double> decode_s;
};

struct EvalReport {
    std::vector<ReportRow> rows;
};

enum class ReportFormat { csv, markdown };

std::string render_report(const EvalReport& report, ReportFormat format);
void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path);

double median(std::vector<double> values);

struct RoundtripOptions {
    CodecConfig config;
    unsigned jobs = 1;
    Embedder embedder;                // baseline_embed when empty
    const ProbMatrix* pitch_probs = nullptr;      // classifier output on the decoded clips
    const ProbMatrix* instrument_probs = nullptr;
    std::vector<AudioBuffer>* decoded = nullptr;  // receives the decoded clips when set
};

// Scores decode(encode(clip)) against the clips themselves: FAD and KID on
// embeddings, IS when probabilities are given, median per-clip wall times.
ReportRow roundtrip_eval(std::span<const AudioBuffer> clips, Repr repr, const RoundtripOptions& options);
ReportRow roundtrip_eval(const DatasetIndex& index, Repr repr, const RoundtripOptions& options);

struct TimingRow {
    Repr repr;
    std::vector<double> encode_s;
    std::vector<double> decode_s;
};

// Single-threaded; one warm-up encode/decode per representation is discarded.
// Measurements interleave representations clip by clip so drift hits all alike.
std::vector<TimingRow> timing_bench(std::span<const AudioBuffer> clips, std::span<const Repr> reprs,
                                    std::size_t repetitions, const CodecConfig& config = {});
ReportRow timing_row(const TimingRow& row);

// Adds Gaussian noise with standard deviation noise_level * rms(clip); each clip
// draws from its own stream seeded by seed ^ stable_hash(id).
std::vector<AudioBuffer> mock_generate(std::span<const AudioBuffer> clips, std::span<const std::string> ids,
                                       double noise_level, std::uint64_t seed);
std::vector<AudioBuffer> mock_generate(const DatasetIndex& index, double noise_level, std::uint64_t seed,
                                       unsigned jobs = 1);

} // namespace audiorep
