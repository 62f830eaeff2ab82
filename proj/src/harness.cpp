#include "audiorep/harness.hpp"

#include "audiorep/embeddings.hpp"
#include "audiorep/wav.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <random>
#include <thread>

namespace audiorep {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string batch_message(const std::vector<BatchError::Failure>& failures, std::size_t total) {
    std::string msg = std::to_string(failures.size()) + " of " + std::to_string(total) + " items failed";
    if (!failures.empty()) msg += "; first: [" + std::to_string(failures[0].index) + "] " + failures[0].message;
    return msg;
}

std::string format_value(const std::optional<double>& v) {
    if (!v) return "-";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", *v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::vector<std::string> row_cells(const ReportRow& r) {
    return {r.name,         format_value(r.pis), format_value(r.iis),      format_value(r.pkid), format_value(r.ikid),
            format_value(r.fad), format_value(r.kid), format_value(r.encode_s), format_value(r.decode_s)};
}

const std::vector<std::string> kColumns{"representation", "PIS", "IIS", "PKID", "IKID", "FAD", "KID", "encode_s", "decode_s"};

} // namespace

BatchError::BatchError(std::vector<Failure> failures, std::size_t total)
    : std::runtime_error(batch_message(failures, total)), failures_(std::move(failures)) {}

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void parallel_for(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    std::vector<BatchError::Failure> failures;
    std::mutex failures_mutex;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (const std::exception& e) {
                std::lock_guard lock(failures_mutex);
                failures.push_back({i, e.what()});
            }
        }
    };
    const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, jobs), n));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
        throw BatchError(std::move(failures), n);
    }
}

std::vector<AudioBuffer> load_clips(std::span<const DatasetEntry* const> entries, unsigned jobs) {
    std::vector<std::optional<AudioBuffer>> slots(entries.size());
    parallel_for(entries.size(), jobs, [&](std::size_t i) { slots[i] = load_clip(*entries[i]); });
    std::vector<AudioBuffer> clips;
    clips.reserve(slots.size());
    for (auto& s : slots) clips.push_back(std::move(*s));
    return clips;
}

EmbeddingSet embed_all(std::span<const AudioBuffer> clips, const Embedder& embedder, unsigned jobs) {
    const Embedder& embed = embedder ? embedder : Embedder(baseline_embed);
    std::vector<std::vector<double>> rows(clips.size());
    parallel_for(clips.size(), jobs, [&](std::size_t i) { rows[i] = embed(clips[i]); });
    if (rows.empty()) throw std::invalid_argument("embed_all: no clips");
    const std::size_t d = rows[0].size();
    std::vector<double> data;
    data.reserve(rows.size() * d);
    for (const auto& r : rows) {
        if (r.size() != d) throw std::runtime_error("embed_all: embedder returned inconsistent dimensions");
        data.insert(data.end(), r.begin(), r.end());
    }
    return EmbeddingSet(rows.size(), d, std::move(data));
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    std::string out;
    if (format == ReportFormat::csv) {
        for (std::size_t c = 0; c < kColumns.size(); ++c) out += (c ? "," : "") + kColumns[c];
        out += "\r\n";
        for (const auto& row : report.rows) {
            const auto cells = row_cells(row);
            for (std::size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + csv_field(cells[c]);
            out += "\r\n";
        }
        return out;
    }
    auto line = [&](const std::vector<std::string>& cells) {
        out += "|";
        for (const auto& cell : cells) out += " " + cell + " |";
        out += "\n";
    };
    line(kColumns);
    out += "|";
    for (std::size_t c = 0; c < kColumns.size(); ++c) out += c == 0 ? "---|" : "---:|";
    out += "\n";
    for (const auto& row : report.rows) line(row_cells(row));
    return out;
}

void emit_report(const EvalReport& report, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write report to " + path.string());
    out << render_report(report, format);
    if (!out) throw std::runtime_error("failed writing report to " + path.string());
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty set");
    std::sort(values.begin(), values.end());
    const std::size_t mid = values.size() / 2;
    return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

ReportRow roundtrip_eval(std::span<const AudioBuffer> clips, Repr repr, const RoundtripOptions& options) {
    if (clips.size() < 2) throw std::invalid_argument("roundtrip_eval: need at least 2 clips");
    const auto codec = make_codec(repr, options.config);
    std::vector<std::optional<AudioBuffer>> decoded(clips.size());
    std::vector<double> encode_s(clips.size());
    std::vector<double> decode_s(clips.size());
    parallel_for(clips.size(), options.jobs, [&](std::size_t i) {
        auto start = Clock::now();
        const auto tensor = codec->encode(clips[i]);
        encode_s[i] = seconds_since(start);
        start = Clock::now();
        decoded[i] = codec->decode(tensor);
        decode_s[i] = seconds_since(start);
    });
    std::vector<AudioBuffer> generated;
    generated.reserve(decoded.size());
    for (auto& d : decoded) generated.push_back(std::move(*d));

    const auto real = embed_all(clips, options.embedder, options.jobs);
    const auto gen = embed_all(generated, options.embedder, options.jobs);

    ReportRow row;
    row.name = std::string(repr_name(repr));
    row.fad = fad(real, gen);
    row.kid = kid(real, gen);
    auto check_rows = [&](const ProbMatrix& p, const char* what) {
        if (p.n() != clips.size()) {
            throw std::invalid_argument(std::string("roundtrip_eval: ") + what + " probabilities have " +
                                        std::to_string(p.n()) + " rows for " + std::to_string(clips.size()) +
                                        " clips");
        }
        return inception_score(p);
    };
    if (options.pitch_probs) row.pis = check_rows(*options.pitch_probs, "pitch");
    if (options.instrument_probs) row.iis = check_rows(*options.instrument_probs, "instrument");
    row.encode_s = median(encode_s);
    row.decode_s = median(decode_s);
    if (options.decoded) *options.decoded = std::move(generated);
    return row;
}

ReportRow roundtrip_eval(const DatasetIndex& index, Repr repr, const RoundtripOptions& options) {
    const auto eval = index.select(Split::eval);
    return roundtrip_eval(load_clips(eval, options.jobs), repr, options);
}

std::vector<TimingRow> timing_bench(std::span<const AudioBuffer> clips, std::span<const Repr> reprs,
                                    std::size_t repetitions, const CodecConfig& config) {
    if (clips.empty()) throw std::invalid_argument("timing_bench: need at least one clip");
    if (repetitions == 0) throw std::invalid_argument("timing_bench: repetitions must be >= 1");
    std::vector<std::unique_ptr<Codec>> codecs;
    std::vector<TimingRow> rows;
    for (Repr r : reprs) {
        codecs.push_back(make_codec(r, config));
        rows.push_back({r, {}, {}});
        codecs.back()->decode(codecs.back()->encode(clips[0]));
    }
    for (std::size_t rep = 0; rep < repetitions; ++rep) {
        for (const auto& clip : clips) {
            for (std::size_t k = 0; k < codecs.size(); ++k) {
                auto start = Clock::now();
                const auto tensor = codecs[k]->encode(clip);
                rows[k].encode_s.push_back(seconds_since(start));
                start = Clock::now();
                const auto out = codecs[k]->decode(tensor);
                rows[k].decode_s.push_back(seconds_since(start));
            }
        }
    }
    return rows;
}

ReportRow timing_row(const TimingRow& row) {
    ReportRow r;
    r.name = std::string(repr_name(row.repr));
    r.encode_s = median(row.encode_s);
    r.decode_s = median(row.decode_s);
    return r;
}

std::vector<AudioBuffer> mock_generate(std::span<const AudioBuffer> clips, std::span<const std::string> ids,
                                       double noise_level, std::uint64_t seed) {
    if (!(noise_level >= 0.0) || !std::isfinite(noise_level)) {
        throw std::invalid_argument("mock_generate: noise_level must be finite and >= 0");
    }
    if (ids.size() != clips.size()) throw std::invalid_argument("mock_generate: one id per clip required");
    std::vector<AudioBuffer> out;
    out.reserve(clips.size());
    for (std::size_t i = 0; i < clips.size(); ++i) {
        const auto x = clips[i].samples();
        double energy = 0.0;
        for (double v : x) energy += v * v;
        const double stddev = noise_level * std::sqrt(energy / static_cast<double>(x.size()));
        std::vector<double> y(x.begin(), x.end());
        if (stddev > 0.0) {
            std::mt19937_64 rng(seed ^ stable_hash(ids[i]));
            std::normal_distribution<double> noise(0.0, stddev);
            for (double& v : y) v += noise(rng);
        }
        out.emplace_back(std::move(y), clips[i].sample_rate());
    }
    return out;
}

std::vector<AudioBuffer> mock_generate(const DatasetIndex& index, double noise_level, std::uint64_t seed,
                                       unsigned jobs) {
    const auto eval = index.select(Split::eval);
    std::vector<std::string> ids;
    for (const auto* e : eval) ids.push_back(e->id);
    return mock_generate(load_clips(eval, jobs), ids, noise_level, seed);
}

} // namespace audiorep
