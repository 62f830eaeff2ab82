#include "audiorep/embeddings.hpp"

#include "audiorep/binary_io.hpp"
#include "audiorep/codecs.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace audiorep {

namespace {

// Reads the u32 pair of dimensions and checks the payload fits.
std::pair<std::size_t, std::size_t> read_dims(detail::ByteReader& r, const char* rows_name,
                                              const char* cols_name) {
    const std::size_t rows_at = r.offset();
    const std::uint32_t rows = r.u32();
    const std::size_t cols_at = r.offset();
    const std::uint32_t cols = r.u32();
    if (rows == 0) throw FormatError(std::string(rows_name) + " must be at least 1", rows_at);
    if (cols == 0) throw FormatError(std::string(cols_name) + " must be at least 1", cols_at);
    const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
    if (count > std::numeric_limits<std::size_t>::max() / 4) {
        throw FormatError("payload size overflows", r.offset());
    }
    return {rows, cols};
}

void check_version(detail::ByteReader& r, std::uint8_t expected, const char* format) {
    const std::size_t at = r.offset();
    if (const auto v = r.u8(); v != expected) {
        throw FormatError(std::string("unsupported ") + format + " version " + std::to_string(v), at);
    }
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max()) {
        throw std::invalid_argument(std::string(what) + " does not fit in 32 bits");
    }
    return static_cast<std::uint32_t>(v);
}

} // namespace

std::vector<std::uint8_t> serialize_embeddings(const EmbeddingSet& set, std::span<const std::uint32_t> labels) {
    if (!labels.empty() && labels.size() != set.n()) {
        throw std::invalid_argument("serialize_embeddings: label count must equal n");
    }
    detail::ByteWriter w;
    w.bytes("EMB1");
    w.u8(kEmbVersion);
    w.u32(checked_u32(set.n(), "n"));
    w.u32(checked_u32(set.d(), "d"));
    for (double v : set.data()) w.f32(static_cast<float>(v));
    if (!labels.empty()) {
        w.u32(static_cast<std::uint32_t>(labels.size()));
        for (auto l : labels) w.u32(l);
    }
    return std::move(w.buffer());
}

EmbeddingFile deserialize_embeddings(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("EMB1");
    check_version(r, kEmbVersion, "EMB1");
    const auto [n, d] = read_dims(r, "n", "d");
    r.need(n * d * 4, "EMB1 payload");
    std::vector<double> data(n * d);
    for (auto& v : data) {
        const std::size_t at = r.offset();
        v = r.f32();
        if (!std::isfinite(v)) throw FormatError("non-finite embedding value", at);
    }

    std::vector<std::uint32_t> labels;
    if (r.remaining() != 0) {
        const std::size_t count_at = r.offset();
        const std::uint32_t count = r.u32();
        if (count != n) {
            throw FormatError("label block holds " + std::to_string(count) + " labels for " + std::to_string(n) +
                                  " rows",
                              count_at);
        }
        r.need(static_cast<std::size_t>(count) * 4, "EMB1 labels");
        labels.resize(count);
        for (auto& l : labels) l = r.u32();
        if (r.remaining() != 0) throw FormatError("trailing bytes after EMB1 labels", r.offset());
    }
    return EmbeddingFile{EmbeddingSet(n, d, std::move(data)), std::move(labels)};
}

void write_embeddings(const EmbeddingSet& set, const std::filesystem::path& path,
                      std::span<const std::uint32_t> labels) {
    detail::write_file_bytes(path, serialize_embeddings(set, labels));
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) {
    return deserialize_embeddings(detail::read_file_bytes(path));
}

std::vector<std::uint8_t> serialize_probs(const ProbMatrix& probs) {
    detail::ByteWriter w;
    w.bytes("PRB1");
    w.u8(kPrbVersion);
    w.u32(checked_u32(probs.n(), "n"));
    w.u32(checked_u32(probs.classes(), "C"));
    for (double v : probs.data()) w.f32(static_cast<float>(v));
    return std::move(w.buffer());
}

ProbMatrix deserialize_probs(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("PRB1");
    check_version(r, kPrbVersion, "PRB1");
    const std::size_t dims_at = r.offset();
    const auto [n, classes] = read_dims(r, "n", "C");
    if (classes < 2) throw FormatError("PRB1 needs at least 2 classes", dims_at + 4);
    const std::size_t payload_at = r.offset();
    r.need(n * classes * 4, "PRB1 payload");
    std::vector<double> data(n * classes);
    for (auto& v : data) v = r.f32();
    if (r.remaining() != 0) throw FormatError("trailing bytes after PRB1 payload", r.offset());

    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < classes; ++c) {
            const double p = data[i * classes + c];
            if (!(p >= 0.0) || !std::isfinite(p)) {
                throw FormatError("row " + std::to_string(i) + " has an invalid probability",
                                  payload_at + (i * classes + c) * 4);
            }
            sum += p;
        }
        if (std::abs(sum - 1.0) > kProbFileRowTolerance) {
            throw FormatError("row " + std::to_string(i) + " sums to " + std::to_string(sum),
                              payload_at + i * classes * 4);
        }
    }
    return ProbMatrix(n, classes, std::move(data), kProbFileRowTolerance);
}

void write_probs(const ProbMatrix& probs, const std::filesystem::path& path) {
    detail::write_file_bytes(path, serialize_probs(probs));
}

ProbMatrix read_probs(const std::filesystem::path& path) { return deserialize_probs(detail::read_file_bytes(path)); }

std::vector<double> baseline_embed(const AudioBuffer& audio) {
    static const MelCodec codec{CodecConfig{}};
    const auto logmel = codec.log_mel(audio);
    const std::size_t n_mels = codec.filterbank().n_mels();
    const std::size_t frames = logmel.size() / n_mels;
    std::vector<double> out(2 * n_mels);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double* band = logmel.data() + m * frames;
        double mean = 0.0;
        for (std::size_t f = 0; f < frames; ++f) mean += band[f];
        mean /= static_cast<double>(frames);
        double var = 0.0;
        for (std::size_t f = 0; f < frames; ++f) var += (band[f] - mean) * (band[f] - mean);
        out[m] = mean;
        out[n_mels + m] = std::sqrt(var / static_cast<double>(frames));
    }
    return out;
}

} // namespace audiorep
