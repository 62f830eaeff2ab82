#include "audiorep/tensor.hpp"

#include "audiorep/binary_io.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

namespace audiorep {

namespace {
constexpr std::string_view kNames[] = {"waveform", "complex", "mag-if", "cq-nsgt",
                                       "cqt",      "mel",     "mfcc"};
} // namespace

std::string_view repr_name(Repr r) { return kNames[static_cast<std::size_t>(r)]; }

std::optional<Repr> parse_repr(std::string_view name) {
    for (Repr r : kAllReprs) {
        if (repr_name(r) == name) return r;
    }
    return std::nullopt;
}

std::string repr_names_joined() {
    std::string out;
    for (Repr r : kAllReprs) {
        if (!out.empty()) out += ", ";
        out += repr_name(r);
    }
    return out;
}

std::string to_string(const TensorShape& s) {
    return "(" + std::to_string(s.channels) + ", " + std::to_string(s.bins) + ", " +
           std::to_string(s.frames) + ")";
}

TensorShape expected_shape(Repr r) {
    switch (r) {
    case Repr::waveform: return {1, 1, 16000};
    case Repr::complex: return {2, 512, 64};
    case Repr::mag_if: return {2, 512, 64};
    case Repr::cq_nsgt: return {4, 97, 948};
    case Repr::cqt: return {2, 84, 256};
    case Repr::mel: return {1, 128, 64};
    case Repr::mfcc: return {1, 128, 64};
    }
    throw std::invalid_argument("expected_shape: unknown representation");
}

RepTensor::RepTensor(Repr id, TensorShape shape)
    : id_(id), shape_(shape), data_(shape.size(), 0.0f) {}

RepTensor::RepTensor(Repr id, TensorShape shape, std::vector<float> data)
    : id_(id), shape_(shape), data_(std::move(data)) {
    if (data_.size() != shape_.size()) {
        throw std::invalid_argument("RepTensor: payload of " + std::to_string(data_.size()) +
                                    " values does not match shape " + to_string(shape_));
    }
}

bool RepTensor::all_finite() const {
    for (float v : data_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

std::vector<std::uint8_t> serialize_rten(const RepTensor& t) {
    detail::ByteWriter w;
    w.bytes("RTEN");
    w.u8(kRtenVersion);
    w.u8(static_cast<std::uint8_t>(t.id()));
    w.u32(static_cast<std::uint32_t>(t.shape().channels));
    w.u32(static_cast<std::uint32_t>(t.shape().bins));
    w.u32(static_cast<std::uint32_t>(t.shape().frames));
    for (float v : t.data()) w.f32(v);
    return std::move(w.buffer());
}

RepTensor deserialize_rten(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("RTEN");
    const std::size_t version_at = r.offset();
    if (const auto version = r.u8(); version != kRtenVersion) {
        throw FormatError("unsupported RTEN version " + std::to_string(version), version_at);
    }
    const std::size_t id_at = r.offset();
    const std::uint8_t id = r.u8();
    if (id > static_cast<std::uint8_t>(Repr::mfcc)) {
        throw FormatError("unknown representation id " + std::to_string(id), id_at);
    }
    TensorShape shape;
    shape.channels = r.u32();
    shape.bins = r.u32();
    shape.frames = r.u32();
    const std::uint64_t count = static_cast<std::uint64_t>(shape.channels) * shape.bins * shape.frames;
    if (count > std::numeric_limits<std::size_t>::max() / 4) {
        throw FormatError("tensor dimensions overflow", r.offset());
    }
    r.need(static_cast<std::size_t>(count) * 4, "RTEN payload");
    std::vector<float> data(static_cast<std::size_t>(count));
    for (auto& v : data) v = r.f32();
    if (r.remaining() != 0) {
        throw FormatError("trailing bytes after RTEN payload", r.offset());
    }
    return RepTensor(static_cast<Repr>(id), shape, std::move(data));
}

void write_rten(const RepTensor& t, const std::filesystem::path& path) {
    detail::write_file_bytes(path, serialize_rten(t));
}

RepTensor read_rten(const std::filesystem::path& path) {
    return deserialize_rten(detail::read_file_bytes(path));
}

namespace detail {

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

} // namespace detail
} // namespace audiorep
