#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace audiorep {

// Representation ids; the numeric values are the RTEN on-disk enum.
enum class Repr : std::uint8_t {
    waveform = 0,
    complex = 1,
    mag_if = 2,
    cq_nsgt = 3,
    cqt = 4,
    mel = 5,
    mfcc = 6,
};

inline constexpr Repr kAllReprs[] = {Repr::waveform, Repr::complex, Repr::mag_if, Repr::cq_nsgt,
                                     Repr::cqt,      Repr::mel,     Repr::mfcc};

std::string_view repr_name(Repr r);
std::optional<Repr> parse_repr(std::string_view name);
// Comma separated list of every valid id, in enum order.
std::string repr_names_joined();

struct TensorShape {
    std::size_t channels = 0;
    std::size_t bins = 0;
    std::size_t frames = 0;

    std::size_t size() const { return channels * bins * frames; }
    friend bool operator==(const TensorShape&, const TensorShape&) = default;
};

std::string to_string(const TensorShape& s);

// The fixed tensor layout of each representation for a 1 s, 16 kHz clip.
TensorShape expected_shape(Repr r);

// channels x bins x frames, single precision, frame index fastest.
class RepTensor {
public:
    RepTensor() = default;
    RepTensor(Repr id, TensorShape shape);
    RepTensor(Repr id, TensorShape shape, std::vector<float> data);

    Repr id() const { return id_; }
    const TensorShape& shape() const { return shape_; }

    float& at(std::size_t c, std::size_t b, std::size_t f) {
        return data_[(c * shape_.bins + b) * shape_.frames + f];
    }
    float at(std::size_t c, std::size_t b, std::size_t f) const {
        return data_[(c * shape_.bins + b) * shape_.frames + f];
    }

    std::span<float> data() { return data_; }
    std::span<const float> data() const { return data_; }

    bool all_finite() const;

private:
    Repr id_ = Repr::waveform;
    TensorShape shape_;
    std::vector<float> data_;
};

// RTEN file: "RTEN", u8 version (1), u8 repr id, u32 channels/bins/frames, then
// float32 payload. All integers and floats little-endian.
inline constexpr std::uint8_t kRtenVersion = 1;

std::vector<std::uint8_t> serialize_rten(const RepTensor& t);
RepTensor deserialize_rten(std::span<const std::uint8_t> bytes);

void write_rten(const RepTensor& t, const std::filesystem::path& path);
RepTensor read_rten(const std::filesystem::path& path);

} // namespace audiorep
