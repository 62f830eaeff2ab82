#include "audiorep/wav.hpp"

#include "audiorep/binary_io.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

namespace audiorep {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xfffe;

std::uint16_t u16_at(std::span<const std::uint8_t> b, std::size_t at) {
    return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

void put_u16(detail::ByteWriter& w, std::uint16_t v) {
    w.u8(static_cast<std::uint8_t>(v & 0xff));
    w.u8(static_cast<std::uint8_t>(v >> 8));
}

struct FmtChunk {
    std::uint16_t format;
    std::uint16_t channels;
    std::uint32_t sample_rate;
    std::uint16_t bits;
};

} // namespace

AudioBuffer parse_wav(std::span<const std::uint8_t> bytes) {
    detail::ByteReader r(bytes);
    r.expect_magic("RIFF");
    r.u32();
    r.expect_magic("WAVE");

    std::optional<FmtChunk> fmt;
    while (r.remaining() > 0) {
        const std::size_t chunk_at = r.offset();
        r.need(8, "chunk header");
        const std::string id(reinterpret_cast<const char*>(bytes.data() + chunk_at), 4);
        r.u32();
        const std::uint32_t size = r.u32();
        const std::size_t body = r.offset();

        if (id == "fmt ") {
            r.need(16, "fmt chunk");
            FmtChunk f{u16_at(bytes, body), u16_at(bytes, body + 2), 0, u16_at(bytes, body + 14)};
            f.sample_rate = detail::ByteReader(bytes.subspan(body + 4, 4)).u32();
            if (f.format == kFormatExtensible) {
                if (size < 26) throw FormatError("extensible fmt chunk too short", body);
                r.need(26, "extensible fmt chunk");
                f.format = u16_at(bytes, body + 24);
            }
            fmt = f;
        } else if (id == "data") {
            if (!fmt) throw FormatError("data chunk before fmt chunk", chunk_at);
            if (fmt->channels != 1) {
                throw FormatError("expected mono audio, got " + std::to_string(fmt->channels) + " channels", body);
            }
            const std::size_t width = fmt->bits / 8;
            const bool pcm16 = fmt->format == kFormatPcm && fmt->bits == 16;
            const bool float32 = fmt->format == kFormatFloat && fmt->bits == 32;
            if (!pcm16 && !float32) {
                throw FormatError("unsupported sample format " + std::to_string(fmt->format) + " with " +
                                      std::to_string(fmt->bits) + " bits",
                                  body);
            }
            // Some writers leave the size field at 0 or oversized for streamed output.
            const std::size_t usable = std::min<std::size_t>(size == 0 ? r.remaining() : size, r.remaining());
            const std::size_t count = usable / width;
            if (count == 0) throw FormatError("empty data chunk", body);
            std::vector<double> samples(count);
            for (std::size_t i = 0; i < count; ++i) {
                const std::size_t at = body + i * width;
                if (pcm16) {
                    samples[i] = static_cast<std::int16_t>(u16_at(bytes, at)) / 32768.0;
                } else {
                    samples[i] = detail::ByteReader(bytes.subspan(at, 4)).f32();
                    if (!std::isfinite(samples[i])) throw FormatError("non-finite sample", at);
                }
            }
            return AudioBuffer(std::move(samples), static_cast<int>(fmt->sample_rate));
        }
        r.need(size + (size & 1u), "chunk body");
        for (std::uint32_t i = 0; i < size + (size & 1u); ++i) r.u8();
    }
    throw FormatError("no data chunk", r.offset());
}

AudioBuffer read_wav(const std::filesystem::path& path) {
    try {
        return parse_wav(detail::read_file_bytes(path));
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what(), e.offset());
    }
}

std::vector<std::uint8_t> serialize_wav(const AudioBuffer& audio, WavEncoding encoding) {
    const bool pcm16 = encoding == WavEncoding::pcm16;
    const std::uint16_t bits = pcm16 ? 16 : 32;
    const std::uint32_t data_size = static_cast<std::uint32_t>(audio.size() * (bits / 8));
    const std::uint32_t fmt_size = pcm16 ? 16 : 18;
    const std::uint32_t fact_size = pcm16 ? 0 : 12;

    detail::ByteWriter w;
    w.bytes("RIFF");
    w.u32(4 + (8 + fmt_size) + fact_size + (8 + data_size));
    w.bytes("WAVE");
    w.bytes("fmt ");
    w.u32(fmt_size);
    put_u16(w, pcm16 ? kFormatPcm : kFormatFloat);
    put_u16(w, 1);
    w.u32(static_cast<std::uint32_t>(audio.sample_rate()));
    w.u32(static_cast<std::uint32_t>(audio.sample_rate()) * (bits / 8));
    put_u16(w, bits / 8);
    put_u16(w, bits);
    if (!pcm16) {
        put_u16(w, 0);
        w.bytes("fact");
        w.u32(4);
        w.u32(static_cast<std::uint32_t>(audio.size()));
    }
    w.bytes("data");
    w.u32(data_size);
    for (double v : audio.samples()) {
        if (pcm16) {
            const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
            const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
            put_u16(w, static_cast<std::uint16_t>(q));
        } else {
            w.f32(static_cast<float>(v));
        }
    }
    return std::move(w.buffer());
}

void write_wav(const AudioBuffer& audio, const std::filesystem::path& path, WavEncoding encoding) {
    detail::write_file_bytes(path, serialize_wav(audio, encoding));
}

} // namespace audiorep
