#include "audiorep/codecs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace audiorep {

void CodecConfig::validate() const {
    frame.validate();
    if (!(log_offset > 0.0)) throw ConfigError("log_offset must be positive");
    if (griffin_lim_iters < 1) throw ConfigError("griffin_lim_iters must be >= 1");
    if (cqt.bins_per_octave != 12 || cqt.n_bins != 84) {
        throw ConfigError("cqt layout is fixed at 12 bins per octave, 84 bins");
    }
    if (nsgt.n_bins != 193) throw ConfigError("cq-nsgt layout is fixed at 193 bins");
}

std::vector<double> prepare_clip(const AudioBuffer& audio) {
    if (audio.sample_rate() != kSampleRate) {
        throw std::invalid_argument("expected a " + std::to_string(kSampleRate) +
                                    " Hz clip, got " + std::to_string(audio.sample_rate()) + " Hz");
    }
    if (audio.size() > kClipLength) {
        throw std::invalid_argument("clip has " + std::to_string(audio.size()) +
                                    " samples; at most " + std::to_string(kClipLength) + " allowed");
    }
    std::vector<double> out(kClipLength, 0.0);
    std::copy(audio.samples().begin(), audio.samples().end(), out.begin());
    return out;
}

void Codec::check_decodable(const RepTensor& tensor) const {
    if (tensor.id() != id()) {
        throw std::invalid_argument("decode: tensor holds " + std::string(repr_name(tensor.id())) +
                                    ", codec is " + std::string(repr_name(id())));
    }
    if (tensor.shape() != shape()) {
        throw std::invalid_argument("decode: shape " + to_string(tensor.shape()) + " != expected " +
                                    to_string(shape()) + " for " + std::string(repr_name(id())));
    }
    if (!tensor.all_finite()) {
        throw std::invalid_argument("decode: tensor contains non-finite values");
    }
}

RepTensor complex_pack(const dsp::ComplexSpectrogram& spec) {
    const auto shape = expected_shape(Repr::complex);
    if (spec.bins() != shape.bins + 1 || spec.frames() != shape.frames) {
        throw std::invalid_argument("complex_pack: expected 513 x 64 spectrogram");
    }
    RepTensor t(Repr::complex, shape);
    for (std::size_t k = 0; k < shape.bins; ++k) {
        for (std::size_t f = 0; f < shape.frames; ++f) {
            t.at(0, k, f) = static_cast<float>(spec.at(k, f).real());
            t.at(1, k, f) = static_cast<float>(spec.at(k, f).imag());
        }
    }
    return t;
}

dsp::ComplexSpectrogram complex_unpack(const RepTensor& t) {
    const auto shape = expected_shape(Repr::complex);
    if (t.shape() != shape) throw std::invalid_argument("complex_unpack: bad shape");
    dsp::ComplexSpectrogram spec(shape.bins + 1, shape.frames);
    for (std::size_t k = 0; k < shape.bins; ++k) {
        for (std::size_t f = 0; f < shape.frames; ++f) {
            spec.at(k, f) = Complex(t.at(0, k, f), t.at(1, k, f));
        }
    }
    return spec;
}

RepTensor magif_encode(const dsp::ComplexSpectrogram& spec, double log_offset) {
    const auto shape = expected_shape(Repr::mag_if);
    if (spec.bins() != shape.bins + 1 || spec.frames() != shape.frames) {
        throw std::invalid_argument("magif_encode: expected 513 x 64 spectrogram");
    }
    RepTensor t(Repr::mag_if, shape);
    for (std::size_t k = 0; k < shape.bins; ++k) {
        double prev_phase = 0.0;
        for (std::size_t f = 0; f < shape.frames; ++f) {
            const Complex v = spec.at(k, f);
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
                throw std::invalid_argument("magif_encode: non-finite spectrogram entry");
            }
            const double phase = v == Complex(0.0, 0.0) ? 0.0 : std::arg(v); // signed zeros give -pi
            t.at(0, k, f) = static_cast<float>(std::log(std::abs(v) + log_offset));
            t.at(1, k, f) =
                static_cast<float>(dsp::princarg(phase - prev_phase) / std::numbers::pi);
            prev_phase = phase;
        }
    }
    return t;
}

dsp::ComplexSpectrogram magif_decode(const RepTensor& t, double log_offset) {
    const auto shape = expected_shape(Repr::mag_if);
    if (t.shape() != shape) throw std::invalid_argument("magif_decode: bad shape");
    dsp::ComplexSpectrogram spec(shape.bins + 1, shape.frames);
    for (std::size_t k = 0; k < shape.bins; ++k) {
        double phase = 0.0;
        for (std::size_t f = 0; f < shape.frames; ++f) {
            phase += std::numbers::pi * static_cast<double>(t.at(1, k, f));
            const double mag = std::max(0.0, std::exp(static_cast<double>(t.at(0, k, f))) - log_offset);
            spec.at(k, f) = std::polar(mag, phase);
        }
    }
    return spec;
}

namespace {

class WaveformCodec final : public Codec {
public:
    Repr id() const override { return Repr::waveform; }

    RepTensor encode(const AudioBuffer& audio) const override {
        const auto clip = prepare_clip(audio);
        std::vector<float> data(clip.begin(), clip.end());
        return RepTensor(Repr::waveform, shape(), std::move(data));
    }

    AudioBuffer decode(const RepTensor& tensor) const override {
        check_decodable(tensor);
        std::vector<double> out(tensor.data().begin(), tensor.data().end());
        return AudioBuffer(std::move(out), kSampleRate);
    }
};

class ComplexCodec final : public Codec {
public:
    explicit ComplexCodec(const CodecConfig& config) : frame_(config.frame) {}

    Repr id() const override { return Repr::complex; }

    RepTensor encode(const AudioBuffer& audio) const override {
        return complex_pack(dsp::stft(prepare_clip(audio), frame_));
    }

    AudioBuffer decode(const RepTensor& tensor) const override {
        check_decodable(tensor);
        return AudioBuffer(dsp::istft(complex_unpack(tensor), frame_, kClipLength), kSampleRate);
    }

private:
    dsp::FrameParams frame_;
};

class MagIfCodec final : public Codec {
public:
    explicit MagIfCodec(const CodecConfig& config)
        : frame_(config.frame), log_offset_(config.log_offset) {}

    Repr id() const override { return Repr::mag_if; }

    RepTensor encode(const AudioBuffer& audio) const override {
        return magif_encode(dsp::stft(prepare_clip(audio), frame_), log_offset_);
    }

    AudioBuffer decode(const RepTensor& tensor) const override {
        check_decodable(tensor);
        return AudioBuffer(dsp::istft(magif_decode(tensor, log_offset_), frame_, kClipLength),
                           kSampleRate);
    }

private:
    dsp::FrameParams frame_;
    double log_offset_;
};

class NsgtCodec final : public Codec {
public:
    explicit NsgtCodec(const CodecConfig& config) : frame_(nsgt_build(config)) {}

    Repr id() const override { return Repr::cq_nsgt; }

    RepTensor encode(const AudioBuffer& audio) const override { return nsgt_encode(audio, frame_); }

    AudioBuffer decode(const RepTensor& tensor) const override {
        check_decodable(tensor);
        return nsgt_decode(tensor, frame_);
    }

private:
    NsgtFrame frame_;
};

} // namespace

std::unique_ptr<Codec> make_codec(Repr id, const CodecConfig& config) {
    config.validate();
    switch (id) {
    case Repr::waveform: return std::make_unique<WaveformCodec>();
    case Repr::complex: return std::make_unique<ComplexCodec>(config);
    case Repr::mag_if: return std::make_unique<MagIfCodec>(config);
    case Repr::cq_nsgt: return std::make_unique<NsgtCodec>(config);
    case Repr::cqt: return std::make_unique<CqtCodec>(config);
    case Repr::mel: return std::make_unique<MelCodec>(config, false);
    case Repr::mfcc: return std::make_unique<MelCodec>(config, true);
    }
    throw std::invalid_argument("unknown representation id " +
                                std::to_string(static_cast<int>(id)));
}

RepTensor encode(Repr id, const AudioBuffer& audio, const CodecConfig& config) {
    return make_codec(id, config)->encode(audio);
}

AudioBuffer decode(const RepTensor& tensor, const CodecConfig& config) {
    return make_codec(tensor.id(), config)->decode(tensor);
}

} // namespace audiorep
