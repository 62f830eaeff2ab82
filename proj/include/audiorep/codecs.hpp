#pragma once

// Paired encode/decode transforms for the seven audio representations.

#include "audiorep/dsp.hpp"
#include "audiorep/tensor.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace audiorep {

struct CqtParams {
    int bins_per_octave = 12;
    int n_bins = 84;
    double fmin = 32.70; // C1
    std::size_t hop = 64;
    std::size_t padded_frames = 256;
};

struct NsgtParams {
    int n_bins = 193; // DC + 96 positive + 96 negative bands
    double fmin = 32.70;
    double fmax = 7800.0;
    std::size_t frames = 948;
};

struct CodecConfig {
    dsp::FrameParams frame;
    double log_offset = 1e-6;
    int griffin_lim_iters = 60;
    std::uint64_t seed = 42;
    std::size_t n_mels = 128;
    double mel_fmin = 0.0;
    double mel_fmax = 8000.0;
    CqtParams cqt;
    NsgtParams nsgt;

    void validate() const;
};

// Zero-pads to one second; rejects longer clips and other sample rates.
std::vector<double> prepare_clip(const AudioBuffer& audio);

class Codec {
public:
    virtual ~Codec() = default;

    virtual Repr id() const = 0;
    TensorShape shape() const { return expected_shape(id()); }

    virtual RepTensor encode(const AudioBuffer& audio) const = 0;
    virtual AudioBuffer decode(const RepTensor& tensor) const = 0;

protected:
    // Shape/id/finiteness checks common to every decode().
    void check_decodable(const RepTensor& tensor) const;
};

std::unique_ptr<Codec> make_codec(Repr id, const CodecConfig& config = {});

RepTensor encode(Repr id, const AudioBuffer& audio, const CodecConfig& config = {});
AudioBuffer decode(const RepTensor& tensor, const CodecConfig& config = {});

// --- STFT family ---------------------------------------------------------

RepTensor complex_pack(const dsp::ComplexSpectrogram& spec);
dsp::ComplexSpectrogram complex_unpack(const RepTensor& t);

RepTensor magif_encode(const dsp::ComplexSpectrogram& spec, double log_offset);
dsp::ComplexSpectrogram magif_decode(const RepTensor& t, double log_offset);

// --- Griffin-Lim ---------------------------------------------------------

struct GriffinLimResult {
    std::vector<double> samples;
    // errors[k-1] = || |stft(x_k)| - mag ||_F after iteration k (only when traced).
    std::vector<double> errors;
};

// `mag` holds magnitudes in a ComplexSpectrogram (imaginary parts ignored).
GriffinLimResult griffin_lim(const dsp::ComplexSpectrogram& mag, const dsp::FrameParams& params,
                             int iters, std::uint64_t seed, bool trace_errors = false,
                             std::size_t out_length = kClipLength);

// --- Mel / MFCC ----------------------------------------------------------

class MelCodec final : public Codec {
public:
    explicit MelCodec(const CodecConfig& config, bool cepstral = false);

    Repr id() const override { return cepstral_ ? Repr::mfcc : Repr::mel; }
    RepTensor encode(const AudioBuffer& audio) const override;
    AudioBuffer decode(const RepTensor& tensor) const override;

    const dsp::MelFilterbank& filterbank() const { return filterbank_; }
    // n_mels x frames log-mel, double precision.
    std::vector<double> log_mel(const AudioBuffer& audio) const;
    // Pseudo-inverse of the filterbank applied to mel energies, negatives clamped.
    dsp::ComplexSpectrogram mel_to_magnitude(std::span<const double> mel_energy) const;

private:
    CodecConfig config_;
    bool cepstral_;
    dsp::MelFilterbank filterbank_;
    std::vector<double> pinv_; // bins x n_mels, row-major
};

// --- CQT -----------------------------------------------------------------

class CqtCodec final : public Codec {
public:
    explicit CqtCodec(const CodecConfig& config);

    Repr id() const override { return Repr::cqt; }
    RepTensor encode(const AudioBuffer& audio) const override;
    AudioBuffer decode(const RepTensor& tensor) const override;

    const std::vector<double>& frequencies() const { return freqs_; }
    std::size_t valid_frames() const { return valid_frames_; }

private:
    struct Atom {
        std::vector<Complex> taps; // centered at taps.size() / 2
        double synthesis_gain = 1.0;
    };

    CodecConfig config_;
    std::vector<double> freqs_;
    std::vector<Atom> atoms_;
    std::size_t valid_frames_;
};

// --- CQ-NSGT -------------------------------------------------------------

struct NsgtBand {
    double center_hz = 0.0; // signed: negative-frequency bands are < 0
    std::size_t start = 0;  // first FFT bin of the support (mod fft length)
    std::vector<double> window;
    std::vector<double> dual;
};

struct NsgtFrame {
    std::size_t signal_length = 0; // FFT length of the analysed signal
    std::size_t coeffs = 0;        // coefficients per band
    // [0] = DC, [1..K] positive bands ascending, [K+1..2K] negative bands by ascending |f|.
    std::vector<NsgtBand> bands;

    std::size_t half_bands() const { return (bands.size() - 1) / 2; }
};

// Thrown when a configuration cannot yield a valid transform.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

NsgtFrame nsgt_build(const CodecConfig& config);

// Unfolded coefficients: one row of `frame.coeffs` values per band.
std::vector<std::vector<Complex>> nsgt_analyze(std::span<const double> signal, const NsgtFrame& frame);
std::vector<double> nsgt_synthesize(const std::vector<std::vector<Complex>>& coeffs,
                                    const NsgtFrame& frame, std::size_t out_length);

RepTensor nsgt_fold(const std::vector<std::vector<Complex>>& coeffs, const NsgtFrame& frame);
std::vector<std::vector<Complex>> nsgt_unfold(const RepTensor& t, const NsgtFrame& frame);

RepTensor nsgt_encode(const AudioBuffer& audio, const NsgtFrame& frame);
AudioBuffer nsgt_decode(const RepTensor& t, const NsgtFrame& frame);

} // namespace audiorep
