#pragma once

// Spectral primitives shared by every codec: FFT, STFT/iSTFT, mel filterbank,
// orthonormal DCT and phase wrapping. Everything here is a pure function or an
// immutable precomputed object.

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace audiorep {

using Complex = std::complex<double>;

constexpr int kSampleRate = 16000;
constexpr std::size_t kClipLength = 16000;

// Mono signal at a fixed sample rate.
class AudioBuffer {
public:
    AudioBuffer() = default;
    AudioBuffer(std::vector<double> samples, int sample_rate);

    std::span<const double> samples() const { return samples_; }
    int sample_rate() const { return sample_rate_; }
    std::size_t size() const { return samples_.size(); }
    double operator[](std::size_t i) const { return samples_[i]; }

private:
    std::vector<double> samples_;
    int sample_rate_ = kSampleRate;
};

namespace dsp {

struct FrameParams {
    std::size_t fft_size = 1024;
    std::size_t hop = 256;
    std::size_t padded_length = 16384;

    std::size_t bins() const { return fft_size / 2 + 1; }
    std::size_t frames() const { return padded_length / hop; }
    // Throws std::invalid_argument if the framing cannot overlap-add exactly.
    void validate() const;
};

// bins x frames, stored bin-major (data[bin * frames + frame]).
class ComplexSpectrogram {
public:
    ComplexSpectrogram() = default;
    ComplexSpectrogram(std::size_t bins, std::size_t frames);

    std::size_t bins() const { return bins_; }
    std::size_t frames() const { return frames_; }

    Complex& at(std::size_t bin, std::size_t frame) { return data_[bin * frames_ + frame]; }
    const Complex& at(std::size_t bin, std::size_t frame) const { return data_[bin * frames_ + frame]; }

    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }

private:
    std::size_t bins_ = 0;
    std::size_t frames_ = 0;
    std::vector<Complex> data_;
};

bool is_power_of_two(std::size_t n);

// In-place radix-2 transforms. `inverse` uses exp(+2πi kn/N) and scales by 1/N.
void fft_inplace(std::span<Complex> x, bool inverse = false);

std::vector<Complex> fft_forward(std::span<const Complex> x);
std::vector<Complex> fft_inverse(std::span<const Complex> x);

// Arbitrary-length DFT (Bluestein chirp-z on top of the radix-2 kernel).
// Same sign and scaling conventions as fft_forward / fft_inverse.
class DftPlan {
public:
    explicit DftPlan(std::size_t n);

    std::size_t size() const { return n_; }
    std::vector<Complex> forward(std::span<const Complex> x) const;
    std::vector<Complex> inverse(std::span<const Complex> x) const;

private:
    std::vector<Complex> run(std::span<const Complex> x, bool inverse) const;

    std::size_t n_;
    std::size_t m_;
    std::vector<Complex> chirp_;      // exp(-iπ k²/n)
    std::vector<Complex> kernel_fft_; // FFT of conj(chirp), wrapped to length m
};

std::vector<double> hann_periodic(std::size_t n);

ComplexSpectrogram stft(const AudioBuffer& audio, const FrameParams& params = {});
ComplexSpectrogram stft(std::span<const double> samples, const FrameParams& params = {});

// Weighted overlap-add inverse of stft(); output trimmed to out_length samples.
std::vector<double> istft(const ComplexSpectrogram& spec, const FrameParams& params,
                          std::size_t out_length);

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filters, row-major n_mels x bins.
class MelFilterbank {
public:
    MelFilterbank(std::size_t n_mels, std::size_t bins, int sample_rate, double fmin, double fmax);

    std::size_t n_mels() const { return n_mels_; }
    std::size_t bins() const { return bins_; }
    double fmin() const { return fmin_; }
    double fmax() const { return fmax_; }

    double weight(std::size_t mel, std::size_t bin) const { return matrix_[mel * bins_ + bin]; }
    std::span<const double> row(std::size_t mel) const {
        return std::span<const double>(matrix_).subspan(mel * bins_, bins_);
    }
    // Center frequency (Hz) of each filter.
    const std::vector<double>& centers() const { return centers_; }

    std::vector<double> apply(std::span<const double> spectrum) const;

private:
    std::size_t n_mels_;
    std::size_t bins_;
    double fmin_;
    double fmax_;
    std::vector<double> matrix_;
    std::vector<double> centers_;
};

MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t bins, int sample_rate, double fmin,
                             double fmax);

std::vector<double> dct_ii(std::span<const double> x);
std::vector<double> dct_iii(std::span<const double> x);

double princarg(double phase);

double snr_db(std::span<const double> reference, std::span<const double> estimate);

} // namespace dsp
} // namespace audiorep
