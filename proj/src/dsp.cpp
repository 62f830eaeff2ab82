#include "audiorep/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace audiorep {

AudioBuffer::AudioBuffer(std::vector<double> samples, int sample_rate)
    : samples_(std::move(samples)), sample_rate_(sample_rate) {
    if (sample_rate_ <= 0) {
        throw std::invalid_argument("AudioBuffer: sample rate must be positive");
    }
    if (samples_.empty()) {
        throw std::invalid_argument("AudioBuffer: empty signal");
    }
    for (double s : samples_) {
        if (!std::isfinite(s)) {
            throw std::invalid_argument("AudioBuffer: non-finite sample");
        }
    }
}

namespace dsp {

namespace {

constexpr double kPi = std::numbers::pi;

// Twiddle tables are built once per size and never mutated afterwards.
const std::vector<Complex>& twiddles(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<const std::vector<Complex>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto table = std::make_unique<std::vector<Complex>>(n / 2);
        for (std::size_t k = 0; k < n / 2; ++k) {
            const double angle = -2.0 * kPi * static_cast<double>(k) / static_cast<double>(n);
            (*table)[k] = Complex(std::cos(angle), std::sin(angle));
        }
        it = cache.emplace(n, std::move(table)).first;
    }
    return *it->second;
}

const std::vector<double>& hann_table(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<const std::vector<double>>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        it = cache.emplace(n, std::make_unique<const std::vector<double>>(hann_periodic(n))).first;
    }
    return *it->second;
}

std::size_t next_power_of_two(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

} // namespace

void FrameParams::validate() const {
    if (fft_size == 0 || !is_power_of_two(fft_size)) {
        throw std::invalid_argument("FrameParams: fft_size must be a power of two");
    }
    if (hop == 0 || hop > fft_size) {
        throw std::invalid_argument("FrameParams: hop must be in [1, fft_size]");
    }
    if (padded_length < fft_size || padded_length % hop != 0) {
        throw std::invalid_argument("FrameParams: hop must divide padded_length >= fft_size");
    }
    if (fft_size % hop != 0) {
        throw std::invalid_argument("FrameParams: hop must divide fft_size for overlap-add");
    }
}

ComplexSpectrogram::ComplexSpectrogram(std::size_t bins, std::size_t frames)
    : bins_(bins), frames_(frames), data_(bins * frames) {}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

void fft_inplace(std::span<Complex> x, bool inverse) {
    const std::size_t n = x.size();
    if (!is_power_of_two(n)) {
        throw std::invalid_argument("fft: length " + std::to_string(n) + " is not a power of two");
    }
    if (n == 1) return;

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(x[i], x[j]);
    }

    const auto& tw = twiddles(n);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        const std::size_t stride = n / len;
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                // Explicit arithmetic: std::complex operator* carries NaN/Inf recovery.
                const double wr = tw[k * stride].real();
                const double wi = inverse ? -tw[k * stride].imag() : tw[k * stride].imag();
                const Complex u = x[start + k];
                const Complex b = x[start + k + half];
                const double vr = b.real() * wr - b.imag() * wi;
                const double vi = b.real() * wi + b.imag() * wr;
                x[start + k] = Complex(u.real() + vr, u.imag() + vi);
                x[start + k + half] = Complex(u.real() - vr, u.imag() - vi);
            }
        }
    }

    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& v : x) v *= scale;
    }
}

std::vector<Complex> fft_forward(std::span<const Complex> x) {
    std::vector<Complex> out(x.begin(), x.end());
    fft_inplace(out, false);
    return out;
}

std::vector<Complex> fft_inverse(std::span<const Complex> x) {
    std::vector<Complex> out(x.begin(), x.end());
    fft_inplace(out, true);
    return out;
}

DftPlan::DftPlan(std::size_t n) : n_(n), m_(next_power_of_two(2 * n - 1)) {
    if (n == 0) throw std::invalid_argument("DftPlan: length must be positive");
    chirp_.resize(n);
    const std::size_t two_n = 2 * n;
    for (std::size_t k = 0; k < n; ++k) {
        // k² mod 2n keeps the angle argument small for large k.
        const std::size_t k2 = (k * k) % two_n;
        const double angle = -kPi * static_cast<double>(k2) / static_cast<double>(n);
        chirp_[k] = Complex(std::cos(angle), std::sin(angle));
    }
    kernel_fft_.assign(m_, Complex(0.0, 0.0));
    kernel_fft_[0] = std::conj(chirp_[0]);
    for (std::size_t k = 1; k < n; ++k) {
        kernel_fft_[k] = std::conj(chirp_[k]);
        kernel_fft_[m_ - k] = std::conj(chirp_[k]);
    }
    fft_inplace(kernel_fft_, false);
}

std::vector<Complex> DftPlan::run(std::span<const Complex> x, bool inverse) const {
    if (x.size() != n_) {
        throw std::invalid_argument("DftPlan: expected length " + std::to_string(n_) + ", got " +
                                    std::to_string(x.size()));
    }
    std::vector<Complex> a(m_, Complex(0.0, 0.0));
    for (std::size_t k = 0; k < n_; ++k) {
        const Complex v = inverse ? std::conj(x[k]) : x[k];
        a[k] = v * chirp_[k];
    }
    fft_inplace(a, false);
    for (std::size_t k = 0; k < m_; ++k) a[k] *= kernel_fft_[k];
    fft_inplace(a, true);

    std::vector<Complex> out(n_);
    const double scale = inverse ? 1.0 / static_cast<double>(n_) : 1.0;
    for (std::size_t k = 0; k < n_; ++k) {
        Complex v = a[k] * chirp_[k];
        if (inverse) v = std::conj(v);
        out[k] = v * scale;
    }
    return out;
}

std::vector<Complex> DftPlan::forward(std::span<const Complex> x) const { return run(x, false); }
std::vector<Complex> DftPlan::inverse(std::span<const Complex> x) const { return run(x, true); }

std::vector<double> hann_periodic(std::size_t n) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(n));
    }
    return w;
}

// Frames are taken circularly over the end-padded buffer, so every sample is
// covered by fft_size / hop frames and the squared-window sum is constant.
// Two real frames share one complex FFT (frame a in the real part, b in the
// imaginary part) and are separated by Hermitian symmetry.
ComplexSpectrogram stft(std::span<const double> samples, const FrameParams& params) {
    params.validate();
    if (samples.size() > params.padded_length) {
        throw std::invalid_argument("stft: signal of " + std::to_string(samples.size()) +
                                    " samples exceeds padded length " +
                                    std::to_string(params.padded_length));
    }
    const std::size_t n_fft = params.fft_size;
    const std::size_t length = params.padded_length;
    const std::size_t frames = params.frames();
    const auto& window = hann_table(n_fft);

    auto sample = [&](std::size_t idx) { return idx < samples.size() ? samples[idx] : 0.0; };

    ComplexSpectrogram spec(params.bins(), frames);
    std::vector<Complex> buf(n_fft);
    for (std::size_t t = 0; t < frames; t += 2) {
        const bool pair = t + 1 < frames;
        const std::size_t start_a = t * params.hop;
        const std::size_t start_b = (t + 1) * params.hop;
        for (std::size_t i = 0; i < n_fft; ++i) {
            const double a = sample((start_a + i) % length);
            const double b = pair ? sample((start_b + i) % length) : 0.0;
            buf[i] = Complex(a * window[i], b * window[i]);
        }
        fft_inplace(buf, false);
        for (std::size_t k = 0; k < spec.bins(); ++k) {
            const Complex z = buf[k];
            const Complex zc = std::conj(buf[(n_fft - k) % n_fft]);
            spec.at(k, t) = 0.5 * (z + zc);
            if (pair) spec.at(k, t + 1) = Complex(0.0, -0.5) * (z - zc);
        }
    }
    return spec;
}

ComplexSpectrogram stft(const AudioBuffer& audio, const FrameParams& params) {
    return stft(audio.samples(), params);
}

std::vector<double> istft(const ComplexSpectrogram& spec, const FrameParams& params,
                          std::size_t out_length) {
    params.validate();
    if (spec.bins() != params.bins() || spec.frames() != params.frames()) {
        throw std::invalid_argument("istft: spectrogram is " + std::to_string(spec.bins()) + "x" +
                                    std::to_string(spec.frames()) + ", expected " +
                                    std::to_string(params.bins()) + "x" +
                                    std::to_string(params.frames()));
    }
    if (out_length > params.padded_length) {
        throw std::invalid_argument("istft: out_length exceeds padded length");
    }
    const std::size_t n_fft = params.fft_size;
    const std::size_t half = n_fft / 2;
    const std::size_t length = params.padded_length;
    const std::size_t frames = spec.frames();
    const auto& window = hann_table(n_fft);

    // Hermitian extension of one frame; DC and Nyquist imaginary parts are ignored.
    auto full_bin = [&](std::size_t t, std::size_t k) -> Complex {
        if (k == 0 || k == half) return Complex(spec.at(k, t).real(), 0.0);
        if (k < half) return spec.at(k, t);
        return std::conj(spec.at(n_fft - k, t));
    };

    std::vector<double> acc(length, 0.0);
    std::vector<double> norm(length, 0.0);
    std::vector<Complex> buf(n_fft);
    for (std::size_t t = 0; t < frames; t += 2) {
        const bool pair = t + 1 < frames;
        for (std::size_t k = 0; k < n_fft; ++k) {
            const Complex a = full_bin(t, k);
            const Complex b = pair ? full_bin(t + 1, k) : Complex(0.0, 0.0);
            buf[k] = a + Complex(0.0, 1.0) * b;
        }
        fft_inplace(buf, true);

        for (std::size_t p = 0; p < (pair ? 2u : 1u); ++p) {
            const std::size_t start = (t + p) * params.hop;
            for (std::size_t i = 0; i < n_fft; ++i) {
                const std::size_t idx = (start + i) % length;
                const double v = p == 0 ? buf[i].real() : buf[i].imag();
                acc[idx] += window[i] * v;
                norm[idx] += window[i] * window[i];
            }
        }
    }

    std::vector<double> out(out_length);
    for (std::size_t i = 0; i < out_length; ++i) {
        out[i] = norm[i] > 0.0 ? acc[i] / norm[i] : 0.0;
    }
    return out;
}

// Slaney-style mel scale: linear below 1 kHz, logarithmic above.
namespace {
constexpr double kMelLinearHzPerMel = 200.0 / 3.0;
constexpr double kMelBreakHz = 1000.0;
constexpr double kMelBreak = kMelBreakHz / kMelLinearHzPerMel;
const double kMelLogStep = std::log(6.4) / 27.0;
} // namespace

double hz_to_mel(double hz) {
    if (hz < kMelBreakHz) return hz / kMelLinearHzPerMel;
    return kMelBreak + std::log(hz / kMelBreakHz) / kMelLogStep;
}

double mel_to_hz(double mel) {
    if (mel < kMelBreak) return mel * kMelLinearHzPerMel;
    return kMelBreakHz * std::exp((mel - kMelBreak) * kMelLogStep);
}

MelFilterbank::MelFilterbank(std::size_t n_mels, std::size_t bins, int sample_rate, double fmin,
                             double fmax)
    : n_mels_(n_mels), bins_(bins), fmin_(fmin), fmax_(fmax) {
    if (n_mels == 0) throw std::invalid_argument("mel_filterbank: n_mels must be >= 1");
    if (bins < 2) throw std::invalid_argument("mel_filterbank: need at least 2 bins");
    if (sample_rate <= 0) throw std::invalid_argument("mel_filterbank: bad sample rate");
    if (!(fmin >= 0.0 && fmin < fmax)) {
        throw std::invalid_argument("mel_filterbank: require 0 <= fmin < fmax");
    }
    if (fmax > sample_rate / 2.0) {
        throw std::invalid_argument("mel_filterbank: fmax " + std::to_string(fmax) +
                                    " Hz exceeds Nyquist");
    }

    const double mel_lo = hz_to_mel(fmin);
    const double mel_hi = hz_to_mel(fmax);
    std::vector<double> edges(n_mels + 2);
    for (std::size_t i = 0; i < edges.size(); ++i) {
        const double mel =
            mel_lo + (mel_hi - mel_lo) * static_cast<double>(i) / static_cast<double>(n_mels + 1);
        edges[i] = mel_to_hz(mel);
    }

    const double bin_hz = sample_rate / (2.0 * static_cast<double>(bins - 1));
    matrix_.assign(n_mels * bins, 0.0);
    centers_.resize(n_mels);
    for (std::size_t m = 0; m < n_mels; ++m) {
        const double left = edges[m];
        const double center = edges[m + 1];
        const double right = edges[m + 2];
        centers_[m] = center;
        const double area_norm = 2.0 / (right - left);
        bool any = false;
        for (std::size_t k = 0; k < bins; ++k) {
            const double f = static_cast<double>(k) * bin_hz;
            const double rising = (f - left) / (center - left);
            const double falling = (right - f) / (right - center);
            const double w = std::max(0.0, std::min(rising, falling));
            if (w > 0.0) {
                matrix_[m * bins + k] = w * area_norm;
                any = true;
            }
        }
        if (!any) {
            throw std::invalid_argument("mel_filterbank: filter " + std::to_string(m) +
                                        " covers no frequency bin");
        }
    }
}

std::vector<double> MelFilterbank::apply(std::span<const double> spectrum) const {
    if (spectrum.size() != bins_) {
        throw std::invalid_argument("MelFilterbank::apply: spectrum length mismatch");
    }
    std::vector<double> out(n_mels_, 0.0);
    for (std::size_t m = 0; m < n_mels_; ++m) {
        double acc = 0.0;
        const double* w = &matrix_[m * bins_];
        for (std::size_t k = 0; k < bins_; ++k) acc += w[k] * spectrum[k];
        out[m] = acc;
    }
    return out;
}

MelFilterbank mel_filterbank(std::size_t n_mels, std::size_t bins, int sample_rate, double fmin,
                             double fmax) {
    return MelFilterbank(n_mels, bins, sample_rate, fmin, fmax);
}

std::vector<double> dct_ii(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dct_ii: empty input");
    std::vector<double> out(n);
    const double s0 = std::sqrt(1.0 / static_cast<double>(n));
    const double s = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            acc += x[i] * std::cos(kPi * (2.0 * static_cast<double>(i) + 1.0) *
                                   static_cast<double>(k) / (2.0 * static_cast<double>(n)));
        }
        out[k] = acc * (k == 0 ? s0 : s);
    }
    return out;
}

std::vector<double> dct_iii(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::invalid_argument("dct_iii: empty input");
    std::vector<double> out(n);
    const double s0 = std::sqrt(1.0 / static_cast<double>(n));
    const double s = std::sqrt(2.0 / static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = x[0] * s0;
        for (std::size_t k = 1; k < n; ++k) {
            acc += x[k] * s *
                   std::cos(kPi * (2.0 * static_cast<double>(i) + 1.0) * static_cast<double>(k) /
                            (2.0 * static_cast<double>(n)));
        }
        out[i] = acc;
    }
    return out;
}

double princarg(double phase) {
    double r = std::remainder(phase, 2.0 * kPi);
    if (r <= -kPi) r += 2.0 * kPi;
    return r;
}

double snr_db(std::span<const double> reference, std::span<const double> estimate) {
    if (reference.size() != estimate.size()) {
        throw std::invalid_argument("snr_db: length mismatch");
    }
    double signal = 0.0;
    double noise = 0.0;
    for (std::size_t i = 0; i < reference.size(); ++i) {
        signal += reference[i] * reference[i];
        const double d = reference[i] - estimate[i];
        noise += d * d;
    }
    if (noise == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / noise);
}

} // namespace dsp
} // namespace audiorep
