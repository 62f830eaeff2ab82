#include "audiorep/codecs.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace audiorep {

namespace {

// Normalised frequency response of a modulated window at an offset `delta_hz`
// from its centre frequency: sum_n w[n] e^{-2πi δ (n - c)/fs} / sum_n w[n].
Complex window_response(const std::vector<double>& window, double delta_hz) {
    const double step = -2.0 * std::numbers::pi * delta_hz / kSampleRate;
    const double centre = static_cast<double>(window.size() / 2);
    const Complex rot(std::cos(step), std::sin(step));
    Complex phasor = std::polar(1.0, -step * centre);
    Complex acc(0.0, 0.0);
    double norm = 0.0;
    for (double w : window) {
        acc += w * phasor;
        norm += w;
        phasor *= rot;
    }
    return acc / norm;
}

} // namespace

CqtCodec::CqtCodec(const CodecConfig& config) : config_(config) {
    const auto& p = config.cqt;
    const double nyquist = kSampleRate / 2.0;
    const double top = p.fmin * std::pow(2.0, static_cast<double>(p.n_bins) / p.bins_per_octave);
    if (!(p.fmin > 0.0) || top > nyquist) {
        throw std::invalid_argument("cqt: fmin * 2^(n_bins/bins_per_octave) = " +
                                    std::to_string(top) + " Hz exceeds Nyquist");
    }
    if (p.hop == 0) throw std::invalid_argument("cqt: hop must be positive");
    valid_frames_ = kClipLength / p.hop + 1;
    if (valid_frames_ > p.padded_frames) {
        throw std::invalid_argument("cqt: " + std::to_string(valid_frames_) +
                                    " frames do not fit the padded frame count");
    }

    const double q = 1.0 / (std::pow(2.0, 1.0 / p.bins_per_octave) - 1.0);
    std::vector<std::vector<double>> windows(p.n_bins);
    freqs_.resize(p.n_bins);
    atoms_.resize(p.n_bins);
    for (int k = 0; k < p.n_bins; ++k) {
        const double f = p.fmin * std::pow(2.0, static_cast<double>(k) / p.bins_per_octave);
        freqs_[k] = f;
        const auto length = static_cast<std::size_t>(std::ceil(q * kSampleRate / f));
        windows[k] = dsp::hann_periodic(length);
        double norm = 0.0;
        for (double w : windows[k]) norm += w;

        auto& taps = atoms_[k].taps;
        taps.resize(length);
        const double centre = static_cast<double>(length / 2);
        for (std::size_t j = 0; j < length; ++j) {
            const double angle =
                2.0 * std::numbers::pi * f * (static_cast<double>(j) - centre) / kSampleRate;
            taps[j] = std::polar(windows[k][j] / norm, angle);
        }
    }

    // Analysis followed by real-part synthesis scales a tone at f by
    // sum_j |A_j(f)|^2 / (2 hop); undo that at each atom's own centre.
    for (int k = 0; k < p.n_bins; ++k) {
        double energy = 0.0;
        for (int j = 0; j < p.n_bins; ++j) {
            energy += std::norm(window_response(windows[j], freqs_[k] - freqs_[j]));
        }
        atoms_[k].synthesis_gain = 2.0 * static_cast<double>(p.hop) / energy;
    }
}

RepTensor CqtCodec::encode(const AudioBuffer& audio) const {
    const auto x = prepare_clip(audio);
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const auto hop = static_cast<std::ptrdiff_t>(config_.cqt.hop);
    RepTensor t(Repr::cqt, shape());
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        const auto& taps = atoms_[k].taps;
        const auto len = static_cast<std::ptrdiff_t>(taps.size());
        const std::ptrdiff_t centre = len / 2;
        for (std::size_t frame = 0; frame < valid_frames_; ++frame) {
            const std::ptrdiff_t offset = static_cast<std::ptrdiff_t>(frame) * hop - centre;
            const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -offset);
            const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(len, n - offset);
            double re = 0.0;
            double im = 0.0;
            for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) {
                const double s = x[offset + j];
                re += s * taps[j].real();
                im -= s * taps[j].imag();
            }
            t.at(0, k, frame) = static_cast<float>(re);
            t.at(1, k, frame) = static_cast<float>(im);
        }
    }
    return t;
}

AudioBuffer CqtCodec::decode(const RepTensor& tensor) const {
    check_decodable(tensor);
    const auto n = static_cast<std::ptrdiff_t>(kClipLength);
    const auto hop = static_cast<std::ptrdiff_t>(config_.cqt.hop);
    std::vector<double> out(kClipLength, 0.0);
    for (std::size_t k = 0; k < atoms_.size(); ++k) {
        const auto& taps = atoms_[k].taps;
        const double gain = atoms_[k].synthesis_gain;
        const auto len = static_cast<std::ptrdiff_t>(taps.size());
        const std::ptrdiff_t centre = len / 2;
        for (std::size_t frame = 0; frame < valid_frames_; ++frame) {
            const double re = gain * tensor.at(0, k, frame);
            const double im = gain * tensor.at(1, k, frame);
            if (re == 0.0 && im == 0.0) continue;
            const std::ptrdiff_t offset = static_cast<std::ptrdiff_t>(frame) * hop - centre;
            const std::ptrdiff_t j_lo = std::max<std::ptrdiff_t>(0, -offset);
            const std::ptrdiff_t j_hi = std::min<std::ptrdiff_t>(len, n - offset);
            for (std::ptrdiff_t j = j_lo; j < j_hi; ++j) {
                out[offset + j] += re * taps[j].real() - im * taps[j].imag();
            }
        }
    }
    return AudioBuffer(std::move(out), kSampleRate);
}

} // namespace audiorep
