#include "audiorep/codecs.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace audiorep {

namespace {

double rising(double f, double lo, double hi) {
    const double s = std::sin(0.5 * std::numbers::pi * (f - lo) / (hi - lo));
    return s * s;
}

double falling(double f, double lo, double hi) {
    const double c = std::cos(0.5 * std::numbers::pi * (f - lo) / (hi - lo));
    return c * c;
}

// Positive-frequency band on bins [first, last] with the given window shape.
NsgtBand positive_band(double centre, std::size_t first, std::size_t last, double bin_hz,
                       double lo, double hi, bool plateau) {
    NsgtBand band;
    band.center_hz = centre;
    band.start = first;
    for (std::size_t v = first; v <= last; ++v) {
        const double f = static_cast<double>(v) * bin_hz;
        double g = 0.0;
        if (f <= centre) {
            g = lo == centre ? 1.0 : rising(f, lo, centre);
        } else {
            g = plateau ? 1.0 : falling(f, centre, hi);
        }
        band.window.push_back(g);
    }
    return band;
}

// std::polar requires a non-negative radius; decoded tensors may not honour that.
Complex from_polar(double r, double theta) { return {r * std::cos(theta), r * std::sin(theta)}; }

NsgtBand mirrored(const NsgtBand& band, std::size_t length) {
    NsgtBand neg;
    neg.center_hz = -band.center_hz;
    const std::size_t last = band.start + band.window.size() - 1;
    neg.start = (length - last) % length;
    neg.window.assign(band.window.rbegin(), band.window.rend());
    return neg;
}

} // namespace

NsgtFrame nsgt_build(const CodecConfig& config) {
    const auto& p = config.nsgt;
    const std::size_t length = config.frame.padded_length;
    const double nyquist = kSampleRate / 2.0;
    const double bin_hz = static_cast<double>(kSampleRate) / static_cast<double>(length);
    if (p.n_bins < 5 || p.n_bins % 2 == 0) {
        throw ConfigError("cq-nsgt: band count must be odd (DC plus mirrored halves)");
    }
    if (!(p.fmin > 0.0 && p.fmin < p.fmax && p.fmax < nyquist)) {
        throw ConfigError("cq-nsgt: require 0 < fmin < fmax < Nyquist");
    }
    if (length % 2 != 0 || !dsp::is_power_of_two(length)) {
        throw ConfigError("cq-nsgt: signal length must be a power of two");
    }

    const std::size_t half = static_cast<std::size_t>(p.n_bins - 1) / 2;
    std::vector<double> centres(half);
    for (std::size_t j = 0; j < half; ++j) {
        centres[j] = p.fmin * std::pow(p.fmax / p.fmin, static_cast<double>(j) / (half - 1));
    }

    NsgtFrame frame;
    frame.signal_length = length;
    frame.coeffs = p.frames;

    // DC band: falling half-window on |f| < fmin.
    {
        const auto reach = static_cast<std::size_t>(std::ceil(centres[0] / bin_hz)) - 1;
        NsgtBand dc;
        dc.start = (length - reach) % length;
        for (std::size_t i = 0; i <= 2 * reach; ++i) {
            const double f = std::abs(static_cast<double>(i) - static_cast<double>(reach)) * bin_hz;
            dc.window.push_back(falling(f, 0.0, centres[0]));
        }
        frame.bands.push_back(std::move(dc));
    }

    std::vector<NsgtBand> positives;
    for (std::size_t j = 0; j < half; ++j) {
        const double lo = j == 0 ? 0.0 : centres[j - 1];
        const bool top = j + 1 == half;
        const double hi = top ? nyquist : centres[j + 1];
        const auto first = static_cast<std::size_t>(std::floor(lo / bin_hz)) + 1;
        const std::size_t last =
            top ? length / 2 : static_cast<std::size_t>(std::ceil(hi / bin_hz)) - 1;
        if (last < first) {
            throw ConfigError("cq-nsgt: band " + std::to_string(j) + " covers no frequency bin");
        }
        positives.push_back(positive_band(centres[j], first, last, bin_hz, lo, hi, top));
    }
    for (const auto& b : positives) frame.bands.push_back(b);
    for (const auto& b : positives) frame.bands.push_back(mirrored(b, length));

    std::vector<double> frame_operator(length, 0.0);
    for (std::size_t b = 0; b < frame.bands.size(); ++b) {
        const auto& band = frame.bands[b];
        if (band.window.size() > frame.coeffs) {
            throw ConfigError("cq-nsgt: band " + std::to_string(b) + " spans " +
                              std::to_string(band.window.size()) + " bins, more than the " +
                              std::to_string(frame.coeffs) +
                              " coefficients per band (painless condition violated)");
        }
        for (std::size_t i = 0; i < band.window.size(); ++i) {
            const double g = band.window[i];
            frame_operator[(band.start + i) % length] += g * g;
        }
    }
    for (std::size_t v = 0; v < length; ++v) {
        if (!(frame_operator[v] > 1e-6)) {
            throw ConfigError("cq-nsgt: frame operator vanishes at bin " + std::to_string(v));
        }
    }
    for (auto& band : frame.bands) {
        band.dual.resize(band.window.size());
        for (std::size_t i = 0; i < band.window.size(); ++i) {
            band.dual[i] = band.window[i] / frame_operator[(band.start + i) % length];
        }
    }
    return frame;
}

std::vector<std::vector<Complex>> nsgt_analyze(std::span<const double> signal, const NsgtFrame& frame) {
    const std::size_t length = frame.signal_length;
    if (signal.size() > length) {
        throw std::invalid_argument("nsgt_analyze: signal longer than the frame length");
    }
    std::vector<Complex> spectrum(length, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < signal.size(); ++i) spectrum[i] = Complex(signal[i], 0.0);
    dsp::fft_inplace(spectrum, false);

    const dsp::DftPlan plan(frame.coeffs);
    std::vector<std::vector<Complex>> coeffs;
    coeffs.reserve(frame.bands.size());
    std::vector<Complex> slice(frame.coeffs);
    for (const auto& band : frame.bands) {
        std::fill(slice.begin(), slice.end(), Complex(0.0, 0.0));
        for (std::size_t i = 0; i < band.window.size(); ++i) {
            slice[i] = spectrum[(band.start + i) % length] * band.window[i];
        }
        coeffs.push_back(plan.inverse(slice));
    }
    return coeffs;
}

std::vector<double> nsgt_synthesize(const std::vector<std::vector<Complex>>& coeffs,
                                    const NsgtFrame& frame, std::size_t out_length) {
    const std::size_t length = frame.signal_length;
    if (coeffs.size() != frame.bands.size()) {
        throw std::invalid_argument("nsgt_synthesize: band count mismatch");
    }
    const dsp::DftPlan plan(frame.coeffs);
    std::vector<Complex> spectrum(length, Complex(0.0, 0.0));
    for (std::size_t b = 0; b < frame.bands.size(); ++b) {
        const auto& band = frame.bands[b];
        const auto slice = plan.forward(coeffs[b]);
        for (std::size_t i = 0; i < band.dual.size(); ++i) {
            spectrum[(band.start + i) % length] += slice[i] * band.dual[i];
        }
    }
    dsp::fft_inplace(spectrum, true);
    std::vector<double> out(out_length);
    for (std::size_t i = 0; i < out_length; ++i) out[i] = spectrum[i].real();
    return out;
}

RepTensor nsgt_fold(const std::vector<std::vector<Complex>>& coeffs, const NsgtFrame& frame) {
    const auto shape = expected_shape(Repr::cq_nsgt);
    const std::size_t half = frame.half_bands();
    if (coeffs.size() != frame.bands.size() || half > shape.bins || frame.coeffs != shape.frames) {
        throw std::invalid_argument("nsgt_fold: frame does not match the tensor layout");
    }
    RepTensor t(Repr::cq_nsgt, shape);
    for (std::size_t j = 0; j < half; ++j) {
        const auto& pos = coeffs[1 + j];
        const auto& neg = coeffs[1 + half + j];
        for (std::size_t m = 0; m < frame.coeffs; ++m) {
            t.at(0, j, m) = static_cast<float>(std::abs(pos[m]));
            t.at(1, j, m) = static_cast<float>(pos[m] == Complex(0.0, 0.0) ? 0.0 : std::arg(pos[m]));
            t.at(2, j, m) = static_cast<float>(std::abs(neg[m]));
            t.at(3, j, m) = static_cast<float>(neg[m] == Complex(0.0, 0.0) ? 0.0 : std::arg(neg[m]));
        }
    }
    return t;
}

std::vector<std::vector<Complex>> nsgt_unfold(const RepTensor& t, const NsgtFrame& frame) {
    if (t.shape() != expected_shape(Repr::cq_nsgt)) {
        throw std::invalid_argument("nsgt_unfold: bad tensor shape " + to_string(t.shape()));
    }
    const std::size_t half = frame.half_bands();
    std::vector<std::vector<Complex>> coeffs(frame.bands.size(),
                                             std::vector<Complex>(frame.coeffs, Complex(0.0, 0.0)));
    for (std::size_t j = 0; j < half; ++j) {
        for (std::size_t m = 0; m < frame.coeffs; ++m) {
            coeffs[1 + j][m] = from_polar(t.at(0, j, m), t.at(1, j, m));
            coeffs[1 + half + j][m] = from_polar(t.at(2, j, m), t.at(3, j, m));
        }
    }
    return coeffs;
}

RepTensor nsgt_encode(const AudioBuffer& audio, const NsgtFrame& frame) {
    return nsgt_fold(nsgt_analyze(prepare_clip(audio), frame), frame);
}

AudioBuffer nsgt_decode(const RepTensor& t, const NsgtFrame& frame) {
    if (!t.all_finite()) throw std::invalid_argument("nsgt_decode: non-finite tensor entries");
    return AudioBuffer(nsgt_synthesize(nsgt_unfold(t, frame), frame, kClipLength), kSampleRate);
}

} // namespace audiorep
