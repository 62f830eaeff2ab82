#include "audiorep/codecs.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace audiorep {

namespace {

double spectral_error(const dsp::ComplexSpectrogram& estimate, const dsp::ComplexSpectrogram& mag) {
    double acc = 0.0;
    for (std::size_t i = 0; i < mag.data().size(); ++i) {
        const double d = std::abs(estimate.data()[i]) - mag.data()[i].real();
        acc += d * d;
    }
    return std::sqrt(acc);
}

// Replace the phase of `spec` with its own, keeping the target magnitude.
void impose_magnitude(dsp::ComplexSpectrogram& spec, const dsp::ComplexSpectrogram& mag) {
    for (std::size_t i = 0; i < spec.data().size(); ++i) {
        const Complex v = spec.data()[i];
        const double target = mag.data()[i].real();
        const double norm = std::hypot(v.real(), v.imag());
        // Zero bins take phase 0, matching arg(0) == 0.
        spec.data()[i] = norm > 0.0 ? Complex(v.real() * (target / norm), v.imag() * (target / norm))
                                    : Complex(target, 0.0);
    }
}

} // namespace

GriffinLimResult griffin_lim(const dsp::ComplexSpectrogram& mag, const dsp::FrameParams& params,
                             int iters, std::uint64_t seed, bool trace_errors,
                             std::size_t out_length) {
    if (iters < 1) throw std::invalid_argument("griffin_lim: iters must be >= 1");
    if (mag.bins() != params.bins() || mag.frames() != params.frames()) {
        throw std::invalid_argument("griffin_lim: magnitude shape does not match frame params");
    }
    for (const auto& v : mag.data()) {
        if (!(v.real() >= 0.0) || !std::isfinite(v.real())) {
            throw std::invalid_argument("griffin_lim: magnitudes must be finite and non-negative");
        }
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase_dist(-std::numbers::pi, std::numbers::pi);
    dsp::ComplexSpectrogram spec(mag.bins(), mag.frames());
    for (std::size_t i = 0; i < spec.data().size(); ++i) {
        spec.data()[i] = std::polar(mag.data()[i].real(), phase_dist(rng));
    }

    GriffinLimResult result;
    std::vector<double> x = dsp::istft(spec, params, params.padded_length);
    for (int k = 1; k <= iters; ++k) {
        spec = dsp::stft(x, params);
        impose_magnitude(spec, mag);
        x = dsp::istft(spec, params, params.padded_length);
        if (trace_errors) result.errors.push_back(spectral_error(dsp::stft(x, params), mag));
    }
    x.resize(out_length);
    result.samples = std::move(x);
    return result;
}

} // namespace audiorep
