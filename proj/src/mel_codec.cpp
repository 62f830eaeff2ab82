#include "audiorep/codecs.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace audiorep {

MelCodec::MelCodec(const CodecConfig& config, bool cepstral)
    : config_(config),
      cepstral_(cepstral),
      filterbank_(config.n_mels, config.frame.bins(), kSampleRate, config.mel_fmin, config.mel_fmax) {
    const std::size_t n_mels = filterbank_.n_mels();
    const std::size_t bins = filterbank_.bins();
    Eigen::MatrixXd m(n_mels, bins);
    for (std::size_t i = 0; i < n_mels; ++i) {
        for (std::size_t k = 0; k < bins; ++k) m(i, k) = filterbank_.weight(i, k);
    }
    const Eigen::MatrixXd pinv = m.completeOrthogonalDecomposition().pseudoInverse();
    pinv_.resize(bins * n_mels);
    for (std::size_t k = 0; k < bins; ++k) {
        for (std::size_t i = 0; i < n_mels; ++i) pinv_[k * n_mels + i] = pinv(k, i);
    }
}

std::vector<double> MelCodec::log_mel(const AudioBuffer& audio) const {
    const auto spec = dsp::stft(prepare_clip(audio), config_.frame);
    const std::size_t frames = spec.frames();
    const std::size_t n_mels = filterbank_.n_mels();
    std::vector<double> out(n_mels * frames);
    std::vector<double> column(spec.bins());
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t k = 0; k < spec.bins(); ++k) column[k] = std::abs(spec.at(k, f));
        const auto mel = filterbank_.apply(column);
        for (std::size_t m = 0; m < n_mels; ++m) {
            out[m * frames + f] = std::log(mel[m] + config_.log_offset);
        }
    }
    return out;
}

dsp::ComplexSpectrogram MelCodec::mel_to_magnitude(std::span<const double> mel_energy) const {
    const std::size_t n_mels = filterbank_.n_mels();
    const std::size_t bins = filterbank_.bins();
    const std::size_t frames = config_.frame.frames();
    if (mel_energy.size() != n_mels * frames) {
        throw std::invalid_argument("mel_to_magnitude: expected n_mels x frames energies");
    }
    dsp::ComplexSpectrogram mag(bins, frames);
    for (std::size_t k = 0; k < bins; ++k) {
        const double* row = &pinv_[k * n_mels];
        for (std::size_t f = 0; f < frames; ++f) {
            double acc = 0.0;
            for (std::size_t m = 0; m < n_mels; ++m) acc += row[m] * mel_energy[m * frames + f];
            mag.at(k, f) = Complex(std::max(0.0, acc), 0.0);
        }
    }
    return mag;
}

RepTensor MelCodec::encode(const AudioBuffer& audio) const {
    const auto logmel = log_mel(audio);
    const std::size_t n_mels = filterbank_.n_mels();
    const std::size_t frames = config_.frame.frames();
    RepTensor t(id(), shape());
    if (!cepstral_) {
        for (std::size_t i = 0; i < logmel.size(); ++i) t.data()[i] = static_cast<float>(logmel[i]);
        return t;
    }
    std::vector<double> column(n_mels);
    for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t m = 0; m < n_mels; ++m) column[m] = logmel[m * frames + f];
        const auto coeffs = dsp::dct_ii(column);
        for (std::size_t m = 0; m < n_mels; ++m) t.at(0, m, f) = static_cast<float>(coeffs[m]);
    }
    return t;
}

AudioBuffer MelCodec::decode(const RepTensor& tensor) const {
    check_decodable(tensor);
    const std::size_t n_mels = filterbank_.n_mels();
    const std::size_t frames = config_.frame.frames();

    std::vector<double> logmel(n_mels * frames);
    if (!cepstral_) {
        for (std::size_t i = 0; i < logmel.size(); ++i) logmel[i] = tensor.data()[i];
    } else {
        std::vector<double> column(n_mels);
        for (std::size_t f = 0; f < frames; ++f) {
            for (std::size_t m = 0; m < n_mels; ++m) column[m] = tensor.at(0, m, f);
            const auto values = dsp::dct_iii(column);
            for (std::size_t m = 0; m < n_mels; ++m) logmel[m * frames + f] = values[m];
        }
    }

    std::vector<double> energy(logmel.size());
    for (std::size_t i = 0; i < logmel.size(); ++i) {
        energy[i] = std::max(0.0, std::exp(logmel[i]) - config_.log_offset);
    }
    const auto mag = mel_to_magnitude(energy);
    auto gl = griffin_lim(mag, config_.frame, config_.griffin_lim_iters, config_.seed);
    return AudioBuffer(std::move(gl.samples), kSampleRate);
}

} // namespace audiorep
