#include "audiorep/codecs.hpp"
#include "test_signals.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

using namespace audiorep;
namespace t = audiorep::testing;

namespace {

AudioBuffer clip(std::vector<double> x) { return AudioBuffer(std::move(x), kSampleRate); }

std::vector<double> to_vector(const AudioBuffer& a) {
    return std::vector<double>(a.samples().begin(), a.samples().end());
}

// Decaying harmonic tone, eight partials with 1/h amplitudes.
std::vector<double> harmonic_tone(double f0) {
    std::vector<double> x(kClipLength, 0.0);
    for (int h = 1; h <= 8; ++h) {
        if (f0 * h > 7500.0) break;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double ti = static_cast<double>(i) / kSampleRate;
            x[i] += 0.3 / h * std::exp(-3.0 * ti) * std::sin(2.0 * std::numbers::pi * f0 * h * ti);
        }
    }
    return x;
}

double log_mel_mae(const MelCodec& codec, const AudioBuffer& a, const AudioBuffer& b) {
    const auto la = codec.log_mel(a);
    const auto lb = codec.log_mel(b);
    double acc = 0.0;
    for (std::size_t i = 0; i < la.size(); ++i) acc += std::abs(la[i] - lb[i]);
    return acc / static_cast<double>(la.size());
}

class CodecShapes : public ::testing::TestWithParam<Repr> {};

} // namespace

TEST_P(CodecShapes, EncodeMatchesTableLayout) {
    const Repr r = GetParam();
    const auto tensor = encode(r, clip(t::random_bandlimited(1)));
    EXPECT_EQ(tensor.id(), r);
    EXPECT_EQ(tensor.shape(), expected_shape(r));
    EXPECT_EQ(tensor.data().size(), expected_shape(r).size());
    EXPECT_TRUE(tensor.all_finite());
}

TEST_P(CodecShapes, EncodeIsDeterministic) {
    const auto codec = make_codec(GetParam());
    const auto x = clip(t::random_bandlimited(2));
    const auto a = codec->encode(x);
    const auto b = codec->encode(x);
    EXPECT_TRUE(std::equal(a.data().begin(), a.data().end(), b.data().begin()));
}

TEST_P(CodecShapes, DecodeReturnsOneSecond) {
    const auto codec = make_codec(GetParam());
    const auto y = codec->decode(codec->encode(clip(t::random_bandlimited(3))));
    EXPECT_EQ(y.size(), kClipLength);
    EXPECT_EQ(y.sample_rate(), kSampleRate);
}

TEST_P(CodecShapes, RejectsBadInput) {
    const auto codec = make_codec(GetParam());
    EXPECT_THROW(codec->encode(clip(std::vector<double>(16001, 0.0))), std::invalid_argument);
    EXPECT_THROW(codec->encode(AudioBuffer(std::vector<double>(16000, 0.0), 22050)),
                 std::invalid_argument);

    auto shape = expected_shape(GetParam());
    shape.frames += 1;
    EXPECT_THROW(codec->decode(RepTensor(GetParam(), shape)), std::invalid_argument);

    RepTensor bad(GetParam(), expected_shape(GetParam()));
    bad.data()[0] = std::numeric_limits<float>::quiet_NaN();
    EXPECT_THROW(codec->decode(bad), std::invalid_argument);

    const Repr other = GetParam() == Repr::mel ? Repr::mfcc : Repr::mel;
    EXPECT_THROW(codec->decode(RepTensor(other, expected_shape(other))), std::invalid_argument);
}

INSTANTIATE_TEST_SUITE_P(AllReprs, CodecShapes, ::testing::ValuesIn(kAllReprs),
                         [](const auto& info) {
                             std::string name(repr_name(info.param));
                             std::replace(name.begin(), name.end(), '-', '_');
                             return name;
                         });

TEST(Codec, ShortClipIsZeroPadded) {
    const auto codec = make_codec(Repr::waveform);
    const auto tensor = codec->encode(clip(std::vector<double>(100, 0.25)));
    EXPECT_EQ(tensor.at(0, 0, 99), 0.25f);
    EXPECT_EQ(tensor.at(0, 0, 100), 0.0f);
}

TEST(Waveform, RoundTripIsBitExactAfterQuantisation) {
    const auto x = t::random_bandlimited(4);
    const auto y = decode(encode(Repr::waveform, clip(x)));
    for (std::size_t i = 0; i < x.size(); ++i) {
        EXPECT_EQ(y[i], static_cast<double>(static_cast<float>(x[i])));
    }
}

TEST(Complex, RealSpectrogramHasZeroImaginaryChannel) {
    dsp::ComplexSpectrogram spec(513, 64);
    for (auto& v : spec.data()) v = Complex(1.5, 0.0);
    const auto tensor = complex_pack(spec);
    for (std::size_t k = 0; k < 512; ++k) {
        for (std::size_t f = 0; f < 64; ++f) EXPECT_EQ(tensor.at(1, k, f), 0.0f);
    }
}

TEST(Complex, PackAfterUnpackIsIdentity) {
    std::mt19937 rng(5);
    std::normal_distribution<float> dist;
    RepTensor tensor(Repr::complex, expected_shape(Repr::complex));
    for (auto& v : tensor.data()) v = dist(rng);
    const auto again = complex_pack(complex_unpack(tensor));
    EXPECT_TRUE(std::equal(tensor.data().begin(), tensor.data().end(), again.data().begin()));
}

TEST(Complex, UnpackAfterPackLosesOnlyNyquist) {
    const auto spec = dsp::stft(t::white_noise(6, 16000));
    const auto restored = complex_unpack(complex_pack(spec));
    double nyquist = 0.0;
    double diff = 0.0;
    for (std::size_t f = 0; f < 64; ++f) {
        nyquist += std::norm(spec.at(512, f));
        EXPECT_EQ(restored.at(512, f), Complex(0.0, 0.0));
        for (std::size_t k = 0; k < 513; ++k) {
            diff += std::norm(spec.at(k, f)) - std::norm(restored.at(k, f));
        }
    }
    // Remaining difference is float32 rounding of bins 0..511.
    EXPECT_NEAR(diff, nyquist, 1e-5 * nyquist);
    EXPECT_THROW(complex_pack(dsp::ComplexSpectrogram(512, 64)), std::invalid_argument);
}

TEST(Complex, RoundTripExceeds100dB) {
    const auto codec = make_codec(Repr::complex);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = t::random_bandlimited(seed);
        EXPECT_GE(dsp::snr_db(x, to_vector(codec->decode(codec->encode(clip(x))))), 100.0);
    }
}

TEST(MagIf, ConstantPhaseGivesZeroIf) {
    dsp::ComplexSpectrogram spec(513, 64);
    for (auto& v : spec.data()) v = std::polar(2.0, 0.8);
    const auto tensor = magif_encode(spec, 1e-6);
    for (std::size_t k = 0; k < 512; ++k) {
        EXPECT_NEAR(tensor.at(1, k, 0), 0.8 / std::numbers::pi, 1e-7);
        for (std::size_t f = 1; f < 64; ++f) EXPECT_EQ(tensor.at(1, k, f), 0.0f);
    }
}

TEST(MagIf, SteadySinusoidHasPhaseAdvanceIf) {
    const std::size_t bin = 65;
    const double freq = bin * static_cast<double>(kSampleRate) / 1024.0;
    const auto tensor = magif_encode(dsp::stft(t::sine(freq)), 1e-6);
    const double expected = dsp::princarg(2.0 * std::numbers::pi * freq * 256.0 / kSampleRate) /
                            std::numbers::pi;
    EXPECT_NEAR(expected, 0.5, 1e-12);
    for (std::size_t f = 1; f < 59; ++f) EXPECT_NEAR(tensor.at(1, bin, f), expected, 1e-6);
}

TEST(MagIf, DecodeInvertsEncode) {
    const auto spec = dsp::stft(t::random_bandlimited(7));
    const auto restored = magif_decode(magif_encode(spec, 1e-6), 1e-6);
    double max_mag = 0.0;
    for (const auto& v : spec.data()) max_mag = std::max(max_mag, std::abs(v));
    for (std::size_t k = 0; k < 512; ++k) {
        for (std::size_t f = 0; f < 64; ++f) {
            const Complex a = spec.at(k, f);
            const Complex b = restored.at(k, f);
            EXPECT_LE(std::abs(a - b), 1e-5 * std::max(std::abs(a), 1e-3 * max_mag));
        }
    }
}

TEST(MagIf, CumulativePhaseMatchesOriginalModulo2Pi) {
    const auto spec = dsp::stft(t::random_bandlimited(8));
    const auto tensor = magif_encode(spec, 1e-6);
    double worst = 0.0;
    for (std::size_t k = 0; k < 512; ++k) {
        double phase = 0.0;
        for (std::size_t f = 0; f < 64; ++f) {
            phase += std::numbers::pi * tensor.at(1, k, f);
            worst = std::max(worst, std::abs(dsp::princarg(phase - std::arg(spec.at(k, f)))));
        }
    }
    EXPECT_LE(worst, 1e-4);
}

TEST(MagIf, RoundTripExceeds60dB) {
    const auto codec = make_codec(Repr::mag_if);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = t::random_bandlimited(100 + seed);
        EXPECT_GE(dsp::snr_db(x, to_vector(codec->decode(codec->encode(clip(x))))), 60.0);
    }
}

TEST(GriffinLim, SpectralErrorIsNonIncreasing) {
    const dsp::FrameParams params;
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int input = 0; input < 10; ++input) {
        dsp::ComplexSpectrogram mag(513, 64);
        if (input % 2 == 0) {
            for (auto& v : mag.data()) v = Complex(uni(rng), 0.0);
        } else {
            const auto spec = dsp::stft(t::random_bandlimited(200 + input));
            for (std::size_t i = 0; i < spec.data().size(); ++i) {
                mag.data()[i] = Complex(std::abs(spec.data()[i]), 0.0);
            }
        }
        const auto result = griffin_lim(mag, params, 60, 42, true);
        ASSERT_EQ(result.errors.size(), 60u);
        for (std::size_t k = 1; k < result.errors.size(); ++k) {
            EXPECT_LE(result.errors[k], result.errors[k - 1] * (1.0 + 1e-7))
                << "input " << input << " iteration " << k + 1;
        }
        EXPECT_LT(result.errors.back(), result.errors.front());
    }
}

TEST(GriffinLim, ZeroMagnitudeGivesSilence) {
    const dsp::ComplexSpectrogram mag(513, 64);
    for (double v : griffin_lim(mag, {}, 1, 1).samples) EXPECT_EQ(v, 0.0);
}

TEST(GriffinLim, FixedSeedIsBitReproducible) {
    const auto spec = dsp::stft(t::random_bandlimited(10));
    dsp::ComplexSpectrogram mag(513, 64);
    for (std::size_t i = 0; i < spec.data().size(); ++i) mag.data()[i] = std::abs(spec.data()[i]);
    const auto a = griffin_lim(mag, {}, 5, 77).samples;
    const auto b = griffin_lim(mag, {}, 5, 77).samples;
    EXPECT_EQ(a, b);
}

TEST(GriffinLim, RejectsNegativeMagnitude) {
    dsp::ComplexSpectrogram mag(513, 64);
    mag.at(3, 3) = Complex(-1.0, 0.0);
    EXPECT_THROW(griffin_lim(mag, {}, 1, 1), std::invalid_argument);
    EXPECT_THROW(griffin_lim(dsp::ComplexSpectrogram(513, 64), {}, 0, 1), std::invalid_argument);
}

TEST(Mel, SineArgmaxIsNearestCentreBand) {
    const MelCodec codec(CodecConfig{});
    const auto& centres = codec.filterbank().centers();
    std::size_t nearest = 0;
    for (std::size_t m = 0; m < centres.size(); ++m) {
        if (std::abs(centres[m] - 1000.0) < std::abs(centres[nearest] - 1000.0)) nearest = m;
    }
    const auto tensor = codec.encode(clip(t::sine(1000.0)));
    for (std::size_t f = 0; f < 64; ++f) {
        std::size_t best = 0;
        for (std::size_t m = 1; m < 128; ++m) {
            if (tensor.at(0, m, f) > tensor.at(0, best, f)) best = m;
        }
        EXPECT_EQ(best, nearest) << "frame " << f;
    }
}

TEST(Mel, SilenceEncodesToLogOffset) {
    const auto tensor = encode(Repr::mel, clip(std::vector<double>(16000, 0.0)));
    for (float v : tensor.data()) EXPECT_EQ(v, static_cast<float>(std::log(1e-6)));
}

TEST(Mel, SilentTensorDecodesToNearSilence) {
    const auto codec = make_codec(Repr::mel);
    const auto y = codec->decode(codec->encode(clip(std::vector<double>(16000, 0.0))));
    double peak = 0.0;
    for (double v : y.samples()) peak = std::max(peak, std::abs(v));
    EXPECT_LE(peak, 1e-3);
}

// Round-trip log-mel error of the default pipeline (clamped pseudo-inverse,
// 60 Griffin-Lim iterations), measured once and frozen with 5% headroom.
TEST(Mel, RoundTripLogMelErrorOnHarmonicTones) {
    const MelCodec codec(CodecConfig{});
    const struct {
        int midi;
        double measured;
    } cases[] = {{44, 0.3467}, {57, 0.7674}, {70, 1.1910}};
    for (const auto& c : cases) {
        const auto x = clip(harmonic_tone(t::midi_to_hz(c.midi)));
        const auto y = codec.decode(codec.encode(x));
        const double mae = log_mel_mae(codec, x, y);
        EXPECT_LE(mae, 1.05 * c.measured) << "midi " << c.midi;
        // A different note is far further away than the reconstruction.
        const auto other = clip(harmonic_tone(t::midi_to_hz(c.midi + 5)));
        EXPECT_GT(log_mel_mae(codec, x, other), 2.0 * mae) << "midi " << c.midi;
    }
}

TEST(Mfcc, ConstantLogMelFrameHasScaledDcCoefficient) {
    const auto tensor = encode(Repr::mfcc, clip(std::vector<double>(16000, 0.0)));
    const double expected = std::sqrt(128.0) * std::log(1e-6);
    for (std::size_t f = 0; f < 64; ++f) {
        EXPECT_NEAR(tensor.at(0, 0, f), expected, 1e-4);
        for (std::size_t m = 1; m < 128; ++m) EXPECT_NEAR(tensor.at(0, m, f), 0.0, 1e-4);
    }
}

TEST(Mfcc, DecodeTracksMelDecode) {
    const auto mel = make_codec(Repr::mel);
    const auto mfcc = make_codec(Repr::mfcc);
    const auto x = clip(harmonic_tone(220.0));
    const auto a = mel->decode(mel->encode(x));
    const auto b = mfcc->decode(mfcc->encode(x));
    double peak = 0.0;
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        peak = std::max(peak, std::abs(a[i]));
        diff = std::max(diff, std::abs(a[i] - b[i]));
    }
    // Only float32 storage of different coefficients separates the two paths.
    EXPECT_LE(diff, 1e-4 * peak);
}

TEST(Cqt, PureToneLandsOnItsBin) {
    const CqtCodec codec(CodecConfig{});
    const double f = 32.70 * std::pow(2.0, 36.0 / 12.0);
    const auto tensor = codec.encode(clip(t::sine(f)));
    for (std::size_t frame = 40; frame < 210; ++frame) {
        std::size_t best = 0;
        double best_mag = -1.0;
        for (std::size_t k = 0; k < 84; ++k) {
            const double m = std::hypot(tensor.at(0, k, frame), tensor.at(1, k, frame));
            if (m > best_mag) {
                best_mag = m;
                best = k;
            }
        }
        EXPECT_EQ(best, 36u) << "frame " << frame;
    }
}

TEST(Cqt, PaddedFramesAreZero) {
    const CqtCodec codec(CodecConfig{});
    EXPECT_EQ(codec.valid_frames(), 251u);
    const auto tensor = codec.encode(clip(t::random_bandlimited(11)));
    for (std::size_t c = 0; c < 2; ++c) {
        for (std::size_t k = 0; k < 84; ++k) {
            for (std::size_t f = 251; f < 256; ++f) EXPECT_EQ(tensor.at(c, k, f), 0.0f);
        }
    }
}

TEST(Cqt, ReconstructionKeepsPitch) {
    const CqtCodec codec(CodecConfig{});
    for (int midi : {44, 57, 70}) {
        const double f = t::midi_to_hz(midi);
        const auto y = codec.decode(codec.encode(clip(t::sine(f))));
        EXPECT_NEAR(t::dominant_frequency(to_vector(y)), f, 0.01 * f) << "midi " << midi;
    }
}

TEST(Cqt, RejectsRangeAboveNyquist) {
    CodecConfig config;
    config.cqt.fmin = 100.0; // 100 * 2^7 = 12.8 kHz
    EXPECT_THROW(CqtCodec{config}, std::invalid_argument);
}

TEST(Nsgt, FrameSatisfiesPainlessCondition) {
    const auto frame = nsgt_build(CodecConfig{});
    EXPECT_EQ(frame.bands.size(), 193u);
    EXPECT_EQ(frame.half_bands(), 96u);
    EXPECT_EQ(frame.coeffs, 948u);
    for (const auto& band : frame.bands) {
        EXPECT_GT(band.window.size(), 0u);
        EXPECT_LE(band.window.size(), frame.coeffs);
    }
    for (std::size_t j = 1; j <= 96; ++j) {
        EXPECT_GT(frame.bands[j].center_hz, 0.0);
        EXPECT_DOUBLE_EQ(frame.bands[j + 96].center_hz, -frame.bands[j].center_hz);
    }
}

TEST(Nsgt, UnfoldedTransformIsPerfectReconstruction) {
    const auto frame = nsgt_build(CodecConfig{});
    const auto x = t::white_noise(12, 16000);
    const auto y = nsgt_synthesize(nsgt_analyze(x, frame), frame, 16000);
    EXPECT_GE(dsp::snr_db(x, y), 200.0);
}

TEST(Nsgt, SilenceEncodesToZeros) {
    const auto tensor = encode(Repr::cq_nsgt, clip(std::vector<double>(16000, 0.0)));
    for (float v : tensor.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Nsgt, RoundTripExceeds100dB) {
    const auto codec = make_codec(Repr::cq_nsgt);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto x = t::random_bandlimited(300 + seed);
        EXPECT_GE(dsp::snr_db(x, to_vector(codec->decode(codec->encode(clip(x))))), 100.0);
    }
}

TEST(Nsgt, PaddingRowIsZero) {
    const auto tensor = encode(Repr::cq_nsgt, clip(t::random_bandlimited(13)));
    for (std::size_t c = 0; c < 4; ++c) {
        for (std::size_t m = 0; m < 948; ++m) EXPECT_EQ(tensor.at(c, 96, m), 0.0f);
    }
}

TEST(Nsgt, ViolatedPainlessConditionIsAConfigError) {
    CodecConfig config;
    config.nsgt.fmin = 1000.0; // DC band would span ~2000 bins
    EXPECT_THROW(nsgt_build(config), ConfigError);
    config = CodecConfig{};
    config.nsgt.fmax = 6000.0; // top band would span ~2000 bins
    EXPECT_THROW(nsgt_build(config), ConfigError);
}

TEST(Config, RejectsInvalidValues) {
    CodecConfig config;
    config.log_offset = 0.0;
    EXPECT_THROW(make_codec(Repr::mel, config), ConfigError);
    config = CodecConfig{};
    config.griffin_lim_iters = 0;
    EXPECT_THROW(make_codec(Repr::mel, config), ConfigError);
}
