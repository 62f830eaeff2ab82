#include "audiorep/binary_io.hpp"
#include "audiorep/embeddings.hpp"
#include "audiorep/harness.hpp"
#include "audiorep/wav.hpp"
#include "test_signals.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <map>

using namespace audiorep;
namespace fs = std::filesystem;
namespace t = audiorep::testing;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / (std::string("audiorep_") + info->test_suite_name() + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

std::string record(const std::string& id, int pitch, const std::string& family = "guitar",
                   const std::string& source = "acoustic") {
    return nlohmann::json{{"id", id}, {"pitch", pitch}, {"instrument_family", family}, {"source", source},
                          {"wav", id + ".wav"}}
               .dump() +
           "\n";
}

// Toy tree: `valid` keepers plus entries that the filter must drop.
fs::path toy_tree(const fs::path& root, int valid) {
    std::string meta;
    auto add = [&](const std::string& id, int pitch, const std::string& family, const std::string& source) {
        write_wav(AudioBuffer(t::sine(midi_to_hz(pitch), 0.3, 4 * kSampleRate), kSampleRate), root / (id + ".wav"),
                  WavEncoding::pcm16);
        meta += record(id, pitch, family, source);
    };
    for (int i = 0; i < valid; ++i) add("note_" + std::to_string(i), 44 + i % 27, "keyboard", "acoustic");
    add("low", 43, "keyboard", "acoustic");
    add("high", 71, "brass", "acoustic");
    add("synthetic", 60, "flute", "electronic");
    add("vocal", 60, "vocal", "acoustic");
    meta += "{not json\n";
    meta += "{\"id\": \"no_pitch\", \"instrument_family\": \"brass\"}\n";
    write_text(root / "meta.jsonl", meta);
    return root / "meta.jsonl";
}

std::vector<Split> splits_of(const DatasetIndex& index) {
    std::vector<Split> out;
    for (const auto& e : index.entries) out.push_back(e.split);
    return out;
}

} // namespace

TEST(Wav, Pcm16IsScaledBy32768) {
    const AudioBuffer a({0.5, -1.0, 0.25}, kSampleRate);
    const auto back = parse_wav(serialize_wav(a, WavEncoding::pcm16));
    EXPECT_EQ(back.size(), 3u);
    EXPECT_EQ(back[0], 16384.0 / 32768.0);
    EXPECT_EQ(back[1], -1.0);
    EXPECT_EQ(back[2], 0.25);
}

TEST(Wav, Pcm16ClampsOutOfRange) {
    const auto back = parse_wav(serialize_wav(AudioBuffer({1.5, -3.0}, kSampleRate), WavEncoding::pcm16));
    EXPECT_EQ(back[0], 32767.0 / 32768.0);
    EXPECT_EQ(back[1], -1.0);
}

TEST(Wav, Float32KeepsValuesUnclamped) {
    const AudioBuffer a({1.5, -0.1f, 3.25}, 22050);
    const auto back = parse_wav(serialize_wav(a));
    EXPECT_EQ(back.sample_rate(), 22050);
    EXPECT_EQ(back[0], 1.5);
    EXPECT_EQ(back[1], static_cast<double>(-0.1f));
    EXPECT_EQ(back[2], 3.25);
}

TEST(Wav, SkipsUnknownChunks) {
    auto bytes = serialize_wav(AudioBuffer({0.5, 0.25}, kSampleRate), WavEncoding::pcm16);
    // Insert an odd-sized LIST chunk (padded to even length) after the fmt chunk.
    const std::vector<std::uint8_t> list{'L', 'I', 'S', 'T', 3, 0, 0, 0, 'a', 'b', 'c', 0};
    bytes.insert(bytes.begin() + 36, list.begin(), list.end());
    const auto back = parse_wav(bytes);
    EXPECT_EQ(back.size(), 2u);
    EXPECT_EQ(back[1], 0.25);
}

TEST(Wav, RejectsUnsupportedLayouts) {
    auto stereo = serialize_wav(AudioBuffer({0.5, 0.25}, kSampleRate), WavEncoding::pcm16);
    stereo[22] = 2;
    EXPECT_THROW(parse_wav(stereo), FormatError);
    auto eight_bit = serialize_wav(AudioBuffer({0.5, 0.25}, kSampleRate), WavEncoding::pcm16);
    eight_bit[34] = 8;
    EXPECT_THROW(parse_wav(eight_bit), FormatError);
    auto no_data = serialize_wav(AudioBuffer({0.5}, kSampleRate), WavEncoding::pcm16);
    no_data.resize(36);
    EXPECT_THROW(parse_wav(no_data), FormatError);
    std::vector<std::uint8_t> junk{'R', 'I', 'F', 'X'};
    EXPECT_THROW(parse_wav(junk), FormatError);
}

TEST(Ingest, FiltersToyTree) {
    TempDir dir;
    const auto meta = toy_tree(dir.path(), 10);
    const auto index = ingest(dir.path(), meta, 42);
    EXPECT_EQ(index.entries.size(), 10u);
    EXPECT_EQ(index.skipped_records, 2u);
    for (const auto& e : index.entries) {
        EXPECT_GE(e.pitch, kMinPitch);
        EXPECT_LE(e.pitch, kMaxPitch);
        EXPECT_EQ(e.source, "acoustic");
    }
}

TEST(Ingest, SplitIsDeterministicAndEightyTwenty) {
    TempDir dir;
    const auto meta = toy_tree(dir.path(), 30);
    const auto a = ingest(dir.path(), meta, 42);
    const auto b = ingest(dir.path(), meta, 42);
    EXPECT_EQ(splits_of(a), splits_of(b));
    const auto eval = a.select(Split::eval).size();
    EXPECT_NEAR(static_cast<double>(eval), 0.2 * 30, 1.0);
    EXPECT_NE(splits_of(a), splits_of(ingest(dir.path(), meta, 7)));
}

TEST(Ingest, SplitIgnoresRecordOrder) {
    std::vector<DatasetEntry> forward;
    for (int i = 0; i < 50; ++i) forward.push_back({"clip" + std::to_string(i), {}, 60, "brass", "acoustic"});
    auto backward = std::vector<DatasetEntry>(forward.rbegin(), forward.rend());
    assign_splits(forward, 3);
    assign_splits(backward, 3);
    for (std::size_t i = 0; i < forward.size(); ++i) EXPECT_EQ(forward[i].split, backward[forward.size() - 1 - i].split);
}

TEST(Ingest, TruncatesToOneSecond) {
    TempDir dir;
    const auto meta = toy_tree(dir.path(), 2);
    const auto index = ingest(dir.path(), meta, 42);
    const auto clip = load_clip(index.entries[0]);
    EXPECT_EQ(clip.size(), kClipLength);
    const auto full = read_wav(index.entries[0].wav_path);
    EXPECT_EQ(full.size(), 4u * kSampleRate);
    for (std::size_t i = 0; i < kClipLength; i += 997) EXPECT_EQ(clip[i], full[i]);
}

TEST(Ingest, Errors) {
    TempDir dir;
    write_text(dir.path() / "none.jsonl", record("a", 30));
    write_wav(AudioBuffer({0.0}, kSampleRate), dir.path() / "a.wav");
    EXPECT_THROW(ingest(dir.path(), dir.path() / "none.jsonl", 42), std::runtime_error);

    write_text(dir.path() / "missing.jsonl", record("ghost", 60));
    EXPECT_THROW(ingest(dir.path(), dir.path() / "missing.jsonl", 42), std::runtime_error);

    EXPECT_THROW(ingest(dir.path(), dir.path() / "nope.jsonl", 42), std::runtime_error);

    write_wav(AudioBuffer({0.0}, 8000), dir.path() / "slow.wav");
    write_text(dir.path() / "slow.jsonl", record("slow", 60));
    const auto index = ingest(dir.path(), dir.path() / "slow.jsonl", 42);
    EXPECT_THROW(load_clip(index.entries[0]), std::runtime_error);
}

TEST(Synth, TuningReference) {
    EXPECT_DOUBLE_EQ(midi_to_hz(69), 440.0);
    EXPECT_DOUBLE_EQ(midi_to_hz(57), 220.0);
}

TEST(Synth, FundamentalPeakWithinOneBin) {
    for (std::size_t profile = 0; profile < 5; ++profile) {
        for (int pitch : {44, 57, 69, 70}) {
            const auto x = synth_note(pitch, profile, 1000 + pitch);
            // One bin of a 1 s DFT at 16 kHz is 1 Hz.
            EXPECT_NEAR(t::dominant_frequency(x), midi_to_hz(pitch), 1.0)
                << "profile " << profile << " pitch " << pitch;
        }
    }
}

TEST(Synth, DatasetLayoutAndLabels) {
    TempDir dir;
    SynthOptions options;
    options.n_per_class = 6;
    const auto index = synth_dataset(dir.path(), options);
    ASSERT_EQ(index.entries.size(), 30u);
    std::map<std::string, int> per_family;
    for (const auto& e : index.entries) {
        ++per_family[e.instrument_family];
        EXPECT_EQ(load_clip(e).size(), kClipLength);
    }
    EXPECT_EQ(per_family.size(), 5u);
    for (const auto& [family, count] : per_family) EXPECT_EQ(count, 6) << family;
    EXPECT_EQ(index.select(Split::eval).size(), 6u);

    const auto again = synth_dataset(dir.path() / "again", options);
    for (std::size_t i = 0; i < index.entries.size(); ++i) {
        EXPECT_EQ(read_wav(index.entries[i].wav_path).samples()[100], read_wav(again.entries[i].wav_path).samples()[100]);
    }
    options.min_pitch = 40;
    EXPECT_THROW(synth_dataset(dir.path(), options), std::invalid_argument);
}

TEST(ParallelFor, RunsEveryItemAndAggregatesFailures) {
    std::vector<int> hits(20, 0);
    try {
        parallel_for(20, 4, [&](std::size_t i) {
            hits[i] = 1;
            if (i % 7 == 3) throw std::runtime_error("bad " + std::to_string(i));
        });
        FAIL() << "expected a BatchError";
    } catch (const BatchError& e) {
        ASSERT_EQ(e.failures().size(), 3u);
        EXPECT_EQ(e.failures()[0].index, 3u);
        EXPECT_EQ(e.failures()[1].index, 10u);
        EXPECT_EQ(e.failures()[2].message, "bad 17");
    }
    for (int h : hits) EXPECT_EQ(h, 1);
}

TEST(Median, OddAndEven) {
    EXPECT_EQ(median({3.0, 1.0, 2.0}), 2.0);
    EXPECT_EQ(median({4.0, 1.0, 2.0, 3.0}), 2.5);
    EXPECT_THROW(median({}), std::invalid_argument);
}

class SmallDataset : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        dir_ = new fs::path(fs::temp_directory_path() / "audiorep_small_dataset");
        fs::remove_all(*dir_);
        SynthOptions options;
        options.n_per_class = 8;
        index_ = new DatasetIndex(synth_dataset(*dir_, options));
        clips_ = new std::vector<AudioBuffer>(load_clips(index_->select(Split::eval), 1));
        for (const auto* e : index_->select(Split::eval)) ids_.push_back(e->id);
    }
    static void TearDownTestSuite() {
        fs::remove_all(*dir_);
        delete clips_;
        delete index_;
        delete dir_;
    }

    static fs::path* dir_;
    static DatasetIndex* index_;
    static std::vector<AudioBuffer>* clips_;
    static std::vector<std::string> ids_;
};

fs::path* SmallDataset::dir_ = nullptr;
DatasetIndex* SmallDataset::index_ = nullptr;
std::vector<AudioBuffer>* SmallDataset::clips_ = nullptr;
std::vector<std::string> SmallDataset::ids_;

TEST_F(SmallDataset, WaveformRoundTripScoresZero) {
    const auto row = roundtrip_eval(*index_, Repr::waveform, {});
    EXPECT_EQ(row.name, "waveform");
    EXPECT_LT(*row.fad, 1e-6);
    EXPECT_LE(*row.kid, 1e-9);
    EXPECT_GE(*row.encode_s, 0.0);
    EXPECT_GE(*row.decode_s, 0.0);
    EXPECT_FALSE(row.pis);
}

TEST_F(SmallDataset, LossyCodecScoresWorseThanLossless) {
    const auto complex = roundtrip_eval(*clips_, Repr::complex, {});
    const auto mel = roundtrip_eval(*clips_, Repr::mel, {});
    EXPECT_LT(*complex.fad, *mel.fad);
    EXPECT_GT(*mel.fad, 0.0);
}

TEST_F(SmallDataset, RoundTripIsIndependentOfJobCount) {
    RoundtripOptions serial;
    std::vector<AudioBuffer> a;
    serial.decoded = &a;
    RoundtripOptions parallel = serial;
    std::vector<AudioBuffer> b;
    parallel.decoded = &b;
    parallel.jobs = 3;
    const auto ra = roundtrip_eval(*clips_, Repr::cqt, serial);
    const auto rb = roundtrip_eval(*clips_, Repr::cqt, parallel);
    EXPECT_EQ(*ra.fad, *rb.fad);
    EXPECT_EQ(*ra.kid, *rb.kid);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(std::equal(a[i].samples().begin(), a[i].samples().end(), b[i].samples().begin()));
    }
}

TEST_F(SmallDataset, InceptionScoresFromProbabilities) {
    const std::size_t n = clips_->size();
    std::vector<double> uniform(n * 5, 0.2);
    const ProbMatrix probs(n, 5, uniform);
    RoundtripOptions options;
    options.pitch_probs = &probs;
    const auto row = roundtrip_eval(*clips_, Repr::waveform, options);
    EXPECT_NEAR(*row.pis, 1.0, 1e-12);
    EXPECT_FALSE(row.iis);
    const ProbMatrix wrong(1, 2, {0.5, 0.5});
    options.pitch_probs = &wrong;
    EXPECT_THROW(roundtrip_eval(*clips_, Repr::waveform, options), std::invalid_argument);
}

TEST_F(SmallDataset, MockGeneratorIsReproducibleAndMonotone) {
    const auto same = mock_generate(*clips_, ids_, 0.0, 42);
    for (std::size_t i = 0; i < same.size(); ++i) {
        EXPECT_TRUE(std::equal(same[i].samples().begin(), same[i].samples().end(), (*clips_)[i].samples().begin()));
    }
    const auto a = mock_generate(*clips_, ids_, 0.1, 42);
    const auto b = mock_generate(*clips_, ids_, 0.1, 42);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_TRUE(std::equal(a[i].samples().begin(), a[i].samples().end(), b[i].samples().begin()));
    }
    const auto real = embed_all(*clips_, {}, 1);
    double prev = -1.0;
    for (double level : {0.0, 0.01, 0.1, 0.5}) {
        const double value = fad(real, embed_all(mock_generate(*clips_, ids_, level, 42), {}, 1));
        if (level == 0.0) EXPECT_LT(value, 1e-9);
        EXPECT_GE(value, prev) << "noise " << level;
        prev = value;
    }
    EXPECT_THROW(mock_generate(*clips_, ids_, -0.1, 42), std::invalid_argument);
}

TEST_F(SmallDataset, MockGenerateFromIndexUsesEvalSplit) {
    const auto clips = mock_generate(*index_, 0.0, 42);
    EXPECT_EQ(clips.size(), clips_->size());
}

TEST_F(SmallDataset, TimingBenchCountsMeasurements) {
    const std::vector<AudioBuffer> ten(clips_->begin(), clips_->begin() + std::min<std::size_t>(8, clips_->size()));
    const Repr reprs[] = {Repr::waveform, Repr::complex};
    const auto rows = timing_bench(ten, reprs, 5);
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) {
        EXPECT_EQ(r.encode_s.size(), ten.size() * 5);
        EXPECT_EQ(r.decode_s.size(), ten.size() * 5);
        const auto row = timing_row(r);
        EXPECT_GE(*row.encode_s, 0.0);
        EXPECT_GE(*row.decode_s, 0.0);
    }
    EXPECT_THROW(timing_bench({}, reprs, 1), std::invalid_argument);
}

TEST(Report, CsvLayoutAndPlaceholders) {
    EvalReport report;
    ReportRow row;
    row.name = "mel";
    row.fad = 0.5;
    row.decode_s = 0.125;
    report.rows.push_back(row);
    const auto csv = render_report(report, ReportFormat::csv);
    EXPECT_EQ(csv,
              "representation,PIS,IIS,PKID,IKID,FAD,KID,encode_s,decode_s\r\n"
              "mel,-,-,-,-,0.5,-,-,0.125\r\n");
}

TEST(Report, CsvQuotesSpecialCharacters) {
    EvalReport report;
    report.rows.push_back({"a,\"b\""});
    const auto csv = render_report(report, ReportFormat::csv);
    EXPECT_NE(csv.find("\"a,\"\"b\"\"\",-"), std::string::npos) << csv;
}

TEST(Report, MarkdownHasOneLinePerRowPlusHeader) {
    EvalReport report;
    for (Repr r : kAllReprs) report.rows.push_back({std::string(repr_name(r))});
    const auto md = render_report(report, ReportFormat::markdown);
    std::size_t lines = 0;
    std::size_t table_rows = 0;
    std::size_t pos = 0;
    while ((pos = md.find('\n', pos)) != std::string::npos) {
        ++lines;
        ++pos;
    }
    for (std::size_t i = 0; i < md.size(); ++i) {
        if ((i == 0 || md[i - 1] == '\n') && md.compare(i, 4, "|---") != 0 && md[i] == '|') ++table_rows;
    }
    EXPECT_EQ(lines, 7u + 2u); // rows, header, separator
    EXPECT_EQ(table_rows, 7u + 1u);
}

TEST(Report, SameReportIsByteIdentical) {
    TempDir dir;
    EvalReport report;
    ReportRow row;
    row.name = "complex";
    row.fad = 1.0 / 3.0;
    row.kid = -0.02;
    report.rows.push_back(row);
    emit_report(report, ReportFormat::csv, dir.path() / "a.csv");
    emit_report(report, ReportFormat::csv, dir.path() / "b.csv");
    std::ifstream a(dir.path() / "a.csv", std::ios::binary);
    std::ifstream b(dir.path() / "b.csv", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), {});
    const std::string sb((std::istreambuf_iterator<char>(b)), {});
    EXPECT_EQ(sa, sb);
    EXPECT_NE(sa.find("0.333333"), std::string::npos);
    EXPECT_THROW(emit_report(report, ReportFormat::csv, dir.path() / "no" / "such" / "dir.csv"), std::runtime_error);
}
