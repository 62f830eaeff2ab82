#include "audiorep/cli.hpp"

#include "audiorep/embeddings.hpp"
#include "audiorep/harness.hpp"
#include "audiorep/wav.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace audiorep {

namespace {

namespace fs = std::filesystem;

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Options {
    std::string repr;
    std::vector<std::string> inputs;
    std::string dataset;
    std::string metadata;
    std::string out;
    std::string format = "csv";
    std::string config;
    std::uint64_t seed = kDefaultSeed;
    int gl_iters = 60;
    unsigned jobs = default_jobs();
    std::string real_emb, gen_emb;
    std::string real_prob, gen_prob;
    std::string real_instr_prob, gen_instr_prob;
    std::string real_pitch_emb, gen_pitch_emb;
    std::string real_instr_emb, gen_instr_emb;
    std::vector<double> noise_levels;
    std::size_t n_per_class = 100;
    std::size_t clips = 10;
    std::size_t repetitions = 1;
};

std::string repr_error(const std::string& name) {
    return "unknown representation '" + name + "'; valid ids: " + repr_names_joined();
}

// Accepts "all" or a comma separated list of ids.
std::vector<Repr> parse_repr_list(const std::string& spec) {
    if (spec == "all") return {std::begin(kAllReprs), std::end(kAllReprs)};
    std::vector<Repr> out;
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto r = parse_repr(item);
        if (!r) throw UsageError(repr_error(item));
        if (std::find(out.begin(), out.end(), *r) == out.end()) out.push_back(*r);
    }
    if (out.empty()) throw UsageError("empty --repr list; valid ids: " + repr_names_joined());
    return out;
}

const CLI::Validator kReprList(
    [](std::string& value) -> std::string {
        try {
            parse_repr_list(value);
        } catch (const UsageError& e) {
            return e.what();
        }
        return {};
    },
    "REPR[,REPR...]|all");

const CLI::Validator kSingleRepr(
    [](std::string& value) -> std::string { return parse_repr(value) ? std::string{} : repr_error(value); }, "REPR");

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string config_hash(const std::string& command, const Options& o) {
    const nlohmann::json j{{"command", command},
                           {"repr", o.repr},
                           {"inputs", o.inputs},
                           {"dataset", o.dataset},
                           {"metadata", o.metadata},
                           {"out", o.out},
                           {"format", o.format},
                           {"seed", o.seed},
                           {"gl_iters", o.gl_iters},
                           {"real_emb", o.real_emb},
                           {"gen_emb", o.gen_emb},
                           {"real_prob", o.real_prob},
                           {"gen_prob", o.gen_prob},
                           {"real_instr_prob", o.real_instr_prob},
                           {"gen_instr_prob", o.gen_instr_prob},
                           {"real_pitch_emb", o.real_pitch_emb},
                           {"gen_pitch_emb", o.gen_pitch_emb},
                           {"real_instr_emb", o.real_instr_emb},
                           {"gen_instr_emb", o.gen_instr_emb},
                           {"noise_levels", o.noise_levels},
                           {"n_per_class", o.n_per_class},
                           {"clips", o.clips},
                           {"repetitions", o.repetitions}};
    return hex64(stable_hash(j.dump()));
}

CodecConfig codec_config(const Options& o) {
    CodecConfig c;
    c.seed = o.seed;
    c.griffin_lim_iters = o.gl_iters;
    c.validate();
    return c;
}

ReportFormat report_format(const Options& o) { return o.format == "markdown" ? ReportFormat::markdown : ReportFormat::csv; }

void write_report(const EvalReport& report, const Options& o, std::ostream& out) {
    if (o.out.empty()) {
        out << render_report(report, report_format(o));
    } else {
        emit_report(report, report_format(o), o.out);
    }
}

DatasetIndex load_index(const Options& o, std::ostream& err) {
    const fs::path metadata = o.metadata.empty() ? fs::path(o.dataset) / "metadata.jsonl" : fs::path(o.metadata);
    auto index = ingest(o.dataset, metadata, o.seed);
    if (index.skipped_records > 0) {
        err << "warning: skipped " << index.skipped_records << " unparseable metadata record(s)\n";
    }
    err << "dataset: " << index.entries.size() << " entries, " << index.select(Split::eval).size() << " in eval split\n";
    return index;
}

AudioBuffer first_second(const AudioBuffer& audio) {
    if (audio.size() <= kClipLength) return audio;
    return AudioBuffer(std::vector<double>(audio.samples().begin(), audio.samples().begin() + kClipLength),
                       audio.sample_rate());
}

// Runs one file operation per input; failures are logged and counted.
int for_each_file(const Options& o, std::ostream& err, const char* verb,
                  const std::function<void(const fs::path&, const fs::path&)>& op, const char* extension) {
    fs::create_directories(o.out);
    try {
        parallel_for(o.inputs.size(), o.jobs, [&](std::size_t i) {
            const fs::path in = o.inputs[i];
            op(in, fs::path(o.out) / in.filename().replace_extension(extension));
        });
    } catch (const BatchError& e) {
        for (const auto& f : e.failures()) err << "error: " << o.inputs[f.index] << ": " << f.message << "\n";
        err << verb << " " << o.inputs.size() - e.failures().size() << "/" << o.inputs.size() << " files\n";
        return kExitFailure;
    }
    err << verb << " " << o.inputs.size() << "/" << o.inputs.size() << " files\n";
    return kExitOk;
}

int cmd_encode(const Options& o, std::ostream& err) {
    const Repr repr = *parse_repr(o.repr);
    const auto codec = make_codec(repr, codec_config(o));
    return for_each_file(
        o, err, "encoded",
        [&](const fs::path& in, const fs::path& out) { write_rten(codec->encode(first_second(read_wav(in))), out); },
        ".rten");
}

int cmd_decode(const Options& o, std::ostream& err) {
    const auto config = codec_config(o);
    return for_each_file(
        o, err, "decoded", [&](const fs::path& in, const fs::path& out) { write_wav(decode(read_rten(in), config), out); },
        ".wav");
}

int cmd_roundtrip(const Options& o, std::ostream& out, std::ostream& err) {
    const auto reprs = parse_repr_list(o.repr);
    std::optional<ProbMatrix> pitch;
    std::optional<ProbMatrix> instrument;
    if (!o.gen_prob.empty()) pitch = read_probs(o.gen_prob);
    if (!o.gen_instr_prob.empty()) instrument = read_probs(o.gen_instr_prob);
    if ((pitch || instrument) && reprs.size() != 1) {
        throw UsageError("--gen-prob/--gen-instr-prob need a single --repr");
    }
    const auto index = load_index(o, err);
    const auto clips = load_clips(index.select(Split::eval), o.jobs);

    RoundtripOptions options;
    options.config = codec_config(o);
    options.jobs = o.jobs;
    options.pitch_probs = pitch ? &*pitch : nullptr;
    options.instrument_probs = instrument ? &*instrument : nullptr;
    EvalReport report;
    for (Repr r : reprs) {
        err << "roundtrip: " << repr_name(r) << "\n";
        report.rows.push_back(roundtrip_eval(clips, r, options));
    }
    write_report(report, o, out);
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& out, std::ostream& err) {
    auto pair_given = [](const std::string& a, const std::string& b, const char* name) {
        if (a.empty() != b.empty()) throw UsageError(std::string(name) + " needs both the real and the generated file");
        return !a.empty();
    };
    const bool emb = pair_given(o.real_emb, o.gen_emb, "--real-emb/--gen-emb");
    const bool pitch_emb = pair_given(o.real_pitch_emb, o.gen_pitch_emb, "--real-pitch-emb/--gen-pitch-emb");
    const bool instr_emb = pair_given(o.real_instr_emb, o.gen_instr_emb, "--real-instr-emb/--gen-instr-emb");
    const bool mock = !o.noise_levels.empty();
    if (mock && o.dataset.empty()) throw UsageError("--noise-level needs --dataset");
    if (!emb && !pitch_emb && !instr_emb && !mock && o.real_prob.empty() && o.gen_prob.empty() &&
        o.real_instr_prob.empty() && o.gen_instr_prob.empty()) {
        throw UsageError("eval needs embedding/probability files or --dataset with --noise-level");
    }

    EvalReport report;
    if (!o.real_prob.empty() || !o.real_instr_prob.empty()) {
        ReportRow real;
        real.name = "real";
        if (!o.real_prob.empty()) real.pis = inception_score(read_probs(o.real_prob));
        if (!o.real_instr_prob.empty()) real.iis = inception_score(read_probs(o.real_instr_prob));
        report.rows.push_back(real);
    }
    if (emb || pitch_emb || instr_emb || !o.gen_prob.empty() || !o.gen_instr_prob.empty()) {
        ReportRow gen;
        gen.name = "generated";
        if (!o.gen_prob.empty()) gen.pis = inception_score(read_probs(o.gen_prob));
        if (!o.gen_instr_prob.empty()) gen.iis = inception_score(read_probs(o.gen_instr_prob));
        if (pitch_emb) gen.pkid = kid(read_embeddings(o.real_pitch_emb).set, read_embeddings(o.gen_pitch_emb).set);
        if (instr_emb) gen.ikid = kid(read_embeddings(o.real_instr_emb).set, read_embeddings(o.gen_instr_emb).set);
        if (emb) {
            const auto real = read_embeddings(o.real_emb).set;
            const auto gen_set = read_embeddings(o.gen_emb).set;
            gen.fad = fad(real, gen_set);
            gen.kid = kid(real, gen_set);
        }
        report.rows.push_back(gen);
    }
    if (mock) {
        const auto index = load_index(o, err);
        const auto eval = index.select(Split::eval);
        std::vector<std::string> ids;
        for (const auto* e : eval) ids.push_back(e->id);
        const auto clips = load_clips(eval, o.jobs);
        const auto real = embed_all(clips, {}, o.jobs);
        for (double level : o.noise_levels) {
            const auto gen = embed_all(mock_generate(clips, ids, level, o.seed), {}, o.jobs);
            char name[48];
            std::snprintf(name, sizeof name, "mock noise=%g", level);
            ReportRow row;
            row.name = name;
            row.fad = fad(real, gen);
            row.kid = kid(real, gen);
            report.rows.push_back(row);
        }
    }
    write_report(report, o, out);
    return kExitOk;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream& err) {
    const auto reprs = parse_repr_list(o.repr);
    if (o.jobs != 1) err << "bench: running single-threaded\n";
    const auto index = load_index(o, err);
    auto eval = index.select(Split::eval);
    if (eval.size() > o.clips) eval.resize(o.clips);
    const auto clips = load_clips(eval, 1);
    err << "bench: " << clips.size() << " clips x " << o.repetitions << " repetitions\n";
    EvalReport report;
    for (const auto& row : timing_bench(clips, reprs, o.repetitions, codec_config(o))) {
        report.rows.push_back(timing_row(row));
    }
    write_report(report, o, out);
    return kExitOk;
}

int cmd_synth(const Options& o, std::ostream& err) {
    SynthOptions options;
    options.n_per_class = o.n_per_class;
    options.seed = o.seed;
    const auto index = synth_dataset(o.out, options);
    err << "synth-data: wrote " << index.entries.size() << " clips to " << o.out << "\n";
    return kExitOk;
}

// Values from --config fill in every option not given on the command line.
std::vector<std::string> merge_config_file(const std::vector<std::string>& args) {
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
        if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    }
    if (path.empty()) return args;
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    const auto j = nlohmann::json::parse(in, nullptr, false);
    if (!j.is_object()) throw UsageError("config file " + path + " must hold a JSON object");

    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
            return a == flag || a.rfind(flag + "=", 0) == 0;
        });
    };
    auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
    std::vector<std::string> merged = args;
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (key == "config" || given(flag)) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) merged.push_back(flag);
        } else if (value.is_array()) {
            for (const auto& v : value) {
                merged.push_back(flag);
                merged.push_back(scalar(v));
            }
        } else {
            merged.push_back(flag);
            merged.push_back(scalar(value));
        }
    }
    return merged;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Audio representation codecs and generative-evaluation metrics", "audiorep"};
    app.require_subcommand(1);
    app.fallthrough(false);

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
        cmd->add_option("--gl-iters", o.gl_iters, "Griffin-Lim iterations")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        cmd->add_option("--config", o.config, "JSON file of option defaults")->check(CLI::ExistingFile);
    };
    auto add_report = [&](CLI::App* cmd) {
        cmd->add_option("--out", o.out, "Report file (default: standard output)");
        cmd->add_option("--format", o.format, "Report format")
            ->check(CLI::IsMember({"csv", "markdown"}))
            ->capture_default_str();
    };
    auto add_dataset = [&](CLI::App* cmd, bool required) {
        auto* opt = cmd->add_option("--dataset", o.dataset, "Dataset root directory")->check(CLI::ExistingDirectory);
        if (required) opt->required();
        cmd->add_option("--metadata", o.metadata, "JSON-lines metadata (default: <dataset>/metadata.jsonl)")
            ->check(CLI::ExistingFile);
    };

    auto* encode_cmd = app.add_subcommand("encode", "Encode WAV files into RTEN tensors");
    encode_cmd->add_option("--repr", o.repr, "Representation id")->required()->check(kSingleRepr);
    encode_cmd->add_option("--out", o.out, "Output directory")->required();
    encode_cmd->add_option("inputs", o.inputs, "WAV files")->required()->check(CLI::ExistingFile);
    add_common(encode_cmd);

    auto* decode_cmd = app.add_subcommand("decode", "Decode RTEN tensors into float32 WAV files");
    decode_cmd->add_option("--out", o.out, "Output directory")->required();
    decode_cmd->add_option("inputs", o.inputs, "RTEN files")->required()->check(CLI::ExistingFile);
    add_common(decode_cmd);

    auto* roundtrip_cmd = app.add_subcommand("roundtrip", "Score encode/decode round trips of the eval split");
    roundtrip_cmd->add_option("--repr", o.repr, "Representation ids or 'all'")->check(kReprList)->default_val("all");
    add_dataset(roundtrip_cmd, true);
    roundtrip_cmd->add_option("--gen-prob", o.gen_prob, "PRB1 pitch probabilities of the decoded clips")
        ->check(CLI::ExistingFile);
    roundtrip_cmd->add_option("--gen-instr-prob", o.gen_instr_prob, "PRB1 instrument probabilities of the decoded clips")
        ->check(CLI::ExistingFile);
    add_report(roundtrip_cmd);
    add_common(roundtrip_cmd);

    auto* eval_cmd = app.add_subcommand("eval", "Score external embeddings/probabilities or the mock generator");
    eval_cmd->add_option("--real-emb", o.real_emb, "EMB1 embeddings of real data (FAD, KID)")->check(CLI::ExistingFile);
    eval_cmd->add_option("--gen-emb", o.gen_emb, "EMB1 embeddings of generated data")->check(CLI::ExistingFile);
    eval_cmd->add_option("--real-prob", o.real_prob, "PRB1 pitch probabilities of real data")->check(CLI::ExistingFile);
    eval_cmd->add_option("--gen-prob", o.gen_prob, "PRB1 pitch probabilities of generated data (PIS)")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--real-instr-prob", o.real_instr_prob, "PRB1 instrument probabilities of real data")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--gen-instr-prob", o.gen_instr_prob, "PRB1 instrument probabilities of generated data (IIS)")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--real-pitch-emb", o.real_pitch_emb, "EMB1 pitch-classifier features of real data")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--gen-pitch-emb", o.gen_pitch_emb, "EMB1 pitch-classifier features of generated data (PKID)")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--real-instr-emb", o.real_instr_emb, "EMB1 instrument-classifier features of real data")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--gen-instr-emb", o.gen_instr_emb,
                         "EMB1 instrument-classifier features of generated data (IKID)")
        ->check(CLI::ExistingFile);
    eval_cmd->add_option("--noise-level", o.noise_levels, "Mock generator noise levels (RMS ratio)")
        ->check(CLI::NonNegativeNumber)
        ->delimiter(',');
    add_dataset(eval_cmd, false);
    add_report(eval_cmd);
    add_common(eval_cmd);

    auto* bench_cmd = app.add_subcommand("bench", "Median encode/decode wall time per clip");
    bench_cmd->add_option("--repr", o.repr, "Representation ids or 'all'")->check(kReprList)->default_val("all");
    add_dataset(bench_cmd, true);
    bench_cmd->add_option("--clips", o.clips, "Eval clips to time")->check(CLI::PositiveNumber)->capture_default_str();
    bench_cmd->add_option("--repetitions", o.repetitions, "Timed passes over the clips")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_report(bench_cmd);
    add_common(bench_cmd);

    auto* synth_cmd = app.add_subcommand("synth-data", "Write the synthetic harmonic-tone dataset");
    synth_cmd->add_option("--out", o.out, "Output directory")->required();
    synth_cmd->add_option("--n-per-class", o.n_per_class, "Clips per timbre profile")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_common(synth_cmd);

    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        args = merge_config_file(args);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        if (app.get_subcommands().empty()) err << "run 'audiorep --help' for usage\n";
        return kExitUsage;
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    const auto* cmd = app.get_subcommands().front();
    err << "config hash: " << config_hash(cmd->get_name(), o) << "\n";
    try {
        if (cmd == encode_cmd) return cmd_encode(o, err);
        if (cmd == decode_cmd) return cmd_decode(o, err);
        if (cmd == roundtrip_cmd) return cmd_roundtrip(o, out, err);
        if (cmd == eval_cmd) return cmd_eval(o, out, err);
        if (cmd == bench_cmd) return cmd_bench(o, out, err);
        return cmd_synth(o, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const BatchError& e) {
        for (const auto& f : e.failures()) err << "error: item " << f.index << ": " << f.message << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace audiorep
