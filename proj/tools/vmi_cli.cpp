// vmi: offline EEG decoding toolkit command line.
// Commands: synth, eval, ersp, topo, convert. Every run drops a manifest.json
// next to its outputs; all diagnostics go to stderr and data goes to files.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vmi/classify.hpp"
#include "vmi/config.hpp"
#include "vmi/digest.hpp"
#include "vmi/dsp.hpp"
#include "vmi/errors.hpp"
#include "vmi/pipeline.hpp"
#include "vmi/render_svg.hpp"
#include "vmi/synth.hpp"
#include "vmi/timefreq.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string iso_utc(std::chrono::system_clock::time_point tp) {
    const std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string fmt6(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir))
        vmi::fail(vmi::error_code::io_error, "cannot create output directory " + dir);
}

void write_file(const std::string& path, const std::string& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) vmi::fail(vmi::error_code::io_error, "cannot open " + path + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) vmi::fail(vmi::error_code::io_error, "failed while writing " + path);
}

// shared flags; the seed falls back to the VMI_SEED environment variable
struct common_opts {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_path, "key=value config file");
        cmd->add_option("--out", out_dir, "output directory")->capture_default_str();
        cmd->add_option("--seed", seed, "RNG seed")->envname("VMI_SEED");
    }

    vmi::toolkit_config load() const {
        vmi::toolkit_config cfg;
        if (!config_path.empty()) cfg = vmi::load_config_file(config_path);
        return cfg;
    }
};

struct manifest_info {
    std::string command_line;
    std::chrono::system_clock::time_point started = std::chrono::system_clock::now();
    std::vector<std::pair<std::string, std::string>> inputs; // path -> digest

    void add_input(const std::string& path) {
        inputs.emplace_back(path, vmi::file_digest_hex(path));
    }
};

void write_manifest(const std::string& out_dir, const manifest_info& info,
                    const vmi::toolkit_config& cfg, std::uint64_t seed) {
    json j;
    j["tool_version"] = "vmi 1.0.0";
    j["command_line"] = info.command_line;
    j["seed"] = seed;
    j["config_digest"] = vmi::fnv1a64_hex(vmi::dump_config(cfg));
    json inputs = json::object();
    for (const auto& [path, digest] : info.inputs) inputs[path] = digest;
    j["input_digests"] = std::move(inputs);
    j["timestamps"] = {{"started_utc", iso_utc(info.started)},
                       {"finished_utc", iso_utc(std::chrono::system_clock::now())}};
    write_file((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
}

vmi::loaded_recording load_checked(const std::string& data_path, manifest_info& info) {
    vmi::loaded_recording loaded = vmi::load_recording(data_path);
    info.add_input(loaded.vhdr_path);
    info.add_input(loaded.vmrk_path);
    info.add_input(loaded.eeg_path);
    const std::vector<std::string> violations = vmi::validate_recording(loaded.rec);
    if (!violations.empty()) {
        std::ostringstream os;
        os << loaded.vhdr_path << " fails validation: " << violations[0];
        if (violations.size() > 1) os << " (+" << violations.size() - 1 << " more)";
        vmi::fail(vmi::error_code::invalid_argument, os.str());
    }
    return loaded;
}

std::string window_tag(std::pair<double, double> window_ms) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d_%04d", static_cast<int>(window_ms.first),
                  static_cast<int>(window_ms.second));
    return buf;
}

json report_json(const std::string& mode, const std::string& subject,
                 const vmi::continuous_recording& rec,
                 const std::vector<vmi::report_row>& rows, const std::string& table) {
    json j;
    j["mode"] = mode;
    j["subject"] = subject;
    j["session_kind"] = vmi::session_kind_name(rec.kind);
    json jrows = json::array();
    for (const auto& row : rows) {
        const vmi::eval_report& rep = row.subjects.at(0).second;
        json jr;
        jr["label"] = row.label;
        jr["mean_acc"] = rep.mean_acc;
        jr["std_acc"] = rep.std_acc;
        jr["per_fold_acc"] = rep.per_fold_acc;
        jr["chance_level"] = rep.chance_level;
        jr["scheme"] = rep.scheme;
        json conf = json::array();
        for (Eigen::Index r = 0; r < rep.confusion.rows(); ++r) {
            json line = json::array();
            for (Eigen::Index c = 0; c < rep.confusion.cols(); ++c)
                line.push_back(rep.confusion(r, c));
            conf.push_back(std::move(line));
        }
        jr["confusion"] = std::move(conf);
        jrows.push_back(std::move(jr));
    }
    j["rows"] = std::move(jrows);
    j["table"] = table;
    return j;
}

int cmd_synth(const common_opts& opts, const std::string& preset,
              const std::string& session, const std::string& format,
              const std::string& subject, manifest_info& info) {
    const vmi::session_kind kind = session == "perception"
                                       ? vmi::session_kind::perception
                                       : vmi::session_kind::imagery;
    const std::uint64_t seed = opts.seed.value_or(42);

    vmi::toolkit_config base;
    base.synth = vmi::synth_preset(preset, kind, seed);
    vmi::toolkit_config cfg = base;
    if (!opts.config_path.empty()) {
        cfg = vmi::load_config_file(opts.config_path, base);
        info.add_input(opts.config_path);
        cfg.synth.kind = kind; // the flags own these two, not the file
        cfg.synth.seed = seed;
    }

    const vmi::continuous_recording rec = vmi::generate_session(cfg.synth);
    const vmi::binary_format bin = format == "int16" ? vmi::binary_format::int16
                                                     : vmi::binary_format::float32;
    const vmi::recording_files files = vmi::write_recording(rec, bin, 0.0, subject);

    ensure_dir(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_file((out / (subject + ".vhdr")).string(), files.header);
    write_file((out / (subject + ".vmrk")).string(), files.markers);
    write_file((out / (subject + ".eeg")).string(), files.data);
    write_manifest(opts.out_dir, info, cfg, seed);
    return 0;
}

int cmd_eval(const common_opts& opts, const std::string& data, const std::string& mode,
             std::string json_path, const std::string& subject, manifest_info& info) {
    vmi::toolkit_config cfg = opts.load();
    if (!opts.config_path.empty()) info.add_input(opts.config_path);
    if (opts.seed) cfg.analysis.cv.seed = *opts.seed;

    const vmi::loaded_recording loaded = load_checked(data, info);
    const vmi::epoch_set es = vmi::classification_epochs(loaded.rec, cfg.analysis);

    std::vector<vmi::report_row> rows;
    vmi::table_layout layout = vmi::table_layout::table_one;
    if (mode == "4class") {
        const vmi::eval_report rep =
            vmi::cross_validate(es, cfg.analysis, {vmi::cv_mode::four_class, {}});
        const std::string task = loaded.rec.kind == vmi::session_kind::imagery
                                     ? "visual imagery"
                                     : "visual perception";
        rows.push_back({task, {{subject, rep}}});
    } else {
        layout = vmi::table_layout::table_two;
        for (vmi::class_label c : vmi::all_classes()) {
            const vmi::eval_report rep =
                vmi::cross_validate(es, cfg.analysis, {vmi::cv_mode::binary_ovr, c});
            rows.push_back({vmi::class_display_name(c), {{subject, rep}}});
        }
    }
    const std::string table = vmi::render_report(rows, layout);

    ensure_dir(opts.out_dir);
    write_file((fs::path(opts.out_dir) / "report.txt").string(), table);
    if (json_path.empty())
        json_path = (fs::path(opts.out_dir) / "report.json").string();
    write_file(json_path,
               report_json(mode, subject, loaded.rec, rows, table).dump(2) + "\n");
    write_manifest(opts.out_dir, info, cfg, cfg.analysis.cv.seed);
    return 0;
}

int cmd_ersp(const common_opts& opts, const std::string& data, const std::string& channel,
             manifest_info& info) {
    const vmi::toolkit_config cfg = opts.load();
    if (!opts.config_path.empty()) info.add_input(opts.config_path);

    const vmi::loaded_recording loaded = load_checked(data, info);
    const int idx = loaded.rec.layout.index_of(channel);
    if (idx < 0) {
        std::ostringstream os;
        os << "'" << channel << "' is not a channel of this recording; valid labels:";
        for (const auto& ch : loaded.rec.layout.channels) os << " " << ch.label;
        vmi::fail(vmi::error_code::unknown_channel, os.str());
    }

    const vmi::epoch_set es = vmi::analysis_epochs(loaded.rec, cfg.analysis);
    const vmi::ersp_result res = vmi::compute_ersp(es, idx, cfg.analysis, channel);

    std::string csv;
    for (Eigen::Index f = 0; f < res.values_db.rows(); ++f) {
        for (Eigen::Index t = 0; t < res.values_db.cols(); ++t) {
            if (t) csv += ',';
            csv += fmt6(res.values_db(f, t));
        }
        csv += '\n';
    }

    json meta;
    meta["channel"] = res.channel;
    meta["freqs_hz"] = res.freqs_hz;
    meta["times_s"] = res.times_s;
    meta["baseline"] = {{"source", res.baseline_source},
                        {"duration_ms", res.baseline_duration_ms}};
    meta["shape"] = {res.values_db.rows(), res.values_db.cols()};

    ensure_dir(opts.out_dir);
    const fs::path out(opts.out_dir);
    write_file((out / "ersp.csv").string(), csv);
    write_file((out / "ersp_meta.json").string(), meta.dump(2) + "\n");
    write_file((out / "ersp.svg").string(),
               vmi::svg_heatmap(res.values_db, res.times_s.front(), res.times_s.back(),
                                res.freqs_hz.front(), res.freqs_hz.back(),
                                "ERSP dB vs rest baseline, channel " + channel));
    write_manifest(opts.out_dir, info, cfg, cfg.analysis.cv.seed);
    return 0;
}

int cmd_topo(const common_opts& opts, const std::string& data, const std::string& mode,
             manifest_info& info) {
    const vmi::toolkit_config cfg = opts.load();
    if (!opts.config_path.empty()) info.add_input(opts.config_path);

    const vmi::loaded_recording loaded = load_checked(data, info);
    const vmi::epoch_set es = vmi::analysis_epochs(loaded.rec, cfg.analysis);
    const vmi::topo_mode tm =
        mode == "raw" ? vmi::topo_mode::raw_power : vmi::topo_mode::db_vs_baseline;
    const std::vector<vmi::topography_frame> frames =
        vmi::alpha_topography(es, loaded.rec.layout, cfg.analysis, tm);

    ensure_dir(opts.out_dir);
    const fs::path out(opts.out_dir);
    for (const vmi::topography_frame& frame : frames) {
        const std::string tag = window_tag(frame.window_ms);
        std::string csv = "channel,value\n";
        for (Eigen::Index c = 0; c < frame.values.size(); ++c) {
            csv += frame.layout.channels[static_cast<std::size_t>(c)].label;
            csv += ',';
            csv += fmt6(frame.values(c));
            csv += '\n';
        }
        write_file((out / ("topo_" + tag + ".csv")).string(), csv);

        std::ostringstream title;
        title << "alpha power " << frame.window_ms.first << "-" << frame.window_ms.second
              << " ms " << (tm == vmi::topo_mode::raw_power ? "(µV²)" : "(dB vs baseline)");
        const Eigen::MatrixXd grid = vmi::interpolate_scalp(frame, 64);
        write_file((out / ("topo_" + tag + ".svg")).string(),
                   vmi::svg_scalp_map(grid, frame.layout, title.str()));
    }
    write_manifest(opts.out_dir, info, cfg, cfg.analysis.cv.seed);
    return 0;
}

int cmd_convert(const common_opts& opts, const std::string& data, bool epochs,
                manifest_info& info) {
    const vmi::toolkit_config cfg = opts.load();
    if (!opts.config_path.empty()) info.add_input(opts.config_path);

    const vmi::loaded_recording loaded = load_checked(data, info);
    const vmi::continuous_recording& rec = loaded.rec;

    ensure_dir(opts.out_dir);
    const fs::path out(opts.out_dir);

    if (epochs) {
        const vmi::epoch_set es = vmi::extract_epochs(
            rec, cfg.analysis.epoch_window_s, vmi::marker_kind::cue_onset);
        write_file((out / "epochs.csv").string(),
                   vmi::export_epochs(es, vmi::epoch_layout::long_csv));
    } else {
        std::string csv = "time_s";
        for (const auto& ch : rec.layout.channels) {
            csv += ',';
            csv += ch.label;
        }
        csv += '\n';
        for (std::int64_t s = 0; s < rec.n_samples(); ++s) {
            csv += fmt6(static_cast<double>(s) / rec.sample_rate_hz);
            for (int c = 0; c < rec.n_channels(); ++c) {
                csv += ',';
                csv += fmt6(static_cast<double>(rec.data(c, s)));
            }
            csv += '\n';
        }
        write_file((out / "data.csv").string(), csv);

        std::string markers = "sample_index,time_s,kind,label\n";
        for (const vmi::marker_event& ev : rec.markers) {
            markers += std::to_string(ev.sample_index);
            markers += ',';
            markers += fmt6(static_cast<double>(ev.sample_index) / rec.sample_rate_hz);
            markers += ',';
            switch (ev.kind) {
            case vmi::marker_kind::rest_onset: markers += "rest_onset"; break;
            case vmi::marker_kind::cue_onset: markers += "cue_onset"; break;
            case vmi::marker_kind::stimulus_onset: markers += "stimulus_onset"; break;
            }
            markers += ',';
            if (ev.label) markers += vmi::class_id(*ev.label);
            markers += '\n';
        }
        write_file((out / "markers.csv").string(), markers);
    }
    write_manifest(opts.out_dir, info, cfg, cfg.analysis.cv.seed);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "offline EEG decoding toolkit: synthetic sessions, BrainVision io, "
        "alpha-band CSP+RLDA evaluation, ERSP and scalp topography"};
    app.set_version_flag("--version", "vmi 1.0.0");
    app.require_subcommand(1);

    manifest_info info;
    {
        std::ostringstream cl;
        for (int i = 0; i < argc; ++i) {
            if (i) cl << ' ';
            cl << argv[i];
        }
        info.command_line = cl.str();
    }

    common_opts synth_opts, eval_opts, ersp_opts, topo_opts, convert_opts;
    std::string preset = "high", session = "imagery", format = "float32";
    std::string synth_subject = "S1";
    std::string eval_data, eval_mode = "4class", eval_json, eval_subject = "S1";
    std::string ersp_data, ersp_channel = "Oz";
    std::string topo_data, topo_mode_str = "db";
    std::string convert_data;
    bool convert_epochs = false;

    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic session");
    synth_opts.attach(synth);
    synth->add_option("--preset", preset, "SNR preset")
        ->check(CLI::IsMember({"high", "low", "null"}))
        ->capture_default_str();
    synth->add_option("--session", session, "session kind")
        ->check(CLI::IsMember({"imagery", "perception"}))
        ->capture_default_str();
    synth->add_option("--format", format, "sample encoding")
        ->check(CLI::IsMember({"float32", "int16"}))
        ->capture_default_str();
    synth->add_option("--subject", synth_subject, "file base name")
        ->capture_default_str();

    CLI::App* eval = app.add_subcommand("eval", "cross-validated accuracy report");
    eval_opts.attach(eval);
    eval->add_option("--data", eval_data, ".vhdr file or directory")->required();
    eval->add_option("--mode", eval_mode, "evaluation scheme")
        ->check(CLI::IsMember({"4class", "ovr"}))
        ->capture_default_str();
    eval->add_option("--json", eval_json, "explicit report.json path");
    eval->add_option("--subject", eval_subject, "column label")->capture_default_str();

    CLI::App* ersp = app.add_subcommand("ersp", "time-frequency analysis of one channel");
    ersp_opts.attach(ersp);
    ersp->add_option("--data", ersp_data, ".vhdr file or directory")->required();
    ersp->add_option("--channel", ersp_channel, "channel label")->capture_default_str();

    CLI::App* topo = app.add_subcommand("topo", "alpha-band scalp topography");
    topo_opts.attach(topo);
    topo->add_option("--data", topo_data, ".vhdr file or directory")->required();
    topo->add_option("--mode", topo_mode_str, "raw power or dB vs baseline")
        ->check(CLI::IsMember({"raw", "db"}))
        ->capture_default_str();

    CLI::App* convert = app.add_subcommand("convert", "BrainVision to CSV");
    convert_opts.attach(convert);
    convert->add_option("--data", convert_data, ".vhdr file or directory")->required();
    convert->add_flag("--epochs", convert_epochs,
                      "emit cue-locked epochs instead of the continuous stream");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed())
            return cmd_synth(synth_opts, preset, session, format, synth_subject, info);
        if (eval->parsed())
            return cmd_eval(eval_opts, eval_data, eval_mode, eval_json, eval_subject, info);
        if (ersp->parsed()) return cmd_ersp(ersp_opts, ersp_data, ersp_channel, info);
        if (topo->parsed()) return cmd_topo(topo_opts, topo_data, topo_mode_str, info);
        if (convert->parsed())
            return cmd_convert(convert_opts, convert_data, convert_epochs, info);
    } catch (const vmi::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
