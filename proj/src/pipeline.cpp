#include "vmi/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vmi/dsp.hpp"
#include "vmi/errors.hpp"

namespace vmi {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(error_code::io_error, "cannot read " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::string find_vhdr(const std::string& path) {
    std::error_code ec;
    if (fs::is_directory(path, ec)) {
        std::vector<std::string> found;
        for (const auto& entry : fs::directory_iterator(path, ec))
            if (entry.path().extension() == ".vhdr") found.push_back(entry.path().string());
        if (ec) fail(error_code::io_error, "cannot list " + path);
        if (found.empty()) fail(error_code::io_error, "no .vhdr file in " + path);
        if (found.size() > 1) {
            std::sort(found.begin(), found.end());
            fail(error_code::io_error,
                 path + " holds " + std::to_string(found.size()) +
                     " .vhdr files; pass one explicitly (first is " + found[0] + ")");
        }
        return found[0];
    }
    return path;
}

// companion path from a header entry, else the vhdr basename with a new extension
std::string companion(const fs::path& vhdr, const std::string& header_entry,
                      const char* extension) {
    if (!header_entry.empty()) return (vhdr.parent_path() / header_entry).string();
    fs::path p = vhdr;
    p.replace_extension(extension);
    return p.string();
}

montage montage_for(const header_spec& header) {
    const montage& standard = default_montage();
    if (header.n_channels == standard.n_channels()) {
        bool match = true;
        for (int c = 0; c < header.n_channels; ++c)
            if (header.channels[static_cast<std::size_t>(c)].label !=
                standard.channels[static_cast<std::size_t>(c)].label) {
                match = false;
                break;
            }
        if (match) return standard;
    }
    montage m;
    for (const channel_entry& e : header.channels)
        m.channels.push_back({e.label, 0.0, 0.0, e.unit});
    return m;
}

} // namespace

loaded_recording load_recording(const std::string& path, const class_map& codes) {
    loaded_recording out;
    out.vhdr_path = find_vhdr(path);
    const header_spec header = parse_header(read_file(out.vhdr_path));
    const fs::path vhdr(out.vhdr_path);
    out.vmrk_path = companion(vhdr, header.marker_file, ".vmrk");
    out.eeg_path = companion(vhdr, header.data_file, ".eeg");
    const std::vector<raw_marker> markers = parse_markers(read_file(out.vmrk_path));
    out.rec = read_recording(header, markers, read_file(out.eeg_path),
                             montage_for(header), codes);
    return out;
}

epoch_set classification_epochs(const continuous_recording& rec,
                                const analysis_config& cfg) {
    epoch_set es = extract_epochs(rec, cfg.epoch_window_s, marker_kind::cue_onset);
    if (cfg.notch_enabled) {
        const iir_filter notch =
            design_notch(cfg.notch_f0_hz, cfg.notch_q, rec.sample_rate_hz);
        es = apply_zero_phase(notch, es);
    }
    const iir_filter alpha =
        design_butterworth_bandpass(cfg.filter_order, cfg.alpha_band_hz.first,
                                    cfg.alpha_band_hz.second, rec.sample_rate_hz);
    return apply_zero_phase(alpha, es);
}

epoch_set analysis_epochs(const continuous_recording& rec, const analysis_config& cfg) {
    const std::pair<double, double> window{-cfg.ersp_baseline_ms / 1000.0,
                                           cfg.epoch_window_s.second};
    epoch_set es = extract_epochs(rec, window, marker_kind::cue_onset);
    if (cfg.notch_enabled) {
        const iir_filter notch =
            design_notch(cfg.notch_f0_hz, cfg.notch_q, rec.sample_rate_hz);
        es = apply_zero_phase(notch, es);
    }
    return es;
}

} // namespace vmi
