#include "vmi/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "vmi/errors.hpp"

namespace vmi {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void bad_value(int line, const std::string& key, const std::string& value,
                            const std::string& expected) {
    std::ostringstream os;
    os << "line " << line << ": " << key << " = '" << value << "' (" << expected << ")";
    fail(error_code::config_error, os.str());
}

using setter = std::function<void(toolkit_config&, const std::string& key,
                                  const std::string& value, int line)>;

template <typename Get>
setter make_double(Get get) {
    return [get](toolkit_config& c, const std::string& k, const std::string& v, int line) {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
            bad_value(line, k, v, "expected a number");
        *get(c) = x;
    };
}

template <typename Get>
setter make_int(Get get) {
    return [get](toolkit_config& c, const std::string& k, const std::string& v, int line) {
        char* end = nullptr;
        const long x = std::strtol(v.c_str(), &end, 10);
        if (v.empty() || end != v.c_str() + v.size())
            bad_value(line, k, v, "expected an integer");
        *get(c) = static_cast<int>(x);
    };
}

template <typename Get>
setter make_u64(Get get) {
    return [get](toolkit_config& c, const std::string& k, const std::string& v, int line) {
        char* end = nullptr;
        const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
        if (v.empty() || end != v.c_str() + v.size())
            bad_value(line, k, v, "expected a non-negative integer");
        *get(c) = static_cast<std::uint64_t>(x);
    };
}

template <typename Get>
setter make_bool(Get get) {
    return [get](toolkit_config& c, const std::string& k, const std::string& v, int line) {
        if (v == "true" || v == "1")
            *get(c) = true;
        else if (v == "false" || v == "0")
            *get(c) = false;
        else
            bad_value(line, k, v, "expected true/false");
    };
}

const std::map<std::string, setter>& key_table() {
    static const std::map<std::string, setter> k = {
        {"alpha_band.low",
         make_double([](toolkit_config& c) { return &c.analysis.alpha_band_hz.first; })},
        {"alpha_band.high",
         make_double([](toolkit_config& c) { return &c.analysis.alpha_band_hz.second; })},
        {"filter.order",
         make_int([](toolkit_config& c) { return &c.analysis.filter_order; })},
        {"epoch.start_s",
         make_double([](toolkit_config& c) { return &c.analysis.epoch_window_s.first; })},
        {"epoch.end_s",
         make_double([](toolkit_config& c) { return &c.analysis.epoch_window_s.second; })},
        {"ersp.freq_lo_hz",
         make_double(
             [](toolkit_config& c) { return &c.analysis.ersp_freq_range_hz.first; })},
        {"ersp.freq_hi_hz",
         make_double(
             [](toolkit_config& c) { return &c.analysis.ersp_freq_range_hz.second; })},
        {"ersp.n_times",
         make_int([](toolkit_config& c) { return &c.analysis.ersp_n_times; })},
        {"ersp.baseline_ms",
         make_double([](toolkit_config& c) { return &c.analysis.ersp_baseline_ms; })},
        {"csp.n_pairs",
         make_int([](toolkit_config& c) { return &c.analysis.n_csp_pairs; })},
        {"shrinkage.mode",
         [](toolkit_config& c, const std::string& k, const std::string& v, int line) {
             if (v == "analytic")
                 c.analysis.shrinkage.mode = shrinkage_mode::analytic;
             else if (v == "fixed")
                 c.analysis.shrinkage.mode = shrinkage_mode::fixed;
             else
                 bad_value(line, k, v, "expected analytic or fixed");
         }},
        {"shrinkage.gamma",
         make_double([](toolkit_config& c) { return &c.analysis.shrinkage.gamma; })},
        {"cv.folds", make_int([](toolkit_config& c) { return &c.analysis.cv.folds; })},
        {"cv.repeats", make_int([](toolkit_config& c) { return &c.analysis.cv.repeats; })},
        {"cv.stratified",
         make_bool([](toolkit_config& c) { return &c.analysis.cv.stratified; })},
        {"cv.seed", make_u64([](toolkit_config& c) { return &c.analysis.cv.seed; })},
        {"ovr.standardize_scores",
         make_bool([](toolkit_config& c) { return &c.analysis.ovr_standardize_scores; })},
        {"notch.enabled",
         make_bool([](toolkit_config& c) { return &c.analysis.notch_enabled; })},
        {"notch.f0_hz",
         make_double([](toolkit_config& c) { return &c.analysis.notch_f0_hz; })},
        {"notch.q", make_double([](toolkit_config& c) { return &c.analysis.notch_q; })},
        {"synth.n_trials_per_class",
         make_int([](toolkit_config& c) { return &c.synth.n_trials_per_class; })},
        {"synth.fs_hz", make_double([](toolkit_config& c) { return &c.synth.fs_hz; })},
        {"synth.rest_s", make_double([](toolkit_config& c) { return &c.synth.rest_s; })},
        {"synth.cue_s", make_double([](toolkit_config& c) { return &c.synth.cue_s; })},
        {"synth.task_s", make_double([](toolkit_config& c) { return &c.synth.task_s; })},
        {"synth.amp_uv",
         [](toolkit_config& c, const std::string& k, const std::string& v, int line) {
             char* end = nullptr;
             const double x = std::strtod(v.c_str(), &end);
             if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
                 bad_value(line, k, v, "expected a number");
             c.synth.class_amp_uv = {x, x, x, x};
         }},
        {"synth.amp_uv.eating_food",
         make_double([](toolkit_config& c) { return &c.synth.class_amp_uv[0]; })},
        {"synth.amp_uv.opening_door",
         make_double([](toolkit_config& c) { return &c.synth.class_amp_uv[1]; })},
        {"synth.amp_uv.picking_up_phone",
         make_double([](toolkit_config& c) { return &c.synth.class_amp_uv[2]; })},
        {"synth.amp_uv.pouring_water",
         make_double([](toolkit_config& c) { return &c.synth.class_amp_uv[3]; })},
        {"synth.envelope_gain",
         make_double([](toolkit_config& c) { return &c.synth.envelope_gain; })},
        {"synth.sigma_pink_uv",
         make_double([](toolkit_config& c) { return &c.synth.sigma_pink_uv; })},
        {"synth.sigma_white_uv",
         make_double([](toolkit_config& c) { return &c.synth.sigma_white_uv; })},
        {"synth.n_pink_sources",
         make_int([](toolkit_config& c) { return &c.synth.n_pink_sources; })},
    };
    return k;
}

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

} // namespace

toolkit_config parse_config_text(const std::string& text, const toolkit_config& base) {
    toolkit_config cfg = base;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << "line " << line_no << ": expected key = value, got '" << line << "'";
            fail(error_code::config_error, os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = key_table().find(key);
        if (it == key_table().end()) {
            std::ostringstream os;
            os << "line " << line_no << ": unknown key '" << key << "'";
            fail(error_code::config_error, os.str());
        }
        it->second(cfg, key, value, line_no);
    }
    return cfg;
}

toolkit_config load_config_file(const std::string& path, const toolkit_config& base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(error_code::io_error, "cannot read config file " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return parse_config_text(os.str(), base);
}

std::string dump_config(const toolkit_config& cfg) {
    const analysis_config& a = cfg.analysis;
    const synth_config& s = cfg.synth;
    std::ostringstream o;
    o << "alpha_band.low = " << fmt_num(a.alpha_band_hz.first) << "\n";
    o << "alpha_band.high = " << fmt_num(a.alpha_band_hz.second) << "\n";
    o << "filter.order = " << a.filter_order << "\n";
    o << "epoch.start_s = " << fmt_num(a.epoch_window_s.first) << "\n";
    o << "epoch.end_s = " << fmt_num(a.epoch_window_s.second) << "\n";
    o << "ersp.freq_lo_hz = " << fmt_num(a.ersp_freq_range_hz.first) << "\n";
    o << "ersp.freq_hi_hz = " << fmt_num(a.ersp_freq_range_hz.second) << "\n";
    o << "ersp.n_times = " << a.ersp_n_times << "\n";
    o << "ersp.baseline_ms = " << fmt_num(a.ersp_baseline_ms) << "\n";
    o << "csp.n_pairs = " << a.n_csp_pairs << "\n";
    o << "shrinkage.mode = "
      << (a.shrinkage.mode == shrinkage_mode::analytic ? "analytic" : "fixed") << "\n";
    o << "shrinkage.gamma = " << fmt_num(a.shrinkage.gamma) << "\n";
    o << "cv.folds = " << a.cv.folds << "\n";
    o << "cv.repeats = " << a.cv.repeats << "\n";
    o << "cv.stratified = " << (a.cv.stratified ? "true" : "false") << "\n";
    o << "cv.seed = " << a.cv.seed << "\n";
    o << "ovr.standardize_scores = " << (a.ovr_standardize_scores ? "true" : "false")
      << "\n";
    o << "notch.enabled = " << (a.notch_enabled ? "true" : "false") << "\n";
    o << "notch.f0_hz = " << fmt_num(a.notch_f0_hz) << "\n";
    o << "notch.q = " << fmt_num(a.notch_q) << "\n";
    o << "synth.n_trials_per_class = " << s.n_trials_per_class << "\n";
    o << "synth.fs_hz = " << fmt_num(s.fs_hz) << "\n";
    o << "synth.rest_s = " << fmt_num(s.rest_s) << "\n";
    o << "synth.cue_s = " << fmt_num(s.cue_s) << "\n";
    o << "synth.task_s = " << fmt_num(s.task_s) << "\n";
    for (class_label c : all_classes())
        o << "synth.amp_uv." << class_id(c) << " = "
          << fmt_num(s.class_amp_uv[static_cast<std::size_t>(c)]) << "\n";
    o << "synth.envelope_gain = " << fmt_num(s.envelope_gain) << "\n";
    o << "synth.sigma_pink_uv = " << fmt_num(s.sigma_pink_uv) << "\n";
    o << "synth.sigma_white_uv = " << fmt_num(s.sigma_white_uv) << "\n";
    o << "synth.n_pink_sources = " << s.n_pink_sources << "\n";
    return o.str();
}

} // namespace vmi
