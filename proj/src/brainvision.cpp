#include "vmi/brainvision.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <sstream>

#include <json.hpp>

#include "vmi/errors.hpp"

namespace vmi {

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// physical lines with CRLF or LF endings
std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::string cur;
    for (char c : text) {
        if (c == '\n') {
            if (!cur.empty() && cur.back() == '\r') cur.pop_back();
            lines.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    lines.push_back(cur);
    return lines;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

std::optional<std::int64_t> parse_i64(const std::string& s) {
    const std::string t = trim(s);
    std::int64_t v = 0;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || t.empty()) return std::nullopt;
    return v;
}

std::optional<double> parse_f64(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

// (section, key) -> value with lowercased lookup keys, last occurrence wins;
// channel entries keep their numeric order separately
struct ini_view {
    std::map<std::string, std::map<std::string, std::string>> sections;

    const std::string* find(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        const auto k = s->second.find(key);
        if (k == s->second.end()) return nullptr;
        return &k->second;
    }
    bool has_section(const std::string& section) const {
        return sections.count(section) != 0;
    }
};

ini_view scan_ini(const std::vector<std::string>& lines) {
    ini_view ini;
    std::string section;
    for (const std::string& raw : lines) {
        const std::string line = trim(raw);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = to_lower(trim(line.substr(1, line.size() - 2)));
            ini.sections[section]; // a section may be present yet empty
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos || section.empty()) continue; // tolerated junk
        ini.sections[section][to_lower(trim(line.substr(0, eq)))] =
            trim(line.substr(eq + 1));
    }
    return ini;
}

const std::string& require_key(const ini_view& ini, const std::string& section,
                               const std::string& key, const std::string& shown) {
    const std::string* v = ini.find(section, key);
    if (!v) fail(error_code::missing_key, shown + " is required");
    return *v;
}

constexpr double k_int16_max = 32767.0;
// "nice" µV-per-bit ladder for automatic int16 resolution
constexpr double k_resolution_ladder[] = {0.01, 0.02, 0.05, 0.1, 0.2, 0.5,
                                          1.0,  2.0,  5.0,  10.0};

std::string stimulus_code(class_label c) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "S%3d", static_cast<int>(c) + 1);
    return buf;
}

std::string fmt_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

double round_6sig(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::strtod(buf, nullptr);
}

} // namespace

const class_map& default_class_map() {
    static const class_map k = {
        {"S  1", class_label::eating_food},
        {"S  2", class_label::opening_door},
        {"S  3", class_label::picking_up_phone},
        {"S  4", class_label::pouring_water},
    };
    return k;
}

header_spec parse_header(const std::string& text) {
    const ini_view ini = scan_ini(split_lines(text));
    if (!ini.has_section("common infos"))
        fail(error_code::missing_section, "[Common Infos]");

    header_spec h;

    const std::string& n_ch = require_key(ini, "common infos", "numberofchannels",
                                          "[Common Infos] NumberOfChannels");
    const auto n = parse_i64(n_ch);
    if (!n || *n <= 0 || *n > 100000)
        fail(error_code::missing_key,
             "[Common Infos] NumberOfChannels has no usable value: '" + n_ch + "'");
    h.n_channels = static_cast<int>(*n);

    const std::string& si = require_key(ini, "common infos", "samplinginterval",
                                        "[Common Infos] SamplingInterval");
    const auto interval = parse_f64(si);
    if (!interval || *interval <= 0.0)
        fail(error_code::missing_key,
             "[Common Infos] SamplingInterval has no usable value: '" + si + "'");
    h.sampling_interval_us = *interval;

    const std::string fmt = to_lower(require_key(ini, "common infos", "dataformat",
                                                 "[Common Infos] DataFormat"));
    if (fmt != "binary")
        fail(error_code::unsupported_format, "DataFormat '" + fmt + "' (only BINARY)");

    const std::string orient = to_lower(require_key(
        ini, "common infos", "dataorientation", "[Common Infos] DataOrientation"));
    if (orient == "multiplexed")
        h.orientation = data_orientation::multiplexed;
    else if (orient == "vectorized")
        h.orientation = data_orientation::vectorized;
    else
        fail(error_code::unsupported_format,
             "DataOrientation '" + orient + "' (MULTIPLEXED or VECTORIZED)");

    if (!ini.has_section("binary infos"))
        fail(error_code::missing_section, "[Binary Infos]");
    const std::string bin = to_lower(
        require_key(ini, "binary infos", "binaryformat", "[Binary Infos] BinaryFormat"));
    if (bin == "int_16")
        h.format = binary_format::int16;
    else if (bin == "ieee_float_32")
        h.format = binary_format::float32;
    else
        fail(error_code::unsupported_format,
             "BinaryFormat '" + bin + "' (INT_16 or IEEE_FLOAT_32)");

    if (const std::string* v = ini.find("common infos", "datafile")) h.data_file = *v;
    if (const std::string* v = ini.find("common infos", "markerfile")) h.marker_file = *v;

    if (!ini.has_section("channel infos"))
        fail(error_code::missing_section, "[Channel Infos]");
    const auto& ch_section = ini.sections.at("channel infos");
    std::map<int, channel_entry> by_number;
    for (const auto& [key, value] : ch_section) {
        if (key.size() < 3 || key.compare(0, 2, "ch") != 0) continue;
        const auto num = parse_i64(key.substr(2));
        if (!num || *num < 1) continue;
        channel_entry e;
        const std::vector<std::string> parts = split_commas(value);
        e.label = parts.empty() ? "" : trim(parts[0]);
        if (parts.size() > 1) e.reference = trim(parts[1]);
        if (parts.size() > 2 && !trim(parts[2]).empty()) {
            const auto res = parse_f64(parts[2]);
            if (!res)
                fail(error_code::missing_key,
                     "Ch" + std::to_string(*num) + ": unreadable resolution '" +
                         trim(parts[2]) + "'");
            e.resolution_uv = *res;
        }
        if (parts.size() > 3 && !trim(parts[3]).empty()) e.unit = trim(parts[3]);
        by_number[static_cast<int>(*num)] = std::move(e);
    }
    if (static_cast<int>(by_number.size()) != h.n_channels ||
        (h.n_channels > 0 &&
         (by_number.begin()->first != 1 || by_number.rbegin()->first != h.n_channels))) {
        std::ostringstream os;
        os << "header declares " << h.n_channels << " channels but lists "
           << by_number.size() << " usable Ch entries";
        fail(error_code::channel_count_mismatch, os.str());
    }
    for (auto& [num, entry] : by_number) {
        if (h.format == binary_format::int16 && !(entry.resolution_uv > 0.0))
            fail(error_code::missing_key,
                 "Ch" + std::to_string(num) + ": resolution must be positive for INT_16");
        h.channels.push_back(std::move(entry));
    }

    if (const std::string* v = ini.find("user infos", "sessionkind"))
        h.kind = session_kind_from_name(to_lower(*v));

    return h;
}

std::vector<raw_marker> parse_markers(const std::string& text) {
    const std::vector<std::string> lines = split_lines(text);
    std::vector<raw_marker> out;
    std::string section;
    int last_index = 0;

    for (std::size_t i = 0; i < lines.size(); ++i) {
        const int line_no = static_cast<int>(i) + 1;
        const std::string line = trim(lines[i]);
        if (line.empty() || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = to_lower(trim(line.substr(1, line.size() - 2)));
            continue;
        }
        if (section != "marker infos") continue;

        const std::string lower = to_lower(line);
        if (lower.compare(0, 2, "mk") != 0) continue; // Codepage=... and friends

        const auto bad = [&](const std::string& why) {
            std::ostringstream os;
            os << "line " << line_no << ": " << why;
            fail(error_code::malformed_line, os.str());
        };

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) bad("marker line has no '='");
        const auto index = parse_i64(line.substr(2, eq - 2));
        if (!index || *index < 1) bad("bad marker number");
        if (static_cast<int>(*index) <= last_index)
            bad("marker numbers must be strictly increasing");

        const std::vector<std::string> f = split_commas(line.substr(eq + 1));
        if (f.size() < 5) bad("expected type,description,position,length,channel");

        raw_marker mk;
        mk.index = static_cast<int>(*index);
        mk.type_str = trim(f[0]);
        mk.description = trim(f[1]);
        const auto pos = parse_i64(f[2]);
        if (!pos || *pos < 1) bad("position must be a 1-based sample number");
        mk.position_sample = *pos;
        const auto len = parse_i64(f[3]);
        if (!len || *len < 0) bad("bad length field");
        mk.length_samples = *len;
        const auto ch = parse_i64(f[4]);
        if (!ch) bad("bad channel field");
        mk.channel = static_cast<int>(*ch);
        for (std::size_t k = 5; k < f.size(); ++k) {
            if (k > 5) mk.extra += ',';
            mk.extra += f[k];
        }
        last_index = mk.index;
        out.push_back(std::move(mk));
    }
    return out;
}

continuous_recording read_recording(const header_spec& header,
                                    const std::vector<raw_marker>& markers,
                                    const std::string& binary, const montage& m,
                                    const class_map& codes) {
    if (header.n_channels != m.n_channels()) {
        std::ostringstream os;
        os << "header declares " << header.n_channels << " channels, montage has "
           << m.n_channels();
        fail(error_code::channel_count_mismatch, os.str());
    }
    const int n_ch = header.n_channels;
    const std::size_t bps = header.format == binary_format::int16 ? 2 : 4;
    const std::size_t stride = static_cast<std::size_t>(n_ch) * bps;
    if (stride == 0 || binary.size() % stride != 0) {
        std::ostringstream os;
        os << "binary payload of " << binary.size() << " bytes is not a whole number of "
           << n_ch << "-channel frames";
        fail(error_code::length_mismatch, os.str());
    }
    const std::int64_t n_samples = static_cast<std::int64_t>(binary.size() / stride);

    continuous_recording rec;
    rec.layout = m;
    rec.sample_rate_hz = 1e6 / header.sampling_interval_us;
    rec.kind = header.kind.value_or(session_kind::imagery);
    rec.data.resize(n_ch, n_samples);

    const auto* bytes = reinterpret_cast<const unsigned char*>(binary.data());
    const auto sample_offset = [&](int c, std::int64_t s) {
        return header.orientation == data_orientation::multiplexed
                   ? (static_cast<std::size_t>(s) * static_cast<std::size_t>(n_ch) +
                      static_cast<std::size_t>(c)) *
                         bps
                   : (static_cast<std::size_t>(c) * static_cast<std::size_t>(n_samples) +
                      static_cast<std::size_t>(s)) *
                         bps;
    };

    if (header.format == binary_format::int16) {
        for (int c = 0; c < n_ch; ++c) {
            const double res = header.channels[static_cast<std::size_t>(c)].resolution_uv;
            for (std::int64_t s = 0; s < n_samples; ++s) {
                const std::size_t o = sample_offset(c, s);
                const auto raw = static_cast<std::int16_t>(
                    static_cast<std::uint16_t>(bytes[o]) |
                    (static_cast<std::uint16_t>(bytes[o + 1]) << 8));
                rec.data(c, s) = static_cast<float>(raw * res);
            }
        }
    } else {
        for (int c = 0; c < n_ch; ++c) {
            for (std::int64_t s = 0; s < n_samples; ++s) {
                const std::size_t o = sample_offset(c, s);
                const std::uint32_t u = static_cast<std::uint32_t>(bytes[o]) |
                                        (static_cast<std::uint32_t>(bytes[o + 1]) << 8) |
                                        (static_cast<std::uint32_t>(bytes[o + 2]) << 16) |
                                        (static_cast<std::uint32_t>(bytes[o + 3]) << 24);
                rec.data(c, s) = std::bit_cast<float>(u);
            }
        }
    }

    for (const raw_marker& mk : markers) {
        if (mk.type_str == "New Segment") continue;
        marker_event ev;
        ev.sample_index = mk.position_sample - 1; // file positions are 1-based
        if (mk.type_str == "Comment" && mk.description == "Rest") {
            ev.kind = marker_kind::rest_onset;
        } else if (mk.type_str == "Stimulus") {
            const auto it = codes.find(mk.description);
            if (it == codes.end())
                fail(error_code::unknown_marker_description,
                     "Mk" + std::to_string(mk.index) + ": Stimulus '" + mk.description +
                         "' is not in the class map");
            ev.kind = marker_kind::cue_onset;
            ev.label = it->second;
        } else if (mk.type_str == "Visual Onset") {
            const auto it = codes.find(mk.description);
            if (it == codes.end()) continue;
            ev.kind = marker_kind::stimulus_onset;
            ev.label = it->second;
        } else {
            continue; // preserved in the raw list, not lifted into the model
        }
        rec.markers.push_back(ev);
    }
    return rec;
}

recording_files write_recording(const continuous_recording& rec, binary_format format,
                                double resolution_uv, const std::string& base_name) {
    const int n_ch = rec.n_channels();
    const std::int64_t n_samples = rec.n_samples();
    if (static_cast<int>(rec.layout.channels.size()) != n_ch)
        fail(error_code::channel_count_mismatch,
             "write_recording: montage does not match the data rows");

    double res = 1.0;
    if (format == binary_format::int16) {
        if (!rec.data.allFinite())
            fail(error_code::invalid_argument,
                 "write_recording: non-finite samples cannot be stored as INT_16");
        const double max_abs =
            rec.data.size() == 0 ? 0.0 : static_cast<double>(rec.data.cwiseAbs().maxCoeff());
        if (resolution_uv > 0.0) {
            res = resolution_uv;
            if (max_abs > k_int16_max * res) {
                std::ostringstream os;
                os << "peak " << max_abs << " µV exceeds the INT_16 range at "
                   << res << " µV/bit";
                fail(error_code::dynamic_range_overflow, os.str());
            }
        } else {
            res = 0.0;
            for (double r : k_resolution_ladder)
                if (max_abs <= k_int16_max * r) {
                    res = r;
                    break;
                }
            if (res == 0.0) {
                std::ostringstream os;
                os << "peak " << max_abs << " µV exceeds the INT_16 range even at "
                   << "10 µV/bit";
                fail(error_code::dynamic_range_overflow, os.str());
            }
        }
    }

    recording_files out;

    std::ostringstream h;
    h << "Brain Vision Data Exchange Header File Version 1.0\n";
    h << "; generated by the vmi toolkit\n\n";
    h << "[Common Infos]\n";
    h << "Codepage=UTF-8\n";
    h << "DataFile=" << base_name << ".eeg\n";
    h << "MarkerFile=" << base_name << ".vmrk\n";
    h << "DataFormat=BINARY\n";
    h << "DataOrientation=MULTIPLEXED\n";
    h << "NumberOfChannels=" << n_ch << "\n";
    h << "SamplingInterval=" << fmt_num(1e6 / rec.sample_rate_hz) << "\n\n";
    h << "[Binary Infos]\n";
    h << "BinaryFormat=" << (format == binary_format::int16 ? "INT_16" : "IEEE_FLOAT_32")
      << "\n\n";
    h << "[Channel Infos]\n";
    h << "; Ch<n>=<label>,<reference>,<resolution in µV>,<unit>\n";
    for (int c = 0; c < n_ch; ++c) {
        h << "Ch" << (c + 1) << "=" << rec.layout.channels[static_cast<std::size_t>(c)].label
          << ",,";
        if (format == binary_format::int16) h << fmt_num(res);
        h << "," << rec.layout.channels[static_cast<std::size_t>(c)].unit << "\n";
    }
    h << "\n[User Infos]\n";
    h << "SessionKind=" << session_kind_name(rec.kind) << "\n";
    out.header = h.str();

    std::ostringstream mk;
    mk << "Brain Vision Data Exchange Marker File, Version 1.0\n\n";
    mk << "[Common Infos]\n";
    mk << "Codepage=UTF-8\n";
    mk << "DataFile=" << base_name << ".eeg\n\n";
    mk << "[Marker Infos]\n";
    mk << "; Mk<n>=<type>,<description>,<position>,<length>,<channel>\n";
    mk << "Mk1=New Segment,,1,1,0,00000000000000000000\n";
    int next = 2;
    for (const marker_event& ev : rec.markers) {
        mk << "Mk" << next++ << "=";
        switch (ev.kind) {
        case marker_kind::rest_onset:
            mk << "Comment,Rest";
            break;
        case marker_kind::cue_onset:
            if (!ev.label)
                fail(error_code::invalid_argument,
                     "write_recording: cue marker without a class label");
            mk << "Stimulus," << stimulus_code(*ev.label);
            break;
        case marker_kind::stimulus_onset:
            if (!ev.label)
                fail(error_code::invalid_argument,
                     "write_recording: stimulus marker without a class label");
            mk << "Visual Onset," << stimulus_code(*ev.label);
            break;
        }
        mk << "," << (ev.sample_index + 1) << ",1,0\n";
    }
    out.markers = mk.str();

    out.data.resize(static_cast<std::size_t>(n_samples) * static_cast<std::size_t>(n_ch) *
                    (format == binary_format::int16 ? 2 : 4));
    auto* bytes = reinterpret_cast<unsigned char*>(out.data.data());
    std::size_t o = 0;
    if (format == binary_format::int16) {
        for (std::int64_t s = 0; s < n_samples; ++s) {
            for (int c = 0; c < n_ch; ++c) {
                const double v = static_cast<double>(rec.data(c, s)) / res;
                const auto q = static_cast<std::int16_t>(
                    std::clamp<long long>(std::llround(v), -32767, 32767));
                const auto u = static_cast<std::uint16_t>(q);
                bytes[o++] = static_cast<unsigned char>(u & 0xff);
                bytes[o++] = static_cast<unsigned char>(u >> 8);
            }
        }
    } else {
        for (std::int64_t s = 0; s < n_samples; ++s) {
            for (int c = 0; c < n_ch; ++c) {
                const auto u = std::bit_cast<std::uint32_t>(rec.data(c, s));
                bytes[o++] = static_cast<unsigned char>(u & 0xff);
                bytes[o++] = static_cast<unsigned char>((u >> 8) & 0xff);
                bytes[o++] = static_cast<unsigned char>((u >> 16) & 0xff);
                bytes[o++] = static_cast<unsigned char>((u >> 24) & 0xff);
            }
        }
    }
    return out;
}

std::string export_epochs(const epoch_set& es, epoch_layout layout) {
    if (layout == epoch_layout::long_csv) {
        std::string out = "trial,label,channel,time_s,uV\n";
        char buf[96];
        for (int t = 0; t < es.n_trials(); ++t) {
            const char* label = class_id(es.labels()[static_cast<std::size_t>(t)]);
            for (int c = 0; c < es.n_channels(); ++c) {
                for (int s = 0; s < es.n_samples(); ++s) {
                    const double time =
                        es.window_s().first + static_cast<double>(s) / es.sample_rate_hz();
                    std::snprintf(buf, sizeof(buf), "%d,%s,%d,%.6g,%.6g\n", t, label, c,
                                  time, static_cast<double>(es.trial(t)(c, s)));
                    out += buf;
                }
            }
        }
        return out;
    }

    nlohmann::json j;
    j["window_s"] = {es.window_s().first, es.window_s().second};
    j["sample_rate_hz"] = es.sample_rate_hz();
    auto labels = nlohmann::json::array();
    for (class_label l : es.labels()) labels.push_back(class_id(l));
    j["labels"] = std::move(labels);
    auto trials = nlohmann::json::array();
    for (int t = 0; t < es.n_trials(); ++t) {
        auto rows = nlohmann::json::array();
        for (int c = 0; c < es.n_channels(); ++c) {
            auto row = nlohmann::json::array();
            for (int s = 0; s < es.n_samples(); ++s)
                row.push_back(round_6sig(static_cast<double>(es.trial(t)(c, s))));
            rows.push_back(std::move(row));
        }
        trials.push_back(std::move(rows));
    }
    j["trials"] = std::move(trials);
    return j.dump();
}

epoch_set import_epochs_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        fail(error_code::io_error, "epochs json: not a JSON object");
    try {
        const auto window = j.at("window_s");
        const std::pair<double, double> w{window.at(0).get<double>(),
                                          window.at(1).get<double>()};
        const double fs = j.at("sample_rate_hz").get<double>();
        std::vector<class_label> labels;
        for (const auto& l : j.at("labels")) {
            const auto c = class_from_id(l.get<std::string>());
            if (!c)
                fail(error_code::io_error,
                     "epochs json: unknown label '" + l.get<std::string>() + "'");
            labels.push_back(*c);
        }
        std::vector<Eigen::MatrixXf> trials;
        for (const auto& t : j.at("trials")) {
            const Eigen::Index n_ch = static_cast<Eigen::Index>(t.size());
            const Eigen::Index n_s =
                n_ch > 0 ? static_cast<Eigen::Index>(t.at(0).size()) : 0;
            Eigen::MatrixXf m(n_ch, n_s);
            for (Eigen::Index c = 0; c < n_ch; ++c) {
                const auto& row = t.at(static_cast<std::size_t>(c));
                if (static_cast<Eigen::Index>(row.size()) != n_s)
                    fail(error_code::io_error, "epochs json: ragged trial rows");
                for (Eigen::Index s = 0; s < n_s; ++s)
                    m(c, s) = row.at(static_cast<std::size_t>(s)).get<float>();
            }
            trials.push_back(std::move(m));
        }
        return epoch_set(std::move(trials), std::move(labels), w, fs);
    } catch (const nlohmann::json::exception& e) {
        fail(error_code::io_error, std::string("epochs json: ") + e.what());
    }
}

} // namespace vmi
