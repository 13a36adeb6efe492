#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vmi/types.hpp"

namespace vmi {

enum class binary_format { int16, float32 };
enum class data_orientation { multiplexed, vectorized };

struct channel_entry {
    std::string label;
    std::string reference;      // empty = common reference
    double resolution_uv = 1.0; // µV per bit; empty field defaults to 1
    std::string unit = "µV";
};

struct header_spec {
    int n_channels = 0;
    double sampling_interval_us = 0.0;
    binary_format format = binary_format::float32;
    data_orientation orientation = data_orientation::multiplexed;
    std::vector<channel_entry> channels;
    std::optional<session_kind> kind; // from the optional [User Infos] section
    std::string data_file;            // informational only
    std::string marker_file;
};

struct raw_marker {
    int index = 0; // 1-based Mk number
    std::string type_str;
    std::string description;
    std::int64_t position_sample = 0; // 1-based in the file
    std::int64_t length_samples = 0;
    int channel = 0;
    std::string extra; // trailing fields (New Segment date), comma-joined
};

// stimulus-code to class mapping; the defaults are this toolkit's convention
using class_map = std::map<std::string, class_label>;
const class_map& default_class_map(); // "S  1".."S  4"

// tolerant INI-style parse: unknown sections and keys are ignored, required
// ones are validated; never crashes on arbitrary bytes
header_spec parse_header(const std::string& text);

// one raw_marker per MkN line of [Marker Infos], file order; Mk numbers must
// increase strictly
std::vector<raw_marker> parse_markers(const std::string& text);

// decode binary samples to microvolts and lift the marker vocabulary:
// "Comment,Rest" -> rest_onset; "Stimulus,<code in map>" -> cue_onset;
// "Visual Onset,<code in map>" -> stimulus_onset; "New Segment" dropped
continuous_recording read_recording(const header_spec& header,
                                    const std::vector<raw_marker>& markers,
                                    const std::string& binary, const montage& m,
                                    const class_map& codes = default_class_map());

struct recording_files {
    std::string header;  // .vhdr text (LF line endings)
    std::string markers; // .vmrk text
    std::string data;    // .eeg bytes, little-endian, multiplexed
};

// resolution_uv: µV per bit for int16 output; 0 picks the smallest value from
// a 1-2-5 ladder that fits the data, and overflow past the ladder maximum is
// an error. base_name names the DataFile/MarkerFile header entries.
recording_files write_recording(const continuous_recording& rec, binary_format format,
                                double resolution_uv = 0.0,
                                const std::string& base_name = "recording");

enum class epoch_layout { long_csv, json };

// long_csv columns: trial,label,channel,time_s,uV (6 significant digits);
// json mirrors the epoch_set fields and reimports losslessly
std::string export_epochs(const epoch_set& es, epoch_layout layout);

epoch_set import_epochs_json(const std::string& text);

} // namespace vmi
