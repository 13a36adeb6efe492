#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "vmi/brainvision.hpp"
#include "vmi/errors.hpp"
#include "vmi/rng.hpp"
#include "vmi/synth.hpp"

using namespace vmi;

namespace {

const char* k_minimal_vhdr =
    "Brain Vision Data Exchange Header File Version 1.0\n"
    "[Common Infos]\n"
    "DataFile=rec.eeg\n"
    "MarkerFile=rec.vmrk\n"
    "DataFormat=BINARY\n"
    "DataOrientation=MULTIPLEXED\n"
    "NumberOfChannels=2\n"
    "SamplingInterval=1000\n"
    "[Binary Infos]\n"
    "BinaryFormat=INT_16\n"
    "[Channel Infos]\n"
    "Ch1=C3,,0.5\n"
    "Ch2=C4,,0.5\n";

std::string float32_bytes(const std::vector<float>& v) {
    std::string out(v.size() * 4, '\0');
    std::memcpy(out.data(), v.data(), out.size());
    return out;
}

std::string int16_bytes(const std::vector<std::int16_t>& v) {
    std::string out(v.size() * 2, '\0');
    std::memcpy(out.data(), v.data(), out.size());
    return out;
}

montage two_channel_montage() {
    montage m;
    m.channels = {{"C3", -0.5, 0.0}, {"C4", 0.5, 0.0}};
    return m;
}

continuous_recording tiny_recording(binary_format, int n = 8) {
    continuous_recording rec;
    rec.layout = two_channel_montage();
    rec.sample_rate_hz = 500.0;
    rec.data = Eigen::MatrixXf(2, n);
    for (int i = 0; i < n; ++i) {
        rec.data(0, i) = static_cast<float>(i) * 0.25f;
        rec.data(1, i) = -static_cast<float>(i) * 0.25f;
    }
    rec.markers = {{0, marker_kind::rest_onset, std::nullopt},
                   {4, marker_kind::cue_onset, class_label::picking_up_phone}};
    rec.kind = session_kind::perception;
    return rec;
}

} // namespace

TEST_CASE("parse_header reads the minimal two-channel header") {
    const header_spec h = parse_header(k_minimal_vhdr);
    CHECK(h.n_channels == 2);
    CHECK(h.sampling_interval_us == 1000.0);
    CHECK(h.format == binary_format::int16);
    CHECK(h.orientation == data_orientation::multiplexed);
    CHECK(h.data_file == "rec.eeg");
    CHECK(h.marker_file == "rec.vmrk");
    REQUIRE(h.channels.size() == 2);
    CHECK(h.channels[0].label == "C3");
    CHECK(h.channels[0].resolution_uv == 0.5);
    CHECK(h.channels[1].label == "C4");
    CHECK_FALSE(h.kind.has_value());
}

TEST_CASE("parse_header tolerates noise and reads optional session kind") {
    std::string text = k_minimal_vhdr;
    text += "[User Infos]\nSessionKind=Perception\n";
    text += "; a comment line\nrandom junk without equals\n[Who Knows]\nFoo=Bar\n";
    const header_spec h = parse_header(text);
    REQUIRE(h.kind.has_value());
    CHECK(*h.kind == session_kind::perception);

    // case-insensitive section and key lookup, last assignment wins
    std::string upper = text;
    upper += "[COMMON INFOS]\nSAMPLINGINTERVAL=2000\n";
    CHECK(parse_header(upper).sampling_interval_us == 2000.0);

    // float32 headers omit the resolution field entirely
    std::string f32 =
        "[Common Infos]\nDataFormat=BINARY\nDataOrientation=VECTORIZED\n"
        "NumberOfChannels=1\nSamplingInterval=1000\n[Binary Infos]\n"
        "BinaryFormat=IEEE_FLOAT_32\n[Channel Infos]\nCh1=Oz,,\n";
    const header_spec hf = parse_header(f32);
    CHECK(hf.format == binary_format::float32);
    CHECK(hf.orientation == data_orientation::vectorized);
    CHECK(hf.channels[0].resolution_uv == 1.0);
}

TEST_CASE("parse_header rejects structurally broken headers") {
    SUBCASE("missing section") {
        try {
            parse_header("[Common Infos]\nNumberOfChannels=1\nSamplingInterval=1000\n"
                         "DataFormat=BINARY\nDataOrientation=MULTIPLEXED\n");
            FAIL("expected missing_section");
        } catch (const error& e) {
            CHECK(e.code() == error_code::missing_section);
        }
    }
    SUBCASE("missing key") {
        std::string text = k_minimal_vhdr;
        const auto pos = text.find("SamplingInterval=1000\n");
        text.erase(pos, std::strlen("SamplingInterval=1000\n"));
        try {
            parse_header(text);
            FAIL("expected missing_key");
        } catch (const error& e) {
            CHECK(e.code() == error_code::missing_key);
        }
    }
    SUBCASE("garbage numeric value") {
        std::string text = k_minimal_vhdr;
        const auto pos = text.find("SamplingInterval=1000");
        text.replace(pos, std::strlen("SamplingInterval=1000"), "SamplingInterval=soon");
        CHECK_THROWS_AS(parse_header(text), error);
    }
    SUBCASE("channel count mismatch: 3 declared, 2 listed") {
        std::string text = k_minimal_vhdr;
        const auto pos = text.find("NumberOfChannels=2");
        text.replace(pos, std::strlen("NumberOfChannels=2"), "NumberOfChannels=3");
        try {
            parse_header(text);
            FAIL("expected channel_count_mismatch");
        } catch (const error& e) {
            CHECK(e.code() == error_code::channel_count_mismatch);
        }
    }
    SUBCASE("ASCII data format unsupported") {
        std::string text = k_minimal_vhdr;
        const auto pos = text.find("DataFormat=BINARY");
        text.replace(pos, std::strlen("DataFormat=BINARY"), "DataFormat=ASCII");
        try {
            parse_header(text);
            FAIL("expected unsupported_format");
        } catch (const error& e) {
            CHECK(e.code() == error_code::unsupported_format);
        }
    }
    SUBCASE("non-positive int16 resolution") {
        std::string text = k_minimal_vhdr;
        const auto pos = text.find("Ch1=C3,,0.5");
        text.replace(pos, std::strlen("Ch1=C3,,0.5"), "Ch1=C3,,0");
        CHECK_THROWS_AS(parse_header(text), error);
    }
    SUBCASE("arbitrary bytes never crash") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            rng g(seed);
            std::string junk;
            for (int i = 0; i < 200; ++i)
                junk.push_back(static_cast<char>(g.uniform_index(256)));
            try {
                parse_header(junk);
            } catch (const error&) {
            }
        }
    }
}

TEST_CASE("parse_markers reads well-formed marker sections") {
    const std::string text =
        "Brain Vision Data Exchange Marker File, Version 1.0\n"
        "[Common Infos]\nDataFile=rec.eeg\n"
        "[Marker Infos]\n"
        "Mk1=New Segment,,1,1,0,20260814093000000000\n"
        "Mk2=Stimulus,S  1,5000,1,0\n"
        "Mk3=Comment,Rest,8000,1,0\n";
    const auto mks = parse_markers(text);
    REQUIRE(mks.size() == 3);
    CHECK(mks[0].type_str == "New Segment");
    CHECK(mks[0].description.empty());
    CHECK(mks[0].extra == "20260814093000000000");
    CHECK(mks[1].index == 2);
    CHECK(mks[1].type_str == "Stimulus");
    CHECK(mks[1].description == "S  1");
    CHECK(mks[1].position_sample == 5000);
    CHECK(mks[1].length_samples == 1);
    CHECK(mks[1].channel == 0);
    CHECK(mks[2].type_str == "Comment");
    CHECK(mks[2].description == "Rest");

    // an empty marker section is a valid empty list
    CHECK(parse_markers("[Marker Infos]\n").empty());
    CHECK(parse_markers("[Marker Infos]\n; nothing here\n").empty());
}

TEST_CASE("parse_markers rejects malformed lines with their line number") {
    SUBCASE("arity below five fields") {
        try {
            parse_markers("[Marker Infos]\nMk1=Stimulus,S  1,5000\n");
            FAIL("expected malformed_line");
        } catch (const error& e) {
            CHECK(e.code() == error_code::malformed_line);
            CHECK(std::string(e.what()).find("line 2") != std::string::npos);
        }
    }
    SUBCASE("non-increasing Mk numbers") {
        CHECK_THROWS_AS(parse_markers("[Marker Infos]\nMk2=Comment,Rest,1,1,0\n"
                                      "Mk1=Comment,Rest,5,1,0\n"),
                        error);
        CHECK_THROWS_AS(parse_markers("[Marker Infos]\nMk1=Comment,Rest,1,1,0\n"
                                      "Mk1=Comment,Rest,5,1,0\n"),
                        error);
    }
    SUBCASE("position below one") {
        CHECK_THROWS_AS(parse_markers("[Marker Infos]\nMk1=Comment,Rest,0,1,0\n"), error);
    }
    SUBCASE("unparsable position") {
        CHECK_THROWS_AS(parse_markers("[Marker Infos]\nMk1=Comment,Rest,x,1,0\n"), error);
    }
}

TEST_CASE("read_recording decodes int16 with per-channel resolution") {
    header_spec h = parse_header(k_minimal_vhdr);
    // multiplexed: (ch1,ch2) pairs per sample
    const std::string bytes = int16_bytes({100, -100, 200, -200});
    const continuous_recording rec =
        read_recording(h, {}, bytes, two_channel_montage());
    CHECK(rec.n_channels() == 2);
    CHECK(rec.n_samples() == 2);
    CHECK(rec.sample_rate_hz == doctest::Approx(1000.0));
    CHECK(rec.data(0, 0) == 50.0f); // 100 * 0.5 uV
    CHECK(rec.data(1, 0) == -50.0f);
    CHECK(rec.data(0, 1) == 100.0f);
    CHECK(rec.data(1, 1) == -100.0f);
    CHECK(rec.kind == session_kind::imagery); // default when header omits it
}

TEST_CASE("read_recording decodes vectorized float32") {
    std::string text = k_minimal_vhdr;
    auto pos = text.find("BinaryFormat=INT_16");
    text.replace(pos, std::strlen("BinaryFormat=INT_16"), "BinaryFormat=IEEE_FLOAT_32");
    pos = text.find("DataOrientation=MULTIPLEXED");
    text.replace(pos, std::strlen("DataOrientation=MULTIPLEXED"),
                 "DataOrientation=VECTORIZED");
    const header_spec h = parse_header(text);
    // vectorized: all of channel 1, then all of channel 2
    const std::string bytes = float32_bytes({1.5f, 2.5f, 3.5f, -1.0f, -2.0f, -3.0f});
    const continuous_recording rec = read_recording(h, {}, bytes, two_channel_montage());
    CHECK(rec.n_samples() == 3);
    CHECK(rec.data(0, 2) == 3.5f);
    CHECK(rec.data(1, 0) == -1.0f);
}

TEST_CASE("read_recording lifts the marker vocabulary") {
    const header_spec h = parse_header(k_minimal_vhdr);
    const std::string bytes = int16_bytes(std::vector<std::int16_t>(20, 0));
    std::vector<raw_marker> mks = {
        {1, "New Segment", "", 1, 1, 0, "20260814000000000000"},
        {2, "Comment", "Rest", 1, 1, 0, ""},
        {3, "Stimulus", "S  3", 5, 1, 0, ""},
        {4, "Visual Onset", "S  2", 7, 1, 0, ""},
        {5, "Visual Onset", "S  9", 8, 1, 0, ""}, // unknown code: skipped
    };
    const continuous_recording rec = read_recording(h, mks, bytes, two_channel_montage());
    REQUIRE(rec.markers.size() == 3);
    CHECK(rec.markers[0].kind == marker_kind::rest_onset);
    CHECK(rec.markers[0].sample_index == 0); // 1-based file -> 0-based memory
    CHECK_FALSE(rec.markers[0].label.has_value());
    CHECK(rec.markers[1].kind == marker_kind::cue_onset);
    CHECK(rec.markers[1].sample_index == 4);
    CHECK(*rec.markers[1].label == class_label::picking_up_phone);
    CHECK(rec.markers[2].kind == marker_kind::stimulus_onset);
    CHECK(*rec.markers[2].label == class_label::opening_door);

    // an unknown Stimulus code is an error (cue lifting must not drop trials)
    std::vector<raw_marker> bad = {{1, "Stimulus", "S  9", 5, 1, 0, ""}};
    try {
        read_recording(h, bad, bytes, two_channel_montage());
        FAIL("expected unknown_marker_description");
    } catch (const error& e) {
        CHECK(e.code() == error_code::unknown_marker_description);
    }
}

TEST_CASE("read_recording validates shape agreement") {
    const header_spec h = parse_header(k_minimal_vhdr);
    SUBCASE("byte stream not divisible by the frame stride") {
        const std::string bytes(7, '\0');
        try {
            read_recording(h, {}, bytes, two_channel_montage());
            FAIL("expected length_mismatch");
        } catch (const error& e) {
            CHECK(e.code() == error_code::length_mismatch);
        }
    }
    SUBCASE("montage channel count differs from the header") {
        const std::string bytes = int16_bytes({0, 0});
        try {
            read_recording(h, {}, bytes, default_montage());
            FAIL("expected channel_count_mismatch");
        } catch (const error& e) {
            CHECK(e.code() == error_code::channel_count_mismatch);
        }
    }
    SUBCASE("marker beyond the decoded samples surfaces as a validation violation") {
        // decoding is deliberately permissive here; validate_recording reports it
        const std::string bytes = int16_bytes({0, 0, 0, 0});
        std::vector<raw_marker> mks = {{1, "Comment", "Rest", 9, 1, 0, ""}};
        const continuous_recording rec =
            read_recording(h, mks, bytes, two_channel_montage());
        const auto violations = validate_recording(rec);
        REQUIRE_FALSE(violations.empty());
        CHECK(violations[0].find("marker") != std::string::npos);
    }
}

TEST_CASE("float32 write/read round-trip is bit exact") {
    const continuous_recording rec = tiny_recording(binary_format::float32);
    const recording_files files = write_recording(rec, binary_format::float32);

    const header_spec h = parse_header(files.header);
    CHECK(h.format == binary_format::float32);
    CHECK(h.n_channels == 2);
    CHECK(h.sampling_interval_us == doctest::Approx(2000.0));
    REQUIRE(h.kind.has_value());
    CHECK(*h.kind == session_kind::perception);

    const auto mks = parse_markers(files.markers);
    REQUIRE(mks.size() == 3); // New Segment + rest + cue
    CHECK(mks[0].type_str == "New Segment");
    CHECK(mks[0].extra == std::string(20, '0'));
    CHECK(mks[1].description == "Rest");
    CHECK(mks[2].type_str == "Stimulus");
    CHECK(mks[2].description == "S  3");
    CHECK(mks[2].position_sample == 5); // 0-based 4 -> 1-based 5

    continuous_recording back = read_recording(h, mks, files.data, rec.layout);
    back.kind = *h.kind;
    CHECK(back.data == rec.data); // bit-exact
    REQUIRE(back.markers.size() == 2);
    CHECK(back.markers[0].kind == marker_kind::rest_onset);
    CHECK(back.markers[1].sample_index == 4);
    CHECK(*back.markers[1].label == class_label::picking_up_phone);
}

TEST_CASE("int16 write/read round-trip stays within half a resolution step") {
    continuous_recording rec = tiny_recording(binary_format::int16);
    rec.markers.push_back({6, marker_kind::stimulus_onset, class_label::eating_food});

    SUBCASE("automatic resolution from the 1-2-5 ladder") {
        // peak 1.75 uV -> smallest step with 1.75/res <= 32767 is 0.01
        const recording_files files = write_recording(rec, binary_format::int16);
        const header_spec h = parse_header(files.header);
        CHECK(h.channels[0].resolution_uv == 0.01);
        const continuous_recording back =
            read_recording(h, parse_markers(files.markers), files.data, rec.layout);
        CHECK((back.data - rec.data).cwiseAbs().maxCoeff() <= 0.005f);
        REQUIRE(back.markers.size() == 3);
        CHECK(back.markers[2].kind == marker_kind::stimulus_onset);
        CHECK(*back.markers[2].label == class_label::eating_food);
    }
    SUBCASE("explicit resolution is honored") {
        const recording_files files = write_recording(rec, binary_format::int16, 0.1);
        const header_spec h = parse_header(files.header);
        CHECK(h.channels[0].resolution_uv == 0.1);
        const continuous_recording back =
            read_recording(h, parse_markers(files.markers), files.data, rec.layout);
        // half-step bound, with float headroom for values landing exactly on it
        CHECK(static_cast<double>((back.data - rec.data).cwiseAbs().maxCoeff()) <=
              0.05 + 1e-6);
    }
    SUBCASE("overflow past the ladder maximum") {
        rec.data(0, 0) = 1.0e9f;
        try {
            write_recording(rec, binary_format::int16);
            FAIL("expected dynamic_range_overflow");
        } catch (const error& e) {
            CHECK(e.code() == error_code::dynamic_range_overflow);
            CHECK(std::string(e.what()).find("exceeds") != std::string::npos);
        }
        // explicit resolution overflows too
        CHECK_THROWS_AS(write_recording(rec, binary_format::int16, 0.5), error);
    }
    SUBCASE("non-finite data is rejected") {
        rec.data(1, 1) = std::numeric_limits<float>::infinity();
        CHECK_THROWS_AS(write_recording(rec, binary_format::int16), error);
    }
}

TEST_CASE("write_recording emits LF-only text with the standard layout") {
    const continuous_recording rec = tiny_recording(binary_format::float32);
    const recording_files files = write_recording(rec, binary_format::float32, 0.0, "s01");
    CHECK(files.header.find('\r') == std::string::npos);
    CHECK(files.markers.find('\r') == std::string::npos);
    CHECK(files.header.find("DataFile=s01.eeg") != std::string::npos);
    CHECK(files.header.find("MarkerFile=s01.vmrk") != std::string::npos);
    CHECK(files.header.find("SessionKind=Perception") != std::string::npos);
    CHECK(files.data.size() == 2u * 8u * 4u);

    // synthetic sessions survive the full loop with validation intact
    synth_config cfg = synth_preset("low", session_kind::imagery, 5);
    cfg.n_trials_per_class = 1;
    cfg.fs_hz = 250.0;
    const continuous_recording synth_rec = generate_session(cfg);
    const recording_files sf = write_recording(synth_rec, binary_format::float32);
    continuous_recording back = read_recording(
        parse_header(sf.header), parse_markers(sf.markers), sf.data, synth_rec.layout);
    back.kind = *parse_header(sf.header).kind;
    CHECK(back.data == synth_rec.data);
    CHECK(back.markers.size() == synth_rec.markers.size());
    CHECK(validate_recording(back).empty());
}

TEST_CASE("export_epochs writes the long CSV layout") {
    std::vector<Eigen::MatrixXf> trials{Eigen::MatrixXf::Zero(2, 3),
                                        Eigen::MatrixXf::Ones(2, 3)};
    const epoch_set es(trials, {class_label::pouring_water, class_label::eating_food},
                       {0.5, 0.503}, 1000.0);
    const std::string csv = export_epochs(es, epoch_layout::long_csv);

    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start < csv.size()) {
        const auto nl = csv.find('\n', start);
        lines.push_back(csv.substr(start, nl - start));
        start = nl + 1;
    }
    REQUIRE(lines.size() == 1 + 2 * 2 * 3); // header + trials*channels*samples
    CHECK(lines[0] == "trial,label,channel,time_s,uV");
    CHECK(lines[1] == "0,pouring_water,0,0.5,0");
    CHECK(lines[2] == "0,pouring_water,0,0.501,0");
    CHECK(lines[7] == "1,eating_food,0,0.5,1");

    // empty sets export the header line only
    const epoch_set empty({}, {}, {0.0, 1.0}, 100.0);
    CHECK(export_epochs(empty, epoch_layout::long_csv) == "trial,label,channel,time_s,uV\n");
}

TEST_CASE("json epoch export reimports losslessly") {
    rng g(6);
    std::vector<Eigen::MatrixXf> trials;
    for (int t = 0; t < 3; ++t) {
        Eigen::MatrixXf x(2, 5);
        for (int c = 0; c < 2; ++c)
            for (int i = 0; i < 5; ++i) x(c, i) = static_cast<float>(g.normal());
        trials.push_back(std::move(x));
    }
    const epoch_set es(trials,
                       {class_label::eating_food, class_label::opening_door,
                        class_label::pouring_water},
                       {0.5, 0.505}, 1000.0);
    const std::string json = export_epochs(es, epoch_layout::json);
    const epoch_set back = import_epochs_json(json);
    CHECK(back.n_trials() == 3);
    CHECK(back.n_channels() == 2);
    CHECK(back.n_samples() == 5);
    CHECK(back.labels() == es.labels());
    CHECK(back.window_s() == es.window_s());
    CHECK(back.sample_rate_hz() == 1000.0);
    // 6-significant-digit serialization: relative error below 1e-5
    for (int t = 0; t < 3; ++t)
        CHECK((back.trial(t) - es.trial(t)).cwiseAbs().maxCoeff() <
              1e-5f * es.trial(t).cwiseAbs().maxCoeff() + 1e-6f);

    SUBCASE("malformed json is an io_error") {
        try {
            import_epochs_json("{ not json");
            FAIL("expected io_error");
        } catch (const error& e) {
            CHECK(e.code() == error_code::io_error);
        }
        CHECK_THROWS_AS(import_epochs_json("{}"), error);
        CHECK_THROWS_AS(import_epochs_json("{\"labels\":[\"driving\"]}"), error);
    }
}
