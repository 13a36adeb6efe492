#include "vmi/types.hpp"

#include <cmath>
#include <set>
#include <sstream>

namespace vmi {

const char* error_code_name(error_code c) {
    switch (c) {
        case error_code::missing_section: return "MissingSection";
        case error_code::missing_key: return "MissingKey";
        case error_code::channel_count_mismatch: return "ChannelCountMismatch";
        case error_code::unsupported_format: return "UnsupportedFormat";
        case error_code::malformed_line: return "MalformedLine";
        case error_code::length_mismatch: return "LengthMismatch";
        case error_code::unknown_marker_description: return "UnknownMarkerDescription";
        case error_code::dynamic_range_overflow: return "DynamicRangeOverflow";
        case error_code::invalid_band: return "InvalidBand";
        case error_code::signal_too_short: return "SignalTooShort";
        case error_code::epoch_out_of_bounds: return "EpochOutOfBounds";
        case error_code::insufficient_trials: return "InsufficientTrials";
        case error_code::singular_covariance: return "SingularCovariance";
        case error_code::too_many_pairs: return "TooManyPairs";
        case error_code::zero_variance_trial: return "ZeroVarianceTrial";
        case error_code::single_class: return "SingleClass";
        case error_code::degenerate_covariance: return "DegenerateCovariance";
        case error_code::dimension_mismatch: return "DimensionMismatch";
        case error_code::missing_baseline: return "MissingBaseline";
        case error_code::epoch_too_short: return "EpochTooShort";
        case error_code::window_out_of_epoch: return "WindowOutOfEpoch";
        case error_code::unknown_channel: return "UnknownChannel";
        case error_code::io_error: return "IoError";
        case error_code::config_error: return "ConfigError";
        case error_code::invalid_argument: return "InvalidArgument";
    }
    return "UnknownError";
}

const char* class_id(class_label c) {
    switch (c) {
        case class_label::eating_food: return "eating_food";
        case class_label::opening_door: return "opening_door";
        case class_label::picking_up_phone: return "picking_up_phone";
        case class_label::pouring_water: return "pouring_water";
    }
    return "?";
}

const char* class_display_name(class_label c) {
    switch (c) {
        case class_label::eating_food: return "eating food";
        case class_label::opening_door: return "opening door";
        case class_label::picking_up_phone: return "picking up a phone";
        case class_label::pouring_water: return "pouring water";
    }
    return "?";
}

std::optional<class_label> class_from_id(const std::string& id) {
    for (class_label c : all_classes())
        if (id == class_id(c)) return c;
    return std::nullopt;
}

const char* session_kind_name(session_kind k) {
    return k == session_kind::perception ? "Perception" : "Imagery";
}

std::optional<session_kind> session_kind_from_name(const std::string& name) {
    if (name == "Perception" || name == "perception") return session_kind::perception;
    if (name == "Imagery" || name == "imagery") return session_kind::imagery;
    return std::nullopt;
}

std::vector<std::string> validate_recording(const continuous_recording& rec) {
    std::vector<std::string> violations;
    std::ostringstream os;

    if (rec.data.rows() != rec.layout.n_channels()) {
        os << "channel-count mismatch: data has " << rec.data.rows()
           << " rows, montage has " << rec.layout.n_channels() << " channels";
        violations.push_back(os.str());
        os.str("");
    }

    std::set<std::string> seen;
    for (std::size_t i = 0; i < rec.layout.channels.size(); ++i) {
        const auto& ch = rec.layout.channels[i];
        if (!seen.insert(ch.label).second) {
            os << "duplicate channel label '" << ch.label << "' at channel " << i;
            violations.push_back(os.str());
            os.str("");
        }
        if (std::hypot(ch.x, ch.y) > 1.2 + 1e-9) {
            os << "channel " << i << " ('" << ch.label << "') position norm "
               << std::hypot(ch.x, ch.y) << " exceeds 1.2";
            violations.push_back(os.str());
            os.str("");
        }
    }
    for (const auto& label : rec.layout.occipital_cluster) {
        if (rec.layout.index_of(label) < 0) {
            os << "occipital cluster label '" << label << "' not in channel list";
            violations.push_back(os.str());
            os.str("");
        }
    }

    std::int64_t prev = -1;
    for (std::size_t i = 0; i < rec.markers.size(); ++i) {
        const auto& mk = rec.markers[i];
        if (mk.sample_index < 0 || mk.sample_index >= rec.n_samples()) {
            os << "marker " << i << " sample_index " << mk.sample_index
               << " outside [0, " << rec.n_samples() << ")";
            violations.push_back(os.str());
            os.str("");
        }
        if (mk.sample_index <= prev) {
            os << "marker " << i << " sample_index " << mk.sample_index
               << " not strictly increasing";
            violations.push_back(os.str());
            os.str("");
        }
        prev = mk.sample_index;
        const bool needs_label =
            mk.kind == marker_kind::cue_onset || mk.kind == marker_kind::stimulus_onset;
        if (needs_label != mk.label.has_value()) {
            os << "marker " << i << (needs_label ? " missing class label"
                                                 : " carries class label on rest onset");
            violations.push_back(os.str());
            os.str("");
        }
    }

    if (rec.sample_rate_hz <= 0.0) violations.push_back("sample_rate_hz not positive");
    return violations;
}

epoch_set::epoch_set(std::vector<Eigen::MatrixXf> trials, std::vector<class_label> labels,
                     std::pair<double, double> window_s, double sample_rate_hz)
    : trials_(std::move(trials)),
      labels_(std::move(labels)),
      window_s_(window_s),
      sample_rate_hz_(sample_rate_hz) {
    if (sample_rate_hz_ <= 0.0)
        fail(error_code::invalid_argument, "epoch_set: sample rate must be positive");
    if (window_s_.second <= window_s_.first)
        fail(error_code::invalid_argument, "epoch_set: window bounds must increase");
    if (labels_.size() != trials_.size())
        fail(error_code::invalid_argument, "epoch_set: labels length != trial count");
    const auto expected = static_cast<Eigen::Index>(
        std::llround((window_s_.second - window_s_.first) * sample_rate_hz_));
    for (std::size_t i = 0; i < trials_.size(); ++i) {
        if (trials_[i].cols() != expected) {
            std::ostringstream os;
            os << "epoch_set: trial " << i << " has " << trials_[i].cols()
               << " samples, window/rate imply " << expected;
            fail(error_code::invalid_argument, os.str());
        }
        if (trials_[i].rows() != trials_[0].rows())
            fail(error_code::invalid_argument, "epoch_set: inconsistent channel counts");
    }
}

epoch_set epoch_set::with_trials(std::vector<Eigen::MatrixXf> trials) const {
    return epoch_set(std::move(trials), labels_, window_s_, sample_rate_hz_);
}

epoch_set epoch_set::subset(const std::vector<int>& idx) const {
    std::vector<Eigen::MatrixXf> trials;
    std::vector<class_label> labels;
    trials.reserve(idx.size());
    labels.reserve(idx.size());
    for (int i : idx) {
        if (i < 0 || i >= n_trials())
            fail(error_code::invalid_argument,
                 "epoch_set::subset: trial index " + std::to_string(i) + " outside [0, " +
                     std::to_string(n_trials()) + ")");
        trials.push_back(trials_[static_cast<std::size_t>(i)]);
        labels.push_back(labels_[static_cast<std::size_t>(i)]);
    }
    return epoch_set(std::move(trials), std::move(labels), window_s_, sample_rate_hz_);
}

} // namespace vmi
