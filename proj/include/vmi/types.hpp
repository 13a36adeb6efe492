#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vmi/errors.hpp"

namespace vmi {

// fixed class order; used for tie-breaking and report row order everywhere
enum class class_label : int {
    eating_food = 0,
    opening_door = 1,
    picking_up_phone = 2,
    pouring_water = 3,
};

inline constexpr int k_n_classes = 4;

const char* class_id(class_label c);           // "eating_food"
const char* class_display_name(class_label c); // "eating food"
std::optional<class_label> class_from_id(const std::string& id);

inline const std::array<class_label, 4>& all_classes() {
    static const std::array<class_label, 4> k = {
        class_label::eating_food, class_label::opening_door,
        class_label::picking_up_phone, class_label::pouring_water};
    return k;
}

enum class session_kind { perception, imagery };
const char* session_kind_name(session_kind k);
std::optional<session_kind> session_kind_from_name(const std::string& name);

enum class marker_kind { rest_onset, cue_onset, stimulus_onset };

struct channel_info {
    std::string label;
    double x = 0.0; // azimuthal-equidistant projection, head radius 1
    double y = 0.0;
    std::string unit = "µV";
};

struct montage {
    std::vector<channel_info> channels;
    std::vector<std::string> occipital_cluster;

    int index_of(const std::string& label) const; // -1 when absent
    int n_channels() const { return static_cast<int>(channels.size()); }
};

// standard 64-channel layout with projected positions and the default
// occipital cluster {O1, Oz, O2, PO3, POz, PO4, PO7, PO8}
const montage& default_montage();

struct marker_event {
    std::int64_t sample_index = 0; // 0-based
    marker_kind kind = marker_kind::cue_onset;
    std::optional<class_label> label; // present iff cue/stimulus onset
};

struct continuous_recording {
    montage layout;
    double sample_rate_hz = 1000.0;
    Eigen::MatrixXf data; // channels x samples, microvolts
    std::vector<marker_event> markers;
    session_kind kind = session_kind::imagery;

    std::int64_t n_samples() const { return data.cols(); }
    int n_channels() const { return static_cast<int>(data.rows()); }
};

// violations are data, not errors: each entry names the broken invariant and
// the offending index
std::vector<std::string> validate_recording(const continuous_recording& rec);

// trials x channels x samples with labels and window metadata; shape
// invariants are enforced by the only constructor, so a malformed set cannot
// exist
class epoch_set {
public:
    epoch_set(std::vector<Eigen::MatrixXf> trials, std::vector<class_label> labels,
              std::pair<double, double> window_s, double sample_rate_hz);

    int n_trials() const { return static_cast<int>(trials_.size()); }
    int n_channels() const { return trials_.empty() ? 0 : static_cast<int>(trials_[0].rows()); }
    int n_samples() const { return trials_.empty() ? 0 : static_cast<int>(trials_[0].cols()); }

    const Eigen::MatrixXf& trial(int i) const { return trials_.at(static_cast<std::size_t>(i)); }
    const std::vector<Eigen::MatrixXf>& trials() const { return trials_; }
    const std::vector<class_label>& labels() const { return labels_; }
    std::pair<double, double> window_s() const { return window_s_; }
    double sample_rate_hz() const { return sample_rate_hz_; }

    // new set with the same metadata and transformed trials of equal shape
    epoch_set with_trials(std::vector<Eigen::MatrixXf> trials) const;
    // subset by trial indices (CV folds)
    epoch_set subset(const std::vector<int>& idx) const;

private:
    std::vector<Eigen::MatrixXf> trials_;
    std::vector<class_label> labels_;
    std::pair<double, double> window_s_;
    double sample_rate_hz_;
};

enum class shrinkage_mode { analytic, fixed };

struct shrinkage_spec {
    shrinkage_mode mode = shrinkage_mode::analytic;
    double gamma = 0.0; // used when mode == fixed
};

struct cv_spec {
    int folds = 10;
    int repeats = 5;
    bool stratified = true;
    std::uint64_t seed = 42;
};

// analysis defaults; every constant the pipeline depends on lives here
struct analysis_config {
    std::pair<double, double> alpha_band_hz{8.0, 13.0};
    int filter_order = 3;
    std::pair<double, double> epoch_window_s{0.5, 4.0};
    std::pair<double, double> ersp_freq_range_hz{3.0, 50.0};
    int ersp_n_times = 200;
    double ersp_baseline_ms = 500.0;
    std::vector<std::pair<double, double>> topo_windows_ms{
        {0.0, 1000.0}, {1000.0, 2000.0}, {2000.0, 3000.0}, {3000.0, 4000.0}};
    int n_csp_pairs = 3;
    shrinkage_spec shrinkage;
    cv_spec cv;
    bool ovr_standardize_scores = false;
    bool notch_enabled = false;
    double notch_f0_hz = 60.0;
    double notch_q = 30.0;
};

} // namespace vmi
