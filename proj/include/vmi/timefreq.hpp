#pragma once

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "vmi/types.hpp"

namespace vmi {

// trial-averaged time-frequency power, dB versus the pre-cue rest baseline
struct ersp_result {
    Eigen::MatrixXd values_db;    // [n_freqs x n_times]
    std::vector<double> freqs_hz; // strictly increasing, 1 Hz spacing
    std::vector<double> times_s;  // cue-relative frame centers, strictly increasing
    std::string baseline_source = "rest-phase end";
    double baseline_duration_ms = 0.0;
    std::string channel;
};

// per-channel alpha power over one analysis window
struct topography_frame {
    std::pair<double, double> window_ms{0.0, 0.0}; // cue-relative
    Eigen::VectorXd values;                        // one per montage channel
    montage layout;
};

enum class topo_mode { raw_power, db_vs_baseline };

// sliding Hann-windowed DFT on one channel: 500 ms frames whose centers are
// spread evenly over the post-cue task interval (hop adapts so the output is
// always n_freqs x ersp_n_times); power is trial-averaged, then normalized per
// frequency by the trial-averaged power of the pre-cue baseline window
ersp_result compute_ersp(const epoch_set& es, int channel, const analysis_config& cfg,
                         const std::string& channel_label = {});

// alpha band power per channel over the four task windows; epochs are
// zero-phase filtered once as a whole so window slices carry no edge
// transients; db_vs_baseline divides trial-averaged window power by
// trial-averaged pre-cue baseline power before taking 10*log10
std::vector<topography_frame> alpha_topography(const epoch_set& es, const montage& m,
                                               const analysis_config& cfg, topo_mode mode);

// mean of the frame's occipital-cluster channels
double occipital_mean(const topography_frame& frame);

// inverse-distance-weighted interpolation (power 2, 8 nearest channels) on a
// grid_n x grid_n grid over [-1.2, 1.2]^2; cells with radius > 1.2 are NaN
Eigen::MatrixXd interpolate_scalp(const topography_frame& frame, int grid_n);

} // namespace vmi
