#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <string>

#include "vmi/types.hpp"

namespace vmi {

// linear forward model: one class-specific occipito-parietal alpha source per
// trial (active the whole trial, enveloped per session kind over the task),
// mixed pink-noise background plus white sensor noise
struct synth_config {
    session_kind kind = session_kind::imagery;
    int n_trials_per_class = 50;
    double fs_hz = 1000.0;
    double rest_s = 3.0;
    double cue_s = 0.5; // auditory-cue span at task start; the imagery ramp begins after it
    double task_s = 5.0;
    std::array<double, 4> class_amp_uv{10.0, 10.0, 10.0, 10.0};
    double envelope_gain = 2.0; // task amplitude reaches gain x (imagery) or 1/gain (perception)
    double sigma_pink_uv = 3.0;
    double sigma_white_uv = 2.0;
    int n_pink_sources = 16;
    std::uint64_t seed = 42;
};

// named amplitude presets: "high" (10 µV), "low" (0.4 µV), "null" (0 µV)
synth_config synth_preset(const std::string& name, session_kind kind, std::uint64_t seed);

// unit-norm spatial loading per class over the montage: four occipito-parietal
// Gaussian blobs plus a shared occipital component
Eigen::MatrixXd class_patterns(const montage& m);

// source amplitude multiplier at task time t (cue onset = 0)
double task_envelope(session_kind kind, double t_s, const synth_config& cfg);

continuous_recording generate_session(const synth_config& cfg);

// Monte Carlo accuracy of the exact likelihood classifier that knows the true
// patterns, envelopes, and noise model; upper-bounds any trained pipeline
double bayes_reference_accuracy(const synth_config& cfg, int n_mc);

} // namespace vmi
