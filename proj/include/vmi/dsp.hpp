#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "vmi/types.hpp"

namespace vmi {

enum class filter_kind { butterworth_bandpass, notch };

struct filter_design_info {
    filter_kind kind = filter_kind::butterworth_bandpass;
    int order = 0;
    std::pair<double, double> band_hz{0.0, 0.0};
    double fs_hz = 0.0;
};

// one second-order section, a0 normalized to 1
struct biquad {
    double b0 = 0.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

struct iir_filter {
    std::vector<biquad> sections;
    filter_design_info design;

    // |H(e^{j2*pi*f/fs})| of the cascade
    double magnitude_at(double f_hz) const;
    // largest pole modulus over all sections
    double max_pole_radius() const;
};

// digital bandpass: analog Butterworth prototype -> lowpass-to-bandpass
// transform -> bilinear transform with frequency prewarping; an order-n
// prototype yields exactly n stable sections
iir_filter design_butterworth_bandpass(int order, double low_hz, double high_hz, double fs_hz);

// second-order notch with zero pair on the unit circle at f0
iir_filter design_notch(double f0_hz, double q, double fs_hz);

// forward-backward filtering with odd-reflection edge padding of length
// 3*(2*sections+1); zero net phase, output length == input length
std::vector<double> apply_zero_phase(const iir_filter& f, const std::vector<double>& x);

// row-wise zero-phase filtering of a channels-x-samples block (float storage,
// double math)
Eigen::MatrixXf apply_zero_phase(const iir_filter& f, const Eigen::MatrixXf& x);

// filter every trial of an epoch set
epoch_set apply_zero_phase(const iir_filter& f, const epoch_set& es);

// slice [marker + round(t_start*fs), marker + round(t_end*fs)) around every
// marker of the requested kind; trials ordered by marker position
epoch_set extract_epochs(const continuous_recording& rec, std::pair<double, double> window_s,
                         marker_kind which);

// per trial and channel: variance of the band-filtered epoch, in µV²
Eigen::MatrixXd band_power(const epoch_set& es, std::pair<double, double> band_hz,
                           int order = 3);

} // namespace vmi
