#pragma once

#include <stdexcept>
#include <string>

namespace vmi {

enum class error_code {
    // io_brainvision
    missing_section,
    missing_key,
    channel_count_mismatch,
    unsupported_format,
    malformed_line,
    length_mismatch,
    unknown_marker_description,
    dynamic_range_overflow,
    // dsp
    invalid_band,
    signal_too_short,
    epoch_out_of_bounds,
    // spatial_csp
    insufficient_trials,
    singular_covariance,
    too_many_pairs,
    zero_variance_trial,
    // classify
    single_class,
    degenerate_covariance,
    dimension_mismatch,
    // timefreq
    missing_baseline,
    epoch_too_short,
    window_out_of_epoch,
    // cli / misc
    unknown_channel,
    io_error,
    config_error,
    invalid_argument,
};

const char* error_code_name(error_code c);

// every failure in the library surfaces as one of these; parsers never crash
// on arbitrary bytes, they throw a structured error instead
class error : public std::runtime_error {
public:
    error(error_code code, const std::string& message)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
          code_(code) {}

    error_code code() const { return code_; }

private:
    error_code code_;
};

[[noreturn]] inline void fail(error_code code, const std::string& message) {
    throw error(code, message);
}

} // namespace vmi
