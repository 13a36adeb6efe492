#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vmi/timefreq.hpp"

namespace vmi {

// fixed 256-step blue-white-red ramp; value mapped over [lo, hi] and clipped
std::string ramp_color(double value, double lo, double hi);

// matrix heatmap (row 0 at the bottom); axis ranges label the corners only,
// so the output carries no text layout dependencies
std::string svg_heatmap(const Eigen::MatrixXd& values, double x_lo, double x_hi,
                        double y_lo, double y_hi, const std::string& title,
                        double clip_lo = -6.0, double clip_hi = 6.0);

// interpolated scalp map with head outline and electrode dots; NaN cells of
// the grid are left unpainted
std::string svg_scalp_map(const Eigen::MatrixXd& grid, const montage& m,
                          const std::string& title, double clip_lo = -6.0,
                          double clip_hi = 6.0);

} // namespace vmi
