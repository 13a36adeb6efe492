#include "vmi/types.hpp"

#include <cmath>

namespace vmi {

namespace {

struct electrode_row {
    const char* label;
    double theta_deg; // inclination from vertex
    double az_deg;    // azimuth from nasion, clockwise positive (right)
};

// idealized 10-10 spherical angles, standard 64-channel ordering.
// azimuthal-equidistant projection: rho = theta/90 puts the ear-level ring on
// the unit circle and the below-ear ring (theta=108) at radius 1.2 exactly.
constexpr electrode_row k_rows[64] = {
    {"Fp1", 90.0, -18.0},  {"Fp2", 90.0, 18.0},    {"F7", 90.0, -54.0},
    {"F3", 67.5, -27.0},   {"Fz", 45.0, 0.0},      {"F4", 67.5, 27.0},
    {"F8", 90.0, 54.0},    {"FC5", 73.125, -54.0}, {"FC1", 39.375, -18.0},
    {"FC2", 39.375, 18.0}, {"FC6", 73.125, 54.0},  {"T7", 90.0, -90.0},
    {"C3", 45.0, -90.0},   {"Cz", 0.0, 0.0},       {"C4", 45.0, 90.0},
    {"T8", 90.0, 90.0},    {"TP9", 108.0, -108.0}, {"CP5", 73.125, -126.0},
    {"CP1", 39.375, -162.0}, {"CP2", 39.375, 162.0}, {"CP6", 73.125, 126.0},
    {"TP10", 108.0, 108.0}, {"P7", 90.0, -126.0},  {"P3", 67.5, -153.0},
    {"Pz", 45.0, 180.0},   {"P4", 67.5, 153.0},    {"P8", 90.0, 126.0},
    {"PO9", 108.0, -144.0}, {"O1", 90.0, -162.0},  {"Oz", 90.0, 180.0},
    {"O2", 90.0, 162.0},   {"PO10", 108.0, 144.0}, {"AF7", 90.0, -36.0},
    {"AF3", 78.75, -18.0}, {"AF4", 78.75, 18.0},   {"AF8", 90.0, 36.0},
    {"F5", 78.75, -40.5},  {"F1", 56.25, -13.5},   {"F2", 56.25, 13.5},
    {"F6", 78.75, 40.5},   {"FT9", 108.0, -72.0},  {"FT7", 90.0, -72.0},
    {"FC3", 56.25, -36.0}, {"FC4", 56.25, 36.0},   {"FT8", 90.0, 72.0},
    {"FT10", 108.0, 72.0}, {"C5", 67.5, -90.0},    {"C1", 22.5, -90.0},
    {"C2", 22.5, 90.0},    {"C6", 67.5, 90.0},     {"TP7", 90.0, -108.0},
    {"CP3", 56.25, -144.0}, {"CPz", 22.5, 180.0},  {"CP4", 56.25, 144.0},
    {"TP8", 90.0, 108.0},  {"P5", 78.75, -139.5},  {"P1", 56.25, -166.5},
    {"P2", 56.25, 166.5},  {"P6", 78.75, 139.5},   {"PO7", 90.0, -144.0},
    {"PO3", 78.75, -162.0}, {"POz", 67.5, 180.0},  {"PO4", 78.75, 162.0},
    {"PO8", 90.0, 144.0},
};

montage build_default_montage() {
    montage m;
    m.channels.reserve(64);
    for (const auto& row : k_rows) {
        const double rho = row.theta_deg / 90.0;
        const double az = row.az_deg * M_PI / 180.0;
        channel_info ch;
        ch.label = row.label;
        ch.x = rho * std::sin(az);
        ch.y = rho * std::cos(az);
        m.channels.push_back(std::move(ch));
    }
    m.occipital_cluster = {"O1", "Oz", "O2", "PO3", "POz", "PO4", "PO7", "PO8"};
    return m;
}

} // namespace

const montage& default_montage() {
    static const montage m = build_default_montage();
    return m;
}

int montage::index_of(const std::string& label) const {
    for (std::size_t i = 0; i < channels.size(); ++i)
        if (channels[i].label == label) return static_cast<int>(i);
    return -1;
}

} // namespace vmi
