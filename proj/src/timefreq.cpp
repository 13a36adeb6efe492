#include "vmi/timefreq.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "vmi/dsp.hpp"
#include "vmi/errors.hpp"

namespace vmi {

namespace {

// 500 ms analysis frames: 2 Hz main-lobe resolution, enough for the alpha band
constexpr double k_frame_s = 0.5;

Eigen::VectorXd hann_window(Eigen::Index n) {
    Eigen::VectorXd w(n);
    for (Eigen::Index i = 0; i < n; ++i)
        w(i) = 0.5 * (1.0 - std::cos(2.0 * M_PI * static_cast<double>(i) /
                                     static_cast<double>(n)));
    return w;
}

// cos/sin analysis tables, window folded in; power normalization 2/(fs*sum w^2)
struct dft_bank {
    Eigen::MatrixXd cos_t; // [n_samples x n_freqs]
    Eigen::MatrixXd sin_t;
    double norm = 0.0;

    dft_bank(const std::vector<double>& freqs_hz, Eigen::Index n, double fs) {
        const Eigen::VectorXd w = hann_window(n);
        cos_t.resize(n, static_cast<Eigen::Index>(freqs_hz.size()));
        sin_t.resize(n, static_cast<Eigen::Index>(freqs_hz.size()));
        for (std::size_t k = 0; k < freqs_hz.size(); ++k) {
            const double step = 2.0 * M_PI * freqs_hz[k] / fs;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double a = step * static_cast<double>(i);
                cos_t(i, static_cast<Eigen::Index>(k)) = w(i) * std::cos(a);
                sin_t(i, static_cast<Eigen::Index>(k)) = w(i) * std::sin(a);
            }
        }
        norm = 2.0 / (fs * w.squaredNorm());
    }

    // one PSD column per input column
    Eigen::MatrixXd power(const Eigen::MatrixXd& frames) const {
        const Eigen::MatrixXd re = cos_t.transpose() * frames;
        const Eigen::MatrixXd im = sin_t.transpose() * frames;
        return norm * (re.array().square() + im.array().square()).matrix();
    }
};

double clamp_power(double p) {
    return std::max(p, std::numeric_limits<double>::min());
}

// sample index of cue-relative time t within an epoch starting at t0
Eigen::Index epoch_index(double t_s, double t0_s, double fs) {
    return static_cast<Eigen::Index>(std::llround(t_s * fs) - std::llround(t0_s * fs));
}

} // namespace

ersp_result compute_ersp(const epoch_set& es, int channel, const analysis_config& cfg,
                         const std::string& channel_label) {
    if (es.n_trials() < 1)
        fail(error_code::invalid_argument, "compute_ersp: empty epoch set");
    if (channel < 0 || channel >= es.n_channels())
        fail(error_code::invalid_argument,
             "compute_ersp: channel index " + std::to_string(channel) + " out of range");

    const double fs = es.sample_rate_hz();
    const double t0 = es.window_s().first;
    const double t1 = es.window_s().second;
    const double base_s = cfg.ersp_baseline_ms / 1000.0;

    if (t0 > -base_s + 1e-9) {
        std::ostringstream os;
        os << "compute_ersp: epochs start at " << t0 << " s but the baseline needs "
           << -base_s << " s of pre-cue data";
        fail(error_code::missing_baseline, os.str());
    }
    if (t1 - k_frame_s <= 1e-9)
        fail(error_code::epoch_too_short,
             "compute_ersp: post-cue interval shorter than one analysis frame");

    const Eigen::Index n_frame = static_cast<Eigen::Index>(std::llround(k_frame_s * fs));
    const Eigen::Index n_base = static_cast<Eigen::Index>(std::llround(base_s * fs));
    if (n_frame < 2 || n_base < 2)
        fail(error_code::epoch_too_short, "compute_ersp: analysis frame below 2 samples");

    ersp_result out;
    out.baseline_duration_ms = cfg.ersp_baseline_ms;
    out.channel = channel_label;

    const double f_lo = cfg.ersp_freq_range_hz.first;
    const double f_hi = cfg.ersp_freq_range_hz.second;
    for (double f = f_lo; f <= f_hi + 1e-9; f += 1.0) out.freqs_hz.push_back(f);
    const int n_freqs = static_cast<int>(out.freqs_hz.size());
    const int n_times = cfg.ersp_n_times;

    // frame centers spread evenly over the post-cue task interval
    const double c_lo = k_frame_s / 2.0;
    const double c_hi = t1 - k_frame_s / 2.0;
    out.times_s.resize(static_cast<std::size_t>(n_times));
    for (int i = 0; i < n_times; ++i)
        out.times_s[static_cast<std::size_t>(i)] =
            c_lo + (c_hi - c_lo) * static_cast<double>(i) /
                       static_cast<double>(n_times - 1);

    const dft_bank frame_bank(out.freqs_hz, n_frame, fs);
    const dft_bank base_bank(out.freqs_hz, n_base, fs);

    const Eigen::Index n_samples = es.n_samples();
    const Eigen::Index base_start = epoch_index(-base_s, t0, fs);
    if (base_start < 0 || base_start + n_base > n_samples)
        fail(error_code::missing_baseline, "compute_ersp: baseline window out of epoch");

    Eigen::MatrixXd power_sum = Eigen::MatrixXd::Zero(n_freqs, n_times);
    Eigen::VectorXd base_sum = Eigen::VectorXd::Zero(n_freqs);
    Eigen::MatrixXd frames(n_frame, n_times);

    for (int t = 0; t < es.n_trials(); ++t) {
        const Eigen::VectorXd x =
            es.trial(t).row(channel).transpose().cast<double>();
        for (int i = 0; i < n_times; ++i) {
            Eigen::Index start =
                std::llround(out.times_s[static_cast<std::size_t>(i)] * fs) -
                n_frame / 2 - std::llround(t0 * fs);
            start = std::clamp<Eigen::Index>(start, 0, n_samples - n_frame);
            frames.col(i) = x.segment(start, n_frame);
        }
        power_sum += frame_bank.power(frames);
        base_sum += base_bank.power(x.segment(base_start, n_base));
    }

    const double n_tr = static_cast<double>(es.n_trials());
    power_sum /= n_tr;
    base_sum /= n_tr;

    out.values_db.resize(n_freqs, n_times);
    for (int k = 0; k < n_freqs; ++k) {
        const double denom = clamp_power(base_sum(k));
        for (int i = 0; i < n_times; ++i)
            out.values_db(k, i) = 10.0 * std::log10(clamp_power(power_sum(k, i)) / denom);
    }
    return out;
}

std::vector<topography_frame> alpha_topography(const epoch_set& es, const montage& m,
                                               const analysis_config& cfg, topo_mode mode) {
    if (static_cast<Eigen::Index>(m.channels.size()) != es.n_channels())
        fail(error_code::dimension_mismatch,
             "alpha_topography: montage channel count does not match epochs");
    if (es.n_trials() < 1)
        fail(error_code::invalid_argument, "alpha_topography: empty epoch set");

    const double fs = es.sample_rate_hz();
    const double t0 = es.window_s().first;
    const Eigen::Index n_samples = es.n_samples();

    struct span {
        Eigen::Index start = 0;
        Eigen::Index len = 0;
    };
    const auto resolve = [&](double a_ms, double b_ms, const char* what) {
        span s;
        s.start = epoch_index(a_ms / 1000.0, t0, fs);
        s.len = std::llround((b_ms - a_ms) / 1000.0 * fs);
        if (s.len < 2 || s.start < 0 || s.start + s.len > n_samples) {
            std::ostringstream os;
            os << "alpha_topography: " << what << " [" << a_ms << ", " << b_ms
               << ") ms not inside the provided epochs";
            fail(error_code::window_out_of_epoch, os.str());
        }
        return s;
    };

    std::vector<span> spans;
    for (const auto& w : cfg.topo_windows_ms)
        spans.push_back(resolve(w.first, w.second, "window"));
    span base{};
    if (mode == topo_mode::db_vs_baseline)
        base = resolve(-cfg.ersp_baseline_ms, 0.0, "baseline window");

    const iir_filter filt =
        design_butterworth_bandpass(cfg.filter_order, cfg.alpha_band_hz.first,
                                    cfg.alpha_band_hz.second, fs);

    const Eigen::Index n_ch = es.n_channels();
    const auto window_var = [](const Eigen::MatrixXf& x, const span& s) {
        Eigen::VectorXd v(x.rows());
        for (Eigen::Index c = 0; c < x.rows(); ++c) {
            const Eigen::VectorXd seg =
                x.row(c).segment(s.start, s.len).transpose().cast<double>();
            const double mean = seg.mean();
            v(c) = (seg.array() - mean).square().sum() / static_cast<double>(s.len);
        }
        return v;
    };

    std::vector<Eigen::VectorXd> win_sum(spans.size(), Eigen::VectorXd::Zero(n_ch));
    Eigen::VectorXd base_sum = Eigen::VectorXd::Zero(n_ch);
    for (int t = 0; t < es.n_trials(); ++t) {
        const Eigen::MatrixXf filtered = apply_zero_phase(filt, es.trial(t));
        for (std::size_t w = 0; w < spans.size(); ++w)
            win_sum[w] += window_var(filtered, spans[w]);
        if (mode == topo_mode::db_vs_baseline) base_sum += window_var(filtered, base);
    }

    const double n_tr = static_cast<double>(es.n_trials());
    std::vector<topography_frame> frames;
    for (std::size_t w = 0; w < spans.size(); ++w) {
        topography_frame f;
        f.window_ms = cfg.topo_windows_ms[w];
        f.layout = m;
        if (mode == topo_mode::raw_power) {
            f.values = win_sum[w] / n_tr;
        } else {
            f.values.resize(n_ch);
            for (Eigen::Index c = 0; c < n_ch; ++c)
                f.values(c) = 10.0 * std::log10(clamp_power(win_sum[w](c) / n_tr) /
                                                clamp_power(base_sum(c) / n_tr));
        }
        frames.push_back(std::move(f));
    }
    return frames;
}

double occipital_mean(const topography_frame& frame) {
    if (frame.layout.occipital_cluster.empty())
        fail(error_code::invalid_argument,
             "occipital_mean: montage has no occipital cluster");
    double sum = 0.0;
    for (const std::string& label : frame.layout.occipital_cluster) {
        const int idx = frame.layout.index_of(label);
        if (idx < 0 || idx >= frame.values.size())
            fail(error_code::unknown_channel, "occipital_mean: " + label);
        sum += frame.values(idx);
    }
    return sum / static_cast<double>(frame.layout.occipital_cluster.size());
}

Eigen::MatrixXd interpolate_scalp(const topography_frame& frame, int grid_n) {
    if (grid_n < 16)
        fail(error_code::invalid_argument, "interpolate_scalp: grid_n must be >= 16");
    const std::size_t n_ch = frame.layout.channels.size();
    if (n_ch == 0)
        fail(error_code::invalid_argument, "interpolate_scalp: frame has no channels");
    if (static_cast<Eigen::Index>(n_ch) != frame.values.size())
        fail(error_code::dimension_mismatch,
             "interpolate_scalp: frame values do not match the montage");

    const double nan = std::numeric_limits<double>::quiet_NaN();
    Eigen::MatrixXd grid = Eigen::MatrixXd::Constant(grid_n, grid_n, nan);
    const std::size_t k_near = std::min<std::size_t>(8, n_ch);

    std::vector<std::pair<double, int>> dist(n_ch);
    for (int i = 0; i < grid_n; ++i) {
        // row 0 is the top of the head (y decreasing down the rows)
        const double y = 1.2 - 2.4 * (static_cast<double>(i) + 0.5) /
                                   static_cast<double>(grid_n);
        for (int j = 0; j < grid_n; ++j) {
            const double x = -1.2 + 2.4 * (static_cast<double>(j) + 0.5) /
                                        static_cast<double>(grid_n);
            if (x * x + y * y > 1.2 * 1.2) continue;

            for (std::size_t c = 0; c < n_ch; ++c) {
                const double dx = x - frame.layout.channels[c].x;
                const double dy = y - frame.layout.channels[c].y;
                dist[c] = {dx * dx + dy * dy, static_cast<int>(c)};
            }
            std::partial_sort(dist.begin(), dist.begin() + static_cast<long>(k_near),
                              dist.end());

            if (dist[0].first < 1e-24) {
                grid(i, j) = frame.values(dist[0].second);
                continue;
            }
            double wsum = 0.0, vsum = 0.0;
            for (std::size_t k = 0; k < k_near; ++k) {
                const double w = 1.0 / dist[k].first; // inverse squared distance
                wsum += w;
                vsum += w * frame.values(dist[k].second);
            }
            grid(i, j) = vsum / wsum;
        }
    }
    return grid;
}

} // namespace vmi
