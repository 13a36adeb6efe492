#include "vmi/synth.hpp"

#include <algorithm>
#include <cmath>

#include "vmi/dsp.hpp"
#include "vmi/errors.hpp"
#include "vmi/rng.hpp"

namespace vmi {

namespace {

// economy pink-noise filter (three one-pole stages plus a direct term); the
// divisor is the analytic stationary standard deviation of the raw output
constexpr double k_pink_std = 2.978780452138954;
constexpr int k_pink_burn_in = 2000;

struct pink_source {
    double b1 = 0.0, b2 = 0.0, b3 = 0.0;

    double step(double w) {
        b1 = 0.99765 * b1 + w * 0.0990460;
        b2 = 0.96300 * b2 + w * 0.2965164;
        b3 = 0.57000 * b3 + w * 1.0526913;
        return (b1 + b2 + b3 + w * 0.1848) / k_pink_std;
    }
};

void check_config(const synth_config& cfg) {
    if (cfg.n_trials_per_class < 1)
        fail(error_code::invalid_argument, "synth: n_trials_per_class must be >= 1");
    if (!(cfg.fs_hz > 0.0))
        fail(error_code::invalid_argument, "synth: fs_hz must be positive");
    if (!(cfg.envelope_gain > 1.0))
        fail(error_code::invalid_argument, "synth: envelope_gain must be > 1");
    if (!(cfg.rest_s > 0.0) || !(cfg.task_s > cfg.cue_s) || !(cfg.cue_s > 0.0))
        fail(error_code::invalid_argument, "synth: trial layout durations invalid");
    if (cfg.n_pink_sources < 1)
        fail(error_code::invalid_argument, "synth: n_pink_sources must be >= 1");
    for (double a : cfg.class_amp_uv)
        if (a < 0.0) fail(error_code::invalid_argument, "synth: negative amplitude");
}

// unmixed noise for one trial; normals drawn source-major then channel-major
// so the stream layout is part of the generator's contract
Eigen::MatrixXd trial_noise(const synth_config& cfg, Eigen::Index n_samples,
                            const Eigen::MatrixXd& mixing, rng& r) {
    const int n_pk = cfg.n_pink_sources;
    Eigen::MatrixXd pink(n_pk, n_samples);
    for (int s = 0; s < n_pk; ++s) {
        pink_source src;
        for (int i = 0; i < k_pink_burn_in; ++i) src.step(r.normal());
        for (Eigen::Index i = 0; i < n_samples; ++i) pink(s, i) = src.step(r.normal());
    }
    const Eigen::Index n_ch = mixing.rows();
    Eigen::MatrixXd white(n_ch, n_samples);
    for (Eigen::Index c = 0; c < n_ch; ++c)
        for (Eigen::Index i = 0; i < n_samples; ++i) white(c, i) = r.normal();
    return cfg.sigma_pink_uv * (mixing * pink) + cfg.sigma_white_uv * white;
}

Eigen::MatrixXd draw_mixing(const synth_config& cfg, Eigen::Index n_ch, rng& r) {
    Eigen::MatrixXd g(n_ch, cfg.n_pink_sources);
    const double scale = 1.0 / std::sqrt(static_cast<double>(cfg.n_pink_sources));
    for (Eigen::Index i = 0; i < n_ch; ++i)
        for (int j = 0; j < cfg.n_pink_sources; ++j) g(i, j) = r.normal() * scale;
    return g;
}

// source waveform over one whole trial (rest envelope is 1)
Eigen::VectorXd trial_source(const synth_config& cfg, double amp, double f_hz,
                             double phase, Eigen::Index n_rest, Eigen::Index n_samples) {
    Eigen::VectorXd src(n_samples);
    for (Eigen::Index n = 0; n < n_samples; ++n) {
        const double t = static_cast<double>(n) / cfg.fs_hz;
        const double env =
            n < n_rest
                ? 1.0
                : task_envelope(cfg.kind,
                                static_cast<double>(n - n_rest) / cfg.fs_hz, cfg);
        src(n) = amp * env * std::sin(2.0 * M_PI * f_hz * t + phase);
    }
    return src;
}

} // namespace

synth_config synth_preset(const std::string& name, session_kind kind, std::uint64_t seed) {
    synth_config cfg;
    cfg.kind = kind;
    cfg.seed = seed;
    double amp = 0.0;
    if (name == "high")
        amp = 10.0;
    else if (name == "low")
        amp = 0.4;
    else if (name == "null")
        amp = 0.0;
    else
        fail(error_code::invalid_argument,
             "synth_preset: unknown preset '" + name + "' (high, low, null)");
    cfg.class_amp_uv = {amp, amp, amp, amp};
    return cfg;
}

Eigen::MatrixXd class_patterns(const montage& m) {
    struct blob {
        double cx, cy, sigma;
    };
    // class-specific occipito-parietal centers plus a shared occipital blob
    static constexpr blob k_class_blobs[4] = {{-0.35, -0.88, 0.32},
                                              {0.35, -0.88, 0.32},
                                              {0.0, -1.0, 0.32},
                                              {0.0, -0.68, 0.32}};
    static constexpr blob k_common{0.0, -0.88, 0.50};

    const auto gauss = [](const blob& b, double x, double y) {
        const double dx = x - b.cx, dy = y - b.cy;
        return std::exp(-(dx * dx + dy * dy) / (2.0 * b.sigma * b.sigma));
    };

    const Eigen::Index n_ch = static_cast<Eigen::Index>(m.channels.size());
    Eigen::MatrixXd p(n_ch, 4);
    for (int c = 0; c < 4; ++c) {
        for (Eigen::Index i = 0; i < n_ch; ++i) {
            const double x = m.channels[static_cast<std::size_t>(i)].x;
            const double y = m.channels[static_cast<std::size_t>(i)].y;
            p(i, c) = gauss(k_class_blobs[c], x, y) + 0.5 * gauss(k_common, x, y);
        }
        p.col(c).normalize();
    }
    return p;
}

double task_envelope(session_kind kind, double t_s, const synth_config& cfg) {
    const double g = cfg.envelope_gain;
    if (kind == session_kind::imagery) {
        // ramp from 1x to gain x, starting after the auditory cue
        const double u =
            std::clamp((t_s - cfg.cue_s) / (cfg.task_s - cfg.cue_s), 0.0, 1.0);
        return 1.0 + (g - 1.0) * u;
    }
    // perception: quick drop to 1/gain at stimulus onset
    const double u = std::clamp(t_s / (cfg.cue_s / 2.0), 0.0, 1.0);
    return 1.0 - (1.0 - 1.0 / g) * u;
}

continuous_recording generate_session(const synth_config& cfg) {
    check_config(cfg);

    continuous_recording rec;
    rec.layout = default_montage();
    rec.sample_rate_hz = cfg.fs_hz;
    rec.kind = cfg.kind;

    const Eigen::Index n_ch = static_cast<Eigen::Index>(rec.layout.channels.size());
    const Eigen::Index n_rest = std::llround(cfg.rest_s * cfg.fs_hz);
    const Eigen::Index n_trial = n_rest + std::llround(cfg.task_s * cfg.fs_hz);
    const int n_trials = 4 * cfg.n_trials_per_class;

    const Eigen::MatrixXd patterns = class_patterns(rec.layout);

    rng r(cfg.seed);
    const Eigen::MatrixXd mixing = draw_mixing(cfg, n_ch, r);

    std::vector<class_label> order;
    order.reserve(static_cast<std::size_t>(n_trials));
    for (class_label c : all_classes())
        for (int i = 0; i < cfg.n_trials_per_class; ++i) order.push_back(c);
    r.shuffle(order);

    rec.data.resize(n_ch, static_cast<Eigen::Index>(n_trials) * n_trial);

    for (int k = 0; k < n_trials; ++k) {
        const class_label cls = order[static_cast<std::size_t>(k)];
        const double f_hz = r.uniform(9.0, 11.0);
        const double phase = r.uniform(0.0, 2.0 * M_PI);

        Eigen::MatrixXd trial = trial_noise(cfg, n_trial, mixing, r);
        const double amp = cfg.class_amp_uv[static_cast<std::size_t>(cls)];
        if (amp > 0.0)
            trial.noalias() += patterns.col(static_cast<int>(cls)) *
                               trial_source(cfg, amp, f_hz, phase, n_rest, n_trial)
                                   .transpose();

        const Eigen::Index offset = static_cast<Eigen::Index>(k) * n_trial;
        rec.data.block(0, offset, n_ch, n_trial) = trial.cast<float>();
        rec.markers.push_back({offset, marker_kind::rest_onset, std::nullopt});
        rec.markers.push_back({offset + n_rest, marker_kind::cue_onset, cls});
    }
    return rec;
}

double bayes_reference_accuracy(const synth_config& cfg, int n_mc) {
    check_config(cfg);
    if (n_mc < 1) fail(error_code::invalid_argument, "bayes_reference_accuracy: n_mc < 1");

    const montage m = default_montage();
    const Eigen::Index n_ch = static_cast<Eigen::Index>(m.channels.size());
    const Eigen::Index n_rest = std::llround(cfg.rest_s * cfg.fs_hz);
    const Eigen::Index n_trial = n_rest + std::llround(cfg.task_s * cfg.fs_hz);
    // classify the same segment the pipeline uses, in the same alpha band
    const Eigen::Index e0 = n_rest + std::llround(0.5 * cfg.fs_hz);
    const Eigen::Index e1 = n_rest + std::llround(4.0 * cfg.fs_hz);
    const Eigen::Index n_ep = e1 - e0;
    const iir_filter filt = design_butterworth_bandpass(3, 8.0, 13.0, cfg.fs_hz);

    const Eigen::MatrixXd patterns = class_patterns(m);

    // the oracle's RNG stream is independent of generate_session's
    rng r(cfg.seed + 777);
    const Eigen::MatrixXd mixing = draw_mixing(cfg, n_ch, r);

    // noise covariance of one alpha-filtered epoch sample, by Monte Carlo over
    // noise-only trials (the generative noise model has no closed form here)
    constexpr int k_noise_trials = 48;
    Eigen::MatrixXd sigma_n = Eigen::MatrixXd::Zero(n_ch, n_ch);
    for (int k = 0; k < k_noise_trials; ++k) {
        const Eigen::MatrixXd noise = trial_noise(cfg, n_trial, mixing, r);
        const Eigen::MatrixXf epoch =
            apply_zero_phase(filt, noise.block(0, e0, n_ch, n_ep).cast<float>());
        const Eigen::MatrixXd x = epoch.cast<double>();
        sigma_n.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    sigma_n.triangularView<Eigen::StrictlyUpper>() = sigma_n.transpose();
    sigma_n /= static_cast<double>(k_noise_trials) * static_cast<double>(n_ep);
    sigma_n += 1e-12 * (sigma_n.trace() / static_cast<double>(n_ch)) *
               Eigen::MatrixXd::Identity(n_ch, n_ch);

    const Eigen::LLT<Eigen::MatrixXd> llt(sigma_n);
    Eigen::MatrixXd u(n_ch, 4); // whitened-matched directions per class
    Eigen::Vector4d q;
    for (int c = 0; c < 4; ++c) {
        u.col(c) = llt.solve(patterns.col(c));
        q(c) = patterns.col(c).dot(u.col(c));
    }

    // per class and epoch sample: expected source power s_t = (amp*env)^2/2,
    // gain a_t = s_t/(1+s_t*q) and the log-det term of the rank-1 update
    Eigen::MatrixXd gain(n_ep, 4);
    Eigen::Vector4d logdet = Eigen::Vector4d::Zero();
    for (int c = 0; c < 4; ++c) {
        const double amp = cfg.class_amp_uv[static_cast<std::size_t>(c)];
        for (Eigen::Index i = 0; i < n_ep; ++i) {
            const double t_task = static_cast<double>(e0 - n_rest + i) / cfg.fs_hz;
            const double env = task_envelope(cfg.kind, t_task, cfg);
            const double s = amp * amp * env * env / 2.0;
            gain(i, c) = s / (1.0 + s * q(c));
            logdet(c) += std::log(1.0 + s * q(c));
        }
    }

    int correct = 0;
    for (int k = 0; k < n_mc; ++k) {
        const int truth = static_cast<int>(r.uniform_index(4));
        const double f_hz = r.uniform(9.0, 11.0);
        const double phase = r.uniform(0.0, 2.0 * M_PI);

        Eigen::MatrixXd trial = trial_noise(cfg, n_trial, mixing, r);
        const double amp = cfg.class_amp_uv[static_cast<std::size_t>(truth)];
        if (amp > 0.0)
            trial.noalias() += patterns.col(truth) *
                               trial_source(cfg, amp, f_hz, phase, n_rest, n_trial)
                                   .transpose();

        // project first, then filter: filtering commutes with fixed channel
        // combinations, and 4 traces are cheaper than 64 channels
        const Eigen::MatrixXd proj = u.transpose() * trial.block(0, e0, n_ch, n_ep);
        int best = 0;
        double best_d = 0.0;
        for (int c = 0; c < 4; ++c) {
            std::vector<double> y(static_cast<std::size_t>(n_ep));
            for (Eigen::Index i = 0; i < n_ep; ++i)
                y[static_cast<std::size_t>(i)] = proj(c, i);
            const std::vector<double> yf = apply_zero_phase(filt, y);
            double d = -logdet(c);
            for (Eigen::Index i = 0; i < n_ep; ++i) {
                const double v = yf[static_cast<std::size_t>(i)];
                d += gain(i, c) * v * v;
            }
            if (c == 0 || d > best_d) {
                best = c;
                best_d = d;
            }
        }
        if (best == truth) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(n_mc);
}

} // namespace vmi
