#include "vmi/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vmi {

namespace {

using cplx = std::complex<double>;

// steady-state initial condition of one transposed-DF2 section for a unit
// step: z = (I - A)^{-1} B with A = [[-a1, 1], [-a2, 0]], B = [b1-b0*a1, b2-b0*a2]
std::pair<double, double> section_step_state(const biquad& s) {
    const double b1 = s.b1 - s.b0 * s.a1;
    const double b2 = s.b2 - s.b0 * s.a2;
    // (I - A) = [[1+a1, -1], [a2, 1]]
    const double det = (1.0 + s.a1) + s.a2; // determinant of the 2x2 above
    const double z0 = (b1 + b2) / det;
    const double z1 = b2 - s.a2 * z0;
    return {z0, z1};
}

// single forward pass over x with given initial state, transposed DF2
void run_section(const biquad& s, std::vector<double>& x, double z0, double z1) {
    for (double& v : x) {
        const double in = v;
        const double out = s.b0 * in + z0;
        z0 = s.b1 * in - s.a1 * out + z1;
        z1 = s.b2 * in - s.a2 * out;
        v = out;
    }
}

} // namespace

double iir_filter::magnitude_at(double f_hz) const {
    const double w = 2.0 * M_PI * f_hz / design.fs_hz;
    const cplx e1 = std::polar(1.0, -w);
    const cplx e2 = std::polar(1.0, -2.0 * w);
    cplx h(1.0, 0.0);
    for (const auto& s : sections)
        h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
    return std::abs(h);
}

double iir_filter::max_pole_radius() const {
    double r = 0.0;
    for (const auto& s : sections) {
        const double disc = s.a1 * s.a1 - 4.0 * s.a2;
        if (disc < 0.0) {
            r = std::max(r, std::sqrt(s.a2));
        } else {
            const double sq = std::sqrt(disc);
            r = std::max({r, std::abs((-s.a1 + sq) / 2.0), std::abs((-s.a1 - sq) / 2.0)});
        }
    }
    return r;
}

iir_filter design_butterworth_bandpass(int order, double low_hz, double high_hz, double fs_hz) {
    if (order < 1) fail(error_code::invalid_band, "filter order must be >= 1");
    if (!(0.0 < low_hz && low_hz < high_hz && high_hz < fs_hz / 2.0)) {
        std::ostringstream os;
        os << "need 0 < low < high < fs/2, got low=" << low_hz << " high=" << high_hz
           << " fs=" << fs_hz;
        fail(error_code::invalid_band, os.str());
    }

    // prewarped analog band edges
    const double fs2 = 2.0 * fs_hz;
    const double w1 = fs2 * std::tan(M_PI * low_hz / fs_hz);
    const double w2 = fs2 * std::tan(M_PI * high_hz / fs_hz);
    const double bw = w2 - w1;
    const double w0sq = w1 * w2;

    // analog Butterworth prototype poles (unit circle, left half-plane),
    // then lowpass->bandpass: each prototype pole p maps to the pair
    // s/2 +- sqrt((s/2)^2 - w0^2) with s = p*bw
    std::vector<cplx> poles;
    poles.reserve(static_cast<std::size_t>(2 * order));
    for (int k = 0; k < order; ++k) {
        const double ang = M_PI * (2.0 * k + order + 1.0) / (2.0 * order);
        const cplx p = std::polar(1.0, ang);
        const cplx half = p * (bw / 2.0);
        const cplx root = std::sqrt(half * half - w0sq);
        poles.push_back(half + root);
        poles.push_back(half - root);
    }

    // bilinear transform: zp = (fs2 + p) / (fs2 - p); overall digital gain
    // k = bw^order * fs2^order / prod(fs2 - p)
    cplx denom(1.0, 0.0);
    for (const cplx& p : poles) denom *= (fs2 - p);
    const double gain = (std::pow(bw * fs2, order) / denom).real();

    const auto to_z = [fs2](const cplx& p) { return (fs2 + p) / (fs2 - p); };

    // pair poles into real-coefficient sections: a complex prototype pole
    // contributes two conjugate pairs (one section each); the real prototype
    // pole of an odd order contributes one pair that is either conjugate or,
    // for wide bands, two real poles — both cases close under one section
    std::vector<std::pair<cplx, cplx>> pairs;
    pairs.reserve(static_cast<std::size_t>(order));
    for (int k = 0; 2 * k < order; ++k) {
        const cplx zp1 = to_z(poles[static_cast<std::size_t>(2 * k)]);
        const cplx zp2 = to_z(poles[static_cast<std::size_t>(2 * k + 1)]);
        if (2 * k + 1 == order) {
            pairs.emplace_back(zp1, zp2); // real prototype pole (odd order)
        } else {
            pairs.emplace_back(zp1, std::conj(zp1));
            pairs.emplace_back(zp2, std::conj(zp2));
        }
    }

    iir_filter f;
    f.design = {filter_kind::butterworth_bandpass, order, {low_hz, high_hz}, fs_hz};
    f.sections.reserve(static_cast<std::size_t>(order));
    for (int i = 0; i < order; ++i) {
        const auto& [p1, p2] = pairs[static_cast<std::size_t>(i)];
        biquad s;
        // numerator (z-1)(z+1) = z^2 - 1 gives every section one DC and one
        // Nyquist zero; total gain carried by the first section
        const double g = (i == 0) ? gain : 1.0;
        s.b0 = g;
        s.b1 = 0.0;
        s.b2 = -g;
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        f.sections.push_back(s);
    }
    if (f.max_pole_radius() >= 1.0)
        fail(error_code::invalid_band, "designed filter is unstable");
    return f;
}

iir_filter design_notch(double f0_hz, double q, double fs_hz) {
    if (!(0.0 < f0_hz && f0_hz < fs_hz / 2.0) || q <= 0.0) {
        std::ostringstream os;
        os << "need 0 < f0 < fs/2 and q > 0, got f0=" << f0_hz << " q=" << q
           << " fs=" << fs_hz;
        fail(error_code::invalid_band, os.str());
    }
    const double w0 = 2.0 * M_PI * f0_hz / fs_hz;
    const double alpha = std::sin(w0) / (2.0 * q);
    const double c = std::cos(w0);
    const double a0 = 1.0 + alpha;
    biquad s;
    s.b0 = 1.0 / a0;
    s.b1 = -2.0 * c / a0;
    s.b2 = 1.0 / a0;
    s.a1 = -2.0 * c / a0;
    s.a2 = (1.0 - alpha) / a0;
    iir_filter f;
    f.design = {filter_kind::notch, 2, {f0_hz, f0_hz}, fs_hz};
    f.sections.push_back(s);
    return f;
}

std::vector<double> apply_zero_phase(const iir_filter& f, const std::vector<double>& x) {
    const int pad = 3 * (2 * static_cast<int>(f.sections.size()) + 1);
    const int n = static_cast<int>(x.size());
    if (n <= pad) {
        std::ostringstream os;
        os << "signal length " << n << " must exceed padding length " << pad;
        fail(error_code::signal_too_short, os.str());
    }

    // odd reflection on both edges
    std::vector<double> ext(static_cast<std::size_t>(n + 2 * pad));
    for (int i = 0; i < pad; ++i)
        ext[static_cast<std::size_t>(i)] = 2.0 * x[0] - x[static_cast<std::size_t>(pad - i)];
    std::copy(x.begin(), x.end(), ext.begin() + pad);
    for (int i = 0; i < pad; ++i)
        ext[static_cast<std::size_t>(n + pad + i)] =
            2.0 * x[static_cast<std::size_t>(n - 1)] - x[static_cast<std::size_t>(n - 2 - i)];

    // forward pass; each section starts at its steady state for the current
    // first sample (the running cascade already carries upstream DC gains, so
    // ext.front() equals cumulative-gain * original first sample)
    for (const auto& s : f.sections) {
        const auto [z0, z1] = section_step_state(s);
        const double x0 = ext.front();
        run_section(s, ext, z0 * x0, z1 * x0);
    }
    // backward pass
    std::reverse(ext.begin(), ext.end());
    for (const auto& s : f.sections) {
        const auto [z0, z1] = section_step_state(s);
        const double x0 = ext.front();
        run_section(s, ext, z0 * x0, z1 * x0);
    }
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + pad, ext.begin() + pad + n);
}

Eigen::MatrixXf apply_zero_phase(const iir_filter& f, const Eigen::MatrixXf& x) {
    Eigen::MatrixXf out(x.rows(), x.cols());
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index ch = 0; ch < x.rows(); ++ch) {
        for (Eigen::Index i = 0; i < x.cols(); ++i)
            row[static_cast<std::size_t>(i)] = static_cast<double>(x(ch, i));
        const std::vector<double> y = apply_zero_phase(f, row);
        for (Eigen::Index i = 0; i < x.cols(); ++i)
            out(ch, i) = static_cast<float>(y[static_cast<std::size_t>(i)]);
    }
    return out;
}

epoch_set apply_zero_phase(const iir_filter& f, const epoch_set& es) {
    std::vector<Eigen::MatrixXf> filtered;
    filtered.reserve(static_cast<std::size_t>(es.n_trials()));
    for (int t = 0; t < es.n_trials(); ++t)
        filtered.push_back(apply_zero_phase(f, es.trial(t)));
    return es.with_trials(std::move(filtered));
}

epoch_set extract_epochs(const continuous_recording& rec, std::pair<double, double> window_s,
                         marker_kind which) {
    if (window_s.second <= window_s.first)
        fail(error_code::invalid_argument, "extract_epochs: window bounds must increase");
    const double fs = rec.sample_rate_hz;
    const std::int64_t off_a = std::llround(window_s.first * fs);
    const std::int64_t off_b = std::llround(window_s.second * fs);

    std::vector<Eigen::MatrixXf> trials;
    std::vector<class_label> labels;
    for (std::size_t i = 0; i < rec.markers.size(); ++i) {
        const auto& mk = rec.markers[i];
        if (mk.kind != which) continue;
        if (!mk.label.has_value())
            fail(error_code::invalid_argument, "extract_epochs: marker without class label");
        const std::int64_t a = mk.sample_index + off_a;
        const std::int64_t b = mk.sample_index + off_b;
        if (a < 0 || b > rec.n_samples()) {
            std::ostringstream os;
            os << "marker " << i << " at sample " << mk.sample_index << ": slice [" << a
               << ", " << b << ") exceeds recording of " << rec.n_samples() << " samples";
            fail(error_code::epoch_out_of_bounds, os.str());
        }
        trials.push_back(rec.data.middleCols(a, b - a));
        labels.push_back(*mk.label);
    }
    return epoch_set(std::move(trials), std::move(labels), window_s, fs);
}

Eigen::MatrixXd band_power(const epoch_set& es, std::pair<double, double> band_hz, int order) {
    const iir_filter f =
        design_butterworth_bandpass(order, band_hz.first, band_hz.second, es.sample_rate_hz());
    Eigen::MatrixXd power(es.n_trials(), es.n_channels());
    std::vector<double> row(static_cast<std::size_t>(es.n_samples()));
    for (int t = 0; t < es.n_trials(); ++t) {
        const Eigen::MatrixXf& x = es.trial(t);
        for (int ch = 0; ch < es.n_channels(); ++ch) {
            for (int i = 0; i < es.n_samples(); ++i)
                row[static_cast<std::size_t>(i)] = static_cast<double>(x(ch, i));
            const std::vector<double> y = apply_zero_phase(f, row);
            double mean = 0.0;
            for (double v : y) mean += v;
            mean /= static_cast<double>(y.size());
            double var = 0.0;
            for (double v : y) var += (v - mean) * (v - mean);
            power(t, ch) = var / static_cast<double>(y.size());
        }
    }
    return power;
}

} // namespace vmi
