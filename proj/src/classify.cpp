#include "vmi/classify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>

#include "vmi/rng.hpp"

namespace vmi {

namespace {

// per-trial covariance cache: the fold loop is pure 64x64 algebra over these
struct trial_stats {
    Eigen::MatrixXd cov_norm;    // XX^T / tr(XX^T), for CSP averaging
    Eigen::MatrixXd cov_center;  // XX^T/T - mean*mean^T, for log-variance features
    double fro2 = 0.0;           // ||cov_norm||_F^2, for Ledoit-Wolf
};

std::vector<trial_stats> compute_trial_stats(const epoch_set& es) {
    std::vector<trial_stats> stats(static_cast<std::size_t>(es.n_trials()));
    const double t_len = static_cast<double>(es.n_samples());
    for (int t = 0; t < es.n_trials(); ++t) {
        const Eigen::MatrixXd x = es.trial(t).cast<double>();
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(x.rows(), x.rows());
        gram.selfadjointView<Eigen::Lower>().rankUpdate(x);
        gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
        const double tr = gram.trace();
        if (tr <= 0.0)
            fail(error_code::zero_variance_trial,
                 "cross_validate: trial " + std::to_string(t) + " has zero energy");
        auto& s = stats[static_cast<std::size_t>(t)];
        s.cov_norm = gram / tr;
        const Eigen::VectorXd mean = x.rowwise().mean();
        s.cov_center = gram / t_len - mean * mean.transpose();
        s.fro2 = s.cov_norm.squaredNorm();
    }
    return stats;
}

// mean covariance and analytic shrinkage over a trial subset, from the cache
Eigen::MatrixXd pooled_shrunk(const std::vector<trial_stats>& stats,
                              const std::vector<int>& idx, const shrinkage_spec& spec) {
    Eigen::MatrixXd mean =
        Eigen::MatrixXd::Zero(stats[0].cov_norm.rows(), stats[0].cov_norm.cols());
    double fro_sum = 0.0;
    for (int i : idx) {
        mean += stats[static_cast<std::size_t>(i)].cov_norm;
        fro_sum += stats[static_cast<std::size_t>(i)].fro2;
    }
    const double n = static_cast<double>(idx.size());
    mean /= n;

    double gamma = spec.gamma;
    if (spec.mode == shrinkage_mode::analytic) {
        const double d = static_cast<double>(mean.rows());
        const double mu = mean.trace() / d;
        const double dist2 =
            (mean - mu * Eigen::MatrixXd::Identity(mean.rows(), mean.cols())).squaredNorm();
        if (dist2 <= 0.0) {
            gamma = 1.0;
        } else {
            const double b2 = (fro_sum - n * mean.squaredNorm()) / (n * n);
            gamma = std::min(1.0, std::max(0.0, b2 / dist2));
        }
    }
    return shrink_covariance(mean, gamma);
}

// log-variance features from the cached centered covariance
Eigen::VectorXd features_from_cov(const csp_model& m, const Eigen::MatrixXd& cov_center) {
    const Eigen::MatrixXd proj = m.filters * cov_center * m.filters.transpose();
    Eigen::VectorXd var = proj.diagonal();
    const double total = var.sum();
    if (!(total > 0.0) || (var.array() <= 0.0).any())
        fail(error_code::zero_variance_trial, "cross_validate: zero-variance projection");
    return (var.array() / total).log().matrix();
}

struct binary_fit {
    csp_model csp;
    rlda_model lda;
    double score_mean = 0.0;
    double score_sd = 1.0;
};

// fit one target-vs-rest CSP+RLDA on the given training trials (cache-driven)
binary_fit fit_binary(const epoch_set& es, const std::vector<trial_stats>& stats,
                      const std::vector<int>& train_idx, class_label target,
                      const analysis_config& cfg) {
    std::vector<int> tgt, rest;
    for (int i : train_idx) {
        if (es.labels()[static_cast<std::size_t>(i)] == target)
            tgt.push_back(i);
        else
            rest.push_back(i);
    }
    if (tgt.empty())
        fail(error_code::single_class,
             std::string("class ") + class_id(target) + " has no trials");
    if (tgt.size() < 2 || rest.size() < 2)
        fail(error_code::insufficient_trials,
             std::string("class ") + class_id(target) + ": need >= 2 trials per side");

    binary_fit fit;
    fit.csp = fit_csp(pooled_shrunk(stats, tgt, cfg.shrinkage),
                      pooled_shrunk(stats, rest, cfg.shrinkage), cfg.n_csp_pairs);
    fit.csp.target = target;

    Eigen::MatrixXd feats(train_idx.size(), 2 * cfg.n_csp_pairs);
    std::vector<int> y(train_idx.size());
    for (std::size_t r = 0; r < train_idx.size(); ++r) {
        const int i = train_idx[r];
        feats.row(static_cast<Eigen::Index>(r)) =
            features_from_cov(fit.csp, stats[static_cast<std::size_t>(i)].cov_center)
                .transpose();
        y[r] = es.labels()[static_cast<std::size_t>(i)] == target ? 1 : 0;
    }
    fit.lda = fit_rlda(feats, y, cfg.shrinkage);

    if (cfg.ovr_standardize_scores) {
        Eigen::VectorXd scores(feats.rows());
        for (Eigen::Index r = 0; r < feats.rows(); ++r)
            scores(r) = rlda_score(fit.lda, feats.row(r).transpose());
        fit.score_mean = scores.mean();
        const double var = (scores.array() - fit.score_mean).square().sum() /
                           std::max<double>(1.0, static_cast<double>(scores.size()) - 1.0);
        fit.score_sd = var > 0.0 ? std::sqrt(var) : 1.0;
    }
    return fit;
}

double standardized(const binary_fit& f, double score, bool standardize) {
    return standardize ? (score - f.score_mean) / f.score_sd : score;
}

} // namespace

std::vector<int> assign_folds(const std::vector<class_label>& labels, int folds, rng& r) {
    std::vector<int> fold_of(labels.size(), -1);
    for (class_label c : all_classes()) {
        std::vector<int> idx;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == c) idx.push_back(static_cast<int>(i));
        r.shuffle(idx);
        for (std::size_t k = 0; k < idx.size(); ++k)
            fold_of[static_cast<std::size_t>(idx[k])] = static_cast<int>(k) % folds;
    }
    return fold_of;
}

ovr_classifier train_ovr(const epoch_set& es, const analysis_config& cfg) {
    const std::vector<trial_stats> stats = compute_trial_stats(es);
    std::vector<int> all_idx(static_cast<std::size_t>(es.n_trials()));
    std::iota(all_idx.begin(), all_idx.end(), 0);

    ovr_classifier clf;
    clf.standardize_scores = cfg.ovr_standardize_scores;
    for (class_label c : all_classes()) {
        try {
            const binary_fit fit = fit_binary(es, stats, all_idx, c, cfg);
            clf.entries.push_back({c, fit.csp, fit.lda, fit.score_mean, fit.score_sd});
        } catch (const error& e) {
            if (e.code() == error_code::single_class ||
                e.code() == error_code::insufficient_trials)
                throw;
            // tag fit failures with the class, without duplicating the code prefix
            std::string msg = e.what();
            const std::string prefix = std::string(error_code_name(e.code())) + ": ";
            if (msg.rfind(prefix, 0) == 0) msg = msg.substr(prefix.size());
            fail(e.code(), std::string("class ") + class_id(c) + ": " + msg);
        }
    }
    return clf;
}

std::vector<class_label> predict(const ovr_classifier& clf, const epoch_set& es) {
    if (clf.entries.size() != static_cast<std::size_t>(k_n_classes))
        fail(error_code::invalid_argument, "predict: classifier has missing entries");
    if (!clf.entries.empty() && clf.entries[0].csp.filters.cols() != es.n_channels())
        fail(error_code::dimension_mismatch, "predict: channel count mismatch");

    Eigen::MatrixXd scores(es.n_trials(), k_n_classes);
    for (std::size_t e = 0; e < clf.entries.size(); ++e) {
        const auto& entry = clf.entries[e];
        const Eigen::MatrixXd feats = csp_features(entry.csp, es);
        for (Eigen::Index t = 0; t < feats.rows(); ++t) {
            double s = rlda_score(entry.lda, feats.row(t).transpose());
            if (clf.standardize_scores) s = (s - entry.score_mean) / entry.score_sd;
            scores(t, static_cast<Eigen::Index>(e)) = s;
        }
    }

    std::vector<class_label> out(static_cast<std::size_t>(es.n_trials()));
    for (int t = 0; t < es.n_trials(); ++t) {
        int best = 0;
        for (int c = 1; c < k_n_classes; ++c)
            if (scores(t, c) > scores(t, best)) best = c; // ties keep first class
        out[static_cast<std::size_t>(t)] = all_classes()[static_cast<std::size_t>(best)];
    }
    return out;
}

eval_report cross_validate(const epoch_set& es, const analysis_config& cfg, cv_mode mode) {
    const int folds = cfg.cv.folds;
    if (folds < 2) fail(error_code::invalid_argument, "cross_validate: folds must be >= 2");
    for (class_label c : all_classes()) {
        const auto n_c = std::count(es.labels().begin(), es.labels().end(), c);
        if (n_c < folds) {
            std::ostringstream os;
            os << "cross_validate: class " << class_id(c) << " has " << n_c
               << " trials, need >= " << folds;
            fail(error_code::insufficient_trials, os.str());
        }
    }

    const std::vector<trial_stats> stats = compute_trial_stats(es);
    rng r(cfg.cv.seed);

    const int n_conf = mode.kind == cv_mode::four_class ? k_n_classes : 2;
    eval_report rep;
    rep.confusion = Eigen::MatrixXi::Zero(n_conf, n_conf);

    for (int repeat = 0; repeat < cfg.cv.repeats; ++repeat) {
        const std::vector<int> fold_of = assign_folds(es.labels(), folds, r);
        for (int f = 0; f < folds; ++f) {
            std::vector<int> train_idx, test_idx;
            for (std::size_t i = 0; i < fold_of.size(); ++i)
                (fold_of[i] == f ? test_idx : train_idx).push_back(static_cast<int>(i));

            int correct = 0;
            if (mode.kind == cv_mode::four_class) {
                std::vector<binary_fit> fits;
                fits.reserve(static_cast<std::size_t>(k_n_classes));
                for (class_label c : all_classes())
                    fits.push_back(fit_binary(es, stats, train_idx, c, cfg));
                for (int i : test_idx) {
                    int best = 0;
                    double best_score = 0.0;
                    for (int c = 0; c < k_n_classes; ++c) {
                        const auto& fit = fits[static_cast<std::size_t>(c)];
                        const double s = standardized(
                            fit,
                            rlda_score(fit.lda,
                                       features_from_cov(
                                           fit.csp,
                                           stats[static_cast<std::size_t>(i)].cov_center)),
                            cfg.ovr_standardize_scores);
                        if (c == 0 || s > best_score) {
                            best = c;
                            best_score = s;
                        }
                    }
                    const int truth =
                        static_cast<int>(es.labels()[static_cast<std::size_t>(i)]);
                    rep.confusion(truth, best) += 1;
                    if (truth == best) ++correct;
                }
            } else {
                const binary_fit fit = fit_binary(es, stats, train_idx, mode.target, cfg);
                for (int i : test_idx) {
                    const double s = rlda_score(
                        fit.lda, features_from_cov(
                                     fit.csp, stats[static_cast<std::size_t>(i)].cov_center));
                    const int pred = s > 0.0 ? 1 : 0;
                    const int truth =
                        es.labels()[static_cast<std::size_t>(i)] == mode.target ? 1 : 0;
                    rep.confusion(truth, pred) += 1;
                    if (truth == pred) ++correct;
                }
            }
            rep.per_fold_acc.push_back(static_cast<double>(correct) /
                                       static_cast<double>(test_idx.size()));
        }
    }

    const double n = static_cast<double>(rep.per_fold_acc.size());
    rep.mean_acc = std::accumulate(rep.per_fold_acc.begin(), rep.per_fold_acc.end(), 0.0) / n;
    double ss = 0.0;
    for (double a : rep.per_fold_acc) ss += (a - rep.mean_acc) * (a - rep.mean_acc);
    rep.std_acc = n > 1.0 ? std::sqrt(ss / (n - 1.0)) : 0.0;

    std::ostringstream os;
    os << "stratified " << folds << "-fold x " << cfg.cv.repeats << " repeats, seed "
       << cfg.cv.seed;
    rep.scheme = os.str();

    if (mode.kind == cv_mode::four_class) {
        rep.chance_level = 1.0 / static_cast<double>(k_n_classes);
    } else {
        const double n_t = static_cast<double>(
            std::count(es.labels().begin(), es.labels().end(), mode.target));
        const double total = static_cast<double>(es.n_trials());
        rep.chance_level = std::max(n_t, total - n_t) / total;
    }
    return rep;
}

std::string render_report(const std::vector<report_row>& rows, table_layout layout) {
    const std::string row_header = layout == table_layout::table_one ? "Task" : "Class";
    const std::string title = layout == table_layout::table_one
                                  ? "4-class accuracy, mean% (±std over folds)"
                                  : "One-vs-rest accuracy, mean% (±std over folds)";

    const auto cell = [](double mean, double sd) {
        std::ostringstream os;
        os << std::fixed << std::setprecision(2) << mean * 100.0 << "% (±" << sd * 100.0
           << ")";
        return os.str();
    };

    std::vector<std::string> subject_names;
    if (!rows.empty())
        for (const auto& [name, rep] : rows[0].subjects) {
            (void)rep;
            subject_names.push_back(name);
        }

    std::vector<std::vector<std::string>> grid;
    std::vector<std::string> header{row_header};
    header.insert(header.end(), subject_names.begin(), subject_names.end());
    header.push_back("Average");
    grid.push_back(header);

    for (const auto& row : rows) {
        std::vector<std::string> line{row.label};
        double mean_sum = 0.0, sd_sum = 0.0;
        for (const auto& [name, rep] : row.subjects) {
            (void)name;
            line.push_back(cell(rep.mean_acc, rep.std_acc));
            mean_sum += rep.mean_acc;
            sd_sum += rep.std_acc;
        }
        const double k = static_cast<double>(row.subjects.size());
        line.push_back(k > 0 ? cell(mean_sum / k, sd_sum / k) : "-");
        grid.push_back(line);
    }

    // display width = count of non-continuation bytes (the cells carry "±")
    const auto width_of = [](const std::string& s) {
        std::size_t w = 0;
        for (unsigned char c : s)
            if ((c & 0xC0) != 0x80) ++w;
        return w;
    };

    std::vector<std::size_t> widths(grid[0].size(), 0);
    for (const auto& line : grid)
        for (std::size_t c = 0; c < line.size(); ++c)
            widths[c] = std::max(widths[c], width_of(line[c]));

    std::ostringstream out;
    out << title << "\n";
    for (const auto& line : grid) {
        for (std::size_t c = 0; c < line.size(); ++c) {
            if (c) out << " | ";
            out << line[c] << std::string(widths[c] - width_of(line[c]), ' ');
        }
        out << "\n";
    }
    return out.str();
}

} // namespace vmi
