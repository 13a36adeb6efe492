#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "vmi/csp.hpp"
#include "vmi/lda.hpp"
#include "vmi/rng.hpp"
#include "vmi/types.hpp"

namespace vmi {

struct ovr_entry {
    class_label target = class_label::eating_food;
    csp_model csp;
    rlda_model lda;
    // training-score calibration; applied only when standardize_scores is set
    double score_mean = 0.0;
    double score_sd = 1.0;
};

// one binary discriminator per class, in the fixed class order
struct ovr_classifier {
    std::vector<ovr_entry> entries;
    bool standardize_scores = false;
};

struct eval_report {
    std::vector<double> per_fold_acc;
    double mean_acc = 0.0;
    double std_acc = 0.0; // sample std (ddof 1) over fold accuracies
    Eigen::MatrixXi confusion; // rows = true, cols = predicted
    std::string scheme;
    double chance_level = 0.0;
};

struct cv_mode {
    enum kind_t { four_class, binary_ovr } kind = four_class;
    class_label target = class_label::eating_food; // used by binary_ovr
};

// expects an alpha-filtered epoch set; per class c: CSP (c vs pooled rest),
// log-variance features, RLDA with label 1 = c
ovr_classifier train_ovr(const epoch_set& es, const analysis_config& cfg);

// per trial: argmax over classes of that class's discriminant on its own CSP
// features; exact ties go to the first class in the fixed order
std::vector<class_label> predict(const ovr_classifier& clf, const epoch_set& es);

// stratified k-fold repeated CV with all fitting inside each training fold
eval_report cross_validate(const epoch_set& es, const analysis_config& cfg, cv_mode mode);

// deterministic stratified fold assignment: per class, seeded shuffle then
// round-robin; exposed so leakage tests can reconstruct fold membership
std::vector<int> assign_folds(const std::vector<class_label>& labels, int folds, rng& r);

enum class table_layout { table_one, table_two };

struct report_row {
    std::string label; // task name (table one) or class display name (table two)
    std::vector<std::pair<std::string, eval_report>> subjects;
};

// text table: subjects as columns plus Average; "mean% (±std)" cells;
// the Average column averages subject means and subject stds
std::string render_report(const std::vector<report_row>& rows, table_layout layout);

} // namespace vmi
