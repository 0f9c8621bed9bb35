#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace hanforge::metrics {

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

enum class CurveKind { roc, pr };

struct EvalResult {
    double precision = 0.0;
    double recall = 0.0;
    double roc_auc = 0.0;
    double threshold = 0.5;
    Confusion confusion;
    std::vector<std::pair<double, double>> roc_points;  // (FPR, TPR)
    std::vector<std::pair<double, double>> pr_points;   // (recall, precision)
};

// Positive class is unreliable (label 1); score >= threshold predicts positive.
Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold = 0.5);

// P(score_pos > score_neg) + 0.5 P(tie), via the rank statistic.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

// One point per distinct threshold, plus sentinels. ROC points run from (0,0)
// to (1,1); their trapezoid area equals roc_auc.
std::vector<std::pair<double, double>> curve_points(const std::vector<double>& scores,
                                                    const std::vector<int>& labels,
                                                    CurveKind kind);

EvalResult evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold = 0.5);

std::string eval_to_json(const EvalResult& r);
std::string points_to_csv(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_name, const std::string& y_name);

}  // namespace hanforge::metrics
