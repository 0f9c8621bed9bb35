#include "hanforge/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hanforge/errors.hpp"

namespace hanforge::metrics {

namespace {

void check_lengths(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DomainError("scores and labels differ in length: " + std::to_string(scores.size()) +
                          " vs " + std::to_string(labels.size()));
}

void check_both_classes(const std::vector<int>& labels) {
    bool pos = false, neg = false;
    for (int l : labels) (l == 1 ? pos : neg) = true;
    if (!pos || !neg)
        throw DomainError("both classes must be present; got only " +
                          std::string(pos ? "positives" : "negatives"));
}

}  // namespace

Confusion confusion_at(const std::vector<double>& scores, const std::vector<int>& labels,
                       double threshold) {
    check_lengths(scores, labels);
    Confusion c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        bool predicted_positive = scores[i] >= threshold;
        bool positive = labels[i] == 1;
        if (predicted_positive && positive) ++c.tp;
        else if (predicted_positive && !positive) ++c.fp;
        else if (!predicted_positive && !positive) ++c.tn;
        else ++c.fn;
    }
    return c;
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_lengths(scores, labels);
    check_both_classes(labels);
    std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups (Mann-Whitney convention)
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) {
                rank_sum_pos += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    std::size_t n_neg = n - n_pos;
    double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1);
    return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<std::pair<double, double>> curve_points(const std::vector<double>& scores,
                                                    const std::vector<int>& labels,
                                                    CurveKind kind) {
    check_lengths(scores, labels);
    check_both_classes(labels);
    std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&scores](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];  // descending: thresholds sweep from strictest down
    });

    double total_pos = 0, total_neg = 0;
    for (int l : labels) (l == 1 ? total_pos : total_neg) += 1;

    std::vector<std::pair<double, double>> points;
    double tp = 0, fp = 0;
    if (kind == CurveKind::roc) {
        points.emplace_back(0.0, 0.0);
    } else {
        points.emplace_back(0.0, 1.0);  // recall 0 sentinel, precision 1 by convention
    }
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (std::size_t k = i; k < j; ++k) (labels[order[k]] == 1 ? tp : fp) += 1;
        if (kind == CurveKind::roc) {
            points.emplace_back(fp / total_neg, tp / total_pos);
        } else {
            points.emplace_back(tp / total_pos, tp / (tp + fp));
        }
        i = j;
    }
    return points;
}

EvalResult evaluate(const std::vector<double>& scores, const std::vector<int>& labels,
                    double threshold) {
    EvalResult r;
    r.threshold = threshold;
    r.confusion = confusion_at(scores, labels, threshold);
    double denom_p = static_cast<double>(r.confusion.tp + r.confusion.fp);
    double denom_r = static_cast<double>(r.confusion.tp + r.confusion.fn);
    r.precision = denom_p > 0 ? static_cast<double>(r.confusion.tp) / denom_p : 0.0;
    r.recall = denom_r > 0 ? static_cast<double>(r.confusion.tp) / denom_r : 0.0;
    r.roc_auc = roc_auc(scores, labels);
    r.roc_points = curve_points(scores, labels, CurveKind::roc);
    r.pr_points = curve_points(scores, labels, CurveKind::pr);
    return r;
}

std::string eval_to_json(const EvalResult& r) {
    nlohmann::json j;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["roc_auc"] = r.roc_auc;
    j["threshold"] = r.threshold;
    j["confusion"] = {{"tp", r.confusion.tp},
                      {"fp", r.confusion.fp},
                      {"tn", r.confusion.tn},
                      {"fn", r.confusion.fn}};
    auto pts = [](const std::vector<std::pair<double, double>>& points) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [x, y] : points) arr.push_back({x, y});
        return arr;
    };
    j["roc_points"] = pts(r.roc_points);
    j["pr_points"] = pts(r.pr_points);
    return j.dump(2);
}

std::string points_to_csv(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_name, const std::string& y_name) {
    std::ostringstream out;
    out << x_name << "," << y_name << "\n";
    out.precision(17);
    for (const auto& [x, y] : points) out << x << "," << y << "\n";
    return out.str();
}

}  // namespace hanforge::metrics
