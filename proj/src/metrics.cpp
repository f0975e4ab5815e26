#include "fedsim/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace fedsim {

ConfusionMatrix::ConfusionMatrix(std::size_t num_classes)
    : num_classes_(num_classes), counts_(num_classes * num_classes, 0) {
    if (num_classes == 0) throw std::invalid_argument("confusion matrix needs at least one class");
}

void ConfusionMatrix::add(std::size_t truth, std::size_t predicted, std::size_t count) {
    if (truth >= num_classes_ || predicted >= num_classes_) {
        throw std::out_of_range("class index outside confusion matrix");
    }
    counts_[truth * num_classes_ + predicted] += count;
    total_ += count;
}

std::size_t ConfusionMatrix::at(std::size_t truth, std::size_t predicted) const {
    return counts_[truth * num_classes_ + predicted];
}

double ConfusionMatrix::accuracy() const {
    if (total_ == 0) return 0.0;
    std::size_t diag = 0;
    for (std::size_t c = 0; c < num_classes_; ++c) diag += at(c, c);
    return static_cast<double>(diag) / static_cast<double>(total_);
}

ClassificationReport classification_report(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw std::invalid_argument("classification report over an empty matrix");

    const std::size_t k = cm.num_classes();
    ClassificationReport report;
    report.per_class.resize(k);
    report.total = cm.total();
    report.accuracy = cm.accuracy();

    for (std::size_t c = 0; c < k; ++c) {
        std::size_t tp = cm.at(c, c);
        std::size_t predicted = 0;  // column sum: TP + FP
        std::size_t actual = 0;     // row sum: TP + FN
        for (std::size_t o = 0; o < k; ++o) {
            predicted += cm.at(o, c);
            actual += cm.at(c, o);
        }
        ClassMetrics& m = report.per_class[c];
        m.support = actual;
        m.support_fraction = static_cast<double>(actual) / static_cast<double>(cm.total());
        m.degenerate = (predicted == 0) || (actual == 0);
        m.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
        m.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
        const double pr = m.precision + m.recall;
        m.f1 = pr == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / pr;
        if (pr == 0.0) m.degenerate = true;
    }

    for (const auto& m : report.per_class) {
        report.macro_precision += m.precision / static_cast<double>(k);
        report.macro_recall += m.recall / static_cast<double>(k);
        report.macro_f1 += m.f1 / static_cast<double>(k);
        const double w = m.support_fraction;
        report.weighted_precision += w * m.precision;
        report.weighted_recall += w * m.recall;
        report.weighted_f1 += w * m.f1;
    }
    return report;
}

RegressionReport regression_report(const std::vector<double>& predictions,
                                   const std::vector<double>& truth) {
    if (predictions.size() != truth.size() || predictions.empty()) {
        throw std::invalid_argument("regression report requires equal nonzero lengths");
    }
    const std::size_t n = predictions.size();
    RegressionReport report;
    double mean_p = 0.0, mean_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = predictions[i] - truth[i];
        report.mse += e * e / static_cast<double>(n);
        report.mae += std::fabs(e) / static_cast<double>(n);
        mean_p += predictions[i] / static_cast<double>(n);
        mean_t += truth[i] / static_cast<double>(n);
    }
    report.rmse = std::sqrt(report.mse);

    double cov = 0.0, var_p = 0.0, var_t = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = predictions[i] - mean_p;
        const double dt = truth[i] - mean_t;
        cov += dp * dt;
        var_p += dp * dp;
        var_t += dt * dt;
    }
    if (var_t > 0.0 && var_p > 0.0) {
        report.r = cov / std::sqrt(var_p * var_t);
    } else if (var_t > 0.0 && var_p == 0.0) {
        // constant predictions against varying truth: correlation undefined
        report.r = std::nullopt;
    }
    // constant truth: r stays unset
    return report;
}

}  // namespace fedsim
