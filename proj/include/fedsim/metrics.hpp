// Classification and regression evaluation statistics.
#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace fedsim {

// Row = true class, column = predicted class.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::size_t num_classes);

    void add(std::size_t truth, std::size_t predicted, std::size_t count = 1);

    std::size_t at(std::size_t truth, std::size_t predicted) const;
    std::size_t num_classes() const { return num_classes_; }
    std::size_t total() const { return total_; }
    double accuracy() const;

private:
    std::size_t num_classes_;
    std::size_t total_ = 0;
    std::vector<std::size_t> counts_;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t support = 0;      // true instances of the class
    double support_fraction = 0.0;
    // Set when a 0/0 rate was coerced to 0 (no predictions or no instances).
    bool degenerate = false;
};

struct ClassificationReport {
    std::vector<ClassMetrics> per_class;
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
    double weighted_precision = 0.0;
    double weighted_recall = 0.0;
    double weighted_f1 = 0.0;
    std::size_t total = 0;
};

ClassificationReport classification_report(const ConfusionMatrix& cm);

struct RegressionReport {
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    // Pearson correlation; empty when the truth is constant.
    std::optional<double> r;
};

RegressionReport regression_report(const std::vector<double>& predictions,
                                   const std::vector<double>& truth);

}  // namespace fedsim
