// Synthetic dataset generation, CSV ingestion, min-max normalization and
// IID / non-IID partitioning across clients.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fedsim {

enum class Task { kClassification, kRegression };

struct Dataset {
    std::size_t num_rows = 0;
    std::size_t num_features = 0;
    // row-major, num_rows x num_features
    std::vector<double> features;
    // classification: dense ids in [0, class_count)
    std::vector<std::size_t> labels;
    // regression targets
    std::vector<double> targets;
    std::size_t class_count = 0;
    Task task = Task::kClassification;
    // column names when loaded from CSV; synthetic data leaves them empty
    std::vector<std::string> feature_names;

    const double* row(std::size_t i) const { return features.data() + i * num_features; }

    Dataset subset(const std::vector<std::size_t>& indices) const;
};

enum class PartitionScheme { kIid, kDirichlet, kLabelSkew };

struct PartitionConfig {
    PartitionScheme scheme = PartitionScheme::kIid;
    std::size_t num_clients = 1;
    double alpha = 0.5;                  // dirichlet concentration
    std::size_t classes_per_client = 2;  // label skew
    std::uint64_t seed = 0;
};

struct NormalizationStats {
    std::vector<double> min;
    std::vector<double> max;
};

// Gaussian blobs around class means placed `separation` away from the
// origin on a seeded random orthonormal frame (extra classes beyond the
// feature dimension fall back to random unit directions). Class counts
// differ by at most one.
Dataset synth_blobs(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t classes,
                    double separation);

// Regression analogue: targets are a seeded random linear function of the
// features plus Gaussian noise, rescaled into [0, 1].
Dataset synth_linear(std::uint64_t seed, std::size_t n, std::size_t dim, double noise_std);

// Maps every feature column through (v - min) / (max - min); constant
// columns map to 0.
Dataset normalize_minmax(const Dataset& dataset, NormalizationStats* stats_out = nullptr);

// Inverse map from the recorded stats.
Dataset denormalize_minmax(const Dataset& dataset, const NormalizationStats& stats);

// Disjoint index shards covering 0..n-1 exactly. Empty shards are repaired
// by moving one sample out of the largest shard.
std::vector<std::vector<std::size_t>> partition(const Dataset& dataset, const PartitionConfig& cfg);

// CSV with a header row, comma separators and '.' decimals. Non-label
// columns must be numeric; classification labels are mapped to dense ids by
// first appearance.
Dataset load_csv(const std::string& path, const std::string& label_column, Task task);

}  // namespace fedsim
