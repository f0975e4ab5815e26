#include "fedsim/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

Dataset Dataset::subset(const std::vector<std::size_t>& indices) const {
    Dataset out;
    out.num_rows = indices.size();
    out.num_features = num_features;
    out.class_count = class_count;
    out.task = task;
    out.feature_names = feature_names;
    out.features.reserve(indices.size() * num_features);
    for (std::size_t idx : indices) {
        const double* r = row(idx);
        out.features.insert(out.features.end(), r, r + num_features);
        if (task == Task::kClassification) {
            out.labels.push_back(labels[idx]);
        } else {
            out.targets.push_back(targets[idx]);
        }
    }
    return out;
}

namespace {

// Random orthonormal directions via Gram-Schmidt over seeded Gaussian
// draws; once the frame is exhausted (classes > dim) further directions are
// plain random unit vectors.
std::vector<std::vector<double>> class_directions(Rng& rng, std::size_t classes, std::size_t dim) {
    std::vector<std::vector<double>> dirs;
    dirs.reserve(classes);
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<double> v(dim);
        double norm = 0.0;
        for (int attempt = 0; attempt < 64 && norm < 1e-9; ++attempt) {
            for (auto& x : v) x = rng.normal();
            if (c < dim) {
                for (std::size_t p = 0; p < std::min(c, dirs.size()); ++p) {
                    double proj = std::inner_product(v.begin(), v.end(), dirs[p].begin(), 0.0);
                    for (std::size_t i = 0; i < dim; ++i) v[i] -= proj * dirs[p][i];
                }
            }
            norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
        }
        for (auto& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }
    return dirs;
}

}  // namespace

Dataset synth_blobs(std::uint64_t seed, std::size_t n, std::size_t dim, std::size_t classes,
                    double separation) {
    if (classes == 0 || dim == 0) throw std::invalid_argument("blobs need classes >= 1, dim >= 1");
    if (n < classes) throw std::invalid_argument("blobs need at least one sample per class");

    Rng rng(derive_seed(seed, {0xB10B5ULL}));
    auto dirs = class_directions(rng, classes, dim);

    Dataset ds;
    ds.num_rows = n;
    ds.num_features = dim;
    ds.class_count = classes;
    ds.task = Task::kClassification;
    ds.features.resize(n * dim);
    ds.labels.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t c = i % classes;
        ds.labels[i] = c;
        for (std::size_t j = 0; j < dim; ++j) {
            ds.features[i * dim + j] = separation * dirs[c][j] + rng.normal();
        }
    }
    return ds;
}

Dataset synth_linear(std::uint64_t seed, std::size_t n, std::size_t dim, double noise_std) {
    if (n == 0 || dim == 0) throw std::invalid_argument("linear data needs n >= 1, dim >= 1");
    Rng rng(derive_seed(seed, {0x11EA4ULL}));
    std::vector<double> w(dim);
    for (auto& x : w) x = rng.uniform(-1.0, 1.0);

    Dataset ds;
    ds.num_rows = n;
    ds.num_features = dim;
    ds.task = Task::kRegression;
    ds.features.resize(n * dim);
    ds.targets.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double x = rng.uniform();
            ds.features[i * dim + j] = x;
            t += w[j] * x;
        }
        ds.targets[i] = t + noise_std * rng.normal();
    }
    // rescale targets into [0, 1] so regression losses are comparable
    const auto [lo_it, hi_it] = std::minmax_element(ds.targets.begin(), ds.targets.end());
    const double lo = *lo_it, hi = *hi_it;
    if (hi > lo) {
        for (auto& t : ds.targets) t = (t - lo) / (hi - lo);
    }
    return ds;
}

Dataset normalize_minmax(const Dataset& dataset, NormalizationStats* stats_out) {
    Dataset out = dataset;
    NormalizationStats stats;
    stats.min.assign(dataset.num_features, 0.0);
    stats.max.assign(dataset.num_features, 0.0);
    for (std::size_t j = 0; j < dataset.num_features; ++j) {
        double lo = dataset.features[j];
        double hi = dataset.features[j];
        for (std::size_t i = 1; i < dataset.num_rows; ++i) {
            lo = std::min(lo, dataset.features[i * dataset.num_features + j]);
            hi = std::max(hi, dataset.features[i * dataset.num_features + j]);
        }
        stats.min[j] = lo;
        stats.max[j] = hi;
        const double range = hi - lo;
        for (std::size_t i = 0; i < dataset.num_rows; ++i) {
            double& v = out.features[i * dataset.num_features + j];
            v = range > 0.0 ? (v - lo) / range : 0.0;
        }
    }
    if (stats_out) *stats_out = std::move(stats);
    return out;
}

Dataset denormalize_minmax(const Dataset& dataset, const NormalizationStats& stats) {
    Dataset out = dataset;
    for (std::size_t j = 0; j < dataset.num_features; ++j) {
        const double range = stats.max[j] - stats.min[j];
        for (std::size_t i = 0; i < dataset.num_rows; ++i) {
            double& v = out.features[i * dataset.num_features + j];
            v = stats.min[j] + v * range;
        }
    }
    return out;
}

namespace {

// Moves one sample out of the largest shard into each empty one.
void repair_empty_shards(std::vector<std::vector<std::size_t>>& shards) {
    for (auto& shard : shards) {
        if (!shard.empty()) continue;
        auto largest = std::max_element(
            shards.begin(), shards.end(),
            [](const auto& a, const auto& b) { return a.size() < b.size(); });
        if (largest->size() <= 1) {
            throw std::invalid_argument("not enough samples to give every client one");
        }
        shard.push_back(largest->back());
        largest->pop_back();
    }
}

std::vector<std::vector<std::size_t>> indices_by_class(const Dataset& ds) {
    std::vector<std::vector<std::size_t>> by_class(ds.class_count);
    for (std::size_t i = 0; i < ds.num_rows; ++i) by_class[ds.labels[i]].push_back(i);
    return by_class;
}

}  // namespace

std::vector<std::vector<std::size_t>> partition(const Dataset& dataset, const PartitionConfig& cfg) {
    const std::size_t n = dataset.num_rows;
    const std::size_t k = cfg.num_clients;
    if (k == 0) throw std::invalid_argument("partition requires at least one client");
    if (k > n) throw std::invalid_argument("more clients than samples");

    Rng rng(derive_seed(cfg.seed, {0x9A47ULL, static_cast<std::uint64_t>(cfg.scheme)}));
    std::vector<std::vector<std::size_t>> shards(k);

    switch (cfg.scheme) {
        case PartitionScheme::kIid: {
            std::vector<std::size_t> order(n);
            std::iota(order.begin(), order.end(), 0);
            rng.shuffle(order);
            // chunked deal: first n % k clients get one extra
            const std::size_t base = n / k, extra = n % k;
            std::size_t pos = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const std::size_t take = base + (c < extra ? 1 : 0);
                shards[c].assign(order.begin() + pos, order.begin() + pos + take);
                pos += take;
            }
            break;
        }
        case PartitionScheme::kDirichlet: {
            if (dataset.task != Task::kClassification) {
                throw std::invalid_argument("dirichlet partition requires class labels");
            }
            if (cfg.alpha <= 0.0) throw std::invalid_argument("dirichlet alpha must be positive");
            for (auto& members : indices_by_class(dataset)) {
                rng.shuffle(members);
                const auto props = rng.dirichlet(cfg.alpha, k);
                // largest-remainder split of |members| by the drawn proportions
                std::vector<std::size_t> counts(k, 0);
                std::vector<std::pair<double, std::size_t>> remainders;
                std::size_t assigned = 0;
                for (std::size_t c = 0; c < k; ++c) {
                    const double exact = props[c] * static_cast<double>(members.size());
                    counts[c] = static_cast<std::size_t>(std::floor(exact));
                    assigned += counts[c];
                    remainders.push_back({exact - std::floor(exact), c});
                }
                std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
                    if (a.first != b.first) return a.first > b.first;
                    return a.second < b.second;
                });
                for (std::size_t r = 0; assigned < members.size(); ++r, ++assigned) {
                    counts[remainders[r % k].second]++;
                }
                std::size_t pos = 0;
                for (std::size_t c = 0; c < k; ++c) {
                    shards[c].insert(shards[c].end(), members.begin() + pos,
                                     members.begin() + pos + counts[c]);
                    pos += counts[c];
                }
            }
            break;
        }
        case PartitionScheme::kLabelSkew: {
            if (dataset.task != Task::kClassification) {
                throw std::invalid_argument("label skew partition requires class labels");
            }
            if (cfg.classes_per_client == 0) {
                throw std::invalid_argument("classes_per_client must be positive");
            }
            const std::size_t classes = dataset.class_count;
            // round-robin slot assignment: slot j serves class j mod C
            std::vector<std::vector<std::size_t>> class_slots(classes);
            const std::size_t slots = k * cfg.classes_per_client;
            for (std::size_t j = 0; j < slots; ++j) {
                class_slots[j % classes].push_back(j / cfg.classes_per_client);
            }
            auto by_class = indices_by_class(dataset);
            std::size_t orphan_cursor = 0;
            for (std::size_t c = 0; c < classes; ++c) {
                auto& members = by_class[c];
                rng.shuffle(members);
                const auto& owners = class_slots[c];
                if (owners.empty()) {
                    // class not covered by any slot: spread round-robin
                    for (std::size_t i = 0; i < members.size(); ++i) {
                        shards[orphan_cursor++ % k].push_back(members[i]);
                    }
                    continue;
                }
                for (std::size_t i = 0; i < members.size(); ++i) {
                    shards[owners[i % owners.size()]].push_back(members[i]);
                }
            }
            break;
        }
    }

    repair_empty_shards(shards);
    for (auto& shard : shards) std::sort(shard.begin(), shard.end());
    return shards;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column, Task task) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open CSV file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("CSV file is empty: " + path);
    const auto header = split_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (trim(header[j]) == label_column) label_idx = j;
    }
    if (label_idx == header.size()) {
        throw std::runtime_error("unknown label column '" + label_column + "' in " + path);
    }

    Dataset ds;
    ds.task = task;
    ds.num_features = header.size() - 1;
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (j != label_idx) ds.feature_names.push_back(trim(header[j]));
    }

    std::vector<std::string> label_names;
    std::size_t row_number = 0;  // 1-based over data rows
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_number;
        const auto cells = split_line(line);
        if (cells.size() != header.size()) {
            throw std::runtime_error("row " + std::to_string(row_number) + " has " +
                                     std::to_string(cells.size()) + " cells, expected " +
                                     std::to_string(header.size()));
        }
        for (std::size_t j = 0; j < cells.size(); ++j) {
            const std::string value = trim(cells[j]);
            if (j == label_idx) {
                if (task == Task::kClassification) {
                    auto it = std::find(label_names.begin(), label_names.end(), value);
                    if (it == label_names.end()) {
                        label_names.push_back(value);
                        it = std::prev(label_names.end());
                    }
                    ds.labels.push_back(static_cast<std::size_t>(it - label_names.begin()));
                } else {
                    try {
                        std::size_t used = 0;
                        const double v = std::stod(value, &used);
                        if (used != value.size()) throw std::invalid_argument(value);
                        ds.targets.push_back(v);
                    } catch (const std::exception&) {
                        throw std::runtime_error("non-numeric target at row " +
                                                 std::to_string(row_number) + ", column " +
                                                 trim(header[j]));
                    }
                }
            } else {
                try {
                    std::size_t used = 0;
                    const double v = std::stod(value, &used);
                    if (used != value.size()) throw std::invalid_argument(value);
                    ds.features.push_back(v);
                } catch (const std::exception&) {
                    throw std::runtime_error("non-numeric value at row " +
                                             std::to_string(row_number) + ", column " +
                                             trim(header[j]));
                }
            }
        }
    }
    ds.num_rows = row_number;
    ds.class_count = label_names.size();
    if (ds.num_rows == 0) throw std::runtime_error("CSV has a header but no data rows: " + path);
    return ds;
}

}  // namespace fedsim
