// Flat parameter vectors with a structural layout. The layout names
// contiguous segments (weight matrices, bias rows) and tags each one as
// shared (aggregated globally) or personal (kept on the client). A layout is
// created once per model and passed by shared handle; vectors match only if
// they carry the same handle.
#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "fedsim/errors.hpp"

namespace fedsim {

enum class Partition { kShared, kPersonal };

struct LayoutSegment {
    std::string name;
    std::size_t length = 0;
    Partition partition = Partition::kShared;
};

class ModelLayout {
public:
    explicit ModelLayout(std::vector<LayoutSegment> segments);

    const std::vector<LayoutSegment>& segments() const { return segments_; }
    std::size_t dim() const { return dim_; }

    // Offset of the first element of segment `index`.
    std::size_t offset(std::size_t index) const { return offsets_[index]; }
    std::size_t segment_count() const { return segments_.size(); }

    // Throws if a name is missing.
    std::size_t segment_index(const std::string& name) const;

private:
    std::vector<LayoutSegment> segments_;
    std::vector<std::size_t> offsets_;
    std::size_t dim_ = 0;
};

using LayoutPtr = std::shared_ptr<const ModelLayout>;

// Single all-shared segment; handy for tests and free-standing vectors.
LayoutPtr make_dense_layout(std::size_t dim, const std::string& name = "values");

class ParamVector {
public:
    ParamVector() = default;
    ParamVector(LayoutPtr layout, std::vector<double> values);

    // Zero vector over the layout.
    explicit ParamVector(LayoutPtr layout);

    const LayoutPtr& layout() const { return layout_; }
    std::size_t dim() const { return values_.size(); }

    double operator[](std::size_t i) const { return values_[i]; }
    double& operator[](std::size_t i) { return values_[i]; }

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    LayoutPtr layout_;
    std::vector<double> values_;
};

// Layout identity check used by all binary operations.
void require_same_layout(const ParamVector& a, const ParamVector& b);

// y + a * x, elementwise.
ParamVector axpy(double a, const ParamVector& x, const ParamVector& y);

// x scaled by c.
ParamVector scale(double c, const ParamVector& x);

// a - b.
ParamVector subtract(const ParamVector& a, const ParamVector& b);

double l2_norm(const ParamVector& x);

double dot(const ParamVector& a, const ParamVector& b);

// Zeroes every entry belonging to the other partition.
ParamVector restrict_to(const ParamVector& x, Partition partition);

// Overwrites the `partition` segments of `dst` with those of `src`.
// Used when a client merges the downloaded shared backbone with its
// locally kept personal head.
void overlay(ParamVector& dst, const ParamVector& src, Partition partition);

// Throws if any entry is NaN or infinite.
void require_finite(const ParamVector& x, const std::string& context);

}  // namespace fedsim
