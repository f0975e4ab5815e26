#include "fedsim/params.hpp"

#include <cmath>
#include <set>

namespace fedsim {

ModelLayout::ModelLayout(std::vector<LayoutSegment> segments) : segments_(std::move(segments)) {
    std::set<std::string> names;
    offsets_.reserve(segments_.size());
    for (const auto& seg : segments_) {
        if (seg.length == 0) throw DimensionError("layout segment '" + seg.name + "' has zero length");
        if (!names.insert(seg.name).second) {
            throw DimensionError("duplicate layout segment name '" + seg.name + "'");
        }
        offsets_.push_back(dim_);
        dim_ += seg.length;
    }
}

std::size_t ModelLayout::segment_index(const std::string& name) const {
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        if (segments_[i].name == name) return i;
    }
    throw DimensionError("unknown layout segment '" + name + "'");
}

LayoutPtr make_dense_layout(std::size_t dim, const std::string& name) {
    return std::make_shared<const ModelLayout>(
        std::vector<LayoutSegment>{{name, dim, Partition::kShared}});
}

ParamVector::ParamVector(LayoutPtr layout, std::vector<double> values)
    : layout_(std::move(layout)), values_(std::move(values)) {
    if (!layout_) throw DimensionError("param vector requires a layout");
    if (values_.size() != layout_->dim()) {
        throw DimensionError("param vector length " + std::to_string(values_.size()) +
                             " does not match layout dimension " + std::to_string(layout_->dim()));
    }
}

ParamVector::ParamVector(LayoutPtr layout) : layout_(std::move(layout)) {
    if (!layout_) throw DimensionError("param vector requires a layout");
    values_.assign(layout_->dim(), 0.0);
}

void require_same_layout(const ParamVector& a, const ParamVector& b) {
    if (a.layout() != b.layout()) {
        throw DimensionError("param vectors carry different layout handles");
    }
}

ParamVector axpy(double a, const ParamVector& x, const ParamVector& y) {
    require_same_layout(x, y);
    ParamVector out(y.layout(), y.values());
    auto& v = out.values();
    const auto& xs = x.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += a * xs[i];
    require_finite(out, "axpy");
    return out;
}

ParamVector scale(double c, const ParamVector& x) {
    ParamVector out(x.layout(), x.values());
    for (auto& v : out.values()) v *= c;
    require_finite(out, "scale");
    return out;
}

ParamVector subtract(const ParamVector& a, const ParamVector& b) {
    return axpy(-1.0, b, a);
}

double l2_norm(const ParamVector& x) {
    double sum = 0.0;
    for (double v : x.values()) sum += v * v;
    return std::sqrt(sum);
}

double dot(const ParamVector& a, const ParamVector& b) {
    require_same_layout(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
    return sum;
}

ParamVector restrict_to(const ParamVector& x, Partition partition) {
    ParamVector out(x.layout(), x.values());
    const auto& layout = *x.layout();
    for (std::size_t s = 0; s < layout.segment_count(); ++s) {
        if (layout.segments()[s].partition == partition) continue;
        const std::size_t begin = layout.offset(s);
        const std::size_t end = begin + layout.segments()[s].length;
        for (std::size_t i = begin; i < end; ++i) out[i] = 0.0;
    }
    return out;
}

void overlay(ParamVector& dst, const ParamVector& src, Partition partition) {
    require_same_layout(dst, src);
    const auto& layout = *dst.layout();
    for (std::size_t s = 0; s < layout.segment_count(); ++s) {
        if (layout.segments()[s].partition != partition) continue;
        const std::size_t begin = layout.offset(s);
        const std::size_t end = begin + layout.segments()[s].length;
        for (std::size_t i = begin; i < end; ++i) dst[i] = src[i];
    }
}

void require_finite(const ParamVector& x, const std::string& context) {
    for (double v : x.values()) {
        if (!std::isfinite(v)) {
            throw DimensionError("non-finite parameter value produced by " + context);
        }
    }
}

}  // namespace fedsim
