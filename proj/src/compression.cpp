#include "fedsim/compression.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fedsim/rng.hpp"

namespace fedsim {
namespace {

constexpr std::size_t kHeaderBytes = 16;

LayoutPtr layout_or_dense(LayoutPtr layout, std::uint32_t dim) {
    if (!layout) return make_dense_layout(dim);
    if (layout->dim() != dim) throw DimensionError("wire dim does not match layout");
    return layout;
}

// ceil(rate*width) clamped to [1, width]; rate validated by callers.
std::size_t kept_count(double rate, std::size_t width) {
    auto m = static_cast<std::size_t>(std::ceil(rate * static_cast<double>(width)));
    return std::min(std::max<std::size_t>(m, 1), width);
}

}  // namespace

SparseUpdate topk(const ParamVector& delta, double k) {
    if (k <= 0.0 || k > 1.0) throw ConfigError("topk", "k must be in (0,1]");
    const std::size_t dim = delta.dim();
    if (dim == 0) throw DimensionError("topk of an empty vector");

    std::vector<std::uint32_t> order(dim);
    std::iota(order.begin(), order.end(), 0u);
    std::stable_sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        return std::fabs(delta[a]) > std::fabs(delta[b]);
    });

    const std::size_t m = kept_count(k, dim);
    SparseUpdate s;
    s.dim = static_cast<std::uint32_t>(dim);
    s.indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m));
    std::sort(s.indices.begin(), s.indices.end());
    s.values.reserve(m);
    for (std::uint32_t i : s.indices) s.values.push_back(delta[i]);
    return s;
}

ParamVector densify(const SparseUpdate& s, LayoutPtr layout) {
    if (s.indices.size() != s.values.size())
        throw DimensionError("sparse index/value length mismatch");
    ParamVector out(layout_or_dense(std::move(layout), s.dim));
    std::uint32_t prev = 0;
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        const std::uint32_t idx = s.indices[i];
        if (idx >= s.dim) throw DimensionError("sparse index out of range");
        if (i > 0 && idx <= prev) throw DimensionError("sparse indices not strictly ascending");
        prev = idx;
        out[idx] = s.values[i];
    }
    return out;
}

QuantizedUpdate quantize(const ParamVector& delta, std::uint32_t bits) {
    if (bits < 1 || bits > 16) throw ConfigError("quantize_bits", "must be in [1,16]");
    const std::size_t dim = delta.dim();
    if (dim == 0) throw DimensionError("quantize of an empty vector");

    QuantizedUpdate q;
    q.dim = static_cast<std::uint32_t>(dim);
    q.bits = bits;
    q.lo = *std::min_element(delta.values().begin(), delta.values().end());
    q.hi = *std::max_element(delta.values().begin(), delta.values().end());

    const std::uint32_t max_code = (1u << bits) - 1u;
    const double step = (q.hi - q.lo) / static_cast<double>(max_code);
    q.codes.resize(dim, 0u);
    if (step > 0.0) {
        for (std::size_t i = 0; i < dim; ++i) {
            auto code = static_cast<std::int64_t>(std::llround((delta[i] - q.lo) / step));
            q.codes[i] = static_cast<std::uint32_t>(std::clamp<std::int64_t>(code, 0, max_code));
        }
    }
    return q;
}

ParamVector dequantize(const QuantizedUpdate& q, LayoutPtr layout) {
    if (q.bits < 1 || q.bits > 16) throw ConfigError("quantize_bits", "must be in [1,16]");
    if (q.codes.size() != q.dim) throw DimensionError("quantized code count mismatch");
    ParamVector out(layout_or_dense(std::move(layout), q.dim));
    const std::uint32_t max_code = (1u << q.bits) - 1u;
    const double step = (q.hi - q.lo) / static_cast<double>(max_code);
    for (std::size_t i = 0; i < q.codes.size(); ++i) {
        if (q.codes[i] > max_code) throw DimensionError("quantized code exceeds bit width");
        out[i] = step > 0.0 ? q.lo + static_cast<double>(q.codes[i]) * step : q.lo;
    }
    return out;
}

ParamVector prune_magnitude(const ParamVector& params, double frac) {
    if (frac < 0.0 || frac >= 1.0) throw ConfigError("prune_fraction", "must be in [0,1)");
    const std::size_t dim = params.dim();
    const auto m = static_cast<std::size_t>(std::floor(frac * static_cast<double>(dim)));
    if (m == 0) return params;

    std::vector<std::size_t> order(dim);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return std::fabs(params[a]) < std::fabs(params[b]);
    });
    ParamVector out = params;
    for (std::size_t i = 0; i < m; ++i) out[order[i]] = 0.0;
    return out;
}

DropoutMask make_dropout_mask(const MlpSpec& spec, double keep_rate, std::uint64_t seed) {
    if (keep_rate <= 0.0 || keep_rate > 1.0)
        throw ConfigError("dropout_keep_rate", "must be in (0,1]");
    DropoutMask mask;
    mask.keep_rate = keep_rate;
    for (std::size_t l = 0; l < spec.hidden.size(); ++l) {
        const std::size_t width = spec.hidden[l];
        std::vector<std::size_t> units(width);
        std::iota(units.begin(), units.end(), std::size_t{0});
        Rng rng(derive_seed(seed, {0xD80Fu, static_cast<std::uint64_t>(l)}));
        rng.shuffle(units);
        units.resize(kept_count(keep_rate, width));
        std::sort(units.begin(), units.end());
        mask.kept.push_back(std::move(units));
    }
    return mask;
}

MlpSpec reduced_spec(const MlpSpec& spec, const DropoutMask& mask) {
    if (mask.kept.size() != spec.hidden.size())
        throw DimensionError("dropout mask layer count mismatch");
    MlpSpec reduced = spec;
    for (std::size_t l = 0; l < mask.kept.size(); ++l)
        reduced.hidden[l] = mask.kept[l].size();
    return reduced;
}

namespace {

// Kept unit indices feeding layer l (inputs/outputs are never dropped).
std::vector<std::size_t> kept_in(const MlpSpec& spec, const DropoutMask& mask, std::size_t l) {
    if (l == 0) {
        std::vector<std::size_t> all(spec.input_dim);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    return mask.kept[l - 1];
}

std::vector<std::size_t> kept_out(const MlpSpec& spec, const DropoutMask& mask, std::size_t l) {
    if (l == spec.hidden.size()) {
        std::vector<std::size_t> all(spec.output_dim);
        std::iota(all.begin(), all.end(), std::size_t{0});
        return all;
    }
    return mask.kept[l];
}

std::size_t full_in_width(const MlpSpec& spec, std::size_t l) {
    return l == 0 ? spec.input_dim : spec.hidden[l - 1];
}

}  // namespace

ParamVector project(const ParamVector& params, const MlpSpec& spec, const DropoutMask& mask) {
    const MlpSpec sub = reduced_spec(spec, mask);
    ParamVector out(build_layout(sub));
    const auto& full_layout = *params.layout();
    const auto& sub_layout = *out.layout();
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const auto rows = kept_out(spec, mask, l);
        const auto cols = kept_in(spec, mask, l);
        const std::size_t full_in = full_in_width(spec, l);
        const std::size_t w_full = full_layout.offset(2 * l);
        const std::size_t b_full = full_layout.offset(2 * l + 1);
        const std::size_t w_sub = sub_layout.offset(2 * l);
        const std::size_t b_sub = sub_layout.offset(2 * l + 1);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c)
                out[w_sub + r * cols.size() + c] = params[w_full + rows[r] * full_in + cols[c]];
            out[b_sub + r] = params[b_full + rows[r]];
        }
    }
    return out;
}

ParamVector expand(const ParamVector& reduced, const MlpSpec& spec, const DropoutMask& mask,
                   const ParamVector& base) {
    const MlpSpec sub = reduced_spec(spec, mask);
    const auto sub_layout_check = build_layout(sub);
    if (reduced.dim() != sub_layout_check->dim())
        throw DimensionError("reduced vector does not match the mask's sub-network");
    if (base.layout()->dim() != base.dim()) throw DimensionError("base vector corrupt");

    ParamVector out = base;
    const auto& full_layout = *base.layout();
    const auto& sub_layout = *sub_layout_check;
    for (std::size_t l = 0; l < spec.layer_count(); ++l) {
        const auto rows = kept_out(spec, mask, l);
        const auto cols = kept_in(spec, mask, l);
        const std::size_t full_in = full_in_width(spec, l);
        const std::size_t w_full = full_layout.offset(2 * l);
        const std::size_t b_full = full_layout.offset(2 * l + 1);
        const std::size_t w_sub = sub_layout.offset(2 * l);
        const std::size_t b_sub = sub_layout.offset(2 * l + 1);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t c = 0; c < cols.size(); ++c)
                out[w_full + rows[r] * full_in + cols[c]] = reduced[w_sub + r * cols.size() + c];
            out[b_full + rows[r]] = reduced[b_sub + r];
        }
    }
    return out;
}

std::size_t encoded_size_dense(std::size_t dim) { return kHeaderBytes + 4 * dim; }

std::size_t encoded_size(const SparseUpdate& s) { return kHeaderBytes + 8 * s.indices.size(); }

std::size_t encoded_size(const QuantizedUpdate& q) {
    return kHeaderBytes + 8 + (static_cast<std::size_t>(q.dim) * q.bits + 7) / 8;
}

std::size_t encoded_size_encrypted(const std::vector<std::vector<std::uint8_t>>& ciphertexts) {
    std::size_t total = kHeaderBytes;
    for (const auto& c : ciphertexts) total += 4 + c.size();
    return total;
}

}  // namespace fedsim
