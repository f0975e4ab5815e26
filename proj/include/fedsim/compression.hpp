// Update codecs: top-k sparsification, uniform quantization, magnitude
// pruning, and dropout sub-network projection. Byte-exact wire encoding
// lives in wire.hpp; size accounting here.
#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/learner.hpp"
#include "fedsim/params.hpp"

namespace fedsim {

struct SparseUpdate {
    std::uint32_t dim = 0;
    std::vector<std::uint32_t> indices;  // strictly ascending
    std::vector<double> values;          // 32-bit on the wire
};

struct QuantizedUpdate {
    std::uint32_t dim = 0;
    std::uint32_t bits = 8;  // in [1,16]
    // Range kept at full precision so constant inputs reconstruct exactly;
    // the wire narrows both to 32-bit.
    double lo = 0.0;
    double hi = 0.0;
    std::vector<std::uint32_t> codes;
};

struct DropoutMask {
    std::vector<std::vector<std::size_t>> kept;  // per hidden layer, ascending
    double keep_rate = 1.0;
};

// Keeps the ceil(k*dim) largest-magnitude entries; ties go to the lower
// index. k in (0,1].
SparseUpdate topk(const ParamVector& delta, double k);

// Zeros everywhere except the listed indices. Layout defaults to a fresh
// dense one; pass the model layout to stay mergeable with it.
ParamVector densify(const SparseUpdate& s, LayoutPtr layout = nullptr);

// Uniform quantizer over [min, max] with 2^bits levels; hi==lo collapses
// every code to zero and dequantizes to the constant.
QuantizedUpdate quantize(const ParamVector& delta, std::uint32_t bits);
ParamVector dequantize(const QuantizedUpdate& q, LayoutPtr layout = nullptr);

// Zeros exactly floor(frac*dim) smallest-|v| entries (ties: lower index
// pruned first). frac in [0,1).
ParamVector prune_magnitude(const ParamVector& params, double frac);

// Samples ceil(keep_rate*width) units per hidden layer without
// replacement, seeded; kept lists are ascending.
DropoutMask make_dropout_mask(const MlpSpec& spec, double keep_rate, std::uint64_t seed);

// The sub-network's shape: hidden widths shrink to the kept counts.
MlpSpec reduced_spec(const MlpSpec& spec, const DropoutMask& mask);

// Extracts weights and biases touching kept units into the sub-network's
// parameter vector.
ParamVector project(const ParamVector& params, const MlpSpec& spec, const DropoutMask& mask);

// Scatters trained sub-network parameters back over `base`; coordinates
// not touched by the mask keep their base values.
ParamVector expand(const ParamVector& reduced, const MlpSpec& spec, const DropoutMask& mask,
                   const ParamVector& base);

// Exact wire byte counts (16-byte header included).
std::size_t encoded_size_dense(std::size_t dim);
std::size_t encoded_size(const SparseUpdate& s);
std::size_t encoded_size(const QuantizedUpdate& q);
std::size_t encoded_size_encrypted(const std::vector<std::vector<std::uint8_t>>& ciphertexts);

}  // namespace fedsim
