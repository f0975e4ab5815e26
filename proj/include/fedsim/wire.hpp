// Bit-exact update wire format. Every message is a 16-byte little-endian
// header (magic, version, encoding tag, reserved, dim, count) followed by
// an encoding-specific payload:
//   dense      count=dim;  dim float32 values
//   sparse     count=nnz;  nnz of (u32 index + f32 value)
//   quantized  count=bits; f32 lo + f32 hi + ceil(dim*bits/8) packed codes
//   encrypted  count=#coordinates; per coordinate u32 length + big-endian
//              magnitude bytes
#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/compression.hpp"
#include "fedsim/params.hpp"

namespace fedsim {

inline constexpr std::uint32_t kWireMagic = 0x46445531u;
inline constexpr std::uint8_t kWireVersion = 1;

enum class WireEncoding : std::uint8_t {
    kDense = 0,
    kSparse = 1,
    kQuantized = 2,
    kEncrypted = 3,
};

std::vector<std::uint8_t> serialize_dense(const ParamVector& values);
std::vector<std::uint8_t> serialize_sparse(const SparseUpdate& s);
std::vector<std::uint8_t> serialize_quantized(const QuantizedUpdate& q);
std::vector<std::uint8_t> serialize_encrypted(
    std::uint32_t dim, const std::vector<std::vector<std::uint8_t>>& ciphertexts);

struct WireMessage {
    WireEncoding encoding = WireEncoding::kDense;
    std::uint32_t dim = 0;
    std::vector<double> dense;  // float32 precision
    SparseUpdate sparse;
    QuantizedUpdate quantized;
    std::vector<std::vector<std::uint8_t>> ciphertexts;
};

// Validates magic, version, tag, and payload length; throws ProtocolError
// on any malformed input.
WireMessage deserialize(const std::vector<std::uint8_t>& bytes);

}  // namespace fedsim
