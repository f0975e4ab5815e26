#include "fedsim/wire.hpp"

#include <cstring>

namespace fedsim {
namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_f32(std::vector<std::uint8_t>& out, float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_u32(out, bits);
}

void put_header(std::vector<std::uint8_t>& out, WireEncoding enc, std::uint32_t dim,
                std::uint32_t count) {
    put_u32(out, kWireMagic);
    out.push_back(kWireVersion);
    out.push_back(static_cast<std::uint8_t>(enc));
    put_u16(out, 0);  // reserved
    put_u32(out, dim);
    put_u32(out, count);
}

struct Reader {
    const std::vector<std::uint8_t>& bytes;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > bytes.size()) throw ProtocolError("wire message truncated");
    }
    std::uint8_t u8() {
        need(1);
        return bytes[pos++];
    }
    std::uint16_t u16() {
        need(2);
        std::uint16_t v = static_cast<std::uint16_t>(bytes[pos]) |
                          static_cast<std::uint16_t>(bytes[pos + 1]) << 8;
        pos += 2;
        return v;
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    float f32() {
        std::uint32_t bits = u32();
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

}  // namespace

std::vector<std::uint8_t> serialize_dense(const ParamVector& values) {
    std::vector<std::uint8_t> out;
    const auto dim = static_cast<std::uint32_t>(values.dim());
    out.reserve(16 + 4 * values.dim());
    put_header(out, WireEncoding::kDense, dim, dim);
    for (std::size_t i = 0; i < values.dim(); ++i) put_f32(out, static_cast<float>(values[i]));
    return out;
}

std::vector<std::uint8_t> serialize_sparse(const SparseUpdate& s) {
    if (s.indices.size() != s.values.size())
        throw DimensionError("sparse index/value length mismatch");
    std::vector<std::uint8_t> out;
    out.reserve(16 + 8 * s.indices.size());
    put_header(out, WireEncoding::kSparse, s.dim, static_cast<std::uint32_t>(s.indices.size()));
    for (std::size_t i = 0; i < s.indices.size(); ++i) {
        put_u32(out, s.indices[i]);
        put_f32(out, static_cast<float>(s.values[i]));
    }
    return out;
}

std::vector<std::uint8_t> serialize_quantized(const QuantizedUpdate& q) {
    if (q.bits < 1 || q.bits > 16) throw ConfigError("quantize_bits", "must be in [1,16]");
    if (q.codes.size() != q.dim) throw DimensionError("quantized code count mismatch");
    std::vector<std::uint8_t> out;
    const std::size_t packed = (static_cast<std::size_t>(q.dim) * q.bits + 7) / 8;
    out.reserve(16 + 8 + packed);
    put_header(out, WireEncoding::kQuantized, q.dim, q.bits);
    put_f32(out, static_cast<float>(q.lo));
    put_f32(out, static_cast<float>(q.hi));
    std::vector<std::uint8_t> bitstream(packed, 0);
    std::size_t bitpos = 0;
    for (std::uint32_t code : q.codes) {
        for (std::uint32_t b = 0; b < q.bits; ++b, ++bitpos) {
            if (code >> b & 1u) bitstream[bitpos >> 3] |= std::uint8_t(1u << (bitpos & 7));
        }
    }
    out.insert(out.end(), bitstream.begin(), bitstream.end());
    return out;
}

std::vector<std::uint8_t> serialize_encrypted(
    std::uint32_t dim, const std::vector<std::vector<std::uint8_t>>& ciphertexts) {
    std::vector<std::uint8_t> out;
    put_header(out, WireEncoding::kEncrypted, dim,
               static_cast<std::uint32_t>(ciphertexts.size()));
    for (const auto& c : ciphertexts) {
        put_u32(out, static_cast<std::uint32_t>(c.size()));
        out.insert(out.end(), c.begin(), c.end());
    }
    return out;
}

WireMessage deserialize(const std::vector<std::uint8_t>& bytes) {
    Reader r{bytes};
    if (r.u32() != kWireMagic) throw ProtocolError("bad wire magic");
    if (r.u8() != kWireVersion) throw ProtocolError("unsupported wire version");
    const std::uint8_t tag = r.u8();
    if (tag > 3) throw ProtocolError("unknown wire encoding tag");
    if (r.u16() != 0) throw ProtocolError("reserved header bits set");

    WireMessage msg;
    msg.encoding = static_cast<WireEncoding>(tag);
    msg.dim = r.u32();
    const std::uint32_t count = r.u32();

    switch (msg.encoding) {
        case WireEncoding::kDense: {
            if (count != msg.dim) throw ProtocolError("dense count must equal dim");
            msg.dense.reserve(msg.dim);
            for (std::uint32_t i = 0; i < msg.dim; ++i)
                msg.dense.push_back(static_cast<double>(r.f32()));
            break;
        }
        case WireEncoding::kSparse: {
            if (count > msg.dim) throw ProtocolError("sparse count exceeds dim");
            msg.sparse.dim = msg.dim;
            std::uint32_t prev = 0;
            for (std::uint32_t i = 0; i < count; ++i) {
                const std::uint32_t idx = r.u32();
                if (idx >= msg.dim) throw ProtocolError("sparse index out of range");
                if (i > 0 && idx <= prev) throw ProtocolError("sparse indices not ascending");
                prev = idx;
                msg.sparse.indices.push_back(idx);
                msg.sparse.values.push_back(static_cast<double>(r.f32()));
            }
            break;
        }
        case WireEncoding::kQuantized: {
            if (count < 1 || count > 16) throw ProtocolError("quantized bit width out of range");
            msg.quantized.dim = msg.dim;
            msg.quantized.bits = count;
            msg.quantized.lo = static_cast<double>(r.f32());
            msg.quantized.hi = static_cast<double>(r.f32());
            const std::size_t packed = (static_cast<std::size_t>(msg.dim) * count + 7) / 8;
            r.need(packed);
            msg.quantized.codes.assign(msg.dim, 0u);
            std::size_t bitpos = 0;
            for (std::uint32_t i = 0; i < msg.dim; ++i) {
                std::uint32_t code = 0;
                for (std::uint32_t b = 0; b < count; ++b, ++bitpos) {
                    if (bytes[r.pos + (bitpos >> 3)] >> (bitpos & 7) & 1u) code |= 1u << b;
                }
                msg.quantized.codes[i] = code;
            }
            r.pos += packed;
            break;
        }
        case WireEncoding::kEncrypted: {
            msg.ciphertexts.reserve(count);
            for (std::uint32_t i = 0; i < count; ++i) {
                const std::uint32_t len = r.u32();
                r.need(len);
                msg.ciphertexts.emplace_back(bytes.begin() + static_cast<std::ptrdiff_t>(r.pos),
                                             bytes.begin() +
                                                 static_cast<std::ptrdiff_t>(r.pos + len));
                r.pos += len;
            }
            break;
        }
    }
    if (r.pos != bytes.size()) throw ProtocolError("trailing bytes after wire payload");
    return msg;
}

}  // namespace fedsim
