#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/wire.hpp"

using namespace fedsim;

namespace {

ParamVector vec(std::vector<double> v) {
    auto layout = make_dense_layout(v.size());
    return ParamVector(std::move(layout), std::move(v));
}

}  // namespace

TEST_CASE("dense golden bytes") {
    const auto bytes = serialize_dense(vec({1.0, -2.0}));
    const std::vector<std::uint8_t> expected = {
        0x31, 0x55, 0x44, 0x46,  // magic 0x46445531 little-endian
        0x01,                    // version
        0x00,                    // tag dense
        0x00, 0x00,              // reserved
        0x02, 0x00, 0x00, 0x00,  // dim
        0x02, 0x00, 0x00, 0x00,  // count == dim
        0x00, 0x00, 0x80, 0x3F,  // 1.0f
        0x00, 0x00, 0x00, 0xC0,  // -2.0f
    };
    CHECK(bytes == expected);
}

TEST_CASE("sparse golden bytes") {
    SparseUpdate s;
    s.dim = 4;
    s.indices = {1, 3};
    s.values = {0.5, 1.0};
    const auto bytes = serialize_sparse(s);
    const std::vector<std::uint8_t> expected = {
        0x31, 0x55, 0x44, 0x46, 0x01, 0x01, 0x00, 0x00,
        0x04, 0x00, 0x00, 0x00,  // dim 4
        0x02, 0x00, 0x00, 0x00,  // nnz 2
        0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x3F,  // idx 1, 0.5f
        0x03, 0x00, 0x00, 0x00, 0x00, 0x00, 0x80, 0x3F,  // idx 3, 1.0f
    };
    CHECK(bytes == expected);
}

TEST_CASE("quantized payload packs codes LSB first") {
    QuantizedUpdate q;
    q.dim = 3;
    q.bits = 4;
    q.lo = 0.0;
    q.hi = 1.0;
    q.codes = {0x1, 0xF, 0x3};
    const auto bytes = serialize_quantized(q);
    // header 16 + lo 4 + hi 4 + packed 2
    REQUIRE(bytes.size() == 26);
    CHECK(bytes[5] == 0x02);   // tag quantized
    CHECK(bytes[12] == 0x04);  // count carries bits
    CHECK(bytes[24] == 0xF1);  // code0 in low nibble, code1 in high
    CHECK(bytes[25] == 0x03);
}

TEST_CASE("every encoding survives a serialize/deserialize roundtrip") {
    Rng rng(3);

    SUBCASE("dense") {
        std::vector<double> v(17);
        // Values representable exactly at 32-bit so the roundtrip is equality.
        for (auto& x : v) x = static_cast<double>(static_cast<float>(rng.uniform(-2, 2)));
        const auto msg = deserialize(serialize_dense(vec(v)));
        CHECK(msg.encoding == WireEncoding::kDense);
        CHECK(msg.dim == 17);
        REQUIRE(msg.dense.size() == 17);
        for (std::size_t i = 0; i < v.size(); ++i) CHECK(msg.dense[i] == v[i]);
    }

    SUBCASE("sparse") {
        SparseUpdate s;
        s.dim = 50;
        s.indices = {0, 7, 23, 49};
        s.values = {1.5, -0.25, 3.0, -8.0};
        const auto msg = deserialize(serialize_sparse(s));
        CHECK(msg.encoding == WireEncoding::kSparse);
        CHECK(msg.sparse.dim == 50);
        CHECK(msg.sparse.indices == s.indices);
        CHECK(msg.sparse.values == s.values);
    }

    SUBCASE("quantized") {
        QuantizedUpdate q;
        q.dim = 9;
        q.bits = 6;
        q.lo = -1.25;
        q.hi = 0.75;
        for (std::uint32_t i = 0; i < 9; ++i) q.codes.push_back((i * 11) % 64);
        const auto msg = deserialize(serialize_quantized(q));
        CHECK(msg.encoding == WireEncoding::kQuantized);
        CHECK(msg.quantized.bits == 6);
        CHECK(msg.quantized.codes == q.codes);
        CHECK(msg.quantized.lo == doctest::Approx(-1.25).epsilon(1e-7));
        CHECK(msg.quantized.hi == doctest::Approx(0.75).epsilon(1e-7));
    }

    SUBCASE("encrypted") {
        const std::vector<std::vector<std::uint8_t>> cts = {{0xDE, 0xAD}, {}, {0x01, 0x02, 0x03}};
        const auto msg = deserialize(serialize_encrypted(3, cts));
        CHECK(msg.encoding == WireEncoding::kEncrypted);
        CHECK(msg.dim == 3);
        CHECK(msg.ciphertexts == cts);
    }
}

TEST_CASE("random sparse updates roundtrip across many shapes") {
    Rng rng(8);
    for (int rep = 0; rep < 50; ++rep) {
        SparseUpdate s;
        s.dim = 1 + static_cast<std::uint32_t>(rng.below(200));
        const std::size_t nnz = rng.below(s.dim + 1);
        for (std::uint32_t i = 0, placed = 0; i < s.dim && placed < nnz; ++i) {
            if (rng.bernoulli(0.5)) {
                s.indices.push_back(i);
                s.values.push_back(
                    static_cast<double>(static_cast<float>(rng.uniform(-4, 4))));
                ++placed;
            }
        }
        const auto msg = deserialize(serialize_sparse(s));
        CHECK(msg.sparse.indices == s.indices);
        CHECK(msg.sparse.values == s.values);
    }
}

TEST_CASE("malformed messages are rejected") {
    const auto good = serialize_dense(vec({1.0, 2.0}));

    SUBCASE("truncated header") {
        std::vector<std::uint8_t> b(good.begin(), good.begin() + 10);
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("bad magic") {
        auto b = good;
        b[0] ^= 0xFF;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("unsupported version") {
        auto b = good;
        b[4] = 9;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("unknown tag") {
        auto b = good;
        b[5] = 7;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("reserved bits set") {
        auto b = good;
        b[6] = 1;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("dense count mismatch") {
        auto b = good;
        b[12] = 3;  // count != dim
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("payload truncated") {
        auto b = good;
        b.pop_back();
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("trailing garbage") {
        auto b = good;
        b.push_back(0);
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
}

TEST_CASE("malformed sparse payloads are rejected") {
    SparseUpdate s;
    s.dim = 10;
    s.indices = {2, 5};
    s.values = {1.0, 2.0};
    const auto good = serialize_sparse(s);

    SUBCASE("nnz beyond dim") {
        auto b = good;
        b[12] = 11;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("non-ascending indices") {
        auto b = good;
        // first index 2 -> 7, making the pair (7, 5) descend
        b[16] = 7;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("index out of range") {
        auto b = good;
        b[24] = 10;  // second index == dim
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
}

TEST_CASE("malformed quantized payloads are rejected") {
    QuantizedUpdate q;
    q.dim = 4;
    q.bits = 8;
    q.lo = 0;
    q.hi = 1;
    q.codes = {0, 1, 2, 3};
    const auto good = serialize_quantized(q);

    SUBCASE("bits out of range") {
        auto b = good;
        b[12] = 0;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
        b[12] = 17;
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
    SUBCASE("short payload") {
        auto b = good;
        b.pop_back();
        CHECK_THROWS_AS((void)deserialize(b), ProtocolError);
    }
}

TEST_CASE("wire sizes match the size accounting helpers") {
    Rng rng(10);
    std::vector<double> v(123);
    for (auto& x : v) x = rng.uniform(-1, 1);
    const auto original = vec(v);
    CHECK(serialize_dense(original).size() == encoded_size_dense(123));

    const auto s = topk(original, 0.13);
    CHECK(serialize_sparse(s).size() == encoded_size(s));

    const auto q = quantize(original, 5);
    CHECK(serialize_quantized(q).size() == encoded_size(q));

    const std::vector<std::vector<std::uint8_t>> cts = {{1}, {2, 3}};
    CHECK(serialize_encrypted(2, cts).size() == encoded_size_encrypted(cts));
}
