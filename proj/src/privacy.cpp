#include "fedsim/privacy.hpp"

#include <cmath>

namespace fedsim {
namespace {

// Uniform mpz in [0, 2^bits) from the deterministic generator.
mpz_class random_bits(unsigned bits, Rng& rng) {
    mpz_class x = 0;
    const unsigned words = (bits + 63) / 64;
    for (unsigned i = 0; i < words; ++i) {
        const std::uint64_t w = rng.next_u64();
        mpz_class word;
        mpz_import(word.get_mpz_t(), 1, 1, sizeof w, 0, 0, &w);
        x <<= 64;
        x |= word;
    }
    const unsigned excess = words * 64 - bits;
    if (excess) x >>= excess;
    return x;
}

// Uniform in [lo, hi] by rejection over the covering power of two.
mpz_class random_range(const mpz_class& lo, const mpz_class& hi, Rng& rng) {
    const mpz_class span = hi - lo + 1;
    const auto bits = static_cast<unsigned>(mpz_sizeinbase(span.get_mpz_t(), 2));
    while (true) {
        mpz_class x = random_bits(bits, rng);
        if (x < span) return lo + x;
    }
}

const int kSmallPrimes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43,
                            47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107,
                            109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173};

mpz_class random_prime(unsigned bits, Rng& rng) {
    if (bits < 2) throw ConfigError("paillier_bits", "prime width too small");
    while (true) {
        mpz_class candidate = random_bits(bits, rng);
        // Top two bits set: the product of two such primes always has the
        // full 2*bits width, never one bit short.
        mpz_setbit(candidate.get_mpz_t(), bits - 1);
        mpz_setbit(candidate.get_mpz_t(), bits - 2);
        mpz_setbit(candidate.get_mpz_t(), 0);  // odd
        if (is_probable_prime(candidate, 40, rng)) return candidate;
    }
}

}  // namespace

bool is_probable_prime(const mpz_class& n, int rounds, Rng& rng) {
    if (n < 2) return false;
    for (int p : kSmallPrimes) {
        if (n == p) return true;
        if (mpz_divisible_ui_p(n.get_mpz_t(), static_cast<unsigned long>(p))) return false;
    }

    // n-1 = 2^r * d with d odd
    mpz_class d = n - 1;
    unsigned long r = 0;
    while (mpz_even_p(d.get_mpz_t())) {
        d >>= 1;
        ++r;
    }

    const mpz_class n_minus_1 = n - 1;
    for (int i = 0; i < rounds; ++i) {
        const mpz_class a = random_range(2, n - 2, rng);
        mpz_class x;
        mpz_powm(x.get_mpz_t(), a.get_mpz_t(), d.get_mpz_t(), n.get_mpz_t());
        if (x == 1 || x == n_minus_1) continue;
        bool witness = true;
        for (unsigned long j = 0; j + 1 < r; ++j) {
            x = x * x % n;
            if (x == n_minus_1) {
                witness = false;
                break;
            }
        }
        if (witness) return false;
    }
    return true;
}

PaillierKeyPair paillier_keygen(unsigned bits, std::uint64_t seed) {
    if (bits < 64 || bits % 2 != 0)
        throw ConfigError("paillier_bits", "must be even and at least 64");
    Rng rng(derive_seed(seed, {0x9A1111E5u}));
    while (true) {
        const mpz_class p = random_prime(bits / 2, rng);
        const mpz_class q = random_prime(bits / 2, rng);
        if (p == q) continue;
        mpz_class lambda;
        mpz_lcm(lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(), mpz_class(q - 1).get_mpz_t());
        const mpz_class n = p * q;
        mpz_class mu;
        if (mpz_invert(mu.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t()) == 0) continue;
        return PaillierKeyPair{{n, n * n}, {lambda, mu}};
    }
}

PaillierKeyPair paillier_from_primes(const mpz_class& p, const mpz_class& q) {
    if (p == q || p < 3 || q < 3) throw ConfigError("paillier_primes", "need distinct odd primes");
    mpz_class lambda;
    mpz_lcm(lambda.get_mpz_t(), mpz_class(p - 1).get_mpz_t(), mpz_class(q - 1).get_mpz_t());
    const mpz_class n = p * q;
    mpz_class mu;
    if (mpz_invert(mu.get_mpz_t(), lambda.get_mpz_t(), n.get_mpz_t()) == 0)
        throw ConfigError("paillier_primes", "lambda not invertible mod n");
    return PaillierKeyPair{{n, n * n}, {lambda, mu}};
}

Ciphertext paillier_encrypt(const PaillierPublicKey& pk, const mpz_class& m, Rng& rng) {
    if (m < 0 || m >= pk.n) throw ProtocolError("paillier plaintext out of range");
    mpz_class r, g;
    do {
        r = random_range(1, pk.n - 1, rng);
        mpz_gcd(g.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t());
    } while (g != 1);

    // g = n+1: g^m mod n^2 == 1 + m*n
    const mpz_class gm = (1 + m * pk.n) % pk.n2;
    mpz_class rn;
    mpz_powm(rn.get_mpz_t(), r.get_mpz_t(), pk.n.get_mpz_t(), pk.n2.get_mpz_t());
    return gm * rn % pk.n2;
}

mpz_class paillier_decrypt(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                           const Ciphertext& c) {
    if (c < 0 || c >= pk.n2) throw ProtocolError("ciphertext out of range");
    mpz_class x;
    mpz_powm(x.get_mpz_t(), c.get_mpz_t(), sk.lambda.get_mpz_t(), pk.n2.get_mpz_t());
    const mpz_class l = (x - 1) / pk.n;
    return l * sk.mu % pk.n;
}

Ciphertext paillier_add(const PaillierPublicKey& pk, const Ciphertext& a, const Ciphertext& b) {
    if (a < 0 || a >= pk.n2 || b < 0 || b >= pk.n2)
        throw ProtocolError("ciphertext out of range");
    return a * b % pk.n2;
}

std::vector<std::uint8_t> mpz_to_bytes(const mpz_class& x) {
    if (x < 0) throw ProtocolError("negative big integer on the wire");
    if (x == 0) return {};
    const std::size_t count = (mpz_sizeinbase(x.get_mpz_t(), 2) + 7) / 8;
    std::vector<std::uint8_t> out(count);
    std::size_t written = 0;
    mpz_export(out.data(), &written, 1, 1, 1, 0, x.get_mpz_t());
    out.resize(written);
    return out;
}

mpz_class bytes_to_mpz(const std::vector<std::uint8_t>& bytes) {
    mpz_class x = 0;
    if (!bytes.empty())
        mpz_import(x.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return x;
}

ParamVector clip_to_norm(const ParamVector& delta, double clip_norm) {
    if (clip_norm <= 0.0) throw ConfigError("clip_norm", "must be positive");
    const double norm = l2_norm(delta);
    if (norm <= clip_norm) return delta;
    return scale(clip_norm / norm, delta);
}

ParamVector gaussian_mechanism(const ParamVector& delta, const DpConfig& cfg,
                               std::uint64_t seed) {
    ParamVector out = clip_to_norm(delta, cfg.clip_norm);
    if (cfg.sigma < 0.0) throw ConfigError("dp_sigma", "must be nonnegative");
    if (cfg.sigma == 0.0) return out;
    Rng rng(derive_seed(seed, {0xD9u}));
    const double std_dev = cfg.sigma * cfg.clip_norm;
    for (double& v : out.values()) v += std_dev * rng.normal();
    return out;
}

mpz_class fp_encode(double v, const FixedPointCodec& codec, std::size_t num_addends) {
    if (!std::isfinite(v)) throw ProtocolError("non-finite value in fixed-point encode");
    const double scaled = v * static_cast<double>(codec.scale);
    if (std::fabs(scaled) >= 9.2e18) throw ProtocolError("fixed-point headroom exceeded");
    const long long x = std::llround(scaled);
    const mpz_class mag(static_cast<long>(x < 0 ? -x : x));
    const mpz_class budget =
        mag * static_cast<unsigned long>(num_addends == 0 ? 1 : num_addends) * 2;
    if (budget >= codec.modulus) throw ProtocolError("fixed-point headroom exceeded");
    return x < 0 ? codec.modulus - mag : mag;
}

double fp_decode(const mpz_class& m, const FixedPointCodec& codec) {
    if (m < 0 || m >= codec.modulus) throw ProtocolError("fixed-point residue out of range");
    const mpz_class half = codec.modulus / 2;
    const mpz_class centered = m > half ? mpz_class(m - codec.modulus) : m;
    return centered.get_d() / static_cast<double>(codec.scale);
}

std::vector<mpz_class> KeyHolder::decrypt_aggregate(const std::vector<Ciphertext>& aggregate) {
    ++decrypt_calls_;
    std::vector<mpz_class> out;
    out.reserve(aggregate.size());
    for (const auto& c : aggregate) out.push_back(paillier_decrypt(keys_.pk, keys_.sk, c));
    return out;
}

ParamVector secure_aggregate(const std::vector<EncryptedUpdate>& updates, KeyHolder& keyholder,
                             const FixedPointCodec& codec, LayoutPtr layout) {
    if (updates.empty()) throw ProtocolError("secure aggregation over zero updates");
    const std::size_t dim = updates.front().coords.size();
    if (!layout || layout->dim() != dim)
        throw DimensionError("secure aggregate layout mismatch");

    std::size_t total_samples = 0;
    for (const auto& u : updates) {
        if (u.coords.size() != dim) throw DimensionError("encrypted update width mismatch");
        if (u.num_samples == 0) throw ProtocolError("client update with zero samples");
        total_samples += u.num_samples;
    }

    // Server side: pure ciphertext products, no decryption.
    std::vector<Ciphertext> aggregate = updates.front().coords;
    for (std::size_t u = 1; u < updates.size(); ++u)
        for (std::size_t i = 0; i < dim; ++i)
            aggregate[i] = paillier_add(keyholder.pk(), aggregate[i], updates[u].coords[i]);

    const std::vector<mpz_class> sums = keyholder.decrypt_aggregate(aggregate);
    ParamVector out(std::move(layout));
    const double inv_total = 1.0 / static_cast<double>(total_samples);
    for (std::size_t i = 0; i < dim; ++i) out[i] = fp_decode(sums[i], codec) * inv_total;
    return out;
}

}  // namespace fedsim
