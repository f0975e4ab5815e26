// Differential-privacy noise and Paillier additive-homomorphic secure
// aggregation. Big-integer arithmetic is GMP; primality testing, key
// assembly, and the protocol itself are implemented here. The keyholder is
// a role distinct from the server: the server only multiplies ciphertexts,
// and every decryption ticks an audit counter so tests can assert that
// nothing but aggregates was ever opened.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <vector>

#include "fedsim/params.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

struct DpConfig {
    bool enabled = false;
    double sigma = 0.1;      // noise multiplier
    double clip_norm = 1.0;  // L2 bound C
};

// delta rescaled by min(1, C/||delta||).
ParamVector clip_to_norm(const ParamVector& delta, double clip_norm);

// Clip, then add i.i.d. N(0, (sigma*C)^2) per coordinate, seeded.
ParamVector gaussian_mechanism(const ParamVector& delta, const DpConfig& cfg, std::uint64_t seed);

using Ciphertext = mpz_class;

struct PaillierPublicKey {
    mpz_class n;
    mpz_class n2;  // n^2, cached
};

struct PaillierSecretKey {
    mpz_class lambda;  // lcm(p-1, q-1)
    mpz_class mu;      // lambda^{-1} mod n
};

struct PaillierKeyPair {
    PaillierPublicKey pk;
    PaillierSecretKey sk;
};

// Deterministic Miller-Rabin with `rounds` random bases drawn from rng.
bool is_probable_prime(const mpz_class& n, int rounds, Rng& rng);

// Two distinct random primes of bits/2 each (bits even, >= 64); g = n+1.
PaillierKeyPair paillier_keygen(unsigned bits, std::uint64_t seed);

// Key assembly from explicit primes, for small-modulus exhaustive tests.
PaillierKeyPair paillier_from_primes(const mpz_class& p, const mpz_class& q);

// c = (1 + m*n) * r^n mod n^2 with r a fresh unit mod n.
Ciphertext paillier_encrypt(const PaillierPublicKey& pk, const mpz_class& m, Rng& rng);

mpz_class paillier_decrypt(const PaillierPublicKey& pk, const PaillierSecretKey& sk,
                           const Ciphertext& c);

// Homomorphic addition: decrypts to (m1 + m2) mod n.
Ciphertext paillier_add(const PaillierPublicKey& pk, const Ciphertext& a, const Ciphertext& b);

// Big-endian magnitude bytes for the wire (empty for zero).
std::vector<std::uint8_t> mpz_to_bytes(const mpz_class& x);
mpz_class bytes_to_mpz(const std::vector<std::uint8_t>& bytes);

// Signed reals in Z_n: x = round(v*scale), negatives stored as n - |x|.
// Sums of up to `num_addends` encodings must stay below n/2 in magnitude.
struct FixedPointCodec {
    mpz_class modulus;
    std::uint64_t scale = std::uint64_t{1} << 16;
};

mpz_class fp_encode(double v, const FixedPointCodec& codec, std::size_t num_addends = 1);
double fp_decode(const mpz_class& m, const FixedPointCodec& codec);

struct EncryptedUpdate {
    std::size_t client_id = 0;
    std::size_t num_samples = 1;
    std::vector<Ciphertext> coords;
};

// Holds the secret key away from the server and counts every decryption.
class KeyHolder {
public:
    explicit KeyHolder(PaillierKeyPair keys) : keys_(std::move(keys)) {}

    const PaillierPublicKey& pk() const { return keys_.pk; }

    // One audit tick per call, regardless of vector width.
    std::vector<mpz_class> decrypt_aggregate(const std::vector<Ciphertext>& aggregate);

    std::size_t decrypt_calls() const { return decrypt_calls_; }

private:
    PaillierKeyPair keys_;
    std::size_t decrypt_calls_ = 0;
};

// Homomorphically sums per-coordinate ciphertexts (clients pre-scale their
// deltas by num_samples before encoding), has the keyholder decrypt the
// single aggregate, and divides by the total sample count.
ParamVector secure_aggregate(const std::vector<EncryptedUpdate>& updates, KeyHolder& keyholder,
                             const FixedPointCodec& codec, LayoutPtr layout);

}  // namespace fedsim
