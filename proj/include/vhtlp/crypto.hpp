#pragma once
// PRF into F_p (and into Z_N when a base must be derived there), key
// derivation, the hash G, and the hash-based commitment scheme.
//
// The PRF is a keyed hash: output blocks are HMAC-SHA256(key, input ||
// enc(counter)), concatenated until 2 * bitlen(modulus) bits are available,
// then reduced. Doubling the bit count keeps the modular-reduction bias
// below 2^-128 for the field sizes in use.

#include "vhtlp/field.hpp"
#include "vhtlp/sha256.hpp"

namespace vhtlp {

struct PrfKey {
    Bytes bytes;

    PrfKey() = default;
    explicit PrfKey(Bytes b) : bytes(std::move(b)) {
        if (bytes.empty()) throw Error("PrfKey: empty key");
    }

    static PrfKey from_integer(const mpz_class& v) { return PrfKey(encode_int(v)); }
    static PrfKey random(SeededRng& rng, std::size_t len = 32) { return PrfKey(rng.bytes(len)); }

    friend bool operator==(const PrfKey& a, const PrfKey& b) { return a.bytes == b.bytes; }
    friend bool operator!=(const PrfKey& a, const PrfKey& b) { return !(a == b); }
};

struct Commitment {
    Bytes digest;

    friend bool operator==(const Commitment& a, const Commitment& b) { return a.digest == b.digest; }
    friend bool operator!=(const Commitment& a, const Commitment& b) { return !(a == b); }
};

// Deterministic expansion of (input, key) to an integer in [0, modulus).
inline mpz_class prf_mod(const Bytes& input, const PrfKey& key, const mpz_class& modulus) {
    if (modulus < 2) throw Error("prf_mod: modulus must be >= 2");
    std::size_t bits = 2 * mpz_sizeinbase(modulus.get_mpz_t(), 2);
    std::size_t need = (bits + 7) / 8;
    Bytes stream;
    stream.reserve(need + Sha256::kDigestLen);
    std::uint64_t counter = 0;
    while (stream.size() < need) {
        Bytes block = hmac_sha256(key.bytes, concat(input, encode_int(counter++)));
        append(stream, block);
    }
    stream.resize(need);
    mpz_class v = int_from_bytes(stream);
    mpz_mod(v.get_mpz_t(), v.get_mpz_t(), modulus.get_mpz_t());
    return v;
}

inline FieldElement prf(const Bytes& input, const PrfKey& key, const FieldPtr& field) {
    return FieldElement(prf_mod(input, key, field->p), field);
}

// PRF(i, key) with the protocol's canonical integer encoding of i.
inline FieldElement prf_index(std::uint64_t i, const PrfKey& key, const FieldPtr& field) {
    return prf(encode_int(i), key, field);
}

// k = PRF(1, mk), s = PRF(2, mk): two domain-separated keys from a master key.
inline std::pair<PrfKey, PrfKey> prf_derive_pair(const PrfKey& mk) {
    return {PrfKey(hmac_sha256(mk.bytes, encode_int(std::uint64_t(1)))),
            PrfKey(hmac_sha256(mk.bytes, encode_int(std::uint64_t(2))))};
}

// G: {0,1}* -> fixed-length digests.
inline Bytes hash_g(const Bytes& input) { return Sha256::hash(input); }

// Com(m, r) = Q(m || r) over the canonical encoding.
inline Commitment commit(const FieldElement& message, const mpz_class& randomness) {
    return Commitment{Sha256::hash(concat(encode_int(message.value()), encode_int(randomness)))};
}

inline bool verify_commit(const Commitment& com, const FieldElement& message, const mpz_class& randomness) {
    return commit(message, randomness) == com;
}

}  // namespace vhtlp
