#pragma once
// RSA-group time-lock core: client key material, trapdoor (fast)
// exponentiation via phi(N), honest repeated squaring, and the classic
// RSA time-lock puzzle built on top of a small authenticated cipher.

#include <functional>
#include <optional>

#include "vhtlp/crypto.hpp"
#include "vhtlp/field.hpp"

namespace vhtlp {

struct CancelledError : Error {
    CancelledError() : Error("sequential squaring cancelled by progress callback") {}
};

struct DecryptionError : Error {
    DecryptionError() : Error("authenticated decryption failed; ciphertext or key is wrong") {}
};

struct ClientKeys {
    mpz_class N;
    mpz_class phi;  // secret trapdoor
    unsigned factor_bits = 0;

    static ClientKeys from_factors(const mpz_class& p1, const mpz_class& p2) {
        if (p1 == p2) throw Error("ClientKeys: prime factors must be distinct");
        if (!is_probable_prime(p1) || !is_probable_prime(p2))
            throw Error("ClientKeys: factors must be prime");
        ClientKeys keys;
        keys.N = p1 * p2;
        keys.phi = (p1 - 1) * (p2 - 1);
        keys.factor_bits = static_cast<unsigned>(
            std::max(mpz_sizeinbase(p1.get_mpz_t(), 2), mpz_sizeinbase(p2.get_mpz_t(), 2)));
        return keys;
    }
};

inline ClientKeys keygen(SeededRng& rng, unsigned factor_bits) {
    if (factor_bits < 16) throw Error("keygen: factor_bits must be >= 16");
    mpz_class p1 = rng.prime(factor_bits);
    mpz_class p2;
    do {
        p2 = rng.prime(factor_bits);
    } while (p2 == p1);
    return ClientKeys::from_factors(p1, p2);
}

struct TimelockParams {
    std::uint64_t T;       // total squarings
    std::uint64_t max_ss;  // squarings per second (config, not measured)
    std::uint64_t delta;   // seconds

    static TimelockParams from_delta(std::uint64_t delta, std::uint64_t max_ss) {
        if (delta == 0 || max_ss == 0) throw Error("TimelockParams: delta and max_ss must be >= 1");
        return TimelockParams{delta * max_ss, max_ss, delta};
    }
};

// r^(2^T) mod N in O(log T + log phi) multiplications using the trapdoor.
inline mpz_class trapdoor_power(const mpz_class& r, std::uint64_t T, const ClientKeys& keys) {
    if (r <= 0 || r >= keys.N) throw Error("trapdoor_power: base must satisfy 0 < r < N");
    mpz_class a = pow_mod(2, mpz_class(static_cast<unsigned long>(T)), keys.phi);
    return pow_mod(r, a, keys.N);
}

// Progress callback: invoked with squarings done so far; returning false
// cancels the computation.
using ProgressFn = std::function<bool(std::uint64_t done)>;

inline mpz_class sequential_power(const mpz_class& r, std::uint64_t T, const mpz_class& N,
                                  const ProgressFn& progress = {}, std::uint64_t report_every = 1024) {
    if (r <= 0 || r >= N) throw Error("sequential_power: base must satisfy 0 < r < N");
    mpz_class acc = r;
    for (std::uint64_t i = 0; i < T; ++i) {
        acc *= acc;
        mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), N.get_mpz_t());
        if (progress && ((i + 1) % report_every == 0 || i + 1 == T)) {
            if (!progress(i + 1)) throw CancelledError();
        }
    }
    return acc;
}

namespace ske {

// Encrypt-then-MAC over the HMAC primitive: keystream blocks are
// HMAC(enc_key, nonce || counter), tag is HMAC(mac_key, nonce || ct).
inline constexpr std::size_t kNonceLen = 16;
inline constexpr std::size_t kTagLen = 32;

inline Bytes keygen(SeededRng& rng) { return rng.bytes(32); }

inline Bytes encrypt(const Bytes& key, const Bytes& plaintext, SeededRng& rng) {
    Bytes enc_key = hmac_sha256(key, from_string("enc"));
    Bytes mac_key = hmac_sha256(key, from_string("mac"));
    Bytes nonce = rng.bytes(kNonceLen);
    Bytes ct(plaintext.size());
    std::uint64_t counter = 0;
    for (std::size_t off = 0; off < plaintext.size(); off += Sha256::kDigestLen) {
        Bytes block = hmac_sha256(enc_key, concat(nonce, be64(counter++)));
        for (std::size_t i = 0; i < Sha256::kDigestLen && off + i < plaintext.size(); ++i)
            ct[off + i] = plaintext[off + i] ^ block[i];
    }
    Bytes tag = hmac_sha256(mac_key, concat(nonce, ct));
    Bytes out = nonce;
    append(out, ct);
    append(out, tag);
    return out;
}

inline Bytes decrypt(const Bytes& key, const Bytes& ciphertext) {
    if (ciphertext.size() < kNonceLen + kTagLen) throw DecryptionError();
    Bytes enc_key = hmac_sha256(key, from_string("enc"));
    Bytes mac_key = hmac_sha256(key, from_string("mac"));
    Bytes nonce(ciphertext.begin(), ciphertext.begin() + kNonceLen);
    Bytes ct(ciphertext.begin() + kNonceLen, ciphertext.end() - kTagLen);
    Bytes tag(ciphertext.end() - kTagLen, ciphertext.end());
    if (hmac_sha256(mac_key, concat(nonce, ct)) != tag) throw DecryptionError();
    Bytes pt(ct.size());
    std::uint64_t counter = 0;
    for (std::size_t off = 0; off < ct.size(); off += Sha256::kDigestLen) {
        Bytes block = hmac_sha256(enc_key, concat(nonce, be64(counter++)));
        for (std::size_t i = 0; i < Sha256::kDigestLen && off + i < ct.size(); ++i)
            pt[off + i] = ct[off + i] ^ block[i];
    }
    return pt;
}

}  // namespace ske

// The original RSA time-lock puzzle: the symmetric key rides inside
// o2 = k + r^(2^T) mod N; solving unwinds it by repeated squaring.
struct BaselineTlp {
    struct Puzzle {
        Bytes o1;      // SKE ciphertext of the message
        mpz_class o2;  // k + r^a mod N
        mpz_class N;
        mpz_class r;
        std::uint64_t T;
    };

    static Puzzle gen(const Bytes& message, const ClientKeys& keys, std::uint64_t T, SeededRng& rng) {
        if (mpz_sizeinbase(keys.N.get_mpz_t(), 2) < 280)
            throw Error("BaselineTlp: modulus too small to carry a 256-bit key");
        Bytes k = ske::keygen(rng);
        mpz_class k_int = int_from_bytes(k);
        mpz_class r = rng.range(1, keys.N);
        mpz_class mask = trapdoor_power(r, T, keys);
        Puzzle puzzle;
        puzzle.o1 = ske::encrypt(k, message, rng);
        puzzle.o2 = (k_int + mask) % keys.N;
        puzzle.N = keys.N;
        puzzle.r = r;
        puzzle.T = T;
        return puzzle;
    }

    static Bytes solve(const Puzzle& puzzle, const ProgressFn& progress = {}) {
        mpz_class mask = sequential_power(puzzle.r, puzzle.T, puzzle.N, progress);
        mpz_class k_int = puzzle.o2 - mask;
        mpz_mod(k_int.get_mpz_t(), k_int.get_mpz_t(), puzzle.N.get_mpz_t());
        Bytes k = int_magnitude(k_int);
        if (k.size() > 32) throw DecryptionError();
        Bytes padded(32 - k.size(), 0);
        append(padded, k);
        return ske::decrypt(padded, puzzle.o1);
    }
};

}  // namespace vhtlp
