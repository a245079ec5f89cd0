#pragma once
// Deterministic seeded randomness. Every random choice in the library flows
// through a SeededRng so protocol runs are reproducible; forks give each
// party / session an independent stream keyed by a label.

#include <cstdint>
#include <string>

#include "vhtlp/bytes.hpp"
#include "vhtlp/sha256.hpp"

namespace vhtlp {

class SeededRng {
  public:
    explicit SeededRng(std::uint64_t seed) : key_(hmac_sha256(from_string("vhtlp-seed"), be64(seed))) {}

    explicit SeededRng(Bytes key) : key_(std::move(key)) {}

    SeededRng fork(const std::string& label, std::uint64_t index = 0) const {
        Bytes input = encode_bytes(from_string(label));
        append(input, be64(index));
        return SeededRng(hmac_sha256(key_, concat(from_string("fork"), input)));
    }

    void fill(std::uint8_t* out, std::size_t len) {
        while (len > 0) {
            if (pos_ == buffer_.size()) {
                buffer_ = hmac_sha256(key_, concat(from_string("block"), be64(counter_++)));
                pos_ = 0;
            }
            std::size_t take = std::min(len, buffer_.size() - pos_);
            std::memcpy(out, buffer_.data() + pos_, take);
            pos_ += take;
            out += take;
            len -= take;
        }
    }

    Bytes bytes(std::size_t len) {
        Bytes out(len);
        fill(out.data(), len);
        return out;
    }

    std::uint64_t u64() {
        Bytes b = bytes(8);
        std::uint64_t v = 0;
        for (std::uint8_t byte : b) v = (v << 8) | byte;
        return v;
    }

    // Uniform in [0, bound) by rejection sampling; exact, no modular bias.
    mpz_class below(const mpz_class& bound) {
        if (bound <= 0) throw Error("SeededRng::below: bound must be positive");
        std::size_t bits = mpz_sizeinbase(bound.get_mpz_t(), 2);
        std::size_t nbytes = (bits + 7) / 8;
        unsigned top_mask = bits % 8 == 0 ? 0xff : ((1u << (bits % 8)) - 1);
        for (;;) {
            Bytes b = bytes(nbytes);
            b[0] &= static_cast<std::uint8_t>(top_mask);
            mpz_class v = int_from_bytes(b);
            if (v < bound) return v;
        }
    }

    // Uniform in [lo, hi).
    mpz_class range(const mpz_class& lo, const mpz_class& hi) {
        if (hi <= lo) throw Error("SeededRng::range: empty range");
        return lo + below(hi - lo);
    }

    // Random prime with exactly `bits` bits (top bit set), Miller-Rabin
    // checked with 40 rounds via GMP.
    mpz_class prime(unsigned bits, unsigned max_attempts = 100000) {
        if (bits < 2) throw Error("SeededRng::prime: bits must be >= 2");
        mpz_class top = mpz_class(1) << (bits - 1);
        for (unsigned attempt = 0; attempt < max_attempts; ++attempt) {
            mpz_class candidate = top + below(top);
            mpz_setbit(candidate.get_mpz_t(), 0);
            if (mpz_probab_prime_p(candidate.get_mpz_t(), 40) > 0) return candidate;
        }
        throw Error("SeededRng::prime: no prime found within attempt cap");
    }

  private:
    Bytes key_;
    std::uint64_t counter_ = 0;
    Bytes buffer_;
    std::size_t pos_ = 0;
};

inline bool is_probable_prime(const mpz_class& n, int rounds = 40) {
    return mpz_probab_prime_p(n.get_mpz_t(), rounds) > 0;
}

}  // namespace vhtlp
