#pragma once
// Arithmetic in the prime field F_p and plain modular arithmetic over
// RSA-style moduli. All values are arbitrary precision.

#include <memory>
#include <vector>

#include "vhtlp/bytes.hpp"
#include "vhtlp/rng.hpp"

namespace vhtlp {

struct FieldMismatchError : Error {
    FieldMismatchError() : Error("field elements belong to different fields") {}
};

struct NonInvertibleError : Error {
    NonInvertibleError() : Error("element has no modular inverse") {}
};

struct FieldParams {
    mpz_class p;
    unsigned bits;

    explicit FieldParams(mpz_class prime) : p(std::move(prime)) {
        if (!is_probable_prime(p)) throw Error("FieldParams: modulus is not prime");
        bits = static_cast<unsigned>(mpz_sizeinbase(p.get_mpz_t(), 2));
    }
};

using FieldPtr = std::shared_ptr<const FieldParams>;

inline FieldPtr make_field(const mpz_class& p) { return std::make_shared<FieldParams>(p); }

inline FieldPtr random_field(SeededRng& rng, unsigned bits) { return make_field(rng.prime(bits)); }

class FieldElement {
  public:
    FieldElement() = default;

    FieldElement(mpz_class value, FieldPtr field) : v_(std::move(value)), f_(std::move(field)) {
        if (!f_) throw Error("FieldElement: null field");
        mpz_mod(v_.get_mpz_t(), v_.get_mpz_t(), f_->p.get_mpz_t());
    }

    const mpz_class& value() const { return v_; }
    const FieldPtr& field() const { return f_; }
    const mpz_class& modulus() const { return f_->p; }

    bool is_zero() const { return v_ == 0; }

    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.v_ == b.v_ && a.f_->p == b.f_->p;
    }
    friend bool operator!=(const FieldElement& a, const FieldElement& b) { return !(a == b); }

    friend FieldElement operator+(const FieldElement& a, const FieldElement& b) {
        a.check_same(b);
        return FieldElement(a.v_ + b.v_, a.f_);
    }
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b) {
        a.check_same(b);
        return FieldElement(a.v_ - b.v_, a.f_);
    }
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b) {
        a.check_same(b);
        return FieldElement(a.v_ * b.v_, a.f_);
    }
    friend FieldElement operator-(const FieldElement& a) { return FieldElement(-a.v_, a.f_); }

    FieldElement& operator+=(const FieldElement& b) { return *this = *this + b; }
    FieldElement& operator-=(const FieldElement& b) { return *this = *this - b; }
    FieldElement& operator*=(const FieldElement& b) { return *this = *this * b; }

  private:
    void check_same(const FieldElement& other) const {
        if (f_.get() != other.f_.get() && f_->p != other.f_->p) throw FieldMismatchError();
    }

    mpz_class v_;
    FieldPtr f_;
};

inline FieldElement fe(const mpz_class& v, const FieldPtr& f) { return FieldElement(v, f); }
inline FieldElement fe(long v, const FieldPtr& f) { return FieldElement(mpz_class(v), f); }
inline FieldElement zero(const FieldPtr& f) { return fe(0, f); }
inline FieldElement one(const FieldPtr& f) { return fe(1, f); }

inline FieldElement add(const FieldElement& a, const FieldElement& b) { return a + b; }
inline FieldElement sub(const FieldElement& a, const FieldElement& b) { return a - b; }
inline FieldElement mul(const FieldElement& a, const FieldElement& b) { return a * b; }
inline FieldElement neg(const FieldElement& a) { return -a; }

// Extended-Euclid modular inverse; works for any modulus, so it is reused
// for Z_N as well as F_p.
inline mpz_class invert_mod(const mpz_class& a, const mpz_class& modulus) {
    mpz_class out;
    if (mpz_invert(out.get_mpz_t(), a.get_mpz_t(), modulus.get_mpz_t()) == 0) throw NonInvertibleError();
    return out;
}

inline FieldElement inv(const FieldElement& a) {
    if (a.is_zero()) throw NonInvertibleError();
    return FieldElement(invert_mod(a.value(), a.modulus()), a.field());
}

inline FieldElement random_element(SeededRng& rng, const FieldPtr& f) {
    return FieldElement(rng.below(f->p), f);
}

inline FieldElement random_nonzero(SeededRng& rng, const FieldPtr& f) {
    for (;;) {
        FieldElement e = random_element(rng, f);
        if (!e.is_zero()) return e;
    }
}

// Square-and-multiply exponentiation; exponent must be non-negative.
inline mpz_class pow_mod(const mpz_class& base, const mpz_class& exp, const mpz_class& modulus) {
    if (modulus < 2) throw Error("pow_mod: modulus must be >= 2");
    if (exp < 0) throw Error("pow_mod: exponent must be >= 0");
    mpz_class out;
    mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), modulus.get_mpz_t());
    return out;
}

inline FieldElement pow(const FieldElement& base, const mpz_class& exp) {
    return FieldElement(pow_mod(base.value(), exp, base.modulus()), base.field());
}

}  // namespace vhtlp
