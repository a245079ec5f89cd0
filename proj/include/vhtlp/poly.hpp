#pragma once
// Polynomials over F_p: coefficient form, point-value form, Horner
// evaluation, Lagrange interpolation, and root extraction via gcd with
// x^p - x followed by randomized equal-degree splitting.

#include <algorithm>
#include <vector>

#include "vhtlp/field.hpp"

namespace vhtlp {

struct DuplicatePointError : Error {
    DuplicatePointError() : Error("point-value form requires distinct x-coordinates") {}
};

namespace detail {

// Raw coefficient vectors (low degree first, trailing zeros trimmed) keep the
// root-finding inner loops free of FieldElement wrapper overhead.
using RawPoly = std::vector<mpz_class>;

inline void raw_trim(RawPoly& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

// Remainder of a by monic f, with lazy reduction: only the leading
// coefficient is reduced during elimination (it serves as the quotient
// digit); everything else is reduced once at the end. Input coefficients may
// be any representatives; the output is canonical in [0, p).
inline RawPoly raw_mod(RawPoly a, const RawPoly& f, const mpz_class& p) {
    while (a.size() >= f.size()) {
        mpz_class lead;
        mpz_mod(lead.get_mpz_t(), a.back().get_mpz_t(), p.get_mpz_t());
        std::size_t shift = a.size() - f.size();
        if (lead != 0) {
            for (std::size_t i = 0; i + 1 < f.size(); ++i) mpz_submul(a[shift + i].get_mpz_t(),
                                                                      lead.get_mpz_t(),
                                                                      f[i].get_mpz_t());
        }
        a.pop_back();
    }
    for (auto& c : a) mpz_mod(c.get_mpz_t(), c.get_mpz_t(), p.get_mpz_t());
    raw_trim(a);
    return a;
}

inline RawPoly raw_mulmod(const RawPoly& a, const RawPoly& b, const RawPoly& f, const mpz_class& p) {
    if (a.empty() || b.empty()) return {};
    RawPoly prod(a.size() + b.size() - 1, mpz_class(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            mpz_addmul(prod[i + j].get_mpz_t(), a[i].get_mpz_t(), b[j].get_mpz_t());
    }
    return raw_mod(std::move(prod), f, p);
}

// squaring does the off-diagonal products once and doubles them
inline RawPoly raw_sqrmod(const RawPoly& a, const RawPoly& f, const mpz_class& p) {
    if (a.empty()) return {};
    RawPoly cross(2 * a.size() - 1, mpz_class(0));
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = i + 1; j < a.size(); ++j)
            mpz_addmul(cross[i + j].get_mpz_t(), a[i].get_mpz_t(), a[j].get_mpz_t());
    }
    RawPoly prod(2 * a.size() - 1, mpz_class(0));
    for (std::size_t k = 0; k < prod.size(); ++k) {
        mpz_mul_2exp(prod[k].get_mpz_t(), cross[k].get_mpz_t(), 1);
        if (k % 2 == 0) mpz_addmul(prod[k].get_mpz_t(), a[k / 2].get_mpz_t(), a[k / 2].get_mpz_t());
    }
    return raw_mod(std::move(prod), f, p);
}

// left-to-right exponentiation with a 4-bit window
inline RawPoly raw_powmod(RawPoly base, const mpz_class& exp, const RawPoly& f, const mpz_class& p) {
    if (exp == 0) return RawPoly{mpz_class(1)};
    base = raw_mod(std::move(base), f, p);
    constexpr int kWindow = 4;
    std::vector<RawPoly> table(1u << kWindow);  // table[i] = base^i
    table[0] = RawPoly{mpz_class(1)};
    table[1] = base;
    for (std::size_t i = 2; i < table.size(); ++i) table[i] = raw_mulmod(table[i - 1], base, f, p);

    std::size_t bits = mpz_sizeinbase(exp.get_mpz_t(), 2);
    std::size_t top = ((bits + kWindow - 1) / kWindow) * kWindow;
    RawPoly result{mpz_class(1)};
    bool started = false;
    for (std::size_t pos = top; pos >= kWindow; pos -= kWindow) {
        unsigned digit = 0;
        for (int b = kWindow - 1; b >= 0; --b)
            digit = (digit << 1) | mpz_tstbit(exp.get_mpz_t(), pos - kWindow + static_cast<unsigned>(b));
        if (started)
            for (int s = 0; s < kWindow; ++s) result = raw_sqrmod(result, f, p);
        if (digit != 0) {
            result = started ? raw_mulmod(result, table[digit], f, p) : table[digit];
            started = true;
        }
        if (pos == kWindow) break;
    }
    return result;
}

inline void raw_make_monic(RawPoly& a, const mpz_class& p) {
    if (a.empty() || a.back() == 1) return;
    mpz_class lead_inv = invert_mod(a.back(), p);
    for (auto& c : a) {
        c *= lead_inv;
        mpz_mod(c.get_mpz_t(), c.get_mpz_t(), p.get_mpz_t());
    }
}

// Euclidean gcd with monic normalization at each step.
inline RawPoly raw_gcd(RawPoly a, RawPoly b, const mpz_class& p) {
    raw_trim(a);
    raw_trim(b);
    while (!b.empty()) {
        raw_make_monic(b, p);
        RawPoly r = raw_mod(std::move(a), b, p);
        a = std::move(b);
        b = std::move(r);
    }
    raw_make_monic(a, p);
    return a;
}

}  // namespace detail

class DensePoly {
  public:
    DensePoly(std::vector<FieldElement> coeffs, FieldPtr field)
        : coeffs_(std::move(coeffs)), field_(std::move(field)) {
        for (const auto& c : coeffs_)
            if (c.modulus() != field_->p) throw FieldMismatchError();
        normalize();
    }

    static DensePoly zero_poly(FieldPtr field) { return DensePoly({}, std::move(field)); }

    static DensePoly from_values(std::vector<long> values, const FieldPtr& field) {
        std::vector<FieldElement> coeffs;
        coeffs.reserve(values.size());
        for (long v : values) coeffs.push_back(fe(v, field));
        return DensePoly(std::move(coeffs), field);
    }

    // (x - root) * (x - root2) * ... times an optional leading scalar
    static DensePoly from_roots(const std::vector<FieldElement>& roots, const FieldPtr& field) {
        DensePoly acc({one(field)}, field);
        for (const auto& r : roots) acc = acc * DensePoly({-r, one(field)}, field);
        return acc;
    }

    const std::vector<FieldElement>& coeffs() const { return coeffs_; }
    const FieldPtr& field() const { return field_; }
    bool is_zero() const { return coeffs_.empty(); }
    long degree() const { return static_cast<long>(coeffs_.size()) - 1; }

    FieldElement constant_term() const { return coeffs_.empty() ? zero(field_) : coeffs_.front(); }

    FieldElement evaluate(const FieldElement& x) const {
        if (x.modulus() != field_->p) throw FieldMismatchError();
        mpz_class acc = 0;
        const mpz_class& p = field_->p;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) {
            acc = acc * x.value() + it->value();
            mpz_mod(acc.get_mpz_t(), acc.get_mpz_t(), p.get_mpz_t());
        }
        return FieldElement(acc, field_);
    }

    friend DensePoly operator+(const DensePoly& a, const DensePoly& b) {
        std::vector<FieldElement> out(std::max(a.coeffs_.size(), b.coeffs_.size()), zero(a.field_));
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i < a.coeffs_.size()) out[i] += a.coeffs_[i];
            if (i < b.coeffs_.size()) out[i] += b.coeffs_[i];
        }
        return DensePoly(std::move(out), a.field_);
    }

    friend DensePoly operator*(const DensePoly& a, const DensePoly& b) {
        if (a.is_zero() || b.is_zero()) return zero_poly(a.field_);
        std::vector<FieldElement> out(a.coeffs_.size() + b.coeffs_.size() - 1, zero(a.field_));
        for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
            for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
        return DensePoly(std::move(out), a.field_);
    }

    friend DensePoly operator*(const FieldElement& s, const DensePoly& a) {
        std::vector<FieldElement> out = a.coeffs_;
        for (auto& c : out) c *= s;
        return DensePoly(std::move(out), a.field_);
    }

    friend bool operator==(const DensePoly& a, const DensePoly& b) {
        return a.field_->p == b.field_->p && a.coeffs_ == b.coeffs_;
    }

    detail::RawPoly raw() const {
        detail::RawPoly out;
        out.reserve(coeffs_.size());
        for (const auto& c : coeffs_) out.push_back(c.value());
        return out;
    }

    static DensePoly from_raw(const detail::RawPoly& raw, const FieldPtr& field) {
        std::vector<FieldElement> coeffs;
        coeffs.reserve(raw.size());
        for (const auto& c : raw) coeffs.emplace_back(c, field);
        return DensePoly(std::move(coeffs), field);
    }

  private:
    void normalize() {
        while (!coeffs_.empty() && coeffs_.back().is_zero()) coeffs_.pop_back();
    }

    std::vector<FieldElement> coeffs_;
    FieldPtr field_;
};

struct PointValuePoly {
    std::vector<FieldElement> xs;
    std::vector<FieldElement> ys;

    PointValuePoly(std::vector<FieldElement> xs_in, std::vector<FieldElement> ys_in)
        : xs(std::move(xs_in)), ys(std::move(ys_in)) {
        if (xs.empty() || xs.size() != ys.size())
            throw Error("PointValuePoly: need equally many xs and ys, at least one");
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (xs[i].is_zero()) throw Error("PointValuePoly: x-coordinates must be nonzero");
            for (std::size_t j = i + 1; j < xs.size(); ++j)
                if (xs[i] == xs[j]) throw DuplicatePointError();
        }
    }

    const FieldPtr& field() const { return xs.front().field(); }
};

inline PointValuePoly sample(const DensePoly& poly, const std::vector<FieldElement>& xs) {
    std::vector<FieldElement> ys;
    ys.reserve(xs.size());
    for (const auto& x : xs) ys.push_back(poly.evaluate(x));
    return PointValuePoly(xs, ys);
}

// Lagrange interpolation: the unique polynomial of degree < |points|
// through all points.
inline DensePoly interpolate(const PointValuePoly& points) {
    const FieldPtr& f = points.field();
    const mpz_class& p = f->p;
    const std::size_t n = points.xs.size();

    // master = prod (x - x_j)
    detail::RawPoly master{mpz_class(1)};
    for (const auto& x : points.xs) {
        detail::RawPoly next(master.size() + 1, mpz_class(0));
        mpz_class neg_x = p - x.value();
        mpz_mod(neg_x.get_mpz_t(), neg_x.get_mpz_t(), p.get_mpz_t());
        for (std::size_t i = 0; i < master.size(); ++i) {
            next[i + 1] += master[i];
            next[i] += master[i] * neg_x;
        }
        for (auto& c : next) mpz_mod(c.get_mpz_t(), c.get_mpz_t(), p.get_mpz_t());
        master = std::move(next);
    }

    detail::RawPoly acc(n, mpz_class(0));
    for (std::size_t i = 0; i < n; ++i) {
        // basis_i = master / (x - x_i), by synthetic division
        detail::RawPoly basis(n, mpz_class(0));
        mpz_class carry = 0;
        const mpz_class& xi = points.xs[i].value();
        for (std::size_t k = n; k-- > 0;) {
            carry = master[k + 1] + carry * xi;
            mpz_mod(carry.get_mpz_t(), carry.get_mpz_t(), p.get_mpz_t());
            basis[k] = carry;
        }
        // denom = basis_i(x_i)
        mpz_class denom = 0;
        for (std::size_t k = basis.size(); k-- > 0;) {
            denom = denom * xi + basis[k];
            mpz_mod(denom.get_mpz_t(), denom.get_mpz_t(), p.get_mpz_t());
        }
        mpz_class scale = points.ys[i].value() * invert_mod(denom, p);
        mpz_mod(scale.get_mpz_t(), scale.get_mpz_t(), p.get_mpz_t());
        for (std::size_t k = 0; k < n; ++k) {
            acc[k] += basis[k] * scale;
            mpz_mod(acc[k].get_mpz_t(), acc[k].get_mpz_t(), p.get_mpz_t());
        }
    }
    detail::raw_trim(acc);
    return DensePoly::from_raw(acc, f);
}

// ys_i = sum_j coeffs_j * polys_j.ys_i; all polys must share one x-grid.
inline PointValuePoly pointwise_combine(const std::vector<FieldElement>& coeffs,
                                        const std::vector<PointValuePoly>& polys) {
    if (coeffs.empty() || coeffs.size() != polys.size())
        throw Error("pointwise_combine: need one coefficient per polynomial");
    const auto& grid = polys.front().xs;
    for (const auto& poly : polys)
        if (poly.xs != grid) throw Error("pointwise_combine: mismatched x-grids");
    std::vector<FieldElement> ys(grid.size(), zero(polys.front().field()));
    for (std::size_t j = 0; j < polys.size(); ++j)
        for (std::size_t i = 0; i < grid.size(); ++i) ys[i] += coeffs[j] * polys[j].ys[i];
    return PointValuePoly(grid, ys);
}

namespace detail {

// quotient of a by monic divisor d, assuming d | a
inline RawPoly raw_divexact(const RawPoly& a, const RawPoly& d, const mpz_class& p) {
    RawPoly quotient(a.size() - d.size() + 1, mpz_class(0));
    RawPoly rem = a;
    mpz_class t;
    while (rem.size() >= d.size()) {
        mpz_class lead = rem.back();
        std::size_t shift = rem.size() - d.size();
        quotient[shift] = lead;
        for (std::size_t i = 0; i + 1 < d.size(); ++i) {
            t = lead * d[i];
            rem[shift + i] -= t;
            mpz_mod(rem[shift + i].get_mpz_t(), rem[shift + i].get_mpz_t(), p.get_mpz_t());
        }
        rem.pop_back();
    }
    raw_trim(quotient);
    return quotient;
}

inline void split_linear(const RawPoly& g, const mpz_class& p, const FieldPtr& f, SeededRng& rng,
                         std::vector<FieldElement>& roots, unsigned& budget) {
    if (g.size() <= 1) return;
    if (g.size() == 2) {
        // monic x + c0 -> root p - c0
        roots.emplace_back(p - g[0], f);
        return;
    }
    mpz_class half = (p - 1) / 2;
    for (;;) {
        if (budget == 0) throw Error("find_roots: equal-degree splitting exceeded retry cap");
        --budget;
        mpz_class delta = rng.below(p);
        RawPoly shifted{delta, mpz_class(1)};
        RawPoly h = raw_powmod(shifted, half, g, p);
        if (h.empty())
            h = RawPoly{p - 1};
        else {
            h[0] -= 1;
            mpz_mod(h[0].get_mpz_t(), h[0].get_mpz_t(), p.get_mpz_t());
            raw_trim(h);
        }
        RawPoly d = raw_gcd(g, h, p);
        if (d.size() > 1 && d.size() < g.size()) {
            RawPoly rest = raw_divexact(g, d, p);
            split_linear(d, p, f, rng, roots, budget);
            split_linear(rest, p, f, rng, roots, budget);
            return;
        }
    }
}

}  // namespace detail

// All roots of poly in F_p. Fresh randomness per split; 64 split attempts
// total before giving up.
inline std::vector<FieldElement> find_roots(const DensePoly& poly, SeededRng& rng) {
    if (poly.is_zero()) throw Error("find_roots: zero polynomial");
    if (poly.degree() < 1) return {};
    const FieldPtr& f = poly.field();
    const mpz_class& p = f->p;

    std::vector<FieldElement> roots;
    if (p < 64) {
        // tiny fields: direct scan is both the simplest and the fastest
        for (mpz_class x = 0; x < p; ++x)
            if (poly.evaluate(FieldElement(x, f)).is_zero()) roots.emplace_back(x, f);
        return roots;
    }

    detail::RawPoly fraw = poly.raw();
    detail::raw_make_monic(fraw, p);

    // x^p mod f, then gcd with x^p - x keeps exactly the distinct linear part
    detail::RawPoly x_poly{mpz_class(0), mpz_class(1)};
    detail::RawPoly xp = detail::raw_powmod(x_poly, p, fraw, p);
    // xp - x
    if (xp.size() < 2) xp.resize(2, mpz_class(0));
    xp[1] -= 1;
    mpz_mod(xp[1].get_mpz_t(), xp[1].get_mpz_t(), p.get_mpz_t());
    detail::raw_trim(xp);
    detail::RawPoly linear_part = detail::raw_gcd(fraw, xp, p);

    unsigned budget = 64;
    detail::split_linear(linear_part, p, f, rng, roots, budget);
    std::sort(roots.begin(), roots.end(),
              [](const FieldElement& a, const FieldElement& b) { return a.value() < b.value(); });
    return roots;
}

}  // namespace vhtlp
