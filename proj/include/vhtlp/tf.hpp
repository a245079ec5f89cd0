#pragma once
// The multi-client protocol: server setup, puzzle generation, leader
// selection, the grant computations that re-encode outsourced puzzles
// through enhanced OLE, server-side combination, solving (single puzzle
// and combination), and public verification.
//
// Client indices are 1-based throughout, matching the protocol's party
// naming; vectors are 0-based internally.

#include <future>
#include <map>
#include <optional>
#include <set>
#include <variant>

#include "vhtlp/crypto.hpp"
#include "vhtlp/ole.hpp"
#include "vhtlp/poly.hpp"
#include "vhtlp/timelock.hpp"

namespace vhtlp::tf {

struct ParamsRejectedError : Error {
    ParamsRejectedError() : Error("server parameters rejected by client-side check") {}
};

struct InvalidMessageError : Error {
    InvalidMessageError() : Error("message or coefficient outside the plaintext universe") {}
};

struct TamperSuspectedError : Error {
    explicit TamperSuspectedError(const std::string& what) : Error("tamper suspected: " + what) {}
};

struct SolutionExtractionError : Error {
    explicit SolutionExtractionError(const std::string& what)
        : Error("solution extraction failed: " + what) {}
};

struct OpeningMismatchError : Error {
    unsigned party;
    explicit OpeningMismatchError(unsigned party_in)
        : Error("coin-toss opening does not match commitment of party " + std::to_string(party_in)),
          party(party_in) {}
};

// Plaintext universe U = [0, 2^64); x-coordinates are drawn from [2^64, p)
// so they can never collide with a message.
inline constexpr unsigned kUniverseBits = 64;

inline mpz_class default_universe_bound() { return mpz_class(1) << kUniverseBits; }

struct ServerParams {
    FieldPtr field;
    std::vector<FieldElement> xs;  // |xs| = leader_count + 2
    unsigned leader_count = 0;     // number of leader clients
    unsigned threshold = 0;        // honest-leader threshold, recorded config only
    mpz_class universe_bound;

    unsigned tbar() const { return leader_count + 2; }
};

inline ServerParams make_server_params(FieldPtr field, std::vector<FieldElement> xs, unsigned leader_count,
                                       unsigned threshold, mpz_class universe_bound) {
    if (leader_count < 1 || threshold < 1 || threshold > leader_count)
        throw Error("make_server_params: need 1 <= threshold <= leader_count");
    if (xs.size() != static_cast<std::size_t>(leader_count) + 2)
        throw Error("make_server_params: need leader_count + 2 x-coordinates");
    std::set<mpz_class> seen;
    for (const auto& x : xs) {
        if (x.modulus() != field->p) throw FieldMismatchError();
        if (x.is_zero()) throw Error("make_server_params: x-coordinates must be nonzero");
        if (x.value() < universe_bound)
            throw Error("make_server_params: x-coordinates must lie outside the plaintext universe");
        if (!seen.insert(x.value()).second) throw Error("make_server_params: duplicate x-coordinate");
    }
    return ServerParams{std::move(field), std::move(xs), leader_count, threshold, std::move(universe_bound)};
}

inline ServerParams s_setup(SeededRng& rng, unsigned lambda_bits, unsigned leader_count, unsigned threshold,
                            mpz_class bound = default_universe_bound()) {
    if (mpz_class(1) << (lambda_bits - 2) <= bound)
        throw Error("s_setup: field must be larger than the plaintext universe");
    FieldPtr field = random_field(rng, lambda_bits);
    std::set<mpz_class> seen;
    std::vector<FieldElement> xs;
    while (xs.size() < static_cast<std::size_t>(leader_count) + 2) {
        mpz_class candidate = rng.range(bound, field->p);
        if (seen.insert(candidate).second) xs.emplace_back(candidate, field);
    }
    return make_server_params(field, std::move(xs), leader_count, threshold, bound);
}

inline bool check_server_params(const ServerParams& sp, unsigned min_field_bits = 128) {
    if (!sp.field || sp.field->bits < min_field_bits) return false;
    if (sp.leader_count < 1 || sp.threshold < 1 || sp.threshold > sp.leader_count) return false;
    if (sp.xs.size() != static_cast<std::size_t>(sp.leader_count) + 2) return false;
    std::set<mpz_class> seen;
    for (const auto& x : sp.xs) {
        if (x.modulus() != sp.field->p) return false;
        if (x.is_zero() || x.value() < sp.universe_bound) return false;
        if (!seen.insert(x.value()).second) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// Puzzle generation

struct PuzzleVector {
    std::vector<FieldElement> o;  // encrypted y-coordinates, every entry nonzero
};

struct PuzzlePublicParams {
    Commitment com;
    std::uint64_t T = 0;
    mpz_class r;
    mpz_class N;
};

struct PuzzleSecrets {
    PrfKey k;
    PrfKey s;
    mpz_class mk;  // transient; kept here for white-box tests and fixtures
    mpz_class r;
};

struct GenPuzzleResult {
    PuzzleVector puzzle;
    PuzzlePublicParams pp;
    PuzzleSecrets secrets;
};

// o_i = w_i * (pi_i + z_i); split out so the degenerate unblinded case is
// testable on its own.
inline FieldElement encrypt_coordinate(const FieldElement& pi, const FieldElement& z,
                                       const FieldElement& w) {
    return w * (pi + z);
}

inline std::vector<FieldElement> prf_vector(const PrfKey& key, unsigned count, const FieldPtr& field) {
    std::vector<FieldElement> out;
    out.reserve(count);
    for (unsigned i = 1; i <= count; ++i) out.push_back(prf_index(i, key, field));
    return out;
}

inline GenPuzzleResult gen_puzzle(const mpz_class& m, const ClientKeys& keys, const ServerParams& sp,
                                  const TimelockParams& tl, SeededRng& rng, unsigned min_field_bits = 128) {
    if (m < 0 || m >= sp.universe_bound) throw InvalidMessageError();
    if (!check_server_params(sp, min_field_bits)) throw ParamsRejectedError();
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    // A zero w_i would break unblinding and a zero o_i would violate the
    // OLE receiver-input precondition; both are ruled out here by drawing a
    // fresh base (hence a fresh master key) until the blinding works out.
    for (;;) {
        mpz_class r = rng.range(1, keys.N);
        mpz_class mk = trapdoor_power(r, tl.T, keys);
        auto [k, s] = prf_derive_pair(PrfKey::from_integer(mk));
        std::vector<FieldElement> z = prf_vector(k, tbar, field);
        std::vector<FieldElement> w = prf_vector(s, tbar, field);

        FieldElement msg(m, field);
        std::vector<FieldElement> o;
        o.reserve(tbar);
        bool ok = true;
        for (unsigned i = 0; i < tbar && ok; ++i) {
            if (w[i].is_zero()) {
                ok = false;
                break;
            }
            FieldElement pi = sp.xs[i] + msg;
            FieldElement oi = encrypt_coordinate(pi, z[i], w[i]);
            if (oi.is_zero()) {
                ok = false;
                break;
            }
            o.push_back(oi);
        }
        if (!ok) continue;

        GenPuzzleResult result;
        result.puzzle = PuzzleVector{std::move(o)};
        result.pp = PuzzlePublicParams{commit(msg, mk), tl.T, r, keys.N};
        result.secrets = PuzzleSecrets{k, s, mk, r};
        return result;
    }
}

// ---------------------------------------------------------------------------
// Coin toss and leader selection

inline constexpr std::size_t kCoinTossBytes = 32;

inline Bytes coin_toss_commit(const Bytes& randomness) { return hash_g(encode_bytes(randomness)); }

// XOR of all revealed strings; every opening is checked against its
// commitment and a mismatch identifies the cheating party.
inline PrfKey coin_toss_combine(const std::vector<Bytes>& commits, const std::vector<Bytes>& reveals) {
    if (commits.empty() || commits.size() != reveals.size())
        throw Error("coin_toss_combine: need matching commitments and reveals");
    Bytes acc(kCoinTossBytes, 0);
    for (std::size_t u = 0; u < reveals.size(); ++u) {
        if (reveals[u].size() != kCoinTossBytes || coin_toss_commit(reveals[u]) != commits[u])
            throw OpeningMismatchError(static_cast<unsigned>(u + 1));
        for (std::size_t i = 0; i < kCoinTossBytes; ++i) acc[i] ^= reveals[u][i];
    }
    return PrfKey(acc);
}

inline PrfKey coin_toss(const std::vector<Bytes>& party_randomness) {
    std::vector<Bytes> commits;
    commits.reserve(party_randomness.size());
    for (const auto& r : party_randomness) commits.push_back(coin_toss_commit(r));
    return coin_toss_combine(commits, party_randomness);
}

// idx_j = (G(j || rhat) mod n) + 1; duplicates are resolved by appending a
// retry counter to the hash input, so every party derives the same list.
inline std::vector<unsigned> select_leaders(unsigned n, unsigned leader_count, const PrfKey& rhat) {
    if (leader_count > n) throw Error("select_leaders: more leaders than clients");
    std::vector<unsigned> leaders;
    std::set<unsigned> taken;
    for (unsigned j = 1; j <= leader_count; ++j) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            Bytes input = concat(encode_int(std::uint64_t(j)), rhat.bytes);
            if (attempt > 0) append(input, encode_int(attempt));
            mpz_class digest = int_from_bytes(hash_g(input));
            unsigned idx = static_cast<unsigned>(mpz_class(digest % n).get_ui()) + 1;
            if (taken.insert(idx).second) {
                leaders.push_back(idx);
                break;
            }
        }
    }
    return leaders;
}

// ---------------------------------------------------------------------------
// Granting the computation

struct EvalRecord {
    unsigned leader = 0;  // client index
    mpz_class h;
    Commitment com_root;
    mpz_class N;
    std::uint64_t Y = 0;
};

using EvalPublicParams = std::vector<EvalRecord>;

struct EvalPuzzle {
    std::vector<FieldElement> g;
};

struct LeaderPrep {
    unsigned index = 0;
    mpz_class N;
    std::uint64_t Y = 0;
    mpz_class h;
    mpz_class tk;  // secret until solved
    FieldElement root;
    Commitment com_root;
    PrfKey k_prime;
    PrfKey s_prime;
    std::vector<FieldElement> w_prime;
    std::vector<FieldElement> z_prime;
    std::vector<FieldElement> gamma;      // y-coordinates of x - root
    std::vector<FieldElement> gamma_enc;  // gamma_i * w'_i, broadcast to clients
    std::map<unsigned, PrfKey> f_out;     // fresh key per other client

    EvalRecord record() const { return EvalRecord{index, h, com_root, N, Y}; }
};

inline LeaderPrep leader_prepare(unsigned index, const ClientKeys& keys, const ServerParams& sp,
                                 std::uint64_t Y, unsigned n_clients, SeededRng& rng) {
    LeaderPrep prep;
    prep.index = index;
    prep.N = keys.N;
    prep.Y = Y;
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    // fresh temporary key until none of the w' blinds is zero
    for (;;) {
        prep.h = rng.range(1, keys.N);
        prep.tk = trapdoor_power(prep.h, Y, keys);
        auto [kp, spair] = prf_derive_pair(PrfKey::from_integer(prep.tk));
        prep.k_prime = kp;
        prep.s_prime = spair;
        prep.w_prime = prf_vector(prep.s_prime, tbar, field);
        bool ok = true;
        for (const auto& w : prep.w_prime)
            if (w.is_zero()) ok = false;
        if (ok) break;
    }
    prep.z_prime = prf_vector(prep.k_prime, tbar, field);

    // a zero root would make the result extraction divide by zero
    do {
        prep.root = random_element(rng, field);
    } while (prep.root.is_zero());

    prep.gamma.reserve(tbar);
    prep.gamma_enc.reserve(tbar);
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement gi = sp.xs[i] - prep.root;
        prep.gamma.push_back(gi);
        prep.gamma_enc.push_back(gi * prep.w_prime[i]);
    }
    prep.com_root = commit(prep.root, prep.tk);

    for (unsigned l = 1; l <= n_clients; ++l)
        if (l != index) prep.f_out.emplace(l, PrfKey::random(rng));
    return prep;
}

struct GrantResult {
    std::vector<OleSenderInput> ole_inputs;
    std::vector<FieldElement> v;
    std::vector<FieldElement> y;
};

namespace detail {

inline void check_coefficient(const mpz_class& q, const ServerParams& sp) {
    if (q < 0 || q >= sp.universe_bound) throw InvalidMessageError();
}

inline std::vector<FieldElement> gamma_product(const ServerParams& sp,
                                               const std::vector<const std::vector<FieldElement>*>& parts) {
    std::vector<FieldElement> v(sp.tbar(), one(sp.field));
    for (const auto* part : parts) {
        if (part->size() != sp.tbar()) throw ProtocolAbortError("gamma vector has wrong length");
        for (unsigned i = 0; i < sp.tbar(); ++i) v[i] *= (*part)[i];
    }
    return v;
}

}  // namespace detail

// Leader path: v folds its own encrypted root in with the other leaders',
// y nets the keys it distributed against the keys it received, and the OLE
// inputs carry the z' layer that only leaders add.
inline GrantResult leader_grant_finish(const LeaderPrep& prep, const ServerParams& sp, const mpz_class& q,
                                       const PuzzleSecrets& secrets,
                                       const std::map<unsigned, PrfKey>& inbox_f,
                                       const std::map<unsigned, std::vector<FieldElement>>& inbox_gamma,
                                       const std::vector<unsigned>& leaders) {
    detail::check_coefficient(q, sp);
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    std::vector<const std::vector<FieldElement>*> gamma_parts{&prep.gamma_enc};
    for (unsigned l : leaders) {
        if (l == prep.index) continue;
        auto it = inbox_gamma.find(l);
        if (it == inbox_gamma.end())
            throw ProtocolAbortError("leader " + std::to_string(prep.index) +
                                     " missing gamma vector from leader " + std::to_string(l));
        gamma_parts.push_back(&it->second);
    }
    std::vector<FieldElement> v = detail::gamma_product(sp, gamma_parts);

    std::vector<FieldElement> y(tbar, zero(field));
    for (const auto& [l, key] : prep.f_out)
        for (unsigned i = 0; i < tbar; ++i) y[i] -= prf_index(i + 1, key, field);
    for (unsigned l : leaders) {
        if (l == prep.index) continue;
        auto it = inbox_f.find(l);
        if (it == inbox_f.end())
            throw ProtocolAbortError("leader " + std::to_string(prep.index) + " missing key from leader " +
                                     std::to_string(l));
        for (unsigned i = 0; i < tbar; ++i) y[i] += prf_index(i + 1, it->second, field);
    }

    std::vector<FieldElement> z = prf_vector(secrets.k, tbar, field);
    std::vector<FieldElement> w = prf_vector(secrets.s, tbar, field);
    FieldElement q_fe(q, field);

    GrantResult out;
    out.v = v;
    out.y = y;
    out.ole_inputs.reserve(tbar);
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement qv = q_fe * v[i];
        FieldElement e = qv * inv(w[i]);
        FieldElement e_prime = -(qv * z[i]) + prep.z_prime[i] + y[i];
        out.ole_inputs.push_back(OleSenderInput{e, e_prime});
    }
    return out;
}

// Non-leader path: same shape minus the root and z' contributions.
inline GrantResult nonleader_grant(const ServerParams& sp, const mpz_class& q, const PuzzleSecrets& secrets,
                                   const std::map<unsigned, PrfKey>& inbox_f,
                                   const std::map<unsigned, std::vector<FieldElement>>& inbox_gamma,
                                   const std::vector<unsigned>& leaders) {
    detail::check_coefficient(q, sp);
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    std::vector<const std::vector<FieldElement>*> gamma_parts;
    for (unsigned l : leaders) {
        auto it = inbox_gamma.find(l);
        if (it == inbox_gamma.end())
            throw ProtocolAbortError("client missing gamma vector from leader " + std::to_string(l));
        gamma_parts.push_back(&it->second);
    }
    std::vector<FieldElement> v = detail::gamma_product(sp, gamma_parts);

    std::vector<FieldElement> y(tbar, zero(field));
    for (unsigned l : leaders) {
        auto it = inbox_f.find(l);
        if (it == inbox_f.end())
            throw ProtocolAbortError("client missing key from leader " + std::to_string(l));
        for (unsigned i = 0; i < tbar; ++i) y[i] += prf_index(i + 1, it->second, field);
    }

    std::vector<FieldElement> z = prf_vector(secrets.k, tbar, field);
    std::vector<FieldElement> w = prf_vector(secrets.s, tbar, field);
    FieldElement q_fe(q, field);

    GrantResult out;
    out.v = v;
    out.y = y;
    out.ole_inputs.reserve(tbar);
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement qv = q_fe * v[i];
        FieldElement e = qv * inv(w[i]);
        FieldElement e_prime = -(qv * z[i]) + y[i];
        out.ole_inputs.push_back(OleSenderInput{e, e_prime});
    }
    return out;
}

// g_i = sum over clients of the OLE outputs d_{i,u}; addition commutes so
// arrival order is irrelevant.
inline EvalPuzzle server_evaluate(const std::vector<std::vector<FieldElement>>& d_per_client,
                                  const ServerParams& sp) {
    if (d_per_client.empty()) throw ProtocolAbortError("no OLE outputs to combine");
    std::vector<FieldElement> g(sp.tbar(), zero(sp.field));
    for (const auto& d : d_per_client) {
        if (d.size() != sp.tbar()) throw ProtocolAbortError("client completed wrong number of OLE sessions");
        for (unsigned i = 0; i < sp.tbar(); ++i) g[i] += d[i];
    }
    return EvalPuzzle{std::move(g)};
}

// ---------------------------------------------------------------------------
// Solving

struct SinglePuzzleProof {
    mpz_class mk;
};

struct CombinationOpening {
    FieldElement root;
    mpz_class tk;
};

struct CombinationProof {
    std::vector<CombinationOpening> openings;  // one per EvalRecord, same order
};

using Proof = std::variant<SinglePuzzleProof, CombinationProof>;

struct SingleSolution {
    FieldElement m;
    SinglePuzzleProof proof;
    DensePoly poly;
};

inline SingleSolution solve_single_with_key(const PuzzleVector& o, const mpz_class& mk,
                                            const ServerParams& sp) {
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();
    if (o.o.size() != tbar) throw TamperSuspectedError("puzzle vector has wrong length");
    auto [k, s] = prf_derive_pair(PrfKey::from_integer(mk));
    std::vector<FieldElement> z = prf_vector(k, tbar, field);
    std::vector<FieldElement> w = prf_vector(s, tbar, field);
    std::vector<FieldElement> pi;
    pi.reserve(tbar);
    for (unsigned i = 0; i < tbar; ++i) {
        if (w[i].is_zero()) throw TamperSuspectedError("unblinding factor is zero");
        pi.push_back(inv(w[i]) * o.o[i] - z[i]);
    }
    DensePoly poly = interpolate(PointValuePoly(sp.xs, pi));
    if (poly.degree() > 1) throw TamperSuspectedError("unblinded polynomial has degree above one");
    return SingleSolution{poly.constant_term(), SinglePuzzleProof{mk}, poly};
}

inline SingleSolution solve_single(const PuzzleVector& o, const PuzzlePublicParams& pp,
                                   const ServerParams& sp, const ProgressFn& progress = {}) {
    mpz_class mk = sequential_power(pp.r, pp.T, pp.N, progress);
    return solve_single_with_key(o, mk, sp);
}

struct CombinationSolution {
    FieldElement res;
    CombinationProof proof;
    DensePoly theta;
    std::vector<mpz_class> tks;
};

// Unblind, interpolate, extract roots, and match them against the root
// commitments. Exhaustive per-root scan over the records is O(leaders^2).
inline CombinationSolution solve_combination_with_keys(const EvalPuzzle& g, const EvalPublicParams& epp,
                                                       const std::vector<mpz_class>& tks,
                                                       const ServerParams& sp, SeededRng& rng) {
    if (epp.size() != sp.leader_count || tks.size() != epp.size())
        throw SolutionExtractionError("evaluation parameters do not match server setup");
    if (g.g.size() != sp.tbar()) throw SolutionExtractionError("combined puzzle has wrong length");
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    std::vector<std::vector<FieldElement>> w_primes, z_primes;
    for (const mpz_class& tk : tks) {
        auto [kp, spair] = prf_derive_pair(PrfKey::from_integer(tk));
        w_primes.push_back(prf_vector(spair, tbar, field));
        z_primes.push_back(prf_vector(kp, tbar, field));
    }

    std::vector<FieldElement> theta_pts;
    theta_pts.reserve(tbar);
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement w_all = one(field);
        FieldElement z_sum = zero(field);
        for (std::size_t u = 0; u < tks.size(); ++u) {
            w_all *= w_primes[u][i];
            z_sum += z_primes[u][i];
        }
        if (w_all.is_zero()) throw SolutionExtractionError("temporary blinding factor is zero");
        theta_pts.push_back(inv(w_all) * (g.g[i] - z_sum));
    }
    DensePoly theta = interpolate(PointValuePoly(sp.xs, theta_pts));
    if (theta.is_zero()) throw SolutionExtractionError("combined polynomial is identically zero");

    std::vector<FieldElement> roots = find_roots(theta, rng);
    CombinationProof proof;
    FieldElement neg_prod = one(field);
    for (std::size_t u = 0; u < epp.size(); ++u) {
        std::optional<FieldElement> matched;
        for (const auto& candidate : roots) {
            if (verify_commit(epp[u].com_root, candidate, tks[u])) {
                matched = candidate;
                break;
            }
        }
        if (!matched)
            throw SolutionExtractionError("no extracted root opens the commitment of leader " +
                                          std::to_string(epp[u].leader));
        proof.openings.push_back(CombinationOpening{*matched, tks[u]});
        neg_prod *= -*matched;
    }
    if (neg_prod.is_zero()) throw SolutionExtractionError("zero root makes the result undefined");

    FieldElement res = theta.constant_term() * inv(neg_prod);
    return CombinationSolution{res, std::move(proof), std::move(theta), tks};
}

inline CombinationSolution solve_combination(const EvalPuzzle& g, const EvalPublicParams& epp,
                                             const ServerParams& sp, SeededRng& rng, bool parallel = false,
                                             const ProgressFn& progress = {}) {
    std::vector<mpz_class> tks(epp.size());
    if (parallel) {
        std::vector<std::future<mpz_class>> futures;
        futures.reserve(epp.size());
        for (const auto& rec : epp)
            futures.push_back(std::async(std::launch::async, [&rec, &progress] {
                return sequential_power(rec.h, rec.Y, rec.N, progress);
            }));
        for (std::size_t u = 0; u < futures.size(); ++u) tks[u] = futures[u].get();
    } else {
        for (std::size_t u = 0; u < epp.size(); ++u)
            tks[u] = sequential_power(epp[u].h, epp[u].Y, epp[u].N, progress);
    }
    return solve_combination_with_keys(g, epp, tks, sp, rng);
}

// ---------------------------------------------------------------------------
// Verification (public data only)

inline bool verify_client_puzzle(const FieldElement& m, const SinglePuzzleProof& proof,
                                 const PuzzlePublicParams& pp) {
    return verify_commit(pp.com, m, proof.mk);
}

inline bool verify_combination(const FieldElement& m, const CombinationProof& proof, const EvalPuzzle& g,
                               const EvalPublicParams& epp, const ServerParams& sp) {
    if (proof.openings.size() != epp.size() || epp.size() != sp.leader_count) return false;
    if (g.g.size() != sp.tbar()) return false;
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();

    for (std::size_t u = 0; u < epp.size(); ++u)
        if (!verify_commit(epp[u].com_root, proof.openings[u].root, proof.openings[u].tk)) return false;

    FieldElement w_all_probe = one(field);
    std::vector<FieldElement> theta_pts;
    theta_pts.reserve(tbar);
    std::vector<std::vector<FieldElement>> w_primes, z_primes;
    for (const auto& opening : proof.openings) {
        auto [kp, spair] = prf_derive_pair(PrfKey::from_integer(opening.tk));
        w_primes.push_back(prf_vector(spair, tbar, field));
        z_primes.push_back(prf_vector(kp, tbar, field));
    }
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement w_all = one(field);
        FieldElement z_sum = zero(field);
        for (std::size_t u = 0; u < proof.openings.size(); ++u) {
            w_all *= w_primes[u][i];
            z_sum += z_primes[u][i];
        }
        if (w_all.is_zero()) return false;
        theta_pts.push_back(inv(w_all) * (g.g[i] - z_sum));
    }
    DensePoly theta = interpolate(PointValuePoly(sp.xs, theta_pts));

    FieldElement neg_prod = one(field);
    for (const auto& opening : proof.openings) {
        if (!theta.evaluate(opening.root).is_zero()) return false;
        neg_prod *= -opening.root;
    }
    if (neg_prod.is_zero()) return false;
    return theta.constant_term() * inv(neg_prod) == m;
}

// Verifier-side theta, exposed so tests can compare it against the solver's.
inline DensePoly verifier_theta(const CombinationProof& proof, const EvalPuzzle& g,
                                const ServerParams& sp) {
    const FieldPtr& field = sp.field;
    const unsigned tbar = sp.tbar();
    std::vector<FieldElement> theta_pts;
    for (unsigned i = 0; i < tbar; ++i) {
        FieldElement w_all = one(field);
        FieldElement z_sum = zero(field);
        for (const auto& opening : proof.openings) {
            auto [kp, spair] = prf_derive_pair(PrfKey::from_integer(opening.tk));
            w_all *= prf_index(i + 1, spair, field);
            z_sum += prf_index(i + 1, kp, field);
        }
        theta_pts.push_back(inv(w_all) * (g.g[i] - z_sum));
    }
    return interpolate(PointValuePoly(sp.xs, theta_pts));
}

// ---------------------------------------------------------------------------
// Direct in-process evaluation driver (no channel machinery); the simulator
// module layers messaging, hooks and reporting on the same building blocks.

struct EvalClientState {
    ClientKeys keys;
    PuzzleVector puzzle;
    PuzzleSecrets secrets;
    mpz_class q;
};

struct EvaluationOutcome {
    PrfKey rhat;
    std::vector<unsigned> leaders;
    EvalPublicParams epp;
    EvalPuzzle g;
    // white-box data for fixtures and property tests
    std::vector<LeaderPrep> preps;                     // one per leader, in leader order
    std::vector<GrantResult> grants;                   // one per client
    std::vector<std::vector<FieldElement>> d;          // OLE outputs per client
    OleTranscript transcript;
};

inline EvaluationOutcome run_evaluation(const ServerParams& sp, const std::vector<EvalClientState>& clients,
                                        std::uint64_t Y, SeededRng& rng) {
    const unsigned n = static_cast<unsigned>(clients.size());
    EvaluationOutcome out;

    std::vector<Bytes> coin_randomness;
    for (unsigned u = 1; u <= n; ++u) {
        SeededRng party = rng.fork("coin", u);
        coin_randomness.push_back(party.bytes(kCoinTossBytes));
    }
    out.rhat = coin_toss(coin_randomness);
    out.leaders = select_leaders(n, sp.leader_count, out.rhat);

    std::map<unsigned, LeaderPrep> preps_by_index;
    for (unsigned l : out.leaders) {
        SeededRng party = rng.fork("leader", l);
        preps_by_index.emplace(l, leader_prepare(l, clients[l - 1].keys, sp, Y, n, party));
    }

    for (unsigned l : out.leaders) {
        out.preps.push_back(preps_by_index.at(l));
        out.epp.push_back(preps_by_index.at(l).record());
    }

    out.grants.reserve(n);
    for (unsigned u = 1; u <= n; ++u) {
        std::map<unsigned, PrfKey> inbox_f;
        std::map<unsigned, std::vector<FieldElement>> inbox_gamma;
        for (unsigned l : out.leaders) {
            if (l == u) continue;
            inbox_f.emplace(l, preps_by_index.at(l).f_out.at(u));
            inbox_gamma.emplace(l, preps_by_index.at(l).gamma_enc);
        }
        bool is_leader = preps_by_index.count(u) > 0;
        if (is_leader)
            out.grants.push_back(leader_grant_finish(preps_by_index.at(u), sp, clients[u - 1].q,
                                                     clients[u - 1].secrets, inbox_f, inbox_gamma,
                                                     out.leaders));
        else
            out.grants.push_back(nonleader_grant(sp, clients[u - 1].q, clients[u - 1].secrets, inbox_f,
                                                 inbox_gamma, out.leaders));
    }

    out.d.resize(n);
    std::uint64_t session = 0;
    for (unsigned u = 1; u <= n; ++u) {
        SeededRng session_rng = rng.fork("ole", u);
        for (unsigned i = 0; i < sp.tbar(); ++i) {
            OleResult res = ole_plus(out.grants[u - 1].ole_inputs[i],
                                     OleReceiverInput{clients[u - 1].puzzle.o[i]}, session_rng, session++,
                                     &out.transcript);
            out.d[u - 1].push_back(res.output);
        }
    }
    out.g = server_evaluate(out.d, sp);
    return out;
}

}  // namespace vhtlp::tf
