#pragma once
// Multi-instance chain: one client, z puzzles that the server must solve
// strictly in order because puzzle j's squaring base derives from puzzle
// (j-1)'s master key. Linear combination over the chain reuses the
// multi-client machinery with a single leader and three x-coordinates.

#include "vhtlp/tf.hpp"

namespace vhtlp::mi {

struct ChainParams {
    tf::ServerParams sp;              // leader_count = 1, so exactly 3 x-coordinates
    std::vector<std::uint64_t> deltas;  // seconds between consecutive openings
    std::uint64_t max_ss = 0;
    std::vector<std::uint64_t> Ts;  // T_j = max_ss * deltas[j]

    unsigned z() const { return static_cast<unsigned>(Ts.size()); }
};

inline ChainParams make_chain_params(tf::ServerParams sp, std::vector<std::uint64_t> deltas,
                                     std::uint64_t max_ss) {
    if (sp.leader_count != 1 || sp.xs.size() != 3)
        throw Error("make_chain_params: chain needs exactly three x-coordinates");
    if (deltas.empty() || max_ss == 0) throw Error("make_chain_params: need z >= 1 and max_ss >= 1");
    std::vector<std::uint64_t> Ts;
    Ts.reserve(deltas.size());
    for (std::uint64_t d : deltas) {
        if (d == 0) throw Error("make_chain_params: each interval must be positive");
        Ts.push_back(d * max_ss);
    }
    return ChainParams{std::move(sp), std::move(deltas), max_ss, std::move(Ts)};
}

inline ChainParams mi_setup(SeededRng& rng, unsigned lambda_bits, std::vector<std::uint64_t> deltas,
                            std::uint64_t max_ss) {
    return make_chain_params(tf::s_setup(rng, lambda_bits, 1, 1), std::move(deltas), max_ss);
}

// Fresh base for puzzle j from the previous master key. The j || 0 input is
// two length-prefixed integers, so it can never collide with the single
// indices used for blinding factors. A zero output cannot serve as a
// squaring base, so the input gains a counter suffix until nonzero; both
// generator and solver run the same loop.
inline mpz_class derive_base(unsigned j, const mpz_class& prev_mk, const mpz_class& N) {
    PrfKey key = PrfKey::from_integer(prev_mk);
    Bytes base_input = concat(encode_int(std::uint64_t(j)), encode_int(std::uint64_t(0)));
    for (std::uint64_t ctr = 0;; ++ctr) {
        Bytes input = base_input;
        if (ctr > 0) append(input, encode_int(ctr));
        mpz_class v = prf_mod(input, key, N);
        if (v != 0) return v;
    }
}

struct MiPublicParams {
    std::vector<Commitment> coms;
    mpz_class r1;
    mpz_class N;
};

struct MiSecrets {
    std::vector<mpz_class> mks;
    std::vector<mpz_class> bases;
};

struct MiGenResult {
    std::vector<tf::PuzzleVector> puzzles;  // z entries of 3 coordinates each
    MiPublicParams pp;
    MiSecrets secrets;
};

inline MiGenResult mi_gen_puzzles(const std::vector<mpz_class>& ms, const ClientKeys& keys,
                                  const ChainParams& cp, SeededRng& rng, unsigned min_field_bits = 128) {
    if (ms.size() != cp.z()) throw Error("mi_gen_puzzles: one message per chain slot");
    for (const auto& m : ms)
        if (m < 0 || m >= cp.sp.universe_bound) throw tf::InvalidMessageError();
    if (!tf::check_server_params(cp.sp, min_field_bits)) throw tf::ParamsRejectedError();
    const FieldPtr& field = cp.sp.field;

    // The whole chain is determined by r1, so any zero blind anywhere
    // restarts generation with a fresh first base.
    for (;;) {
        MiGenResult out;
        mpz_class r1 = rng.range(1, keys.N);
        mpz_class prev_mk;
        bool ok = true;
        for (unsigned j = 1; j <= cp.z() && ok; ++j) {
            mpz_class base = (j == 1) ? r1 : derive_base(j, prev_mk, keys.N);
            mpz_class mk = trapdoor_power(base, cp.Ts[j - 1], keys);
            auto [k, s] = prf_derive_pair(PrfKey::from_integer(mk));
            std::vector<FieldElement> z = tf::prf_vector(k, 3, field);
            std::vector<FieldElement> w = tf::prf_vector(s, 3, field);
            FieldElement msg(ms[j - 1], field);
            std::vector<FieldElement> o;
            for (unsigned i = 0; i < 3 && ok; ++i) {
                if (w[i].is_zero()) {
                    ok = false;
                    break;
                }
                FieldElement oi = tf::encrypt_coordinate(cp.sp.xs[i] + msg, z[i], w[i]);
                if (oi.is_zero()) {
                    ok = false;
                    break;
                }
                o.push_back(oi);
            }
            if (!ok) break;
            out.puzzles.push_back(tf::PuzzleVector{std::move(o)});
            out.pp.coms.push_back(commit(msg, mk));
            out.secrets.mks.push_back(mk);
            out.secrets.bases.push_back(base);
            prev_mk = mk;
        }
        if (!ok) continue;
        out.pp.r1 = r1;
        out.pp.N = keys.N;
        return out;
    }
}

struct ChainEntry {
    mpz_class base;
    mpz_class mk;
    FieldElement m;
    DensePoly poly;
    bool degree_ok;  // false flags a suspected tamper at this index
};

// Progress callback per puzzle: (j, squarings done for puzzle j).
using ChainProgressFn = std::function<bool(unsigned j, std::uint64_t done)>;

// Solves in ascending order only: puzzle j's base needs mk_{j-1}. A tampered
// puzzle is flagged (its interpolation has degree two) but does not stop the
// chain, because the master keys derive from public bases, not from o.
inline std::vector<ChainEntry> mi_solve_chain(const std::vector<tf::PuzzleVector>& puzzles,
                                              const MiPublicParams& pp, const ChainParams& cp,
                                              const ChainProgressFn& progress = {}) {
    if (puzzles.size() != cp.z()) throw Error("mi_solve_chain: puzzle count mismatch");
    const FieldPtr& field = cp.sp.field;
    std::vector<ChainEntry> out;
    mpz_class prev_mk;
    for (unsigned j = 1; j <= cp.z(); ++j) {
        mpz_class base = (j == 1) ? pp.r1 : derive_base(j, prev_mk, pp.N);
        ProgressFn inner;
        if (progress)
            inner = [&progress, j](std::uint64_t done) { return progress(j, done); };
        mpz_class mk = sequential_power(base, cp.Ts[j - 1], pp.N, inner, 1);

        auto [k, s] = prf_derive_pair(PrfKey::from_integer(mk));
        std::vector<FieldElement> z = tf::prf_vector(k, 3, field);
        std::vector<FieldElement> w = tf::prf_vector(s, 3, field);
        std::vector<FieldElement> pi;
        for (unsigned i = 0; i < 3; ++i) {
            if (w[i].is_zero()) throw tf::TamperSuspectedError("chain unblinding factor is zero");
            pi.push_back(inv(w[i]) * puzzles[j - 1].o[i] - z[i]);
        }
        DensePoly poly = interpolate(PointValuePoly(cp.sp.xs, pi));
        bool degree_ok = poly.degree() <= 1;
        FieldElement m = poly.constant_term();
        prev_mk = mk;
        out.push_back(ChainEntry{std::move(base), std::move(mk), std::move(m), std::move(poly),
                                 degree_ok});
    }
    return out;
}

struct MiEvalOutcome {
    tf::EvalPuzzle g;      // three coordinates
    tf::EvalRecord epp;    // (h, com', N, Y)
    // white-box data
    mpz_class tk;
    FieldElement root;
    std::vector<std::vector<FieldElement>> y;  // z rows of 3
    std::vector<std::vector<FieldElement>> d;  // OLE outputs, z rows of 3
    OleTranscript transcript;
};

// Grant + server combination for the chain. The client plays the leader for
// j = 1 (contributing the root, the w'/z' layer and the negative zero-sum
// share) and an ordinary client for every j > 1.
inline MiEvalOutcome mi_evaluate(const std::vector<tf::PuzzleVector>& puzzles,
                                 const std::vector<mpz_class>& qs, std::uint64_t Y,
                                 const ClientKeys& keys, const MiSecrets& secrets, const ChainParams& cp,
                                 SeededRng& rng) {
    if (puzzles.size() != cp.z() || qs.size() != cp.z())
        throw Error("mi_evaluate: need one puzzle and one coefficient per chain slot");
    for (const auto& q : qs)
        if (q < 0 || q >= cp.sp.universe_bound) throw tf::InvalidMessageError();
    if (Y >= cp.Ts[0])
        throw Error("mi_evaluate: combination must open before the first puzzle does");
    const FieldPtr& field = cp.sp.field;
    const unsigned z = cp.z();

    MiEvalOutcome out;
    mpz_class h;
    PrfKey k_prime, s_prime;
    std::vector<FieldElement> w_prime, z_prime;
    for (;;) {
        h = rng.range(1, keys.N);
        out.tk = trapdoor_power(h, Y, keys);
        auto [kp, spair] = prf_derive_pair(PrfKey::from_integer(out.tk));
        k_prime = kp;
        s_prime = spair;
        w_prime = tf::prf_vector(s_prime, 3, field);
        if (!w_prime[0].is_zero() && !w_prime[1].is_zero() && !w_prime[2].is_zero()) break;
    }
    z_prime = tf::prf_vector(k_prime, 3, field);

    do {
        out.root = random_element(rng, field);
    } while (out.root.is_zero());
    std::vector<FieldElement> gamma;
    for (unsigned i = 0; i < 3; ++i) gamma.push_back(cp.sp.xs[i] - out.root);

    std::vector<PrfKey> f;  // f_2 .. f_z
    for (unsigned j = 2; j <= z; ++j) f.push_back(PrfKey::random(rng));

    out.y.assign(z, std::vector<FieldElement>(3, zero(field)));
    for (unsigned j = 2; j <= z; ++j)
        for (unsigned i = 0; i < 3; ++i) {
            FieldElement share = prf_index(i + 1, f[j - 2], field);
            out.y[j - 1][i] = share;
            out.y[0][i] -= share;
        }

    out.epp = tf::EvalRecord{1, h, commit(out.root, out.tk), keys.N, Y};

    out.d.assign(z, {});
    std::uint64_t session = 0;
    for (unsigned j = 1; j <= z; ++j) {
        auto [k, s] = prf_derive_pair(PrfKey::from_integer(secrets.mks[j - 1]));
        std::vector<FieldElement> zb = tf::prf_vector(k, 3, field);
        std::vector<FieldElement> wb = tf::prf_vector(s, 3, field);
        FieldElement q_fe(qs[j - 1], field);
        for (unsigned i = 0; i < 3; ++i) {
            FieldElement lead = gamma[i] * q_fe * w_prime[i];
            FieldElement e = lead * inv(wb[i]);
            FieldElement e_prime = -(lead * zb[i]) + out.y[j - 1][i];
            if (j == 1) e_prime += z_prime[i];
            OleResult res = ole_plus(OleSenderInput{e, e_prime}, OleReceiverInput{puzzles[j - 1].o[i]},
                                     rng, session++, &out.transcript);
            out.d[j - 1].push_back(res.output);
        }
    }

    std::vector<FieldElement> g(3, zero(field));
    for (unsigned j = 0; j < z; ++j)
        for (unsigned i = 0; i < 3; ++i) g[i] += out.d[j][i];
    out.g = tf::EvalPuzzle{std::move(g)};
    return out;
}

inline tf::CombinationSolution mi_solve_combination(const tf::EvalPuzzle& g, const tf::EvalRecord& epp,
                                                    const ChainParams& cp, SeededRng& rng,
                                                    const ProgressFn& progress = {}) {
    return tf::solve_combination(g, tf::EvalPublicParams{epp}, cp.sp, rng, false, progress);
}

inline bool mi_verify_combination(const FieldElement& m, const tf::CombinationProof& proof,
                                  const tf::EvalPuzzle& g, const tf::EvalRecord& epp,
                                  const ChainParams& cp) {
    return tf::verify_combination(m, proof, g, tf::EvalPublicParams{epp}, cp.sp);
}

inline bool mi_verify_single(const FieldElement& m, const mpz_class& mk, const MiPublicParams& pp,
                             unsigned j) {
    if (j < 1 || j > pp.coms.size()) return false;
    return verify_commit(pp.coms[j - 1], m, mk);
}

}  // namespace vhtlp::mi
