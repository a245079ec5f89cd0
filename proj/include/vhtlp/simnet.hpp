#pragma once
// Deterministic multi-party simulation. One orchestrator drives the phases;
// parties exchange JSON messages over reliable FIFO channels, every send
// passes through an optional adversary hook, and the run produces a
// replayable report of all published values. All randomness forks from one
// seed, keyed by party, so identical (config, seed) pairs give identical
// reports byte for byte.

#include <future>

#include "vhtlp/serde.hpp"

namespace vhtlp::sim {

using serde::ojson;
using serde::SimConfig;

struct PartyId {
    enum class Role { Client, Server, Verifier };
    Role role = Role::Server;
    unsigned index = 0;  // client index, 1-based

    static PartyId client(unsigned idx) { return PartyId{Role::Client, idx}; }
    static PartyId server() { return PartyId{Role::Server, 0}; }
    static PartyId verifier() { return PartyId{Role::Verifier, 0}; }

    std::string str() const {
        switch (role) {
            case Role::Client: return "client" + std::to_string(index);
            case Role::Server: return "server";
            default: return "verifier";
        }
    }
};

struct Message {
    std::string kind;
    std::string from;
    std::string to;  // party name or "all"
    std::uint64_t seq = 0;
    ojson payload;

    ojson to_json() const {
        ojson j;
        j["seq"] = seq;
        j["kind"] = kind;
        j["from"] = from;
        j["to"] = to;
        j["payload"] = payload;
        return j;
    }
};

// Returning nullopt drops the message; anything else is delivered verbatim.
using AdversaryHook = std::function<std::optional<Message>(const Message&)>;

struct PhaseAbortError : Error {
    std::string phase;
    std::string party;
    PhaseAbortError(std::string phase_in, std::string party_in, const std::string& reason)
        : Error("abort in phase '" + phase_in + "' at " + party_in + ": " + reason),
          phase(std::move(phase_in)),
          party(std::move(party_in)) {}
};

struct SingleReport {
    unsigned index = 0;
    bool solved = false;
    std::string solve_error;
    mpz_class m;
    mpz_class mk;
    bool verify = false;
};

struct CombinationReport {
    bool solved = false;
    std::string solve_error;
    mpz_class res;
    tf::CombinationProof proof;
    bool verify = false;
};

struct RunReport {
    std::uint64_t seed = 0;
    SimConfig config;
    std::string status = "completed";  // or "aborted"
    std::string abort_phase, abort_party, abort_reason;
    unsigned dropped_messages = 0;
    unsigned mutated_messages = 0;

    tf::ServerParams sp;
    std::vector<mpz_class> client_keys_N;
    std::vector<tf::PuzzleVector> puzzles;
    std::vector<tf::PuzzlePublicParams> pps;
    Bytes rhat;
    std::vector<unsigned> leaders;
    tf::EvalPublicParams epp;
    tf::EvalPuzzle g;
    CombinationReport combination;
    std::vector<SingleReport> singles;
    std::vector<Message> transcript;

    ojson to_json() const;
};

namespace detail {

// Channel fabric: broadcast and unicast with FIFO delivery per destination;
// the hook sees every message before it lands.
class Net {
  public:
    Net(std::vector<Message>* transcript, const AdversaryHook& hook, unsigned* dropped, unsigned* mutated)
        : transcript_(transcript), hook_(hook), dropped_(dropped), mutated_(mutated) {}

    // Returns the delivered message, or nullopt when the adversary dropped it.
    std::optional<Message> send(const PartyId& from, const std::string& to, const std::string& kind,
                                ojson payload) {
        Message msg{kind, from.str(), to, seq_++, std::move(payload)};
        if (hook_) {
            std::optional<Message> out = hook_(msg);
            if (!out) {
                ++*dropped_;
                return std::nullopt;
            }
            if (out->payload != msg.payload) ++*mutated_;
            msg.kind = out->kind;
            msg.payload = out->payload;
        }
        transcript_->push_back(msg);
        return msg;
    }

  private:
    std::vector<Message>* transcript_;
    const AdversaryHook& hook_;
    unsigned* dropped_;
    unsigned* mutated_;
    std::uint64_t seq_ = 0;
};

}  // namespace detail

inline ojson RunReport::to_json() const {
    ojson j;
    j["seed"] = seed;
    j["config"] = serde::sim_config_to_json(config);
    j["status"] = status;
    if (status == "aborted") {
        j["abort"] = ojson{{"phase", abort_phase}, {"party", abort_party}, {"reason", abort_reason}};
    }
    j["dropped_messages"] = dropped_messages;
    j["mutated_messages"] = mutated_messages;
    if (sp.field) {
        j["server_params"] = serde::server_params_to_json(sp);
        ojson clients = ojson::array();
        for (std::size_t u = 0; u < client_keys_N.size(); ++u) {
            ojson c;
            c["index"] = u + 1;
            c["N"] = serde::int_str(client_keys_N[u]);
            if (u < puzzles.size()) {
                c["o"] = serde::elems_to_json(puzzles[u].o);
                c["pp"] = serde::pp_to_json(pps[u]);
            }
            clients.push_back(c);
        }
        j["clients"] = clients;
        j["rhat"] = to_hex(rhat);
        j["leaders"] = leaders;
        ojson epp_arr = ojson::array();
        for (const auto& rec : epp) epp_arr.push_back(serde::eval_record_to_json(rec));
        j["epp"] = epp_arr;
        j["g"] = serde::elems_to_json(g.g);
        ojson comb;
        comb["solved"] = combination.solved;
        if (!combination.solve_error.empty()) comb["solve_error"] = combination.solve_error;
        comb["res"] = serde::int_str(combination.res);
        comb["proof"] = serde::combination_proof_to_json(combination.proof);
        comb["verify"] = combination.verify ? 1 : 0;
        j["combination"] = comb;
        ojson singles_arr = ojson::array();
        for (const auto& s : singles) {
            ojson e;
            e["index"] = s.index;
            e["solved"] = s.solved;
            if (!s.solve_error.empty()) e["solve_error"] = s.solve_error;
            e["m"] = serde::int_str(s.m);
            e["mk"] = serde::int_str(s.mk);
            e["verify"] = s.verify ? 1 : 0;
            singles_arr.push_back(e);
        }
        j["singles"] = singles_arr;
    }
    ojson transcript_arr = ojson::array();
    for (const auto& m : transcript) transcript_arr.push_back(m.to_json());
    j["transcript"] = transcript_arr;
    return j;
}

inline void validate_config(const SimConfig& c) {
    if (c.n < 1 || c.leaders < 1 || c.leaders > c.n) throw Error("simnet: need 1 <= leaders <= n");
    if (c.threshold < 1 || c.threshold > c.leaders) throw Error("simnet: need 1 <= threshold <= leaders");
    if (c.field_bits <= c.universe_bits + 2)
        throw Error("simnet: field_bits must exceed universe_bits + 2");
    if (c.messages.size() != c.n || c.coeffs.size() != c.n || c.client_deltas.size() != c.n)
        throw Error("simnet: need one message, coefficient and delta per client");
    mpz_class bound = mpz_class(1) << c.universe_bits;
    for (const auto& m : c.messages)
        if (m < 0 || m >= bound) throw Error("simnet: message outside plaintext universe");
    for (const auto& q : c.coeffs)
        if (q < 0 || q >= bound) throw Error("simnet: coefficient outside plaintext universe");
    for (std::uint64_t d : c.client_deltas)
        if (c.eval_delta >= d)
            throw Error("simnet: the combination must open before any single puzzle");
}

inline RunReport run_with_adversary(const SimConfig& config, std::uint64_t seed,
                                    const AdversaryHook& hook) {
    validate_config(config);
    RunReport report;
    report.seed = seed;
    report.config = config;
    detail::Net net(&report.transcript, hook, &report.dropped_messages, &report.mutated_messages);

    SeededRng master(seed);
    SeededRng server_rng = master.fork("server");
    std::vector<SeededRng> client_rngs;
    for (unsigned u = 1; u <= config.n; ++u) client_rngs.push_back(master.fork("client", u));

    try {
        // Phase 1: setup. Parties adopt the parameters as delivered.
        tf::ServerParams sp_local = tf::s_setup(server_rng, config.field_bits, config.leaders,
                                                config.threshold, mpz_class(1) << config.universe_bits);
        auto sp_msg = net.send(PartyId::server(), "all", "ServerParams",
                               serde::server_params_to_json(sp_local));
        if (!sp_msg) throw PhaseAbortError("setup", "server", "parameter broadcast dropped");
        report.sp = serde::server_params_from_json(sp_msg->payload);
        const tf::ServerParams& sp = report.sp;

        // Phase 2: key generation.
        std::vector<ClientKeys> keys;
        for (unsigned u = 1; u <= config.n; ++u) {
            keys.push_back(keygen(client_rngs[u - 1], config.rsa_factor_bits));
            auto msg = net.send(PartyId::client(u), "all", "ClientKey",
                                ojson{{"N", serde::int_str(keys.back().N)}});
            if (!msg) throw PhaseAbortError("keygen", "client" + std::to_string(u), "key publish dropped");
            report.client_keys_N.push_back(serde::require_int(msg->payload, "N", ""));
        }

        // Phase 3: puzzle generation. Downstream parties use the published
        // (possibly tampered) puzzle, the client keeps its secrets.
        std::vector<tf::PuzzleSecrets> secrets;
        for (unsigned u = 1; u <= config.n; ++u) {
            auto tl = TimelockParams::from_delta(config.client_deltas[u - 1], config.max_ss);
            auto gen = tf::gen_puzzle(config.messages[u - 1], keys[u - 1], sp, tl, client_rngs[u - 1],
                                      config.min_field_bits);
            secrets.push_back(gen.secrets);
            ojson payload;
            payload["o"] = serde::elems_to_json(gen.puzzle.o);
            payload["pp"] = serde::pp_to_json(gen.pp);
            auto msg = net.send(PartyId::client(u), "all", "PuzzlePublish", payload);
            if (!msg)
                throw PhaseAbortError("genpuzzle", "client" + std::to_string(u), "puzzle publish dropped");
            report.puzzles.push_back(tf::PuzzleVector{
                serde::elems_from_json(serde::require_array(msg->payload, "o", ""), sp.field, "/o")});
            report.pps.push_back(serde::pp_from_json(serde::require(msg->payload, "pp", ""), "/pp"));
        }

        // Phase 4a: coin toss, then leader selection from the shared key.
        std::vector<Bytes> coin_randomness, coin_commits, coin_reveals;
        for (unsigned u = 1; u <= config.n; ++u)
            coin_randomness.push_back(client_rngs[u - 1].bytes(tf::kCoinTossBytes));
        for (unsigned u = 1; u <= config.n; ++u) {
            Bytes digest = tf::coin_toss_commit(coin_randomness[u - 1]);
            auto msg = net.send(PartyId::client(u), "all", "CoinCommit", ojson{{"digest", to_hex(digest)}});
            if (!msg) throw PhaseAbortError("cointoss", "client" + std::to_string(u), "commit dropped");
            coin_commits.push_back(from_hex(serde::require_str(msg->payload, "digest", "")));
        }
        for (unsigned u = 1; u <= config.n; ++u) {
            auto msg = net.send(PartyId::client(u), "all", "CoinReveal",
                                ojson{{"bytes", to_hex(coin_randomness[u - 1])}});
            if (!msg) throw PhaseAbortError("cointoss", "client" + std::to_string(u), "reveal dropped");
            coin_reveals.push_back(from_hex(serde::require_str(msg->payload, "bytes", "")));
        }
        PrfKey rhat = [&] {
            try {
                return tf::coin_toss_combine(coin_commits, coin_reveals);
            } catch (const tf::OpeningMismatchError& e) {
                throw PhaseAbortError("cointoss", "client" + std::to_string(e.party), e.what());
            }
        }();
        report.rhat = rhat.bytes;
        report.leaders = tf::select_leaders(config.n, config.leaders, rhat);
        const std::vector<unsigned>& leaders = report.leaders;

        // Phase 4b: leaders prepare and broadcast their grants.
        std::uint64_t Y = config.eval_delta * config.max_ss;
        std::map<unsigned, tf::LeaderPrep> preps;
        std::map<unsigned, std::map<unsigned, PrfKey>> inbox_f;        // recipient -> leader -> key
        std::map<unsigned, std::map<unsigned, std::vector<FieldElement>>> inbox_gamma;
        for (unsigned l : leaders) {
            tf::LeaderPrep prep =
                tf::leader_prepare(l, keys[l - 1], sp, Y, config.n, client_rngs[l - 1]);
            for (unsigned u = 1; u <= config.n; ++u) {
                if (u == l) continue;
                auto fmsg = net.send(PartyId::client(l), PartyId::client(u).str(), "FKey",
                                     ojson{{"key", to_hex(prep.f_out.at(u).bytes)}});
                if (fmsg)
                    inbox_f[u].emplace(l, PrfKey(from_hex(serde::require_str(fmsg->payload, "key", ""))));
            }
            auto gmsg = net.send(PartyId::client(l), "all", "GammaVec",
                                 ojson{{"elems", serde::elems_to_json(prep.gamma_enc)}});
            if (gmsg) {
                auto elems = serde::elems_from_json(serde::require_array(gmsg->payload, "elems", ""),
                                                    sp.field, "/elems");
                for (unsigned u = 1; u <= config.n; ++u)
                    if (u != l) inbox_gamma[u].emplace(l, elems);
            }
            auto emsg = net.send(PartyId::client(l), "all", "EvalParams",
                                 serde::eval_record_to_json(prep.record()));
            if (!emsg) throw PhaseAbortError("grant", "client" + std::to_string(l), "eval params dropped");
            report.epp.push_back(serde::eval_record_from_json(emsg->payload, ""));
            preps.emplace(l, std::move(prep));
        }
        for (const auto& rec : report.epp)
            if (rec.Y != report.epp.front().Y)
                throw PhaseAbortError("grant", "server", "leaders disagree on Y");

        // Phase 4c: every client finishes its grant (possibly in parallel).
        std::vector<tf::GrantResult> grants(config.n);
        auto finish_grant = [&](unsigned u) {
            bool is_leader = preps.count(u) > 0;
            if (is_leader)
                return tf::leader_grant_finish(preps.at(u), sp, config.coeffs[u - 1], secrets[u - 1],
                                               inbox_f[u], inbox_gamma[u], leaders);
            return tf::nonleader_grant(sp, config.coeffs[u - 1], secrets[u - 1], inbox_f[u],
                                       inbox_gamma[u], leaders);
        };
        if (config.parallel) {
            std::vector<std::future<tf::GrantResult>> futures;
            for (unsigned u = 1; u <= config.n; ++u)
                futures.push_back(std::async(std::launch::async, finish_grant, u));
            for (unsigned u = 1; u <= config.n; ++u) {
                try {
                    grants[u - 1] = futures[u - 1].get();
                } catch (const ProtocolAbortError& e) {
                    throw PhaseAbortError("grant", "client" + std::to_string(u), e.what());
                }
            }
        } else {
            for (unsigned u = 1; u <= config.n; ++u) {
                try {
                    grants[u - 1] = finish_grant(u);
                } catch (const ProtocolAbortError& e) {
                    throw PhaseAbortError("grant", "client" + std::to_string(u), e.what());
                }
            }
        }

        // Phase 4d: OLE sessions re-encode each published coordinate; the
        // ideal functionality aborts if the adversary touches its inputs.
        std::vector<std::vector<FieldElement>> d(config.n);
        std::uint64_t session = 0;
        for (unsigned u = 1; u <= config.n; ++u) {
            SeededRng session_rng = client_rngs[u - 1].fork("ole");
            for (unsigned i = 0; i < sp.tbar(); ++i) {
                std::uint64_t sid = session++;
                // Every staged input travels the channel fabric. The server
                // plays the OLE receiver (its input is the puzzle coordinate),
                // so the first functionality's (c^{-1}, r) and the second's c
                // originate from the server; the rest come from the client.
                OleInputHook ole_hook = [&net, u, sid](const std::string& stage, const FieldElement& value)
                    -> std::optional<FieldElement> {
                    bool from_server = stage == "fole1.a" || stage == "fole1.b" || stage == "fole2.c";
                    PartyId from = from_server ? PartyId::server() : PartyId::client(u);
                    std::string to = from_server ? PartyId::client(u).str() : "server";
                    ojson payload{{"session", sid},
                                  {"stage", stage},
                                  {"value", serde::int_str(value.value())}};
                    auto msg = net.send(from, to, "OleMsg", payload);
                    if (!msg) return std::nullopt;
                    mpz_class delivered = serde::require_int(msg->payload, "value", "");
                    if (delivered != value.value()) return std::nullopt;  // substitution detected
                    return value;
                };
                try {
                    OleResult res = ole_plus(grants[u - 1].ole_inputs[i],
                                             OleReceiverInput{report.puzzles[u - 1].o[i]}, session_rng,
                                             sid, nullptr, ole_hook);
                    d[u - 1].push_back(res.output);
                } catch (const ProtocolAbortError& e) {
                    throw PhaseAbortError("ole", "client" + std::to_string(u), e.what());
                }
            }
        }

        // Phase 4e: server combines and publishes.
        tf::EvalPuzzle g_local = tf::server_evaluate(d, sp);
        auto gmsg = net.send(PartyId::server(), "all", "EvalPuzzlePublish",
                             ojson{{"g", serde::elems_to_json(g_local.g)}});
        if (!gmsg) throw PhaseAbortError("evaluate", "server", "combined puzzle dropped");
        report.g = tf::EvalPuzzle{
            serde::elems_from_json(serde::require_array(gmsg->payload, "g", ""), sp.field, "/g")};

        // Phase 5.1: solve the combination from the published values.
        SeededRng solve_rng = server_rng.fork("solve");
        try {
            tf::CombinationSolution sol =
                tf::solve_combination(report.g, report.epp, sp, solve_rng, config.parallel);
            report.combination.solved = true;
            report.combination.res = sol.res.value();
            report.combination.proof = sol.proof;
        } catch (const tf::SolutionExtractionError& e) {
            // Extraction failed (e.g. tampered coordinates). The server still
            // publishes what it has: the true temporary keys with unusable
            // openings, which verification will reject.
            report.combination.solved = false;
            report.combination.solve_error = e.what();
            std::vector<mpz_class> tks;
            for (const auto& rec : report.epp)
                tks.push_back(sequential_power(rec.h, rec.Y, rec.N));
            for (std::size_t idx = 0; idx < report.epp.size(); ++idx)
                report.combination.proof.openings.push_back(
                    tf::CombinationOpening{zero(sp.field), tks[idx]});
            report.combination.res = 0;
        }
        ojson proof_payload;
        proof_payload["cmd"] = "evalPzl";
        proof_payload["res"] = serde::int_str(report.combination.res);
        proof_payload["openings"] = serde::combination_proof_to_json(report.combination.proof);
        auto pmsg = net.send(PartyId::server(), "all", "ProofPublish", proof_payload);
        if (!pmsg) throw PhaseAbortError("solve", "server", "proof publish dropped");

        // Phase 6 (verifier): checks run on delivered public data only.
        {
            mpz_class res = serde::require_int(pmsg->payload, "res", "");
            tf::CombinationProof delivered = serde::combination_proof_from_json(
                serde::require_array(pmsg->payload, "openings", ""), sp.field, "/openings");
            report.combination.verify = tf::verify_combination(FieldElement(res, sp.field), delivered,
                                                               report.g, report.epp, sp);
        }

        // Phase 5.2/6.2: single puzzles, solved and verified independently.
        if (config.solve_singles) {
            auto solve_one = [&](unsigned u) {
                SingleReport s;
                s.index = u;
                try {
                    tf::SingleSolution sol =
                        tf::solve_single(report.puzzles[u - 1], report.pps[u - 1], sp);
                    s.solved = true;
                    s.m = sol.m.value();
                    s.mk = sol.proof.mk;
                } catch (const tf::TamperSuspectedError& e) {
                    s.solved = false;
                    s.solve_error = e.what();
                }
                return s;
            };
            std::vector<SingleReport> singles(config.n);
            if (config.parallel) {
                std::vector<std::future<SingleReport>> futures;
                for (unsigned u = 1; u <= config.n; ++u)
                    futures.push_back(std::async(std::launch::async, solve_one, u));
                for (unsigned u = 1; u <= config.n; ++u) singles[u - 1] = futures[u - 1].get();
            } else {
                for (unsigned u = 1; u <= config.n; ++u) singles[u - 1] = solve_one(u);
            }
            for (unsigned u = 1; u <= config.n; ++u) {
                SingleReport& s = singles[u - 1];
                ojson payload{{"cmd", "clientPzl"},
                              {"index", u},
                              {"m", serde::int_str(s.m)},
                              {"mk", serde::int_str(s.mk)}};
                auto msg = net.send(PartyId::server(), "all", "ProofPublish", payload);
                if (msg) {
                    mpz_class m = serde::require_int(msg->payload, "m", "");
                    mpz_class mk = serde::require_int(msg->payload, "mk", "");
                    s.verify = tf::verify_client_puzzle(FieldElement(m, sp.field),
                                                        tf::SinglePuzzleProof{mk}, report.pps[u - 1]);
                } else {
                    s.verify = false;
                }
                report.singles.push_back(s);
            }
        }
    } catch (const PhaseAbortError& e) {
        report.status = "aborted";
        report.abort_phase = e.phase;
        report.abort_party = e.party;
        report.abort_reason = e.what();
    } catch (const std::exception& e) {
        // hooks can corrupt payloads in ways a specific phase does not
        // anticipate (e.g. unparsable broadcasts); still record the abort
        report.status = "aborted";
        report.abort_phase = "unattributed";
        report.abort_party = "unknown";
        report.abort_reason = e.what();
    }
    return report;
}

inline RunReport run_protocol(const SimConfig& config, std::uint64_t seed) {
    return run_with_adversary(config, seed, {});
}

// One recorded message per line.
inline std::string transcript_to_jsonl(const RunReport& report) {
    std::string out;
    for (const auto& m : report.transcript) {
        out += m.to_json().dump();
        out += '\n';
    }
    return out;
}

// Replay a recorded transcript through a verification-only party: every
// value it needs is parsed back out of the recorded messages, never taken
// from the report's own fields. Identical bits show that verification
// depends on published data alone.
struct ReplayBits {
    bool combination = false;
    std::vector<bool> singles;
};

inline ReplayBits replay_verify(const RunReport& report) {
    ReplayBits bits;
    if (report.status != "completed") return bits;

    std::optional<tf::ServerParams> sp;
    std::map<unsigned, tf::PuzzlePublicParams> pps;
    tf::EvalPublicParams epp;
    std::optional<tf::EvalPuzzle> g;
    std::optional<std::pair<mpz_class, tf::CombinationProof>> eval_claim;
    std::map<unsigned, std::pair<mpz_class, mpz_class>> single_claims;  // index -> (m, mk)

    for (const Message& msg : report.transcript) {
        if (msg.kind == "ServerParams") {
            sp = serde::server_params_from_json(msg.payload);
        } else if (msg.kind == "PuzzlePublish" && sp) {
            unsigned index = static_cast<unsigned>(std::stoul(msg.from.substr(6)));
            pps[index] = serde::pp_from_json(serde::require(msg.payload, "pp", ""), "/pp");
        } else if (msg.kind == "EvalParams") {
            epp.push_back(serde::eval_record_from_json(msg.payload, ""));
        } else if (msg.kind == "EvalPuzzlePublish" && sp) {
            g = tf::EvalPuzzle{serde::elems_from_json(serde::require_array(msg.payload, "g", ""),
                                                      sp->field, "/g")};
        } else if (msg.kind == "ProofPublish" && sp) {
            std::string cmd = serde::require_str(msg.payload, "cmd", "");
            if (cmd == "evalPzl") {
                eval_claim = {serde::require_int(msg.payload, "res", ""),
                              serde::combination_proof_from_json(
                                  serde::require_array(msg.payload, "openings", ""), sp->field,
                                  "/openings")};
            } else {
                unsigned index = static_cast<unsigned>(serde::require_u64(msg.payload, "index", ""));
                single_claims[index] = {serde::require_int(msg.payload, "m", ""),
                                        serde::require_int(msg.payload, "mk", "")};
            }
        }
    }

    if (sp && g && eval_claim)
        bits.combination = tf::verify_combination(FieldElement(eval_claim->first, sp->field),
                                                  eval_claim->second, *g, epp, *sp);
    for (const auto& s : report.singles) {
        auto claim = single_claims.find(s.index);
        bool bit = false;
        if (sp && claim != single_claims.end() && pps.count(s.index) > 0)
            bit = tf::verify_client_puzzle(FieldElement(claim->second.first, sp->field),
                                           tf::SinglePuzzleProof{claim->second.second},
                                           pps.at(s.index));
        bits.singles.push_back(bit);
    }
    return bits;
}

}  // namespace vhtlp::sim
