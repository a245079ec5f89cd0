#pragma once
// JSON schemas for every artifact that crosses a file or channel boundary.
// Integers travel as decimal strings (64-bit JSON numbers cannot carry
// them), digests as lowercase hex. Schema violations report the JSON
// pointer of the offending field.

#include <string>

#include <json.hpp>

#include "vhtlp/mitf.hpp"
#include "vhtlp/tf.hpp"

namespace vhtlp::serde {

using ojson = nlohmann::ordered_json;

struct SchemaError : Error {
    std::string pointer;
    SchemaError(std::string ptr, const std::string& what)
        : Error("schema violation at " + ptr + ": " + what), pointer(std::move(ptr)) {}
};

inline constexpr int kFileVersion = 1;

inline std::string int_str(const mpz_class& v) { return v.get_str(); }

inline mpz_class int_parse(const std::string& s, const std::string& pointer) {
    mpz_class v;
    if (s.empty() || mpz_set_str(v.get_mpz_t(), s.c_str(), 10) != 0)
        throw SchemaError(pointer, "expected a decimal integer string");
    return v;
}

inline const ojson& require(const ojson& obj, const std::string& key, const std::string& pointer) {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(pointer + "/" + key, "missing field");
    return obj.at(key);
}

inline std::string require_str(const ojson& obj, const std::string& key, const std::string& pointer) {
    const ojson& v = require(obj, key, pointer);
    if (!v.is_string()) throw SchemaError(pointer + "/" + key, "expected a string");
    return v.get<std::string>();
}

inline mpz_class require_int(const ojson& obj, const std::string& key, const std::string& pointer) {
    return int_parse(require_str(obj, key, pointer), pointer + "/" + key);
}

inline std::uint64_t require_u64(const ojson& obj, const std::string& key, const std::string& pointer) {
    const ojson& v = require(obj, key, pointer);
    if (!v.is_number_unsigned()) throw SchemaError(pointer + "/" + key, "expected an unsigned integer");
    return v.get<std::uint64_t>();
}

inline const ojson& require_array(const ojson& obj, const std::string& key, const std::string& pointer) {
    const ojson& v = require(obj, key, pointer);
    if (!v.is_array()) throw SchemaError(pointer + "/" + key, "expected an array");
    return v;
}

// --- field elements -------------------------------------------------------

inline ojson elems_to_json(const std::vector<FieldElement>& elems) {
    ojson arr = ojson::array();
    for (const auto& e : elems) arr.push_back(int_str(e.value()));
    return arr;
}

inline std::vector<FieldElement> elems_from_json(const ojson& arr, const FieldPtr& field,
                                                 const std::string& pointer) {
    if (!arr.is_array()) throw SchemaError(pointer, "expected an array");
    std::vector<FieldElement> out;
    out.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const ojson& v = arr.at(i);
        std::string item_ptr = pointer + "/" + std::to_string(i);
        if (!v.is_string()) throw SchemaError(item_ptr, "expected a string");
        out.emplace_back(int_parse(v.get<std::string>(), item_ptr), field);
    }
    return out;
}

// --- server params --------------------------------------------------------

inline ojson server_params_to_json(const tf::ServerParams& sp) {
    ojson j;
    j["version"] = kFileVersion;
    j["field"] = ojson{{"p", int_str(sp.field->p)}};
    j["xs"] = elems_to_json(sp.xs);
    j["leaders"] = sp.leader_count;
    j["threshold"] = sp.threshold;
    j["universe_bound"] = int_str(sp.universe_bound);
    return j;
}

inline tf::ServerParams server_params_from_json(const ojson& j) {
    FieldPtr field = make_field(require_int(require(j, "field", ""), "p", "/field"));
    std::vector<FieldElement> xs = elems_from_json(require_array(j, "xs", ""), field, "/xs");
    unsigned leaders = static_cast<unsigned>(require_u64(j, "leaders", ""));
    unsigned threshold = static_cast<unsigned>(require_u64(j, "threshold", ""));
    mpz_class bound = require_int(j, "universe_bound", "");
    return tf::make_server_params(field, std::move(xs), leaders, threshold, bound);
}

// --- client keys ----------------------------------------------------------

inline ojson keys_to_json(const ClientKeys& keys) {
    ojson j;
    j["version"] = kFileVersion;
    j["N"] = int_str(keys.N);
    j["phi"] = int_str(keys.phi);
    j["factor_bits"] = keys.factor_bits;
    return j;
}

inline ClientKeys keys_from_json(const ojson& j) {
    ClientKeys keys;
    keys.N = require_int(j, "N", "");
    keys.phi = require_int(j, "phi", "");
    keys.factor_bits = static_cast<unsigned>(require_u64(j, "factor_bits", ""));
    if (keys.N < 4 || keys.phi < 2 || keys.phi >= keys.N)
        throw SchemaError("/phi", "inconsistent key material");
    return keys;
}

// --- puzzle files ---------------------------------------------------------

inline ojson pp_to_json(const tf::PuzzlePublicParams& pp) {
    ojson j;
    j["com"] = to_hex(pp.com.digest);
    j["T"] = pp.T;
    j["r"] = int_str(pp.r);
    j["N"] = int_str(pp.N);
    return j;
}

inline tf::PuzzlePublicParams pp_from_json(const ojson& j, const std::string& pointer) {
    tf::PuzzlePublicParams pp;
    pp.com = Commitment{from_hex(require_str(j, "com", pointer))};
    pp.T = require_u64(j, "T", pointer);
    pp.r = require_int(j, "r", pointer);
    pp.N = require_int(j, "N", pointer);
    return pp;
}

struct PuzzleFile {
    tf::ServerParams sp;
    tf::PuzzleVector puzzle;
    tf::PuzzlePublicParams pp;
};

inline ojson puzzle_file_to_json(const PuzzleFile& f) {
    ojson j;
    j["version"] = kFileVersion;
    j["field"] = ojson{{"p", int_str(f.sp.field->p)}};
    j["xs"] = elems_to_json(f.sp.xs);
    j["leaders"] = f.sp.leader_count;
    j["threshold"] = f.sp.threshold;
    j["universe_bound"] = int_str(f.sp.universe_bound);
    j["puzzle"] = ojson{{"o", elems_to_json(f.puzzle.o)}};
    j["pp"] = pp_to_json(f.pp);
    return j;
}

inline PuzzleFile puzzle_file_from_json(const ojson& j) {
    PuzzleFile f{server_params_from_json(j), {}, {}};
    f.puzzle.o = elems_from_json(require_array(require(j, "puzzle", ""), "o", "/puzzle"), f.sp.field,
                                 "/puzzle/o");
    if (f.puzzle.o.size() != f.sp.tbar()) throw SchemaError("/puzzle/o", "wrong coordinate count");
    f.pp = pp_from_json(require(j, "pp", ""), "/pp");
    return f;
}

// --- solutions and proofs -------------------------------------------------

inline ojson single_solution_to_json(const FieldElement& m, const tf::SinglePuzzleProof& proof) {
    ojson j;
    j["version"] = kFileVersion;
    j["cmd"] = "clientPzl";
    j["m"] = int_str(m.value());
    j["proof"] = ojson{{"mk", int_str(proof.mk)}};
    return j;
}

inline ojson eval_record_to_json(const tf::EvalRecord& rec) {
    ojson j;
    j["leader"] = rec.leader;
    j["h"] = int_str(rec.h);
    j["com_root"] = to_hex(rec.com_root.digest);
    j["N"] = int_str(rec.N);
    j["Y"] = rec.Y;
    return j;
}

inline tf::EvalRecord eval_record_from_json(const ojson& j, const std::string& pointer) {
    tf::EvalRecord rec;
    rec.leader = static_cast<unsigned>(require_u64(j, "leader", pointer));
    rec.h = require_int(j, "h", pointer);
    rec.com_root = Commitment{from_hex(require_str(j, "com_root", pointer))};
    rec.N = require_int(j, "N", pointer);
    rec.Y = require_u64(j, "Y", pointer);
    return rec;
}

inline ojson combination_proof_to_json(const tf::CombinationProof& proof) {
    ojson arr = ojson::array();
    for (const auto& opening : proof.openings)
        arr.push_back(ojson{{"root", int_str(opening.root.value())}, {"tk", int_str(opening.tk)}});
    return arr;
}

inline tf::CombinationProof combination_proof_from_json(const ojson& arr, const FieldPtr& field,
                                                        const std::string& pointer) {
    if (!arr.is_array()) throw SchemaError(pointer, "expected an array");
    tf::CombinationProof proof;
    for (std::size_t i = 0; i < arr.size(); ++i) {
        std::string item_ptr = pointer + "/" + std::to_string(i);
        const ojson& o = arr.at(i);
        proof.openings.push_back(tf::CombinationOpening{
            FieldElement(require_int(o, "root", item_ptr), field), require_int(o, "tk", item_ptr)});
    }
    return proof;
}

// --- simulation config ----------------------------------------------------

struct SimConfig {
    unsigned n = 1;
    unsigned leaders = 1;
    unsigned threshold = 1;
    unsigned field_bits = 128;
    unsigned min_field_bits = 128;
    unsigned universe_bits = 64;
    unsigned rsa_factor_bits = 128;
    std::uint64_t max_ss = 64;
    std::vector<std::uint64_t> client_deltas;  // one per client
    std::uint64_t eval_delta = 1;
    std::vector<mpz_class> messages;
    std::vector<mpz_class> coeffs;
    bool parallel = false;
    bool solve_singles = true;
};

inline ojson sim_config_to_json(const SimConfig& c) {
    ojson j;
    j["version"] = kFileVersion;
    j["n"] = c.n;
    j["leaders"] = c.leaders;
    j["threshold"] = c.threshold;
    j["field_bits"] = c.field_bits;
    j["min_field_bits"] = c.min_field_bits;
    j["universe_bits"] = c.universe_bits;
    j["rsa_factor_bits"] = c.rsa_factor_bits;
    j["max_ss"] = c.max_ss;
    j["client_deltas"] = c.client_deltas;
    j["eval_delta"] = c.eval_delta;
    ojson msgs = ojson::array(), qs = ojson::array();
    for (const auto& m : c.messages) msgs.push_back(int_str(m));
    for (const auto& q : c.coeffs) qs.push_back(int_str(q));
    j["messages"] = msgs;
    j["coeffs"] = qs;
    j["parallel"] = c.parallel;
    j["solve_singles"] = c.solve_singles;
    return j;
}

inline SimConfig sim_config_from_json(const ojson& j) {
    SimConfig c;
    c.n = static_cast<unsigned>(require_u64(j, "n", ""));
    c.leaders = static_cast<unsigned>(require_u64(j, "leaders", ""));
    c.threshold = static_cast<unsigned>(require_u64(j, "threshold", ""));
    c.field_bits = static_cast<unsigned>(require_u64(j, "field_bits", ""));
    c.min_field_bits = static_cast<unsigned>(require_u64(j, "min_field_bits", ""));
    c.universe_bits = static_cast<unsigned>(require_u64(j, "universe_bits", ""));
    c.rsa_factor_bits = static_cast<unsigned>(require_u64(j, "rsa_factor_bits", ""));
    c.max_ss = require_u64(j, "max_ss", "");
    const ojson& deltas = require_array(j, "client_deltas", "");
    for (const auto& d : deltas) c.client_deltas.push_back(d.get<std::uint64_t>());
    c.eval_delta = require_u64(j, "eval_delta", "");
    const ojson& msgs = require_array(j, "messages", "");
    for (std::size_t i = 0; i < msgs.size(); ++i)
        c.messages.push_back(int_parse(msgs.at(i).get<std::string>(), "/messages/" + std::to_string(i)));
    const ojson& qs = require_array(j, "coeffs", "");
    for (std::size_t i = 0; i < qs.size(); ++i)
        c.coeffs.push_back(int_parse(qs.at(i).get<std::string>(), "/coeffs/" + std::to_string(i)));
    if (j.contains("parallel")) c.parallel = j.at("parallel").get<bool>();
    if (j.contains("solve_singles")) c.solve_singles = j.at("solve_singles").get<bool>();
    if (c.messages.size() != c.n || c.coeffs.size() != c.n)
        throw SchemaError("/messages", "need one message and one coefficient per client");
    if (c.client_deltas.size() != c.n) throw SchemaError("/client_deltas", "need one delta per client");
    return c;
}

// --- OLE transcript (JSON lines) -------------------------------------------

inline ojson ole_entry_to_json(const OleTranscriptEntry& e) {
    ojson j;
    j["session"] = e.session;
    j["direction"] = e.direction;
    ojson vals = ojson::array();
    for (const auto& v : e.values) vals.push_back(int_str(v));
    j["values"] = vals;
    return j;
}

inline std::string ole_transcript_to_jsonl(const OleTranscript& transcript) {
    std::string out;
    for (const auto& e : transcript) {
        out += ole_entry_to_json(e).dump();
        out += '\n';
    }
    return out;
}

}  // namespace vhtlp::serde
