#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vhtlp/serde.hpp"

using namespace vhtlp;
using serde::ojson;

namespace {

serde::PuzzleFile make_puzzle_file(SeededRng& rng) {
    tf::ServerParams sp = tf::s_setup(rng, 80, 2, 1);
    ClientKeys keys = keygen(rng, 48);
    auto gen = tf::gen_puzzle(rng.below(sp.universe_bound), keys, sp, TimelockParams{16, 16, 1}, rng, 64);
    return serde::PuzzleFile{sp, gen.puzzle, gen.pp};
}

}  // namespace

TEST_CASE("server params round trip") {
    SeededRng rng(100);
    tf::ServerParams sp = tf::s_setup(rng, 96, 3, 2);
    ojson j = serde::server_params_to_json(sp);
    tf::ServerParams back = serde::server_params_from_json(j);
    CHECK(back.field->p == sp.field->p);
    CHECK(back.leader_count == sp.leader_count);
    CHECK(back.threshold == sp.threshold);
    CHECK(back.universe_bound == sp.universe_bound);
    REQUIRE(back.xs.size() == sp.xs.size());
    for (std::size_t i = 0; i < sp.xs.size(); ++i) CHECK(back.xs[i] == sp.xs[i]);
    CHECK(serde::server_params_to_json(back) == j);
}

TEST_CASE("client keys round trip") {
    SeededRng rng(101);
    ClientKeys keys = keygen(rng, 64);
    ojson j = serde::keys_to_json(keys);
    ClientKeys back = serde::keys_from_json(j);
    CHECK(back.N == keys.N);
    CHECK(back.phi == keys.phi);
    CHECK(serde::keys_to_json(back) == j);
}

TEST_CASE("puzzle file round trip is lossless") {
    SeededRng rng(102);
    serde::PuzzleFile file = make_puzzle_file(rng);
    ojson j = serde::puzzle_file_to_json(file);
    serde::PuzzleFile back = serde::puzzle_file_from_json(j);
    CHECK(serde::puzzle_file_to_json(back) == j);
    CHECK(back.pp.com == file.pp.com);
    CHECK(back.pp.r == file.pp.r);
    CHECK(back.pp.T == file.pp.T);
    for (std::size_t i = 0; i < file.puzzle.o.size(); ++i) CHECK(back.puzzle.o[i] == file.puzzle.o[i]);
}

TEST_CASE("schema violations carry a JSON pointer") {
    SeededRng rng(103);
    ojson j = serde::puzzle_file_to_json(make_puzzle_file(rng));
    ojson missing = j;
    missing.erase("pp");
    try {
        serde::puzzle_file_from_json(missing);
        FAIL("expected SchemaError");
    } catch (const serde::SchemaError& e) {
        CHECK(e.pointer == "/pp");
    }

    ojson bad_int = j;
    bad_int["pp"]["r"] = "not-a-number";
    try {
        serde::puzzle_file_from_json(bad_int);
        FAIL("expected SchemaError");
    } catch (const serde::SchemaError& e) {
        CHECK(e.pointer == "/pp/r");
    }

    ojson wrong_count = j;
    wrong_count["puzzle"]["o"].erase(0);
    CHECK_THROWS_AS(serde::puzzle_file_from_json(wrong_count), serde::SchemaError);
}

TEST_CASE("integers survive as decimal strings beyond 64 bits") {
    mpz_class big("123456789012345678901234567890123456789");
    CHECK(serde::int_parse(serde::int_str(big), "/x") == big);
    CHECK_THROWS_AS(serde::int_parse("", "/x"), serde::SchemaError);
    CHECK_THROWS_AS(serde::int_parse("12x", "/x"), serde::SchemaError);
}

TEST_CASE("sim config round trip") {
    serde::SimConfig c;
    c.n = 3;
    c.leaders = 2;
    c.threshold = 1;
    c.field_bits = 80;
    c.min_field_bits = 64;
    c.universe_bits = 32;
    c.rsa_factor_bits = 48;
    c.max_ss = 4;
    c.client_deltas = {8, 8, 8};
    c.eval_delta = 2;
    c.messages = {1, 2, 3};
    c.coeffs = {4, 5, 6};
    ojson j = serde::sim_config_to_json(c);
    serde::SimConfig back = serde::sim_config_from_json(j);
    CHECK(serde::sim_config_to_json(back) == j);

    ojson bad = j;
    bad["messages"] = ojson::array({"1"});
    CHECK_THROWS_AS(serde::sim_config_from_json(bad), serde::SchemaError);
}

TEST_CASE("combination proof round trip") {
    SeededRng rng(104);
    FieldPtr f = random_field(rng, 80);
    tf::CombinationProof proof;
    proof.openings.push_back({random_element(rng, f), rng.below(mpz_class(1) << 100)});
    proof.openings.push_back({random_element(rng, f), rng.below(mpz_class(1) << 100)});
    ojson j = serde::combination_proof_to_json(proof);
    tf::CombinationProof back = serde::combination_proof_from_json(j, f, "/openings");
    REQUIRE(back.openings.size() == 2);
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(back.openings[i].root == proof.openings[i].root);
        CHECK(back.openings[i].tk == proof.openings[i].tk);
    }
}

TEST_CASE("ole transcript exports one JSON object per line") {
    SeededRng rng(105);
    FieldPtr f = make_field(101);
    OleTranscript transcript;
    ole_plus({fe(3, f), fe(5, f)}, {fe(2, f)}, rng, 1, &transcript);
    std::string jsonl = serde::ole_transcript_to_jsonl(transcript);
    std::size_t lines = std::count(jsonl.begin(), jsonl.end(), '\n');
    CHECK(lines == transcript.size());
    // every line parses back
    std::istringstream in(jsonl);
    std::string line;
    while (std::getline(in, line)) {
        ojson j = ojson::parse(line);
        CHECK(j.contains("session"));
        CHECK(j.contains("direction"));
        CHECK(j.contains("values"));
    }
}
