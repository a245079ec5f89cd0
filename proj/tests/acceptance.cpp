// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Tolerances and thresholds are pinned in code below.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sys/wait.h>
#include <iostream>

#include "oracles.hpp"
#include "vhtlp/bench.hpp"
#include "vhtlp/mitf.hpp"
#include "vhtlp/serde.hpp"
#include "vhtlp/simnet.hpp"

using namespace vhtlp;

namespace {

int failures = 0;

void criterion(int number, const std::string& name, const std::function<void()>& body) {
    auto start = std::chrono::steady_clock::now();
    std::string error;
    try {
        body();
    } catch (const std::exception& e) {
        error = e.what();
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty()) {
        std::printf("PASS  criterion %d: %s  (%.1fs)\n", number, name.c_str(), secs);
    } else {
        std::printf("FAIL  criterion %d: %s  (%.1fs)\n      %s\n", number, name.c_str(), secs,
                    error.c_str());
        ++failures;
    }
    std::fflush(stdout);
}

void require(bool cond, const std::string& what) {
    if (!cond) throw Error(what);
}

// flip one random bit of a field element, keeping the result in [0, p)
FieldElement flip_bit(const FieldElement& v, SeededRng& rng) {
    const mpz_class& p = v.modulus();
    std::size_t bits = mpz_sizeinbase(p.get_mpz_t(), 2);
    for (;;) {
        mpz_class flipped = v.value();
        mpz_combit(flipped.get_mpz_t(), rng.u64() % bits);
        if (flipped < p && flipped != v.value()) return FieldElement(flipped, v.field());
    }
}

// ---------------------------------------------------------------------------

void criterion1_completeness() {
    const auto t_start = std::chrono::steady_clock::now();
    const std::vector<std::pair<unsigned, unsigned>> combos{
        {1, 1}, {2, 1}, {2, 2}, {3, 1}, {3, 2}, {3, 3}, {5, 1}, {5, 2}, {5, 3}};
    unsigned zero_sum_checks = 0;
    for (unsigned run = 0; run < 100; ++run) {
        SeededRng rng(1000 + run);
        auto [n, leaders] = combos[run % combos.size()];
        tf::ServerParams sp = tf::s_setup(rng, 128, leaders, leaders);

        std::vector<tf::EvalClientState> clients;
        std::vector<tf::GenPuzzleResult> gens;
        std::vector<mpz_class> ms, qs;
        for (unsigned u = 0; u < n; ++u) {
            ClientKeys keys = keygen(rng, 128);
            mpz_class m = rng.below(sp.universe_bound);
            mpz_class q = rng.range(1, sp.universe_bound);
            std::uint64_t T = 1 + rng.u64() % 10000;  // small T per the criterion
            auto gen = tf::gen_puzzle(m, keys, sp, TimelockParams{T, T, 1}, rng);
            clients.push_back(tf::EvalClientState{keys, gen.puzzle, gen.secrets, q});
            gens.push_back(std::move(gen));
            ms.push_back(m);
            qs.push_back(q);
        }

        std::uint64_t Y = 1 + rng.u64() % 2000;
        auto outcome = tf::run_evaluation(sp, clients, Y, rng);

        // criterion 4 rides along: zero-sum blinding on the run's internals
        for (unsigned i = 0; i < sp.tbar(); ++i) {
            FieldElement sum = zero(sp.field);
            for (unsigned u = 0; u < n; ++u) sum += outcome.grants[u].y[i];
            require(sum.is_zero(), "zero-sum blinding violated");
            ++zero_sum_checks;
        }

        // conditions 2 and 4: combination solves to the oracle value, verify=1
        auto comb = tf::solve_combination(outcome.g, outcome.epp, sp, rng);
        require(comb.res.value() == test::linear_combination(qs, ms, sp.field->p),
                "combination result mismatch vs brute-force oracle");
        require(tf::verify_combination(comb.res, comb.proof, outcome.g, outcome.epp, sp),
                "evalPzl verification rejected an honest run");

        // conditions 1 and 3: every single puzzle solves exactly, verify=1
        for (unsigned u = 0; u < n; ++u) {
            auto sol = tf::solve_single(gens[u].puzzle, gens[u].pp, sp);
            require(sol.m.value() == ms[u], "single-puzzle solution mismatch");
            require(tf::verify_client_puzzle(sol.m, sol.proof, gens[u].pp),
                    "clientPzl verification rejected an honest run");
        }
    }
    require(zero_sum_checks > 0, "no zero-sum checks ran");
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    require(secs < 60.0, "completeness runs exceeded the 60 s budget");
}

void criterion2_trapdoor_sequential() {
    const auto t_start = std::chrono::steady_clock::now();
    SeededRng rng(2024);
    ClientKeys keys = keygen(rng, 256);  // 512-bit modulus
    require(mpz_sizeinbase(keys.N.get_mpz_t(), 2) >= 511, "modulus is not 512 bits");
    for (unsigned trial = 0; trial < 200; ++trial) {
        mpz_class r = rng.range(1, keys.N);
        std::uint64_t T = rng.u64() % 100001;
        require(trapdoor_power(r, T, keys) == sequential_power(r, T, keys.N),
                "trapdoor and sequential powers disagree");
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    require(secs < 30.0, "trapdoor/sequential agreement exceeded the 30 s budget");
}

void criterion3_tamper_rejection() {
    SeededRng rng(3000);
    tf::ServerParams sp = tf::s_setup(rng, 80, 2, 2);  // log2 p >= 64
    require(sp.field->bits >= 64, "field below the 64-bit floor");
    const unsigned n = 3;
    std::vector<tf::EvalClientState> clients;
    std::vector<mpz_class> ms, qs;
    for (unsigned u = 0; u < n; ++u) {
        ClientKeys keys = keygen(rng, 64);
        mpz_class m = rng.below(sp.universe_bound);
        mpz_class q = rng.range(1, sp.universe_bound);
        auto gen = tf::gen_puzzle(m, keys, sp, TimelockParams{32, 32, 1}, rng, 64);
        clients.push_back(tf::EvalClientState{keys, gen.puzzle, gen.secrets, q});
        ms.push_back(m);
        qs.push_back(q);
    }
    auto outcome = tf::run_evaluation(sp, clients, 16, rng);
    auto honest = tf::solve_combination(outcome.g, outcome.epp, sp, rng);
    require(tf::verify_combination(honest.res, honest.proof, outcome.g, outcome.epp, sp),
            "honest run must verify before tampering");

    unsigned rejections = 0;
    for (unsigned trial = 0; trial < 1000; ++trial) {
        tf::EvalPuzzle tampered = outcome.g;
        unsigned i = static_cast<unsigned>(rng.u64() % sp.tbar());
        if (trial % 2 == 0) {
            // flip one bit of a published combined coordinate g_i
            tampered.g[i] = flip_bit(tampered.g[i], rng);
        } else {
            // flip one bit of a client's published coordinate o_{i,u}; the
            // grant inputs are independent of o, so the combined coordinate
            // moves by exactly e_{i,u} * (o' - o)
            unsigned u = static_cast<unsigned>(rng.u64() % n);
            FieldElement o_orig = clients[u].puzzle.o[i];
            FieldElement o_new = flip_bit(o_orig, rng);
            tampered.g[i] += outcome.grants[u].ole_inputs[i].a * (o_new - o_orig);
            require(tampered.g[i] != outcome.g.g[i], "tamper had no effect on the coordinate");
        }

        bool extraction_failed = false;
        try {
            tf::solve_combination_with_keys(tampered, outcome.epp, honest.tks, sp, rng);
        } catch (const tf::SolutionExtractionError&) {
            extraction_failed = true;
        }
        bool verify_rejects =
            !tf::verify_combination(honest.res, honest.proof, tampered, outcome.epp, sp);
        if (extraction_failed && verify_rejects) ++rejections;
    }
    require(rejections == 1000, "tamper rejections: " + std::to_string(rejections) + "/1000");
}

void criterion4_zero_sum() {
    // the per-coordinate sums are also asserted inside criteria 1 and 6; this
    // dedicated fixture makes the check visible as its own pass/fail line
    SeededRng rng(4000);
    tf::ServerParams sp = tf::s_setup(rng, 80, 3, 3);
    std::vector<tf::EvalClientState> clients;
    for (unsigned u = 0; u < 5; ++u) {
        ClientKeys keys = keygen(rng, 48);
        auto gen = tf::gen_puzzle(rng.below(sp.universe_bound), keys, sp, TimelockParams{16, 16, 1},
                                  rng, 64);
        clients.push_back(
            tf::EvalClientState{keys, gen.puzzle, gen.secrets, rng.range(1, sp.universe_bound)});
    }
    auto outcome = tf::run_evaluation(sp, clients, 8, rng);
    for (unsigned i = 0; i < sp.tbar(); ++i) {
        FieldElement sum = zero(sp.field);
        for (unsigned u = 0; u < 5; ++u) sum += outcome.grants[u].y[i];
        require(sum.is_zero(), "zero-sum blinding violated");
    }
}

void criterion5_ole() {
    SeededRng rng(5000);
    FieldPtr f = random_field(rng, 96);
    for (unsigned trial = 0; trial < 1000; ++trial) {
        OleSenderInput sender{random_element(rng, f), random_element(rng, f)};
        OleReceiverInput receiver{random_nonzero(rng, f)};
        require(ole_plus(sender, receiver, rng).output == f_ole(sender, receiver),
                "enhanced OLE output differs from a*c+b");
    }

    // sender-view uniformity over F_101: enumerating the receiver randomness
    // must hit every field element exactly once
    FieldPtr f101 = make_field(101);
    OleSenderInput sender{fe(13, f101), fe(57, f101)};
    OleReceiverInput receiver{fe(29, f101)};
    FieldElement u = fe(64, f101);
    std::set<mpz_class> views;
    for (long r = 0; r < 101; ++r) {
        auto res = ole_plus_with_randomness(sender, receiver, fe(r, f101), u);
        require(res.output == f_ole(sender, receiver), "OLE output wrong during enumeration");
        views.insert(res.sender_view.value());
    }
    require(views.size() == 101, "sender view is not exactly uniform over F_101");
}

void criterion6_multi_instance() {
    SeededRng rng(6000);

    // z = 5 chain round trip, in order, with exact base re-derivation
    mi::ChainParams cp = mi::mi_setup(rng, 80, {16, 16, 16, 16, 16}, 1);
    ClientKeys keys = keygen(rng, 64);
    std::vector<mpz_class> ms;
    for (unsigned j = 0; j < 5; ++j) ms.push_back(rng.below(cp.sp.universe_bound));
    auto gen = mi::mi_gen_puzzles(ms, keys, cp, rng, 64);
    auto entries = mi::mi_solve_chain(gen.puzzles, gen.pp, cp);
    require(entries.size() == 5, "chain did not produce five solutions");
    for (unsigned j = 0; j < 5; ++j) {
        require(entries[j].degree_ok, "chain entry flagged in an honest run");
        require(entries[j].m.value() == ms[j], "chain message out of order or wrong");
        require(entries[j].base == gen.secrets.bases[j], "recomputed base differs from generation");
        require(mi::mi_verify_single(entries[j].m, entries[j].mk, gen.pp, j + 1),
                "chain commitment rejected an honest opening");
    }

    // 100 random (q, m) vectors: combination equals the oracle
    for (unsigned trial = 0; trial < 100; ++trial) {
        unsigned z = 1 + static_cast<unsigned>(rng.u64() % 5);
        mi::ChainParams tcp = mi::mi_setup(rng, 80, std::vector<std::uint64_t>(z, 16), 1);
        ClientKeys tkeys = keygen(rng, 64);
        std::vector<mpz_class> tms, tqs;
        for (unsigned j = 0; j < z; ++j) {
            tms.push_back(rng.below(tcp.sp.universe_bound));
            tqs.push_back(rng.range(1, tcp.sp.universe_bound));
        }
        auto tgen = mi::mi_gen_puzzles(tms, tkeys, tcp, rng, 64);
        auto eval = mi::mi_evaluate(tgen.puzzles, tqs, 8, tkeys, tgen.secrets, tcp, rng);
        for (unsigned i = 0; i < 3; ++i) {
            FieldElement sum = zero(tcp.sp.field);
            for (unsigned j = 0; j < z; ++j) sum += eval.y[j][i];
            require(sum.is_zero(), "chain zero-sum blinding violated");
        }
        auto sol = mi::mi_solve_combination(eval.g, eval.epp, tcp, rng);
        require(sol.res.value() == test::linear_combination(tqs, tms, tcp.sp.field->p),
                "chain combination mismatch vs oracle");
        require(sol.theta.degree() == 2, "chain theta degree is not two");
        require(mi::mi_verify_combination(sol.res, sol.proof, eval.g, eval.epp, tcp),
                "chain combination verification rejected an honest run");
    }

    // tamper rejection with the degree-2 theta, 1000/1000
    mi::ChainParams fcp = mi::mi_setup(rng, 80, {16, 16, 16}, 1);
    ClientKeys fkeys = keygen(rng, 64);
    std::vector<mpz_class> fms, fqs;
    for (unsigned j = 0; j < 3; ++j) {
        fms.push_back(rng.below(fcp.sp.universe_bound));
        fqs.push_back(rng.range(1, fcp.sp.universe_bound));
    }
    auto fgen = mi::mi_gen_puzzles(fms, fkeys, fcp, rng, 64);
    auto feval = mi::mi_evaluate(fgen.puzzles, fqs, 8, fkeys, fgen.secrets, fcp, rng);
    auto fsol = mi::mi_solve_combination(feval.g, feval.epp, fcp, rng);
    require(fsol.theta.degree() == 2, "fixture theta degree is not two");

    unsigned rejections = 0;
    for (unsigned trial = 0; trial < 1000; ++trial) {
        tf::EvalPuzzle tampered = feval.g;
        unsigned i = static_cast<unsigned>(rng.u64() % 3);
        if (trial % 2 == 0) {
            tampered.g[i] = flip_bit(tampered.g[i], rng);
        } else {
            // flipping o_{i,j} moves g_i by gamma_i*q_j*w'_i*w^{-1} * delta;
            // recompute that shift from the white-box fixture data
            unsigned j = static_cast<unsigned>(rng.u64() % 3);
            FieldElement o_orig = fgen.puzzles[j].o[i];
            FieldElement o_new = flip_bit(o_orig, rng);
            auto [kb, sb] = prf_derive_pair(PrfKey::from_integer(fgen.secrets.mks[j]));
            FieldElement w = prf_index(i + 1, sb, fcp.sp.field);
            auto [kp, sp_key] = prf_derive_pair(PrfKey::from_integer(feval.tk));
            FieldElement w_prime = prf_index(i + 1, sp_key, fcp.sp.field);
            FieldElement gamma_i = fcp.sp.xs[i] - feval.root;
            FieldElement e = gamma_i * FieldElement(fqs[j], fcp.sp.field) * w_prime * inv(w);
            tampered.g[i] += e * (o_new - o_orig);
            require(tampered.g[i] != feval.g.g[i], "tamper had no effect on the coordinate");
        }
        bool extraction_failed = false;
        try {
            tf::solve_combination_with_keys(tampered, {feval.epp}, {feval.tk}, fcp.sp, rng);
        } catch (const tf::SolutionExtractionError&) {
            extraction_failed = true;
        }
        bool verify_rejects =
            !mi::mi_verify_combination(fsol.res, fsol.proof, tampered, feval.epp, fcp);
        if (extraction_failed && verify_rejects) ++rejections;
    }
    require(rejections == 1000, "chain tamper rejections: " + std::to_string(rejections) + "/1000");
}

void criterion7_multiple_evaluation() {
    SeededRng rng(7000);
    tf::ServerParams sp = tf::s_setup(rng, 96, 2, 1);
    const unsigned n = 4;
    std::vector<tf::EvalClientState> clients;
    std::vector<mpz_class> ms, q1, q2;
    for (unsigned u = 0; u < n; ++u) {
        ClientKeys keys = keygen(rng, 64);
        mpz_class m = rng.below(sp.universe_bound);
        auto gen = tf::gen_puzzle(m, keys, sp, TimelockParams{32, 32, 1}, rng, 64);
        clients.push_back(tf::EvalClientState{keys, gen.puzzle, gen.secrets, 0});
        ms.push_back(m);
        q1.push_back(rng.range(1, sp.universe_bound));
        q2.push_back(rng.range(1, sp.universe_bound));
    }

    for (unsigned u = 0; u < n; ++u) clients[u].q = q1[u];
    auto first = tf::run_evaluation(sp, clients, 16, rng);
    auto sol1 = tf::solve_combination(first.g, first.epp, sp, rng);
    require(sol1.res.value() == test::linear_combination(q1, ms, sp.field->p),
            "first evaluation mismatch vs oracle");
    require(tf::verify_combination(sol1.res, sol1.proof, first.g, first.epp, sp),
            "first evaluation failed verification");

    for (unsigned u = 0; u < n; ++u) clients[u].q = q2[u];
    auto second = tf::run_evaluation(sp, clients, 16, rng);
    auto sol2 = tf::solve_combination(second.g, second.epp, sp, rng);
    require(sol2.res.value() == test::linear_combination(q2, ms, sp.field->p),
            "second evaluation mismatch vs oracle");
    require(tf::verify_combination(sol2.res, sol2.proof, second.g, second.epp, sp),
            "second evaluation failed verification");
}

void criterion8_benchmarks() {
    SeededRng rng(8000);
    // the floor is 100 trials per grid point; factorization gets more
    // because randomized splitting makes its per-trial times noisy
    bench::BenchReport fact = bench::run_suite("factorization", {128, 256}, 200, rng);
    bench::BenchReport prf_rep = bench::run_suite("prf", {128, 256}, 100, rng);

    auto mean_of = [](const bench::BenchReport& rep, const std::string& op, std::uint64_t param,
                      unsigned bits) {
        for (const auto& row : rep.rows)
            if (row.operation == op && row.parameter == param && row.field_bits == bits) {
                if (row.trials < 100) throw Error("fewer than 100 trials in a bench row");
                return row.mean_ms;
            }
        throw Error("bench grid is missing a required point");
    };
    require(fact.rows.size() == 10, "factorization grid must be 5 degrees x 2 field sizes");
    require(prf_rep.rows.size() == 12, "prf grid must be 6 counts x 2 field sizes");

    // 128-bit reference runtimes, one order of magnitude each way
    const std::vector<std::pair<std::uint64_t, double>> fact_ref{
        {2, 0.3}, {4, 0.5}, {6, 0.8}, {8, 1.2}, {10, 1.4}};
    for (auto [degree, ref_ms] : fact_ref) {
        double mine = mean_of(fact, "factorization", degree, 128);
        require(mine >= ref_ms / 10.0 && mine <= ref_ms * 10.0,
                "factorization degree " + std::to_string(degree) + " took " + std::to_string(mine) +
                    " ms, outside 10x of " + std::to_string(ref_ms));
    }
    const std::vector<std::pair<std::uint64_t, double>> prf_ref{
        {2, 0.006}, {4, 0.01}, {16, 0.04}, {64, 0.15}, {256, 0.65}, {1024, 2.424}};
    for (auto [count, ref_ms] : prf_ref) {
        double mine = mean_of(prf_rep, "prf", count, 128);
        require(mine >= ref_ms / 10.0 && mine <= ref_ms * 10.0,
                "prf count " + std::to_string(count) + " took " + std::to_string(mine) +
                    " ms, outside 10x of " + std::to_string(ref_ms));
    }

    // qualitative claims: nondecreasing in degree / count, at both field sizes
    for (unsigned bits : {128u, 256u}) {
        double prev = 0;
        for (std::uint64_t degree : bench::factorization_degrees()) {
            double mine = mean_of(fact, "factorization", degree, bits);
            require(mine >= prev, "factorization runtime decreased with degree at " +
                                      std::to_string(bits) + " bits");
            prev = mine;
        }
        prev = 0;
        for (std::uint64_t count : bench::prf_counts()) {
            double mine = mean_of(prf_rep, "prf", count, bits);
            require(mine >= prev,
                    "prf runtime decreased with count at " + std::to_string(bits) + " bits");
            prev = mine;
        }
    }

    // 256-bit factorization slower than 128-bit by a factor in [1.2, 3.0];
    // the factor is the whole grid's total time ratio (an aggregate claim,
    // aggregated over the grid)
    double total_128 = 0, total_256 = 0;
    for (std::uint64_t degree : bench::factorization_degrees()) {
        total_128 += mean_of(fact, "factorization", degree, 128);
        total_256 += mean_of(fact, "factorization", degree, 256);
    }
    double ratio = total_256 / total_128;
    require(ratio >= 1.2 && ratio <= 3.0,
            "256/128-bit factorization ratio " + std::to_string(ratio) + " outside [1.2, 3.0]");
}

void criterion9_determinism() {
    namespace fs = std::filesystem;
    fs::path scratch = fs::path("acceptance_scratch");
    fs::create_directories(scratch);

    serde::SimConfig config;
    config.n = 3;
    config.leaders = 2;
    config.threshold = 1;
    config.field_bits = 80;
    config.min_field_bits = 64;
    config.universe_bits = 32;
    config.rsa_factor_bits = 48;
    config.max_ss = 1;
    config.client_deltas = {48, 48, 48};
    config.eval_delta = 16;
    config.messages = {101, 202, 303};
    config.coeffs = {7, 8, 9};
    {
        std::ofstream out(scratch / "config.json");
        out << serde::sim_config_to_json(config).dump(2) << "\n";
    }

    auto run_once = [&](const fs::path& out_file) {
        std::string cmd = std::string(VHTLP_CLI_PATH) + " simulate --config " +
                          (scratch / "config.json").string() + " --seed 424242 > " +
                          out_file.string() + " 2> " + (scratch / "stderr.txt").string();
        int status = std::system(cmd.c_str());
        require(WIFEXITED(status) && WEXITSTATUS(status) == 0, "simulate did not exit 0");
        std::ifstream in(out_file);
        return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    };
    std::string a = run_once(scratch / "run_a.json");
    std::string b = run_once(scratch / "run_b.json");
    require(!a.empty(), "simulate produced no output");
    require(a == b, "two runs with identical seed and config differ");

    serde::ojson report = serde::ojson::parse(a);
    require(report.at("status") == "completed", "simulated run did not complete");
    require(report.at("combination").at("verify") == 1, "simulated combination did not verify");
}

}  // namespace

int main() {
    std::printf("acceptance suite\n");
    criterion(1, "completeness across n in {1,2,3,5}, leaders in {1,2,3} (100 seeded runs)",
              criterion1_completeness);
    criterion(2, "trapdoor equals sequential squaring (200 runs, 512-bit N, T <= 1e5)",
              criterion2_trapdoor_sequential);
    criterion(3, "single-coordinate tamper rejection, 1000/1000", criterion3_tamper_rejection);
    criterion(4, "zero-sum blinding on white-box fixture internals", criterion4_zero_sum);
    criterion(5, "enhanced OLE equals a*c+b (1000 triples) and exact sender-view uniformity",
              criterion5_ole);
    criterion(6, "multi-instance chain: order, base re-derivation, oracle match, tamper rejection",
              criterion6_multi_instance);
    criterion(7, "multiple evaluations with fresh coefficients on the same puzzles",
              criterion7_multiple_evaluation);
    criterion(8, "benchmark grids, reference runtimes within 10x, monotonicity, 256/128 ratio",
              criterion8_benchmarks);
    criterion(9, "byte-identical simulator reports for identical seed and config",
              criterion9_determinism);

    std::printf(
        "note: privacy and the sequential-squaring assumption are not desk-verifiable; criteria 2-4 "
        "stand in as structural checks.\n");
    if (failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
}
