// Command-line surface: key and puzzle lifecycle on JSON files, the
// deterministic protocol simulator, and the benchmark harness.
//
// Exit codes: 0 success, 1 verification failure, 2 error.

#include <fstream>
#include <iostream>
#include <random>

#include <CLI11.hpp>

#include "vhtlp/bench.hpp"
#include "vhtlp/serde.hpp"
#include "vhtlp/simnet.hpp"

using namespace vhtlp;
using serde::ojson;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitError = 2;

bool small_field_mode() {
    const char* v = std::getenv("TF_TEST_SMALL_FIELD");
    return v != nullptr && std::string(v) == "1";
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    std::uint64_t chosen = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "no --seed given; using OS entropy, seed=" << chosen << "\n";
    return chosen;
}

ojson read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    ojson j = ojson::parse(in, nullptr, true);
    return j;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

void write_json_file(const std::string& path, const ojson& j) { write_file(path, j.dump(2) + "\n"); }

struct SetupArgs {
    unsigned field_bits = 128;
    unsigned leaders = 1;
    unsigned threshold = 1;
    unsigned universe_bits = 64;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_setup(const SetupArgs& args) {
    if (args.field_bits < 128 && !small_field_mode())
        throw Error("field sizes below 128 bits need TF_TEST_SMALL_FIELD=1");
    SeededRng rng(resolve_seed(args.seed));
    SeededRng server = rng.fork("server");
    tf::ServerParams sp = tf::s_setup(server, args.field_bits, args.leaders, args.threshold,
                                      mpz_class(1) << args.universe_bits);
    write_json_file(args.out, serde::server_params_to_json(sp));
    return kExitOk;
}

struct KeygenArgs {
    unsigned factor_bits = 1024;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_keygen(const KeygenArgs& args) {
    SeededRng rng(resolve_seed(args.seed));
    SeededRng client = rng.fork("keygen");
    ClientKeys keys = keygen(client, args.factor_bits);
    write_json_file(args.out, serde::keys_to_json(keys));
    return kExitOk;
}

struct GenPuzzleArgs {
    std::string params_path;
    std::string keys_path;
    std::string message;
    std::uint64_t delta = 1;
    std::uint64_t max_ss = 64;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string secrets_out;
};

int cmd_genpuzzle(const GenPuzzleArgs& args) {
    tf::ServerParams sp = serde::server_params_from_json(read_json_file(args.params_path));
    ClientKeys keys = serde::keys_from_json(read_json_file(args.keys_path));
    mpz_class m = serde::int_parse(args.message, "/message");
    SeededRng rng(resolve_seed(args.seed));
    SeededRng client = rng.fork("genpuzzle");
    unsigned min_bits = small_field_mode() ? 8 : 128;
    auto gen = tf::gen_puzzle(m, keys, sp, TimelockParams::from_delta(args.delta, args.max_ss), client,
                              min_bits);
    write_json_file(args.out, serde::puzzle_file_to_json(serde::PuzzleFile{sp, gen.puzzle, gen.pp}));
    if (!args.secrets_out.empty()) {
        ojson secrets;
        secrets["version"] = serde::kFileVersion;
        secrets["k"] = to_hex(gen.secrets.k.bytes);
        secrets["s"] = to_hex(gen.secrets.s.bytes);
        secrets["mk"] = serde::int_str(gen.secrets.mk);
        write_json_file(args.secrets_out, secrets);
    }
    return kExitOk;
}

struct SolveArgs {
    std::string puzzle_path;
    std::string out;
    bool quiet = false;
};

int cmd_solve(const SolveArgs& args) {
    serde::PuzzleFile file = serde::puzzle_file_from_json(read_json_file(args.puzzle_path));
    ProgressFn progress;
    if (!args.quiet) {
        progress = [&file](std::uint64_t done) {
            if (done % (1 << 16) == 0) std::cerr << "squarings: " << done << "/" << file.pp.T << "\n";
            return true;
        };
    }
    try {
        tf::SingleSolution sol = tf::solve_single(file.puzzle, file.pp, file.sp, progress);
        write_json_file(args.out, serde::single_solution_to_json(sol.m, sol.proof));
        return kExitOk;
    } catch (const tf::TamperSuspectedError& e) {
        std::cerr << e.what() << "\n";
        return kExitVerifyFailed;
    }
}

struct VerifyArgs {
    std::string puzzle_path;
    std::string solution_path;
};

int cmd_verify(const VerifyArgs& args) {
    serde::PuzzleFile file = serde::puzzle_file_from_json(read_json_file(args.puzzle_path));
    ojson sol = read_json_file(args.solution_path);
    std::string cmd = serde::require_str(sol, "cmd", "");
    if (cmd != "clientPzl") throw serde::SchemaError("/cmd", "expected clientPzl");
    mpz_class m = serde::require_int(sol, "m", "");
    mpz_class mk = serde::require_int(serde::require(sol, "proof", ""), "mk", "/proof");
    bool ok = tf::verify_client_puzzle(FieldElement(m, file.sp.field), tf::SinglePuzzleProof{mk}, file.pp);
    std::cout << (ok ? "verify: accept" : "verify: reject") << "\n";
    return ok ? kExitOk : kExitVerifyFailed;
}

struct SimulateArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& args) {
    sim::SimConfig config = serde::sim_config_from_json(read_json_file(args.config_path));
    std::uint64_t seed = resolve_seed(args.seed);
    sim::RunReport report = sim::run_protocol(config, seed);
    std::cout << report.to_json().dump() << "\n";
    return kExitOk;
}

struct BenchArgs {
    std::string suite = "factorization";
    std::vector<unsigned> bits;
    unsigned trials = 100;
    std::optional<std::uint64_t> seed;
    std::string out;
};

int cmd_bench(const BenchArgs& args) {
    if (args.trials < 100) throw Error("bench needs at least 100 trials per point");
    std::vector<unsigned> bits = args.bits.empty() ? std::vector<unsigned>{128, 256} : args.bits;
    SeededRng rng(resolve_seed(args.seed));
    bench::BenchReport report = bench::run_suite(args.suite, bits, args.trials, rng);
    std::string csv = report.to_csv();
    if (args.out.empty())
        std::cout << csv;
    else
        write_file(args.out, csv);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"verifiable homomorphic linear-combination time-lock puzzles"};
    app.require_subcommand(1);

    SetupArgs setup_args;
    auto* setup = app.add_subcommand("setup", "generate field and x-coordinate parameters");
    setup->add_option("--field-bits", setup_args.field_bits, "prime size in bits");
    setup->add_option("--leaders", setup_args.leaders, "number of leader clients");
    setup->add_option("--threshold", setup_args.threshold, "honest-leader threshold");
    setup->add_option("--universe-bits", setup_args.universe_bits, "plaintext universe size in bits");
    setup->add_option("--seed", setup_args.seed, "deterministic seed");
    setup->add_option("--out", setup_args.out, "output params file")->required();

    KeygenArgs keygen_args;
    auto* keygen_cmd = app.add_subcommand("keygen", "generate an RSA modulus and trapdoor");
    keygen_cmd->add_option("--factor-bits", keygen_args.factor_bits, "bits per prime factor");
    keygen_cmd->add_option("--seed", keygen_args.seed, "deterministic seed");
    keygen_cmd->add_option("--out", keygen_args.out, "output keys file")->required();

    GenPuzzleArgs gen_args;
    auto* gen = app.add_subcommand("genpuzzle", "time-lock a message");
    gen->add_option("--params", gen_args.params_path, "server params file")->required();
    gen->add_option("--keys", gen_args.keys_path, "client keys file")->required();
    gen->add_option("--message", gen_args.message, "plaintext message (decimal)")->required();
    gen->add_option("--delta", gen_args.delta, "seconds the message stays hidden");
    gen->add_option("--max-ss", gen_args.max_ss, "squarings per second");
    gen->add_option("--seed", gen_args.seed, "deterministic seed");
    gen->add_option("--out", gen_args.out, "output puzzle file")->required();
    gen->add_option("--secrets-out", gen_args.secrets_out, "optional client secrets file");

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "solve a puzzle by repeated squaring");
    solve->add_option("--puzzle", solve_args.puzzle_path, "puzzle file")->required();
    solve->add_option("--out", solve_args.out, "output solution file")->required();
    solve->add_flag("--quiet", solve_args.quiet, "suppress progress output");

    VerifyArgs verify_args;
    auto* verify = app.add_subcommand("verify", "check a published solution against its commitment");
    verify->add_option("--puzzle", verify_args.puzzle_path, "puzzle file")->required();
    verify->add_option("--solution", verify_args.solution_path, "solution file")->required();

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run the multi-party protocol deterministically");
    simulate->add_option("--config", sim_args.config_path, "simulation config file")->required();
    simulate->add_option("--seed", sim_args.seed, "deterministic seed");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "measure factorization or PRF runtime");
    bench_cmd->add_option("--suite", bench_args.suite, "factorization or prf")
        ->check(CLI::IsMember({"factorization", "prf"}));
    bench_cmd->add_option("--bits", bench_args.bits, "field size(s) in bits")
        ->check(CLI::IsMember({128, 256}));
    bench_cmd->add_option("--trials", bench_args.trials, "trials per grid point");
    bench_cmd->add_option("--seed", bench_args.seed, "deterministic seed");
    bench_cmd->add_option("--out", bench_args.out, "output CSV file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (setup->parsed()) return cmd_setup(setup_args);
        if (keygen_cmd->parsed()) return cmd_keygen(keygen_args);
        if (gen->parsed()) return cmd_genpuzzle(gen_args);
        if (solve->parsed()) return cmd_solve(solve_args);
        if (verify->parsed()) return cmd_verify(verify_args);
        if (simulate->parsed()) return cmd_simulate(sim_args);
        if (bench_cmd->parsed()) return cmd_bench(bench_args);
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: malformed JSON: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
