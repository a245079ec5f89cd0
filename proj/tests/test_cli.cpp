#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <sys/wait.h>
#include <filesystem>
#include <fstream>

#include "vhtlp/serde.hpp"

using namespace vhtlp;
using serde::ojson;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::path("cli_scratch");

struct CliResult {
    int exit_code;
    std::string out;
};

CliResult run_cli(const std::string& args) {
    fs::create_directories(kScratch);
    fs::path out_file = kScratch / "stdout.txt";
    std::string cmd = std::string(VHTLP_CLI_PATH) + " " + args + " > " + out_file.string() + " 2> " +
                      (kScratch / "stderr.txt").string();
    int status = std::system(cmd.c_str());
    int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return CliResult{code, text};
}

std::string path(const std::string& name) { return (kScratch / name).string(); }

ojson load(const std::string& name) {
    std::ifstream in(path(name));
    REQUIRE(in.good());
    return ojson::parse(in);
}

void store(const std::string& name, const ojson& j) {
    std::ofstream out(path(name));
    out << j.dump(2) << "\n";
}

struct EnvGuard {
    EnvGuard() { setenv("TF_TEST_SMALL_FIELD", "1", 1); }
};
EnvGuard env_guard;

void make_chain_files() {
    REQUIRE(run_cli("setup --field-bits 80 --universe-bits 32 --leaders 1 --threshold 1 --seed 1 --out " +
                    path("params.json"))
                .exit_code == 0);
    REQUIRE(run_cli("keygen --factor-bits 64 --seed 2 --out " + path("keys.json")).exit_code == 0);
    REQUIRE(run_cli("genpuzzle --params " + path("params.json") + " --keys " + path("keys.json") +
                    " --message 123456 --delta 1 --max-ss 64 --seed 3 --out " + path("puzzle.json"))
                .exit_code == 0);
}

}  // namespace

TEST_CASE("genpuzzle -> solve -> verify chain exits 0") {
    make_chain_files();
    CHECK(run_cli("solve --quiet --puzzle " + path("puzzle.json") + " --out " + path("solution.json"))
              .exit_code == 0);
    ojson sol = load("solution.json");
    CHECK(sol.at("m").get<std::string>() == "123456");
    CliResult verify = run_cli("verify --puzzle " + path("puzzle.json") + " --solution " +
                               path("solution.json"));
    CHECK(verify.exit_code == 0);
    CHECK(verify.out.find("accept") != std::string::npos);
}

TEST_CASE("genpuzzle can emit the client's secret parameters") {
    make_chain_files();
    REQUIRE(run_cli("genpuzzle --params " + path("params.json") + " --keys " + path("keys.json") +
                    " --message 5 --delta 1 --max-ss 16 --seed 4 --out " + path("p_sec.json") +
                    " --secrets-out " + path("secrets.json"))
                .exit_code == 0);
    ojson secrets = load("secrets.json");
    CHECK(secrets.contains("k"));
    CHECK(secrets.contains("s"));
    // the stored master key opens the puzzle without any squaring
    ojson puzzle = load("p_sec.json");
    serde::PuzzleFile file = serde::puzzle_file_from_json(puzzle);
    mpz_class mk(secrets.at("mk").get<std::string>());
    auto sol = tf::solve_single_with_key(file.puzzle, mk, file.sp);
    CHECK(sol.m.value() == 5);
}

TEST_CASE("tampered puzzle file fails with exit 1") {
    make_chain_files();

    // flip a coordinate: the solver notices the broken degree structure
    ojson tampered = load("puzzle.json");
    std::string o0 = tampered["puzzle"]["o"][0].get<std::string>();
    tampered["puzzle"]["o"][0] = mpz_class(mpz_class(o0) + 1).get_str();
    store("tampered.json", tampered);
    CHECK(run_cli("solve --quiet --puzzle " + path("tampered.json") + " --out " + path("sol_t.json"))
              .exit_code == 1);

    // flip the commitment: solving succeeds but verification rejects
    REQUIRE(run_cli("solve --quiet --puzzle " + path("puzzle.json") + " --out " + path("solution.json"))
                .exit_code == 0);
    ojson bad_com = load("puzzle.json");
    std::string com = bad_com["pp"]["com"].get<std::string>();
    com[0] = com[0] == '0' ? '1' : '0';
    bad_com["pp"]["com"] = com;
    store("bad_com.json", bad_com);
    CliResult verify = run_cli("verify --puzzle " + path("bad_com.json") + " --solution " +
                               path("solution.json"));
    CHECK(verify.exit_code == 1);
    CHECK(verify.out.find("reject") != std::string::npos);
}

TEST_CASE("small fields are rejected without the test override") {
    fs::create_directories(kScratch);
    fs::path out_file = kScratch / "stdout.txt";
    std::string cmd = std::string("env TF_TEST_SMALL_FIELD=0 ") + VHTLP_CLI_PATH +
                      " setup --field-bits 80 --leaders 1 --threshold 1 --seed 1 --out " +
                      path("small.json") + " > " + out_file.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    CHECK(WEXITSTATUS(status) == 2);
}

TEST_CASE("malformed input exits 2") {
    fs::create_directories(kScratch);
    std::ofstream(path("garbage.json")) << "{not json";
    CHECK(run_cli("solve --quiet --puzzle " + path("garbage.json") + " --out " + path("x.json"))
              .exit_code == 2);
    std::ofstream(path("empty.json")) << "{}";
    CHECK(run_cli("verify --puzzle " + path("empty.json") + " --solution " + path("empty.json"))
              .exit_code == 2);
    CHECK(run_cli("solve --quiet --puzzle " + path("no_such.json") + " --out " + path("x.json"))
              .exit_code == 2);
}

TEST_CASE("seeded commands are deterministic") {
    make_chain_files();
    REQUIRE(run_cli("genpuzzle --params " + path("params.json") + " --keys " + path("keys.json") +
                    " --message 42 --delta 1 --max-ss 32 --seed 9 --out " + path("p1.json"))
                .exit_code == 0);
    REQUIRE(run_cli("genpuzzle --params " + path("params.json") + " --keys " + path("keys.json") +
                    " --message 42 --delta 1 --max-ss 32 --seed 9 --out " + path("p2.json"))
                .exit_code == 0);
    CHECK(load("p1.json") == load("p2.json"));
}

TEST_CASE("simulate emits byte-identical reports for equal seeds") {
    serde::SimConfig config;
    config.n = 2;
    config.leaders = 1;
    config.threshold = 1;
    config.field_bits = 80;
    config.min_field_bits = 64;
    config.universe_bits = 32;
    config.rsa_factor_bits = 48;
    config.max_ss = 1;
    config.client_deltas = {48, 48};
    config.eval_delta = 16;
    config.messages = {1111, 2222};
    config.coeffs = {3, 4};
    fs::create_directories(kScratch);
    store("sim.json", serde::sim_config_to_json(config));

    CliResult a = run_cli("simulate --config " + path("sim.json") + " --seed 31337");
    CliResult b = run_cli("simulate --config " + path("sim.json") + " --seed 31337");
    REQUIRE(a.exit_code == 0);
    CHECK(a.out == b.out);

    ojson report = ojson::parse(a.out);
    CHECK(report.at("status") == "completed");
    CHECK(report.at("combination").at("verify") == 1);
    CHECK(report.at("combination").at("res") == "12221");  // 3*1111 + 4*2222

    CliResult c = run_cli("simulate --config " + path("sim.json") + " --seed 31338");
    CHECK(ojson::parse(c.out).at("rhat") != report.at("rhat"));
}

TEST_CASE("bench covers the full grid and writes csv") {
    fs::create_directories(kScratch);
    CliResult res = run_cli("bench --suite prf --bits 128 --trials 100 --seed 1 --out " +
                            path("bench.csv"));
    REQUIRE(res.exit_code == 0);
    std::ifstream in(path("bench.csv"));
    std::string header;
    std::getline(in, header);
    CHECK(header == "operation,parameter,field_bits,mean_ms,stddev_ms,trials");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    REQUIRE(lines.size() == 6);  // counts 2, 4, 16, 64, 256, 1024
    CHECK(lines[0].rfind("prf,2,128,", 0) == 0);
    CHECK(lines[5].rfind("prf,1024,128,", 0) == 0);

    CHECK(run_cli("bench --suite prf --trials 10 --out " + path("x.csv")).exit_code == 2);
    CHECK(run_cli("bench --suite nope --trials 100 --out " + path("x.csv")).exit_code != 0);
}
