// End-to-end walkthrough: three clients time-lock messages, grant the
// server a weighted-sum evaluation, the server solves and proves the
// result, and a verifier checks everything from public data.

#include <iostream>

#include "vhtlp/tf.hpp"

using namespace vhtlp;

int main() {
    SeededRng rng(2718);

    // server publishes the field and x-coordinates once
    tf::ServerParams sp = tf::s_setup(rng, 128, /*leaders=*/1, /*threshold=*/1);
    std::cout << "field: " << sp.field->bits << "-bit prime, " << sp.tbar() << " x-coordinates\n";

    // each client locks a message; T counts squarings, kept tiny here
    std::vector<mpz_class> messages{1200, 3400, 5600};
    std::vector<mpz_class> weights{2, 3, 5};
    std::vector<tf::EvalClientState> clients;
    std::vector<tf::GenPuzzleResult> gens;
    for (unsigned u = 0; u < 3; ++u) {
        ClientKeys keys = keygen(rng, 128);
        auto gen = tf::gen_puzzle(messages[u], keys, sp, TimelockParams{4096, 4096, 1}, rng);
        clients.push_back(tf::EvalClientState{keys, gen.puzzle, gen.secrets, weights[u]});
        gens.push_back(std::move(gen));
    }

    // clients grant the computation; the server combines the re-encoded
    // coordinates into a single puzzle opening after 1024 squarings
    auto outcome = tf::run_evaluation(sp, clients, /*Y=*/1024, rng);

    // the server squares its way to the temporary keys and extracts the sum
    auto sum = tf::solve_combination(outcome.g, outcome.epp, sp, rng);
    std::cout << "server learned sum = " << sum.res.value() << "\n";

    bool ok = tf::verify_combination(sum.res, sum.proof, outcome.g, outcome.epp, sp);
    std::cout << "verifier accepts the sum: " << (ok ? "yes" : "no") << "\n";

    // later, each original puzzle opens on its own
    for (unsigned u = 0; u < 3; ++u) {
        auto sol = tf::solve_single(gens[u].puzzle, gens[u].pp, sp);
        bool valid = tf::verify_client_puzzle(sol.m, sol.proof, gens[u].pp);
        std::cout << "client " << u + 1 << ": m = " << sol.m.value()
                  << (valid ? " (proof accepted)" : " (proof rejected)") << "\n";
    }
    return ok ? 0 : 1;
}
