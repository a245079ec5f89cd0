// One client, five chained puzzles: the server must open them in order
// because each puzzle's squaring base derives from the previous master key.
// A weighted sum over the whole chain opens first.

#include <iostream>

#include "vhtlp/mitf.hpp"

using namespace vhtlp;

int main() {
    SeededRng rng(31415);

    mi::ChainParams cp = mi::mi_setup(rng, 128, {2048, 2048, 2048, 2048, 2048}, /*max_ss=*/1);
    ClientKeys keys = keygen(rng, 128);

    std::vector<mpz_class> messages{10, 20, 30, 40, 50};
    std::vector<mpz_class> weights{1, 1, 1, 1, 1};
    auto gen = mi::mi_gen_puzzles(messages, keys, cp, rng);

    // grant the sum with a shorter horizon than the first puzzle
    auto eval = mi::mi_evaluate(gen.puzzles, weights, /*Y=*/512, keys, gen.secrets, cp, rng);
    auto sum = mi::mi_solve_combination(eval.g, eval.epp, cp, rng);
    std::cout << "sum over the chain: " << sum.res.value() << " (verified: "
              << (mi::mi_verify_combination(sum.res, sum.proof, eval.g, eval.epp, cp) ? "yes" : "no")
              << ")\n";

    std::uint64_t squarings = 0;
    auto entries = mi::mi_solve_chain(gen.puzzles, gen.pp, cp, [&](unsigned, std::uint64_t) {
        ++squarings;
        return true;
    });
    for (unsigned j = 0; j < entries.size(); ++j)
        std::cout << "puzzle " << j + 1 << ": m = " << entries[j].m.value() << " (proof "
                  << (mi::mi_verify_single(entries[j].m, entries[j].mk, gen.pp, j + 1) ? "accepted"
                                                                                       : "rejected")
                  << ")\n";
    std::cout << "total squarings spent on the chain: " << squarings << "\n";
    return 0;
}
