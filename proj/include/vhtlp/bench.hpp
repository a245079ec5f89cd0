#pragma once
// Measurement harness for the two concrete-cost drivers: root extraction
// over F_p at degrees 2..10 and batched PRF invocation at 2..1024 calls,
// each at 128- and 256-bit fields. When several field sizes are measured
// together their trials are interleaved, so clock-frequency drift over the
// run hits every size equally and cross-size ratios stay meaningful.

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>

#include "vhtlp/crypto.hpp"
#include "vhtlp/poly.hpp"

namespace vhtlp::bench {

struct BenchRow {
    std::string operation;
    std::uint64_t parameter = 0;  // polynomial degree or call count
    unsigned field_bits = 0;
    double mean_ms = 0;
    double stddev_ms = 0;
    unsigned trials = 0;
};

struct BenchReport {
    std::vector<BenchRow> rows;

    std::string to_csv() const {
        std::ostringstream out;
        out << "operation,parameter,field_bits,mean_ms,stddev_ms,trials\n";
        for (const auto& r : rows) {
            out << r.operation << ',' << r.parameter << ',' << r.field_bits << ',';
            out.setf(std::ios::fixed);
            out.precision(6);
            out << r.mean_ms << ',' << r.stddev_ms << ',' << r.trials << '\n';
            out.unsetf(std::ios::fixed);
        }
        return out.str();
    }
};

inline const std::vector<std::uint64_t>& factorization_degrees() {
    static const std::vector<std::uint64_t> degrees{2, 4, 6, 8, 10};
    return degrees;
}

inline const std::vector<std::uint64_t>& prf_counts() {
    static const std::vector<std::uint64_t> counts{2, 4, 16, 64, 256, 1024};
    return counts;
}

namespace detail {

struct Stats {
    double mean_ms = 0;
    double stddev_ms = 0;
};

inline Stats summarize(const std::vector<double>& samples) {
    Stats s;
    for (double v : samples) s.mean_ms += v;
    s.mean_ms /= samples.size();
    double var = 0;
    for (double v : samples) var += (v - s.mean_ms) * (v - s.mean_ms);
    s.stddev_ms = std::sqrt(var / samples.size());
    return s;
}

template <typename F>
double time_once(F&& body) {
    auto start = std::chrono::steady_clock::now();
    body();
    auto stop = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(stop - start).count();
}

}  // namespace detail

// Fully split polynomials of the given degree: the protocol's theta always
// factors into linear terms over F_p, so that is the shape measured.
inline BenchReport bench_factorization(const std::vector<unsigned>& bits_list, unsigned trials,
                                       SeededRng& rng) {
    struct PerSize {
        unsigned bits;
        FieldPtr field;
        std::vector<std::vector<DensePoly>> inputs;   // [degree index][trial]
        std::vector<std::vector<SeededRng>> splitters;
        std::vector<std::vector<double>> samples;
    };
    std::vector<PerSize> sizes;
    for (unsigned bits : bits_list) {
        PerSize ps{bits, random_field(rng, bits), {}, {}, {}};
        for (std::uint64_t degree : factorization_degrees()) {
            std::vector<DensePoly> inputs;
            std::vector<SeededRng> splitters;
            for (unsigned t = 0; t < trials; ++t) {
                std::vector<FieldElement> roots;
                std::set<mpz_class> seen;
                while (roots.size() < degree) {
                    FieldElement r = random_nonzero(rng, ps.field);
                    if (seen.insert(r.value()).second) roots.push_back(r);
                }
                inputs.push_back(DensePoly::from_roots(roots, ps.field));
                splitters.push_back(rng.fork("split", t * 1000 + degree));
            }
            ps.inputs.push_back(std::move(inputs));
            ps.splitters.push_back(std::move(splitters));
            ps.samples.emplace_back();
        }
        sizes.push_back(std::move(ps));
    }

    std::size_t found = 0;
    for (std::size_t d = 0; d < factorization_degrees().size(); ++d) {
        for (unsigned t = 0; t < trials; ++t) {
            for (auto& ps : sizes) {
                ps.samples[d].push_back(detail::time_once(
                    [&] { found += find_roots(ps.inputs[d][t], ps.splitters[d][t]).size(); }));
            }
        }
    }

    std::size_t expected = 0;
    for (std::uint64_t degree : factorization_degrees()) expected += degree * trials * sizes.size();
    if (found != expected) throw Error("bench_factorization: root extraction lost roots");

    BenchReport report;
    for (const auto& ps : sizes)
        for (std::size_t d = 0; d < factorization_degrees().size(); ++d) {
            detail::Stats stats = detail::summarize(ps.samples[d]);
            report.rows.push_back(BenchRow{"factorization", factorization_degrees()[d], ps.bits,
                                           stats.mean_ms, stats.stddev_ms, trials});
        }
    return report;
}

inline BenchReport bench_prf(const std::vector<unsigned>& bits_list, unsigned trials, SeededRng& rng) {
    struct PerSize {
        unsigned bits;
        FieldPtr field;
        PrfKey key;
        std::vector<std::vector<double>> samples;
    };
    std::vector<PerSize> sizes;
    for (unsigned bits : bits_list) {
        sizes.push_back(PerSize{bits, random_field(rng, bits), PrfKey::random(rng),
                                std::vector<std::vector<double>>(prf_counts().size())});
    }

    mpz_class sink = 0;
    for (std::size_t c = 0; c < prf_counts().size(); ++c) {
        std::uint64_t count = prf_counts()[c];
        // small batches repeat within one timed section so a single scheduler
        // stall cannot dominate a sample
        std::uint64_t reps = std::max<std::uint64_t>(1, 128 / count);
        for (unsigned t = 0; t < trials; ++t) {
            for (auto& ps : sizes) {
                double ms = detail::time_once([&] {
                    for (std::uint64_t rep = 0; rep < reps; ++rep)
                        for (std::uint64_t i = 1; i <= count; ++i)
                            sink += prf_index(i + (t * reps + rep) * count, ps.key, ps.field).value();
                });
                ps.samples[c].push_back(ms / reps);
            }
        }
    }
    if (sink < 0) throw Error("unreachable");  // keeps the accumulator live

    BenchReport report;
    for (const auto& ps : sizes)
        for (std::size_t c = 0; c < prf_counts().size(); ++c) {
            detail::Stats stats = detail::summarize(ps.samples[c]);
            report.rows.push_back(
                BenchRow{"prf", prf_counts()[c], ps.bits, stats.mean_ms, stats.stddev_ms, trials});
        }
    return report;
}

inline BenchReport run_suite(const std::string& suite, const std::vector<unsigned>& bits_list,
                             unsigned trials, SeededRng& rng) {
    if (suite == "factorization") return bench_factorization(bits_list, trials, rng);
    if (suite == "prf") return bench_prf(bits_list, trials, rng);
    throw Error("unknown bench suite: " + suite);
}

}  // namespace vhtlp::bench
