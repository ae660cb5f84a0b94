#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "canhmm/hmm.hpp"
#include "canhmm/rand.hpp"
#include "support/oracles.hpp"

using namespace canhmm;
using namespace canhmm::testing;

namespace {

HmmModel uniform_model(int n, int m) {
    HmmModel model;
    model.num_states = n;
    model.num_symbols = m;
    model.initial.assign(n, 1.0 / n);
    model.trans.assign(n, std::vector<double>(n, 1.0 / n));
    model.emis.assign(n, std::vector<double>(m, 1.0 / m));
    return model;
}

// The two-state model used across several cases: started in state 0,
// sticky transitions, emissions biased 0-heavy vs 1-heavy.
HmmModel two_state_model() {
    HmmModel model;
    model.num_states = 2;
    model.num_symbols = 2;
    model.initial = {1.0, 0.0};
    model.trans = {{0.9, 0.1}, {0.2, 0.8}};
    model.emis = {{0.9, 0.1}, {0.3, 0.7}};
    return model;
}

}  // namespace

TEST_CASE("validate_model flags broken invariants") {
    auto model = uniform_model(2, 2);
    CHECK(validate_model(model).empty());

    SUBCASE("row sum off") {
        model.trans[1] = {0.5, 0.4};
        const auto violations = validate_model(model);
        REQUIRE(!violations.empty());
        bool names_row = false;
        for (const auto& v : violations) {
            if (v.find("row 1") != std::string::npos) names_row = true;
        }
        CHECK(names_row);
    }
    SUBCASE("negative emission entry") {
        model.emis[0] = {1.1, -0.1};
        CHECK(!validate_model(model).empty());
    }
    SUBCASE("single symbol alphabet rejected") {
        model.num_symbols = 1;
        model.emis = {{1.0}, {1.0}};
        CHECK(!validate_model(model).empty());
    }
}

TEST_CASE("decode: uniform model gives symmetric scores") {
    const auto model = uniform_model(2, 2);
    const std::vector<int> symbols = {0, 1, 1, 0};
    const auto result = hmm_decode(model, symbols);
    CHECK(result.log_likelihood == doctest::Approx(4.0 * std::log(0.5)).epsilon(1e-12));
    for (const auto c : result.scaling) CHECK(c == doctest::Approx(0.5).epsilon(1e-12));
    for (const auto& row : result.posteriors) {
        CHECK(row[0] == doctest::Approx(0.5).epsilon(1e-12));
        CHECK(row[1] == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("decode: two-state example matches the path-sum oracle") {
    const auto model = two_state_model();
    const std::vector<int> symbols = {0, 1};
    // Hand sum over the two reachable paths: 0.9*0.9*0.1 + 0.9*0.1*0.7 = 0.144.
    const double expected = brute_force_likelihood(model, symbols);
    CHECK(expected == doctest::Approx(0.144).epsilon(1e-12));
    const auto result = hmm_decode(model, symbols);
    CHECK(std::exp(result.log_likelihood) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(result.scaling.size() == 2);
    CHECK(result.scaling[0] * result.scaling[1] ==
          doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("decode: length-1 sequence is the recursion base case") {
    const auto model = two_state_model();
    const std::vector<int> symbols = {1};
    const auto result = hmm_decode(model, symbols);
    const double lik = 1.0 * 0.1 + 0.0 * 0.7;
    CHECK(std::exp(result.log_likelihood) == doctest::Approx(lik).epsilon(1e-12));
    CHECK(result.posteriors[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(result.posteriors[0][1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("decode: likelihood equals path enumeration on random small instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 1 + static_cast<int>(uniform_int(rng, 0, 2));
        const int m = 2 + static_cast<int>(uniform_int(rng, 0, 1));
        const auto t_len = static_cast<std::size_t>(uniform_int(rng, 1, 8));
        const auto model = random_model(rng, n, m);
        const auto symbols = random_symbols(rng, t_len, m);
        const double expected = brute_force_likelihood(model, symbols);
        const auto result = hmm_decode(model, symbols);
        CHECK(std::exp(result.log_likelihood) == doctest::Approx(expected).epsilon(1e-9));
        // Scaling factors multiply back to the likelihood.
        double prod = 1.0;
        for (const auto c : result.scaling) prod *= c;
        CHECK(prod == doctest::Approx(expected).epsilon(1e-9));
        // Posterior rows are distributions.
        for (const auto& row : result.posteriors) {
            CHECK(std::accumulate(row.begin(), row.end(), 0.0) ==
                  doctest::Approx(1.0).epsilon(1e-9));
        }
    }
}

TEST_CASE("decode: impossible sequence reported, not crashed") {
    HmmModel model;
    model.num_states = 1;
    model.num_symbols = 2;
    model.initial = {1.0};
    model.trans = {{1.0}};
    model.emis = {{1.0, 0.0}};
    const std::vector<int> symbols = {0, 1, 0};
    const auto result = hmm_decode(model, symbols);
    CHECK(result.impossible());
    CHECK(result.log_likelihood == -std::numeric_limits<double>::infinity());
    CHECK(result.scaling[1] == 0.0);
    CHECK(result.scaling[2] == 0.0);
}

TEST_CASE("decode: rejects out-of-range symbols") {
    const auto model = uniform_model(2, 3);
    const std::vector<int> symbols = {0, 3};
    CHECK_THROWS_AS(hmm_decode(model, symbols), Error);
}

TEST_CASE("decode: stable for long sequences") {
    const auto model = two_state_model();
    std::mt19937_64 rng(7);
    const auto gen = hmm_generate(model, 100000, 7);
    const auto result = hmm_decode(model, gen.symbols);
    CHECK(std::isfinite(result.log_likelihood));
    for (std::size_t t = 0; t < result.posteriors.size(); t += 997) {
        const auto& row = result.posteriors[t];
        CHECK(std::accumulate(row.begin(), row.end(), 0.0) ==
              doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("generate: deterministic emission forces the symbol sequence") {
    HmmModel model;
    model.num_states = 1;
    model.num_symbols = 2;
    model.initial = {1.0};
    model.trans = {{1.0}};
    model.emis = {{1.0, 0.0}};
    const auto gen = hmm_generate(model, 5, 42);
    CHECK(gen.symbols == std::vector<int>{0, 0, 0, 0, 0});
}

TEST_CASE("generate: absorbing start state pins the path") {
    HmmModel model = uniform_model(2, 2);
    model.initial = {1.0, 0.0};
    model.trans = {{1.0, 0.0}, {0.0, 1.0}};
    const auto gen = hmm_generate(model, 64, 3);
    for (const auto s : gen.states) CHECK(s == 0);
}

TEST_CASE("generate: uniform model symbol frequencies obey the law of large numbers") {
    const auto model = uniform_model(2, 2);
    const auto gen = hmm_generate(model, 100000, 11);
    double ones = 0;
    for (const auto s : gen.symbols) ones += s;
    CHECK(ones / 100000.0 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(std::abs(ones / 100000.0 - 0.5) < 0.01);
}

TEST_CASE("generate: same seed reproduces, different seed varies") {
    const auto model = two_state_model();
    const auto a = hmm_generate(model, 200, 5);
    const auto b = hmm_generate(model, 200, 5);
    const auto c = hmm_generate(model, 200, 6);
    CHECK(a.symbols == b.symbols);
    CHECK(a.states == b.states);
    CHECK(a.symbols != c.symbols);
}

TEST_CASE("generate: rejects invalid models") {
    auto model = uniform_model(2, 2);
    model.trans[0] = {0.5, 0.4};
    CHECK_THROWS_AS(hmm_generate(model, 10, 1), ValidationError);
}

TEST_CASE("estimate: counts transitions and emissions") {
    const std::vector<int> states = {0, 0, 1, 1};
    const std::vector<int> symbols = {0, 1, 0, 1};
    const auto model = hmm_estimate(states, symbols, 2, 2);
    CHECK(model.trans[0][0] == doctest::Approx(0.5));
    CHECK(model.trans[0][1] == doctest::Approx(0.5));
    CHECK(model.trans[1][0] == doctest::Approx(0.0));
    CHECK(model.trans[1][1] == doctest::Approx(1.0));
    for (int i = 0; i < 2; ++i) {
        CHECK(model.emis[i][0] == doctest::Approx(0.5));
        CHECK(model.emis[i][1] == doctest::Approx(0.5));
    }
}

TEST_CASE("estimate: single state collapses to frequency counting") {
    const std::vector<int> states = {0, 0, 0, 0};
    const std::vector<int> symbols = {0, 1, 1, 1};
    const auto model = hmm_estimate(states, symbols, 1, 2);
    CHECK(model.trans == std::vector<std::vector<double>>{{1.0}});
    CHECK(model.emis[0][0] == doctest::Approx(0.25));
    CHECK(model.emis[0][1] == doctest::Approx(0.75));
}

TEST_CASE("estimate: pseudocount smooths unvisited states to uniform") {
    const std::vector<int> states = {0, 0, 0};
    const std::vector<int> symbols = {0, 1, 0};
    const auto model = hmm_estimate(states, symbols, 2, 2, 1.0);
    CHECK(model.trans[1][0] == doctest::Approx(0.5));
    CHECK(model.trans[1][1] == doctest::Approx(0.5));
    CHECK(model.emis[1][0] == doctest::Approx(0.5));
    CHECK(model.emis[1][1] == doctest::Approx(0.5));
}

TEST_CASE("estimate: rejects mismatched lengths") {
    const std::vector<int> states = {0, 0};
    const std::vector<int> symbols = {0};
    CHECK_THROWS_AS(hmm_estimate(states, symbols, 1, 2), Error);
}

TEST_CASE("estimate: converges to the source model with known states") {
    const auto model = two_state_model();
    const auto gen = hmm_generate(model, 100000, 13);
    const auto fitted = hmm_estimate(gen.states, gen.symbols, 2, 2);
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(fitted.trans[i][j] - model.trans[i][j]) < 0.02);
            CHECK(std::abs(fitted.emis[i][j] - model.emis[i][j]) < 0.02);
        }
    }
}

TEST_CASE("viterbi: injective deterministic emissions force the path") {
    HmmModel model = uniform_model(3, 3);
    model.emis = {{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}};
    const std::vector<int> symbols = {2, 0, 1, 1, 2};
    CHECK(hmm_viterbi(model, symbols) == symbols);
}

TEST_CASE("viterbi: uniform model resolves ties to state 0") {
    const auto model = uniform_model(3, 2);
    const std::vector<int> symbols = {0, 1, 0, 1, 1};
    const auto path = hmm_viterbi(model, symbols);
    for (const auto s : path) CHECK(s == 0);
}

TEST_CASE("viterbi: matches exhaustive argmax on random instances") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 60; ++trial) {
        const auto model = random_model(rng, 3, 3);
        const auto t_len = static_cast<std::size_t>(uniform_int(rng, 1, 6));
        const auto symbols = random_symbols(rng, t_len, 3);
        const auto dp_path = hmm_viterbi(model, symbols);
        const auto oracle_path = brute_force_viterbi(model, symbols);
        // Distinct paths over the same factor multiset tie bit-for-bit and
        // either is a valid argmax; a unique maximizer must match exactly.
        if (dp_path != oracle_path) {
            CHECK(path_log_prob(model, dp_path, symbols) ==
                  path_log_prob(model, oracle_path, symbols));
        } else {
            CHECK(dp_path == oracle_path);
        }
    }
}

TEST_CASE("viterbi: beats 1000 random alternative paths") {
    std::mt19937_64 rng(123);
    const auto model = random_model(rng, 4, 5);
    const auto symbols = random_symbols(rng, 40, 5);
    const auto path = hmm_viterbi(model, symbols);
    const double best = path_log_prob(model, path, symbols);
    for (int alt = 0; alt < 1000; ++alt) {
        const auto candidate = random_symbols(rng, symbols.size(), 4);
        CHECK(best >= path_log_prob(model, candidate, symbols));
    }
}

TEST_CASE("viterbi: impossible sequence raises a distinct error") {
    HmmModel model;
    model.num_states = 1;
    model.num_symbols = 2;
    model.initial = {1.0};
    model.trans = {{1.0}};
    model.emis = {{1.0, 0.0}};
    const std::vector<int> symbols = {1};
    CHECK_THROWS_AS(hmm_viterbi(model, symbols), ImpossibleSequenceError);
}

TEST_CASE("train: one iteration with a single state is frequency counting") {
    const std::vector<std::vector<int>> sequences = {{0, 1, 0, 1}};
    TrainOptions options;
    options.num_states = 1;
    options.max_iters = 1;
    options.restarts = 1;
    options.seed = 1;
    const auto result = hmm_train(sequences, 2, options);
    CHECK(result.model.emis[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.model.emis[0][1] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(result.model.trans[0][0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("train: log-likelihood trace is non-decreasing on every restart") {
    const auto source = two_state_model();
    const auto gen = hmm_generate(source, 2000, 17);
    const std::vector<std::vector<int>> sequences = {gen.symbols};
    TrainOptions options;
    options.num_states = 2;
    options.restarts = 4;
    options.seed = 31;
    const auto result = hmm_train(sequences, 2, options);
    REQUIRE(result.all_traces.size() == 4);
    for (const auto& trace : result.all_traces) {
        REQUIRE(trace.size() >= 2);
        for (std::size_t k = 1; k < trace.size(); ++k) {
            CHECK(trace[k] - trace[k - 1] >= -1e-10);
        }
    }
    CHECK(result.loglik_trace == result.all_traces[result.restart_index]);
}

TEST_CASE("train: recovers a 2-state model up to permutation") {
    HmmModel source;
    source.num_states = 2;
    source.num_symbols = 3;
    source.initial = {0.6, 0.4};
    source.trans = {{0.85, 0.15}, {0.25, 0.75}};
    source.emis = {{0.8, 0.15, 0.05}, {0.1, 0.3, 0.6}};
    const auto gen = hmm_generate(source, 10000, 2027);
    const std::vector<std::vector<int>> sequences = {gen.symbols};
    TrainOptions options;
    options.num_states = 2;
    options.restarts = 5;
    options.seed = 5;
    const auto result = hmm_train(sequences, 3, options);

    auto max_abs_error = [&](const std::vector<int>& perm) {
        double err = 0.0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) {
                err = std::max(err,
                               std::abs(result.model.trans[perm[i]][perm[j]] - source.trans[i][j]));
            }
            for (int k = 0; k < 3; ++k) {
                err = std::max(err, std::abs(result.model.emis[perm[i]][k] - source.emis[i][k]));
            }
        }
        return err;
    };
    const double err = std::min(max_abs_error({0, 1}), max_abs_error({1, 0}));
    CHECK(err <= 0.05);
}

TEST_CASE("train: multiple sequences pool their statistics") {
    const auto source = two_state_model();
    std::vector<std::vector<int>> sequences;
    for (std::uint64_t s = 0; s < 8; ++s) {
        sequences.push_back(hmm_generate(source, 500, 100 + s).symbols);
    }
    TrainOptions options;
    options.num_states = 2;
    options.restarts = 3;
    options.seed = 77;
    const auto result = hmm_train(sequences, 2, options);
    CHECK(validate_model(result.model).empty());
    for (const auto& trace : result.all_traces) {
        for (std::size_t k = 1; k < trace.size(); ++k) {
            CHECK(trace[k] - trace[k - 1] >= -1e-10);
        }
    }
}

TEST_CASE("train: floors keep unseen symbols scorable") {
    // Training data never emits symbol 2 out of 3.
    const std::vector<std::vector<int>> sequences = {{0, 1, 0, 1, 0, 0, 1}};
    TrainOptions options;
    options.num_states = 2;
    options.restarts = 2;
    options.seed = 9;
    const auto result = hmm_train(sequences, 3, options);
    for (int i = 0; i < 2; ++i) {
        CHECK(result.model.emis[i][2] >= options.prob_floor * 0.999);
    }
    const std::vector<int> probe = {0, 2};
    const auto decoded = hmm_decode(result.model, probe);
    CHECK(std::isfinite(decoded.log_likelihood));
    CHECK(decoded.scaling[1] <= 1e-5);
}

TEST_CASE("train: a provided init seeds restart 0") {
    const auto source = two_state_model();
    const auto gen = hmm_generate(source, 3000, 21);
    const std::vector<std::vector<int>> sequences = {gen.symbols};

    TrainOptions options;
    options.num_states = 2;
    options.restarts = 1;
    options.seed = 1;
    options.init = source;  // start at the truth and refine on the sample
    const auto warm = hmm_train(sequences, 2, options);
    // No permutation search needed: the warm start pins the state labels.
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(warm.model.trans[i][j] - source.trans[i][j]) < 0.1);
            CHECK(std::abs(warm.model.emis[i][j] - source.emis[i][j]) < 0.1);
        }
    }
    const auto again = hmm_train(sequences, 2, options);
    CHECK(again.model.trans == warm.model.trans);
    CHECK(again.model.emis == warm.model.emis);

    TrainOptions bad = options;
    bad.init->num_symbols = 3;
    CHECK_THROWS_AS(hmm_train(sequences, 2, bad), Error);
}

TEST_CASE("train: input validation") {
    TrainOptions options;
    options.num_states = 0;
    const std::vector<std::vector<int>> sequences = {{0, 1}};
    CHECK_THROWS_AS(hmm_train(sequences, 2, options), Error);

    TrainOptions ok;
    const std::vector<std::vector<int>> bad_symbol = {{0, 5}};
    CHECK_THROWS_AS(hmm_train(bad_symbol, 2, ok), Error);
    const std::vector<std::vector<int>> too_short = {{0}};
    CHECK_THROWS_AS(hmm_train(too_short, 2, ok), Error);
}

TEST_CASE("decode never returns -inf on sequences the model generated") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 20; ++trial) {
        auto model = random_model(rng, 3, 4);
        // Zero out one emission to create a never-generated symbol per state.
        model.emis[0][1] = 0.0;
        double sum = 0.0;
        for (const auto v : model.emis[0]) sum += v;
        for (auto& v : model.emis[0]) v /= sum;
        const auto gen = hmm_generate(model, 500, 1000 + trial);
        const auto result = hmm_decode(model, gen.symbols);
        CHECK(std::isfinite(result.log_likelihood));
    }
}
