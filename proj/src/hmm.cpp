#include "canhmm/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "canhmm/rand.hpp"

namespace canhmm {

namespace {

constexpr double kRowSumTol = 1e-12;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_distribution(std::span<const double> row, const std::string& what,
                        std::vector<std::string>& out) {
    double sum = 0.0;
    for (const auto v : row) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            out.push_back(what + " has a negative or non-finite entry");
            return;
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kRowSumTol) {
        out.push_back(what + " sums to " + std::to_string(sum) + ", not 1");
    }
}

void check_symbols(std::span<const int> symbols, int num_symbols) {
    for (const auto s : symbols) {
        if (s < 0 || s >= num_symbols) {
            throw Error("symbol " + std::to_string(s) + " outside alphabet of size " +
                        std::to_string(num_symbols));
        }
    }
}

// Maximizes sum_k weights[k] * log p[k] over the simplex with every
// coordinate >= floor. Active-set water-filling: clamp coordinates whose
// proportional share falls under the floor, rescale the rest, repeat.
// All-zero weights give the uniform distribution.
std::vector<double> floored_distribution(std::span<const double> weights, double floor) {
    const auto m = weights.size();
    std::vector<double> p(m);
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total <= 0.0) {
        std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(m));
        return p;
    }
    if (floor <= 0.0) {
        for (std::size_t k = 0; k < m; ++k) p[k] = weights[k] / total;
        return p;
    }
    if (floor * static_cast<double>(m) >= 1.0) {
        throw Error("probability floor too large for distribution of size " + std::to_string(m));
    }

    std::vector<bool> clamped(m, false);
    while (true) {
        double free_weight = 0.0;
        std::size_t clamped_count = 0;
        for (std::size_t k = 0; k < m; ++k) {
            if (clamped[k]) {
                ++clamped_count;
            } else {
                free_weight += weights[k];
            }
        }
        const double free_mass = 1.0 - floor * static_cast<double>(clamped_count);
        bool changed = false;
        if (free_weight <= 0.0) {
            // Remaining coordinates all have zero weight: spread the free
            // mass evenly (any feasible choice maximizes).
            const double share = free_mass / static_cast<double>(m - clamped_count);
            for (std::size_t k = 0; k < m; ++k) {
                p[k] = clamped[k] ? floor : share;
            }
            return p;
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (clamped[k]) {
                p[k] = floor;
                continue;
            }
            p[k] = weights[k] / free_weight * free_mass;
            if (p[k] < floor) {
                clamped[k] = true;
                changed = true;
            }
        }
        if (!changed) return p;
    }
}

// Forward pass with per-step normalization. Returns false when some step
// has zero total probability; alpha rows and scaling from that step on are
// zeroed.
bool forward_scaled(const HmmModel& model, std::span<const int> symbols,
                    std::vector<std::vector<double>>& alpha, std::vector<double>& scaling) {
    const int n = model.num_states;
    const auto t_len = symbols.size();
    alpha.assign(t_len, std::vector<double>(n, 0.0));
    scaling.assign(t_len, 0.0);

    double c = 0.0;
    for (int i = 0; i < n; ++i) {
        alpha[0][i] = model.initial[i] * model.emis[i][symbols[0]];
        c += alpha[0][i];
    }
    scaling[0] = c;
    if (c <= 0.0) return false;
    for (int i = 0; i < n; ++i) alpha[0][i] /= c;

    for (std::size_t t = 1; t < t_len; ++t) {
        c = 0.0;
        for (int j = 0; j < n; ++j) {
            double a = 0.0;
            for (int i = 0; i < n; ++i) a += alpha[t - 1][i] * model.trans[i][j];
            a *= model.emis[j][symbols[t]];
            alpha[t][j] = a;
            c += a;
        }
        scaling[t] = c;
        if (c <= 0.0) {
            for (std::size_t r = t; r < t_len; ++r) {
                std::fill(alpha[r].begin(), alpha[r].end(), 0.0);
                scaling[r] = 0.0;
            }
            return false;
        }
        for (int j = 0; j < n; ++j) alpha[t][j] /= c;
    }
    return true;
}

}  // namespace

bool DecodeResult::impossible() const { return !std::isfinite(log_likelihood); }

std::vector<std::string> validate_model(const HmmModel& model) {
    std::vector<std::string> out;
    const int n = model.num_states;
    const int m = model.num_symbols;
    if (n < 1) out.push_back("state count must be >= 1");
    if (m < 2) out.push_back("symbol count must be >= 2");
    if (static_cast<int>(model.initial.size()) != n) out.push_back("initial distribution length != N");
    if (static_cast<int>(model.trans.size()) != n) out.push_back("transition matrix has wrong row count");
    if (static_cast<int>(model.emis.size()) != n) out.push_back("emission matrix has wrong row count");
    if (!out.empty()) return out;

    check_distribution(model.initial, "initial distribution", out);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(model.trans[i].size()) != n) {
            out.push_back("transition row " + std::to_string(i) + " has wrong length");
            continue;
        }
        check_distribution(model.trans[i], "transition row " + std::to_string(i), out);
    }
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(model.emis[i].size()) != m) {
            out.push_back("emission row " + std::to_string(i) + " has wrong length");
            continue;
        }
        check_distribution(model.emis[i], "emission row " + std::to_string(i), out);
    }
    if (model.alphabet && model.alphabet->symbol_count() != m) {
        out.push_back("alphabet symbol count does not match M");
    }
    return out;
}

void require_valid(const HmmModel& model) {
    const auto violations = validate_model(model);
    if (violations.empty()) return;
    std::string msg = "invalid model:";
    for (const auto& v : violations) msg += " " + v + ";";
    throw ValidationError(msg);
}

GeneratedSequence hmm_generate(const HmmModel& model, std::size_t length, std::uint64_t seed) {
    require_valid(model);
    if (length < 1) throw Error("hmm_generate: length must be >= 1");
    std::mt19937_64 rng(seed);
    GeneratedSequence out;
    out.states.reserve(length);
    out.symbols.reserve(length);

    int state = static_cast<int>(sample_categorical(model.initial, rng));
    for (std::size_t t = 0; t < length; ++t) {
        if (t > 0) state = static_cast<int>(sample_categorical(model.trans[state], rng));
        out.states.push_back(state);
        out.symbols.push_back(static_cast<int>(sample_categorical(model.emis[state], rng)));
    }
    return out;
}

HmmModel hmm_estimate(std::span<const int> states, std::span<const int> symbols, int num_states,
                      int num_symbols, double pseudocount) {
    if (states.size() != symbols.size()) throw Error("hmm_estimate: state/symbol length mismatch");
    if (states.size() < 2) throw Error("hmm_estimate: need at least two observations");
    if (num_states < 1 || num_symbols < 2) throw Error("hmm_estimate: bad N or M");
    for (const auto s : states) {
        if (s < 0 || s >= num_states) throw Error("hmm_estimate: state out of range");
    }
    check_symbols(symbols, num_symbols);
    if (pseudocount < 0.0) throw Error("hmm_estimate: pseudocount must be >= 0");

    std::vector<std::vector<double>> trans_count(num_states, std::vector<double>(num_states, pseudocount));
    std::vector<std::vector<double>> emis_count(num_states, std::vector<double>(num_symbols, pseudocount));
    std::vector<double> init_count(num_states, pseudocount);

    init_count[states[0]] += 1.0;
    for (std::size_t t = 0; t < states.size(); ++t) {
        emis_count[states[t]][symbols[t]] += 1.0;
        if (t + 1 < states.size()) trans_count[states[t]][states[t + 1]] += 1.0;
    }

    auto normalize = [](std::vector<double>& row) {
        const double sum = std::accumulate(row.begin(), row.end(), 0.0);
        if (sum <= 0.0) {
            std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(row.size()));
        } else {
            for (auto& v : row) v /= sum;
        }
    };

    HmmModel model;
    model.num_states = num_states;
    model.num_symbols = num_symbols;
    model.initial = std::move(init_count);
    normalize(model.initial);
    model.trans = std::move(trans_count);
    model.emis = std::move(emis_count);
    for (auto& row : model.trans) normalize(row);
    for (auto& row : model.emis) normalize(row);
    return model;
}

DecodeResult hmm_decode(const HmmModel& model, std::span<const int> symbols) {
    require_valid(model);
    if (symbols.empty()) throw Error("hmm_decode: empty sequence");
    check_symbols(symbols, model.num_symbols);

    const int n = model.num_states;
    const auto t_len = symbols.size();
    DecodeResult result;
    std::vector<std::vector<double>> alpha;
    const bool ok = forward_scaled(model, symbols, alpha, result.scaling);

    if (!ok) {
        result.log_likelihood = kNegInf;
        result.posteriors.assign(t_len, std::vector<double>(n, 0.0));
        return result;
    }

    double ll = 0.0;
    for (const auto c : result.scaling) ll += std::log(c);
    result.log_likelihood = ll;

    // Backward sweep folded directly into the posteriors.
    result.posteriors.assign(t_len, std::vector<double>(n, 0.0));
    std::vector<double> beta(n, 1.0), beta_prev(n, 0.0);
    for (int i = 0; i < n; ++i) result.posteriors[t_len - 1][i] = alpha[t_len - 1][i];
    for (std::size_t t = t_len - 1; t-- > 0;) {
        beta_prev.swap(beta);
        const int o_next = symbols[t + 1];
        const double c_next = result.scaling[t + 1];
        for (int i = 0; i < n; ++i) {
            double b = 0.0;
            for (int j = 0; j < n; ++j) {
                b += model.trans[i][j] * model.emis[j][o_next] * beta_prev[j];
            }
            beta[i] = b / c_next;
            result.posteriors[t][i] = alpha[t][i] * beta[i];
        }
    }
    return result;
}

std::vector<int> hmm_viterbi(const HmmModel& model, std::span<const int> symbols) {
    require_valid(model);
    if (symbols.empty()) throw Error("hmm_viterbi: empty sequence");
    check_symbols(symbols, model.num_symbols);

    const int n = model.num_states;
    const auto t_len = symbols.size();
    std::vector<std::vector<double>> log_a(n, std::vector<double>(n));
    std::vector<std::vector<double>> log_b(n, std::vector<double>(model.num_symbols));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) log_a[i][j] = std::log(model.trans[i][j]);
        for (int k = 0; k < model.num_symbols; ++k) log_b[i][k] = std::log(model.emis[i][k]);
    }

    std::vector<std::vector<double>> lattice(t_len, std::vector<double>(n, kNegInf));
    std::vector<std::vector<int>> back(t_len, std::vector<int>(n, 0));
    for (int i = 0; i < n; ++i) {
        double v = std::log(model.initial[i]);
        v += log_b[i][symbols[0]];
        lattice[0][i] = v;
    }
    for (std::size_t t = 1; t < t_len; ++t) {
        for (int j = 0; j < n; ++j) {
            double best = kNegInf;
            int arg = 0;
            for (int i = 0; i < n; ++i) {
                double cand = lattice[t - 1][i] + log_a[i][j];
                if (cand > best) {  // strict >: ascending scan keeps the lowest index
                    best = cand;
                    arg = i;
                }
            }
            double v = best;
            v += log_b[j][symbols[t]];
            lattice[t][j] = v;
            back[t][j] = arg;
        }
    }

    double best = kNegInf;
    int arg = 0;
    for (int i = 0; i < n; ++i) {
        if (lattice[t_len - 1][i] > best) {
            best = lattice[t_len - 1][i];
            arg = i;
        }
    }
    if (!std::isfinite(best)) {
        throw ImpossibleSequenceError("no state path can produce this sequence");
    }

    std::vector<int> path(t_len, 0);
    path[t_len - 1] = arg;
    for (std::size_t t = t_len - 1; t-- > 0;) path[t] = back[t + 1][path[t + 1]];
    return path;
}

namespace {

HmmModel random_init(std::mt19937_64& rng, int num_states, int num_symbols, double floor) {
    auto row = [&](int m) {
        std::vector<double> weights(m);
        for (auto& w : weights) w = 0.05 + uniform01(rng);
        return floored_distribution(weights, floor);
    };
    HmmModel model;
    model.num_states = num_states;
    model.num_symbols = num_symbols;
    model.initial = row(num_states);
    model.trans.reserve(num_states);
    model.emis.reserve(num_states);
    for (int i = 0; i < num_states; ++i) {
        model.trans.push_back(row(num_states));
        model.emis.push_back(row(num_symbols));
    }
    return model;
}

struct EmRun {
    HmmModel model;
    std::vector<double> trace;
    int iterations = 0;
};

EmRun run_em(HmmModel model, std::span<const std::vector<int>> sequences, int num_symbols,
             const TrainOptions& options) {
    const int n = options.num_states;
    EmRun run;

    std::vector<std::vector<double>> alpha;
    std::vector<double> scaling;
    std::vector<double> beta(n), beta_prev(n);

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        std::vector<std::vector<double>> trans_num(n, std::vector<double>(n, 0.0));
        std::vector<std::vector<double>> emis_num(n, std::vector<double>(num_symbols, 0.0));
        std::vector<double> init_num(n, 0.0);
        double loglik = 0.0;

        for (const auto& symbols : sequences) {
            const auto t_len = symbols.size();
            forward_scaled(model, symbols, alpha, scaling);
            for (const auto c : scaling) loglik += std::log(c);

            std::fill(beta.begin(), beta.end(), 1.0);
            for (int i = 0; i < n; ++i) {
                emis_num[i][symbols[t_len - 1]] += alpha[t_len - 1][i];
            }
            for (std::size_t t = t_len - 1; t-- > 0;) {
                beta_prev.swap(beta);
                const int o_next = symbols[t + 1];
                const double c_next = scaling[t + 1];
                for (int i = 0; i < n; ++i) {
                    double b = 0.0;
                    for (int j = 0; j < n; ++j) {
                        const double w = model.trans[i][j] * model.emis[j][o_next] * beta_prev[j];
                        trans_num[i][j] += alpha[t][i] * w / c_next;
                        b += w;
                    }
                    beta[i] = b / c_next;
                    const double gamma = alpha[t][i] * beta[i];
                    emis_num[i][symbols[t]] += gamma;
                    if (t == 0) init_num[i] += gamma;
                }
            }
        }

        // Converged: keep the parameters the likelihood was measured with.
        if (!run.trace.empty() && loglik - run.trace.back() < options.tol) {
            run.trace.push_back(loglik);
            run.model = std::move(model);
            return run;
        }
        run.trace.push_back(loglik);

        model.initial = floored_distribution(init_num, options.prob_floor);
        for (int i = 0; i < n; ++i) {
            model.trans[i] = floored_distribution(trans_num[i], options.prob_floor);
            model.emis[i] = floored_distribution(emis_num[i], options.prob_floor);
        }
        ++run.iterations;
    }

    // Ran out of iterations after an update; evaluate the final parameters
    // so the trace ends at the returned model's likelihood.
    double final_ll = 0.0;
    for (const auto& symbols : sequences) {
        forward_scaled(model, symbols, alpha, scaling);
        for (const auto c : scaling) final_ll += std::log(c);
    }
    run.trace.push_back(final_ll);
    run.model = std::move(model);
    return run;
}

}  // namespace

TrainResult hmm_train(std::span<const std::vector<int>> sequences, int num_symbols,
                      const TrainOptions& options) {
    if (options.num_states < 1) throw Error("hmm_train: need at least one state");
    if (num_symbols < 2) throw Error("hmm_train: need at least two symbols");
    if (options.max_iters < 1) throw Error("hmm_train: max_iters must be >= 1");
    if (!(options.tol > 0.0)) throw Error("hmm_train: tol must be positive");
    if (options.restarts < 1) throw Error("hmm_train: restarts must be >= 1");
    if (sequences.empty()) throw Error("hmm_train: no training sequences");
    for (const auto& seq : sequences) {
        if (seq.size() < 2) throw Error("hmm_train: every sequence needs length >= 2");
        check_symbols(seq, num_symbols);
    }
    if (options.init) {
        require_valid(*options.init);
        if (options.init->num_states != options.num_states ||
            options.init->num_symbols != num_symbols) {
            throw Error("hmm_train: init model shape does not match N/M");
        }
    }

    TrainResult result;
    double best_final = kNegInf;
    for (int r = 0; r < options.restarts; ++r) {
        std::mt19937_64 rng(options.seed + static_cast<std::uint64_t>(r));
        HmmModel start;
        if (r == 0 && options.init) {
            start = *options.init;
            start.initial = floored_distribution(start.initial, options.prob_floor);
            for (auto& row : start.trans) row = floored_distribution(row, options.prob_floor);
            for (auto& row : start.emis) row = floored_distribution(row, options.prob_floor);
        } else {
            start = random_init(rng, options.num_states, num_symbols, options.prob_floor);
        }
        auto run = run_em(std::move(start), sequences, num_symbols, options);
        const double final_ll = run.trace.back();
        result.all_traces.push_back(run.trace);
        if (final_ll > best_final) {
            best_final = final_ll;
            result.model = std::move(run.model);
            result.loglik_trace = std::move(run.trace);
            result.restart_index = r;
            result.iterations = run.iterations;
        }
    }
    return result;
}

}  // namespace canhmm
