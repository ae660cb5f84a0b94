#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "canhmm/hmm.hpp"

namespace canhmm {

inline constexpr int kModelFormatVersion = 1;

struct TrainingMeta {
    std::uint64_t seed = 0;
    int iterations = 0;
    double final_loglik = 0.0;
};

// Versioned JSON document:
//   {format_version, N, M, pi, A, B,
//    alphabet{channels:[name...], edges:{name:[...]}, dt} | null,
//    training_meta{seed, iterations, final_loglik}}
// Numbers are written with enough digits to reload bit-exactly. The reader
// validates the model and rejects any other format_version.
void save_model(std::ostream& out, const HmmModel& model, const TrainingMeta& meta);
void save_model_file(const std::string& path, const HmmModel& model, const TrainingMeta& meta);

struct LoadedModel {
    HmmModel model;
    TrainingMeta meta;
};

LoadedModel load_model(std::istream& in);
LoadedModel load_model_file(const std::string& path);

}  // namespace canhmm
