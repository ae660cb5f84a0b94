#include "canhmm/model_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "canhmm/errors.hpp"

namespace canhmm {

using ordered_json = nlohmann::ordered_json;

void save_model(std::ostream& out, const HmmModel& model, const TrainingMeta& meta) {
    require_valid(model);
    ordered_json doc;
    doc["format_version"] = kModelFormatVersion;
    doc["N"] = model.num_states;
    doc["M"] = model.num_symbols;
    doc["pi"] = model.initial;
    doc["A"] = model.trans;
    doc["B"] = model.emis;
    if (model.alphabet) {
        auto channels = ordered_json::array();
        auto edges = ordered_json::object();
        for (const auto& q : model.alphabet->quantizers) {
            channels.push_back(channel_name(q.channel));
            edges[channel_name(q.channel)] = q.edges;
        }
        ordered_json alphabet;
        alphabet["channels"] = std::move(channels);
        alphabet["edges"] = std::move(edges);
        alphabet["dt"] = model.alphabet->dt;
        doc["alphabet"] = std::move(alphabet);
    } else {
        doc["alphabet"] = nullptr;
    }
    doc["training_meta"] = {{"seed", meta.seed},
                            {"iterations", meta.iterations},
                            {"final_loglik", meta.final_loglik}};
    out << doc.dump(2) << "\n";
}

void save_model_file(const std::string& path, const HmmModel& model, const TrainingMeta& meta) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open model file for writing: " + path);
    save_model(out, model, meta);
}

LoadedModel load_model(std::istream& in) {
    ordered_json doc;
    try {
        in >> doc;
    } catch (const std::exception& e) {
        throw Error(std::string("model file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("format_version") || !doc["format_version"].is_number_integer()) {
        throw Error("model file missing format_version");
    }
    const int version = doc["format_version"].get<int>();
    if (version != kModelFormatVersion) {
        throw Error("unsupported model format_version " + std::to_string(version) +
                    " (expected " + std::to_string(kModelFormatVersion) + ")");
    }

    LoadedModel loaded;
    auto& model = loaded.model;
    try {
        model.num_states = doc.at("N").get<int>();
        model.num_symbols = doc.at("M").get<int>();
        model.initial = doc.at("pi").get<std::vector<double>>();
        model.trans = doc.at("A").get<std::vector<std::vector<double>>>();
        model.emis = doc.at("B").get<std::vector<std::vector<double>>>();
        if (doc.contains("alphabet") && !doc["alphabet"].is_null()) {
            const auto& a = doc["alphabet"];
            ObservationAlphabet alphabet;
            alphabet.dt = a.at("dt").get<double>();
            for (const auto& name : a.at("channels")) {
                const auto channel = channel_from_name(name.get<std::string>());
                if (!channel) throw Error("unknown channel in model alphabet: " + name.dump());
                Quantizer q;
                q.channel = *channel;
                q.edges = a.at("edges").at(name.get<std::string>()).get<std::vector<double>>();
                alphabet.quantizers.push_back(std::move(q));
            }
            model.alphabet = std::move(alphabet);
        }
        const auto& meta = doc.at("training_meta");
        loaded.meta.seed = meta.at("seed").get<std::uint64_t>();
        loaded.meta.iterations = meta.at("iterations").get<int>();
        loaded.meta.final_loglik = meta.at("final_loglik").get<double>();
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(std::string("malformed model file: ") + e.what());
    }
    require_valid(model);
    return loaded;
}

LoadedModel load_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open model file: " + path);
    return load_model(in);
}

}  // namespace canhmm
