#include "glac/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "glac/error.hpp"

namespace glac {

namespace {

constexpr int kFormatVersion = 1;

nlohmann::json config_to_json(const AppConfig& c) {
    nlohmann::json j;
    j["learning_rate"] = c.learning_rate;
    j["weight_decay"] = c.weight_decay;
    j["batch_size"] = c.batch_size;
    j["epochs"] = c.epochs;
    j["seed"] = c.seed;
    j["grad_clip"] = c.grad_clip;
    j["patience"] = c.patience;
    j["target_ppl"] = c.target_ppl;
    j["val_fraction"] = c.val_fraction;
    j["min_count"] = c.min_count;
    j["feature_dim"] = c.feature_dim;
    j["enc_hidden"] = c.enc_hidden;
    j["glocal_dim"] = c.glocal_dim;
    j["dec_hidden"] = c.dec_hidden;
    j["embed_dim"] = c.embed_dim;
    j["max_len"] = c.max_len;
    j["vocab_size"] = c.vocab_size;
    j["dropout"] = c.dropout;
    j["cascading"] = c.cascading;
    j["use_global"] = c.use_global;
    j["use_local"] = c.use_local;
    j["use_count_penalty"] = c.use_count_penalty;
    j["plain_seq2seq"] = c.plain_seq2seq;
    j["k"] = c.k;
    j["n_samples"] = c.n_samples;
    j["count_reset"] = c.count_reset;
    j["exempt_words"] = c.exempt_words;
    return j;
}

AppConfig config_from_json(const nlohmann::json& j) {
    AppConfig c;
    try {
        c.learning_rate = j.at("learning_rate").get<double>();
        c.weight_decay = j.at("weight_decay").get<double>();
        c.batch_size = j.at("batch_size").get<size_t>();
        c.epochs = j.at("epochs").get<size_t>();
        c.seed = j.at("seed").get<uint64_t>();
        c.grad_clip = j.at("grad_clip").get<double>();
        c.patience = j.at("patience").get<size_t>();
        c.target_ppl = j.at("target_ppl").get<double>();
        c.val_fraction = j.at("val_fraction").get<double>();
        c.min_count = j.at("min_count").get<size_t>();
        c.feature_dim = j.at("feature_dim").get<size_t>();
        c.enc_hidden = j.at("enc_hidden").get<size_t>();
        c.glocal_dim = j.at("glocal_dim").get<size_t>();
        c.dec_hidden = j.at("dec_hidden").get<size_t>();
        c.embed_dim = j.at("embed_dim").get<size_t>();
        c.max_len = j.at("max_len").get<size_t>();
        c.vocab_size = j.at("vocab_size").get<size_t>();
        c.dropout = j.at("dropout").get<double>();
        c.cascading = j.at("cascading").get<bool>();
        c.use_global = j.at("use_global").get<bool>();
        c.use_local = j.at("use_local").get<bool>();
        c.use_count_penalty = j.at("use_count_penalty").get<bool>();
        c.plain_seq2seq = j.at("plain_seq2seq").get<bool>();
        c.k = j.at("k").get<double>();
        c.n_samples = j.at("n_samples").get<int>();
        c.count_reset = j.at("count_reset").get<std::string>();
        c.exempt_words = j.at("exempt_words").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("checkpoint config: ") + e.what());
    }
    return c;
}

} // namespace

void save_checkpoint(const std::string& path, const GlacModel& model,
                     const Vocabulary& vocab, size_t epoch,
                     const std::string& rng_state) {
    nlohmann::json j;
    j["format_version"] = kFormatVersion;
    j["config"] = config_to_json(model.config());
    j["vocab"] = vocab.words();
    j["epoch"] = epoch;
    j["rng_state"] = rng_state;

    nlohmann::json tensors = nlohmann::json::array();
    for (const GlacModel::Named& n : model.state_tensors()) {
        nlohmann::json t;
        t["name"] = n.name;
        t["shape"] = n.tensor.shape();
        t["data"] = n.tensor.data();
        tensors.push_back(std::move(t));
    }
    j["tensors"] = std::move(tensors);

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint: " + path);
    out << j.dump();
    out << "\n";
    if (!out) throw DataError("checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("checkpoint " + path + ": " + e.what());
    }

    if (!j.contains("format_version") ||
        j["format_version"].get<int>() != kFormatVersion) {
        throw DataError("checkpoint " + path + ": unsupported format version");
    }

    Checkpoint ck;
    ck.config = config_from_json(j.at("config"));
    ck.vocab = Vocabulary::from_words(
        j.at("vocab").get<std::vector<std::string>>());
    ck.epoch = j.at("epoch").get<size_t>();
    ck.rng_state = j.at("rng_state").get<std::string>();
    if (ck.config.vocab_size != ck.vocab.size()) {
        throw DataError("checkpoint: config vocab_size " +
                        std::to_string(ck.config.vocab_size) +
                        " disagrees with stored vocabulary of " +
                        std::to_string(ck.vocab.size()));
    }

    ck.model = std::make_shared<GlacModel>(ck.config, /*init_seed=*/0);
    auto state = ck.model->state_tensors();
    const auto& tensors = j.at("tensors");
    if (tensors.size() != state.size()) {
        throw DataError("checkpoint: " + std::to_string(tensors.size()) +
                        " tensors, model has " + std::to_string(state.size()));
    }
    for (size_t i = 0; i < state.size(); ++i) {
        const auto& t = tensors[i];
        const std::string name = t.at("name").get<std::string>();
        if (name != state[i].name) {
            throw DataError("checkpoint: tensor " + std::to_string(i) +
                            " is " + name + ", expected " + state[i].name);
        }
        const auto shape = t.at("shape").get<std::vector<size_t>>();
        if (shape != state[i].tensor.shape()) {
            throw DataError("checkpoint: tensor " + name + " has wrong shape");
        }
        auto data = t.at("data").get<std::vector<double>>();
        if (data.size() != state[i].tensor.numel()) {
            throw DataError("checkpoint: tensor " + name + " has wrong size");
        }
        state[i].tensor.data() = std::move(data);
    }
    return ck;
}

} // namespace glac
