#include "glac/glocal.hpp"

#include <cmath>

#include "glac/error.hpp"

namespace glac {

size_t EncoderConfig::concat_dim() const {
    size_t w = 0;
    if (use_global) w += 2 * hidden;
    if (use_local) w += feature_dim;
    return w;
}

void EncoderConfig::validate() const {
    if (!use_global && !use_local) {
        throw ConfigError("encoder: global and local channels both disabled");
    }
}

GlocalParams GlocalParams::init(const EncoderConfig& cfg, Rng& rng) {
    cfg.validate();
    const size_t in = cfg.concat_dim();
    const size_t g = cfg.glocal_dim;
    const double b1 = 1.0 / std::sqrt(static_cast<double>(in));
    const double b2 = 1.0 / std::sqrt(static_cast<double>(g));
    GlocalParams p;
    p.fc1_w = Tensor::uniform({g, in}, -b1, b1, rng, true);
    p.fc1_b = Tensor::zeros({g}, true);
    p.fc2_w = Tensor::uniform({g, g}, -b2, b2, rng, true);
    p.fc2_b = Tensor::zeros({g}, true);
    p.bn1_gamma = Tensor::full({g}, 1.0, true);
    p.bn1_beta = Tensor::zeros({g}, true);
    p.bn1_mean = Tensor::zeros({g});
    p.bn1_var = Tensor::full({g}, 1.0);
    p.bn2_gamma = Tensor::full({g}, 1.0, true);
    p.bn2_beta = Tensor::zeros({g}, true);
    p.bn2_mean = Tensor::zeros({g});
    p.bn2_var = Tensor::full({g}, 1.0);
    return p;
}

std::vector<GlocalVector> build_glocal(Tape& tape,
                                       const std::vector<Tensor>& features,
                                       const std::vector<Tensor>& global_outputs,
                                       GlocalParams& params,
                                       const EncoderConfig& cfg, bool training,
                                       Rng& rng) {
    cfg.validate();
    if (features.size() != global_outputs.size()) {
        throw ContractError("build_glocal: " + std::to_string(features.size()) +
                            " features vs " +
                            std::to_string(global_outputs.size()) +
                            " global outputs");
    }
    const size_t S = features.size();
    if (S == 0) throw ContractError("build_glocal: empty story");

    std::vector<Tensor> rows(S);
    for (size_t t = 0; t < S; ++t) {
        std::vector<Tensor> parts;
        if (cfg.use_global) parts.push_back(global_outputs[t]);
        if (cfg.use_local) parts.push_back(features[t]);
        rows[t] = parts.size() == 1 ? parts[0] : concat(tape, parts, 0);
    }

    Tensor x = stack_rows(tape, rows);
    Tensor z = linear(tape, x, params.fc1_w, params.fc1_b);
    z = batch_norm(tape, z, params.bn1_gamma, params.bn1_beta, params.bn1_mean,
                   params.bn1_var, training);
    z = dropout(tape, z, cfg.dropout, training, rng);
    z = relu(tape, z);
    z = linear(tape, z, params.fc2_w, params.fc2_b);
    z = batch_norm(tape, z, params.bn2_gamma, params.bn2_beta, params.bn2_mean,
                   params.bn2_var, training);
    z = dropout(tape, z, cfg.dropout, training, rng);

    std::vector<GlocalVector> out(S);
    for (size_t t = 0; t < S; ++t) {
        out[t].values = row(tape, z, t);
        out[t].source_index = t;
    }
    return out;
}

const GlocalVector& glocal_for_sentence(const std::vector<GlocalVector>& glocals,
                                        size_t t) {
    if (t >= glocals.size()) {
        throw ContractError("glocal_for_sentence: sentence " +
                            std::to_string(t) + " of " +
                            std::to_string(glocals.size()));
    }
    return glocals[t];
}

} // namespace glac
