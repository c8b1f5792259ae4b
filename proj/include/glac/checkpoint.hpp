#pragma once

#include <memory>
#include <string>

#include "glac/config.hpp"
#include "glac/corpus.hpp"
#include "glac/model.hpp"

namespace glac {

struct Checkpoint {
    AppConfig config;
    Vocabulary vocab;
    size_t epoch = 0;
    std::string rng_state;
    std::shared_ptr<GlacModel> model;
};

// Self-describing JSON: format_version, config, vocabulary (id order),
// epoch, rng state, and every state tensor by name with shape and raw
// 64-bit values. Serialization is deterministic, so save -> load -> save
// is byte-identical.
void save_checkpoint(const std::string& path, const GlacModel& model,
                     const Vocabulary& vocab, size_t epoch,
                     const std::string& rng_state);

Checkpoint load_checkpoint(const std::string& path);

} // namespace glac
