#include "glac/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "glac/error.hpp"

namespace glac {

namespace {

std::string trim(const std::string& s) {
    const size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": not a number: " + v);
    }
    return out;
}

uint64_t parse_uint(const std::string& key, const std::string& v) {
    uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ConfigError(key + ": not a non-negative integer: " + v);
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": not a boolean: " + v);
}

std::string fmt_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

} // namespace

void AppConfig::validate() const {
    if (learning_rate < 0) throw ConfigError("learning_rate must be >= 0");
    if (weight_decay < 0) throw ConfigError("weight_decay must be >= 0");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (grad_clip < 0) throw ConfigError("grad_clip must be >= 0");
    if (val_fraction < 0 || val_fraction >= 1) {
        throw ConfigError("val_fraction must be in [0, 1)");
    }
    if (dropout < 0 || dropout >= 1) {
        throw ConfigError("dropout must be in [0, 1)");
    }
    if (feature_dim < 1 || enc_hidden < 1 || glocal_dim < 1 || embed_dim < 1) {
        throw ConfigError("model dimensions must be positive");
    }
    if (max_len < 1) throw ConfigError("max_len must be >= 1");
    if (min_count < 1) throw ConfigError("min_count must be >= 1");
    if (!plain_seq2seq && !use_global && !use_local) {
        throw ConfigError("use_global and use_local cannot both be false");
    }
    if (k < 0) throw ConfigError("k must be >= 0");
    if (n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (count_reset != "story" && count_reset != "sentence") {
        throw ConfigError("count_reset must be story or sentence");
    }
}

AppConfig AppConfig::resolved(size_t corpus_vocab) const {
    AppConfig out = *this;
    if (out.dec_hidden == 0) out.dec_hidden = out.glocal_dim;
    if (out.vocab_size == 0) out.vocab_size = corpus_vocab;
    out.validate();
    if (out.vocab_size < 5) {
        throw ConfigError("vocabulary must extend past the reserved ids");
    }
    return out;
}

AppConfig parse_config(const std::string& text) {
    AppConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": expected key=value, got: " + line);
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen.insert(key).second) {
            throw ConfigError("line " + std::to_string(line_no) +
                              ": duplicate key " + key);
        }

        if (key == "learning_rate") cfg.learning_rate = parse_double(key, value);
        else if (key == "weight_decay") cfg.weight_decay = parse_double(key, value);
        else if (key == "batch_size") cfg.batch_size = parse_uint(key, value);
        else if (key == "epochs") cfg.epochs = parse_uint(key, value);
        else if (key == "seed") cfg.seed = parse_uint(key, value);
        else if (key == "grad_clip") cfg.grad_clip = parse_double(key, value);
        else if (key == "patience") cfg.patience = parse_uint(key, value);
        else if (key == "target_ppl") cfg.target_ppl = parse_double(key, value);
        else if (key == "val_fraction") cfg.val_fraction = parse_double(key, value);
        else if (key == "min_count") cfg.min_count = parse_uint(key, value);
        else if (key == "feature_dim") cfg.feature_dim = parse_uint(key, value);
        else if (key == "enc_hidden") cfg.enc_hidden = parse_uint(key, value);
        else if (key == "glocal_dim") cfg.glocal_dim = parse_uint(key, value);
        else if (key == "dec_hidden") cfg.dec_hidden = parse_uint(key, value);
        else if (key == "embed_dim") cfg.embed_dim = parse_uint(key, value);
        else if (key == "max_len") cfg.max_len = parse_uint(key, value);
        else if (key == "vocab_size") cfg.vocab_size = parse_uint(key, value);
        else if (key == "dropout") cfg.dropout = parse_double(key, value);
        else if (key == "cascading") cfg.cascading = parse_bool(key, value);
        else if (key == "use_global") cfg.use_global = parse_bool(key, value);
        else if (key == "use_local") cfg.use_local = parse_bool(key, value);
        else if (key == "use_count_penalty") cfg.use_count_penalty = parse_bool(key, value);
        else if (key == "plain_seq2seq") cfg.plain_seq2seq = parse_bool(key, value);
        else if (key == "k") cfg.k = parse_double(key, value);
        else if (key == "n_samples") cfg.n_samples = static_cast<int>(parse_uint(key, value));
        else if (key == "count_reset") cfg.count_reset = value;
        else if (key == "exempt_words") cfg.exempt_words = value;
        else throw ConfigError("line " + std::to_string(line_no) +
                               ": unknown key " + key);
    }
    cfg.validate();
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const AppConfig& cfg) {
    std::ostringstream out;
    out << "learning_rate=" << fmt_double(cfg.learning_rate) << "\n";
    out << "weight_decay=" << fmt_double(cfg.weight_decay) << "\n";
    out << "batch_size=" << cfg.batch_size << "\n";
    out << "epochs=" << cfg.epochs << "\n";
    out << "seed=" << cfg.seed << "\n";
    out << "grad_clip=" << fmt_double(cfg.grad_clip) << "\n";
    out << "patience=" << cfg.patience << "\n";
    out << "target_ppl=" << fmt_double(cfg.target_ppl) << "\n";
    out << "val_fraction=" << fmt_double(cfg.val_fraction) << "\n";
    out << "min_count=" << cfg.min_count << "\n";
    out << "feature_dim=" << cfg.feature_dim << "\n";
    out << "enc_hidden=" << cfg.enc_hidden << "\n";
    out << "glocal_dim=" << cfg.glocal_dim << "\n";
    out << "dec_hidden=" << cfg.dec_hidden << "\n";
    out << "embed_dim=" << cfg.embed_dim << "\n";
    out << "max_len=" << cfg.max_len << "\n";
    out << "vocab_size=" << cfg.vocab_size << "\n";
    out << "dropout=" << fmt_double(cfg.dropout) << "\n";
    out << "cascading=" << (cfg.cascading ? "true" : "false") << "\n";
    out << "use_global=" << (cfg.use_global ? "true" : "false") << "\n";
    out << "use_local=" << (cfg.use_local ? "true" : "false") << "\n";
    out << "use_count_penalty=" << (cfg.use_count_penalty ? "true" : "false") << "\n";
    out << "plain_seq2seq=" << (cfg.plain_seq2seq ? "true" : "false") << "\n";
    out << "k=" << fmt_double(cfg.k) << "\n";
    out << "n_samples=" << cfg.n_samples << "\n";
    out << "count_reset=" << cfg.count_reset << "\n";
    out << "exempt_words=" << cfg.exempt_words << "\n";
    return out.str();
}

std::vector<std::pair<std::string, AppConfig>> ablation_matrix(
    const AppConfig& base) {
    AppConfig full = base;
    full.cascading = true;
    full.use_global = true;
    full.use_local = true;
    full.use_count_penalty = true;
    full.plain_seq2seq = false;

    std::vector<std::pair<std::string, AppConfig>> rows;
    AppConfig c = full;
    c.plain_seq2seq = true;
    rows.emplace_back("lstm_seq2seq", c);
    c = full;
    c.cascading = false;
    rows.emplace_back("minus_cascading", c);
    c = full;
    c.use_global = false;
    rows.emplace_back("minus_global", c);
    c = full;
    c.use_local = false;
    rows.emplace_back("minus_local", c);
    c = full;
    c.use_count_penalty = false;
    rows.emplace_back("minus_count", c);
    rows.emplace_back("full", full);
    return rows;
}

} // namespace glac
