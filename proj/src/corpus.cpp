#include "glac/corpus.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include <json.hpp>

#include "glac/error.hpp"

namespace glac {

namespace {

const std::array<const char*, kReservedTokens> kReservedWords = {
    "<pad>", "<start>", "<end>", "<unk>"};

} // namespace

Vocabulary::Vocabulary() {
    for (size_t i = 0; i < kReservedTokens; ++i) {
        words_.emplace_back(kReservedWords[i]);
        ids_[words_.back()] = static_cast<int>(i);
    }
}

Vocabulary Vocabulary::build(const std::vector<StoryRecord>& records,
                             size_t min_count) {
    if (records.empty()) throw DataError("vocabulary: empty corpus");
    std::map<std::string, size_t> freq;
    for (const StoryRecord& r : records) {
        for (const auto& sentence : r.sentences) {
            for (const std::string& w : sentence) {
                bool reserved = false;
                for (const char* rw : kReservedWords) reserved |= (w == rw);
                if (!reserved) ++freq[w];
            }
        }
    }
    std::vector<std::pair<std::string, size_t>> entries(freq.begin(),
                                                        freq.end());
    std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });

    Vocabulary v;
    v.min_count_ = min_count;
    for (const auto& [word, count] : entries) {
        if (count < min_count) continue;
        v.ids_[word] = static_cast<int>(v.words_.size());
        v.words_.push_back(word);
    }
    return v;
}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
    if (words.size() < kReservedTokens) {
        throw DataError("vocabulary: word list shorter than reserved ids");
    }
    for (size_t i = 0; i < kReservedTokens; ++i) {
        if (words[i] != kReservedWords[i]) {
            throw DataError("vocabulary: id " + std::to_string(i) +
                            " must be " + kReservedWords[i] + ", got " +
                            words[i]);
        }
    }
    Vocabulary v;
    v.words_ = std::move(words);
    v.ids_.clear();
    for (size_t i = 0; i < v.words_.size(); ++i) {
        if (!v.ids_.emplace(v.words_[i], static_cast<int>(i)).second) {
            throw DataError("vocabulary: duplicate word " + v.words_[i]);
        }
    }
    return v;
}

int Vocabulary::id(const std::string& word) const {
    auto it = ids_.find(word);
    return it == ids_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::word(int id) const {
    if (id < 0 || static_cast<size_t>(id) >= words_.size()) {
        throw IndexError("vocabulary: id " + std::to_string(id) +
                         " outside [0, " + std::to_string(words_.size()) + ")");
    }
    return words_[static_cast<size_t>(id)];
}

bool Vocabulary::contains(const std::string& word) const {
    return ids_.count(word) > 0;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&]() {
        if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    };
    for (unsigned char ch : text) {
        if (std::isspace(ch)) {
            flush();
        } else if (std::isalnum(ch) || ch >= 0x80) {
            cur.push_back(static_cast<char>(std::tolower(ch)));
        } else {
            flush();
            tokens.push_back(std::string(1, static_cast<char>(ch)));
        }
    }
    flush();
    return tokens;
}

std::vector<std::vector<int>> encode(const Vocabulary& vocab,
                                     const StoryRecord& record) {
    std::vector<std::vector<int>> out;
    out.reserve(record.sentences.size());
    for (const auto& sentence : record.sentences) {
        std::vector<int> ids;
        ids.reserve(sentence.size() + 2);
        ids.push_back(kStartId);
        for (const std::string& w : sentence) ids.push_back(vocab.id(w));
        ids.push_back(kEndId);
        out.push_back(std::move(ids));
    }
    return out;
}

namespace {

StoryRecord parse_record(const nlohmann::json& j, size_t line_no) {
    auto fail = [&](const std::string& msg) -> DataError {
        std::string id = j.contains("story_id") && j["story_id"].is_string()
                             ? j["story_id"].get<std::string>()
                             : "<unknown>";
        return DataError("line " + std::to_string(line_no) + ", story " + id +
                         ": " + msg);
    };
    if (!j.is_object()) throw fail("record is not an object");
    for (const auto& [key, _] : j.items()) {
        if (key != "story_id" && key != "features" && key != "sentences") {
            throw fail("unknown field " + key);
        }
    }
    if (!j.contains("story_id") || !j["story_id"].is_string()) {
        throw fail("missing string story_id");
    }
    if (!j.contains("features") || !j["features"].is_array()) {
        throw fail("missing features array");
    }
    if (!j.contains("sentences") || !j["sentences"].is_array()) {
        throw fail("missing sentences array");
    }

    StoryRecord r;
    r.story_id = j["story_id"].get<std::string>();
    for (const auto& fv : j["features"]) {
        if (!fv.is_array()) throw fail("feature entry is not an array");
        std::vector<double> v;
        for (const auto& x : fv) {
            if (!x.is_number()) throw fail("non-numeric feature value");
            v.push_back(x.get<double>());
        }
        r.features.push_back(std::move(v));
    }
    for (const auto& sv : j["sentences"]) {
        if (!sv.is_array()) throw fail("sentence entry is not an array");
        std::vector<std::string> s;
        for (const auto& w : sv) {
            if (!w.is_string()) throw fail("non-string token");
            s.push_back(w.get<std::string>());
        }
        r.sentences.push_back(std::move(s));
    }

    if (r.features.empty()) throw fail("no images");
    for (const auto& v : r.features) {
        if (v.size() != r.features[0].size()) {
            throw fail("feature vectors of mixed dimension");
        }
        if (v.empty()) throw fail("empty feature vector");
    }
    return r;
}

} // namespace

std::vector<StoryRecord> load_corpus(const std::string& path,
                                     bool allow_unlabeled) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open corpus: " + path);
    std::vector<StoryRecord> records;
    std::string line;
    size_t line_no = 0;
    size_t dim = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("line " + std::to_string(line_no) + ": " +
                             e.what());
        }
        StoryRecord r = parse_record(j, line_no);
        const bool aligned = r.sentences.size() == r.features.size();
        const bool unlabeled = allow_unlabeled && r.sentences.empty();
        if (!aligned && !unlabeled) {
            throw DataError("line " + std::to_string(line_no) + ", story " +
                            r.story_id + ": " +
                            std::to_string(r.features.size()) +
                            " features but " +
                            std::to_string(r.sentences.size()) + " sentences");
        }
        if (dim == 0) dim = r.feature_dim();
        if (r.feature_dim() != dim) {
            throw DataError("line " + std::to_string(line_no) + ", story " +
                            r.story_id + ": feature dim " +
                            std::to_string(r.feature_dim()) +
                            " differs from corpus dim " + std::to_string(dim));
        }
        records.push_back(std::move(r));
    }
    return records;
}

void save_corpus(const std::vector<StoryRecord>& records,
                 const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write corpus: " + path);
    for (const StoryRecord& r : records) {
        nlohmann::json j;
        j["story_id"] = r.story_id;
        j["features"] = r.features;
        j["sentences"] = r.sentences;
        out << j.dump() << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

CorpusSplit split_corpus(const std::vector<StoryRecord>& records,
                         double val_fraction) {
    if (val_fraction < 0.0 || val_fraction >= 1.0) {
        throw ParamError("val_fraction must be in [0, 1)");
    }
    CorpusSplit split;
    const size_t n_val = static_cast<size_t>(
        std::ceil(val_fraction * static_cast<double>(records.size())));
    const size_t n_train = records.size() - n_val;
    split.train.assign(records.begin(), records.begin() + n_train);
    split.val.assign(records.begin() + n_train, records.end());

    std::set<std::string> train_ids;
    for (const auto& r : split.train) train_ids.insert(r.story_id);
    for (const auto& r : split.val) {
        if (train_ids.count(r.story_id)) {
            throw DataError("split: story " + r.story_id +
                            " appears in both train and validation");
        }
    }
    return split;
}

namespace {

const std::vector<std::string>& noun_pool() {
    static const std::vector<std::string> nouns = {
        "dog",    "cat",    "tree",   "beach",  "cake",   "river",
        "house",  "horse",  "boat",   "garden", "bridge", "mountain",
        "flower", "bird",   "car",    "train",  "child",  "family",
        "friend", "market", "castle", "forest", "lake",   "road",
        "field",  "tower",  "statue", "museum", "park",   "church",
        "door",   "window", "table",  "chair",  "ball",   "kite",
        "cloud",  "sunset", "island", "valley", "camera", "guitar",
        "piano",  "tent",   "fire",   "snow",   "rain",   "moon",
    };
    return nouns;
}

std::vector<std::string> template_sentence(const std::string& noun,
                                           size_t which) {
    switch (which % 4) {
        case 0: return {"the", noun, "is", "here", "."};
        case 1: return {"a", noun, "was", "there", "."};
        case 2: return {"we", "saw", "the", noun, "."};
        default: return {"this", noun, "looked", "great", "."};
    }
}

} // namespace

std::vector<StoryRecord> synth_corpus(uint64_t seed, const SynthSpec& spec) {
    if (spec.n_stories < 1) throw ParamError("synth_corpus: n_stories >= 1");
    if (spec.content_words < 1 || spec.feature_dim < 1 ||
        spec.images_per_story < 1) {
        throw ParamError("synth_corpus: degenerate spec");
    }

    std::vector<std::string> words;
    for (size_t i = 0; i < spec.content_words; ++i) {
        if (i < noun_pool().size()) {
            words.push_back(noun_pool()[i]);
        } else {
            words.push_back("thing" + std::to_string(i));
        }
    }

    Rng rng(Rng::mix(seed, 0x67656e)); // one stream for the whole corpus
    std::vector<std::vector<double>> embed(spec.content_words);
    for (auto& e : embed) {
        e.resize(spec.feature_dim);
        for (double& v : e) v = rng.uniform(-1.0, 1.0);
    }

    std::vector<StoryRecord> records(spec.n_stories);
    for (size_t s = 0; s < spec.n_stories; ++s) {
        StoryRecord& r = records[s];
        r.story_id = "synth" + std::to_string(seed) + "-" + std::to_string(s);
        for (size_t t = 0; t < spec.images_per_story; ++t) {
            const size_t w = rng.below(spec.content_words);
            std::vector<double> f(spec.feature_dim);
            for (size_t i = 0; i < spec.feature_dim; ++i) {
                f[i] = embed[w][i] + spec.noise * rng.normal();
            }
            r.features.push_back(std::move(f));
            r.sentences.push_back(template_sentence(words[w], w));
        }
    }
    return records;
}

std::vector<size_t> epoch_order(size_t n_records, size_t epoch, uint64_t seed) {
    if (n_records < 1) throw ContractError("epoch_order: empty corpus");
    std::vector<size_t> perm(n_records);
    for (size_t i = 0; i < n_records; ++i) perm[i] = i;
    Rng rng(Rng::mix(seed, 0xE70C + epoch));
    rng.shuffle(perm);
    return perm;
}

} // namespace glac
