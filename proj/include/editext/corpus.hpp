#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "editext/errors.hpp"
#include "editext/rng.hpp"

namespace editext {

using TokenSequence = std::vector<int>;

struct Vocabulary {
    int size = 32;
    int pad = 0;
    int bos = 1;
    int eos = 2;

    void validate() const {
        if (size < 8) throw config_error("vocabulary: size must be >= 8");
        auto in_range = [&](int id) { return id >= 0 && id < size; };
        if (!in_range(pad) || !in_range(bos) || !in_range(eos))
            throw config_error("vocabulary: reserved id out of range");
        if (pad == bos || pad == eos || bos == eos)
            throw config_error("vocabulary: reserved ids must be distinct");
    }
};

struct LabeledExample {
    TokenSequence tokens;
    int label = 0;

    bool operator==(const LabeledExample&) const = default;
};

using Corpus = std::vector<LabeledExample>;

inline void validate_sequence(const TokenSequence& w, const Vocabulary& vocab, int max_len) {
    if (w.empty()) throw input_error("token sequence: empty");
    if (static_cast<int>(w.size()) > max_len)
        throw input_error("token sequence: longer than max length " + std::to_string(max_len));
    for (int t : w) {
        if (t < 0 || t >= vocab.size) throw input_error("token sequence: id out of range");
        if (t == vocab.pad) throw input_error("token sequence: interior pad token");
    }
}

// Per-class first-order Markov generator over a token subrange. The start
// distribution and each transition row are drawn once from the corpus seed,
// sharpened so rows have a few dominant successors.
struct ClassGenerator {
    int token_lo = 0;
    int token_hi = 0;  // exclusive
    std::vector<double> start;                   // size token_hi - token_lo
    std::vector<std::vector<double>> transition; // row per source token

    int range() const { return token_hi - token_lo; }
};

struct CorpusSpec {
    Vocabulary vocab;
    uint64_t seed = 1;
    int count_per_class = 500;
    int len_min = 6;
    int len_max = 16;
    int max_len = 48;
    double sharpness = 2.0;  // exp scale for transition row concentration
    // Class token subranges; the overlap fraction controls how ambiguous
    // single tokens are between classes.
    int class0_lo = 4, class0_hi = 20;
    int class1_lo = 16, class1_hi = 32;

    void validate() const {
        vocab.validate();
        if (count_per_class < 0) throw config_error("corpus: count_per_class must be >= 0");
        if (len_min < 1 || len_max < len_min) throw config_error("corpus: bad length bounds");
        if (len_max > max_len) throw config_error("corpus: len_max exceeds max_len");
        auto check_range = [&](int lo, int hi) {
            if (lo >= hi || lo < 0 || hi > vocab.size) throw config_error("corpus: bad class token range");
            for (int t = lo; t < hi; ++t)
                if (t == vocab.pad || t == vocab.bos || t == vocab.eos)
                    throw config_error("corpus: class range contains a reserved id");
        };
        check_range(class0_lo, class0_hi);
        check_range(class1_lo, class1_hi);
    }
};

namespace detail {

inline std::vector<double> random_row(int n, double sharpness, RngStream& rng) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& x : row) {
        x = std::exp(sharpness * rng.normal());
        sum += x;
    }
    for (double& x : row) x /= sum;
    return row;
}

inline void validate_row(const std::vector<double>& row) {
    double sum = 0.0;
    for (double x : row) {
        if (x < 0.0) throw config_error("corpus: negative transition probability");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw config_error("corpus: transition row does not sum to 1");
}

inline int sample_categorical(const std::vector<double>& row, RngStream& rng) {
    double u = rng.uniform();
    double acc = 0.0;
    for (size_t i = 0; i < row.size(); ++i) {
        acc += row[i];
        if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(row.size()) - 1;
}

}  // namespace detail

inline ClassGenerator build_class_generator(const CorpusSpec& spec, int cls) {
    ClassGenerator gen;
    gen.token_lo = cls == 0 ? spec.class0_lo : spec.class1_lo;
    gen.token_hi = cls == 0 ? spec.class0_hi : spec.class1_hi;
    RngStream rng = RngStream(spec.seed).split("class-generator").split(static_cast<uint64_t>(cls));
    int n = gen.range();
    RngStream start_rng = rng.split("start");
    gen.start = detail::random_row(n, spec.sharpness, start_rng);
    detail::validate_row(gen.start);
    gen.transition.resize(n);
    for (int i = 0; i < n; ++i) {
        RngStream row_rng = rng.split("row").split(static_cast<uint64_t>(i));
        gen.transition[i] = detail::random_row(n, spec.sharpness, row_rng);
        detail::validate_row(gen.transition[i]);
    }
    return gen;
}

// Deterministic in spec.seed: each sequence draws from its own substream, so
// the corpus is a pure function of the spec.
inline Corpus generate_corpus(const CorpusSpec& spec) {
    spec.validate();
    Corpus out;
    out.reserve(static_cast<size_t>(spec.count_per_class) * 2);
    for (int cls = 0; cls < 2; ++cls) {
        ClassGenerator gen = build_class_generator(spec, cls);
        RngStream cls_rng = RngStream(spec.seed).split("sequences").split(static_cast<uint64_t>(cls));
        for (int i = 0; i < spec.count_per_class; ++i) {
            RngStream rng = cls_rng.split(static_cast<uint64_t>(i));
            int len = rng.uniform_int(spec.len_min, spec.len_max);
            TokenSequence w(len);
            int state = detail::sample_categorical(gen.start, rng);
            w[0] = gen.token_lo + state;
            for (int k = 1; k < len; ++k) {
                state = detail::sample_categorical(gen.transition[state], rng);
                w[k] = gen.token_lo + state;
            }
            validate_sequence(w, spec.vocab, spec.max_len);
            out.push_back(LabeledExample{std::move(w), cls});
        }
    }
    return out;
}

// JSONL: one {"tokens":[...],"label":n} object per line, UTF-8, LF endings.
inline void save_corpus(const std::string& path, const Corpus& corpus) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw input_error("save_corpus: cannot open " + path);
    for (const LabeledExample& ex : corpus) {
        nlohmann::ordered_json j;
        j["tokens"] = ex.tokens;
        j["label"] = ex.label;
        f << j.dump() << "\n";
    }
    if (!f) throw input_error("save_corpus: write failed for " + path);
}

inline Corpus load_corpus(const std::string& path, const Vocabulary& vocab) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw input_error("load_corpus: cannot open " + path);
    Corpus out;
    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw parse_error("load_corpus: " + path + ":" + std::to_string(lineno) + ": " + why);
        };
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) fail("invalid JSON");
        if (!j.contains("tokens") || !j["tokens"].is_array()) fail("missing tokens array");
        if (!j.contains("label") || !j["label"].is_number_integer()) fail("missing integer label");
        LabeledExample ex;
        ex.label = j["label"].get<int>();
        if (ex.label != 0 && ex.label != 1) fail("label must be 0 or 1");
        for (const auto& t : j["tokens"]) {
            if (!t.is_number_integer()) fail("non-integer token");
            int id = t.get<int>();
            if (id < 0 || id >= vocab.size) fail("token id out of range [0," + std::to_string(vocab.size) + ")");
            ex.tokens.push_back(id);
        }
        if (ex.tokens.empty()) fail("empty token list");
        out.push_back(std::move(ex));
    }
    return out;
}

}  // namespace editext
