#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "editext/corpus.hpp"
#include "editext/errors.hpp"

namespace editext {

// Position-wise mismatch count up to max(len(a), len(b)). Positions past the
// end of the shorter sequence count as mismatches, so length changes are
// never free.
inline int hamming(const TokenSequence& a, const TokenSequence& b) {
    size_t n = std::max(a.size(), b.size());
    int d = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i >= a.size() || i >= b.size() || a[i] != b[i]) ++d;
    }
    return d;
}

// Reconstruction accuracy: 1 - hamming / max(len). 1.0 iff sequences match.
inline double token_accuracy(const TokenSequence& reference, const TokenSequence& decoded) {
    size_t n = std::max(reference.size(), decoded.size());
    if (n == 0) return 1.0;
    return 1.0 - static_cast<double>(hamming(reference, decoded)) / static_cast<double>(n);
}

// Corpus-level BLEU, orders 1..4, on a 0..100 scale.
//
//   p_n  = clipped n-gram matches over the corpus / total hypothesis n-grams
//   BP   = 1 if |hyp| >= |ref|, else exp(1 - |ref|/|hyp|)
//   BLEU = 100 * BP * exp( (1/N) * sum_n log p_n )
//
// Zero-match orders use exponential smoothing: the k-th order with zero
// matches scores p_n = 1 / (2^k * total_n) (k = 1, 2, ... in order of
// occurrence). Orders with no hypothesis n-grams at all are dropped from the
// geometric mean. N is the number of retained orders (= 4 unless every
// hypothesis is shorter than 4 tokens).
inline double corpus_bleu(const std::vector<TokenSequence>& hypotheses,
                          const std::vector<TokenSequence>& references) {
    if (hypotheses.empty()) throw input_error("corpus_bleu: empty corpus");
    if (hypotheses.size() != references.size())
        throw input_error("corpus_bleu: hypothesis/reference count mismatch");

    constexpr int kMaxOrder = 4;
    double correct[kMaxOrder] = {0, 0, 0, 0};
    double total[kMaxOrder] = {0, 0, 0, 0};
    long long hyp_len = 0, ref_len = 0;

    using Ngram = std::vector<int>;
    for (size_t s = 0; s < hypotheses.size(); ++s) {
        const TokenSequence& hyp = hypotheses[s];
        const TokenSequence& ref = references[s];
        hyp_len += static_cast<long long>(hyp.size());
        ref_len += static_cast<long long>(ref.size());
        for (int n = 1; n <= kMaxOrder; ++n) {
            if (static_cast<int>(hyp.size()) < n) continue;
            std::map<Ngram, int> hyp_counts, ref_counts;
            for (size_t i = 0; i + n <= hyp.size(); ++i)
                ++hyp_counts[Ngram(hyp.begin() + i, hyp.begin() + i + n)];
            for (size_t i = 0; i + n <= ref.size(); ++i)
                ++ref_counts[Ngram(ref.begin() + i, ref.begin() + i + n)];
            for (const auto& [gram, cnt] : hyp_counts) {
                total[n - 1] += cnt;
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) correct[n - 1] += std::min(cnt, it->second);
            }
        }
    }

    double log_precision = 0.0;
    int used_orders = 0;
    double smooth = 1.0;
    for (int n = 0; n < kMaxOrder; ++n) {
        if (total[n] <= 0.0) continue;
        ++used_orders;
        double p;
        if (correct[n] > 0.0) {
            p = correct[n] / total[n];
        } else {
            smooth *= 2.0;
            p = 1.0 / (smooth * total[n]);
        }
        log_precision += std::log(p);
    }
    if (used_orders == 0) throw input_error("corpus_bleu: no scorable n-grams");

    double bp = hyp_len >= ref_len
                    ? 1.0
                    : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
    return 100.0 * bp * std::exp(log_precision / used_orders);
}

inline double sentence_bleu(const TokenSequence& hypothesis, const TokenSequence& reference) {
    return corpus_bleu({hypothesis}, {reference});
}

// Count-based linear attribute classifier over unigrams and bigrams.
// Closed-form fit: Laplace-smoothed per-class n-gram log-probabilities turned
// into log-odds weights. The decision score is length-normalized so mixed
// sequences land between the class extremes instead of saturating.
struct AttributeClassifier {
    int vocab_size = 0;
    uint64_t seed = 0;  // recorded for provenance; the fit is deterministic
    double bias = 0.0;
    std::vector<double> unigram_log_odds;  // size V
    std::vector<double> bigram_log_odds;   // size V*V, row = previous token

    double score(const TokenSequence& w) const {
        double s = bias;
        if (!w.empty()) {
            double u = 0.0;
            for (int t : w) u += unigram_log_odds[t];
            s += u / static_cast<double>(w.size());
        }
        if (w.size() >= 2) {
            double b = 0.0;
            for (size_t i = 1; i < w.size(); ++i)
                b += bigram_log_odds[static_cast<size_t>(w[i - 1]) * vocab_size + w[i]];
            s += b / static_cast<double>(w.size() - 1);
        }
        return s;
    }
};

inline AttributeClassifier train_classifier(const Corpus& corpus, uint64_t seed, int vocab_size) {
    long long class_count[2] = {0, 0};
    for (const LabeledExample& ex : corpus) ++class_count[ex.label];
    if (class_count[0] == 0 || class_count[1] == 0)
        throw training_error("train_classifier: corpus must contain both classes");

    const size_t v = static_cast<size_t>(vocab_size);
    std::vector<double> uni[2] = {std::vector<double>(v, 0.0), std::vector<double>(v, 0.0)};
    std::vector<double> bi[2] = {std::vector<double>(v * v, 0.0), std::vector<double>(v * v, 0.0)};
    double uni_total[2] = {0, 0}, bi_total[2] = {0, 0};

    for (const LabeledExample& ex : corpus) {
        int c = ex.label;
        for (size_t i = 0; i < ex.tokens.size(); ++i) {
            uni[c][ex.tokens[i]] += 1.0;
            uni_total[c] += 1.0;
            if (i > 0) {
                bi[c][static_cast<size_t>(ex.tokens[i - 1]) * v + ex.tokens[i]] += 1.0;
                bi_total[c] += 1.0;
            }
        }
    }

    AttributeClassifier clf;
    clf.vocab_size = vocab_size;
    clf.seed = seed;
    clf.bias = std::log(static_cast<double>(class_count[1])) - std::log(static_cast<double>(class_count[0]));
    clf.unigram_log_odds.resize(v);
    clf.bigram_log_odds.resize(v * v);
    const double a = 1.0;  // Laplace smoothing
    for (size_t t = 0; t < v; ++t) {
        double p1 = (uni[1][t] + a) / (uni_total[1] + a * v);
        double p0 = (uni[0][t] + a) / (uni_total[0] + a * v);
        clf.unigram_log_odds[t] = std::log(p1) - std::log(p0);
    }
    for (size_t t = 0; t < v * v; ++t) {
        double p1 = (bi[1][t] + a) / (bi_total[1] + a * v * v);
        double p0 = (bi[0][t] + a) / (bi_total[0] + a * v * v);
        clf.bigram_log_odds[t] = std::log(p1) - std::log(p0);
    }
    return clf;
}

// Probability that w carries attribute class 1.
inline double reflect(const AttributeClassifier& clf, const TokenSequence& w) {
    return 1.0 / (1.0 + std::exp(-clf.score(w)));
}

// Probability that w carries the given class.
inline double reflect_class(const AttributeClassifier& clf, const TokenSequence& w, int cls) {
    double p1 = reflect(clf, w);
    return cls == 1 ? p1 : 1.0 - p1;
}

inline double classifier_accuracy(const AttributeClassifier& clf, const Corpus& corpus) {
    if (corpus.empty()) throw input_error("classifier_accuracy: empty corpus");
    int correct = 0;
    for (const LabeledExample& ex : corpus) {
        int pred = reflect(clf, ex.tokens) > 0.5 ? 1 : 0;
        if (pred == ex.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(corpus.size());
}

}  // namespace editext
