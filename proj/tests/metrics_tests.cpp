#include <catch2/catch_amalgamated.hpp>

#include "editext/corpus.hpp"
#include "editext/metrics.hpp"
#include "editext/rng.hpp"

using namespace editext;

TEST_CASE("hamming distance and the padding rule") {
    REQUIRE(hamming({1, 2, 3}, {1, 2, 3}) == 0);
    REQUIRE(hamming({1, 2, 3}, {1, 9, 3}) == 1);
    REQUIRE(hamming({1, 2}, {1, 2, 5, 5}) == 2);
    REQUIRE(hamming({}, {4, 4}) == 2);
    REQUIRE(hamming({}, {}) == 0);
}

TEST_CASE("hamming is a metric on padded sequences", "[property]") {
    RngStream rng(17);
    auto random_seq = [&rng]() {
        TokenSequence w(rng.uniform_int(0, 6));
        for (int& t : w) t = rng.uniform_int(3, 8);
        return w;
    };
    for (int trial = 0; trial < 500; ++trial) {
        TokenSequence a = random_seq(), b = random_seq(), c = random_seq();
        REQUIRE(hamming(a, b) == hamming(b, a));
        REQUIRE((hamming(a, b) == 0) == (a == b));
        REQUIRE(hamming(a, c) <= hamming(a, b) + hamming(b, c));
    }
}

TEST_CASE("corpus BLEU matches the documented formula by hand") {
    // Single pair, hyp [1,2,3,4] vs ref [1,2,3,5]:
    //   p1 = 3/4, p2 = 2/3, p3 = 1/2, p4 = 0 -> smoothed to 1/(2*1)
    //   BP = 1 (equal lengths)
    //   BLEU = 100 * (3/4 * 2/3 * 1/2 * 1/2)^(1/4) = 100 * 0.125^0.25
    double want = 100.0 * std::pow(0.75 * (2.0 / 3.0) * 0.5 * 0.5, 0.25);
    double got = corpus_bleu({{1, 2, 3, 4}}, {{1, 2, 3, 5}});
    REQUIRE(got == Catch::Approx(want).margin(1e-6));
    REQUIRE(got == Catch::Approx(59.4603557).margin(1e-6));
}

TEST_CASE("corpus BLEU boundary behavior") {
    std::vector<TokenSequence> refs, hyps;
    RngStream rng(23);
    for (int i = 0; i < 10; ++i) {
        TokenSequence r(10);
        for (int& t : r) t = rng.uniform_int(3, 15);
        refs.push_back(r);
        hyps.push_back(r);
    }
    REQUIRE(corpus_bleu(hyps, refs) == Catch::Approx(100.0).margin(1e-9));

    // Disjoint vocabulary: every order is smoothed, score collapses.
    std::vector<TokenSequence> off;
    for (int i = 0; i < 10; ++i) {
        TokenSequence h(10);
        for (int& t : h) t = rng.uniform_int(20, 30);
        off.push_back(h);
    }
    REQUIRE(corpus_bleu(off, refs) <= 1.0);

    // Brevity penalty engages for short hypotheses.
    std::vector<TokenSequence> prefix;
    for (const auto& r : refs) prefix.push_back(TokenSequence(r.begin(), r.begin() + 5));
    REQUIRE(corpus_bleu(prefix, refs) < corpus_bleu(refs, refs));

    REQUIRE_THROWS_AS(corpus_bleu({}, {}), input_error);
    REQUIRE_THROWS_AS(corpus_bleu({{1, 2}}, {}), input_error);
}

TEST_CASE("corpus BLEU is invariant to pair order", "[property]") {
    std::vector<TokenSequence> refs, hyps;
    RngStream rng(29);
    for (int i = 0; i < 8; ++i) {
        TokenSequence r(8), h(8);
        for (int& t : r) t = rng.uniform_int(3, 12);
        h = r;
        for (int k = 0; k < 3; ++k) h[rng.uniform_int(0, 7)] = rng.uniform_int(3, 12);
        refs.push_back(r);
        hyps.push_back(h);
    }
    double forward = corpus_bleu(hyps, refs);
    std::vector<TokenSequence> refs_r(refs.rbegin(), refs.rend());
    std::vector<TokenSequence> hyps_r(hyps.rbegin(), hyps.rend());
    REQUIRE(corpus_bleu(hyps_r, refs_r) == Catch::Approx(forward).epsilon(1e-12));
}

TEST_CASE("attribute classifier separates the default corpus", "[statistical]") {
    CorpusSpec spec;
    spec.seed = 1;
    spec.count_per_class = 500;
    Corpus train = generate_corpus(spec);
    CorpusSpec held = spec;
    held.seed = 2;
    Corpus test = generate_corpus(held);

    AttributeClassifier clf = train_classifier(train, 7, spec.vocab.size);
    REQUIRE(classifier_accuracy(clf, test) >= 0.95);

    double mean1 = 0.0, mean0 = 0.0;
    int n1 = 0, n0 = 0;
    for (const auto& ex : test) {
        if (ex.label == 1) {
            mean1 += reflect(clf, ex.tokens);
            ++n1;
        } else {
            mean0 += reflect(clf, ex.tokens);
            ++n0;
        }
    }
    mean1 /= n1;
    mean0 /= n0;
    REQUIRE(mean1 > 0.9);
    REQUIRE(mean1 - mean0 >= 0.5);

    // reflect is a pure function.
    REQUIRE(reflect(clf, test[0].tokens) == reflect(clf, test[0].tokens));
    REQUIRE(reflect_class(clf, test[0].tokens, 0) ==
            Catch::Approx(1.0 - reflect(clf, test[0].tokens)));
}

TEST_CASE("classifier training requires both classes") {
    Corpus single;
    single.push_back({{4, 5, 6}, 0});
    single.push_back({{5, 6, 7}, 0});
    REQUIRE_THROWS_AS(train_classifier(single, 0, 32), training_error);
}

TEST_CASE("token accuracy follows the padded hamming rule") {
    REQUIRE(token_accuracy({4, 5, 6}, {4, 5, 6}) == 1.0);
    REQUIRE(token_accuracy({4, 5, 6}, {4, 9, 6}) == Catch::Approx(2.0 / 3.0));
    REQUIRE(token_accuracy({4, 5}, {4, 5, 6, 7}) == Catch::Approx(0.5));
}
