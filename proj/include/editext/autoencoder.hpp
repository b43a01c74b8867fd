#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "editext/autodiff.hpp"
#include "editext/corpus.hpp"
#include "editext/errors.hpp"
#include "editext/matrix.hpp"
#include "editext/nn_common.hpp"
#include "editext/params.hpp"
#include "editext/rng.hpp"

namespace editext {

struct AutoencoderConfig {
    Vocabulary vocab;
    int max_len = 48;
    int latent_len = 8;    // L
    int latent_dim = 16;   // D
    int model_dim = 64;    // attention/embedding width
    int decoder_hidden = 128;

    int iterations = 3000;
    int batch_size = 32;
    double learning_rate = 3e-3;
    double grad_clip = 5.0;
    uint64_t seed = 11;

    void validate() const {
        vocab.validate();
        if (max_len < 1 || latent_len < 1 || latent_dim < 1 || model_dim < 1 || decoder_hidden < 1)
            throw config_error("autoencoder: dimensions must be positive");
        if (iterations < 1 || batch_size < 1 || learning_rate <= 0.0)
            throw config_error("autoencoder: training counts and rate must be positive");
    }
};

// Encoder: L learned query vectors gate position-tagged token values into a
// fixed L x D latent. The gates read only the position encodings, so which
// positions feed which slot is content-independent and the code transfers to
// unseen sequences; content enters through the gated values.
//
// Decoder: an autoregressive next-token predictor. Each step forms a query
// from (previous token, position), softmax-attends over the latent slots via
// fixed slot keys, and classifies from the gathered context.
//
// Latents handed out by encode() are standardized with statistics fitted over
// the training corpus; decode() accepts latents in that normalized space.
struct AutoencoderParameters {
    AutoencoderConfig config;
    ParameterStore store;
    bool stats_fitted = false;

    Matrix pos_table;  // fixed sinusoid, max_len + 1 rows
};

namespace ae_detail {

inline void init_parameters(AutoencoderParameters& p) {
    const auto& c = p.config;
    RngStream rng(c.seed);
    const double emb_std = 0.5;
    const double proj_std = 1.0 / std::sqrt(static_cast<double>(c.model_dim));

    p.store.add_normal("tok_emb", c.vocab.size, c.model_dim, emb_std, rng.split("tok_emb"));
    p.store.add_normal("enc_query", c.latent_len, c.model_dim, 0.1, rng.split("enc_query"));
    auto& gate_bias = p.store.add("enc_gate_bias", c.latent_len, 1);
    for (float& x : gate_bias.w) x = -2.0f;
    p.store.add_normal("enc_wv", c.model_dim, c.model_dim, proj_std, rng.split("enc_wv"));
    p.store.add_normal("enc_wo", c.model_dim, c.latent_dim, proj_std, rng.split("enc_wo"));
    p.store.add_normal("dec_wq", c.model_dim, c.model_dim, proj_std, rng.split("dec_wq"));
    p.store.add_normal("dec_slot_key", c.latent_len, c.model_dim, 0.1, rng.split("dec_slot_key"));
    p.store.add_normal("dec_wv", c.latent_dim, c.model_dim,
                       1.0 / std::sqrt(static_cast<double>(c.latent_dim)), rng.split("dec_wv"));
    p.store.add_normal("dec_wh", 2 * c.model_dim, c.decoder_hidden, 1.0 / std::sqrt(2.0 * c.model_dim),
                       rng.split("dec_wh"));
    p.store.add("dec_bh", 1, c.decoder_hidden);
    p.store.add_normal("dec_wout", c.decoder_hidden, c.vocab.size,
                       1.0 / std::sqrt(static_cast<double>(c.decoder_hidden)), rng.split("dec_wout"));
    p.store.add("dec_bout", 1, c.vocab.size);
    p.store.add("lat_mean", c.latent_len, c.latent_dim);
    auto& sc = p.store.add("lat_scale", c.latent_len, c.latent_dim);
    for (float& x : sc.w) x = 1.0f;

    p.pos_table = sinusoid_table(c.max_len + 1, c.model_dim);

    // Seed encoder queries and decoder slot keys with the same strided
    // positional prior: slot j starts out owning positions near 2j on both
    // the write and the read side, so position selectivity has a gradient
    // from the first iteration instead of waiting on symmetry breaking.
    auto& q = p.store.at("enc_query");
    auto& sk = p.store.at("dec_slot_key");
    for (int j = 0; j < c.latent_len; ++j) {
        int center = std::min(2 * j, c.max_len - 1);
        for (int k = 0; k < c.model_dim; ++k) {
            q.w[static_cast<size_t>(j) * c.model_dim + k] += static_cast<float>(p.pos_table(center, k));
            sk.w[static_cast<size_t>(j) * c.model_dim + k] += static_cast<float>(p.pos_table(center, k));
        }
    }
}

// Raw (unnormalized) latent. Shared by the public encode() and the
// normalization-statistics fit.
inline Matrix encode_raw(const AutoencoderParameters& p, const TokenSequence& w) {
    const auto& c = p.config;
    const int l = static_cast<int>(w.size());
    Matrix tok_emb = p.store.matrix("tok_emb");
    Matrix x(l, c.model_dim);
    for (int i = 0; i < l; ++i)
        for (int k = 0; k < c.model_dim; ++k) x(i, k) = tok_emb(w[i], k) + p.pos_table(i, k);

    Matrix values = matmul(x, p.store.matrix("enc_wv"));
    Matrix query = p.store.matrix("enc_query");
    Matrix bias = p.store.matrix("enc_gate_bias");
    Matrix gates(c.latent_len, l);
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.model_dim));
    for (int j = 0; j < c.latent_len; ++j)
        for (int i = 0; i < l; ++i) {
            double s = 0.0;
            for (int k = 0; k < c.model_dim; ++k) s += query(j, k) * p.pos_table(i, k);
            gates(j, i) = 1.0 / (1.0 + std::exp(-(s * inv_sqrt_d + bias(j, 0))));
        }
    Matrix slots = matmul(gates, values);
    return matmul(slots, p.store.matrix("enc_wo"));
}

// Slot values read by the decoder, precomputed once per latent.
inline Matrix decoder_slot_values(const AutoencoderParameters& p, const Matrix& raw) {
    return matmul(raw, p.store.matrix("dec_wv"));
}

// One greedy decoder step: logits for the next token given the previous one.
inline Matrix decoder_logits_row(const AutoencoderParameters& p, const Matrix& slot_values,
                                 int prev_token, int position) {
    const auto& c = p.config;
    Matrix tok_emb = p.store.matrix("tok_emb");
    Matrix u(1, c.model_dim);
    for (int k = 0; k < c.model_dim; ++k) u(0, k) = tok_emb(prev_token, k) + p.pos_table(position, k);
    u = matmul(u, p.store.matrix("dec_wq"));

    Matrix scores = matmul(u, transpose(p.store.matrix("dec_slot_key")));
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.model_dim));
    double mx = -1e300, z = 0.0;
    for (double& s : scores.v) {
        s *= inv_sqrt_d;
        mx = std::max(mx, s);
    }
    for (double& s : scores.v) {
        s = std::exp(s - mx);
        z += s;
    }
    for (double& s : scores.v) s /= z;
    Matrix context = matmul(scores, slot_values);

    Matrix h(1, 2 * c.model_dim);
    for (int k = 0; k < c.model_dim; ++k) {
        h(0, k) = context(0, k);
        h(0, c.model_dim + k) = u(0, k);
    }
    Matrix h1 = matmul(h, p.store.matrix("dec_wh"));
    Matrix bh = p.store.matrix("dec_bh");
    for (int k = 0; k < h1.cols; ++k) h1(0, k) = std::tanh(h1(0, k) + bh(0, k));
    Matrix logits = matmul(h1, p.store.matrix("dec_wout"));
    Matrix bout = p.store.matrix("dec_bout");
    for (int k = 0; k < logits.cols; ++k) logits(0, k) += bout(0, k);
    return logits;
}

// Teacher-forced training graph for one example; returns the summed
// cross-entropy node. Mirrors encode_raw/decoder_logits_row op for op.
inline int sequence_loss_on_tape(Tape& tape, TapeBinding& bind, const AutoencoderParameters& p,
                                 const TokenSequence& w) {
    const auto& c = p.config;
    const int l = static_cast<int>(w.size());
    const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(c.model_dim));

    int tok_emb = bind.use("tok_emb");
    Matrix enc_pos(l, c.model_dim);
    for (int i = 0; i < l; ++i)
        for (int k = 0; k < c.model_dim; ++k) enc_pos(i, k) = p.pos_table(i, k);
    int pos_node = tape.leaf(enc_pos);
    int enc_in = tape.add(tape.gather_rows(tok_emb, std::vector<int>(w.begin(), w.end())), pos_node);
    int values = tape.matmul(enc_in, bind.use("enc_wv"));
    int scores = tape.scale_(tape.matmul(bind.use("enc_query"), tape.transpose_(pos_node)), inv_sqrt_d);
    int biased = tape.add(scores, tape.matmul(bind.use("enc_gate_bias"), tape.leaf(Matrix(1, l, 1.0))));
    int gates = tape.sigmoid_(biased);
    int slots = tape.matmul(gates, values);
    int latent = tape.matmul(slots, bind.use("enc_wo"));

    int slot_values = tape.matmul(latent, bind.use("dec_wv"));

    std::vector<int> inputs(l + 1), targets(l + 1);
    inputs[0] = c.vocab.bos;
    for (int i = 0; i < l; ++i) {
        inputs[i + 1] = w[i];
        targets[i] = w[i];
    }
    targets[l] = c.vocab.eos;

    Matrix dec_pos(l + 1, c.model_dim);
    for (int i = 0; i <= l; ++i)
        for (int k = 0; k < c.model_dim; ++k) dec_pos(i, k) = p.pos_table(i, k);
    int dec_in = tape.add(tape.gather_rows(tok_emb, inputs), tape.leaf(dec_pos));
    int u = tape.matmul(dec_in, bind.use("dec_wq"));
    int dscores = tape.scale_(tape.matmul(u, tape.transpose_(bind.use("dec_slot_key"))), inv_sqrt_d);
    int dattn = tape.softmax_rows(dscores);
    int context = tape.matmul(dattn, slot_values);
    int joined = tape.concat_cols(context, u);
    int h1 = tape.tanh_(tape.add_rowvec(tape.matmul(joined, bind.use("dec_wh")), bind.use("dec_bh")));
    int logits = tape.add_rowvec(tape.matmul(h1, bind.use("dec_wout")), bind.use("dec_bout"));
    return tape.cross_entropy_rows(logits, targets);
}

}  // namespace ae_detail

inline AutoencoderParameters init_autoencoder(const AutoencoderConfig& config) {
    config.validate();
    AutoencoderParameters p;
    p.config = config;
    ae_detail::init_parameters(p);
    return p;
}

// Normalized fixed-shape latent of a token sequence.
inline Matrix encode(const AutoencoderParameters& p, const TokenSequence& w) {
    if (!p.stats_fitted) throw state_error("encode: normalization statistics not fitted (untrained model)");
    validate_sequence(w, p.config.vocab, p.config.max_len);
    Matrix raw = ae_detail::encode_raw(p, w);
    Matrix mean = p.store.matrix("lat_mean");
    Matrix scl = p.store.matrix("lat_scale");
    for (size_t i = 0; i < raw.size(); ++i) raw.v[i] = (raw.v[i] - mean.v[i]) / scl.v[i];
    return raw;
}

// Greedy autoregressive decoding from bos until eos or max_len. The pad id is
// never emitted; eos is masked at the first position so the output is
// nonempty.
inline TokenSequence decode(const AutoencoderParameters& p, const Matrix& latent) {
    if (!p.stats_fitted) throw state_error("decode: normalization statistics not fitted (untrained model)");
    if (latent.rows != p.config.latent_len || latent.cols != p.config.latent_dim)
        throw input_error("decode: latent shape mismatch");
    if (!latent.all_finite()) throw input_error("decode: latent has non-finite entries");

    Matrix raw = latent;
    Matrix mean = p.store.matrix("lat_mean");
    Matrix scl = p.store.matrix("lat_scale");
    for (size_t i = 0; i < raw.size(); ++i) raw.v[i] = raw.v[i] * scl.v[i] + mean.v[i];

    Matrix slot_values = ae_detail::decoder_slot_values(p, raw);
    TokenSequence out;
    int prev = p.config.vocab.bos;
    for (int pos = 0; pos < p.config.max_len; ++pos) {
        Matrix logits = ae_detail::decoder_logits_row(p, slot_values, prev, pos);
        logits(0, p.config.vocab.pad) = -1e300;
        if (pos == 0) logits(0, p.config.vocab.eos) = -1e300;
        int best = 0;
        for (int k = 1; k < logits.cols; ++k)
            if (logits(0, k) > logits(0, best)) best = k;
        if (best == p.config.vocab.eos) break;
        out.push_back(best);
        prev = best;
    }
    return out;
}

struct TrainReport {
    std::vector<std::pair<int, double>> loss_trace;  // (iteration, mean token cross-entropy)
    double initial_loss = 0.0;
    double final_loss = 0.0;
};

inline TrainReport train_autoencoder(AutoencoderParameters& p, const Corpus& corpus) {
    const auto& c = p.config;
    if (corpus.empty()) throw training_error("train_autoencoder: empty corpus");
    for (const auto& ex : corpus) validate_sequence(ex.tokens, c.vocab, c.max_len);

    AdaptiveOptimizer opt(c.learning_rate, c.grad_clip);
    RngStream batch_rng = RngStream(c.seed).split("batches");
    TrainReport report;

    for (int iter = 0; iter < c.iterations; ++iter) {
        RngStream iter_rng = batch_rng.split(static_cast<uint64_t>(iter));
        p.store.zero_grad();
        double loss_sum = 0.0;
        long long token_count = 0;
        for (int b = 0; b < c.batch_size; ++b) {
            const auto& ex =
                corpus[static_cast<size_t>(iter_rng.uniform_int(0, static_cast<int>(corpus.size()) - 1))];
            Tape tape;
            TapeBinding bind(tape, p.store);
            int loss = ae_detail::sequence_loss_on_tape(tape, bind, p, ex.tokens);
            loss_sum += tape.val(loss)(0, 0);
            token_count += static_cast<long long>(ex.tokens.size()) + 1;
            tape.backward(loss);
            bind.pull_grads();
        }
        // Normalize gradients and the reported loss by the token count.
        double inv = 1.0 / static_cast<double>(token_count);
        for (auto& e : p.store.entries())
            for (double& g : e.g) g *= inv;
        double mean_loss = loss_sum * inv;
        if (!std::isfinite(mean_loss))
            throw training_error("train_autoencoder: non-finite loss at iteration " + std::to_string(iter));
        if (iter == 0) report.initial_loss = mean_loss;
        report.final_loss = mean_loss;
        if (iter % 25 == 0 || iter == c.iterations - 1) report.loss_trace.emplace_back(iter, mean_loss);
        opt.step(p.store);
    }

    if (!p.store.all_finite()) throw training_error("train_autoencoder: non-finite weights after training");
    if (report.final_loss >= report.initial_loss)
        throw training_error("train_autoencoder: loss did not decrease");

    // Fit per-entry normalization statistics over the training corpus.
    Matrix mean(c.latent_len, c.latent_dim), m2(c.latent_len, c.latent_dim);
    long long n = 0;
    for (const auto& ex : corpus) {
        Matrix raw = ae_detail::encode_raw(p, ex.tokens);
        ++n;
        for (size_t i = 0; i < raw.size(); ++i) {
            double delta = raw.v[i] - mean.v[i];
            mean.v[i] += delta / n;
            m2.v[i] += delta * (raw.v[i] - mean.v[i]);
        }
    }
    auto& me = p.store.at("lat_mean");
    auto& se = p.store.at("lat_scale");
    for (size_t i = 0; i < mean.size(); ++i) {
        me.w[i] = static_cast<float>(mean.v[i]);
        double var = n > 1 ? m2.v[i] / (n - 1) : 1.0;
        se.w[i] = static_cast<float>(std::max(std::sqrt(var), 1e-6));
    }
    p.stats_fitted = true;
    return report;
}

// Mean per-token reconstruction accuracy of greedy decode(encode(w)).
inline double reconstruction_accuracy(const AutoencoderParameters& p, const Corpus& corpus) {
    if (corpus.empty()) throw input_error("reconstruction_accuracy: empty corpus");
    double acc = 0.0;
    for (const auto& ex : corpus) {
        TokenSequence back = decode(p, encode(p, ex.tokens));
        size_t n = std::max(ex.tokens.size(), back.size());
        int mismatches = 0;
        for (size_t i = 0; i < n; ++i)
            if (i >= ex.tokens.size() || i >= back.size() || ex.tokens[i] != back[i]) ++mismatches;
        acc += 1.0 - static_cast<double>(mismatches) / static_cast<double>(n);
    }
    return acc / static_cast<double>(corpus.size());
}

}  // namespace editext
