#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "editext/autodiff.hpp"
#include "editext/errors.hpp"
#include "editext/matrix.hpp"
#include "editext/rng.hpp"

namespace editext {

// Named trainable tensors. Weights are stored as float32 (the checkpoint
// representation); all arithmetic on them happens in double. Gradient and
// optimizer buffers are double and are not persisted.
class ParameterStore {
  public:
    struct Entry {
        std::string name;
        int rows = 0;
        int cols = 0;
        std::vector<float> w;
        std::vector<double> g;
        std::vector<double> opt_v;  // adaptive second-moment accumulator
    };

    Entry& add(const std::string& name, int rows, int cols) {
        if (find(name) != nullptr) throw config_error("parameter already registered: " + name);
        entries_.push_back(Entry{name, rows, cols,
                                 std::vector<float>(static_cast<size_t>(rows) * cols, 0.0f),
                                 std::vector<double>(static_cast<size_t>(rows) * cols, 0.0),
                                 std::vector<double>(static_cast<size_t>(rows) * cols, 0.0)});
        return entries_.back();
    }

    Entry& add_normal(const std::string& name, int rows, int cols, double stddev, RngStream rng) {
        Entry& e = add(name, rows, cols);
        for (float& x : e.w) x = static_cast<float>(stddev * rng.normal());
        return e;
    }

    Entry* find(const std::string& name) {
        for (Entry& e : entries_)
            if (e.name == name) return &e;
        return nullptr;
    }
    const Entry* find(const std::string& name) const {
        for (const Entry& e : entries_)
            if (e.name == name) return &e;
        return nullptr;
    }

    Entry& at(const std::string& name) {
        Entry* e = find(name);
        if (!e) throw state_error("unknown parameter: " + name);
        return *e;
    }
    const Entry& at(const std::string& name) const {
        const Entry* e = find(name);
        if (!e) throw state_error("unknown parameter: " + name);
        return *e;
    }

    Matrix matrix(const std::string& name) const {
        const Entry& e = at(name);
        Matrix m(e.rows, e.cols);
        for (size_t i = 0; i < e.w.size(); ++i) m.v[i] = static_cast<double>(e.w[i]);
        return m;
    }

    std::vector<Entry>& entries() { return entries_; }
    const std::vector<Entry>& entries() const { return entries_; }

    size_t total_weights() const {
        size_t n = 0;
        for (const Entry& e : entries_) n += e.w.size();
        return n;
    }

    bool all_finite() const {
        for (const Entry& e : entries_)
            for (float x : e.w)
                if (!std::isfinite(x)) return false;
        return true;
    }

    void zero_grad() {
        for (Entry& e : entries_)
            for (double& g : e.g) g = 0.0;
    }

    // FNV-1a over the raw float32 weight bytes, in registration order.
    uint64_t checksum() const {
        uint64_t h = 0xcbf29ce484222325ULL;
        auto feed = [&h](const void* p, size_t n) {
            const unsigned char* b = static_cast<const unsigned char*>(p);
            for (size_t i = 0; i < n; ++i) {
                h ^= b[i];
                h *= 0x100000001b3ULL;
            }
        };
        for (const Entry& e : entries_) {
            feed(e.name.data(), e.name.size());
            feed(e.w.data(), e.w.size() * sizeof(float));
        }
        return h;
    }

  private:
    std::vector<Entry> entries_;
};

// Connects store entries to tape leaves for one forward/backward evaluation.
class TapeBinding {
  public:
    TapeBinding(Tape& tape, ParameterStore& store) : tape_(tape), store_(store) {}

    // Fetch a parameter as a tape leaf; repeated calls reuse the same node so
    // gradient contributions from shared weights accumulate on one leaf.
    int use(const std::string& name) {
        for (auto& [nm, node] : bound_)
            if (nm == name) return node;
        int node = tape_.leaf(store_.matrix(name));
        bound_.emplace_back(name, node);
        return node;
    }

    // Add tape gradients into the store's accumulators.
    void pull_grads() {
        for (auto& [name, node] : bound_) {
            auto& e = store_.at(name);
            const Matrix& g = tape_.grad(node);
            for (size_t i = 0; i < e.g.size(); ++i) e.g[i] += g.v[i];
        }
    }

  private:
    Tape& tape_;
    ParameterStore& store_;
    std::vector<std::pair<std::string, int>> bound_;
};

// Momentum-free adaptive optimizer: per-weight second-moment scaling with a
// global-norm gradient clip. Hyperparameters are fixed at construction and
// recorded in the run config.
class AdaptiveOptimizer {
  public:
    AdaptiveOptimizer(double lr, double clip_norm, double decay = 0.99, double eps = 1e-8)
        : lr_(lr), clip_(clip_norm), decay_(decay), eps_(eps) {}

    void step(ParameterStore& store) {
        double norm_sq = 0.0;
        for (auto& e : store.entries())
            for (double g : e.g) norm_sq += g * g;
        double scale = 1.0;
        double norm = std::sqrt(norm_sq);
        if (clip_ > 0.0 && norm > clip_) scale = clip_ / norm;

        for (auto& e : store.entries()) {
            for (size_t i = 0; i < e.w.size(); ++i) {
                double g = e.g[i] * scale;
                e.opt_v[i] = decay_ * e.opt_v[i] + (1.0 - decay_) * g * g;
                double upd = lr_ * g / (std::sqrt(e.opt_v[i]) + eps_);
                e.w[i] = static_cast<float>(static_cast<double>(e.w[i]) - upd);
            }
        }
    }

  private:
    double lr_;
    double clip_;
    double decay_;
    double eps_;
};

}  // namespace editext
