#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "editext/errors.hpp"
#include "editext/matrix.hpp"

namespace editext {

// Reverse-mode tape over Matrix values. A tape is built per evaluation (one
// training example or one loss term), backward() runs the recorded closures
// in reverse creation order. Node handles are plain indices so closures can
// capture them by value without lifetime traps.
class Tape {
  public:
    int leaf(Matrix v) {
        nodes_.push_back(Node{std::move(v), Matrix(), nullptr});
        Node& n = nodes_.back();
        n.grad = Matrix(n.val.rows, n.val.cols);
        return static_cast<int>(nodes_.size()) - 1;
    }

    const Matrix& val(int i) const { return nodes_[i].val; }
    Matrix& grad(int i) { return nodes_[i].grad; }

    int matmul(int a, int b) {
        int out = leaf(editext::matmul(val(a), val(b)));
        record(out, [this, a, b, out] {
            const Matrix& g = nodes_[out].grad;
            accumulate(a, editext::matmul(g, transpose(val(b))));
            accumulate(b, editext::matmul(transpose(val(a)), g));
        });
        return out;
    }

    int add(int a, int b) {
        int out = leaf(editext::add(val(a), val(b)));
        record(out, [this, a, b, out] {
            accumulate(a, nodes_[out].grad);
            accumulate(b, nodes_[out].grad);
        });
        return out;
    }

    int sub(int a, int b) {
        int out = leaf(editext::sub(val(a), val(b)));
        record(out, [this, a, b, out] {
            accumulate(a, nodes_[out].grad);
            accumulate(b, scale(nodes_[out].grad, -1.0));
        });
        return out;
    }

    int scale_(int a, double s) {
        int out = leaf(editext::scale(val(a), s));
        record(out, [this, a, s, out] { accumulate(a, editext::scale(nodes_[out].grad, s)); });
        return out;
    }

    int hadamard(int a, int b) {
        int out = leaf(editext::hadamard(val(a), val(b)));
        record(out, [this, a, b, out] {
            accumulate(a, editext::hadamard(nodes_[out].grad, val(b)));
            accumulate(b, editext::hadamard(nodes_[out].grad, val(a)));
        });
        return out;
    }

    // Broadcast a 1xC row vector over all rows of a.
    int add_rowvec(int a, int rv) {
        const Matrix& m = val(a);
        const Matrix& r = val(rv);
        if (r.rows != 1 || r.cols != m.cols) throw input_error("add_rowvec: want 1x" + std::to_string(m.cols));
        Matrix out = m;
        for (int i = 0; i < out.rows; ++i)
            for (int j = 0; j < out.cols; ++j) out(i, j) += r(0, j);
        int o = leaf(std::move(out));
        record(o, [this, a, rv, o] {
            const Matrix& g = nodes_[o].grad;
            accumulate(a, g);
            Matrix rg(1, g.cols);
            for (int i = 0; i < g.rows; ++i)
                for (int j = 0; j < g.cols; ++j) rg(0, j) += g(i, j);
            accumulate(rv, rg);
        });
        return o;
    }

    int tanh_(int a) {
        Matrix out = val(a);
        for (double& x : out.v) x = std::tanh(x);
        int o = leaf(std::move(out));
        record(o, [this, a, o] {
            const Matrix& y = nodes_[o].val;
            const Matrix& g = nodes_[o].grad;
            Matrix d = g;
            for (size_t i = 0; i < d.size(); ++i) d.v[i] *= 1.0 - y.v[i] * y.v[i];
            accumulate(a, d);
        });
        return o;
    }

    int sigmoid_(int a) {
        Matrix out = val(a);
        for (double& x : out.v) x = 1.0 / (1.0 + std::exp(-x));
        int o = leaf(std::move(out));
        record(o, [this, a, o] {
            const Matrix& y = nodes_[o].val;
            const Matrix& g = nodes_[o].grad;
            Matrix d = g;
            for (size_t i = 0; i < d.size(); ++i) d.v[i] *= y.v[i] * (1.0 - y.v[i]);
            accumulate(a, d);
        });
        return o;
    }

    int concat_cols(int a, int b) {
        const Matrix& ma = val(a);
        const Matrix& mb = val(b);
        if (ma.rows != mb.rows) throw input_error("concat_cols: row mismatch");
        Matrix out(ma.rows, ma.cols + mb.cols);
        for (int i = 0; i < ma.rows; ++i) {
            for (int j = 0; j < ma.cols; ++j) out(i, j) = ma(i, j);
            for (int j = 0; j < mb.cols; ++j) out(i, ma.cols + j) = mb(i, j);
        }
        int o = leaf(std::move(out));
        int acols = ma.cols;
        record(o, [this, a, b, o, acols] {
            const Matrix& g = nodes_[o].grad;
            Matrix ga(g.rows, acols), gb(g.rows, g.cols - acols);
            for (int i = 0; i < g.rows; ++i) {
                for (int j = 0; j < acols; ++j) ga(i, j) = g(i, j);
                for (int j = 0; j < gb.cols; ++j) gb(i, j) = g(i, acols + j);
            }
            accumulate(a, ga);
            accumulate(b, gb);
        });
        return o;
    }

    // Row gather (embedding lookup). Backward scatter-adds into the table.
    int gather_rows(int table, std::vector<int> idx) {
        const Matrix& t = val(table);
        Matrix out(static_cast<int>(idx.size()), t.cols);
        for (size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] < 0 || idx[i] >= t.rows) throw input_error("gather_rows: index out of range");
            for (int j = 0; j < t.cols; ++j) out(static_cast<int>(i), j) = t(idx[i], j);
        }
        int o = leaf(std::move(out));
        record(o, [this, table, o, idx = std::move(idx)] {
            const Matrix& g = nodes_[o].grad;
            Matrix& tg = nodes_[table].grad;
            for (size_t i = 0; i < idx.size(); ++i)
                for (int j = 0; j < g.cols; ++j) tg(idx[i], j) += g(static_cast<int>(i), j);
        });
        return o;
    }

    int transpose_(int a) {
        int o = leaf(editext::transpose(val(a)));
        record(o, [this, a, o] { accumulate(a, editext::transpose(nodes_[o].grad)); });
        return o;
    }

    int softmax_rows(int a) {
        Matrix out = val(a);
        for (int i = 0; i < out.rows; ++i) {
            double mx = out(i, 0);
            for (int j = 1; j < out.cols; ++j) mx = std::max(mx, out(i, j));
            double z = 0.0;
            for (int j = 0; j < out.cols; ++j) {
                out(i, j) = std::exp(out(i, j) - mx);
                z += out(i, j);
            }
            for (int j = 0; j < out.cols; ++j) out(i, j) /= z;
        }
        int o = leaf(std::move(out));
        record(o, [this, a, o] {
            const Matrix& y = nodes_[o].val;
            const Matrix& g = nodes_[o].grad;
            Matrix d(y.rows, y.cols);
            for (int i = 0; i < y.rows; ++i) {
                double dot = 0.0;
                for (int j = 0; j < y.cols; ++j) dot += g(i, j) * y(i, j);
                for (int j = 0; j < y.cols; ++j) d(i, j) = y(i, j) * (g(i, j) - dot);
            }
            accumulate(a, d);
        });
        return o;
    }

    // Sum of squared entries -> 1x1.
    int sum_sq(int a) {
        Matrix out(1, 1);
        out(0, 0) = frob_sq(val(a));
        int o = leaf(std::move(out));
        record(o, [this, a, o] {
            double g = nodes_[o].grad(0, 0);
            accumulate(a, editext::scale(val(a), 2.0 * g));
        });
        return o;
    }

    // Summed cross-entropy of row-wise logits against integer targets -> 1x1.
    int cross_entropy_rows(int logits, std::vector<int> targets) {
        const Matrix& lg = val(logits);
        if (static_cast<int>(targets.size()) != lg.rows)
            throw input_error("cross_entropy_rows: target count mismatch");
        Matrix probs = lg;
        double loss = 0.0;
        for (int i = 0; i < lg.rows; ++i) {
            double mx = probs(i, 0);
            for (int j = 1; j < lg.cols; ++j) mx = std::max(mx, probs(i, j));
            double z = 0.0;
            for (int j = 0; j < lg.cols; ++j) {
                probs(i, j) = std::exp(probs(i, j) - mx);
                z += probs(i, j);
            }
            for (int j = 0; j < lg.cols; ++j) probs(i, j) /= z;
            loss -= std::log(std::max(probs(i, targets[i]), 1e-300));
        }
        Matrix out(1, 1);
        out(0, 0) = loss;
        int o = leaf(std::move(out));
        record(o, [this, logits, o, probs = std::move(probs), targets = std::move(targets)] {
            double g = nodes_[o].grad(0, 0);
            Matrix d = probs;
            for (size_t i = 0; i < targets.size(); ++i) d(static_cast<int>(i), targets[i]) -= 1.0;
            accumulate(logits, editext::scale(d, g));
        });
        return o;
    }

    void backward(int node) {
        Matrix& g = nodes_[node].grad;
        if (g.rows != 1 || g.cols != 1) throw input_error("backward: seed node must be 1x1");
        g(0, 0) = 1.0;
        for (int i = node; i >= 0; --i)
            if (nodes_[i].back) nodes_[i].back();
    }

  private:
    struct Node {
        Matrix val;
        Matrix grad;
        std::function<void()> back;
    };

    void record(int node, std::function<void()> fn) { nodes_[node].back = std::move(fn); }

    void accumulate(int node, const Matrix& g) {
        Matrix& dst = nodes_[node].grad;
        require_same_shape(dst, g, "grad accumulate");
        for (size_t i = 0; i < dst.size(); ++i) dst.v[i] += g.v[i];
    }

    std::vector<Node> nodes_;
};

}  // namespace editext
