#include <catch2/catch_amalgamated.hpp>

#include "editext/autodiff.hpp"
#include "editext/rng.hpp"

using namespace editext;

namespace {

// Central finite difference of a scalar graph output w.r.t. one input entry.
template <typename BuildFn>
double fd_grad(BuildFn build, Matrix input, int i, int j, double h = 1e-6) {
    Matrix up = input, down = input;
    up(i, j) += h;
    down(i, j) -= h;
    return (build(up) - build(down)) / (2.0 * h);
}

}  // namespace

TEST_CASE("tape gradients match finite differences on a composite graph") {
    RngStream rng(3);
    Matrix a = Matrix::standard_normal(3, 4, rng);
    Matrix b = Matrix::standard_normal(4, 2, rng);
    Matrix r = Matrix::standard_normal(1, 2, rng);

    auto eval = [&](const Matrix& am, const Matrix& bm, const Matrix& rm, Matrix* ga = nullptr,
                    Matrix* gb = nullptr, Matrix* gr = nullptr) {
        Tape tape;
        int an = tape.leaf(am), bn = tape.leaf(bm), rn = tape.leaf(rm);
        int mm = tape.matmul(an, bn);
        int shifted = tape.add_rowvec(mm, rn);
        int act = tape.tanh_(shifted);
        int soft = tape.softmax_rows(act);
        int joined = tape.concat_cols(act, soft);
        int loss = tape.sum_sq(joined);
        double value = tape.val(loss)(0, 0);
        if (ga) {
            tape.backward(loss);
            *ga = tape.grad(an);
            *gb = tape.grad(bn);
            *gr = tape.grad(rn);
        }
        return value;
    };

    Matrix ga, gb, gr;
    eval(a, b, r, &ga, &gb, &gr);

    for (auto [i, j] : {std::pair{0, 0}, {1, 2}, {2, 3}}) {
        double fd = fd_grad([&](const Matrix& m) { return eval(m, b, r); }, a, i, j);
        REQUIRE(ga(i, j) == Catch::Approx(fd).margin(1e-6));
    }
    for (auto [i, j] : {std::pair{0, 0}, {3, 1}}) {
        double fd = fd_grad([&](const Matrix& m) { return eval(a, m, r); }, b, i, j);
        REQUIRE(gb(i, j) == Catch::Approx(fd).margin(1e-6));
    }
    double fd = fd_grad([&](const Matrix& m) { return eval(a, b, m); }, r, 0, 1);
    REQUIRE(gr(0, 1) == Catch::Approx(fd).margin(1e-6));
}

TEST_CASE("gather_rows and cross_entropy_rows backprop correctly") {
    RngStream rng(5);
    Matrix table = Matrix::standard_normal(6, 3, rng);
    Matrix proj = Matrix::standard_normal(3, 5, rng);
    std::vector<int> idx = {1, 4, 1, 0};
    std::vector<int> targets = {2, 0, 4, 1};

    auto eval = [&](const Matrix& tb, const Matrix& pj, Matrix* gt = nullptr, Matrix* gp = nullptr) {
        Tape tape;
        int tn = tape.leaf(tb), pn = tape.leaf(pj);
        int rows = tape.gather_rows(tn, idx);
        int logits = tape.matmul(rows, pn);
        int loss = tape.cross_entropy_rows(logits, targets);
        double value = tape.val(loss)(0, 0);
        if (gt) {
            tape.backward(loss);
            *gt = tape.grad(tn);
            *gp = tape.grad(pn);
        }
        return value;
    };

    Matrix gt, gp;
    double base = eval(table, proj, &gt, &gp);
    REQUIRE(base > 0.0);

    // Row 1 is gathered twice; its gradient must be the accumulated one.
    for (auto [i, j] : {std::pair{1, 0}, {4, 2}, {0, 1}}) {
        double fd = fd_grad([&](const Matrix& m) { return eval(m, proj); }, table, i, j);
        REQUIRE(gt(i, j) == Catch::Approx(fd).margin(1e-6));
    }
    // Row 2 of the table is never gathered: zero gradient.
    REQUIRE(gt(2, 0) == 0.0);
    REQUIRE(gt(2, 1) == 0.0);

    for (auto [i, j] : {std::pair{0, 0}, {2, 4}}) {
        double fd = fd_grad([&](const Matrix& m) { return eval(table, m); }, proj, i, j);
        REQUIRE(gp(i, j) == Catch::Approx(fd).margin(1e-6));
    }
}

TEST_CASE("sub, scale, hadamard and transpose ops backprop correctly") {
    RngStream rng(7);
    Matrix a = Matrix::standard_normal(2, 3, rng);
    Matrix b = Matrix::standard_normal(2, 3, rng);

    auto eval = [&](const Matrix& am, const Matrix& bm, Matrix* ga = nullptr, Matrix* gb = nullptr) {
        Tape tape;
        int an = tape.leaf(am), bn = tape.leaf(bm);
        int d = tape.sub(an, tape.scale_(bn, 0.5));
        int h = tape.hadamard(d, tape.transpose_(tape.transpose_(bn)));
        int loss = tape.sum_sq(h);
        double value = tape.val(loss)(0, 0);
        if (ga) {
            tape.backward(loss);
            *ga = tape.grad(an);
            *gb = tape.grad(bn);
        }
        return value;
    };

    Matrix ga, gb;
    eval(a, b, &ga, &gb);
    for (auto [i, j] : {std::pair{0, 0}, {1, 2}}) {
        double fda = fd_grad([&](const Matrix& m) { return eval(m, b); }, a, i, j);
        double fdb = fd_grad([&](const Matrix& m) { return eval(a, m); }, b, i, j);
        REQUIRE(ga(i, j) == Catch::Approx(fda).margin(1e-6));
        REQUIRE(gb(i, j) == Catch::Approx(fdb).margin(1e-6));
    }
}
