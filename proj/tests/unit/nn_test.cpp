#include <doctest.h>

#include <functional>

#include "metadesign/error.hpp"
#include "metadesign/nn.hpp"

using namespace metadesign;
using nn::Matrix;

namespace {

// Checks d(sum(w .* f(x)))/dparam and d/dx against central differences.
void gradient_check(nn::Layer& layer, int batch, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    layer.init(rng);
    std::normal_distribution<double> g;
    Matrix x(layer.input_shape().size(), batch), w(layer.output_shape().size(), batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
    for (Eigen::Index i = 0; i < w.size(); ++i) w(i) = g(rng);
    auto objective = [&] { return layer.forward(x).cwiseProduct(w).sum(); };

    objective();
    for (auto& p : layer.params()) p.grad->setZero();
    const Matrix dx = layer.backward(w);
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double keep = x(i);
        x(i) = keep + h;
        const double up = objective();
        x(i) = keep - h;
        const double dn = objective();
        x(i) = keep;
        CHECK(dx(i) == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
    }
    for (auto& p : layer.params()) {
        for (Eigen::Index i = 0; i < p.value->size(); ++i) {
            const double keep = (*p.value)(i);
            (*p.value)(i) = keep + h;
            const double up = objective();
            (*p.value)(i) = keep - h;
            const double dn = objective();
            (*p.value)(i) = keep;
            CHECK((*p.grad)(i) == doctest::Approx((up - dn) / (2 * h)).epsilon(1e-6));
        }
    }
}

}  // namespace

TEST_CASE("dense layer gradients") {
    nn::Dense d(5, 3);
    gradient_check(d, 4, 1);
}

TEST_CASE("strided convolution gradients") {
    nn::Conv2d c({2, 7, 7}, 3, 3, 2, 1);
    CHECK(c.output_shape().height == 4);
    gradient_check(c, 2, 2);
}

TEST_CASE("unit-stride convolution gradients") {
    nn::Conv2d c({1, 5, 6}, 2, 3, 1, 1);
    CHECK(c.output_shape().width == 6);
    gradient_check(c, 3, 3);
}

TEST_CASE("upsample with crop gradients") {
    nn::Upsample u({2, 3, 3}, 5, 5);
    gradient_check(u, 2, 4);
}

TEST_CASE("activation gradients") {
    nn::Activation t({1, 4, 1}, nn::ActivationKind::tanh);
    gradient_check(t, 3, 5);
    nn::Activation s({1, 4, 1}, nn::ActivationKind::sigmoid);
    gradient_check(s, 3, 6);
}

TEST_CASE("convolution matches a direct sum") {
    nn::Conv2d c({1, 3, 3}, 1, 3, 1, 1);
    std::mt19937_64 rng(0);
    c.init(rng);
    auto params = c.params();
    Matrix& w = *params[0].value;
    Matrix& b = *params[1].value;
    w.setZero();
    w(4, 0) = 2.0;  // centre tap
    b(0) = 0.5;
    Matrix x(9, 1);
    for (int i = 0; i < 9; ++i) x(i) = i;
    const Matrix y = c.forward(x);
    for (int i = 0; i < 9; ++i) CHECK(y(i) == doctest::Approx(2.0 * i + 0.5));
}

TEST_CASE("optimizers decrease a quadratic") {
    for (auto kind : {nn::Optimizer::Kind::rmsprop, nn::Optimizer::Kind::adam}) {
        Matrix v = Matrix::Constant(3, 1, 2.0), gr(3, 1);
        std::vector<nn::Param> ps{{"v", &v, &gr}};
        nn::Optimizer opt(kind, 0.05);
        for (int it = 0; it < 400; ++it) {
            gr = 2.0 * v;
            opt.step(ps);
        }
        CHECK(v.norm() < 0.1);
    }
}
