#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace metadesign::nn {

/// Activations are stored as (features, batch) with features laid out
/// channel-major: index = c*H*W + r*W + col.
using Matrix = Eigen::MatrixXd;

struct Shape {
    int channels = 1;
    int height = 1;
    int width = 1;
    int size() const { return channels * height * width; }
};

struct Param {
    std::string name;
    Matrix* value = nullptr;
    Matrix* grad = nullptr;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual std::string kind() const = 0;
    virtual Shape input_shape() const = 0;
    virtual Shape output_shape() const = 0;
    /// Caches what backward() needs.
    virtual Matrix forward(const Matrix& x) = 0;
    /// Accumulates parameter gradients and returns dL/dx.
    virtual Matrix backward(const Matrix& grad_out) = 0;
    virtual std::vector<Param> params() { return {}; }
    virtual void init(std::mt19937_64& /*rng*/) {}
};

class Dense final : public Layer {
public:
    Dense(int in, int out);
    std::string kind() const override { return "dense"; }
    Shape input_shape() const override { return {in_, 1, 1}; }
    Shape output_shape() const override { return {out_, 1, 1}; }
    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out) override;
    std::vector<Param> params() override;
    void init(std::mt19937_64& rng) override;

private:
    int in_, out_;
    Matrix w_, b_, dw_, db_, x_;
};

/// Square-kernel 2D convolution with zero padding.
class Conv2d final : public Layer {
public:
    Conv2d(Shape in, int out_channels, int kernel, int stride, int pad);
    std::string kind() const override { return "conv2d"; }
    Shape input_shape() const override { return in_; }
    Shape output_shape() const override { return out_; }
    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out) override;
    std::vector<Param> params() override;
    void init(std::mt19937_64& rng) override;

private:
    Shape in_, out_;
    int k_, stride_, pad_;
    Matrix w_, b_, dw_, db_;  // w_: (cin*k*k, cout)
    Matrix cols_;             // (batch*oh*ow, cin*k*k)
    Eigen::Index batch_ = 0;
};

/// Nearest-neighbour 2x upsampling followed by a crop to the requested size.
class Upsample final : public Layer {
public:
    Upsample(Shape in, int out_height, int out_width);
    std::string kind() const override { return "upsample"; }
    Shape input_shape() const override { return in_; }
    Shape output_shape() const override { return out_; }
    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out) override;

private:
    Shape in_, out_;
};

enum class ActivationKind { relu, tanh, sigmoid };

class Activation final : public Layer {
public:
    Activation(Shape s, ActivationKind kind) : shape_(s), kind_(kind) {}
    std::string kind() const override;
    Shape input_shape() const override { return shape_; }
    Shape output_shape() const override { return shape_; }
    Matrix forward(const Matrix& x) override;
    Matrix backward(const Matrix& grad_out) override;

private:
    Shape shape_;
    ActivationKind kind_;
    Matrix y_;
};

class Sequential {
public:
    void add(std::unique_ptr<Layer> layer);
    Matrix forward(const Matrix& x);
    Matrix backward(const Matrix& grad_out);
    std::vector<Param> params();
    void init(std::mt19937_64& rng);
    void zero_grad();
    std::size_t size() const { return layers_.size(); }
    Shape output_shape() const { return layers_.back()->output_shape(); }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

/// Per-parameter state for RMSprop or Adam.
class Optimizer {
public:
    enum class Kind { rmsprop, adam };
    Optimizer(Kind kind, double learning_rate);
    void step(std::vector<Param>& params);

private:
    Kind kind_;
    double lr_;
    long t_ = 0;
    std::vector<Matrix> m_, v_;
};

}  // namespace metadesign::nn
