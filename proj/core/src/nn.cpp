#include "metadesign/nn.hpp"

#include <cmath>

#include "metadesign/error.hpp"

namespace metadesign::nn {

namespace {

void fill_normal(Matrix& m, double stddev, std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, stddev);
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
}

}  // namespace

Dense::Dense(int in, int out)
    : in_(in), out_(out), w_(Matrix::Zero(out, in)), b_(Matrix::Zero(out, 1)), dw_(Matrix::Zero(out, in)),
      db_(Matrix::Zero(out, 1)) {
    if (in < 1 || out < 1) throw DimensionError("dense layer needs positive sizes");
}

Matrix Dense::forward(const Matrix& x) {
    if (x.rows() != in_) throw DimensionError("dense layer input size mismatch");
    x_ = x;
    Matrix y = w_ * x;
    y.colwise() += b_.col(0);
    return y;
}

Matrix Dense::backward(const Matrix& g) {
    dw_.noalias() += g * x_.transpose();
    db_ += g.rowwise().sum();
    return w_.transpose() * g;
}

std::vector<Param> Dense::params() { return {{"weight", &w_, &dw_}, {"bias", &b_, &db_}}; }

void Dense::init(std::mt19937_64& rng) {
    fill_normal(w_, std::sqrt(2.0 / (in_ + out_)), rng);
    b_.setZero();
}

Conv2d::Conv2d(Shape in, int out_channels, int kernel, int stride, int pad)
    : in_(in), k_(kernel), stride_(stride), pad_(pad) {
    if (kernel < 1 || stride < 1 || pad < 0 || out_channels < 1) throw DimensionError("invalid convolution geometry");
    out_.channels = out_channels;
    out_.height = (in.height + 2 * pad - kernel) / stride + 1;
    out_.width = (in.width + 2 * pad - kernel) / stride + 1;
    if (out_.height < 1 || out_.width < 1) throw DimensionError("convolution output is empty");
    const int kk = in.channels * kernel * kernel;
    w_ = Matrix::Zero(kk, out_channels);
    dw_ = Matrix::Zero(kk, out_channels);
    b_ = Matrix::Zero(1, out_channels);
    db_ = Matrix::Zero(1, out_channels);
}

Matrix Conv2d::forward(const Matrix& x) {
    if (x.rows() != in_.size()) throw DimensionError("convolution input size mismatch");
    batch_ = x.cols();
    const int p = out_.height * out_.width, kk = static_cast<int>(w_.rows());
    const int hw = in_.height * in_.width;
    cols_.setZero(batch_ * p, kk);
    for (Eigen::Index s = 0; s < batch_; ++s) {
        const double* src = x.col(s).data();
        for (int ci = 0; ci < in_.channels; ++ci)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    const int col = (ci * k_ + ki) * k_ + kj;
                    double* dst = cols_.col(col).data() + s * p;
                    for (int orow = 0; orow < out_.height; ++orow) {
                        const int r = orow * stride_ - pad_ + ki;
                        if (r < 0 || r >= in_.height) continue;
                        for (int ocol = 0; ocol < out_.width; ++ocol) {
                            const int c = ocol * stride_ - pad_ + kj;
                            if (c < 0 || c >= in_.width) continue;
                            dst[orow * out_.width + ocol] = src[ci * hw + r * in_.width + c];
                        }
                    }
                }
    }
    Matrix y_all = cols_ * w_;
    y_all.rowwise() += b_.row(0);
    Matrix y(out_.size(), batch_);
    for (Eigen::Index s = 0; s < batch_; ++s)
        for (int co = 0; co < out_.channels; ++co)
            y.col(s).segment(co * p, p) = y_all.col(co).segment(s * p, p);
    return y;
}

Matrix Conv2d::backward(const Matrix& g) {
    const int p = out_.height * out_.width;
    const int hw = in_.height * in_.width;
    Matrix g_all(batch_ * p, out_.channels);
    for (Eigen::Index s = 0; s < batch_; ++s)
        for (int co = 0; co < out_.channels; ++co) g_all.col(co).segment(s * p, p) = g.col(s).segment(co * p, p);
    dw_.noalias() += cols_.transpose() * g_all;
    db_ += g_all.colwise().sum();
    const Matrix dcols = g_all * w_.transpose();
    Matrix dx = Matrix::Zero(in_.size(), batch_);
    for (Eigen::Index s = 0; s < batch_; ++s) {
        double* dst = dx.col(s).data();
        for (int ci = 0; ci < in_.channels; ++ci)
            for (int ki = 0; ki < k_; ++ki)
                for (int kj = 0; kj < k_; ++kj) {
                    const int col = (ci * k_ + ki) * k_ + kj;
                    const double* src = dcols.col(col).data() + s * p;
                    for (int orow = 0; orow < out_.height; ++orow) {
                        const int r = orow * stride_ - pad_ + ki;
                        if (r < 0 || r >= in_.height) continue;
                        for (int ocol = 0; ocol < out_.width; ++ocol) {
                            const int c = ocol * stride_ - pad_ + kj;
                            if (c < 0 || c >= in_.width) continue;
                            dst[ci * hw + r * in_.width + c] += src[orow * out_.width + ocol];
                        }
                    }
                }
    }
    return dx;
}

std::vector<Param> Conv2d::params() { return {{"weight", &w_, &dw_}, {"bias", &b_, &db_}}; }

void Conv2d::init(std::mt19937_64& rng) {
    fill_normal(w_, std::sqrt(2.0 / static_cast<double>(w_.rows())), rng);
    b_.setZero();
}

Upsample::Upsample(Shape in, int out_height, int out_width) : in_(in), out_{in.channels, out_height, out_width} {
    if (out_height > 2 * in.height || out_width > 2 * in.width || out_height < 1 || out_width < 1)
        throw DimensionError("upsample target larger than twice the input");
}

Matrix Upsample::forward(const Matrix& x) {
    if (x.rows() != in_.size()) throw DimensionError("upsample input size mismatch");
    Matrix y(out_.size(), x.cols());
    const int ihw = in_.height * in_.width, ohw = out_.height * out_.width;
    for (Eigen::Index s = 0; s < x.cols(); ++s)
        for (int c = 0; c < out_.channels; ++c)
            for (int r = 0; r < out_.height; ++r)
                for (int q = 0; q < out_.width; ++q)
                    y(c * ohw + r * out_.width + q, s) = x(c * ihw + (r / 2) * in_.width + q / 2, s);
    return y;
}

Matrix Upsample::backward(const Matrix& g) {
    Matrix dx = Matrix::Zero(in_.size(), g.cols());
    const int ihw = in_.height * in_.width, ohw = out_.height * out_.width;
    for (Eigen::Index s = 0; s < g.cols(); ++s)
        for (int c = 0; c < out_.channels; ++c)
            for (int r = 0; r < out_.height; ++r)
                for (int q = 0; q < out_.width; ++q)
                    dx(c * ihw + (r / 2) * in_.width + q / 2, s) += g(c * ohw + r * out_.width + q, s);
    return dx;
}

std::string Activation::kind() const {
    switch (kind_) {
        case ActivationKind::relu: return "relu";
        case ActivationKind::tanh: return "tanh";
        case ActivationKind::sigmoid: return "sigmoid";
    }
    return "?";
}

Matrix Activation::forward(const Matrix& x) {
    switch (kind_) {
        case ActivationKind::relu: y_ = x.cwiseMax(0.0); break;
        case ActivationKind::tanh: y_ = x.array().tanh().matrix(); break;
        case ActivationKind::sigmoid: y_ = (1.0 / (1.0 + (-x.array()).exp())).matrix(); break;
    }
    return y_;
}

Matrix Activation::backward(const Matrix& g) {
    switch (kind_) {
        case ActivationKind::relu: return (y_.array() > 0.0).select(g, 0.0);
        case ActivationKind::tanh: return (g.array() * (1.0 - y_.array().square())).matrix();
        case ActivationKind::sigmoid: return (g.array() * y_.array() * (1.0 - y_.array())).matrix();
    }
    return g;
}

void Sequential::add(std::unique_ptr<Layer> layer) {
    if (!layers_.empty() && layers_.back()->output_shape().size() != layer->input_shape().size())
        throw DimensionError("layer sizes do not chain");
    layers_.push_back(std::move(layer));
}

Matrix Sequential::forward(const Matrix& x) {
    Matrix h = x;
    for (auto& l : layers_) h = l->forward(h);
    return h;
}

Matrix Sequential::backward(const Matrix& g) {
    Matrix d = g;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) d = (*it)->backward(d);
    return d;
}

std::vector<Param> Sequential::params() {
    std::vector<Param> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto p : layers_[i]->params()) {
            p.name = std::to_string(i) + "." + layers_[i]->kind() + "." + p.name;
            out.push_back(p);
        }
    return out;
}

void Sequential::init(std::mt19937_64& rng) {
    for (auto& l : layers_) l->init(rng);
}

void Sequential::zero_grad() {
    for (auto& p : params()) p.grad->setZero();
}

Optimizer::Optimizer(Kind kind, double learning_rate) : kind_(kind), lr_(learning_rate) {
    if (!(learning_rate > 0.0)) throw DomainError("learning rate must be positive");
}

void Optimizer::step(std::vector<Param>& params) {
    if (m_.empty()) {
        for (auto& p : params) {
            m_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
            v_.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
        }
    }
    if (m_.size() != params.size()) throw DimensionError("optimizer state does not match parameters");
    ++t_;
    const double eps = 1e-8;
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = params[i].grad->array();
        auto w = params[i].value->array();
        if (kind_ == Kind::rmsprop) {
            v_[i].array() = 0.9 * v_[i].array() + 0.1 * g.square();
            w -= lr_ * g / (v_[i].array().sqrt() + eps);
        } else {
            m_[i].array() = 0.9 * m_[i].array() + 0.1 * g;
            v_[i].array() = 0.999 * v_[i].array() + 0.001 * g.square();
            const double c1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
            const double c2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
            w -= lr_ * (m_[i].array() / c1) / ((v_[i].array() / c2).sqrt() + eps);
        }
    }
}

}  // namespace metadesign::nn
