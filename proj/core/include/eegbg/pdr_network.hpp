#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "eegbg/pdr_feature_map.hpp"

namespace eegbg {

// Batch of activation maps in channel-major layout: element (ch, (b*h+y)*w+x).
struct BatchTensor {
    int n = 0, h = 0, w = 0, c = 0;
    Eigen::MatrixXd m;  // c rows, n*h*w columns

    void resize(int n_, int h_, int w_, int c_) {
        n = n_;
        h = h_;
        w = w_;
        c = c_;
        m.setZero(c, static_cast<Eigen::Index>(n) * h * w);
    }
    Eigen::Index col(int b, int y, int x) const {
        return (static_cast<Eigen::Index>(b) * h + y) * w + x;
    }
};

struct ParamView {
    double* value;
    double* grad;
    Eigen::Index size;
};

// Deterministic uniform doubles in [0, 1) independent of the standard
// library's distribution implementation.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class Layer {
public:
    virtual ~Layer() = default;
    virtual BatchTensor forward(const BatchTensor& x, bool training) = 0;
    virtual BatchTensor backward(const BatchTensor& dy) = 0;
    virtual std::vector<ParamView> params() { return {}; }
    virtual std::string describe() const = 0;
};

// 3x3 same-padding convolution, stride 1, via im2col + GEMM.
class Conv2d : public Layer {
public:
    Conv2d(int in_channels, int out_channels, std::mt19937_64& init_rng);
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::vector<ParamView> params() override;
    std::string describe() const override;

    Eigen::MatrixXd weight;  // out_channels x in_channels*9
    Eigen::VectorXd bias;
    Eigen::MatrixXd weight_grad;
    Eigen::VectorXd bias_grad;

private:
    int in_c_, out_c_;
    BatchTensor cols_;  // cached im2col of the last forward input
    int in_h_ = 0, in_w_ = 0, in_n_ = 0;
};

// 2x2 stride-2 max pooling with ceil semantics: output dims are
// ceil(h/2) x ceil(w/2) and edge windows are clipped to the valid region.
class MaxPool2x2 : public Layer {
public:
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::string describe() const override { return "maxpool 2x2/2 (ceil)"; }

private:
    std::vector<Eigen::Index> argmax_;
    int in_n_ = 0, in_h_ = 0, in_w_ = 0, in_c_ = 0;
};

class Relu : public Layer {
public:
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::string describe() const override { return "relu"; }

private:
    Eigen::MatrixXd mask_;
};

// (h, w, c) -> feature column of length h*w*c, channel-major.
class Flatten : public Layer {
public:
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::string describe() const override { return "flatten"; }

private:
    int in_h_ = 0, in_w_ = 0, in_c_ = 0;
};

class Dense : public Layer {
public:
    Dense(int in_features, int out_features, std::mt19937_64& init_rng);
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::vector<ParamView> params() override;
    std::string describe() const override;

    Eigen::MatrixXd weight;  // out x in
    Eigen::VectorXd bias;
    Eigen::MatrixXd weight_grad;
    Eigen::VectorXd bias_grad;

private:
    Eigen::MatrixXd input_;
};

// Inverted dropout: active only during training, scales kept units by
// 1/(1-rate). Draws from the network's dropout RNG stream.
class Dropout : public Layer {
public:
    Dropout(double rate, std::mt19937_64* rng) : rate_(rate), rng_(rng) {}
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::string describe() const override;
    double rate() const { return rate_; }
    void bind_rng(std::mt19937_64* rng) { rng_ = rng; }

private:
    double rate_;
    std::mt19937_64* rng_;
    Eigen::MatrixXd mask_;
};

class Sigmoid : public Layer {
public:
    BatchTensor forward(const BatchTensor& x, bool training) override;
    BatchTensor backward(const BatchTensor& dy) override;
    std::string describe() const override { return "sigmoid"; }

private:
    Eigen::MatrixXd out_;
};

// Regression network mapping a 6x48x1 map to a sigmoid scalar.
//
// Layer-by-layer shapes of the full-size stack (ceil-mode pooling after the
// first three convolutions; the 6-row input cannot survive more pooling):
//   input    6 x 48 x   1
//   conv1    6 x 48 x  64   relu -> pool 3 x 24
//   conv2    3 x 24 x 128   relu -> pool 2 x 12
//   conv3    2 x 12 x 256   relu -> pool 1 x  6
//   conv4    1 x  6 x 512   relu
//   conv5    1 x  6 x 512   relu
//   flatten  3072
//   dense    64, relu
//   dropout  0.2
//   dense    1, sigmoid
class PdrNetwork {
public:
    PdrNetwork() = default;

    struct Spec {
        std::vector<int> conv_filters{64, 128, 256, 512, 512};
        // After which conv layers (0-based) a pool follows.
        std::vector<int> pool_after{0, 1, 2};
        int dense_units = 64;
        double dropout_rate = 0.2;
        int input_h = kPdrMapRows;
        int input_w = kPdrMapCols;
    };

    static PdrNetwork build(const Spec& spec, std::uint64_t seed);

    // Forward over a batch; returns the sigmoid outputs (one per item).
    Eigen::VectorXd forward(const BatchTensor& x, bool training);
    // Backprop from d(loss)/d(output); fills parameter gradients.
    void backward(const Eigen::VectorXd& dout);
    std::vector<ParamView> params();
    void zero_grads();

    double predict_unit(const PdrFeatureMap& map);  // single map, in (0, 1)

    const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
    std::uint64_t seed() const { return seed_; }
    std::mt19937_64& dropout_rng() { return *dropout_rng_; }

    void save(const std::string& path, const std::string& config_echo) const;
    static PdrNetwork load(const std::string& path, std::string* config_echo = nullptr);

    static BatchTensor to_batch(const std::vector<const PdrFeatureMap*>& maps);

private:
    std::vector<std::unique_ptr<Layer>> layers_;
    std::uint64_t seed_ = 0;
    // Heap-allocated so Dropout's bound pointer survives moves of the network.
    std::unique_ptr<std::mt19937_64> dropout_rng_;
    Spec spec_;
    BatchTensor last_out_;
};

// Hz prediction: denormalized sigmoid output, always inside (4, 12).
double predict_hz(PdrNetwork& net, const PdrFeatureMap& map);
// Ensemble prediction: arithmetic mean of member predictions.
double ensemble_predict_hz(std::vector<PdrNetwork>& members, const PdrFeatureMap& map);

}  // namespace eegbg
