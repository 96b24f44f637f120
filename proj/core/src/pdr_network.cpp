#include "eegbg/pdr_network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>

#include "eegbg/errors.hpp"

namespace eegbg {

namespace {

constexpr std::uint64_t kDropoutSeedSalt = 0xD1B54A32D192ED03ull;
constexpr char kModelMagic[8] = {'E', 'E', 'G', 'P', 'D', 'R', 'M', '1'};

double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

void write_u32(std::ostream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
}
std::uint32_t read_u32(std::istream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}

}  // namespace

// ---------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_channels, int out_channels, std::mt19937_64& init_rng)
    : in_c_(in_channels), out_c_(out_channels) {
    const int k = in_channels * 9;
    weight.resize(out_channels, k);
    bias.setZero(out_channels);
    weight_grad.setZero(out_channels, k);
    bias_grad.setZero(out_channels);
    // Fan-in scaled uniform init; draw order is row-major for determinism.
    const double limit = std::sqrt(6.0 / k);
    for (int o = 0; o < out_channels; ++o)
        for (int i = 0; i < k; ++i) weight(o, i) = uniform_in(init_rng, -limit, limit);
}

BatchTensor Conv2d::forward(const BatchTensor& x, bool) {
    if (x.c != in_c_) throw DomainError("conv: unexpected input channel count");
    in_n_ = x.n;
    in_h_ = x.h;
    in_w_ = x.w;
    cols_.resize(x.n, x.h, x.w, in_c_ * 9);

    // im2col with zero padding 1: row block = kernel position, inner = input
    // channel.
    for (int b = 0; b < x.n; ++b) {
        for (int y = 0; y < x.h; ++y) {
            for (int xx = 0; xx < x.w; ++xx) {
                const Eigen::Index col = x.col(b, y, xx);
                for (int ky = -1; ky <= 1; ++ky) {
                    const int sy = y + ky;
                    for (int kx = -1; kx <= 1; ++kx) {
                        const int sx = xx + kx;
                        const int kpos = (ky + 1) * 3 + (kx + 1);
                        const bool inside = sy >= 0 && sy < x.h && sx >= 0 && sx < x.w;
                        for (int c = 0; c < in_c_; ++c) {
                            cols_.m(static_cast<Eigen::Index>(kpos) * in_c_ + c, col) =
                                inside ? x.m(c, x.col(b, sy, sx)) : 0.0;
                        }
                    }
                }
            }
        }
    }

    BatchTensor y;
    y.resize(x.n, x.h, x.w, out_c_);
    y.m.noalias() = weight * cols_.m;
    y.m.colwise() += bias;
    return y;
}

BatchTensor Conv2d::backward(const BatchTensor& dy) {
    weight_grad.noalias() += dy.m * cols_.m.transpose();
    bias_grad.noalias() += dy.m.rowwise().sum();

    Eigen::MatrixXd dcols = weight.transpose() * dy.m;

    BatchTensor dx;
    dx.resize(in_n_, in_h_, in_w_, in_c_);
    for (int b = 0; b < in_n_; ++b) {
        for (int y = 0; y < in_h_; ++y) {
            for (int xx = 0; xx < in_w_; ++xx) {
                const Eigen::Index col = dx.col(b, y, xx);
                for (int ky = -1; ky <= 1; ++ky) {
                    const int sy = y + ky;
                    if (sy < 0 || sy >= in_h_) continue;
                    for (int kx = -1; kx <= 1; ++kx) {
                        const int sx = xx + kx;
                        if (sx < 0 || sx >= in_w_) continue;
                        const int kpos = (ky + 1) * 3 + (kx + 1);
                        const Eigen::Index src = dx.col(b, sy, sx);
                        for (int c = 0; c < in_c_; ++c)
                            dx.m(c, src) +=
                                dcols(static_cast<Eigen::Index>(kpos) * in_c_ + c, col);
                    }
                }
            }
        }
    }
    return dx;
}

std::vector<ParamView> Conv2d::params() {
    return {{weight.data(), weight_grad.data(), weight.size()},
            {bias.data(), bias_grad.data(), bias.size()}};
}

std::string Conv2d::describe() const {
    return "conv 3x3 same, " + std::to_string(out_c_) + " filters";
}

// ------------------------------------------------------------ MaxPool2x2

BatchTensor MaxPool2x2::forward(const BatchTensor& x, bool) {
    in_n_ = x.n;
    in_h_ = x.h;
    in_w_ = x.w;
    in_c_ = x.c;
    const int oh = (x.h + 1) / 2, ow = (x.w + 1) / 2;
    BatchTensor y;
    y.resize(x.n, oh, ow, x.c);
    argmax_.assign(static_cast<std::size_t>(x.c) * x.n * oh * ow, 0);

    for (int b = 0; b < x.n; ++b) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                const Eigen::Index out_col = y.col(b, oy, ox);
                for (int c = 0; c < x.c; ++c) {
                    double best = -std::numeric_limits<double>::infinity();
                    Eigen::Index best_col = 0;
                    for (int dy = 0; dy < 2; ++dy) {
                        const int sy = 2 * oy + dy;
                        if (sy >= x.h) break;
                        for (int dx = 0; dx < 2; ++dx) {
                            const int sx = 2 * ox + dx;
                            if (sx >= x.w) break;
                            const Eigen::Index col = x.col(b, sy, sx);
                            if (x.m(c, col) > best) {
                                best = x.m(c, col);
                                best_col = col;
                            }
                        }
                    }
                    y.m(c, out_col) = best;
                    argmax_[static_cast<std::size_t>(c) * (static_cast<std::size_t>(x.n) * oh * ow) +
                            static_cast<std::size_t>(out_col)] = best_col;
                }
            }
        }
    }
    return y;
}

BatchTensor MaxPool2x2::backward(const BatchTensor& dy) {
    BatchTensor dx;
    dx.resize(in_n_, in_h_, in_w_, in_c_);
    const std::size_t out_cols = static_cast<std::size_t>(dy.n) * dy.h * dy.w;
    for (int c = 0; c < in_c_; ++c)
        for (std::size_t col = 0; col < out_cols; ++col)
            dx.m(c, argmax_[static_cast<std::size_t>(c) * out_cols + col]) +=
                dy.m(c, static_cast<Eigen::Index>(col));
    return dx;
}

// ------------------------------------------------------------------ Relu

BatchTensor Relu::forward(const BatchTensor& x, bool) {
    mask_ = (x.m.array() > 0.0).cast<double>();
    BatchTensor y = x;
    y.m = x.m.cwiseProduct(mask_);
    return y;
}

BatchTensor Relu::backward(const BatchTensor& dy) {
    BatchTensor dx = dy;
    dx.m = dy.m.cwiseProduct(mask_);
    return dx;
}

// --------------------------------------------------------------- Flatten

BatchTensor Flatten::forward(const BatchTensor& x, bool) {
    in_h_ = x.h;
    in_w_ = x.w;
    in_c_ = x.c;
    const int hw = x.h * x.w;
    BatchTensor y;
    y.resize(x.n, 1, 1, x.c * hw);
    for (int b = 0; b < x.n; ++b)
        for (int c = 0; c < x.c; ++c)
            for (int s = 0; s < hw; ++s)
                y.m(static_cast<Eigen::Index>(c) * hw + s, b) =
                    x.m(c, static_cast<Eigen::Index>(b) * hw + s);
    return y;
}

BatchTensor Flatten::backward(const BatchTensor& dy) {
    const int hw = in_h_ * in_w_;
    BatchTensor dx;
    dx.resize(dy.n, in_h_, in_w_, in_c_);
    for (int b = 0; b < dy.n; ++b)
        for (int c = 0; c < in_c_; ++c)
            for (int s = 0; s < hw; ++s)
                dx.m(c, static_cast<Eigen::Index>(b) * hw + s) =
                    dy.m(static_cast<Eigen::Index>(c) * hw + s, b);
    return dx;
}

// ----------------------------------------------------------------- Dense

Dense::Dense(int in_features, int out_features, std::mt19937_64& init_rng) {
    weight.resize(out_features, in_features);
    bias.setZero(out_features);
    weight_grad.setZero(out_features, in_features);
    bias_grad.setZero(out_features);
    const double limit = std::sqrt(6.0 / in_features);
    for (int o = 0; o < out_features; ++o)
        for (int i = 0; i < in_features; ++i) weight(o, i) = uniform_in(init_rng, -limit, limit);
}

BatchTensor Dense::forward(const BatchTensor& x, bool) {
    if (x.m.rows() != weight.cols()) throw DomainError("dense: unexpected input size");
    input_ = x.m;
    BatchTensor y;
    y.resize(x.n, 1, 1, static_cast<int>(weight.rows()));
    y.m.noalias() = weight * x.m;
    y.m.colwise() += bias;
    return y;
}

BatchTensor Dense::backward(const BatchTensor& dy) {
    weight_grad.noalias() += dy.m * input_.transpose();
    bias_grad.noalias() += dy.m.rowwise().sum();
    BatchTensor dx;
    dx.resize(dy.n, 1, 1, static_cast<int>(weight.cols()));
    dx.m.noalias() = weight.transpose() * dy.m;
    return dx;
}

std::vector<ParamView> Dense::params() {
    return {{weight.data(), weight_grad.data(), weight.size()},
            {bias.data(), bias_grad.data(), bias.size()}};
}

std::string Dense::describe() const {
    return "dense " + std::to_string(weight.rows());
}

// --------------------------------------------------------------- Dropout

BatchTensor Dropout::forward(const BatchTensor& x, bool training) {
    if (!training || rate_ <= 0.0) {
        mask_.resize(0, 0);
        return x;
    }
    mask_.resize(x.m.rows(), x.m.cols());
    const double keep = 1.0 - rate_;
    for (Eigen::Index col = 0; col < x.m.cols(); ++col)
        for (Eigen::Index row = 0; row < x.m.rows(); ++row)
            mask_(row, col) = uniform_unit(*rng_) < keep ? 1.0 / keep : 0.0;
    BatchTensor y = x;
    y.m = x.m.cwiseProduct(mask_);
    return y;
}

BatchTensor Dropout::backward(const BatchTensor& dy) {
    BatchTensor dx = dy;
    if (mask_.size() > 0) dx.m = dy.m.cwiseProduct(mask_);
    return dx;
}

std::string Dropout::describe() const {
    return "dropout " + std::to_string(rate_);
}

// --------------------------------------------------------------- Sigmoid

BatchTensor Sigmoid::forward(const BatchTensor& x, bool) {
    out_ = (1.0 / (1.0 + (-x.m.array()).exp())).matrix();
    BatchTensor y = x;
    y.m = out_;
    return y;
}

BatchTensor Sigmoid::backward(const BatchTensor& dy) {
    BatchTensor dx = dy;
    dx.m = dy.m.cwiseProduct(out_.cwiseProduct((1.0 - out_.array()).matrix()));
    return dx;
}

// ------------------------------------------------------------ PdrNetwork

PdrNetwork PdrNetwork::build(const Spec& spec, std::uint64_t seed) {
    PdrNetwork net;
    net.seed_ = seed;
    net.spec_ = spec;
    net.dropout_rng_ = std::make_unique<std::mt19937_64>(seed ^ kDropoutSeedSalt);
    std::mt19937_64 init_rng(seed);

    int h = spec.input_h, w = spec.input_w, c = 1;
    for (std::size_t i = 0; i < spec.conv_filters.size(); ++i) {
        net.layers_.push_back(std::make_unique<Conv2d>(c, spec.conv_filters[i], init_rng));
        c = spec.conv_filters[i];
        net.layers_.push_back(std::make_unique<Relu>());
        if (std::find(spec.pool_after.begin(), spec.pool_after.end(), static_cast<int>(i)) !=
            spec.pool_after.end()) {
            net.layers_.push_back(std::make_unique<MaxPool2x2>());
            h = (h + 1) / 2;
            w = (w + 1) / 2;
        }
    }
    net.layers_.push_back(std::make_unique<Flatten>());
    const int flat = h * w * c;
    net.layers_.push_back(std::make_unique<Dense>(flat, spec.dense_units, init_rng));
    net.layers_.push_back(std::make_unique<Relu>());
    net.layers_.push_back(std::make_unique<Dropout>(spec.dropout_rate, net.dropout_rng_.get()));
    net.layers_.push_back(std::make_unique<Dense>(spec.dense_units, 1, init_rng));
    net.layers_.push_back(std::make_unique<Sigmoid>());
    return net;
}

Eigen::VectorXd PdrNetwork::forward(const BatchTensor& x, bool training) {
    BatchTensor a = x;
    for (auto& layer : layers_) a = layer->forward(a, training);
    last_out_ = a;
    return a.m.row(0).transpose();
}

void PdrNetwork::backward(const Eigen::VectorXd& dout) {
    BatchTensor dy = last_out_;
    dy.m = dout.transpose();
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) dy = (*it)->backward(dy);
}

std::vector<ParamView> PdrNetwork::params() {
    std::vector<ParamView> out;
    for (auto& layer : layers_)
        for (auto& p : layer->params()) out.push_back(p);
    return out;
}

void PdrNetwork::zero_grads() {
    for (auto& p : params()) std::memset(p.grad, 0, sizeof(double) * static_cast<std::size_t>(p.size));
}

BatchTensor PdrNetwork::to_batch(const std::vector<const PdrFeatureMap*>& maps) {
    if (maps.empty()) throw DomainError("to_batch: empty batch");
    BatchTensor x;
    const int h = static_cast<int>(maps[0]->values.size());
    const int w = static_cast<int>(maps[0]->values.front().size());
    x.resize(static_cast<int>(maps.size()), h, w, 1);
    for (std::size_t b = 0; b < maps.size(); ++b)
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                x.m(0, x.col(static_cast<int>(b), y, xx)) = maps[b]->values[y][xx];
    return x;
}

double PdrNetwork::predict_unit(const PdrFeatureMap& map) {
    auto x = to_batch({&map});
    return forward(x, false)[0];
}

double predict_hz(PdrNetwork& net, const PdrFeatureMap& map) {
    return denormalize_label(net.predict_unit(map));
}

double ensemble_predict_hz(std::vector<PdrNetwork>& members, const PdrFeatureMap& map) {
    if (members.empty()) throw DomainError("ensemble_predict: no members");
    double acc = 0;
    for (auto& m : members) acc += predict_hz(m, map);
    return acc / static_cast<double>(members.size());
}

void PdrNetwork::save(const std::string& path, const std::string& config_echo) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open model file for writing: " + path);
    out.write(kModelMagic, 8);
    write_u32(out, 1);  // container version
    write_u64(out, seed_);
    write_u32(out, static_cast<std::uint32_t>(config_echo.size()));
    out.write(config_echo.data(), static_cast<std::streamsize>(config_echo.size()));

    write_u32(out, static_cast<std::uint32_t>(spec_.conv_filters.size()));
    for (int f : spec_.conv_filters) write_u32(out, static_cast<std::uint32_t>(f));
    write_u32(out, static_cast<std::uint32_t>(spec_.pool_after.size()));
    for (int p : spec_.pool_after) write_u32(out, static_cast<std::uint32_t>(p));
    write_u32(out, static_cast<std::uint32_t>(spec_.dense_units));
    const double rate = spec_.dropout_rate;
    out.write(reinterpret_cast<const char*>(&rate), 8);
    write_u32(out, static_cast<std::uint32_t>(spec_.input_h));
    write_u32(out, static_cast<std::uint32_t>(spec_.input_w));

    auto views = const_cast<PdrNetwork*>(this)->params();
    write_u32(out, static_cast<std::uint32_t>(views.size()));
    for (const auto& p : views) {
        write_u64(out, static_cast<std::uint64_t>(p.size));
        for (Eigen::Index i = 0; i < p.size; ++i) {
            float f = static_cast<float>(p.value[i]);
            out.write(reinterpret_cast<const char*>(&f), 4);
        }
    }
    if (!out) throw ParseError("failed writing model to " + path);
}

PdrNetwork PdrNetwork::load(const std::string& path, std::string* config_echo) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open model file: " + path);
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kModelMagic, 8) != 0)
        throw ParseError("model file " + path + " has a bad magic number");
    std::uint32_t version = read_u32(in);
    if (version != 1)
        throw ParseError("model file " + path + " has unsupported version " +
                         std::to_string(version));
    std::uint64_t seed = read_u64(in);
    std::uint32_t echo_len = read_u32(in);
    std::string echo(echo_len, '\0');
    in.read(echo.data(), echo_len);
    if (config_echo) *config_echo = echo;

    Spec spec;
    spec.conv_filters.resize(read_u32(in));
    for (auto& f : spec.conv_filters) f = static_cast<int>(read_u32(in));
    spec.pool_after.resize(read_u32(in));
    for (auto& p : spec.pool_after) p = static_cast<int>(read_u32(in));
    spec.dense_units = static_cast<int>(read_u32(in));
    in.read(reinterpret_cast<char*>(&spec.dropout_rate), 8);
    spec.input_h = static_cast<int>(read_u32(in));
    spec.input_w = static_cast<int>(read_u32(in));
    if (!in) throw ParseError("model file " + path + " is truncated in the spec block");

    PdrNetwork net = build(spec, seed);
    auto views = net.params();
    std::uint32_t n_params = read_u32(in);
    if (n_params != views.size())
        throw ParseError("model file " + path + " has " + std::to_string(n_params) +
                         " parameter blocks, expected " + std::to_string(views.size()));
    for (auto& p : views) {
        std::uint64_t count = read_u64(in);
        if (count != static_cast<std::uint64_t>(p.size))
            throw ParseError("model file " + path + " parameter block size mismatch");
        for (Eigen::Index i = 0; i < p.size; ++i) {
            float f;
            in.read(reinterpret_cast<char*>(&f), 4);
            p.value[i] = f;
        }
    }
    if (!in) throw ParseError("model file " + path + " is truncated in the weight block");
    return net;
}

}  // namespace eegbg
