#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

namespace frugal {

// kept-channel indices, sorted ascending; empty masks are rejected by the
// masked backward ops (pruning everything would kill the error signal)
using ChannelMask = std::vector<int>;

struct Shape3 {
    int c = 0, h = 0, w = 0;
    bool operator==(const Shape3&) const = default;
};

// gather a sub-batch by row index, preserving order
Tensor gather_rows(const Tensor& batch, const std::vector<int>& rows);

// ---------------------------------------------------------------------------
// layer base
// ---------------------------------------------------------------------------

// Layers own their parameters, gradients and (when record=true) the forward
// cache needed by backward. Shapes are fixed at construction; forward
// validates the batch against them. backward(..., rows) touches only the
// listed batch rows, which lets the filter reuse one cached forward while
// charging the ledger for exactly the rows it trains on.
class Layer {
public:
    virtual ~Layer() = default;

    virtual const char* kind() const = 0;
    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

    Shape3 in_shape() const { return in_; }
    Shape3 out_shape() const { return out_; }

    virtual Tensor forward(const Tensor& x, bool record) = 0;

    // dout: [m, out shape]; returns the input-side error map, or an empty
    // tensor when need_dx is false. rows == nullptr means the whole batch.
    virtual Tensor backward(const Tensor& dout, bool need_dx,
                            const std::vector<int>* rows = nullptr) = 0;

    virtual void zero_grads() {}
    virtual std::vector<Tensor*> param_tensors() { return {}; }
    virtual std::vector<Tensor*> grad_tensors() { return {}; }

protected:
    std::string name_;
    Shape3 in_, out_;

    void check_input(const Tensor& x) const;
};

// ---------------------------------------------------------------------------
// convolution
// ---------------------------------------------------------------------------

class ConvLayer : public Layer {
public:
    // weights [n, c, kh, kw]; zero padding, square kernel/stride supported
    // through distinct kh/kw anyway since the loops never assume squareness
    ConvLayer(Shape3 in, int out_channels, int kh, int kw, int stride, int pad);

    const char* kind() const override { return "conv"; }

    void init_params(Rng& rng);

    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dout, bool need_dx,
                    const std::vector<int>* rows = nullptr) override;

    // Error propagation: delta_in = sum over kept output channels j of the
    // rotated kernel j correlated with delta_out channel j. The rotation is
    // implicit in the index relation (output position oy*stride-pad+ky hits
    // input row y); rotated weights are never materialized.
    Tensor backward_error(const Tensor& dout, const ChannelMask* mask,
                          const std::vector<int>* rows = nullptr) const;

    // Weight gradients: g_w[j] = cached input correlated with delta_out
    // channel j, accumulated into gw/gb. Channels outside the mask are
    // skipped entirely, so their gradient rows stay exactly zero (bias too).
    void backward_weights(const Tensor& dout, const ChannelMask* mask,
                          const std::vector<int>* rows = nullptr);

    int out_channels() const { return out_.c; }
    int in_channels() const { return in_.c; }
    int kh() const { return kh_; }
    int kw() const { return kw_; }
    int stride() const { return stride_; }
    int pad() const { return pad_; }

    Tensor& weights() { return w_; }
    const Tensor& weights() const { return w_; }
    Tensor& bias() { return b_; }
    const Tensor& weight_grads() { return gw_; }
    const Tensor& bias_grads() { return gb_; }
    const Tensor& cached_input() const;

    void zero_grads() override;
    std::vector<Tensor*> param_tensors() override { return {&w_, &b_}; }
    std::vector<Tensor*> grad_tensors() override { return {&gw_, &gb_}; }

private:
    int kh_, kw_, stride_, pad_;
    Tensor w_, b_, gw_, gb_;
    Tensor cache_;
    bool has_cache_ = false;
};

// ---------------------------------------------------------------------------
// fully connected
// ---------------------------------------------------------------------------

// Treats any input [m, ...] as [m, fan_in]; backward hands the delta back in
// the original input shape.
class FcLayer : public Layer {
public:
    FcLayer(Shape3 in, int out_features);

    const char* kind() const override { return "fc"; }

    void init_params(Rng& rng);

    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dout, bool need_dx,
                    const std::vector<int>* rows = nullptr) override;

    int in_features() const { return in_.c * in_.h * in_.w; }
    int out_features() const { return out_.c; }

    Tensor& weights() { return w_; }
    Tensor& bias() { return b_; }
    const Tensor& weight_grads() { return gw_; }

    void zero_grads() override;
    std::vector<Tensor*> param_tensors() override { return {&w_, &b_}; }
    std::vector<Tensor*> grad_tensors() override { return {&gw_, &gb_}; }

private:
    Tensor w_, b_, gw_, gb_;
    Tensor cache_;
    bool has_cache_ = false;
};

// ---------------------------------------------------------------------------
// relu, maxpool
// ---------------------------------------------------------------------------

class ReluLayer : public Layer {
public:
    explicit ReluLayer(Shape3 in);
    const char* kind() const override { return "relu"; }
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dout, bool need_dx,
                    const std::vector<int>* rows = nullptr) override;

private:
    std::vector<unsigned char> active_;
    bool has_cache_ = false;
};

class MaxPoolLayer : public Layer {
public:
    MaxPoolLayer(Shape3 in, int k, int stride);
    const char* kind() const override { return "maxpool"; }
    Tensor forward(const Tensor& x, bool record) override;
    Tensor backward(const Tensor& dout, bool need_dx,
                    const std::vector<int>* rows = nullptr) override;

    int k() const { return k_; }

private:
    int k_, stride_;
    std::vector<int> argmax_;  // flat input offset per output element
    bool has_cache_ = false;
};

// ---------------------------------------------------------------------------
// softmax cross-entropy head
// ---------------------------------------------------------------------------

struct SmceResult {
    Tensor losses;  // [m], unreduced; the caller decides the reduction
    Tensor probs;   // [m, K]
};

SmceResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// delta_i = weight_i * (probs_i - onehot(label_i)); pass 1/m for the usual
// mean reduction, or the normalized instance weights of the filter loss
Tensor smce_backward(const Tensor& probs, const std::vector<int>& labels,
                     const std::vector<double>& weights);

}  // namespace frugal
