#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frugal/layers.hpp"

namespace frugal {

// Sequential network ending in logits; the softmax cross-entropy head is
// applied by the caller so per-instance losses stay unreduced.
class Network {
public:
    Network() = default;
    Network(Network&&) = default;
    Network& operator=(Network&&) = default;

    void add(std::unique_ptr<Layer> layer);

    Tensor forward(const Tensor& x, bool record);

    // plain unmasked backward through every layer; the first layer never
    // computes its input-side delta (the image needs no gradient)
    void backward(const Tensor& dlogits, const std::vector<int>* rows = nullptr);

    void zero_grads();

    std::vector<Layer*> layers();
    std::vector<const Layer*> layers() const;
    std::size_t layer_count() const { return layers_.size(); }
    Layer& layer(std::size_t i) { return *layers_[i]; }

    Shape3 input_shape() const;
    int num_outputs() const;

    // flattened parameter/grad views in layer order, for the optimizer
    std::vector<Tensor*> params();
    std::vector<Tensor*> grads();

    // "name.w" / "name.b" in layer order, aligned with params()
    std::vector<std::string> param_names() const;

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// main network: conv(1->20,5x5) pool2 conv(20->50,5x5) pool2 fc120 fc84 fc10,
// relu after each conv and hidden fc
Network make_lenet(Rng& rng, int in_h = 28, int in_w = 28, int num_classes = 10);

// companion loss-prediction filter: conv(1->6,3x3) pool2 conv(6->16,3x3)
// pool2 fc2, a slimmed two-way head over the same input
Network make_filter_net(Rng& rng, int in_h = 28, int in_w = 28);

}  // namespace frugal
