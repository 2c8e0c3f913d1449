#include "frugal/network.hpp"

#include <stdexcept>

namespace frugal {

void Network::add(std::unique_ptr<Layer> layer) {
    if (!layers_.empty()) {
        Shape3 prev = layers_.back()->out_shape();
        Shape3 next = layer->in_shape();
        if (!(prev == next)) {
            throw std::invalid_argument("network: layer " + layer->name() + " input mismatch");
        }
    }
    layers_.push_back(std::move(layer));
}

Tensor Network::forward(const Tensor& x, bool record) {
    if (layers_.empty()) {
        throw std::logic_error("network: no layers");
    }
    Tensor a = layers_[0]->forward(x, record);
    for (std::size_t i = 1; i < layers_.size(); ++i) {
        a = layers_[i]->forward(a, record);
    }
    // logits as [m, K]
    return a.reshape({a.dim(0), static_cast<int>(a.numel()) / a.dim(0)});
}

void Network::backward(const Tensor& dlogits, const std::vector<int>* rows) {
    if (layers_.empty()) {
        throw std::logic_error("network: no layers");
    }
    Shape3 os = layers_.back()->out_shape();
    Tensor d = dlogits.reshape({dlogits.dim(0), os.c, os.h, os.w});
    for (std::size_t i = layers_.size(); i-- > 0;) {
        d = layers_[i]->backward(d, /*need_dx=*/i > 0, rows);
    }
}

void Network::zero_grads() {
    for (auto& l : layers_) l->zero_grads();
}

std::vector<Layer*> Network::layers() {
    std::vector<Layer*> v;
    v.reserve(layers_.size());
    for (auto& l : layers_) v.push_back(l.get());
    return v;
}

std::vector<const Layer*> Network::layers() const {
    std::vector<const Layer*> v;
    v.reserve(layers_.size());
    for (auto& l : layers_) v.push_back(l.get());
    return v;
}

Shape3 Network::input_shape() const {
    if (layers_.empty()) return {};
    return layers_.front()->in_shape();
}

int Network::num_outputs() const {
    if (layers_.empty()) return 0;
    Shape3 s = layers_.back()->out_shape();
    return s.c * s.h * s.w;
}

std::vector<Tensor*> Network::params() {
    std::vector<Tensor*> v;
    for (auto& l : layers_) {
        for (Tensor* t : l->param_tensors()) v.push_back(t);
    }
    return v;
}

std::vector<Tensor*> Network::grads() {
    std::vector<Tensor*> v;
    for (auto& l : layers_) {
        for (Tensor* t : l->grad_tensors()) v.push_back(t);
    }
    return v;
}

std::vector<std::string> Network::param_names() const {
    std::vector<std::string> v;
    for (const auto& l : layers_) {
        std::size_t n = const_cast<Layer*>(l.get())->param_tensors().size();
        if (n >= 1) v.push_back(l->name() + ".w");
        if (n >= 2) v.push_back(l->name() + ".b");
    }
    return v;
}

namespace {

std::unique_ptr<ConvLayer> conv(const std::string& name, Shape3 in, int n, int k, int stride,
                                int pad, Rng& rng) {
    auto l = std::make_unique<ConvLayer>(in, n, k, k, stride, pad);
    l->set_name(name);
    l->init_params(rng);
    return l;
}

std::unique_ptr<FcLayer> fc(const std::string& name, Shape3 in, int out, Rng& rng) {
    auto l = std::make_unique<FcLayer>(in, out);
    l->set_name(name);
    l->init_params(rng);
    return l;
}

std::unique_ptr<ReluLayer> relu(const std::string& name, Shape3 in) {
    auto l = std::make_unique<ReluLayer>(in);
    l->set_name(name);
    return l;
}

std::unique_ptr<MaxPoolLayer> pool(const std::string& name, Shape3 in) {
    auto l = std::make_unique<MaxPoolLayer>(in, 2, 2);
    l->set_name(name);
    return l;
}

}  // namespace

Network make_lenet(Rng& rng, int in_h, int in_w, int num_classes) {
    Network net;
    net.add(conv("conv1", {1, in_h, in_w}, 20, 5, 1, 0, rng));
    net.add(relu("relu1", net.layers().back()->out_shape()));
    net.add(pool("pool1", net.layers().back()->out_shape()));
    net.add(conv("conv2", net.layers().back()->out_shape(), 50, 5, 1, 0, rng));
    net.add(relu("relu2", net.layers().back()->out_shape()));
    net.add(pool("pool2", net.layers().back()->out_shape()));
    net.add(fc("fc1", net.layers().back()->out_shape(), 120, rng));
    net.add(relu("relu3", net.layers().back()->out_shape()));
    net.add(fc("fc2", net.layers().back()->out_shape(), 84, rng));
    net.add(relu("relu4", net.layers().back()->out_shape()));
    net.add(fc("fc3", net.layers().back()->out_shape(), num_classes, rng));
    return net;
}

Network make_filter_net(Rng& rng, int in_h, int in_w) {
    Network net;
    net.add(conv("fconv1", {1, in_h, in_w}, 6, 3, 1, 0, rng));
    net.add(relu("frelu1", net.layers().back()->out_shape()));
    net.add(pool("fpool1", net.layers().back()->out_shape()));
    net.add(conv("fconv2", net.layers().back()->out_shape(), 16, 3, 1, 0, rng));
    net.add(relu("frelu2", net.layers().back()->out_shape()));
    net.add(pool("fpool2", net.layers().back()->out_shape()));
    net.add(fc("ffc", net.layers().back()->out_shape(), 2, rng));
    return net;
}

}  // namespace frugal
