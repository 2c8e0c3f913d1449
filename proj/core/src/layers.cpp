#include "frugal/layers.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace frugal {

namespace {

// valid output range [lo, hi) for one kernel offset: positions where
// o*stride - pad + k_off lands inside [0, in_extent)
inline int range_lo(int pad, int k_off, int stride) {
    int num = pad - k_off;
    return num <= 0 ? 0 : (num + stride - 1) / stride;
}

inline int range_hi(int out_extent, int in_extent, int pad, int k_off, int stride) {
    int num = in_extent - 1 + pad - k_off;
    if (num < 0) return 0;
    int hi = num / stride + 1;
    return hi < out_extent ? hi : out_extent;
}

std::vector<int> all_rows(int m) {
    std::vector<int> r(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) r[static_cast<std::size_t>(i)] = i;
    return r;
}

void check_mask(const ChannelMask* mask, int n, const std::string& name) {
    if (!mask) return;
    if (mask->empty()) {
        throw std::invalid_argument("layer " + name + ": empty channel mask");
    }
    for (int j : *mask) {
        if (j < 0 || j >= n) {
            throw std::invalid_argument("layer " + name + ": mask channel " +
                                        std::to_string(j) + " out of range [0," +
                                        std::to_string(n) + ")");
        }
    }
}

}  // namespace

Tensor gather_rows(const Tensor& batch, const std::vector<int>& rows) {
    if (batch.ndim() < 2) {
        throw std::invalid_argument("gather_rows: want batched tensor, got " + batch.shape_str());
    }
    std::vector<int> shape = batch.shape();
    std::size_t row_elems = batch.numel() / static_cast<std::size_t>(shape[0]);
    shape[0] = static_cast<int>(rows.size());
    Tensor out(shape);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const double* src = batch.data() + static_cast<std::size_t>(rows[r]) * row_elems;
        double* dst = out.data() + r * row_elems;
        for (std::size_t k = 0; k < row_elems; ++k) dst[k] = src[k];
    }
    return out;
}

void Layer::check_input(const Tensor& x) const {
    if (x.ndim() != 4 || x.dim(1) != in_.c || x.dim(2) != in_.h || x.dim(3) != in_.w) {
        throw std::invalid_argument("layer " + name_ + ": input " + x.shape_str() +
                                    " does not match expected [m," + std::to_string(in_.c) +
                                    "," + std::to_string(in_.h) + "," + std::to_string(in_.w) + "]");
    }
}

// ---------------------------------------------------------------------------
// ConvLayer
// ---------------------------------------------------------------------------

ConvLayer::ConvLayer(Shape3 in, int out_channels, int kh, int kw, int stride, int pad)
    : kh_(kh), kw_(kw), stride_(stride), pad_(pad) {
    if (out_channels <= 0 || kh <= 0 || kw <= 0 || stride <= 0 || pad < 0) {
        throw std::invalid_argument("conv: bad hyperparameters");
    }
    in_ = in;
    int oh = (in.h + 2 * pad - kh) / stride + 1;
    int ow = (in.w + 2 * pad - kw) / stride + 1;
    if (oh <= 0 || ow <= 0) {
        throw std::invalid_argument("conv: kernel does not fit input");
    }
    out_ = {out_channels, oh, ow};
    w_ = Tensor({out_channels, in.c, kh, kw});
    b_ = Tensor({out_channels});
    gw_ = Tensor({out_channels, in.c, kh, kw});
    gb_ = Tensor({out_channels});
}

void ConvLayer::init_params(Rng& rng) {
    double stddev = std::sqrt(2.0 / (in_.c * kh_ * kw_));
    rng.fill_normal(w_, 0.0, stddev);
    b_.fill(0.0);
}

const Tensor& ConvLayer::cached_input() const {
    if (!has_cache_) {
        throw std::logic_error("layer " + name_ + ": backward without recorded forward");
    }
    return cache_;
}

Tensor ConvLayer::forward(const Tensor& x, bool record) {
    check_input(x);
    const int m = x.dim(0);
    Tensor out({m, out_.c, out_.h, out_.w});

    for (int i = 0; i < m; ++i) {
        for (int j = 0; j < out_.c; ++j) {
            double* oslab = out.data() + out.idx4(i, j, 0, 0);
            const double bj = b_[static_cast<std::size_t>(j)];
            for (int t = 0; t < out_.h * out_.w; ++t) oslab[t] = bj;
            for (int ci = 0; ci < in_.c; ++ci) {
                for (int ky = 0; ky < kh_; ++ky) {
                    const int oh_lo = range_lo(pad_, ky, stride_);
                    const int oh_hi = range_hi(out_.h, in_.h, pad_, ky, stride_);
                    for (int kx = 0; kx < kw_; ++kx) {
                        const double wv = w_(j, ci, ky, kx);
                        if (wv == 0.0) continue;
                        const int ow_lo = range_lo(pad_, kx, stride_);
                        const int ow_hi = range_hi(out_.w, in_.w, pad_, kx, stride_);
                        for (int oy = oh_lo; oy < oh_hi; ++oy) {
                            const int y = oy * stride_ - pad_ + ky;
                            const double* xr = x.data() + x.idx4(i, ci, y, 0);
                            double* orow = oslab + static_cast<std::size_t>(oy) * out_.w;
                            if (stride_ == 1) {
                                const double* xs = xr + kx - pad_;
                                for (int ox = ow_lo; ox < ow_hi; ++ox) orow[ox] += wv * xs[ox];
                            } else {
                                for (int ox = ow_lo; ox < ow_hi; ++ox) {
                                    orow[ox] += wv * xr[ox * stride_ - pad_ + kx];
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    if (record) {
        cache_ = x;
        has_cache_ = true;
    }
    return out;
}

Tensor ConvLayer::backward_error(const Tensor& dout, const ChannelMask* mask,
                                 const std::vector<int>* rows) const {
    if (dout.ndim() != 4 || dout.dim(1) != out_.c || dout.dim(2) != out_.h || dout.dim(3) != out_.w) {
        throw std::invalid_argument("layer " + name_ + ": delta " + dout.shape_str() +
                                    " does not match output shape");
    }
    check_mask(mask, out_.c, name_);
    const int m = dout.dim(0);
    std::vector<int> all;
    if (!rows) all = all_rows(m);
    const std::vector<int>& rr = rows ? *rows : all;

    Tensor din({m, in_.c, in_.h, in_.w});

    for (int i : rr) {
        const int jn = mask ? static_cast<int>(mask->size()) : out_.c;
        for (int jj = 0; jj < jn; ++jj) {
            const int j = mask ? (*mask)[static_cast<std::size_t>(jj)] : jj;
            for (int ci = 0; ci < in_.c; ++ci) {
                for (int ky = 0; ky < kh_; ++ky) {
                    const int oh_lo = range_lo(pad_, ky, stride_);
                    const int oh_hi = range_hi(out_.h, in_.h, pad_, ky, stride_);
                    for (int kx = 0; kx < kw_; ++kx) {
                        const double wv = w_(j, ci, ky, kx);
                        if (wv == 0.0) continue;
                        const int ow_lo = range_lo(pad_, kx, stride_);
                        const int ow_hi = range_hi(out_.w, in_.w, pad_, kx, stride_);
                        for (int oy = oh_lo; oy < oh_hi; ++oy) {
                            const int y = oy * stride_ - pad_ + ky;
                            const double* drow = dout.data() + dout.idx4(i, j, oy, 0);
                            double* xrow = din.data() + din.idx4(i, ci, y, 0);
                            if (stride_ == 1) {
                                double* xs = xrow + kx - pad_;
                                for (int ox = ow_lo; ox < ow_hi; ++ox) xs[ox] += wv * drow[ox];
                            } else {
                                for (int ox = ow_lo; ox < ow_hi; ++ox) {
                                    xrow[ox * stride_ - pad_ + kx] += wv * drow[ox];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return din;
}

void ConvLayer::backward_weights(const Tensor& dout, const ChannelMask* mask,
                                 const std::vector<int>* rows) {
    if (dout.ndim() != 4 || dout.dim(1) != out_.c || dout.dim(2) != out_.h || dout.dim(3) != out_.w) {
        throw std::invalid_argument("layer " + name_ + ": delta " + dout.shape_str() +
                                    " does not match output shape");
    }
    check_mask(mask, out_.c, name_);
    const Tensor& x = cached_input();
    const int m = dout.dim(0);
    std::vector<int> all;
    if (!rows) all = all_rows(m);
    const std::vector<int>& rr = rows ? *rows : all;

    for (int i : rr) {
        const int jn = mask ? static_cast<int>(mask->size()) : out_.c;
        for (int jj = 0; jj < jn; ++jj) {
            const int j = mask ? (*mask)[static_cast<std::size_t>(jj)] : jj;
            const double* dslab = dout.data() + dout.idx4(i, j, 0, 0);
            double bacc = 0.0;
            for (int t = 0; t < out_.h * out_.w; ++t) bacc += dslab[t];
            gb_[static_cast<std::size_t>(j)] += bacc;
            for (int ci = 0; ci < in_.c; ++ci) {
                for (int ky = 0; ky < kh_; ++ky) {
                    const int oh_lo = range_lo(pad_, ky, stride_);
                    const int oh_hi = range_hi(out_.h, in_.h, pad_, ky, stride_);
                    for (int kx = 0; kx < kw_; ++kx) {
                        const int ow_lo = range_lo(pad_, kx, stride_);
                        const int ow_hi = range_hi(out_.w, in_.w, pad_, kx, stride_);
                        double acc = 0.0;
                        for (int oy = oh_lo; oy < oh_hi; ++oy) {
                            const int y = oy * stride_ - pad_ + ky;
                            const double* xr = x.data() + x.idx4(i, ci, y, 0);
                            const double* drow = dslab + static_cast<std::size_t>(oy) * out_.w;
                            if (stride_ == 1) {
                                const double* xs = xr + kx - pad_;
                                for (int ox = ow_lo; ox < ow_hi; ++ox) acc += xs[ox] * drow[ox];
                            } else {
                                for (int ox = ow_lo; ox < ow_hi; ++ox) {
                                    acc += xr[ox * stride_ - pad_ + kx] * drow[ox];
                                }
                            }
                        }
                        gw_(j, ci, ky, kx) += acc;
                    }
                }
            }
        }
    }
}

Tensor ConvLayer::backward(const Tensor& dout, bool need_dx, const std::vector<int>* rows) {
    backward_weights(dout, nullptr, rows);
    if (!need_dx) return Tensor();
    return backward_error(dout, nullptr, rows);
}

void ConvLayer::zero_grads() {
    gw_.fill(0.0);
    gb_.fill(0.0);
}

// ---------------------------------------------------------------------------
// FcLayer
// ---------------------------------------------------------------------------

FcLayer::FcLayer(Shape3 in, int out_features) {
    if (out_features <= 0) {
        throw std::invalid_argument("fc: bad output size");
    }
    in_ = in;
    out_ = {out_features, 1, 1};
    int fan_in = in.c * in.h * in.w;
    w_ = Tensor({out_features, fan_in});
    b_ = Tensor({out_features});
    gw_ = Tensor({out_features, fan_in});
    gb_ = Tensor({out_features});
}

void FcLayer::init_params(Rng& rng) {
    double stddev = std::sqrt(2.0 / in_features());
    rng.fill_normal(w_, 0.0, stddev);
    b_.fill(0.0);
}

Tensor FcLayer::forward(const Tensor& x, bool record) {
    const int fan = in_features();
    if (x.ndim() < 2 || static_cast<int>(x.numel() / x.dim(0)) != fan) {
        throw std::invalid_argument("layer " + name_ + ": input " + x.shape_str() +
                                    " does not flatten to " + std::to_string(fan));
    }
    const int m = x.dim(0);
    const int nout = out_features();
    Tensor out({m, nout, 1, 1});
    for (int i = 0; i < m; ++i) {
        const double* xr = x.data() + static_cast<std::size_t>(i) * fan;
        double* orow = out.data() + static_cast<std::size_t>(i) * nout;
        for (int o = 0; o < nout; ++o) {
            const double* wr = w_.data() + static_cast<std::size_t>(o) * fan;
            double acc = b_[static_cast<std::size_t>(o)];
            for (int k = 0; k < fan; ++k) acc += wr[k] * xr[k];
            orow[o] = acc;
        }
    }
    if (record) {
        cache_ = x;
        has_cache_ = true;
    }
    return out;
}

Tensor FcLayer::backward(const Tensor& dout, bool need_dx, const std::vector<int>* rows) {
    const int nout = out_features();
    const int fan = in_features();
    if (dout.ndim() < 2 || static_cast<int>(dout.numel() / dout.dim(0)) != nout) {
        throw std::invalid_argument("layer " + name_ + ": delta " + dout.shape_str() +
                                    " does not match output size " + std::to_string(nout));
    }
    if (!has_cache_) {
        throw std::logic_error("layer " + name_ + ": backward without recorded forward");
    }
    const int m = dout.dim(0);
    std::vector<int> all;
    if (!rows) all = all_rows(m);
    const std::vector<int>& rr = rows ? *rows : all;

    for (int i : rr) {
        const double* dr = dout.data() + static_cast<std::size_t>(i) * nout;
        const double* xr = cache_.data() + static_cast<std::size_t>(i) * fan;
        for (int o = 0; o < nout; ++o) {
            const double d = dr[o];
            if (d == 0.0) continue;
            gb_[static_cast<std::size_t>(o)] += d;
            double* gwr = gw_.data() + static_cast<std::size_t>(o) * fan;
            for (int k = 0; k < fan; ++k) gwr[k] += d * xr[k];
        }
    }

    if (!need_dx) return Tensor();

    std::vector<int> shape = cache_.shape();
    shape[0] = m;
    Tensor din(shape);
    for (int i : rr) {
        const double* dr = dout.data() + static_cast<std::size_t>(i) * nout;
        double* xr = din.data() + static_cast<std::size_t>(i) * fan;
        for (int o = 0; o < nout; ++o) {
            const double d = dr[o];
            if (d == 0.0) continue;
            const double* wr = w_.data() + static_cast<std::size_t>(o) * fan;
            for (int k = 0; k < fan; ++k) xr[k] += d * wr[k];
        }
    }
    return din;
}

void FcLayer::zero_grads() {
    gw_.fill(0.0);
    gb_.fill(0.0);
}

// ---------------------------------------------------------------------------
// ReluLayer
// ---------------------------------------------------------------------------

ReluLayer::ReluLayer(Shape3 in) {
    in_ = in;
    out_ = in;
}

Tensor ReluLayer::forward(const Tensor& x, bool record) {
    check_input(x);
    Tensor out(x.shape());
    if (record) {
        active_.assign(x.numel(), 0);
        has_cache_ = true;
    }
    const double* p = x.data();
    double* q = out.data();
    for (std::size_t k = 0; k < x.numel(); ++k) {
        if (p[k] > 0.0) {
            q[k] = p[k];
            if (record) active_[k] = 1;
        } else {
            q[k] = 0.0;
        }
    }
    return out;
}

Tensor ReluLayer::backward(const Tensor& dout, bool need_dx, const std::vector<int>* rows) {
    if (!has_cache_ || active_.size() != dout.numel()) {
        throw std::logic_error("layer " + name_ + ": backward without matching forward");
    }
    if (!need_dx) return Tensor();
    const int m = dout.dim(0);
    std::vector<int> all;
    if (!rows) all = all_rows(m);
    const std::vector<int>& rr = rows ? *rows : all;
    const std::size_t row_elems = dout.numel() / static_cast<std::size_t>(m);

    Tensor din(dout.shape());
    for (int i : rr) {
        const std::size_t base = static_cast<std::size_t>(i) * row_elems;
        const double* dr = dout.data() + base;
        double* xr = din.data() + base;
        for (std::size_t k = 0; k < row_elems; ++k) {
            xr[k] = active_[base + k] ? dr[k] : 0.0;
        }
    }
    return din;
}

// ---------------------------------------------------------------------------
// MaxPoolLayer
// ---------------------------------------------------------------------------

MaxPoolLayer::MaxPoolLayer(Shape3 in, int k, int stride) : k_(k), stride_(stride) {
    if (k <= 0 || stride <= 0) {
        throw std::invalid_argument("maxpool: bad hyperparameters");
    }
    in_ = in;
    int oh = (in.h - k) / stride + 1;
    int ow = (in.w - k) / stride + 1;
    if (oh <= 0 || ow <= 0) {
        throw std::invalid_argument("maxpool: window does not fit input");
    }
    out_ = {in.c, oh, ow};
}

Tensor MaxPoolLayer::forward(const Tensor& x, bool record) {
    check_input(x);
    const int m = x.dim(0);
    Tensor out({m, out_.c, out_.h, out_.w});
    if (record) {
        argmax_.assign(out.numel(), 0);
        has_cache_ = true;
    }
    std::size_t oidx = 0;
    for (int i = 0; i < m; ++i) {
        for (int c = 0; c < in_.c; ++c) {
            for (int oy = 0; oy < out_.h; ++oy) {
                for (int ox = 0; ox < out_.w; ++ox, ++oidx) {
                    double best = -std::numeric_limits<double>::infinity();
                    int best_at = 0;
                    for (int ky = 0; ky < k_; ++ky) {
                        const int y = oy * stride_ + ky;
                        const double* xr = x.data() + x.idx4(i, c, y, 0);
                        for (int kx = 0; kx < k_; ++kx) {
                            const int xx = ox * stride_ + kx;
                            if (xr[xx] > best) {
                                best = xr[xx];
                                best_at = static_cast<int>(x.idx4(i, c, y, xx) - x.idx4(i, 0, 0, 0));
                            }
                        }
                    }
                    out[oidx] = best;
                    if (record) argmax_[oidx] = best_at;
                }
            }
        }
    }
    return out;
}

Tensor MaxPoolLayer::backward(const Tensor& dout, bool need_dx, const std::vector<int>* rows) {
    if (!has_cache_ || argmax_.size() != dout.numel()) {
        throw std::logic_error("layer " + name_ + ": backward without matching forward");
    }
    if (!need_dx) return Tensor();
    const int m = dout.dim(0);
    std::vector<int> all;
    if (!rows) all = all_rows(m);
    const std::vector<int>& rr = rows ? *rows : all;

    Tensor din({m, in_.c, in_.h, in_.w});
    const std::size_t out_row = dout.numel() / static_cast<std::size_t>(m);
    const std::size_t in_row = din.numel() / static_cast<std::size_t>(m);
    for (int i : rr) {
        const double* dr = dout.data() + static_cast<std::size_t>(i) * out_row;
        double* xr = din.data() + static_cast<std::size_t>(i) * in_row;
        const int* am = argmax_.data() + static_cast<std::size_t>(i) * out_row;
        for (std::size_t k = 0; k < out_row; ++k) {
            xr[am[k]] += dr[k];
        }
    }
    return din;
}

// ---------------------------------------------------------------------------
// softmax cross-entropy
// ---------------------------------------------------------------------------

SmceResult softmax_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
    const int m = logits.dim(0);
    const int K = static_cast<int>(logits.numel() / static_cast<std::size_t>(m));
    if (static_cast<int>(labels.size()) != m) {
        throw std::invalid_argument("smce: label count != batch size");
    }
    SmceResult r{Tensor({m}), Tensor({m, K})};
    for (int i = 0; i < m; ++i) {
        const int y = labels[static_cast<std::size_t>(i)];
        if (y < 0 || y >= K) {
            throw std::invalid_argument("smce: label " + std::to_string(y) + " out of [0," +
                                        std::to_string(K) + ")");
        }
        const double* z = logits.data() + static_cast<std::size_t>(i) * K;
        double zmax = z[0];
        for (int k = 1; k < K; ++k) zmax = z[k] > zmax ? z[k] : zmax;
        double sum = 0.0;
        for (int k = 0; k < K; ++k) sum += std::exp(z[k] - zmax);
        const double log_sum = std::log(sum);
        double* p = r.probs.data() + static_cast<std::size_t>(i) * K;
        for (int k = 0; k < K; ++k) p[k] = std::exp(z[k] - zmax - log_sum);
        r.losses[static_cast<std::size_t>(i)] = -(z[y] - zmax - log_sum);
    }
    return r;
}

Tensor smce_backward(const Tensor& probs, const std::vector<int>& labels,
                     const std::vector<double>& weights) {
    const int m = probs.dim(0);
    const int K = probs.dim(1);
    if (static_cast<int>(labels.size()) != m || static_cast<int>(weights.size()) != m) {
        throw std::invalid_argument("smce_backward: size mismatch");
    }
    Tensor delta({m, K});
    for (int i = 0; i < m; ++i) {
        const double wi = weights[static_cast<std::size_t>(i)];
        const double* p = probs.data() + static_cast<std::size_t>(i) * K;
        double* d = delta.data() + static_cast<std::size_t>(i) * K;
        for (int k = 0; k < K; ++k) d[k] = wi * p[k];
        d[labels[static_cast<std::size_t>(i)]] -= wi;
    }
    return delta;
}

}  // namespace frugal
