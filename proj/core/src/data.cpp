#include "frugal/data.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstdio>
#include <memory>
#include <numeric>

namespace frugal {

namespace {

constexpr long kMaxElements = 1L << 31;

struct GzCloser {
    void operator()(gzFile f) const {
        if (f != nullptr) gzclose(f);
    }
};
using GzHandle = std::unique_ptr<gzFile_s, GzCloser>;

uint32_t read_u32_be(gzFile f, const std::string& path) {
    unsigned char b[4];
    if (gzread(f, b, 4) != 4) {
        throw Truncated("unexpected end of header in " + path);
    }
    return (uint32_t(b[0]) << 24) | (uint32_t(b[1]) << 16) | (uint32_t(b[2]) << 8) | uint32_t(b[3]);
}

void write_u32_be(gzFile f, uint32_t v, const std::string& path) {
    unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                          static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
    if (gzwrite(f, b, 4) != 4) {
        throw DataError("short write to " + path);
    }
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

IdxData load_idx(const std::string& path) {
    GzHandle f(gzopen(path.c_str(), "rb"));
    if (!f) {
        throw DataError("cannot open " + path);
    }
    const uint32_t magic = read_u32_be(f.get(), path);
    // 0x08 marks unsigned bytes; the final byte is the rank
    if ((magic & 0xFFFFFF00u) != 0x00000800u) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "bad magic 0x%08x in ", magic);
        throw BadMagic(buf + path);
    }
    const int rank = static_cast<int>(magic & 0xFFu);
    if (rank < 1 || rank > 4) {
        throw BadMagic("unsupported rank in " + path);
    }

    IdxData out;
    long total = 1;
    for (int d = 0; d < rank; ++d) {
        const uint32_t dim = read_u32_be(f.get(), path);
        if (dim == 0 || dim > uint32_t(kMaxElements)) {
            throw DimensionOverflow("dimension out of range in " + path);
        }
        total *= static_cast<long>(dim);
        if (total > kMaxElements) {
            throw DimensionOverflow("element count overflows in " + path);
        }
        out.dims.push_back(static_cast<int>(dim));
    }

    out.bytes.resize(static_cast<size_t>(total));
    long got = 0;
    while (got < total) {
        const unsigned chunk = static_cast<unsigned>(std::min(total - got, long(1) << 20));
        const int n = gzread(f.get(), out.bytes.data() + got, chunk);
        if (n <= 0) {
            throw Truncated("payload shorter than header promises in " + path);
        }
        got += n;
    }
    return out;
}

void save_idx(const std::string& path, const IdxData& data) {
    if (data.dims.empty() || data.dims.size() > 4) {
        throw std::invalid_argument("save_idx: rank must be 1..4");
    }
    long total = 1;
    for (int d : data.dims) {
        if (d <= 0) {
            throw std::invalid_argument("save_idx: dimensions must be positive");
        }
        total *= d;
    }
    if (static_cast<size_t>(total) != data.bytes.size()) {
        throw std::invalid_argument("save_idx: byte count does not match dimensions");
    }

    // "T" writes straight through without compressing, so one writer covers
    // both plain and .gz outputs
    const char* mode = ends_with(path, ".gz") ? "wb" : "wbT";
    GzHandle f(gzopen(path.c_str(), mode));
    if (!f) {
        throw DataError("cannot open " + path + " for writing");
    }
    write_u32_be(f.get(), 0x00000800u | static_cast<uint32_t>(data.dims.size()), path);
    for (int d : data.dims) {
        write_u32_be(f.get(), static_cast<uint32_t>(d), path);
    }
    long written = 0;
    while (written < total) {
        const unsigned chunk = static_cast<unsigned>(std::min(total - written, long(1) << 20));
        const int n = gzwrite(f.get(), data.bytes.data() + written, chunk);
        if (n <= 0) {
            throw DataError("short write to " + path);
        }
        written += n;
    }
}

double normalize_pixel(uint8_t px) {
    return (static_cast<double>(px) / 255.0 - 0.1307) / 0.3081;
}

Dataset make_dataset(const IdxData& images, const IdxData& labels, int num_classes) {
    if (images.dims.size() != 3) {
        throw std::invalid_argument("make_dataset: image payload must be [n, h, w]");
    }
    if (labels.dims.size() != 1) {
        throw std::invalid_argument("make_dataset: label payload must be [n]");
    }
    if (images.dims[0] != labels.dims[0]) {
        throw std::invalid_argument("make_dataset: image/label counts differ");
    }
    const int n = images.dims[0];
    const int h = images.dims[1];
    const int w = images.dims[2];

    Dataset ds;
    ds.num_classes = num_classes;
    ds.images = Tensor({n, 1, h, w});
    double* out = ds.images.data();
    for (size_t i = 0; i < images.bytes.size(); ++i) {
        out[i] = normalize_pixel(images.bytes[i]);
    }
    ds.labels.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        const int y = labels.bytes[static_cast<size_t>(i)];
        if (y < 0 || y >= num_classes) {
            throw std::invalid_argument("make_dataset: label outside class range");
        }
        ds.labels[static_cast<size_t>(i)] = y;
    }
    return ds;
}

Dataset stratified_subset(const Dataset& full, int per_class, uint64_t seed) {
    if (per_class <= 0) {
        throw std::invalid_argument("stratified_subset: per_class must be positive");
    }
    std::vector<std::vector<int>> by_class(static_cast<size_t>(full.num_classes));
    for (int i = 0; i < full.size(); ++i) {
        by_class[static_cast<size_t>(full.labels[static_cast<size_t>(i)])].push_back(i);
    }

    Rng rng(seed);
    std::vector<int> picked;
    picked.reserve(static_cast<size_t>(per_class) * by_class.size());
    for (size_t c = 0; c < by_class.size(); ++c) {
        auto& pool = by_class[c];
        if (static_cast<int>(pool.size()) < per_class) {
            throw std::invalid_argument("stratified_subset: class " + std::to_string(c) +
                                        " has too few instances");
        }
        Rng class_rng = rng.fork(static_cast<uint64_t>(c));
        class_rng.shuffle(pool);
        picked.insert(picked.end(), pool.begin(), pool.begin() + per_class);
    }
    Rng order_rng = rng.fork(0xFFFFull);
    order_rng.shuffle(picked);

    const int h = full.images.dim(2);
    const int w = full.images.dim(3);
    Dataset out;
    out.num_classes = full.num_classes;
    out.images = Tensor({static_cast<int>(picked.size()), 1, h, w});
    out.labels.resize(picked.size());
    const long plane = static_cast<long>(h) * w;
    for (size_t k = 0; k < picked.size(); ++k) {
        const double* src = full.images.data() + static_cast<long>(picked[k]) * plane;
        double* dst = out.images.data() + static_cast<long>(k) * plane;
        std::copy(src, src + plane, dst);
        out.labels[k] = full.labels[static_cast<size_t>(picked[k])];
    }
    return out;
}

Batch take_batch(const Dataset& ds, const std::vector<int>& order, size_t start, int count) {
    if (count <= 0 || start + static_cast<size_t>(count) > order.size()) {
        throw std::invalid_argument("take_batch: range outside dataset order");
    }
    const int h = ds.images.dim(2);
    const int w = ds.images.dim(3);
    const long plane = static_cast<long>(h) * w;

    Batch b;
    b.x = Tensor({count, 1, h, w});
    b.y.resize(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k) {
        const int src_row = order[start + static_cast<size_t>(k)];
        const double* src = ds.images.data() + static_cast<long>(src_row) * plane;
        std::copy(src, src + plane, b.x.data() + static_cast<long>(k) * plane);
        b.y[static_cast<size_t>(k)] = ds.labels[static_cast<size_t>(src_row)];
    }
    return b;
}

}  // namespace frugal
