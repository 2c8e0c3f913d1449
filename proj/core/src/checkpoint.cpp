#include "frugal/checkpoint.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <memory>
#include <stdexcept>

namespace frugal {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'G', 'L', '0', '0', '0', '1'};

struct FileCloser {
    void operator()(FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FileHandle = std::unique_ptr<FILE, FileCloser>;

void put(FILE* f, const void* p, size_t n, const std::string& path) {
    if (std::fwrite(p, 1, n, f) != n) {
        throw std::runtime_error("checkpoint: short write to " + path);
    }
}

void get(FILE* f, void* p, size_t n, const std::string& path) {
    if (std::fread(p, 1, n, f) != n) {
        throw std::runtime_error("checkpoint: " + path + " is truncated");
    }
}

void put_u32(FILE* f, uint32_t v, const std::string& path) { put(f, &v, 4, path); }

uint32_t get_u32(FILE* f, const std::string& path) {
    uint32_t v = 0;
    get(f, &v, 4, path);
    return v;
}

}  // namespace

void save_checkpoint(const std::string& path, Network& net) {
    FileHandle f(std::fopen(path.c_str(), "wb"));
    if (!f) {
        throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    }
    const std::vector<Tensor*> params = net.params();
    const std::vector<std::string> names = net.param_names();

    put(f.get(), kMagic, sizeof(kMagic), path);
    put_u32(f.get(), static_cast<uint32_t>(params.size()), path);
    for (size_t i = 0; i < params.size(); ++i) {
        const std::string& name = names[i];
        put_u32(f.get(), static_cast<uint32_t>(name.size()), path);
        put(f.get(), name.data(), name.size(), path);
        const Tensor& t = *params[i];
        put_u32(f.get(), static_cast<uint32_t>(t.ndim()), path);
        for (int d = 0; d < t.ndim(); ++d) {
            const int32_t dim = t.dim(d);
            put(f.get(), &dim, 4, path);
        }
        put(f.get(), t.data(), sizeof(double) * static_cast<size_t>(t.numel()), path);
    }
}

void load_checkpoint(const std::string& path, Network& net) {
    FileHandle f(std::fopen(path.c_str(), "rb"));
    if (!f) {
        throw std::runtime_error("checkpoint: cannot open " + path);
    }
    char magic[8];
    get(f.get(), magic, sizeof(magic), path);
    if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw std::runtime_error("checkpoint: " + path + " has the wrong magic header");
    }

    std::vector<Tensor*> params = net.params();
    const std::vector<std::string> names = net.param_names();
    const uint32_t count = get_u32(f.get(), path);
    if (count != params.size()) {
        throw std::runtime_error("checkpoint: " + path + " holds a different parameter count");
    }
    for (size_t i = 0; i < params.size(); ++i) {
        const uint32_t name_len = get_u32(f.get(), path);
        std::string name(name_len, '\0');
        get(f.get(), name.data(), name_len, path);
        if (name != names[i]) {
            throw std::runtime_error("checkpoint: parameter name mismatch at " + name);
        }
        Tensor& t = *params[i];
        const uint32_t rank = get_u32(f.get(), path);
        if (static_cast<int>(rank) != t.ndim()) {
            throw std::runtime_error("checkpoint: rank mismatch at " + name);
        }
        for (uint32_t d = 0; d < rank; ++d) {
            int32_t dim = 0;
            get(f.get(), &dim, 4, path);
            if (dim != t.dim(static_cast<int>(d))) {
                throw std::runtime_error("checkpoint: shape mismatch at " + name);
            }
        }
        get(f.get(), t.data(), sizeof(double) * static_cast<size_t>(t.numel()), path);
    }
}

}  // namespace frugal
