#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "frugal/rng.hpp"
#include "frugal/tensor.hpp"

namespace frugal {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// magic number does not describe unsigned-byte data of the expected rank
class BadMagic : public DataError {
public:
    using DataError::DataError;
};

// file ends before the header's element count is satisfied
class Truncated : public DataError {
public:
    using DataError::DataError;
};

// header dimensions are zero, negative, or multiply past what fits in memory
class DimensionOverflow : public DataError {
public:
    using DataError::DataError;
};

// one unsigned-byte IDX payload; dims come from the header in order
struct IdxData {
    std::vector<int> dims;
    std::vector<uint8_t> bytes;
};

// Reads an IDX file of unsigned bytes. Gzip-compressed files are handled
// transparently regardless of extension.
IdxData load_idx(const std::string& path);

// Writes an IDX file of unsigned bytes; a ".gz" suffix selects compression.
void save_idx(const std::string& path, const IdxData& data);

double normalize_pixel(uint8_t px);

struct Dataset {
    Tensor images;           // [n, 1, h, w], already normalized
    std::vector<int> labels;
    int num_classes = 0;

    int size() const { return images.ndim() == 4 ? images.dim(0) : 0; }
};

// Pairs an image payload [n, h, w] with a label payload [n] and normalizes.
Dataset make_dataset(const IdxData& images, const IdxData& labels, int num_classes);

// Deterministic class-balanced subset: per_class instances of every class,
// order shuffled by the seed. Throws if any class runs short.
Dataset stratified_subset(const Dataset& full, int per_class, uint64_t seed);

struct Batch {
    Tensor x;               // [m, 1, h, w]
    std::vector<int> y;
};

// Copies rows order[start, start+count) out of the dataset.
Batch take_batch(const Dataset& ds, const std::vector<int>& order, size_t start, int count);

}  // namespace frugal
