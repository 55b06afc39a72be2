#ifndef BITPRUNE_TENSORIO_HPP
#define BITPRUNE_TENSORIO_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bitprune/matrix.hpp"

#include <json.hpp>

namespace bitprune {

// PBT1 container: "PBT1" magic, u8 version (=1), u8 dtype, u8 ndim,
// ndim x u64 little-endian dims, then the row-major little-endian payload.
// Bitpacked tensors store one element per bit, LSB first, bit 1 == +1.
enum class Dtype : uint8_t {
    f32 = 0,
    f64 = 1,
    i8 = 2,
    u1 = 3, // bitpacked
};

size_t dtype_payload_bytes(Dtype dt, uint64_t elems);

struct Tensor {
    Dtype dtype = Dtype::f32;
    std::vector<uint64_t> dims;
    std::vector<uint8_t> payload; // little-endian, row-major

    uint64_t elem_count() const;

    // Conversions used throughout the pipeline. Matrix round trips are exact
    // for f64 and rounded once for f32.
    static Tensor from_matrix(const Matrix& m, Dtype dt = Dtype::f32);
    static Tensor from_doubles(const std::vector<double>& v, std::vector<uint64_t> dims,
                               Dtype dt = Dtype::f64);
    static Tensor from_mask(const Mask& m);
    static Tensor from_bits(const std::vector<uint8_t>& bits); // one element per entry, 0/1
    static Tensor from_i8(const std::vector<int8_t>& v, std::vector<uint64_t> dims);

    Matrix to_matrix() const;            // 2-D f32/f64 only
    Mask to_mask() const;                // 2-D u1 only
    std::vector<uint8_t> to_bits() const; // 1-D u1 only
    std::vector<int8_t> to_i8() const;   // i8 only
    std::vector<double> to_doubles() const; // f32/f64, any shape, row-major
};

void write_tensor(const Tensor& t, const std::filesystem::path& path);
Tensor read_tensor(const std::filesystem::path& path);

// Serialized header+payload bytes, identical to the on-disk form.
std::vector<uint8_t> tensor_bytes(const Tensor& t);
Tensor tensor_from_bytes(const std::vector<uint8_t>& buf);

// Model manifest: {"layers":[{"name","weight","n","m"}],"meta":{}}.
// Weight paths are resolved relative to the manifest's directory.
struct LayerDesc {
    std::string name;
    std::string weight; // path to a PBT1 tensor, dims (n, m)
    uint64_t n = 0;
    uint64_t m = 0;
};

struct ModelManifest {
    std::vector<LayerDesc> layers;
    nlohmann::ordered_json meta;
};

ModelManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const ModelManifest& mf, const std::filesystem::path& path);

// Layers chain output->input: layer k+1 must consume layer k's features.
void check_chain(const ModelManifest& mf);

} // namespace bitprune

#endif
