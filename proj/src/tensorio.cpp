#include "bitprune/tensorio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "bitprune/error.hpp"

namespace bitprune {

namespace {

constexpr char kMagic[4] = {'P', 'B', 'T', '1'};
constexpr uint8_t kVersion = 1;
constexpr int kMaxDims = 4;

void put_u64le(std::vector<uint8_t>& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

uint64_t get_u64le(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
    return v;
}

void put_f32le(std::vector<uint8_t>& out, float f) {
    const uint32_t v = std::bit_cast<uint32_t>(f);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

void put_f64le(std::vector<uint8_t>& out, double d) {
    put_u64le(out, std::bit_cast<uint64_t>(d));
}

float get_f32le(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(v);
}

double get_f64le(const uint8_t* p) {
    return std::bit_cast<double>(get_u64le(p));
}

void check_dims(const std::vector<uint64_t>& dims) {
    if (dims.empty() || dims.size() > kMaxDims)
        throw DataError("tensor: ndim must be 1..4, got " + std::to_string(dims.size()));
    for (uint64_t d : dims)
        if (d == 0) throw DataError("tensor: zero-length dimension");
}

} // namespace

size_t dtype_payload_bytes(Dtype dt, uint64_t elems) {
    switch (dt) {
        case Dtype::f32: return elems * 4;
        case Dtype::f64: return elems * 8;
        case Dtype::i8: return elems;
        case Dtype::u1: return (elems + 7) / 8;
    }
    throw DataError("tensor: unknown dtype");
}

uint64_t Tensor::elem_count() const {
    uint64_t n = 1;
    for (uint64_t d : dims) n *= d;
    return n;
}

Tensor Tensor::from_matrix(const Matrix& m, Dtype dt) {
    if (dt != Dtype::f32 && dt != Dtype::f64)
        throw DataError("tensor: matrices serialize as f32 or f64");
    Tensor t;
    t.dtype = dt;
    t.dims = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
    t.payload.reserve(dtype_payload_bytes(dt, m.size()));
    const double* p = m.data();
    for (size_t i = 0; i < m.size(); ++i) {
        if (dt == Dtype::f32)
            put_f32le(t.payload, static_cast<float>(p[i]));
        else
            put_f64le(t.payload, p[i]);
    }
    return t;
}

Tensor Tensor::from_doubles(const std::vector<double>& v, std::vector<uint64_t> dims, Dtype dt) {
    if (dt != Dtype::f32 && dt != Dtype::f64)
        throw DataError("tensor: doubles serialize as f32 or f64");
    check_dims(dims);
    Tensor t;
    t.dtype = dt;
    t.dims = std::move(dims);
    if (t.elem_count() != v.size()) throw DataError("tensor: dims/data mismatch");
    t.payload.reserve(dtype_payload_bytes(dt, v.size()));
    for (double d : v) {
        if (dt == Dtype::f32)
            put_f32le(t.payload, static_cast<float>(d));
        else
            put_f64le(t.payload, d);
    }
    return t;
}

Tensor Tensor::from_mask(const Mask& m) {
    Tensor t;
    t.dtype = Dtype::u1;
    t.dims = {static_cast<uint64_t>(m.rows()), static_cast<uint64_t>(m.cols())};
    t.payload.assign(dtype_payload_bytes(Dtype::u1, static_cast<uint64_t>(m.rows()) * m.cols()), 0);
    size_t e = 0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j, ++e)
            if (m(i, j)) t.payload[e >> 3] |= static_cast<uint8_t>(1u << (e & 7));
    return t;
}

Tensor Tensor::from_bits(const std::vector<uint8_t>& bits) {
    if (bits.empty()) throw DataError("tensor: empty bit vector");
    Tensor t;
    t.dtype = Dtype::u1;
    t.dims = {bits.size()};
    t.payload.assign((bits.size() + 7) / 8, 0);
    for (size_t e = 0; e < bits.size(); ++e)
        if (bits[e]) t.payload[e >> 3] |= static_cast<uint8_t>(1u << (e & 7));
    return t;
}

Tensor Tensor::from_i8(const std::vector<int8_t>& v, std::vector<uint64_t> dims) {
    check_dims(dims);
    Tensor t;
    t.dtype = Dtype::i8;
    t.dims = std::move(dims);
    if (t.elem_count() != v.size()) throw DataError("tensor: i8 dims/data mismatch");
    t.payload.resize(v.size());
    std::memcpy(t.payload.data(), v.data(), v.size());
    return t;
}

Matrix Tensor::to_matrix() const {
    if (dims.size() != 2) throw DataError("tensor: expected 2-D tensor");
    if (dtype != Dtype::f32 && dtype != Dtype::f64)
        throw DataError("tensor: expected float tensor");
    Matrix m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    double* p = m.data();
    for (size_t i = 0; i < m.size(); ++i)
        p[i] = (dtype == Dtype::f32) ? static_cast<double>(get_f32le(payload.data() + i * 4))
                                     : get_f64le(payload.data() + i * 8);
    return m;
}

Mask Tensor::to_mask() const {
    if (dims.size() != 2 || dtype != Dtype::u1)
        throw DataError("tensor: expected 2-D bitpacked tensor");
    Mask m(static_cast<int>(dims[0]), static_cast<int>(dims[1]));
    size_t e = 0;
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j, ++e)
            m(i, j) = (payload[e >> 3] >> (e & 7)) & 1u;
    return m;
}

std::vector<uint8_t> Tensor::to_bits() const {
    if (dims.size() != 1 || dtype != Dtype::u1)
        throw DataError("tensor: expected 1-D bitpacked tensor");
    std::vector<uint8_t> bits(dims[0]);
    for (size_t e = 0; e < bits.size(); ++e)
        bits[e] = (payload[e >> 3] >> (e & 7)) & 1u;
    return bits;
}

std::vector<double> Tensor::to_doubles() const {
    if (dtype != Dtype::f32 && dtype != Dtype::f64)
        throw DataError("tensor: expected float tensor");
    std::vector<double> v(elem_count());
    for (size_t i = 0; i < v.size(); ++i)
        v[i] = (dtype == Dtype::f32) ? static_cast<double>(get_f32le(payload.data() + i * 4))
                                     : get_f64le(payload.data() + i * 8);
    return v;
}

std::vector<int8_t> Tensor::to_i8() const {
    if (dtype != Dtype::i8) throw DataError("tensor: expected i8 tensor");
    std::vector<int8_t> v(elem_count());
    std::memcpy(v.data(), payload.data(), v.size());
    return v;
}

std::vector<uint8_t> tensor_bytes(const Tensor& t) {
    check_dims(t.dims);
    const size_t want = dtype_payload_bytes(t.dtype, t.elem_count());
    if (t.payload.size() != want)
        throw DataError("tensor: payload size mismatch");

    std::vector<uint8_t> out;
    out.reserve(7 + 8 * t.dims.size() + t.payload.size());
    out.insert(out.end(), kMagic, kMagic + 4);
    out.push_back(kVersion);
    out.push_back(static_cast<uint8_t>(t.dtype));
    out.push_back(static_cast<uint8_t>(t.dims.size()));
    for (uint64_t d : t.dims) put_u64le(out, d);
    out.insert(out.end(), t.payload.begin(), t.payload.end());
    return out;
}

Tensor tensor_from_bytes(const std::vector<uint8_t>& buf) {
    if (buf.size() < 7) throw DataError("tensor: truncated header");
    if (std::memcmp(buf.data(), kMagic, 4) != 0) throw DataError("tensor: bad magic");
    if (buf[4] != kVersion)
        throw DataError("tensor: unsupported version " + std::to_string(buf[4]));
    const uint8_t dt = buf[5];
    if (dt > static_cast<uint8_t>(Dtype::u1))
        throw DataError("tensor: unknown dtype code " + std::to_string(dt));
    const int ndim = buf[6];
    if (ndim < 1 || ndim > kMaxDims)
        throw DataError("tensor: ndim must be 1..4, got " + std::to_string(ndim));
    if (buf.size() < 7 + 8 * static_cast<size_t>(ndim))
        throw DataError("tensor: truncated dims");

    Tensor t;
    t.dtype = static_cast<Dtype>(dt);
    for (int i = 0; i < ndim; ++i) {
        const uint64_t d = get_u64le(buf.data() + 7 + 8 * i);
        if (d == 0) throw DataError("tensor: zero-length dimension");
        t.dims.push_back(d);
    }
    const size_t off = 7 + 8 * static_cast<size_t>(ndim);
    const size_t want = dtype_payload_bytes(t.dtype, t.elem_count());
    if (buf.size() - off < want) throw DataError("tensor: truncated payload");
    if (buf.size() - off > want) throw DataError("tensor: trailing bytes after payload");
    t.payload.assign(buf.begin() + off, buf.end());
    return t;
}

void write_tensor(const Tensor& t, const std::filesystem::path& path) {
    const auto buf = tensor_bytes(t);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path.string());
    std::vector<uint8_t> buf(std::istreambuf_iterator<char>(f), {});
    return tensor_from_bytes(buf);
}

ModelManifest read_manifest(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open: " + path.string());
    nlohmann::ordered_json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("manifest: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("layers") || !j["layers"].is_array())
        throw DataError("manifest: missing layers array");

    ModelManifest mf;
    mf.meta = j.value("meta", nlohmann::ordered_json::object());
    for (const auto& lj : j["layers"]) {
        if (!lj.contains("name") || !lj.contains("weight") || !lj.contains("n") || !lj.contains("m"))
            throw DataError("manifest: layer entry needs name/weight/n/m");
        LayerDesc d;
        d.name = lj["name"].get<std::string>();
        d.weight = lj["weight"].get<std::string>();
        d.n = lj["n"].get<uint64_t>();
        d.m = lj["m"].get<uint64_t>();
        if (d.n == 0 || d.m == 0) throw DataError("manifest: zero-sized layer " + d.name);
        mf.layers.push_back(std::move(d));
    }
    if (mf.layers.empty()) throw DataError("manifest: no layers");
    return mf;
}

void write_manifest(const ModelManifest& mf, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["layers"] = nlohmann::ordered_json::array();
    for (const auto& d : mf.layers)
        j["layers"].push_back({{"name", d.name}, {"weight", d.weight}, {"n", d.n}, {"m", d.m}});
    j["meta"] = mf.meta.is_null() ? nlohmann::ordered_json::object() : mf.meta;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f << j.dump(2) << '\n';
    if (!f) throw IoError("write failed: " + path.string());
}

void check_chain(const ModelManifest& mf) {
    for (size_t k = 0; k + 1 < mf.layers.size(); ++k) {
        if (mf.layers[k].n != mf.layers[k + 1].m)
            throw DataError("manifest: layer " + mf.layers[k + 1].name + " expects " +
                            std::to_string(mf.layers[k + 1].m) + " input features but layer " +
                            mf.layers[k].name + " produces " + std::to_string(mf.layers[k].n));
    }
}

} // namespace bitprune
