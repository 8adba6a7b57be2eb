#include "dsg/io/tensor_file.hpp"

#include <bit>
#include <cstring>
#include <fstream>

#include "dsg/error.hpp"

namespace dsg::io {

namespace {

constexpr char kMagic[4] = {'D', 'S', 'G', '1'};

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

Matrix Tensor::as_matrix() const {
    if (dtype != Dtype::f64 || dims.size() != 2) throw DataError("tensor is not a float64 matrix");
    Matrix m(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]));
    std::copy(f64.begin(), f64.end(), m.data());
    return m;
}

std::vector<double> Tensor::as_vector() const {
    if (dtype != Dtype::f64 || dims.size() != 1) throw DataError("tensor is not a float64 vector");
    return f64;
}

std::vector<std::int64_t> Tensor::as_labels() const {
    if (dtype != Dtype::i64 || dims.size() != 1) throw DataError("tensor is not an int64 vector");
    return i64;
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    if (t.dims.empty() || t.dims.size() > 2) throw DataError("ndim must be 1 or 2");
    const std::size_t n = t.element_count();
    if (t.dtype == Tensor::Dtype::f64 ? t.f64.size() != n : t.i64.size() != n)
        throw DataError("payload length does not match dims");

    std::string buf;
    buf.reserve(6 + 8 * t.dims.size() + 8 * n);
    buf.append(kMagic, 4);
    buf.push_back(static_cast<char>(t.dtype));
    buf.push_back(static_cast<char>(t.dims.size()));
    for (auto d : t.dims) put_u64(buf, d);
    if (t.dtype == Tensor::Dtype::f64) {
        for (double x : t.f64) put_u64(buf, std::bit_cast<std::uint64_t>(x));
    } else {
        for (std::int64_t x : t.i64) put_u64(buf, std::bit_cast<std::uint64_t>(x));
    }

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("write failed for '" + path.string() + "'");
}

void write_tensor(const std::filesystem::path& path, const Matrix& m) {
    Tensor t;
    t.dtype = Tensor::Dtype::f64;
    t.dims = {m.rows(), m.cols()};
    t.f64 = m.values();
    write_tensor(path, t);
}

void write_tensor(const std::filesystem::path& path, const std::vector<double>& v) {
    Tensor t;
    t.dtype = Tensor::Dtype::f64;
    t.dims = {v.size()};
    t.f64 = v;
    write_tensor(path, t);
}

void write_tensor(const std::filesystem::path& path, const std::vector<std::int64_t>& v) {
    Tensor t;
    t.dtype = Tensor::Dtype::i64;
    t.dims = {v.size()};
    t.i64 = v;
    write_tensor(path, t);
}

Tensor read_tensor(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t size = bytes.size();

    if (size < 6 || std::memcmp(p, kMagic, 4) != 0)
        throw DataError("bad magic in '" + path.string() + "'");
    const std::uint8_t dtype_code = p[4];
    if (dtype_code > 1) throw DataError("bad dtype in '" + path.string() + "'");
    const std::uint8_t ndim = p[5];
    if (ndim < 1 || ndim > 2) throw DataError("bad ndim in '" + path.string() + "'");
    if (size < 6 + 8ull * ndim) throw DataError("truncated payload in '" + path.string() + "'");

    Tensor t;
    t.dtype = static_cast<Tensor::Dtype>(dtype_code);
    for (std::uint8_t i = 0; i < ndim; ++i) t.dims.push_back(get_u64(p + 6 + 8 * i));

    const std::size_t n = t.element_count();
    const std::size_t header = 6 + 8ull * ndim;
    if (size < header + 8 * n) throw DataError("truncated payload in '" + path.string() + "'");
    if (size > header + 8 * n) throw DataError("trailing bytes in '" + path.string() + "'");

    const unsigned char* payload = p + header;
    if (t.dtype == Tensor::Dtype::f64) {
        t.f64.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            t.f64[i] = std::bit_cast<double>(get_u64(payload + 8 * i));
    } else {
        t.i64.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            t.i64[i] = std::bit_cast<std::int64_t>(get_u64(payload + 8 * i));
    }
    return t;
}

} // namespace dsg::io
