#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dsg/matrix.hpp"

namespace dsg::io {

/// On-disk tensor container. Layout, all little-endian:
///   bytes 0..3   magic "DSG1"
///   byte  4      dtype: 0 = float64, 1 = int64
///   byte  5      ndim: 1 or 2
///   next ndim*8  dims, uint64 each
///   payload      row-major values, 8 bytes each
struct Tensor {
    enum class Dtype : std::uint8_t { f64 = 0, i64 = 1 };

    Dtype dtype = Dtype::f64;
    std::vector<std::uint64_t> dims;
    std::vector<double> f64;       // populated when dtype == f64
    std::vector<std::int64_t> i64; // populated when dtype == i64

    std::size_t element_count() const {
        std::size_t n = 1;
        for (auto d : dims) n *= static_cast<std::size_t>(d);
        return dims.empty() ? 0 : n;
    }

    Matrix as_matrix() const;                 // requires ndim == 2, f64
    std::vector<double> as_vector() const;    // requires ndim == 1, f64
    std::vector<std::int64_t> as_labels() const; // requires ndim == 1, i64
};

void write_tensor(const std::filesystem::path& path, const Tensor& t);
void write_tensor(const std::filesystem::path& path, const Matrix& m);
void write_tensor(const std::filesystem::path& path, const std::vector<double>& v);
void write_tensor(const std::filesystem::path& path, const std::vector<std::int64_t>& v);

Tensor read_tensor(const std::filesystem::path& path);

} // namespace dsg::io
