#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace neuromas {

/// Dense row-major matrix of doubles. Small helper, not a linear-algebra
/// library; the policy math only needs element access, scaled accumulation
/// and Frobenius norms.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
        if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
    }

    double& operator()(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

    size_t size() const { return data.size(); }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }

    void add_scaled(const Matrix& other, double s) {
        if (other.rows != rows || other.cols != cols)
            throw std::invalid_argument("Matrix::add_scaled: shape mismatch");
        for (size_t i = 0; i < data.size(); ++i) data[i] += s * other.data[i];
    }

    void scale(double s) {
        for (double& v : data) v *= s;
    }

    double sq_norm() const {
        double s = 0.0;
        for (double v : data) s += v * v;
        return s;
    }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }

    bool operator==(const Matrix& other) const {
        return rows == other.rows && cols == other.cols && data == other.data;
    }
};

// --- deterministic rng plumbing ---
//
// All randomness flows through mt19937_64 streams seeded via splitmix64
// mixing, so runs are reproducible across platforms and within-layer
// evaluation order cannot change sampled content.

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline uint64_t fnv1a64(const std::string& s) {
    uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

/// Stream seed for (master, episode, address-ish label). Used by the
/// runtime to give every node its own rng stream.
inline uint64_t derive_seed(uint64_t master, uint64_t episode, const std::string& label) {
    uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(episode));
    h = splitmix64(h ^ fnv1a64(label));
    return h;
}

/// Uniform double in [0,1) with 53 bits, identical on every platform.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (no cached spare: one value per call
/// keeps replay independent of call parity).
inline double normal01(std::mt19937_64& rng) {
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
}

inline Matrix randn_matrix(int rows, int cols, double scale, std::mt19937_64& rng) {
    Matrix m(rows, cols);
    for (double& v : m.data) v = scale * normal01(rng);
    return m;
}

}  // namespace neuromas
