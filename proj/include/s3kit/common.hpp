#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace s3kit {

// Raised for invalid arguments, domain violations and malformed inputs.
// The CLI maps it to exit code 1.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// Raised for filesystem / parsing failures. The CLI maps it to exit code 2.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

// Formats a double with 17 significant digits, enough to round-trip any
// IEEE-754 binary64 value exactly. Used for every float we serialize.
std::string format_double(double v);

// `count` evenly spaced samples covering [a, b], endpoints exact.
// Computed as a*(1-t) + b*t so the last point is b itself, not a + n*step.
std::vector<double> linspace(double a, double b, std::size_t count);

// Deterministic, implementation-independent random source. The mt19937_64
// engine is fully specified by the standard, but the distribution adaptors
// (uniform_real_distribution etc.) are not, so every mapping from raw engine
// output to a value is done by hand here to keep seeded streams reproducible
// across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01();

    // Uniform in [a, b).
    double uniform(double a, double b);

    // Uniform integer in [0, n), unbiased via rejection sampling.
    std::uint64_t uniform_index(std::uint64_t n);

    // Standard normal deviate (Box-Muller on two uniform01 draws).
    double gaussian();

private:
    std::mt19937_64 engine_;
};

// Number of worker threads parallel_for may use: hardware concurrency,
// capped by the S3KIT_THREADS environment variable when set.
unsigned thread_budget();

// Runs fn(i) for i in [0, n). Splits the index range into contiguous blocks,
// one per worker. fn must be safe to call concurrently on distinct i.
// Exceptions thrown by fn are collected and the first one is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

// Minimal dense row-major matrix; just enough linear algebra for the
// norm calculators and graph spectra. Not a general-purpose library.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // rows*cols, row-major

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

Matrix transpose(const Matrix& a);

}  // namespace s3kit
