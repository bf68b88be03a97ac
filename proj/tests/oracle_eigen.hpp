#pragma once

// Independent eigenvalue oracle for the spectral tests: classical cyclic
// Jacobi rotations on a dense symmetric matrix. Deliberately shares no code
// with the library's power iteration so the two routes cross-check each other.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "s3kit/common.hpp"

namespace oracle {

// All eigenvalues of a symmetric matrix, unordered.
inline std::vector<double> jacobi_eigenvalues(const s3kit::Matrix& input) {
    if (input.rows != input.cols) throw std::runtime_error("jacobi: matrix not square");
    const std::size_t n = input.rows;
    s3kit::Matrix a = input;

    for (int sweep = 0; sweep < 200; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a.at(p, q) * a.at(p, q);
        if (off < 1e-28) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double apq = a.at(p, q);
                if (std::fabs(apq) < 1e-300) continue;
                double theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    double akp = a.at(k, p);
                    double akq = a.at(k, q);
                    a.at(k, p) = c * akp - s * akq;
                    a.at(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    double apk = a.at(p, k);
                    double aqk = a.at(q, k);
                    a.at(p, k) = c * apk - s * aqk;
                    a.at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> eig(n);
    for (std::size_t i = 0; i < n; ++i) eig[i] = a.at(i, i);
    return eig;
}

// Largest eigenvalue (the adjacency spectral radius for connected graphs).
inline double max_eigenvalue(const s3kit::Matrix& m) {
    double best = -HUGE_VAL;
    for (double v : jacobi_eigenvalues(m)) best = std::max(best, v);
    return best;
}

}  // namespace oracle
