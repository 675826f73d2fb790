#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace limbnet {

// Thrown when operand shapes do not conform. The message carries the
// offending dimensions so callers can see what was passed.
class shape_error : public std::runtime_error {
public:
    explicit shape_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Dense row-major tensor of doubles. Rank is dynamic; all layer code in
// this library uses rank 1..3.
struct TensorF {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    TensorF() = default;
    TensorF(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {}

    static TensorF zeros(std::vector<std::size_t> s);

    std::size_t numel() const {
        std::size_t n = 1;
        for (std::size_t d : shape) n *= d;
        return shape.empty() ? 0 : n;
    }
    std::size_t rank() const { return shape.size(); }
    std::size_t dim(std::size_t i) const { return shape.at(i); }

    double& at(std::size_t i) { return data[i]; }
    const double& at(std::size_t i) const { return data[i]; }
    double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
    const double& at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) {
        return data[(i * shape[1] + j) * shape[2] + k];
    }
    const double& at(std::size_t i, std::size_t j, std::size_t k) const {
        return data[(i * shape[1] + j) * shape[2] + k];
    }

    bool all_finite() const;
};

// "4x256" style string for error messages.
std::string shape_str(const std::vector<std::size_t>& shape);

// Throws shape_error with a diagnostic naming `what` if cond is false.
void require_shape(bool cond, const std::string& what);

}  // namespace limbnet
