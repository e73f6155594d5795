#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ketgpt::nn {

// Row-major dense matrix of 64-bit reals.
struct Tensor2 {
    int rows = 0, cols = 0;
    std::vector<double> data;

    Tensor2() = default;
    Tensor2(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
    std::span<double> row(int r) { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    std::span<const double> row(int r) const { return {data.data() + static_cast<size_t>(r) * cols, static_cast<size_t>(cols)}; }
    size_t size() const { return data.size(); }
    void zero() { std::fill(data.begin(), data.end(), 0.0); }

    bool operator==(const Tensor2&) const = default;
};

// Numerically stable softmax (max-subtraction), in place.
void softmax_inplace(std::span<double> x);
std::vector<double> softmax(std::span<const double> x);

// Scaled dot-product attention. Q: n x d_k, K: m x d_k, V: m x d_v.
// Causal mode masks K/V positions j > i before the row softmax.
// If `weights` is non-null it receives the n x m attention matrix.
Tensor2 attention(const Tensor2& Q, const Tensor2& K, const Tensor2& V,
                  bool causal, Tensor2* weights = nullptr);

double gelu(double x);
double gelu_grad(double x);

}  // namespace ketgpt::nn
