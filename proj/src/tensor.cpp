#include "ketgpt/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ketgpt::nn {

void softmax_inplace(std::span<double> x) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double v : x) mx = std::max(mx, v);
    double sum = 0.0;
    for (double& v : x) {
        v = std::exp(v - mx);
        sum += v;
    }
    for (double& v : x) v /= sum;
}

std::vector<double> softmax(std::span<const double> x) {
    std::vector<double> out(x.begin(), x.end());
    softmax_inplace(out);
    return out;
}

Tensor2 attention(const Tensor2& Q, const Tensor2& K, const Tensor2& V,
                  bool causal, Tensor2* weights) {
    if (Q.cols != K.cols || K.rows != V.rows)
        throw std::invalid_argument("attention: dimension mismatch");
    const int n = Q.rows, m = K.rows, dk = Q.cols, dv = V.cols;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    Tensor2 probs(n, m);
    for (int i = 0; i < n; i++) {
        for (int j = 0; j < m; j++) {
            if (causal && j > i) {
                probs.at(i, j) = -std::numeric_limits<double>::infinity();
                continue;
            }
            double dot = 0.0;
            for (int t = 0; t < dk; t++) dot += Q.at(i, t) * K.at(j, t);
            probs.at(i, j) = dot * scale;
        }
        softmax_inplace(probs.row(i));
    }

    Tensor2 out(n, dv);
    for (int i = 0; i < n; i++)
        for (int j = 0; j < m; j++) {
            double p = probs.at(i, j);
            if (p == 0.0) continue;
            for (int t = 0; t < dv; t++) out.at(i, t) += p * V.at(j, t);
        }
    if (weights) *weights = std::move(probs);
    return out;
}

double gelu(double x) {
    constexpr double c = 0.7978845608028654;  // sqrt(2/pi)
    return 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x)));
}

double gelu_grad(double x) {
    constexpr double c = 0.7978845608028654;
    double u = c * (x + 0.044715 * x * x * x);
    double t = std::tanh(u);
    double du = c * (1.0 + 3.0 * 0.044715 * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

}  // namespace ketgpt::nn
