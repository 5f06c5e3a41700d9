#include "ggs/optim.hpp"

#include "ggs/error.hpp"

#include <cmath>

namespace ggs {

AdamState::AdamState(std::size_t rows, std::size_t cols, AdamOptions options)
    : options_(options), m_(rows, cols), v_(rows, cols) {}

void AdamState::step(DenseMatrix& param, const DenseMatrix& grad) {
    if (!param.same_shape(m_) || !grad.same_shape(m_)) {
        throw ShapeError("adam_step: parameter " + param.shape_string() + " / gradient " + grad.shape_string() +
                         " do not match state " + m_.shape_string());
    }
    ++t_;
    const auto& o = options_;
    const double correction1 = 1.0 - std::pow(o.beta1, static_cast<double>(t_));
    const double correction2 = 1.0 - std::pow(o.beta2, static_cast<double>(t_));
    auto& p = param.data();
    const auto& g = grad.data();
    auto& m = m_.data();
    auto& v = v_.data();
    for (std::size_t i = 0; i < p.size(); ++i) {
        m[i] = o.beta1 * m[i] + (1.0 - o.beta1) * g[i];
        v[i] = o.beta2 * v[i] + (1.0 - o.beta2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        p[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
    }
}

}  // namespace ggs
