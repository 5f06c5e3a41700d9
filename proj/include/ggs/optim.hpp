#pragma once

#include "ggs/linalg.hpp"

#include <cstddef>

namespace ggs {

struct AdamOptions {
    double lr = 0.01;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

/// First/second moment estimates for one parameter matrix.
class AdamState {
public:
    AdamState(std::size_t rows, std::size_t cols, AdamOptions options = {});

    /// One bias-corrected Adam update of `param` in place.
    void step(DenseMatrix& param, const DenseMatrix& grad);

    std::size_t t() const noexcept { return t_; }
    const DenseMatrix& m() const noexcept { return m_; }
    const DenseMatrix& v() const noexcept { return v_; }
    const AdamOptions& options() const noexcept { return options_; }

private:
    AdamOptions options_;
    DenseMatrix m_;
    DenseMatrix v_;
    std::size_t t_ = 0;
};

inline void adam_step(AdamState& state, DenseMatrix& param, const DenseMatrix& grad) { state.step(param, grad); }

}  // namespace ggs
