#pragma once

#include <string>
#include <vector>

#include "envmorph/neural/tensor.hpp"

namespace envmorph::nn {

enum class LossKind { L1, Rmse };

LossKind parse_loss(const std::string& name);
std::string loss_name(LossKind kind);

template <typename T>
struct LossResult {
  double value = 0.0;
  Matrix<T> grad;  // d value / d prediction
};

/// Mean absolute error over all elements.
template <typename T>
LossResult<T> l1_loss(const Matrix<T>& prediction, const Matrix<T>& target);

/// sqrt(mean squared error) over all elements; the gradient is zero when
/// the error is exactly zero.
template <typename T>
LossResult<T> rmse_loss(const Matrix<T>& prediction, const Matrix<T>& target);

struct LossTerm {
  LossKind kind = LossKind::L1;
  double weight = 1.0;
};

/// Weighted sum of loss terms. Extra terms (e.g. an adversarial critic) can
/// be appended without changing the training interface.
template <typename T>
LossResult<T> weighted_loss(const std::vector<LossTerm>& terms, const Matrix<T>& prediction,
                            const Matrix<T>& target);

}  // namespace envmorph::nn
