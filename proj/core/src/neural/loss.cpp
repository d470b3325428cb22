#include "envmorph/neural/loss.hpp"

#include <cmath>

#include "envmorph/errors.hpp"

namespace envmorph::nn {

LossKind parse_loss(const std::string& name) {
  if (name == "l1" || name == "L1") return LossKind::L1;
  if (name == "rmse" || name == "RMSE") return LossKind::Rmse;
  throw InvalidArgument("unknown loss '" + name + "' (expected l1 or rmse)");
}

std::string loss_name(LossKind kind) { return kind == LossKind::L1 ? "l1" : "rmse"; }

template <typename T>
LossResult<T> l1_loss(const Matrix<T>& prediction, const Matrix<T>& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw InvalidArgument("l1_loss: shape mismatch");
  }
  const double n = static_cast<double>(prediction.size());
  LossResult<T> r;
  r.grad.resize(prediction.rows(), prediction.cols());
  double sum = 0.0;
  for (Index i = 0; i < prediction.size(); ++i) {
    const T d = prediction(i) - target(i);
    sum += std::abs(static_cast<double>(d));
    r.grad(i) = static_cast<T>((d > T(0) ? 1.0 : (d < T(0) ? -1.0 : 0.0)) / n);
  }
  r.value = sum / n;
  return r;
}

template <typename T>
LossResult<T> rmse_loss(const Matrix<T>& prediction, const Matrix<T>& target) {
  if (prediction.rows() != target.rows() || prediction.cols() != target.cols()) {
    throw InvalidArgument("rmse_loss: shape mismatch");
  }
  const double n = static_cast<double>(prediction.size());
  double sum = 0.0;
  for (Index i = 0; i < prediction.size(); ++i) {
    const double d = static_cast<double>(prediction(i)) - static_cast<double>(target(i));
    sum += d * d;
  }
  LossResult<T> r;
  r.value = std::sqrt(sum / n);
  r.grad.resize(prediction.rows(), prediction.cols());
  if (r.value == 0.0) {
    r.grad.setZero();
    return r;
  }
  const double scale = 1.0 / (n * r.value);
  for (Index i = 0; i < prediction.size(); ++i) {
    r.grad(i) = static_cast<T>((static_cast<double>(prediction(i)) - static_cast<double>(target(i))) * scale);
  }
  return r;
}

template <typename T>
LossResult<T> weighted_loss(const std::vector<LossTerm>& terms, const Matrix<T>& prediction,
                            const Matrix<T>& target) {
  if (terms.empty()) throw InvalidArgument("weighted_loss: no terms");
  LossResult<T> total;
  total.grad = Matrix<T>::Zero(prediction.rows(), prediction.cols());
  for (const auto& term : terms) {
    const auto r = term.kind == LossKind::L1 ? l1_loss(prediction, target) : rmse_loss(prediction, target);
    total.value += term.weight * r.value;
    total.grad += static_cast<T>(term.weight) * r.grad;
  }
  return total;
}

template LossResult<float> l1_loss(const Matrix<float>&, const Matrix<float>&);
template LossResult<double> l1_loss(const Matrix<double>&, const Matrix<double>&);
template LossResult<float> rmse_loss(const Matrix<float>&, const Matrix<float>&);
template LossResult<double> rmse_loss(const Matrix<double>&, const Matrix<double>&);
template LossResult<float> weighted_loss(const std::vector<LossTerm>&, const Matrix<float>&, const Matrix<float>&);
template LossResult<double> weighted_loss(const std::vector<LossTerm>&, const Matrix<double>&,
                                          const Matrix<double>&);

}  // namespace envmorph::nn
