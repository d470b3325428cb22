#pragma once

#include <Eigen/Core>

#include <array>
#include <cmath>
#include <cstddef>

namespace envmorph::nn {

using Index = Eigen::Index;

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Batch of 1-D feature maps, shape [batch, channels, length].
///
/// Stored as a column-major [channels, batch * length] matrix: column
/// `n * length + l` holds every channel of sample n at position l. Dense
/// activations are the length-1 case.
template <typename T>
struct Tensor {
  Matrix<T> data;
  Index batch = 0;
  Index length = 0;

  Tensor() = default;
  Tensor(Index batch_, Index channels, Index length_)
      : data(Matrix<T>::Zero(channels, batch_ * length_)), batch(batch_), length(length_) {}

  Index channels() const noexcept { return data.rows(); }
  std::array<Index, 3> shape() const noexcept { return {batch, channels(), length}; }
  Index size() const noexcept { return data.size(); }

  auto column(Index n, Index l) { return data.col(n * length + l); }
  auto column(Index n, Index l) const { return data.col(n * length + l); }

  bool all_finite() const { return data.allFinite(); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.data = data.template cast<U>();
    out.batch = batch;
    out.length = length;
    return out;
  }
};

}  // namespace envmorph::nn
