#pragma once

#include <Eigen/Dense>

namespace twoport::nn {

template <class T>
using VecT = Eigen::Matrix<T, Eigen::Dynamic, 1>;
template <class T>
using MatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using RowMatT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using ConstMapT = Eigen::Map<const RowMatT<T>>;
template <class T>
using MapT = Eigen::Map<RowMatT<T>>;

} // namespace twoport::nn
