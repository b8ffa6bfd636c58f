// SPDX-License-Identifier: Apache-2.0
//
// cellfree-sim: link-level simulator for the cell-free massive MIMO downlink
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cellfree {

/// Dense row-major matrix with value semantics. Sized once, then indexed;
/// all simulator quantities (beta, gamma, eta, channel realizations) are
/// small M-by-K blocks, so no external linear algebra is needed.
template <typename T>
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, T value = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    T &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const T &operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    T *row(std::size_t r) { return data_.data() + r * cols_; }
    const T *row(std::size_t r) const { return data_.data() + r * cols_; }

    T *data() { return data_.data(); }
    const T *data() const { return data_.data(); }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    void fill(T value) { data_.assign(data_.size(), value); }

    void resize(std::size_t rows, std::size_t cols, T value = T{}) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, value);
    }

    template <typename U>
    bool same_shape(const Matrix<U> &other) const {
        return rows_ == other.rows() && cols_ == other.cols();
    }

    friend bool operator==(const Matrix &a, const Matrix &b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<std::complex<double>>;
using Complex = std::complex<double>;

inline void require_same_shape(const RealMatrix &a, const RealMatrix &b, const char *what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": shape mismatch");
}

} // namespace cellfree
