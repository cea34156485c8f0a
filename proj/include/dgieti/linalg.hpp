// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <stdexcept>
#include <string>
#include <vector>

namespace dgieti {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotSpdError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class TopologyError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

using Vector = Eigen::VectorXd;
using DenseMatrix = Eigen::MatrixXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

namespace linalg {

/// Compressed sparse matrix, column-major, sorted and duplicate-free after
/// construction. Symmetric matrices are stored fully.
using SparseMatrix = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

SparseMatrix sparse_from_triplets(int rows, int cols, const std::vector<Triplet>& triplets);

/// max_ij |A - A^T| over all entries.
double max_asymmetry(const SparseMatrix& a);

/// Sparse block A(r, c) for index subsets (indices need not be contiguous).
SparseMatrix sparse_block(const SparseMatrix& a, const std::vector<int>& rows,
                          const std::vector<int>& cols);

/// Sparse symmetric positive definite factorization (Cholesky with
/// fill-reducing ordering). Immutable after construction; concurrent
/// solves on the same factorization are safe.
class SpdFactorization {
public:
    explicit SpdFactorization(const SparseMatrix& a);

    Vector solve(const Vector& b) const;
    DenseMatrix solve_many(const DenseMatrix& b) const;
    int size() const { return n_; }

private:
    Eigen::SimplicialLLT<SparseMatrix> llt_;
    int n_ = 0;
};

SpdFactorization spd_factorize(const SparseMatrix& a);

/// All eigenvalues of a dense symmetric matrix, ascending. Oracle-sized
/// problems only (n <= 2000).
Vector dense_sym_eig(const DenseMatrix& a);

/// Eigenvalues and eigenvectors (columns, matching order).
std::pair<Vector, DenseMatrix> dense_sym_eig_vectors(const DenseMatrix& a);

}  // namespace linalg
}  // namespace dgieti
