// SPDX-License-Identifier: Apache-2.0

#include "dgieti/linalg.hpp"

#include <unordered_map>

namespace dgieti::linalg {

SparseMatrix sparse_from_triplets(int rows, int cols, const std::vector<Triplet>& triplets) {
    SparseMatrix a(rows, cols);
    a.setFromTriplets(triplets.begin(), triplets.end());
    a.makeCompressed();
    return a;
}

double max_asymmetry(const SparseMatrix& a) {
    SparseMatrix d = SparseMatrix(a.transpose()) - a;
    double m = 0.0;
    for (int k = 0; k < d.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(d, k); it; ++it)
            m = std::max(m, std::abs(it.value()));
    return m;
}

SparseMatrix sparse_block(const SparseMatrix& a, const std::vector<int>& rows,
                          const std::vector<int>& cols) {
    std::unordered_map<int, int> row_pos;
    row_pos.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) row_pos[rows[i]] = static_cast<int>(i);

    std::vector<Triplet> trips;
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (SparseMatrix::InnerIterator it(a, cols[j]); it; ++it) {
            auto pos = row_pos.find(static_cast<int>(it.row()));
            if (pos != row_pos.end())
                trips.emplace_back(pos->second, static_cast<int>(j), it.value());
        }
    return sparse_from_triplets(static_cast<int>(rows.size()), static_cast<int>(cols.size()), trips);
}

SpdFactorization::SpdFactorization(const SparseMatrix& a) : n_(static_cast<int>(a.rows())) {
    if (a.rows() != a.cols()) throw DimensionError("spd_factorize: matrix not square");
    llt_.compute(a);
    if (llt_.info() != Eigen::Success)
        throw NotSpdError("spd_factorize: non-positive pivot, matrix is not SPD");
}

Vector SpdFactorization::solve(const Vector& b) const {
    if (b.size() != n_) throw DimensionError("SpdFactorization::solve: size mismatch");
    return llt_.solve(b);
}

DenseMatrix SpdFactorization::solve_many(const DenseMatrix& b) const {
    if (b.rows() != n_) throw DimensionError("SpdFactorization::solve_many: size mismatch");
    return llt_.solve(b);
}

SpdFactorization spd_factorize(const SparseMatrix& a) { return SpdFactorization(a); }

namespace {
constexpr int kDenseEigGuard = 2000;
}

Vector dense_sym_eig(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("dense_sym_eig: matrix not square");
    if (a.rows() > kDenseEigGuard) throw DimensionError("dense_sym_eig: size guard exceeded");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

std::pair<Vector, DenseMatrix> dense_sym_eig_vectors(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("dense_sym_eig: matrix not square");
    if (a.rows() > kDenseEigGuard) throw DimensionError("dense_sym_eig: size guard exceeded");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a);
    return {es.eigenvalues(), es.eigenvectors()};
}

}  // namespace dgieti::linalg
