#pragma once

#include <vector>

namespace multinex::smallmat {

// Eigendecomposition of a symmetric n x n matrix (row-major) by cyclic
// Jacobi rotations. values are sorted descending; vectors holds the matching
// eigenvectors as columns: vectors[i * n + j] is component i of eigenvector j.
struct SymEigen {
    int n = 0;
    std::vector<double> values;
    std::vector<double> vectors;
};
SymEigen eigen_symmetric(std::vector<double> a, int n);

// Solves A X = B for symmetric positive definite A (n x n) and B (n x m),
// both row-major, via Cholesky factorization. Throws std::domain_error when
// A is not positive definite.
std::vector<double> solve_spd(std::vector<double> a, int n, std::vector<double> b, int m);

} // namespace multinex::smallmat
