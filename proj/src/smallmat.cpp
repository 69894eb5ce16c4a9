#include "multinex/smallmat.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace multinex::smallmat {

SymEigen eigen_symmetric(std::vector<double> a, int n) {
    if (n < 1 || a.size() != static_cast<size_t>(n) * n)
        throw std::invalid_argument("eigen_symmetric: bad matrix size");

    std::vector<double> v(static_cast<size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) v[i * n + i] = 1.0;

    double frob = 0.0;
    for (double x : a) frob += x * x;
    const double tol = 1e-30 * (1.0 + frob);

    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a[p * n + q] * a[p * n + q];
        if (off <= tol) break;

        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (apq == 0.0) continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a[k * n + p], akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a[p * n + k], aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v[k * n + p], vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
        return a[x * n + x] > a[y * n + y];
    });

    SymEigen out;
    out.n = n;
    out.values.resize(n);
    out.vectors.assign(static_cast<size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        out.values[j] = a[order[j] * n + order[j]];
        for (int i = 0; i < n; ++i) out.vectors[i * n + j] = v[i * n + order[j]];
    }
    return out;
}

std::vector<double> solve_spd(std::vector<double> a, int n, std::vector<double> b, int m) {
    if (n < 1 || m < 1 || a.size() != static_cast<size_t>(n) * n ||
        b.size() != static_cast<size_t>(n) * m)
        throw std::invalid_argument("solve_spd: bad matrix sizes");

    // In-place lower Cholesky factor.
    for (int j = 0; j < n; ++j) {
        double d = a[j * n + j];
        for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
        if (d <= 0.0)
            throw std::domain_error("solve_spd: matrix not positive definite at pivot " +
                                    std::to_string(j));
        const double ljj = std::sqrt(d);
        a[j * n + j] = ljj;
        for (int i = j + 1; i < n; ++i) {
            double sum = a[i * n + j];
            for (int k = 0; k < j; ++k) sum -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = sum / ljj;
        }
    }

    // L y = b, then L^T x = y, per right-hand-side column.
    for (int col = 0; col < m; ++col) {
        for (int i = 0; i < n; ++i) {
            double sum = b[i * m + col];
            for (int k = 0; k < i; ++k) sum -= a[i * n + k] * b[k * m + col];
            b[i * m + col] = sum / a[i * n + i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double sum = b[i * m + col];
            for (int k = i + 1; k < n; ++k) sum -= a[k * n + i] * b[k * m + col];
            b[i * m + col] = sum / a[i * n + i];
        }
    }
    return b;
}

} // namespace multinex::smallmat
