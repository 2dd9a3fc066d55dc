#pragma once

#include <array>
#include <cmath>
#include <cstddef>

// Small dense vector/matrix types for dimensions 2 and 3, plus a cyclic
// Jacobi eigensolver for symmetric matrices. Everything is value-typed and
// allocation-free; d is carried at runtime so 2D and 3D share code paths.

namespace lavlab {

struct Vec {
    int d = 2;
    std::array<double, 3> v{0.0, 0.0, 0.0};

    Vec() = default;
    Vec(double x, double y) : d(2), v{x, y, 0.0} {}
    Vec(double x, double y, double z) : d(3), v{x, y, z} {}

    static Vec zero(int dim) {
        Vec r;
        r.d = dim;
        return r;
    }

    double& operator[](int i) { return v[static_cast<std::size_t>(i)]; }
    double operator[](int i) const { return v[static_cast<std::size_t>(i)]; }
};

inline Vec operator+(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.d; ++i) r[i] += b[i];
    return r;
}

inline Vec operator-(const Vec& a, const Vec& b) {
    Vec r = a;
    for (int i = 0; i < a.d; ++i) r[i] -= b[i];
    return r;
}

inline Vec operator*(double t, const Vec& a) {
    Vec r = a;
    for (int i = 0; i < a.d; ++i) r[i] *= t;
    return r;
}

inline double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.d; ++i) s += a[i] * b[i];
    return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

struct Mat {
    int d = 2;
    std::array<double, 9> m{};  // row-major, first d*d entries used

    Mat() = default;
    explicit Mat(int dim) : d(dim) { m.fill(0.0); }

    static Mat identity(int dim) {
        Mat r(dim);
        for (int i = 0; i < dim; ++i) r(i, i) = 1.0;
        return r;
    }
    static Mat zero(int dim) { return Mat(dim); }
    static Mat diag2(double a, double b) {
        Mat r(2);
        r(0, 0) = a;
        r(1, 1) = b;
        return r;
    }
    static Mat diag3(double a, double b, double c) {
        Mat r(3);
        r(0, 0) = a;
        r(1, 1) = b;
        r(2, 2) = c;
        return r;
    }

    double& operator()(int i, int j) { return m[static_cast<std::size_t>(i * d + j)]; }
    double operator()(int i, int j) const { return m[static_cast<std::size_t>(i * d + j)]; }
};

inline Mat operator+(const Mat& a, const Mat& b) {
    Mat r = a;
    for (int i = 0; i < a.d * a.d; ++i) r.m[static_cast<std::size_t>(i)] += b.m[static_cast<std::size_t>(i)];
    return r;
}

inline Mat operator-(const Mat& a, const Mat& b) {
    Mat r = a;
    for (int i = 0; i < a.d * a.d; ++i) r.m[static_cast<std::size_t>(i)] -= b.m[static_cast<std::size_t>(i)];
    return r;
}

inline Mat operator*(double t, const Mat& a) {
    Mat r = a;
    for (int i = 0; i < a.d * a.d; ++i) r.m[static_cast<std::size_t>(i)] *= t;
    return r;
}

inline Mat matmul(const Mat& a, const Mat& b) {
    Mat r(a.d);
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) {
            double s = 0.0;
            for (int k = 0; k < a.d; ++k) s += a(i, k) * b(k, j);
            r(i, j) = s;
        }
    return r;
}

inline Vec matvec(const Mat& a, const Vec& x) {
    Vec r = Vec::zero(a.d);
    for (int i = 0; i < a.d; ++i) {
        double s = 0.0;
        for (int j = 0; j < a.d; ++j) s += a(i, j) * x[j];
        r[i] = s;
    }
    return r;
}

inline Mat transpose(const Mat& a) {
    Mat r(a.d);
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) r(i, j) = a(j, i);
    return r;
}

inline Mat outer(const Vec& a, const Vec& b) {
    Mat r(a.d);
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) r(i, j) = a[i] * b[j];
    return r;
}

inline double det(const Mat& a) {
    if (a.d == 2) return a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
    return a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) -
           a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0)) +
           a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
}

// Cofactor matrix: cof(F)_ij = d(det F)/dF_ij, so det F = sum_j F_ij cof_ij.
inline Mat cofactor(const Mat& a) {
    Mat r(a.d);
    if (a.d == 2) {
        r(0, 0) = a(1, 1);
        r(0, 1) = -a(1, 0);
        r(1, 0) = -a(0, 1);
        r(1, 1) = a(0, 0);
        return r;
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
            const int j1 = (j + 1) % 3, j2 = (j + 2) % 3;
            r(i, j) = a(i1, j1) * a(i2, j2) - a(i1, j2) * a(i2, j1);
        }
    return r;
}

inline Mat inverse(const Mat& a) {
    const double dt = det(a);
    Mat cof = cofactor(a);
    Mat r(a.d);
    for (int i = 0; i < a.d; ++i)
        for (int j = 0; j < a.d; ++j) r(i, j) = cof(j, i) / dt;
    return r;
}

inline double frob_norm_sq(const Mat& a) {
    double s = 0.0;
    for (int i = 0; i < a.d * a.d; ++i) s += a.m[static_cast<std::size_t>(i)] * a.m[static_cast<std::size_t>(i)];
    return s;
}

inline double frob_norm(const Mat& a) { return std::sqrt(frob_norm_sq(a)); }

inline bool all_finite(const Mat& a) {
    for (int i = 0; i < a.d * a.d; ++i)
        if (!std::isfinite(a.m[static_cast<std::size_t>(i)])) return false;
    return true;
}

/// Eigenvalues (and optionally eigenvectors as columns) of a symmetric
/// matrix by cyclic Jacobi sweeps. Unconditionally robust for d <= 3.
inline void sym_eig(Mat a, std::array<double, 3>& eigvals, Mat* eigvecs = nullptr) {
    const int d = a.d;
    Mat v = Mat::identity(d);
    const double scale = frob_norm(a) + 1.0;
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) off += a(p, q) * a(p, q);
        if (off < 1e-32 * scale * scale) break;
        for (int p = 0; p < d; ++p)
            for (int q = p + 1; q < d; ++q) {
                if (a(p, q) == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (int k = 0; k < d; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < d; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < d; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    for (int i = 0; i < d; ++i) eigvals[static_cast<std::size_t>(i)] = a(i, i);
    if (eigvecs) *eigvecs = v;
}

}  // namespace lavlab
