#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace mhdnv {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
    Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::sqrt(dot(a, a)); }

// Small dense d x d matrix, stored 2x2; 1D uses the (0,0) entry only.
struct Mat2 {
    double m[2][2] = {{0.0, 0.0}, {0.0, 0.0}};

    static Mat2 identity() {
        Mat2 r;
        r.m[0][0] = r.m[1][1] = 1.0;
        return r;
    }

    Vec2 apply(const Vec2& v) const {
        return {m[0][0] * v.x + m[0][1] * v.y, m[1][0] * v.x + m[1][1] * v.y};
    }
    Vec2 apply_transpose(const Vec2& v) const {
        return {m[0][0] * v.x + m[1][0] * v.y, m[0][1] * v.x + m[1][1] * v.y};
    }
    double det() const { return m[0][0] * m[1][1] - m[0][1] * m[1][0]; }

    Mat2 mul(const Mat2& o) const {
        Mat2 r;
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                r.m[i][j] = m[i][0] * o.m[0][j] + m[i][1] * o.m[1][j];
        return r;
    }
    Mat2 transposed() const {
        Mat2 r;
        r.m[0][0] = m[0][0]; r.m[0][1] = m[1][0];
        r.m[1][0] = m[0][1]; r.m[1][1] = m[1][1];
        return r;
    }
    Mat2 inverse() const {
        Mat2 r;
        const double d = det();
        r.m[0][0] = m[1][1] / d;
        r.m[0][1] = -m[0][1] / d;
        r.m[1][0] = -m[1][0] / d;
        r.m[1][1] = m[0][0] / d;
        return r;
    }
};

// Deterministic uniform doubles from a splitmix-seeded xorshift state.
// std::uniform_real_distribution is implementation defined, so outputs with a
// fixed seed would not be portable across standard libraries.
struct Rng {
    uint64_t state;

    explicit Rng(uint64_t seed) : state(seed ^ 0x9e3779b97f4a7c15ull) {
        next_u64();
        next_u64();
    }

    uint64_t next_u64() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }
    // uniform in [a, b)
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    // uniform integer in [0, n)
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }
};

} // namespace mhdnv
