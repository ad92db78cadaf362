#pragma once
#include <array>
#include <cmath>
#include <cstdint>

namespace ak {

// Philox4x32-10 (Salmon et al., "Parallel random numbers: as easy as 1, 2, 3").
// Stateless: output is a pure function of (key, counter).
class Philox4x32 {
public:
    using ctr_t = std::array<uint32_t, 4>;
    explicit Philox4x32(uint64_t seed) : k0_(uint32_t(seed)), k1_(uint32_t(seed >> 32)) {}

    ctr_t operator()(ctr_t c) const {
        uint32_t k0 = k0_, k1 = k1_;
        for (int r = 0; r < 10; ++r) {
            const uint64_t p0 = uint64_t(0xD2511F53u) * c[0];
            const uint64_t p1 = uint64_t(0xCD9E8D57u) * c[2];
            c = {uint32_t(p1 >> 32) ^ c[1] ^ k0, uint32_t(p1), uint32_t(p0 >> 32) ^ c[3] ^ k1, uint32_t(p0)};
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        return c;
    }

private:
    uint32_t k0_, k1_;
};

// xoshiro256++ (Blackman & Vigna).
class Xoshiro256pp {
public:
    explicit Xoshiro256pp(const std::array<uint64_t, 4>& st) : s_(st) {}
    uint64_t operator()() {
        const uint64_t r = rotl(s_[0] + s_[3], 23) + s_[0];
        const uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return r;
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::array<uint64_t, 4> s_;
};

// Standard normals for one path. The path's stream is xoshiro256++ keyed by two Philox
// blocks at counters (0, path) and (1, path), so it depends only on (seed, path).
// Normals by the Marsaglia polar method on 53-bit uniforms.
class PathNormals {
public:
    PathNormals(const Philox4x32& g, uint64_t path) : rng_(key(g, path)) {}

    double next() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        for (;;) {
            const double u = double(rng_() >> 11) * 0x1p-52 - 1.0;
            const double v = double(rng_() >> 11) * 0x1p-52 - 1.0;
            const double s = u * u + v * v;
            if (s >= 1.0 || s == 0.0) continue;
            const double f = std::sqrt(-2.0 * std::log(s) / s);
            spare_ = v * f;
            have_ = true;
            return u * f;
        }
    }

private:
    static std::array<uint64_t, 4> key(const Philox4x32& g, uint64_t path) {
        const uint32_t lo = uint32_t(path), hi = uint32_t(path >> 32);
        const auto a = g({0, 0, lo, hi}), b = g({1, 0, lo, hi});
        auto w = [](uint32_t x, uint32_t y) { return (uint64_t(x) << 32) | y; };
        std::array<uint64_t, 4> st{w(a[0], a[1]), w(a[2], a[3]), w(b[0], b[1]), w(b[2], b[3])};
        if ((st[0] | st[1] | st[2] | st[3]) == 0) st[0] = 1;
        return st;
    }

    Xoshiro256pp rng_;
    double spare_ = 0;
    bool have_ = false;
};

} // namespace ak
