#ifndef FRAMECON_RNG_HPP
#define FRAMECON_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace framecon::rng {

// Address of one random stream. Distinct (trial_index, stream_index) pairs
// under the same master seed give statistically independent streams, so a
// sweep point / trial pair can be sampled on any worker in any order and
// still produce identical output.
struct SeedPath {
    std::uint64_t master_seed = 0;
    std::uint64_t trial_index = 0;
    std::uint64_t stream_index = 0;
};

namespace detail {

// splitmix64 finalizer; standard seed mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(const SeedPath& p) {
    std::uint64_t h = mix64(p.master_seed);
    h = mix64(h ^ (0x632be59bd9b4e019ULL + p.trial_index));
    h = mix64(h ^ (0x9e3779b97f4a7c15ULL + p.stream_index));
    return h;
}

}  // namespace detail

// Deterministic random stream. The uniform and Gaussian converters are
// implemented here rather than through std::*_distribution, which is
// implementation-defined; output is therefore bit-reproducible for a given
// SeedPath on any conforming toolchain.
class RandomStream {
public:
    explicit RandomStream(const SeedPath& path)
        : engine_(detail::derive_seed(path)) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform01() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller; second value of each pair cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    Eigen::VectorXd gaussian_vector(int d) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = gaussian();
        return v;
    }

    Eigen::MatrixXd gaussian_matrix(int rows, int cols) {
        Eigen::MatrixXd m(rows, cols);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) m(i, j) = gaussian();
        return m;
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace framecon::rng

#endif
