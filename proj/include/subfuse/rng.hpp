#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace subfuse {

// Seeded random stream with hand-rolled samplers on top of mt19937_64.
// The engine sequence is fully specified by the standard, and all
// transforms below are plain arithmetic, so a given seed reproduces the
// same draws bit-for-bit on any platform with IEEE doubles.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : eng_(seed) {}

    // Split rule: child seeds are derived by folding the key path into the
    // master seed with splitmix64, one round per path element. Streams with
    // distinct paths are statistically independent; the rule is stable and
    // documented so parallel and serial runs agree.
    static std::uint64_t derive_seed(std::uint64_t master,
                                     std::initializer_list<std::uint64_t> path) {
        std::uint64_t s = splitmix(master);
        for (std::uint64_t w : path) s = splitmix(s ^ splitmix(w + 0x9e3779b97f4a7c15ULL));
        return s;
    }

    static RngStream child(std::uint64_t master,
                           std::initializer_list<std::uint64_t> path) {
        return RngStream(derive_seed(master, path));
    }

    std::uint64_t raw() { return eng_(); }

    // U[0,1) with 53 random bits.
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // U(0,1); rejects the (probability 2^-53) exact zero so logs are safe.
    double uniform_open() {
        double u;
        do {
            u = uniform();
        } while (u <= 0.0);
        return u;
    }

    // Standard normal via the Marsaglia polar method (second value discarded).
    double normal() {
        for (;;) {
            const double u = 2.0 * uniform() - 1.0;
            const double v = 2.0 * uniform() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Gamma(shape, scale), Marsaglia-Tsang squeeze for shape >= 1 and the
    // usual boost step below 1.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double g = gamma(shape + 1.0, 1.0);
            return scale * g * std::pow(uniform_open(), 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return scale * d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return scale * d * v;
        }
    }

    double chi_squared(double df) { return gamma(0.5 * df, 2.0); }

    double student_t(double df) {
        return normal() / std::sqrt(chi_squared(df) / df);
    }

    double abs_student_t(double df) { return std::abs(student_t(df)); }

private:
    static std::uint64_t splitmix(std::uint64_t x) {
        x += 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
};

}  // namespace subfuse
