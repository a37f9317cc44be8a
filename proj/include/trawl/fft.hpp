#pragma once

#include <complex>
#include <numbers>
#include <vector>

namespace trawl::detail {

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

/// X_j = sum_k x_k exp(-2 pi i j k / N). Iterative radix-2 when N is a power
/// of two, direct summation otherwise.
inline std::vector<std::complex<double>> forward_dft(std::vector<std::complex<double>> x)
{
    const std::size_t n = x.size();
    if (n <= 1)
        return x;
    const double two_pi = 2.0 * std::numbers::pi;

    if (!is_power_of_two(n))
    {
        std::vector<std::complex<double>> out(n);
        for (std::size_t j = 0; j < n; ++j)
        {
            std::complex<double> acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
            {
                // (j * k) mod n keeps the twiddle argument in [0, 2 pi).
                const double angle = -two_pi * static_cast<double>((j * k) % n) / static_cast<double>(n);
                acc += x[k] * std::polar(1.0, angle);
            }
            out[j] = acc;
        }
        return out;
    }

    for (std::size_t i = 1, j = 0; i < n; ++i)
    {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1)
            j ^= bit;
        j ^= bit;
        if (i < j)
            std::swap(x[i], x[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1)
    {
        const std::size_t half = len / 2;
        for (std::size_t k = 0; k < half; ++k)
        {
            const auto w = std::polar(1.0, -two_pi * static_cast<double>(k) / static_cast<double>(len));
            for (std::size_t start = 0; start < n; start += len)
            {
                const auto u = x[start + k];
                const auto v = x[start + k + half] * w;
                x[start + k] = u + v;
                x[start + k + half] = u - v;
            }
        }
    }
    return x;
}

} // namespace trawl::detail
