#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <tuple>
#include <utility>
#include <vector>

#include <fftw3.h>

namespace conewave {

// Batched in-place 1D DFT over the rows of a row-major (rows x n) array.
// sign = -1: sum_j x_j e^{-2 pi i jk/n}; sign = +1: unnormalised inverse.
inline void dft_rows(std::vector<std::complex<double>>& data, int rows, int n, int sign)
{
    static std::mutex mtx;
    static std::map<std::tuple<int, int, int>, fftw_plan> plans;
    if (rows == 0 || n == 0)
        return;

    // plans are built for a scratch buffer and applied with the new-array interface
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto key = std::make_tuple(rows, n, sign);
        auto it = plans.find(key);
        if (it == plans.end()) {
            std::vector<std::complex<double>> scratch(static_cast<std::size_t>(rows) * n);
            auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
            plan = fftw_plan_many_dft(1, &n, rows, p, nullptr, 1, n, p, nullptr, 1, n,
                                      sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
            plans.emplace(key, plan);
        } else {
            plan = it->second;
        }
    }
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
}

inline void dft(std::vector<std::complex<double>>& data, int sign)
{
    dft_rows(data, 1, static_cast<int>(data.size()), sign);
}

} // namespace conewave
