#pragma once

#include <complex>
#include <map>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace ekman {
namespace fft {

// Cached FFTW plans per grid size. Planning is serialized (the FFTW planner
// is not thread-safe); execution uses the new-array interface and is safe
// from concurrent trajectory workers. Plans use FFTW_ESTIMATE so plan choice,
// and therefore roundoff, is identical run to run.
class Plans {
public:
    static Plans& instance() {
        static Plans p;
        return p;
    }

    struct Pair {
        fftw_plan forward = nullptr;  // r2c
        fftw_plan inverse = nullptr;  // c2r
    };

    Pair get(int n) {
        std::lock_guard<std::mutex> lock(mutex_);
        auto it = cache_.find(n);
        if (it != cache_.end()) return it->second;

        std::vector<double> real(static_cast<std::size_t>(n) * n);
        std::vector<std::complex<double>> cplx(static_cast<std::size_t>(n) * (n / 2 + 1));
        Pair p;
        p.forward = fftw_plan_dft_r2c_2d(
            n, n, real.data(), reinterpret_cast<fftw_complex*>(cplx.data()),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        p.inverse = fftw_plan_dft_c2r_2d(
            n, n, reinterpret_cast<fftw_complex*>(cplx.data()), real.data(),
            FFTW_ESTIMATE | FFTW_UNALIGNED);
        cache_[n] = p;
        return p;
    }

    Plans(const Plans&) = delete;
    Plans& operator=(const Plans&) = delete;

private:
    Plans() = default;
    ~Plans() {
        for (auto& [n, p] : cache_) {
            fftw_destroy_plan(p.forward);
            fftw_destroy_plan(p.inverse);
        }
    }

    std::mutex mutex_;
    std::map<int, Pair> cache_;
};

// grid (n*n reals) -> spectral (n*(n/2+1) coefficients), normalized so that
// f(x) = sum_k fhat_k exp(i k.x).
inline void forward(int n, const double* grid, std::complex<double>* spec) {
    auto plans = Plans::instance().get(n);
    std::vector<double> in(grid, grid + static_cast<std::size_t>(n) * n);
    fftw_execute_dft_r2c(plans.forward, in.data(),
                         reinterpret_cast<fftw_complex*>(spec));
    const double scale = 1.0 / (static_cast<double>(n) * n);
    const std::size_t m = static_cast<std::size_t>(n) * (n / 2 + 1);
    for (std::size_t i = 0; i < m; ++i) spec[i] *= scale;
}

// spectral -> grid; input is preserved (c2r would otherwise destroy it).
inline void inverse(int n, const std::complex<double>* spec, double* grid) {
    auto plans = Plans::instance().get(n);
    const std::size_t m = static_cast<std::size_t>(n) * (n / 2 + 1);
    std::vector<std::complex<double>> in(spec, spec + m);
    fftw_execute_dft_c2r(plans.inverse,
                         reinterpret_cast<fftw_complex*>(in.data()), grid);
}

} // namespace fft
} // namespace ekman
