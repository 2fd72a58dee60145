#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <vector>

#include "ekman/errors.hpp"
#include "ekman/fft.hpp"
#include "ekman/grid.hpp"

namespace ekman {

// Real mean-zero scalar on the torus, held jointly as grid values and
// Fourier coefficients with the views synced on demand. Spectral storage is
// the real-to-complex half plane: row r carries k1 = r (r <= N/2) or r - N,
// column c carries k2 = c in [0, N/2]; the missing half is implied by
// conjugate symmetry, so that symmetry holds exactly by construction.
class ScalarField {
public:
    ScalarField() = default;

    explicit ScalarField(const FourierGrid& grid)
        : grid_(grid),
          values_(static_cast<std::size_t>(grid.n) * grid.n, 0.0),
          coeffs_(static_cast<std::size_t>(grid.n) * (grid.n / 2 + 1), {0.0, 0.0}),
          grid_valid_(true),
          spec_valid_(true) {}

    static ScalarField from_grid(const FourierGrid& grid, std::vector<double> values) {
        if (values.size() != static_cast<std::size_t>(grid.n) * grid.n)
            throw config_error("ScalarField::from_grid: value count does not match N*N");
        ScalarField f(grid);
        f.values_ = std::move(values);
        f.spec_valid_ = false;
        return f;
    }

    const FourierGrid& grid() const { return grid_; }
    int n() const { return grid_.n; }
    int spec_cols() const { return grid_.n / 2 + 1; }

    // --- view access -------------------------------------------------------

    const std::vector<double>& values() const {
        sync_grid();
        return values_;
    }
    const std::vector<std::complex<double>>& coeffs() const {
        sync_spec();
        return coeffs_;
    }
    std::vector<double>& mutable_values() {
        sync_grid();
        spec_valid_ = false;
        return values_;
    }
    std::vector<std::complex<double>>& mutable_coeffs() {
        sync_spec();
        grid_valid_ = false;
        return coeffs_;
    }

    double at(int i, int j) const { return values()[static_cast<std::size_t>(i) * grid_.n + j]; }

    // Wavenumber of spectral row r.
    int k1_of_row(int r) const { return r <= grid_.n / 2 ? r : r - grid_.n; }

    std::complex<double> coeff(int k1, int k2) const {
        sync_spec();
        const int n = grid_.n;
        if (k2 >= 0) {
            const int r = k1 >= 0 ? k1 : k1 + n;
            return coeffs_[static_cast<std::size_t>(r) * spec_cols() + k2];
        }
        const int r = -k1 >= 0 ? -k1 : -k1 + n;
        return std::conj(coeffs_[static_cast<std::size_t>(r) * spec_cols() - k2]);
    }

    // Set the (k,-k) conjugate pair from the coefficient at k.
    void set_mode(int k1, int k2, std::complex<double> amp) {
        sync_spec();
        grid_valid_ = false;
        const int n = grid_.n;
        if (k2 < 0) {
            k1 = -k1;
            k2 = -k2;
            amp = std::conj(amp);
        }
        const int r = k1 >= 0 ? k1 : k1 + n;
        coeffs_[static_cast<std::size_t>(r) * spec_cols() + k2] = amp;
        if (k2 == 0 || k2 == n / 2) {
            // these columns store both halves of their conjugate pairs
            const int rm = (n - r) % n;
            if (rm != r)
                coeffs_[static_cast<std::size_t>(rm) * spec_cols() + k2] = std::conj(amp);
        }
    }

    void add_cos(int k1, int k2, double amplitude) {
        set_mode(k1, k2, coeff(k1, k2) + std::complex<double>(amplitude / 2, 0));
    }
    void add_sin(int k1, int k2, double amplitude) {
        set_mode(k1, k2, coeff(k1, k2) + std::complex<double>(0, -amplitude / 2));
    }

    // --- bulk queries -------------------------------------------------------

    double mean() const {
        if (spec_valid_) return coeffs_[0].real();
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : values()) m = std::max(m, std::abs(v));
        return m;
    }

    bool all_finite() const {
        if (spec_valid_) {
            for (const auto& c : coeffs_)
                if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
            return true;
        }
        for (double v : values_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    // --- mutation -----------------------------------------------------------

    void project_mean_zero() {
        if (spec_valid_) {
            coeffs_[0] = {0.0, 0.0};
            if (grid_valid_) grid_valid_ = false;
        } else {
            const double m = mean();
            for (double& v : values_) v -= m;
        }
    }

    // Zero every mode with |k|_inf > kmax.
    void truncate(int kmax) {
        sync_spec();
        grid_valid_ = false;
        const int n = grid_.n;
        const int cols = spec_cols();
        for (int r = 0; r < n; ++r) {
            const int k1 = k1_of_row(r);
            for (int c = 0; c < cols; ++c) {
                if (std::abs(k1) > kmax || c > kmax)
                    coeffs_[static_cast<std::size_t>(r) * cols + c] = {0.0, 0.0};
            }
        }
    }

    ScalarField& operator+=(const ScalarField& o) { return axpy(1.0, o); }
    ScalarField& operator-=(const ScalarField& o) { return axpy(-1.0, o); }

    ScalarField& operator*=(double s) {
        if (spec_valid_) {
            for (auto& c : coeffs_) c *= s;
            if (grid_valid_)
                for (auto& v : values_) v *= s;
        } else {
            for (auto& v : values_) v *= s;
        }
        return *this;
    }

    // this += a * o, computed on the spectral view.
    ScalarField& axpy(double a, const ScalarField& o) {
        if (grid_ != o.grid_) throw config_error("ScalarField: grid mismatch");
        sync_spec();
        o.sync_spec();
        grid_valid_ = false;
        for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * o.coeffs_[i];
        return *this;
    }

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField f) { return f *= s; }

private:
    void sync_grid() const {
        if (!grid_valid_) {
            fft::inverse(grid_.n, coeffs_.data(), values_.data());
            grid_valid_ = true;
        }
    }
    void sync_spec() const {
        if (!spec_valid_) {
            fft::forward(grid_.n, values_.data(), coeffs_.data());
            spec_valid_ = true;
        }
    }

    FourierGrid grid_;
    mutable std::vector<double> values_;
    mutable std::vector<std::complex<double>> coeffs_;
    mutable bool grid_valid_ = false;
    mutable bool spec_valid_ = false;
};

// Divergence-free, mean-zero two-component velocity.
struct VelocityField {
    ScalarField u1;
    ScalarField u2;

    const FourierGrid& grid() const { return u1.grid(); }

    double max_speed() const {
        const auto& a = u1.values();
        const auto& b = u2.values();
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i)
            m = std::max(m, a[i] * a[i] + b[i] * b[i]);
        return std::sqrt(m);
    }
};

} // namespace ekman
