// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace fdesic {

using cplx = std::complex<double>;

/// Ordered set of evaluation frequencies f_k (Hz). Strictly increasing, all > 0, K >= 1.
class FrequencyGrid {
public:
    explicit FrequencyGrid(std::vector<double> freqs_hz);

    /// `points` equally spaced frequencies over [start_hz, stop_hz] inclusive.
    static FrequencyGrid linspace(double start_hz, double stop_hz, std::size_t points);

    std::span<const double> freqs() const noexcept { return freqs_; }
    std::size_t size() const noexcept { return freqs_.size(); }
    double operator[](std::size_t k) const { return freqs_[k]; }
    double front() const { return freqs_.front(); }
    double back() const { return freqs_.back(); }

    /// Points with lo <= f <= hi (inclusive, with a relative slack of 1e-12).
    FrequencyGrid restricted(double lo_hz, double hi_hz) const;

    bool operator==(const FrequencyGrid&) const = default;

private:
    std::vector<double> freqs_;
};

/// Complex voltage ratio sampled on a FrequencyGrid.
class ComplexResponse {
public:
    ComplexResponse(FrequencyGrid grid, std::vector<cplx> values);

    /// All-zero response on `grid`.
    static ComplexResponse zeros(FrequencyGrid grid);

    const FrequencyGrid& grid() const noexcept { return grid_; }
    std::span<const cplx> values() const noexcept { return values_; }
    std::size_t size() const noexcept { return values_.size(); }
    cplx operator[](std::size_t k) const { return values_[k]; }

    /// Sub-response on the points of grid().restricted(lo_hz, hi_hz).
    ComplexResponse restricted(double lo_hz, double hi_hz) const;

    bool operator==(const ComplexResponse&) const = default;

private:
    FrequencyGrid grid_;
    std::vector<cplx> values_;
};

} // namespace fdesic
