// SPDX-License-Identifier: Apache-2.0
#include "fdesic/response.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fdesic {

FrequencyGrid::FrequencyGrid(std::vector<double> freqs_hz) : freqs_(std::move(freqs_hz)) {
    if (freqs_.empty())
        throw std::invalid_argument("FrequencyGrid: at least one frequency required");
    for (std::size_t k = 0; k < freqs_.size(); ++k) {
        if (!std::isfinite(freqs_[k]) || freqs_[k] <= 0.0)
            throw std::invalid_argument("FrequencyGrid: frequency " + std::to_string(k) + " is not positive");
        if (k > 0 && !(freqs_[k] > freqs_[k - 1]))
            throw std::invalid_argument("FrequencyGrid: frequencies must be strictly increasing (index " +
                                        std::to_string(k) + ")");
    }
}

FrequencyGrid FrequencyGrid::linspace(double start_hz, double stop_hz, std::size_t points) {
    if (points == 0)
        throw std::invalid_argument("FrequencyGrid::linspace: points must be >= 1");
    if (points == 1)
        return FrequencyGrid({start_hz});
    std::vector<double> f(points);
    const double step = (stop_hz - start_hz) / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k)
        f[k] = start_hz + step * static_cast<double>(k);
    f.back() = stop_hz;
    return FrequencyGrid(std::move(f));
}

FrequencyGrid FrequencyGrid::restricted(double lo_hz, double hi_hz) const {
    const double slack = 1e-12 * std::max(std::abs(lo_hz), std::abs(hi_hz));
    std::vector<double> f;
    for (double x : freqs_)
        if (x >= lo_hz - slack && x <= hi_hz + slack)
            f.push_back(x);
    if (f.empty())
        throw std::invalid_argument("FrequencyGrid::restricted: no grid points inside the requested band");
    return FrequencyGrid(std::move(f));
}

ComplexResponse::ComplexResponse(FrequencyGrid grid, std::vector<cplx> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
        throw std::invalid_argument("ComplexResponse: value count does not match grid length");
    for (std::size_t k = 0; k < values_.size(); ++k)
        if (!std::isfinite(values_[k].real()) || !std::isfinite(values_[k].imag()))
            throw std::invalid_argument("ComplexResponse: non-finite value at index " + std::to_string(k));
}

ComplexResponse ComplexResponse::zeros(FrequencyGrid grid) {
    std::vector<cplx> v(grid.size(), cplx{0.0, 0.0});
    return ComplexResponse(std::move(grid), std::move(v));
}

ComplexResponse ComplexResponse::restricted(double lo_hz, double hi_hz) const {
    FrequencyGrid sub = grid_.restricted(lo_hz, hi_hz);
    std::vector<cplx> v;
    v.reserve(sub.size());
    std::size_t j = 0;
    for (std::size_t k = 0; k < grid_.size() && j < sub.size(); ++k) {
        if (grid_[k] == sub[j]) {
            v.push_back(values_[k]);
            ++j;
        }
    }
    return ComplexResponse(std::move(sub), std::move(v));
}

} // namespace fdesic
