// Copyright 2026 The EDCS Simulator Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <complex>
#include <cstddef>

namespace edcs::detail {

/// Real-to-complex transform of fixed length n with its own aligned buffers.
/// Unnormalized in both directions (FFTW convention).
class RealFft {
public:
    explicit RealFft(std::size_t n);
    ~RealFft();
    RealFft(const RealFft&) = delete;
    RealFft& operator=(const RealFft&) = delete;

    std::size_t size() const noexcept { return n_; }
    std::size_t bins() const noexcept { return n_ / 2 + 1; }
    double* real() noexcept { return real_; }
    std::complex<double>* spectrum() noexcept { return spectrum_; }

    /// real() -> spectrum()
    void forward();
    /// spectrum() -> real(); destroys spectrum().
    void inverse();

private:
    std::size_t n_;
    double* real_ = nullptr;
    std::complex<double>* spectrum_ = nullptr;
    void* forward_plan_ = nullptr;
    void* inverse_plan_ = nullptr;
};

}  // namespace edcs::detail
