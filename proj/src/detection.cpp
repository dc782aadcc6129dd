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

#include "edcs/detection.hpp"

#include <cmath>

#include "edcs/error.hpp"
#include "edcs/units.hpp"

namespace edcs {

double DetectionImperfections::electrical_variance() const {
    if (!electrical_noise_db_below_vacuum) return 0.0;
    return units::db_to_ratio(-*electrical_noise_db_below_vacuum);
}

void DetectionImperfections::validate() const {
    if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
        throw InvalidArgument("quantum_efficiency must lie in (0, 1]");
    if (!(fringe_visibility > 0.0 && fringe_visibility <= 1.0))
        throw InvalidArgument("fringe_visibility must lie in (0, 1]");
    if (electrical_noise_db_below_vacuum && !std::isfinite(*electrical_noise_db_below_vacuum))
        throw InvalidArgument("electrical noise level must be finite");
}

}  // namespace edcs
