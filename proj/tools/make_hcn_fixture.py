#!/usr/bin/env python3
# Copyright 2026 The EDCS Simulator Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Writes data/hcn_2nu3.csv, a synthetic line list shaped like the HCN 2nu3 band.

Positions follow a rigid-rotor P/R-branch model and intensities a Boltzmann
distribution; broadening coefficients are representative constants.  This
is test data with the right structure, not reference spectroscopy: supply
a real line list for quantitative work.
"""
import argparse
import math
import pathlib

C_CM_PER_S = 2.99792458e10
C2 = 1.4387769  # cm K
T_REF = 296.0

BAND_ORIGIN = 6519.61  # cm^-1
B_LOWER = 1.478222
B_UPPER = 1.467671
MASS_AMU = 27.010899
PEAK_STRENGTH = 1.2e-20  # cm^-1 / (molecule cm^-2)


def lines():
    rows = []
    # P(J): J'' = J -> J' = J - 1, m = -J.  R(J): J'' = J -> J' = J + 1, m = J + 1.
    for branch, js in (("P", range(1, 14)), ("R", range(0, 12))):
        for j in js:
            m = -j if branch == "P" else j + 1
            nu = BAND_ORIGIN + (B_UPPER + B_LOWER) * m + (B_UPPER - B_LOWER) * m * m
            e_lower = B_LOWER * j * (j + 1)
            weight = abs(m) * math.exp(-C2 * e_lower / T_REF)
            gamma_self = 0.16 - 0.004 * abs(m)
            rows.append((nu, weight, e_lower, gamma_self))
    top = max(w for _, w, _, _ in rows)
    rows.sort()
    return [(nu * C_CM_PER_S, PEAK_STRENGTH * w / top, 0.10, g, 0.70, MASS_AMU, e)
            for nu, w, e, g in rows]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("-o", "--output", default=str(
        pathlib.Path(__file__).resolve().parent.parent / "data" / "hcn_2nu3.csv"))
    args = parser.parse_args()
    with open(args.output, "w") as f:
        f.write("# Synthetic HCN 2nu3-like band (rigid-rotor positions, Boltzmann intensities).\n")
        f.write("# Generated by tools/make_hcn_fixture.py; not reference data.\n")
        f.write("center_hz,strength,gamma_air,gamma_self,n_air,mass_amu,lower_energy_cm1\n")
        for row in lines():
            f.write("{:.6f},{:.6e},{:.4f},{:.4f},{:.2f},{:.6f},{:.6f}\n".format(*row))


if __name__ == "__main__":
    main()
