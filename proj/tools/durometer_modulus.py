#!/usr/bin/env python3
"""Derives the elastomer Young's moduli frozen in the material tables.

Two regimes:
  * Shore 00 silicones (Ecoflex): ASTM D2240 Type 00 durometer geometry
    (1.190625 mm radius spherical indenter, 2.54 mm travel, spring force
    0.203 + 0.00908*S newton) inverted through Hertz sphere contact with
    nu = 0.5.
  * Shore A silicones (Dragon Skin): Gent's empirical relation.

Run to print the constants used in src/wave_objects.cpp and
src/contact_sim.cpp.
"""
import math

INDENTER_RADIUS_M = 1.190625e-3  # 3/32 in sphere
TRAVEL_M = 2.54e-3
POISSON = 0.5


def type00_modulus_pa(shore00: float) -> float:
    force_n = 0.203 + 0.00908 * shore00
    depth_m = TRAVEL_M * (1.0 - shore00 / 100.0)
    e_star = 3.0 * force_n / (4.0 * math.sqrt(INDENTER_RADIUS_M) * depth_m ** 1.5)
    return e_star * (1.0 - POISSON**2)


def gent_modulus_pa(shore_a: float) -> float:
    return 1e6 * 0.0981 * (56 + 7.62336 * shore_a) / (0.137505 * (254 - 2.54 * shore_a))


if __name__ == "__main__":
    rows = [
        ("Ecoflex 00-10 (object bulk)", type00_modulus_pa(10)),
        ("Ecoflex 00-50 (object bulk / top layer)", type00_modulus_pa(50)),
        ("Ecoflex 00-31 (soft skin)", type00_modulus_pa(31)),
        ("Dragon Skin 30 (hard skin, Shore A 30)", gent_modulus_pa(30)),
        ("PLA (literature constant)", 3.5e9),
    ]
    for name, value in rows:
        print(f"{name:45s} {value!r} Pa")
