"""Independent high-precision evaluation of the step-size and mixing schedules.

Run before the package exists; the printed values are frozen into tests as
regression guards. Uses only math.* so it shares no code with the package.
"""
import math

DT_COEF = 0.230
DT_EXP = -0.069
Z_A = 6.83
Z_B = -1.10
Z_C = -6.53


def dt(n: float) -> float:
    return DT_COEF * math.exp(DT_EXP * math.log(n)) if n != 1 else DT_COEF


def zeta(n: float) -> float:
    return math.exp(Z_A * math.log(n) ** Z_B + Z_C)


if __name__ == "__main__":
    for n in (1, 2, 10, 100, 200, 1000, 1500):
        print(f"dt({n}) = {dt(n)!r}")
    for n in (2, 10, 100, 200, 1000, math.e**math.e):
        print(f"zeta({n}) = {zeta(n)!r}")
    # sweep-prediction anchors at the bench calibration size
    print(f"dt(200) grid anchor   = {dt(200)!r}")
    print(f"zeta(200) grid anchor = {zeta(200)!r}")
