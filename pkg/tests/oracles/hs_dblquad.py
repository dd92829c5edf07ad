"""Regenerate the frozen HS oracle values used in test_lab.py.

Independent of the package's rotated-coordinate quadrature: plain scipy
dblquad on the triangle s < t < 1/eps, plus the identity

    ||N_eps - M0^-1||^2 = int_[0,R]^2 (K_eps^2 - 2 K_eps K0) + pi^2/6

which holds because K_eps vanishes outside the square. Takes ~40 s.
"""

import math

from scipy import integrate

from bos_spectra.kernels import kernel_eps, kernel_zero


def triangle(f, R):
    v, _ = integrate.dblquad(f, 0, R, lambda s: s, lambda s: R * (1 - 1e-15), epsabs=1e-11, epsrel=1e-11)
    return 2 * v


if __name__ == "__main__":
    for e in (0.4, 0.2):
        R = 1 / e
        cross = triangle(lambda t, s: kernel_eps(e, s, t) ** 2 - 2 * kernel_eps(e, s, t) * kernel_zero(s, t), R)
        print(f"hs_distance_sq({e}) = {cross + math.pi**2 / 6!r}")
    print(f"hs_norm_sq_eps(0.5) = {triangle(lambda t, s: kernel_eps(0.5, s, t) ** 2, 2.0)!r}")
