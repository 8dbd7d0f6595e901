"""High-precision reference constructions, independent of the package's kernels."""

import mpmath as mp


def mp_state(a, b, z, gamma, n_max, dps=40):
    """Normalized amplitudes from the raw Z_n recurrence in multiprecision."""
    with mp.workdps(dps):
        a, b, g = mp.mpf(a), mp.mpf(b), mp.mpf(gamma)
        z = mp.mpc(z)
        Z = [mp.mpc(1), z]
        for n in range(1, n_max):
            Z.append(z * Z[n] - g * n * (a * n + b) * Z[n - 1])
        rho = [mp.mpf(1)]
        for n in range(1, n_max + 1):
            rho.append(rho[-1] * n * (a * n + b))
        c = [Z[n] / mp.sqrt(rho[n]) for n in range(n_max + 1)]
        norm = mp.sqrt(mp.fsum(abs(v) ** 2 for v in c))
        return [complex(v / norm) for v in c]


def mp_moments(amps, dps=40):
    """(<a>, <a^2>, <a^dag a>) by direct multiprecision summation."""
    with mp.workdps(dps):
        c = [mp.mpc(v) for v in amps]
        n = len(c)
        ma = mp.fsum(mp.conj(c[k]) * c[k + 1] * mp.sqrt(k + 1) for k in range(n - 1))
        ma2 = mp.fsum(mp.conj(c[k]) * c[k + 2] * mp.sqrt((k + 1) * (k + 2)) for k in range(n - 2))
        mn = mp.fsum(k * abs(c[k]) ** 2 for k in range(n))
        return complex(ma), complex(ma2), float(mn)
