"""Implicit-shift QL iteration for symmetric tridiagonal eigenvalues.

The kernel is written once against plain arithmetic so the same code runs
compiled (numba, float64 arrays) and interpreted (mpmath ``mpf`` lists for
extended precision).
"""

import numba

MAX_SWEEPS = 60


def _tql_kernel(d, e):
    """In-place eigenvalues of the tridiagonal (d, e); e[i] couples i and i+1.

    ``e`` must have the same length as ``d``; its last entry is scratch.
    Convergence uses the ``|e| + dd == dd`` test so it adapts to the working
    precision of the scalar type. Eigenvalues are left unsorted in ``d``.
    """
    n = len(d)
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > MAX_SWEEPS:
                raise RuntimeError("QL iteration did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = (g * g + 1.0) ** 0.5
            if g >= 0:
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            i = m - 1
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                af = abs(f)
                ag = abs(g)
                if af > ag:
                    r = af * (1.0 + (ag / af) ** 2) ** 0.5
                elif ag == 0:
                    r = ag
                else:
                    r = ag * (1.0 + (af / ag) ** 2) ** 0.5
                e[i + 1] = r
                if r == 0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0


tql_float = numba.njit(cache=True)(_tql_kernel)
tql_generic = _tql_kernel
