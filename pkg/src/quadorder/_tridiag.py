"""Implicit-shift QL iteration for symmetric tridiagonal matrices.

Only the first component of each eigenvector is tracked, which is all the
Golub-Welsch weight formula needs.
"""
import math

import numpy as np


class ConvergenceError(RuntimeError):
    pass


def tridiagonal_eigh(diag, offdiag, tol=1e-15, max_sweeps=64):
    """Eigenvalues and first eigenvector components of a symmetric tridiagonal matrix.

    Parameters
    ----------
    diag : array_like, shape (n,)
    offdiag : array_like, shape (n - 1,)
        ``offdiag[i]`` couples rows ``i`` and ``i + 1``.
    tol : float
        An off-diagonal entry is treated as zero once it is below
        ``tol * (|d[m]| + |d[m+1]|)``.
    max_sweeps : int
        QL sweeps allowed per eigenvalue.

    Returns
    -------
    eigenvalues : ndarray, ascending
    first : ndarray
        First components of the matching unit eigenvectors.
    """
    d = [float(v) for v in diag]
    n = len(d)
    e = [float(v) for v in offdiag] + [0.0]
    if len(e) != n:
        raise ValueError("offdiag must have length len(diag) - 1")
    z = [0.0] * n
    z[0] = 1.0

    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= tol * dd or abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if sweeps == max_sweeps:
                raise ConvergenceError(f"no convergence for eigenvalue {l} after {max_sweeps} sweeps")
            sweeps += 1

            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                f = z[i + 1]
                z[i + 1] = s * z[i] + c * f
                z[i] = c * z[i] - s * f
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return np.asarray(d)[order], np.asarray(z)[order]
