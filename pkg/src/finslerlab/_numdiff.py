"""Central finite differences and their Wirtinger (d/dw, d/dw-bar) combinations.

Complex vectors w in C^N are flattened to x = [Re w, Im w] in R^{2N}.
All routines accept array-valued functions; derivatives are stacked on
the leading axes.
"""

import numpy as np


def to_real(w):
    w = np.asarray(w, dtype=complex)
    return np.concatenate([w.real, w.imag])


def to_complex(x):
    x = np.asarray(x, dtype=float)
    half = x.size // 2
    return x[:half] + 1j * x[half:]


def _steps(x, step):
    return step * np.maximum(1.0, np.abs(x))


def real_gradient(f, x, step=1e-3):
    """Fourth-order central first derivatives, shape (m, *f.shape)."""
    x = np.asarray(x, dtype=float)
    hs = _steps(x, step)
    out = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = hs[i]
        d = (-np.asarray(f(x + 2 * e)) + 8 * np.asarray(f(x + e))
             - 8 * np.asarray(f(x - e)) + np.asarray(f(x - 2 * e))) / (12 * hs[i])
        out.append(d)
    return np.array(out)


def _mixed(f, x, i, j, hi, hj):
    ei = np.zeros_like(x)
    ej = np.zeros_like(x)
    ei[i] = hi
    ej[j] = hj
    if i == j:
        return (np.asarray(f(x + ei)) - 2 * np.asarray(f(x)) + np.asarray(f(x - ei))) / hi**2
    return (np.asarray(f(x + ei + ej)) - np.asarray(f(x + ei - ej))
            - np.asarray(f(x - ei + ej)) + np.asarray(f(x - ei - ej))) / (4 * hi * hj)


def real_hessian(f, x, step=1e-4, rows=None, cols=None, richardson=False):
    """Second derivatives d^2 f / dx_i dx_j for i in rows, j in cols.

    With ``richardson=True`` the step-h and step-2h stencils are combined
    to cancel the O(h^2) term; use a larger step (~1e-3) in that mode.
    """
    x = np.asarray(x, dtype=float)
    rows = range(x.size) if rows is None else rows
    cols = range(x.size) if cols is None else cols
    hs = _steps(x, step)
    cache = {}
    out = []
    for i in rows:
        line = []
        for j in cols:
            key = (min(i, j), max(i, j))
            if key not in cache:
                d = _mixed(f, x, i, j, hs[i], hs[j])
                if richardson:
                    d2 = _mixed(f, x, i, j, 2 * hs[i], 2 * hs[j])
                    d = (4 * d - d2) / 3
                cache[key] = d
            line.append(cache[key])
        out.append(line)
    return np.array(out)


def wirtinger_gradient(f, w, step=1e-3):
    """(df/dw_a, df/dwbar_a) for a function of a complex vector w."""
    w = np.asarray(w, dtype=complex)
    n = w.size
    g = real_gradient(lambda x: f(to_complex(x)), to_real(w), step)
    gx, gy = g[:n], g[n:]
    return 0.5 * (gx - 1j * gy), 0.5 * (gx + 1j * gy)


def wirtinger_mixed(f, w, a_idx, b_idx, step=1e-4, richardson=False):
    """Matrix d^2 f / dw_a dwbar_b for a in a_idx, b in b_idx.

    Result has shape (len(a_idx), len(b_idx), *f.shape).
    """
    w = np.asarray(w, dtype=complex)
    n = w.size
    a_idx = list(a_idx)
    b_idx = list(b_idx)
    rows = a_idx + [n + a for a in a_idx]
    cols = b_idx + [n + b for b in b_idx]
    H = real_hessian(lambda x: f(to_complex(x)), to_real(w), step, rows, cols, richardson)
    na, nb = len(a_idx), len(b_idx)
    xx = H[:na, :nb]
    xy = H[:na, nb:]
    yx = H[na:, :nb]
    yy = H[na:, nb:]
    return 0.25 * ((xx + yy) + 1j * (xy - yx))
