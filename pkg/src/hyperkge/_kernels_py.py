"""Pure numpy versions of the hot kernels.

Same signatures and results as the compiled ``_kernels`` module, which is
preferred when it was built. Inputs are float64 arrays of shape ``(4, B, k)``.
"""

import numpy as np

from .hypercomplex import conj, hamilton, unit


def rotate_score(h, w, t, normalize, eps):
    if normalize:
        w = unit(w, eps)[0]
    return np.einsum("cbk,cbk->b", hamilton(h, w), t)


def rotate_grad(h, w, t, coef, normalize, eps):
    """Gradients of ``sum_b coef[b] * <h_b (x) w_b, t_b>``.

    With ``normalize`` the relation is unit-normalized first and the
    gradient is carried back through the division by its modulus.
    """
    if normalize:
        wn, n = unit(w, eps)
    else:
        wn = w
    c = coef[None, :, None]
    gt = c * hamilton(h, wn)
    gh = c * hamilton(t, conj(wn))
    gw = c * hamilton(conj(h), t)
    if normalize:
        gw = (gw - wn * np.sum(wn * gw, axis=0)) / n
    return gh, gw, gt


def scatter_add(dst, idx, src):
    np.add.at(dst, (slice(None), idx), src)


BACKEND = "python"
