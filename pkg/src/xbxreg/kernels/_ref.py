"""Pure-numpy reference kernel for the XB log-density grid.

Computes log f_XB(y_i | mu_i, phi_i, u_t) for all observations i and
exceedances u_t at once. The compiled Cython kernel in _xbkernel.pyx
implements the same contract; tests compare the two bit-for-bit-ish
(1e-12) and the import layer picks whichever is available.
"""

import numpy as np
from scipy import special as sp

BACKEND = "python"


def xb_loglik_grid(y, mu, phi, u):
    """(n, T) matrix of XB log-densities.

    y, mu, phi: length-n arrays; y in [0, 1], exact 0.0/1.0 are the
    censored branches. u: length-T array of nonnegative exceedances.

    At u = 0 the boundary branches return -inf (the beta distribution has
    no boundary mass).
    """
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu, dtype=float)
    phi = np.asarray(phi, dtype=float)
    u = np.asarray(u, dtype=float)
    p = (mu * phi)[:, None]
    q = ((1.0 - mu) * phi)[:, None]
    logbeta = sp.betaln(p, q)
    uu = u[None, :]
    one_p2u = 1.0 + 2.0 * uu
    z0 = uu / one_p2u

    out = np.empty((y.size, u.size))
    interior = (y > 0.0) & (y < 1.0)
    at0 = y == 0.0
    at1 = y == 1.0

    if interior.any():
        zi = (y[interior, None] + uu) / one_p2u
        pi = p[interior]
        qi = q[interior]
        out[interior] = (
            (pi - 1.0) * np.log(zi)
            + (qi - 1.0) * np.log1p(-zi)
            - logbeta[interior]
            - np.log(one_p2u)
        )
    with np.errstate(divide="ignore"):
        if at0.any():
            out[at0] = np.log(sp.betainc(p[at0], q[at0], np.broadcast_to(z0, (int(at0.sum()), u.size))))
        if at1.any():
            # 1 - F((1+u)/(1+2u); p, q) = I_{u/(1+2u)}(q, p)
            out[at1] = np.log(sp.betainc(q[at1], p[at1], np.broadcast_to(z0, (int(at1.sum()), u.size))))
    return out
