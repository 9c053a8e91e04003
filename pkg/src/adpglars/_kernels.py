"""Hot loops of the path solver.

Everything here stays inside the numba nopython subset: plain arrays in,
plain arrays out, integer codes instead of enums.
"""
import numpy as np

from ._accel import njit

OLSE, RE, AURE, LE, AULE, PCRE, RK, RD = range(8)

EV_ENTER, EV_DROP, EV_TERMINAL = 0, 1, 2

ST_OK, ST_MAX_STEPS, ST_SINGULAR, ST_ZERO = 0, 1, 2, 3

# candidates at or below this step fraction are treated as "already there"
RHO_EPS = 1e-12
# step fractions closer than this are ties; lowest index wins
RHO_TIE = 1e-12
SINGULAR_RTOL = 1e-10


@njit
def sorted_eigh(gram):
    """Eigenpairs in descending order, largest-|entry| of each vector positive.

    Ties in eigenvalue keep LAPACK's order (stable sort).
    """
    vals, vecs = np.linalg.eigh(gram)
    order = np.argsort(-vals, kind="mergesort")
    q = vals.shape[0]
    out_vals = np.empty(q)
    out_vecs = np.empty((q, q))
    for i in range(q):
        src = order[i]
        out_vals[i] = vals[src]
        big = 0
        for r in range(q):
            if abs(vecs[r, src]) > abs(vecs[big, src]):
                big = r
        sgn = 1.0 if vecs[big, src] >= 0.0 else -1.0
        for r in range(q):
            out_vecs[r, i] = sgn * vecs[r, src]
    return out_vals, out_vecs


@njit
def resolve_components(vals, h, threshold):
    """Number of leading components: explicit ``h`` if positive, else the
    smallest count whose cumulative eigenvalue share reaches ``threshold``."""
    q = vals.shape[0]
    if h > 0:
        return h
    if threshold >= 1.0:
        return q
    total = 0.0
    for i in range(q):
        total += max(vals[i], 0.0)
    if total <= 0.0:
        return q
    acc = 0.0
    for i in range(q):
        acc += max(vals[i], 0.0)
        if acc / total >= threshold - 1e-12:
            return i + 1
    return q


@njit
def filter_factors(kind, vals, k, d, ncomp):
    """Spectral form of the shrinkage transforms.

    Every transform is a function of the Gram matrix, so in its eigenbasis it
    acts as a diagonal filter. The principal-component kinds also zero out
    everything past the first ``ncomp`` components.
    """
    q = vals.shape[0]
    f = np.ones(q)
    for i in range(q):
        lam = vals[i]
        if kind == RE or kind == RK:
            f[i] = lam / (lam + k)
        elif kind == AURE:
            f[i] = 1.0 - (k * k) / ((lam + k) * (lam + k))
        elif kind == LE or kind == RD:
            f[i] = (lam + d) / (lam + 1.0)
        elif kind == AULE:
            f[i] = 1.0 - ((1.0 - d) * (1.0 - d)) / ((lam + 1.0) * (lam + 1.0))
        if (kind == PCRE or kind == RK or kind == RD) and i >= ncomp:
            f[i] = 0.0
    return f


@njit
def is_collinear(sub_gram):
    """Scale-free collinearity test on an active-set Gram block."""
    q = sub_gram.shape[0]
    dscale = np.empty(q)
    for i in range(q):
        if sub_gram[i, i] <= 0.0:
            return True
        dscale[i] = 1.0 / np.sqrt(sub_gram[i, i])
    corr = sub_gram * np.outer(dscale, dscale)
    ev = np.linalg.eigvalsh(corr)
    return ev[0] < SINGULAR_RTOL * ev[-1]


@njit
def next_event(c, a, c_max, beta, u, active, banned, allow_entry):
    """Smallest step fraction in (0, 1] at which the active set changes.

    Entry candidates (inactive j) solve ``c_j - rho*a_j = +-c_max*(1 - rho)``;
    ``banned`` is the variable dropped at the previous breakpoint. Drop
    candidates (active j, nonzero beta_j) are the zero crossings ``-beta_j/u_j``. Returns ``(rho, event_code, variable)``; when nothing
    happens before the end of the segment the event is terminal with rho 1.
    """
    p = c.shape[0]
    rho = 1.0
    event = EV_TERMINAL
    var = -1
    for j in range(p):
        if active[j]:
            if beta[j] != 0.0 and u[j] != 0.0:
                cand = -beta[j] / u[j]
            else:
                continue
            code = EV_DROP
            if cand <= RHO_EPS or cand > 1.0 + RHO_TIE:
                continue
            if cand < rho - RHO_TIE or (cand <= rho + RHO_TIE and (var < 0 or j < var)):
                rho = min(cand, 1.0)
                event = code
                var = j
            continue
        if not allow_entry:
            continue
        for sgn in (1.0, -1.0):
            den = c_max - sgn * a[j]
            if den == 0.0:
                continue
            num = c_max - sgn * c[j]
            # a just-dropped variable sits exactly on the boundary; only its
            # non-trivial root may bring it back
            if j == banned and abs(num) <= 1e-9 * c_max:
                continue
            cand = num / den
            if cand <= RHO_EPS or cand > 1.0 + RHO_TIE:
                continue
            if cand < rho - RHO_TIE or (cand <= rho + RHO_TIE and (var < 0 or j < var)):
                rho = min(cand, 1.0)
                event = EV_ENTER
                var = j
    return rho, event, var


@njit
def spectral_direction(sub_gram, c_act, kind, k, d, h, threshold):
    """Active-set direction ``M (E'X'XE)^{-1} E'X'r`` via one eigendecomposition.

    Returns the q-vector and the number of components used.
    """
    vals, vecs = sorted_eigh(sub_gram)
    ncomp = vals.shape[0]
    if kind == PCRE or kind == RK or kind == RD:
        ncomp = resolve_components(vals, h, threshold)
        if ncomp > vals.shape[0]:
            ncomp = vals.shape[0]
    f = filter_factors(kind, vals, k, d, ncomp)
    z = vecs.T @ c_act
    for i in range(z.shape[0]):
        z[i] = z[i] * f[i] / vals[i]
    return vecs @ z, ncomp


@njit
def glars_path_kernel(xs, y, kind, k, d, h, threshold, max_active, max_steps):
    """Run the generalized LARS loop on the weighted design ``xs``.

    Returns per-breakpoint arrays (row 0 is the origin, where the first
    variable enters) and a status code.
    """
    n, p = xs.shape
    gram = xs.T @ xs
    c = xs.T @ y
    r = y.copy()
    beta = np.zeros(p)
    active = np.zeros(p, dtype=np.bool_)
    order = np.full(p, -1, dtype=np.int64)
    q = 0

    cap = max_steps + 1
    betas = np.zeros((cap, p))
    dirs = np.zeros((cap, p))
    rhos = np.zeros(cap)
    ev_code = np.zeros(cap, dtype=np.int64)
    ev_var = np.full(cap, -1, dtype=np.int64)
    orders = np.full((cap, p), -1, dtype=np.int64)
    ncomps = np.zeros(cap, dtype=np.int64)
    rnorm = np.zeros(cap)

    first = 0
    for j in range(1, p):
        if abs(c[j]) > abs(c[first]) + RHO_TIE * abs(c[first]):
            first = j
    rnorm[0] = np.sqrt(r @ r)
    if abs(c[first]) == 0.0:
        return betas[:1], dirs[:1], rhos[:1], ev_code[:1], ev_var[:1], orders[:1], ncomps[:1], rnorm[:1], ST_ZERO

    active[first] = True
    order[0] = first
    q = 1
    rhos[0] = 1.0
    ev_code[0] = EV_ENTER
    ev_var[0] = first
    orders[0, 0] = first

    banned = -1
    status = ST_MAX_STEPS
    nrec = 1
    for step in range(1, max_steps + 1):
        idx = order[:q].copy()
        sub = np.empty((q, q))
        for a_i in range(q):
            for b_i in range(q):
                sub[a_i, b_i] = gram[idx[a_i], idx[b_i]]
        if is_collinear(sub):
            status = ST_SINGULAR
            break
        c_act = np.empty(q)
        for a_i in range(q):
            c_act[a_i] = c[idx[a_i]]
        u_act, ncomp = spectral_direction(sub, c_act, kind, k, d, h, threshold)

        u = np.zeros(p)
        for a_i in range(q):
            u[idx[a_i]] = u_act[a_i]
        a = gram[:, idx] @ u_act
        if np.all(u_act == 0.0):
            status = ST_ZERO
            break
        c_max = np.max(np.abs(c_act))

        rho, event, var = next_event(c, a, c_max, beta, u, active, banned, q < max_active)

        for a_i in range(q):
            beta[idx[a_i]] += rho * u_act[a_i]
        c -= rho * a
        r -= rho * (xs[:, idx] @ u_act)

        banned = -1
        if event == EV_ENTER:
            active[var] = True
            order[q] = var
            q += 1
        elif event == EV_DROP:
            beta[var] = 0.0
            active[var] = False
            pos = 0
            for a_i in range(q):
                if order[a_i] != var:
                    order[pos] = order[a_i]
                    pos += 1
            order[q - 1] = -1
            q -= 1
            banned = var

        betas[step] = beta
        dirs[step] = u
        rhos[step] = rho
        ev_code[step] = event
        ev_var[step] = var
        orders[step] = order
        ncomps[step] = ncomp
        rnorm[step] = np.sqrt(r @ r)
        nrec = step + 1
        if event == EV_TERMINAL:
            status = ST_OK
            break
        if q == 0:
            # every variable dropped out; nothing left to move
            status = ST_ZERO
            break
    return (
        betas[:nrec],
        dirs[:nrec],
        rhos[:nrec],
        ev_code[:nrec],
        ev_var[:nrec],
        orders[:nrec],
        ncomps[:nrec],
        rnorm[:nrec],
        status,
    )
