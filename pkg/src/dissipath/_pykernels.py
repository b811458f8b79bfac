"""Pure-Python/numpy versions of the compiled kernels in ``_ckernels.pyx``.

Both backends produce identical output for identical input, including the
random streams used by :func:`hitting_times`.
"""
import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z):
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def excitation_table(dets, n_so):
    dets = np.asarray(dets, dtype=np.int64)
    index = {int(d): i for i, d in enumerate(dets)}
    P, Q, R, C, S = [], [], [], [], []
    for col, det in enumerate(dets.tolist()):
        for q in range(n_so):
            if not (det >> q) & 1:
                continue
            removed = det ^ (1 << q)
            par_q = bin(det & ((1 << q) - 1)).count("1")
            for p in range(n_so):
                if (removed >> p) & 1:
                    continue
                new = removed | (1 << p)
                par = par_q + bin(removed & ((1 << p) - 1)).count("1")
                P.append(p)
                Q.append(q)
                R.append(index.get(new, -1))
                C.append(col)
                S.append(-1.0 if par & 1 else 1.0)
    as_i = lambda x: np.asarray(x, dtype=np.int64)
    return as_i(P), as_i(Q), as_i(R), as_i(C), np.asarray(S, dtype=np.float64)


def hitting_times(cum, start, seed, cap, target):
    cum = np.ascontiguousarray(cum, dtype=np.float64)
    start = np.asarray(start, dtype=np.int64)
    n, D = start.shape[0], cum.shape[0]
    with np.errstate(over="ignore"):
        idx = np.arange(n, dtype=np.uint64)
        state = _mix(np.uint64(seed) ^ _mix(idx + _GOLDEN))
    j = start.copy()
    steps = np.zeros(n, dtype=np.int64)
    active = np.flatnonzero(j != target)
    inner = cum[:, : D - 1]
    t = 0
    while active.size and t < cap:
        with np.errstate(over="ignore"):
            state[active] = state[active] + _GOLDEN
            u = (_mix(state[active]) >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)
        k = np.count_nonzero(inner[j[active]] <= u[:, None], axis=1)
        j[active] = k
        t += 1
        steps[active] = t
        active = active[k != target]
    return steps, j != target
