"""Slow, deliberately naive reference implementations used as test oracles.

They share no code with the package beyond plain numpy.
"""

import itertools

import numpy as np


def naive_ward(x, y, na, nb):
    d = np.asarray(x, float) - np.asarray(y, float)
    return 2.0 * na * nb / (na + nb) * float(d @ d)


def naive_agglomerate(matrix, nrd, extremes=()):
    """Brute-force rescan of every pair at every step.

    Returns ``(clusters, log)`` where clusters are sorted member lists and the
    log records ``(first_day_a, first_day_b, D)`` per merge. Pinned clusters
    use the extreme day's own features; when two pinned clusters meet, the
    earliest extreme day wins.
    """
    clusters = [[d] for d in range(matrix.shape[0])]
    pins = {d: d for d in extremes}  # keyed by cluster first day

    def cent(c):
        pin = pins.get(c[0])
        return matrix[pin] if pin is not None else matrix[c].mean(axis=0)

    log = []
    while len(clusters) > nrd:
        best = None
        for a, b in itertools.combinations(range(len(clusters)), 2):
            ca, cb = clusters[a], clusters[b]
            dval = naive_ward(cent(ca), cent(cb), len(ca), len(cb))
            key = (dval, min(ca[0], cb[0]), max(ca[0], cb[0]))
            if best is None or key < best[0]:
                best = (key, a, b)
        (dval, fa, fb), a, b = best
        merged = sorted(clusters[a] + clusters[b])
        pin_a, pin_b = pins.pop(clusters[a][0], None), pins.pop(clusters[b][0], None)
        pin = min(p for p in (pin_a, pin_b) if p is not None) if (pin_a is not None or pin_b is not None) else None
        clusters = [c for k, c in enumerate(clusters) if k not in (a, b)] + [merged]
        clusters.sort(key=lambda c: c[0])
        if pin is not None:
            pins[merged[0]] = pin
        log.append((fa, fb, dval))
    return clusters, log


def naive_ctpc(matrix, nrd):
    clusters = [[d] for d in range(matrix.shape[0])]
    log = []
    while len(clusters) > nrd:
        scores = [
            naive_ward(matrix[clusters[k]].mean(0), matrix[clusters[k + 1]].mean(0), len(clusters[k]), len(clusters[k + 1]))
            for k in range(len(clusters) - 1)
        ]
        k = int(np.argmin(scores))
        log.append((clusters[k][0], clusters[k + 1][0], scores[k]))
        clusters[k : k + 2] = [clusters[k] + clusters[k + 1]]
    return clusters, log


def run_lengths(assignment):
    blocks = []
    for d, rd in enumerate(assignment):
        if blocks and blocks[-1][2] == rd:
            blocks[-1][1] = d
        else:
            blocks.append([d, d, rd])
    return blocks


def brute_force_milp(model):
    """Minimize by fixing every binary combination and solving each LP.

    Uses scipy's ``linprog`` on the raw arrays of the model. Returns
    ``(best_objective, best_x, n_lps)``; infeasible combinations are skipped.
    """
    from scipy.optimize import linprog

    A = model.A.toarray()
    le = model.sense == "L"
    ge = model.sense == "G"
    eq = model.sense == "E"
    A_ub = np.vstack([A[le], -A[ge]])
    b_ub = np.concatenate([model.rhs[le], -model.rhs[ge]])
    ints = np.flatnonzero(model.is_int)
    best, best_x, count = np.inf, None, 0
    for combo in itertools.product((0.0, 1.0), repeat=len(ints)):
        lb = model.lb.copy()
        ub = model.ub.copy()
        lb[ints] = combo
        ub[ints] = combo
        res = linprog(
            model.obj,
            A_ub=A_ub,
            b_ub=b_ub,
            A_eq=A[eq],
            b_eq=model.rhs[eq],
            bounds=list(zip(lb, np.where(np.isinf(ub), None, ub))),
            method="highs",
        )
        count += 1
        if res.status == 0 and res.fun + model.obj_offset < best:
            best, best_x = res.fun + model.obj_offset, res.x
    return best, best_x, count


def naive_soc(net_rd, assignment, start):
    """Hour-by-hour stored energy over the year for one storage unit.

    ``net_rd[rd][h]`` is the net charge (after efficiencies) in hour ``h`` of
    representative day ``rd``; ``assignment[d]`` names the day's RD.
    """
    level = float(start)
    out = []
    for rd in assignment:
        for h in range(len(net_rd[rd])):
            level += net_rd[rd][h]
            out.append(level)
    return np.array(out)
