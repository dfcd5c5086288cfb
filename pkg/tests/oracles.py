"""Reference implementations used only by the tests.

They are deliberately naive so they share no code path with the package.
"""
import itertools

import numpy as np


def expm_series(a, terms=40):
    """Plain Taylor sum of exp(a), term by term."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    total = np.eye(n)
    term = np.eye(n)
    for k in range(1, terms):
        term = term @ a / k
        total = total + term
    return total


def h_series(w):
    w = np.asarray(w, dtype=float)
    return float(np.trace(expm_series(w * w))) - w.shape[0]


def central_diff(f, x, eps=1e-6):
    x = np.array(x, dtype=float)
    g = np.zeros_like(x)
    for idx in np.ndindex(x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[idx] += eps
        xm[idx] -= eps
        g[idx] = (f(xp) - f(xm)) / (2 * eps)
    return g


def rel_err(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-12))


def _pair_cost(p, t):
    """Edit distance between two states of an unordered node pair.

    A state is a pair of booleans (u->v present, v->u present). Allowed edits,
    each costing 1: add an edge, delete an edge, flip a lone edge.
    """
    frontier = {p: 0}
    seen = {p: 0}
    while frontier:
        nxt = {}
        for (a, b), d in frontier.items():
            moves = [(not a, b), (a, not b)]
            if a != b:
                moves.append((b, a))
            for m in moves:
                if m not in seen:
                    seen[m] = d + 1
                    nxt[m] = d + 1
        frontier = nxt
    return seen[t]


def brute_metrics(pred, truth, mode):
    """SHD, F1 and FDR by walking every possible edge slot of two binary graphs."""
    n, width = pred.n, pred.l_max + 1
    P = pred.weights != 0
    T = truth.weights != 0
    if mode == "summary":
        P = P.any(axis=1)
        T = T.any(axis=1)
        slots = [(i, j) for i in range(n) for j in range(n)]
        pget = lambda s: bool(P[s])
        tget = lambda s: bool(T[s])
    else:
        slots = [(i, k, j) for i in range(n) for k in range(width) for j in range(n)]
        pget = lambda s: bool(P[s])
        tget = lambda s: bool(T[s])
    tp = sum(pget(s) and tget(s) for s in slots)
    fp = sum(pget(s) and not tget(s) for s in slots)
    fn = sum(tget(s) and not pget(s) for s in slots)

    shd = 0
    if mode == "summary":
        for i in range(n):
            shd += pget((i, i)) != tget((i, i))
        for i, j in itertools.combinations(range(n), 2):
            shd += _pair_cost((pget((i, j)), pget((j, i))), (tget((i, j)), tget((j, i))))
    else:
        c = width - 1
        for i in range(n):
            for k in range(width):
                for j in range(n):
                    if k != c:
                        shd += pget((i, k, j)) != tget((i, k, j))
        for i, j in itertools.combinations(range(n), 2):
            shd += _pair_cost((pget((i, c, j)), pget((j, c, i))), (tget((i, c, j)), tget((j, c, i))))

    f1 = 0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn)
    fdr = fp / (tp + fp) if tp + fp else 0.0
    return shd, f1, fdr, tp, fp, fn


def relu(x):
    return np.maximum(x, 0)


def naive_forward(params, x, activation="relu", variant="conv2d", floor=0.1):
    """Loop-based forward pass over samples, heads, cells and channels."""
    S, n, W = x.shape
    w, b = params["latent_w"], params["latent_b"]
    K = params["kernel"]
    act = relu if activation == "relu" else np.tanh
    out = np.zeros((S, K.shape[0]))
    for s in range(S):
        for j in range(K.shape[0]):
            acc = params["bias"][j]
            for i in range(n):
                for c in range(W):
                    z = [(act(w[q] * x[s, i, c] + b[q]) - act(b[q])) / max(abs(w[q]), floor) for q in range(len(w))]
                    if variant == "conv2d":
                        acc += sum(K[j, i, c, q] * z[q] for q in range(len(w)))
                    else:
                        r = params["reduce"]
                        acc += K[j, i, c, 0] * sum(r[q] * z[q] for q in range(len(w))) / max(np.linalg.norm(r), floor)
            out[s, j] = acc
    return out

