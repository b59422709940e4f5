"""Independent reference computations used by the tests.

Nothing here touches the density-matrix code paths in ``nlshare``; the closed
forms below were derived by hand for the |Phi+> state.
"""

import math

import numpy as np

QUARTER_PI = math.pi / 4


def i1_closed(G, gamma):
    return 2 * G * (math.cos(gamma) + math.sin(gamma))


def i2_closed(G, gamma, delta):
    F = math.sqrt(max(0.0, 1 - G * G))
    a = F + (1 - F) * math.cos(gamma) ** 2
    b = F + (1 - F) * math.sin(gamma) ** 2
    return 2 * math.cos(delta) * a + 2 * math.sin(delta) * b


def grid_argmax_delta(G, gamma, step):
    d = np.arange(0, QUARTER_PI + step / 2, step)
    vals = np.array([i2_closed(G, gamma, x) for x in d]) if len(d) < 2000 else _i2_vec(G, gamma, d)
    return float(d[vals.argmax()])


def _i2_vec(G, gamma, d):
    F = math.sqrt(max(0.0, 1 - G * G))
    a = F + (1 - F) * math.cos(gamma) ** 2
    b = F + (1 - F) * math.sin(gamma) ** 2
    return 2 * np.cos(d) * a + 2 * np.sin(d) * b


def grid_maxmin(G, step=1e-4, chunk=1024):
    """max over a (gamma, delta) grid of min(I1, I2); returns (value, gamma, delta)."""
    F = math.sqrt(max(0.0, 1 - G * G))
    g = np.arange(0, QUARTER_PI + step / 2, step)
    d = g.copy()
    i1 = 2 * G * (np.cos(g) + np.sin(g))
    ab = 2 * np.stack([F + (1 - F) * np.cos(g) ** 2, F + (1 - F) * np.sin(g) ** 2], axis=1)
    cs = np.stack([np.cos(d), np.sin(d)])
    best = np.empty(len(g))
    arg = np.empty(len(g), dtype=int)
    for k in range(0, len(g), chunk):
        block = ab[k : k + chunk] @ cs
        arg[k : k + chunk] = block.argmax(axis=1)
        best[k : k + chunk] = block.max(axis=1)
    m = np.minimum(i1, best)
    j = int(m.argmax())
    return float(m[j]), float(g[j]), float(d[arg[j]])


# Brown-branch values from a 30-digit mpmath root solve of
# i1_closed(G, g) = max_delta i2_closed(G, g, delta) (Illinois method).
BROWN_BRANCH = {
    0.81: (2.25319146064766, 0.603409834052965),
    0.84: (2.22298668657893, 0.424693030318507),
    0.85: (2.21235903591957, 0.383244148875197),
    0.88: (2.17858507883718, 0.280615713439230),
    0.92: (2.12835993356973, 0.172392872742957),
    0.96: (2.07030347314501, 0.0817103899742925),
    0.99: (2.01921729250617, 0.0200082058076959),
}
