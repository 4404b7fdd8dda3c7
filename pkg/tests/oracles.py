"""Independent pure-Python reimplementations used as test oracles.

Each one follows the textbook definition with plain loops and no numpy so
that it shares no code path with the library.
"""

import math


def vbcs(beats, accents, sigma):
    total = 0.0
    for m in accents:
        d = min(abs(m - a) for a in beats)
        total += math.exp(-d * d / (2 * sigma * sigma))
    return total / len(accents)


def abhs(beats, accents, tau):
    return sum(1 for a in beats if min(abs(a - m) for m in accents) < tau) / len(beats)


def _mean(v):
    return sum(v) / len(v)


def plcc(x, y):
    mx, my = _mean(x), _mean(y)
    cov = sum((a - mx) * (b - my) for a, b in zip(x, y))
    vx = sum((a - mx) ** 2 for a in x)
    vy = sum((b - my) ** 2 for b in y)
    return cov / math.sqrt(vx * vy)


def ranks(x):
    # average rank: 1 + (#strictly smaller) + (#equal - 1) / 2
    return [1 + sum(1 for b in x if b < a) + (sum(1 for b in x if b == a) - 1) / 2 for a in x]


def srcc(x, y):
    return plcc(ranks(x), ranks(y))


def qwk(a, b, levels=5):
    n = len(a)
    obs = [[0.0] * levels for _ in range(levels)]
    for i, j in zip(a, b):
        obs[i - 1][j - 1] += 1.0 / n
    row = [sum(obs[i]) for i in range(levels)]
    col = [sum(obs[i][j] for i in range(levels)) for j in range(levels)]
    num = den = 0.0
    for i in range(levels):
        for j in range(levels):
            w = (i - j) ** 2 / (levels - 1) ** 2
            num += w * obs[i][j]
            den += w * row[i] * col[j]
    return 1 - num / den


def consistency(scores, levels=5):
    n = len(scores)
    h = 0.0
    for k in range(1, levels + 1):
        p = scores.count(k) / n
        if p > 0:
            h -= p * math.log(p)
    return 1 - h / math.log(levels)
