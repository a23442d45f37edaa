"""Brute-force reference implementations used to check shiftkit.

Nothing here imports shiftkit's metric code. Everything is plain loops over
Python floats, so the two routes share no arithmetic.
"""

import math
import statistics

from scipy import integrate
from scipy.stats import multivariate_normal


def ade(pred, truth):
    total = 0.0
    for (px, py), (tx, ty) in zip(pred, truth):
        total += math.sqrt((px - tx) ** 2 + (py - ty) ** 2)
    return total / len(pred)


def fde(pred, truth):
    (px, py), (tx, ty) = pred[-1], truth[-1]
    return math.sqrt((px - tx) ** 2 + (py - ty) ** 2)


def trajectory_metrics(preds, confidences, truth):
    ades = [ade(p, truth) for p in preds]
    fdes = [fde(p, truth) for p in preds]
    best = 0
    for d in range(len(confidences)):
        if confidences[d] > confidences[best]:
            best = d
    return {
        "min_ade": min(ades),
        "avg_ade": sum(ades) / len(ades),
        "top1_ade": ades[best],
        "weighted_ade": sum(c * a for c, a in zip(confidences, ades)),
        "min_fde": min(fdes),
        "avg_fde": sum(fdes) / len(fdes),
        "top1_fde": fdes[best],
        "weighted_fde": sum(c * f for c, f in zip(confidences, fdes)),
    }


def ngrams(tokens, max_order=4):
    grams = []
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            grams.append(tuple(tokens[i : i + n]))
    return grams


def gleu(hyp, ref, max_order=4):
    if not hyp:
        return 0.0
    hyp_grams = ngrams(list(hyp), max_order)
    pool = ngrams(list(ref), max_order)
    total_ref = len(pool)
    matches = 0
    for g in hyp_grams:
        if g in pool:
            pool.remove(g)
            matches += 1
    return min(matches / len(hyp_grams), matches / total_ref)


def kl_closed(m1, v1, m2, v2):
    return math.log(math.sqrt(v2) / math.sqrt(v1)) + (v1 + (m1 - m2) ** 2) / (2 * v2) - 0.5


def kl_quadrature(m1, v1, m2, v2):
    s1 = math.sqrt(v1)

    def integrand(x):
        lp = -0.5 * math.log(2 * math.pi * v1) - (x - m1) ** 2 / (2 * v1)
        lq = -0.5 * math.log(2 * math.pi * v2) - (x - m2) ** 2 / (2 * v2)
        return math.exp(lp) * (lp - lq)

    val, _ = integrate.quad(integrand, m1 - 40 * s1, m1 + 40 * s1, limit=200, epsabs=1e-13, epsrel=1e-12)
    return val


def measures(means, variances, kl=kl_closed):
    K = len(means)
    mvar = statistics.fmean(variances)
    varm = statistics.pvariance(means)
    pairs = [kl(means[i], variances[i], means[j], variances[j]) for i in range(K) for j in range(K) if i != j]
    epkl = sum(pairs) / len(pairs) if pairs else 0.0
    return {"mvar": mvar, "varm": varm, "tvar": mvar + varm, "epkl": epkl}


def bivariate_logpdf(x, mean, cov):
    return float(multivariate_normal(mean=mean, cov=cov).logpdf(x))


# --------------------------------------------------------------- retention


def _precedes(a, b):
    """True if sample a is retained before sample b (lower uncertainty, then lower id)."""
    return (a[1], a[2]) < (b[1], b[2])


def positions(samples, key=None):
    """Retention position of each (error, uncertainty, id) sample by pairwise counting, O(N^2)."""
    key = key or (lambda s: (s[1], s[2]))
    return [sum(1 for t in samples if key(t) < key(s)) for s in samples]


def trapezoid(xs, ys):
    area = 0.0
    for i in range(1, len(xs)):
        area += (xs[i] - xs[i - 1]) * (ys[i] + ys[i - 1]) / 2
    return area


def error_retention(samples, key=None):
    """Curve values at k/N, k = 0..N, recomputed from scratch for each k."""
    n = len(samples)
    pos = positions(samples, key)
    values = []
    for k in range(n + 1):
        values.append(sum(s[0] for s, p in zip(samples, pos) if p < k) / n)
    xs = [k / n for k in range(n + 1)]
    return xs, values


def f1_retention(samples, threshold, key=None):
    n = len(samples)
    pos = positions(samples, key)
    values = []
    for k in range(n + 1):
        tp = fp = fn = 0
        for s, p in zip(samples, pos):
            retained = p < k
            ok = s[0] < threshold
            if retained and ok:
                tp += 1
            elif retained:
                fp += 1
            elif ok:
                fn += 1
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        values.append(2 * precision * recall / (precision + recall) if precision + recall else 0.0)
    xs = [k / n for k in range(n + 1)]
    return xs, values


def roc_auc(in_domain, shifted):
    wins = 0.0
    for s in shifted:
        for i in in_domain:
            if s > i:
                wins += 1
            elif s == i:
                wins += 0.5
    return wins / (len(in_domain) * len(shifted))


# --------------------------------------------------------------------- RIP


def rip(score_rows, D, traj_agg, req_agg):
    """Steps 3-6 on a list of per-candidate lists of K log-probs."""

    def agg(values, op):
        if op == "min":
            return min(values)
        if op == "mean":
            return statistics.fmean(values)
        return statistics.fmean(values) - statistics.pstdev(values)

    per_traj = [agg(row, traj_agg) for row in score_rows]
    request = agg(per_traj, req_agg)
    order = sorted(range(len(per_traj)), key=lambda g: (-per_traj[g], g))[:D]
    top = [per_traj[g] for g in order]
    m = max(top)
    z = [math.exp(s - m) for s in top]
    conf = [v / sum(z) for v in z]
    return order, conf, -request, per_traj
