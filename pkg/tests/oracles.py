"""Independent reference computations used by several test modules.

Nothing here imports the package under test; each oracle is a from-scratch
implementation against which library output is compared.
"""

import itertools
import math


def cosine_product_integral(L, freqs):
    """Exact integral over (0, L) of a product of cos(k_j pi x / L).

    Expanding each cosine into exponentials, the integral is L times the
    fraction of sign patterns (s_1..s_n) in {+1,-1}^n whose signed frequency
    sum vanishes. Zero frequencies are allowed (they contribute both signs).
    """
    n = len(freqs)
    hits = 0
    for signs in itertools.product((1, -1), repeat=n):
        if sum(s * k for s, k in zip(signs, freqs)) == 0:
            hits += 1
    return L * hits / 2.0**n


def golden_section_max(f, lo, hi, iters=200):
    """Locate the maximizer of a unimodal function by golden-section search."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = hi - inv_phi * (hi - lo)
    d = lo + inv_phi * (hi - lo)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - inv_phi * (hi - lo)
            fc = f(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + inv_phi * (hi - lo)
            fd = f(d)
    return 0.5 * (lo + hi)
