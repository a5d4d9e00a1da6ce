"""Regenerate the certificates shipped in src/covdex/data/certs.

Every certificate is verified before it is written. Run from the repository root:

    python3 tools/make_certs.py [name ...]
"""
import sys
import time
from pathlib import Path

from covdex.bodies import canonical
from covdex.cover import verify_cover
from covdex.gamma import archive_certificate
from covdex.search import feasible_cover_search, minimize_ratio

ROOT = Path(__file__).resolve().parents[1] / "src" / "covdex" / "data" / "certs"


def by_minimization(name, m, starts=16):
    res = minimize_ratio(canonical(name), m, starts=starts, seed=42, slack=1e-6, lower=0.0)
    return None if res is None else res.certificate


def by_feasibility(name, m, lam, starts=8):
    return feasible_cover_search(canonical(name), m, lam, starts=starts, seed=42, slack=1e-6)


JOBS = {
    **{f"disk{m}": (lambda m=m: by_minimization("disk", m)) for m in range(3, 10)},
    "ball3_21": lambda: by_feasibility("ball3", 21, 0.49439 * (1 + 1e-3), starts=4),
    "hexagon6": lambda: by_feasibility("hexagon", 6, 0.5 * (1 + 1e-5)),
    "square4": lambda: by_feasibility("square", 4, 0.5 * (1 + 1e-5)),
    "triangle3": lambda: by_feasibility("triangle", 3, 2 / 3 * (1 + 1e-5)),
}

if __name__ == "__main__":
    for name in sys.argv[1:] or JOBS:
        t = time.time()
        cert = JOBS[name]()
        if cert is None or not verify_cover(cert, 1e-6).verified:
            print(f"{name}: no certificate ({time.time() - t:.1f}s)")
            continue
        path = archive_certificate(cert, ROOT)
        print(f"{name}: ratio {cert.ratio:.8f} -> {path.relative_to(ROOT)} ({time.time() - t:.1f}s)")
