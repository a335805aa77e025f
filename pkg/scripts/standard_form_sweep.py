"""Sweep random covariance matrices through the standard form.

For each mode count, reports how often a random local orthogonal image is
recognised as equivalent, the largest standard-form gap between the two, and
the mean time per canonicalization.
"""

from __future__ import annotations

import argparse
import time
from dataclasses import dataclass

import numpy as np

from fermigauss.gfs_cm import LocalOrthogonalSet, apply_local_orthogonal, random_cm
from fermigauss.glu_standard import glu_equivalent, standard_form_distance


@dataclass
class Config:
    samples: int = 200
    max_modes: int = 4
    seed: int = 0
    pure_fraction: float = 0.5


def main(cfg: Config) -> None:
    rng = np.random.default_rng(cfg.seed)
    print(f"{'n':>2} {'recognised':>11} {'max gap':>10} {'ms/pair':>8}")
    for n in range(1, cfg.max_modes + 1):
        hits, gap = 0, 0.0
        start = time.perf_counter()
        for _ in range(cfg.samples):
            g = random_cm(n, rng, pure=rng.random() < cfg.pure_fraction)
            h = apply_local_orthogonal(g, LocalOrthogonalSet.random(n, rng))
            hits += glu_equivalent(g, h)
            gap = max(gap, standard_form_distance(g, h))
        ms = 1e3 * (time.perf_counter() - start) / cfg.samples
        print(f"{n:>2} {hits:>5}/{cfg.samples:<5} {gap:>10.2e} {ms:>8.2f}")


if __name__ == "__main__":
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--samples", type=int, default=Config.samples)
    p.add_argument("--max-modes", type=int, default=Config.max_modes)
    p.add_argument("--seed", type=int, default=Config.seed)
    main(Config(**vars(p.parse_args())))
