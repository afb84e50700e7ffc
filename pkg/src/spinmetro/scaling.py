"""Precision-versus-n sweeps and log-log exponent fits."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import stats

from . import bec
from .noise import NoiseModel, apply_noise
from .protocols import (
    OperatingPointError,
    Protocol,
    ProtocolSpec,
    analytic_delta_gamma,
    evaluate_eq1,
)

__all__ = [
    "CSV_FIELDS",
    "SweepResult",
    "SweepRow",
    "fit_exponent",
    "geometric_grid",
    "operating_gamma",
    "read_csv",
    "run_bec_sweep",
    "run_sweep",
]

CSV_FIELDS = ("protocol", "n", "t", "gamma_true", "nu", "repeats", "delta_gamma", "stderr", "seed")


class SweepRow(NamedTuple):
    protocol: str
    n: int
    t: float
    gamma_true: float
    nu: int
    repeats: int
    delta_gamma: float
    stderr: float
    seed: int


@dataclass
class SweepResult:
    rows: list
    exponent: float
    exponent_stderr: float
    config_hash: str = ""
    config: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        ns = [r.n for r in self.rows]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("sweep rows must be sorted by strictly increasing n")

    @property
    def n(self) -> np.ndarray:
        return np.array([r.n for r in self.rows])

    @property
    def delta_gamma(self) -> np.ndarray:
        return np.array([r.delta_gamma for r in self.rows])

    def to_csv(self, fh=None) -> str:
        sink = fh if fh is not None else io.StringIO()
        writer = csv.writer(sink, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for row in self.rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return sink.getvalue() if fh is None else ""

    def to_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "exponent_stderr": self.exponent_stderr,
            "config_hash": self.config_hash,
            "rows": [row._asdict() for row in self.rows],
        }


def read_csv(fh) -> list[SweepRow]:
    reader = csv.DictReader(fh)
    if tuple(reader.fieldnames or ()) != CSV_FIELDS:
        raise ValueError(f"unexpected CSV header {reader.fieldnames}; expected {','.join(CSV_FIELDS)}")
    rows = []
    for rec in reader:
        rows.append(SweepRow(rec["protocol"], int(rec["n"]), float(rec["t"]), float(rec["gamma_true"]),
                             int(rec["nu"]), int(rec["repeats"]), float(rec["delta_gamma"]),
                             float(rec["stderr"]), int(rec["seed"])))
    return rows


def fit_exponent(rows) -> tuple[float, float]:
    """Ordinary least squares slope of log(delta_gamma) against log(n).

    ``rows`` holds :class:`SweepRow` objects or (n, delta_gamma) pairs.
    Returns the slope and its standard error from the residual variance.
    """
    pairs = [(r.n, r.delta_gamma) if hasattr(r, "delta_gamma") else (r[0], r[1]) for r in rows]
    if len(pairs) < 3:
        raise ValueError("need at least three points to fit an exponent")
    n, y = np.asarray(pairs, dtype=float).T
    if np.any(y <= 0) or np.any(n <= 0):
        raise ValueError("n and delta_gamma must be positive for a log-log fit")
    fit = stats.linregress(np.log(n), np.log(y))
    return float(fit.slope), float(fit.stderr)


def geometric_grid(n_min: int, n_max: int, points: int, even: bool = False) -> list[int]:
    """Roughly log-spaced distinct integers from n_min to n_max."""
    if points < 2 or n_min < 1 or n_max <= n_min:
        raise ValueError("need n_min >= 1, n_max > n_min and at least two points")
    grid = np.geomspace(n_min, n_max, points)
    ns = np.round(grid / 2) * 2 if even else np.round(grid)
    out = sorted({int(max(v, 2 if even else 1)) for v in ns})
    if len(out) < points:
        raise ValueError(f"cannot place {points} distinct integers between {n_min} and {n_max}")
    return out


def operating_gamma(protocol: Protocol, n: int, t: float, beta: float = math.pi / 4) -> float:
    """Default true coupling for each protocol.

    Mid-fringe for the arccos readouts (phase pi/2), and the small-phase
    regime gamma t n^2 = 0.1 for the J_z^2 product protocol.
    """
    protocol = Protocol(protocol)
    if protocol is Protocol.PRODUCT_NJZ:
        return math.pi / (2 * t * n)
    if protocol is Protocol.HALF_CAT_JZ2:
        return 2 * math.pi / (t * n**2)
    return 0.1 / (t * n**2)


def _check_grid(n_grid: Sequence[int]):
    ns = list(n_grid)
    if len(ns) < 4:
        raise ValueError("a sweep needs at least four n values")
    if max(ns) < 10 * min(ns):
        raise ValueError("a sweep must span at least one decade in n")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n grid must be strictly increasing")


def _config_hash(config: dict) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]


def _sweep_point(args):
    spec, repeats, noise, seed, analytic = args
    try:
        if analytic:
            if noise is not None and not noise.is_trivial:
                return apply_noise(spec, noise).analytic_delta_gamma(), 0.0
            return analytic_delta_gamma(spec), 0.0
        result = evaluate_eq1(spec, repeats, seed=seed, noise=noise)
        return result.delta_gamma, result.stderr
    except OperatingPointError as exc:
        raise OperatingPointError(f"n={spec.n}: {exc}") from exc


def run_sweep(protocol, n_grid: Sequence[int], nu: int = 1, repeats: int = 200,
              noise: Optional[NoiseModel] = None, seed: int = 0, *, analytic: bool = False,
              t: float = 1.0, beta: float = math.pi / 4, workers: int = 1) -> SweepResult:
    """Evaluate delta_gamma at each n and fit the scaling exponent.

    Points are independent: with ``workers > 1`` they run in separate
    processes, and because every point draws from streams keyed by its own n
    the rows do not depend on scheduling.
    """
    protocol = Protocol(protocol)
    ns = [int(n) for n in n_grid]
    _check_grid(ns)
    specs = [ProtocolSpec(protocol, n, t, operating_gamma(protocol, n, t, beta), nu, beta) for n in ns]
    jobs = [(s, repeats, noise, seed, analytic) for s in specs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_sweep_point, jobs))
    else:
        values = [_sweep_point(j) for j in jobs]
    reps = 0 if analytic else repeats
    rows = [SweepRow(protocol.value, s.n, s.t, s.gamma_true, s.nu, reps, float(d), float(e), seed)
            for s, (d, e) in zip(specs, values)]
    exponent, err = fit_exponent(rows)
    config = {
        "protocol": protocol.value, "n_grid": ns, "nu": nu, "repeats": reps, "seed": seed,
        "analytic": analytic, "t": t, "beta": beta,
        "noise": asdict(noise) if noise is not None else None,
    }
    return SweepResult(rows, exponent, err, _config_hash(config), config)


def run_bec_sweep(geometry: bec.TrapGeometry, species: bec.Species, n_grid: Sequence[int], *,
                  t: Optional[float] = None, nu: int = 1, repeats: int = 200, analytic: bool = True,
                  seed: int = 0, exact_n_minus_one: bool = True) -> SweepResult:
    """Precision of gamma1 estimated through the condensate's effective n J_z coupling.

    At each n the condensate acts as an n J_z protocol with rate
    a = gamma1 eta(n) (n-1) / (n hbar); delta a from that protocol converts to
    delta gamma1 = delta a * n hbar / (eta (n-1)).  The interrogation time is
    fixed across the sweep (default: the fringe phase reaches 2.5 rad at the
    largest n) so the fitted exponent reflects n alone.
    """
    ns = [int(n) for n in n_grid]
    _check_grid(ns)
    gamma1 = bec.couplings(species).gamma1
    if gamma1 == 0:
        raise OperatingPointError("gamma1 = 0: the condensate has no linear coupling to estimate")
    hams = [bec.bec_hamiltonian(geometry, species, n, exact_n_minus_one) for n in ns]
    if t is None:
        t = 2.5 / abs(hams[-1].a * ns[-1])
    rows = []
    for n, ham in zip(ns, hams):
        spec = ProtocolSpec(Protocol.PRODUCT_NJZ, n, t, ham.a, nu)
        d_rate, err = _sweep_point((spec, repeats, None, seed, analytic))
        convert = abs(gamma1 / ham.a)
        rows.append(SweepRow("bec", n, t, gamma1, nu, 0 if analytic else repeats,
                             d_rate * convert, err * convert, seed))
    exponent, err = fit_exponent(rows)
    config = {"geometry": asdict(geometry), "species": asdict(species), "n_grid": ns, "t": t,
              "nu": nu, "repeats": repeats, "analytic": analytic, "seed": seed,
              "exact_n_minus_one": exact_n_minus_one}
    return SweepResult(rows, exponent, err, _config_hash(config), config)
