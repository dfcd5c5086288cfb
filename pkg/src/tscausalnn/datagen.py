"""Synthetic nonlinear time series with known temporal causal graphs.

Four families are available. ``Dataset1`` uses Gaussian noise and a seasonal
cosine driver, ``Dataset2`` drops the cosine and uses centred Poisson noise.
The ``-LaggedOnly`` variants remove the two contemporaneous terms
(S1(t) -> S2 and S3(t) -> S4) from the corresponding equations.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import ConvergenceError, NoiseRecordError, SpecError
from .graph import TemporalGraph
from .preprocess import TimeSeriesDataset

NAMES = ["S1", "S2", "S3", "S4"]
FAMILY_LMAX = 5
POISSON_RATE = 1.0
SNR_PROBE_LENGTH = 2000
SNR_MAX_BISECTIONS = 50
SNR_TOLERANCE = 0.10


class Family(str, enum.Enum):
    DATASET1 = "Dataset1"
    DATASET2 = "Dataset2"
    DATASET1_LAGGED = "Dataset1-LaggedOnly"
    DATASET2_LAGGED = "Dataset2-LaggedOnly"

    @property
    def lagged_only(self):
        return self in (Family.DATASET1_LAGGED, Family.DATASET2_LAGGED)

    @property
    def poisson(self):
        return self in (Family.DATASET2, Family.DATASET2_LAGGED)


FAMILY_ALIASES = {
    "synth1": Family.DATASET1,
    "synth2": Family.DATASET2,
    "synth1-lagged": Family.DATASET1_LAGGED,
    "synth2-lagged": Family.DATASET2_LAGGED,
}


def parse_family(value):
    if isinstance(value, Family):
        return value
    key = str(value).strip()
    if key.lower() in FAMILY_ALIASES:
        return FAMILY_ALIASES[key.lower()]
    for fam in Family:
        if fam.value.lower() == key.lower():
            return fam
    raise SpecError(f"unknown dataset family {value!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    """Generation recipe.

    ``noise_scale`` multiplies every noise term. It is either one number for
    all variables or a 4-tuple with one multiplier per variable (S1..S4).
    """

    family: Family = Family.DATASET1
    length: int = 1000
    burn_in: int = 100
    noise_scale: float | tuple = 1.0
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", parse_family(self.family))
        if isinstance(self.noise_scale, (list, tuple, np.ndarray)):
            object.__setattr__(self, "noise_scale", tuple(float(s) for s in self.noise_scale))

    def validate(self):
        if self.length < FAMILY_LMAX:
            raise SpecError(f"length {self.length} is below the family's maximum lag {FAMILY_LMAX}")
        if self.burn_in < FAMILY_LMAX:
            raise SpecError(f"burn-in {self.burn_in} is below the family's maximum lag {FAMILY_LMAX}")
        scales = self.scales()
        if len(scales) != len(NAMES) or any(not math.isfinite(s) or s < 0 for s in scales):
            raise SpecError(f"noise_scale must be non-negative, one value or {len(NAMES)}")

    def scales(self):
        if isinstance(self.noise_scale, tuple):
            return self.noise_scale
        return (float(self.noise_scale),) * len(NAMES)


@dataclass
class GroundTruth:
    graph: TemporalGraph
    summary: np.ndarray


def true_edges(family):
    """Generating terms as ``(source, lag, target)``."""
    family = parse_family(family)
    edges = [
        ("S1", 2, "S1"),
        ("S1", 5, "S1"),
        ("S1", 1, "S2"),
        ("S1", 1, "S3"),
        ("S1", 1, "S4"),
        ("S3", 1, "S4"),
        ("S4", 1, "S4"),
    ]
    if not family.lagged_only:
        edges += [("S1", 0, "S2"), ("S3", 0, "S4")]
    return edges


def ground_truth(family):
    g = TemporalGraph.from_edges(NAMES, FAMILY_LMAX, true_edges(family))
    return GroundTruth(g, g.summary())


# Noise coefficients as written in the generating equations.
_NOISE_COEF = {False: (0.1, 1.0, 1.0, 1.0), True: (1.0, 1.0, 1.0, 1.0)}


def _draw_noise(rng, family, rows):
    if family.poisson:
        return rng.poisson(POISSON_RATE, size=(rows, len(NAMES))) - POISSON_RATE
    return rng.standard_normal((rows, len(NAMES)))


def _simulate(family, x, eps):
    """Run the recursion in place on ``x`` (rows ``< FAMILY_LMAX`` are seeds)."""
    ex = math.exp
    contemp = not family.lagged_only
    rows = x.shape[0]
    xs = x.tolist()
    ep = eps.tolist()
    if family.poisson:
        for t in range(FAMILY_LMAX, rows):
            p1, p3, p4 = xs[t - 1][0], xs[t - 1][2], xs[t - 1][3]
            e1, e2, e3, e4 = ep[t]
            s1 = 0.7 * ex(-(xs[t - 2][0] ** 2) * (xs[t - 5][0] ** 2) / 2) + e1
            s2 = 2 * ex(p1 * p1 / 2) + e2
            if contemp:
                s2 += 0.5 * ex(s1 * s1 / 2)
            s3 = -5.05 * ex(-p1 * p1 / 2) + e3
            s4 = -1.15 * ex(-p1 * p1 / 2) + 2.35 * ex(-p3 * p3 / 2) + 1.5 * ex(-p4 * p4 / 2) + e4
            if contemp:
                s4 += 3 * ex(-s3 * s3 / 2)
            xs[t] = [s1, s2, s3, s4]
    else:
        for t in range(FAMILY_LMAX, rows):
            p1, p3, p4 = xs[t - 1][0], xs[t - 1][2], xs[t - 1][3]
            e1, e2, e3, e4 = ep[t]
            s1 = 2 * (math.cos(t / 10) + math.log(abs(xs[t - 2][0] - xs[t - 5][0]) + 1)) + e1
            s2 = 12 * ex(p1 * p1 / 2) + e2
            if contemp:
                s2 -= 4 * ex(s1 * s1 / 2)
            s3 = -10.5 * ex(-p1 * p1 / 2) + e3
            s4 = -11.5 * ex(-p1 * p1 / 2) + 13.5 * ex(-p3 * p3 / 2) + 1.2 * ex(-p4 * p4 / 2) + e4
            if contemp:
                s4 -= 5 * ex(-s3 * s3 / 2)
            xs[t] = [s1, s2, s3, s4]
    x[:] = xs


def _run(spec, length):
    rng = np.random.default_rng(spec.seed)
    rows = spec.burn_in + length
    x = np.zeros((rows, len(NAMES)))
    x[:FAMILY_LMAX] = rng.standard_normal((FAMILY_LMAX, len(NAMES)))
    coef = np.array(_NOISE_COEF[spec.family.poisson]) * np.array(spec.scales())
    eps = _draw_noise(rng, spec.family, rows) * coef
    eps[:FAMILY_LMAX] = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        try:
            _simulate(spec.family, x, eps)
        except OverflowError:
            x[:] = np.inf
    return x[spec.burn_in:], eps[spec.burn_in:]


def generate(spec):
    """Simulate ``spec`` and return ``(dataset, ground_truth)``.

    The dataset records the additive noise realisations in ``noise`` so
    :func:`measure_snr` can separate signal from noise afterwards.
    """
    spec.validate()
    values, noise = _run(spec, spec.length)
    if not np.all(np.isfinite(values)):
        raise SpecError(f"{spec.family.value} overflowed at noise scale {spec.noise_scale}")
    truth = ground_truth(spec.family)
    data = TimeSeriesDataset(
        list(NAMES), values, noise=noise, truth=truth.graph,
        meta={"family": spec.family.value, "seed": spec.seed, "noise_scale": spec.noise_scale},
    )
    return data, truth


def measure_snr(data, spec=None):
    """Per-variable ``var(signal) / var(noise)`` using the recorded noise.

    A variable with zero noise variance reports ``inf`` (noiseless).
    """
    if data.noise is None:
        raise NoiseRecordError("dataset has no recorded noise realisations")
    if spec is not None and data.noise.shape[1] != len(spec.scales()):
        raise NoiseRecordError("noise record does not match the spec's variable count")
    signal = data.values - data.noise
    sig_var = signal.var(axis=0)
    noise_var = data.noise.var(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        snr = np.where(noise_var > 0, sig_var / np.where(noise_var > 0, noise_var, 1.0), np.inf)
    return snr


def _probe_snr(spec):
    values, noise = _run(spec, max(SNR_PROBE_LENGTH, spec.length))
    if not np.all(np.isfinite(values)):
        return None
    return measure_snr(TimeSeriesDataset(list(NAMES), values, noise=noise))


# Each variable's SNR depends on its own multiplier and its parents'; solving
# in this order means every parent is fixed before its children.
_SOLVE_ORDER = (0, 2, 1, 3)


def snr_variant(base, target_avg_snr):
    """Return a copy of ``base`` whose noise multipliers give the requested average SNR.

    If the base spec is already within tolerance it is returned unchanged.
    Otherwise one multiplier per variable is found by bisection on a log
    scale so each variable's SNR matches the target, which puts the average
    on target as well.
    """
    if not target_avg_snr > 0:
        raise ValueError("target SNR must be positive")
    base.validate()
    probe = _probe_snr(base)
    if probe is not None and abs(probe.mean() - target_avg_snr) <= SNR_TOLERANCE * target_avg_snr:
        return base
    scales = [s if s > 0 else 1.0 for s in base.scales()]
    for j in _SOLVE_ORDER:
        lo, hi = -8.0, 200.0  # log10 multiplier; SNR falls as it grows
        best = None
        for _ in range(SNR_MAX_BISECTIONS):
            mid = 0.5 * (lo + hi)
            scales[j] = 10.0 ** mid
            snr = _probe_snr(replace(base, noise_scale=tuple(scales)))
            value = 0.0 if snr is None else snr[j]
            if snr is not None:
                err = abs(value - target_avg_snr) / target_avg_snr
                if best is None or err < best[0]:
                    best = (err, mid)
                if err < 1e-3:
                    break
            if value > target_avg_snr:
                lo = mid
            else:
                hi = mid
        if best is None:
            raise ConvergenceError(f"could not reach SNR {target_avg_snr} for {NAMES[j]}")
        scales[j] = 10.0 ** best[1]
    out = replace(base, noise_scale=tuple(scales))
    achieved = _probe_snr(out)
    if achieved is None or abs(achieved.mean() - target_avg_snr) > SNR_TOLERANCE * target_avg_snr:
        got = "overflow" if achieved is None else f"{achieved.mean():.4g}"
        raise ConvergenceError(f"average SNR {got} misses target {target_avg_snr}")
    return out
