"""ABC rejection sampler with joint model selection.

Candidate (model, parameter) pairs are drawn from a discrete model prior
and per-model independent uniform boxes, simulated, and accepted when the
relative quadratic misfit rho falls below the current tolerance. The
first population accepts everything (epsilon_1 = inf); each subsequent
tolerance is the median of the previous population's accepted distances,
and the schedule stops once a population has been generated at a
tolerance at or below ``eps_floor`` (or ``max_populations`` is hit).

Posterior model probabilities are the per-population acceptance
frequencies of each model tag. Marginals, Pearson correlations, and
pointwise predictive envelopes summarize the per-model particle sets.

Reproducibility: proposals are generated in fixed-size chunks whose RNG
streams are keyed by (seed, population index, chunk index), so serial and
thread-parallel runs produce bit-identical populations.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
import scipy.stats

from .bitrock import MODEL_KINDS, PARAM_COUNTS, torque_batch
from .calibration import FitResult
from .dataio import TorqueDataset
from .errors import (DataError, DomainError, InsufficientSamplesError,
                     StallError)

MAX_PARAMS = max(PARAM_COUNTS.values())

DEFAULT_EPS_FLOOR = 0.014
_CHUNK = 8192


@dataclass(frozen=True)
class PriorSpec:
    """Independent uniform box around a central estimate.

    Bounds are center*(1 -/+ delta) per component, swapped where the
    center is negative so lo < hi always holds.
    """

    kind: int
    delta: float
    center: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def from_center(cls, kind: int, center, delta: float) -> "PriorSpec":
        if not 0 < delta < 1:
            raise DomainError(f"delta must lie in (0, 1), got {delta}")
        center = np.asarray(center, dtype=float)
        if center.shape != (PARAM_COUNTS[kind],):
            raise DomainError(
                f"model {kind} center must have {PARAM_COUNTS[kind]} entries")
        if (center == 0).any():
            j = int(np.flatnonzero(center == 0)[0])
            raise DomainError(
                f"model {kind} parameter {j} has a zero central estimate; the "
                "relative-width prior degenerates, widen it manually")
        a = center * (1.0 - delta)
        b = center * (1.0 + delta)
        return cls(kind=kind, delta=delta, center=center,
                   lo=np.minimum(a, b), hi=np.maximum(a, b))

    def sample_from_unit(self, u: np.ndarray) -> np.ndarray:
        """Map uniforms in [0,1)^(..., p) onto the box."""
        return self.lo + u * (self.hi - self.lo)

    def contains(self, phi: np.ndarray) -> bool:
        return bool((phi >= self.lo).all() and (phi <= self.hi).all())


def build_priors(fits: dict[int, "FitResult | tuple | np.ndarray"],
                 delta: float) -> dict[int, PriorSpec]:
    """Uniform prior boxes centered on per-model calibration estimates."""
    priors = {}
    for kind, f in fits.items():
        center = f.model.params if isinstance(f, FitResult) else f
        priors[kind] = PriorSpec.from_center(kind, center, delta)
    return priors


@dataclass(frozen=True)
class Particle:
    """One accepted draw: model tag, parameter vector, distance."""

    kind: int
    phi: np.ndarray
    distance: float


@dataclass(frozen=True)
class Population:
    """One generation of N accepted particles, in acceptance order.

    ``phis`` is padded to MAX_PARAMS columns with NaN beyond each model's
    parameter count.
    """

    kinds: np.ndarray
    phis: np.ndarray
    distances: np.ndarray
    tolerance: float
    attempts: int

    def __len__(self) -> int:
        return len(self.kinds)

    def __getitem__(self, i: int) -> Particle:
        k = int(self.kinds[i])
        return Particle(kind=k, phi=self.phis[i, :PARAM_COUNTS[k]].copy(),
                        distance=float(self.distances[i]))

    def particles_of(self, kind: int) -> np.ndarray:
        """(m, p) parameter matrix of the particles carrying one tag."""
        mask = self.kinds == kind
        return self.phis[mask, :PARAM_COUNTS[kind]].copy()

    def count(self, kind: int) -> int:
        return int((self.kinds == kind).sum())


@dataclass
class AbcState:
    """Full sampler output: populations, tolerance schedule, provenance."""

    populations: list[Population]
    tolerances: list[float]
    next_tolerance: float
    stopped_by: str                     # "eps_floor" | "max_populations"
    n: int
    seed: int
    eps_floor: float
    model_prior: tuple[float, ...]
    priors: dict[int, PriorSpec] = field(repr=False)

    @property
    def n_populations(self) -> int:
        return len(self.populations)

    def population(self, g: int) -> Population:
        """1-based population accessor (population 1 is the accept-all one)."""
        if not 1 <= g <= self.n_populations:
            raise DomainError(
                f"population index must be in 1..{self.n_populations}, got {g}")
        return self.populations[g - 1]


def _normalize_model_prior(model_prior) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(model_prior, dtype=float)
    if p.shape != (len(MODEL_KINDS),):
        raise DomainError(f"model prior needs {len(MODEL_KINDS)} entries")
    if (p < 0).any() or not p.sum() > 0:
        raise DomainError("model prior must be nonnegative with positive mass")
    p = p / p.sum()
    return p, np.cumsum(p)


def _propose_chunk(seed: int, pop_index: int, chunk_index: int, chunk: int,
                   cum_prior: np.ndarray, priors: dict[int, PriorSpec],
                   speeds: np.ndarray, y: np.ndarray, ynorm: float, r
                   ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distances for one deterministic chunk of proposals.

    Returns (kinds, phis padded with NaN, distances) in attempt order.
    """
    rng = np.random.default_rng((seed, pop_index, chunk_index))
    u = rng.random((chunk, 1 + MAX_PARAMS))
    kinds = np.searchsorted(cum_prior, u[:, 0], side="right") + 1
    kinds = np.minimum(kinds, len(MODEL_KINDS))     # guard u == 1.0 edge
    phis = np.full((chunk, MAX_PARAMS), np.nan)
    dists = np.full(chunk, np.inf)
    for kind, prior in priors.items():
        mask = kinds == kind
        if not mask.any():
            continue
        p = PARAM_COUNTS[kind]
        phi = prior.sample_from_unit(u[mask, 1:1 + p])
        resid = y[None, :] - torque_batch(kind, phi, r, speeds)
        dists[mask] = np.einsum("ij,ij->i", resid, resid) / ynorm
        phis[mask, :p] = phi
    return kinds, phis, dists


def run(dataset: TorqueDataset, priors: dict[int, PriorSpec],
        model_prior=(0.25, 0.25, 0.25, 0.25), n: int = 25_000,
        eps_floor: float = DEFAULT_EPS_FLOOR, max_populations: int = 20,
        seed: int = 0, r=1.0, threads: int = 1,
        stall_window: int = 500_000) -> AbcState:
    """Run the rejection sampler until the tolerance floor is reached.

    Acceptance is strict (rho < eps). A population whose trailing
    ``stall_window`` attempts accept fewer than 1e-5 of proposals raises
    StallError carrying the stuck tolerance.
    """
    if n < 1:
        raise DomainError("population size must be >= 1")
    if not eps_floor > 0:
        raise DomainError("eps_floor must be > 0")
    if max_populations < 1:
        raise DomainError("max_populations must be >= 1")
    if set(priors) != set(MODEL_KINDS):
        missing = sorted(set(MODEL_KINDS) - set(priors))
        raise DomainError(f"priors missing for model kinds {missing}")
    dataset.require_calibration()
    y = dataset.calibration_torques
    speeds = dataset.calibration_speeds
    ynorm = float(np.dot(y, y))
    if not ynorm > 0:
        raise DataError("calibration torques are all zero")
    prior_vec, cum_prior = _normalize_model_prior(model_prior)
    threads = max(1, int(threads))

    def generate(pop_index: int, eps: float) -> Population:
        kinds = np.empty(0, dtype=int)
        phis = np.empty((0, MAX_PARAMS))
        dists = np.empty(0)
        attempts = 0
        window_attempts = 0
        window_accepts = 0
        chunk_index = 0

        def consume(result):
            nonlocal kinds, phis, dists, attempts
            nonlocal window_attempts, window_accepts
            ck, cp, cd = result
            acc = cd < eps
            n_have = len(kinds)
            if n_have >= n:
                return
            idx = np.flatnonzero(acc)
            if len(idx) > n - n_have:
                idx = idx[:n - n_have]
                # attempts counted up to and including the Nth acceptance
                attempts += int(idx[-1]) + 1
            else:
                attempts += len(ck)
            kinds = np.concatenate([kinds, ck[idx]])
            phis = np.concatenate([phis, cp[idx]])
            dists = np.concatenate([dists, cd[idx]])
            window_attempts += len(ck)
            window_accepts += len(idx)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            while len(kinds) < n:
                wave = [pool.submit(_propose_chunk, seed, pop_index, c, _CHUNK,
                                    cum_prior, priors, speeds, y, ynorm, r)
                        for c in range(chunk_index, chunk_index + threads)]
                chunk_index += threads
                for fut in wave:        # merge in chunk order: deterministic
                    consume(fut.result())
                if window_attempts >= stall_window:
                    if window_accepts < 1e-5 * window_attempts:
                        raise StallError(
                            f"acceptance rate below 1e-5 at eps={eps:.6g} "
                            f"({window_accepts}/{window_attempts} in window)",
                            epsilon=eps, attempts=attempts)
                    window_attempts = 0
                    window_accepts = 0
        return Population(kinds=kinds, phis=phis, distances=dists,
                          tolerance=eps, attempts=attempts)

    populations: list[Population] = []
    tolerances: list[float] = []
    eps = math.inf
    while True:
        tolerances.append(eps)
        pop = generate(len(populations), eps)
        populations.append(pop)
        nxt = float(np.median(pop.distances))
        if eps <= eps_floor:
            stopped = "eps_floor"
            break
        if len(populations) >= max_populations:
            stopped = "max_populations"
            break
        eps = nxt
    return AbcState(populations=populations, tolerances=tolerances,
                    next_tolerance=nxt, stopped_by=stopped, n=n, seed=seed,
                    eps_floor=eps_floor,
                    model_prior=tuple(float(p) for p in prior_vec),
                    priors=dict(priors))


def model_posterior(state: AbcState, g: int) -> list[Fraction]:
    """Acceptance frequency of each model tag in population g (1-based).

    Returned as exact fractions; they sum to 1 exactly.
    """
    pop = state.population(g)
    n = len(pop)
    return [Fraction(pop.count(k), n) for k in MODEL_KINDS]


@dataclass(frozen=True)
class PosteriorStats:
    """Marginal and correlation summaries for one model's particles."""

    kind: int
    n_particles: int
    param_names: tuple[str, ...]
    bin_edges: list[np.ndarray]          # per parameter, over the prior box
    bin_counts: list[np.ndarray]
    kde_grids: list[np.ndarray | None]   # None for degenerate parameters
    kde_densities: list[np.ndarray | None]
    correlation: np.ndarray              # NaN rows/cols for degenerate params
    degenerate: tuple[int, ...]          # zero-variance parameter indices


def posterior_stats(state: AbcState, g: int, kind: int, bins: int = 64,
                    kde_points: int = 256) -> PosteriorStats:
    """Histograms (fixed prior-box binning), KDE curves, and the Pearson
    correlation matrix of model ``kind``'s particles in population g."""
    from .bitrock import PARAM_NAMES

    pop = state.population(g)
    phi = pop.particles_of(kind)
    m = len(phi)
    if m < 2:
        raise InsufficientSamplesError(
            f"model {kind} has {m} particle(s) in population {g}; need >= 2")
    prior = state.priors[kind]
    p = phi.shape[1]
    # a constant column has exactly zero peak-to-peak spread (std can pick
    # up summation noise of order 1e-17)
    spread = phi.max(axis=0) - phi.min(axis=0)
    degenerate = tuple(int(j) for j in np.flatnonzero(spread == 0))

    edges, counts, kde_grids, kde_dens = [], [], [], []
    for j in range(p):
        c, e = np.histogram(phi[:, j], bins=bins,
                            range=(float(prior.lo[j]), float(prior.hi[j])))
        edges.append(e)
        counts.append(c)
        if j in degenerate:
            kde_grids.append(None)
            kde_dens.append(None)
        else:
            grid = np.linspace(float(prior.lo[j]), float(prior.hi[j]), kde_points)
            kde = scipy.stats.gaussian_kde(phi[:, j])
            kde_grids.append(grid)
            kde_dens.append(kde(grid))

    corr = np.full((p, p), np.nan)
    np.fill_diagonal(corr, 1.0)
    ok = [j for j in range(p) if j not in degenerate]
    if len(ok) >= 2:
        sub = np.corrcoef(phi[:, ok], rowvar=False)
        for a, ja in enumerate(ok):
            for b, jb in enumerate(ok):
                corr[ja, jb] = sub[a, b]
    return PosteriorStats(kind=kind, n_particles=m,
                          param_names=PARAM_NAMES[kind], bin_edges=edges,
                          bin_counts=counts, kde_grids=kde_grids,
                          kde_densities=kde_dens, correlation=corr,
                          degenerate=degenerate)


def predictive_envelope(state: AbcState, g: int, kind: int, speeds,
                        coverage: float = 0.98, r=1.0,
                        min_particles: int = 50
                        ) -> tuple[np.ndarray, np.ndarray]:
    """Pointwise (low, high) torque quantile band over one model's particles.

    The band spans the central ``coverage`` mass; coverage 0 collapses both
    bounds onto the pointwise median.
    """
    if not 0 <= coverage < 1:
        raise DomainError(f"coverage must lie in [0, 1), got {coverage}")
    pop = state.population(g)
    phi = pop.particles_of(kind)
    if len(phi) < min_particles:
        raise InsufficientSamplesError(
            f"model {kind} has {len(phi)} particles in population {g}; "
            f"need >= {min_particles} for an envelope")
    speeds = np.asarray(speeds, dtype=float)
    curves = torque_batch(kind, phi, r, speeds)
    q_lo = (1.0 - coverage) / 2.0
    low = np.quantile(curves, q_lo, axis=0)
    high = np.quantile(curves, 1.0 - q_lo, axis=0)
    return low, high


def save_state(state: AbcState, directory) -> Path:
    """Serialize to a CSV bundle plus a JSON manifest; returns the dir."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for g, pop in enumerate(state.populations, start=1):
        lines = ["model_tag," + ",".join(f"phi{j}" for j in range(MAX_PARAMS))
                 + ",distance"]
        for i in range(len(pop)):
            cells = [str(int(pop.kinds[i]))]
            cells += [repr(float(v)) if not math.isnan(v) else ""
                      for v in pop.phis[i]]
            cells.append(repr(float(pop.distances[i])))
            lines.append(",".join(cells))
        (directory / f"population_{g:02d}.csv").write_text(
            "\n".join(lines) + "\n", encoding="utf-8")
    manifest = {
        "n": state.n,
        "seed": state.seed,
        "eps_floor": state.eps_floor,
        "stopped_by": state.stopped_by,
        "tolerances": [repr(float(t)) for t in state.tolerances],
        "next_tolerance": repr(float(state.next_tolerance)),
        "model_prior": [repr(float(p)) for p in state.model_prior],
        "attempts": [pop.attempts for pop in state.populations],
        "priors": {
            str(k): {"delta": float(pr.delta),
                     "center": [repr(float(v)) for v in pr.center],
                     "lo": [repr(float(v)) for v in pr.lo],
                     "hi": [repr(float(v)) for v in pr.hi]}
            for k, pr in sorted(state.priors.items())
        },
    }
    (directory / "abc_state.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return directory


def load_state(directory) -> AbcState:
    """Rebuild an AbcState from a ``save_state`` bundle."""
    directory = Path(directory)
    manifest = json.loads((directory / "abc_state.json").read_text())
    priors = {}
    for k, pr in manifest["priors"].items():
        kind = int(k)
        center = np.array([float(v) for v in pr["center"]])
        priors[kind] = PriorSpec(kind=kind, delta=float(pr["delta"]),
                                 center=center,
                                 lo=np.array([float(v) for v in pr["lo"]]),
                                 hi=np.array([float(v) for v in pr["hi"]]))
    tolerances = [float(t) for t in manifest["tolerances"]]
    populations = []
    for g, (eps, attempts) in enumerate(zip(tolerances, manifest["attempts"]),
                                        start=1):
        text = (directory / f"population_{g:02d}.csv").read_text()
        rows = text.strip().split("\n")[1:]
        kinds = np.empty(len(rows), dtype=int)
        phis = np.full((len(rows), MAX_PARAMS), np.nan)
        dists = np.empty(len(rows))
        for i, row in enumerate(rows):
            cells = row.split(",")
            kinds[i] = int(cells[0])
            for j in range(MAX_PARAMS):
                if cells[1 + j]:
                    phis[i, j] = float(cells[1 + j])
            dists[i] = float(cells[-1])
        populations.append(Population(kinds=kinds, phis=phis, distances=dists,
                                      tolerance=eps, attempts=int(attempts)))
    return AbcState(populations=populations, tolerances=tolerances,
                    next_tolerance=float(manifest["next_tolerance"]),
                    stopped_by=manifest["stopped_by"], n=int(manifest["n"]),
                    seed=int(manifest["seed"]),
                    eps_floor=float(manifest["eps_floor"]),
                    model_prior=tuple(float(p) for p in manifest["model_prior"]),
                    priors=priors)
