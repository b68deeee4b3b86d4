"""Truncated and random information functions, and the random-past pressure
and entropy estimators built from them.

The truncated information of a pattern x given a site set D is
f_r(x, D) = -log mu(x at center | x on D within B_r); averaging over random
pasts and adding the potential read at the center gives, for a fixed point
pattern of a safe symbol or for patterns sampled from mu itself, a Monte
Carlo estimator of the pressure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import groups
from .constraints import ConstraintStructure, Potential, detect_safe_symbol
from .errors import BallMismatchError, NoSafeSymbolError
from .groups import GroupSpec
from .pasts import lex_past_mask, sample_percolation_masks


@dataclass
class InfoEstimate:
    value: float
    stderr: float
    r: int
    n_samples: int
    oracle: str
    parts: dict = field(default_factory=dict)


def _truncate_mask(spec: GroupSpec, mask: np.ndarray, r: int) -> np.ndarray:
    L_r = len(groups.ball(spec, r).elements)
    out = np.array(mask, dtype=bool)
    out[L_r:] = False
    return out


def info_fn_truncated(oracle, spec: GroupSpec, values, mask, r: int) -> float:
    """f_r(x, D) = -log of the oracle conditional of the center symbol given
    the D-sites of x inside B_r."""
    values = np.asarray(values)
    m = _truncate_mask(spec, np.asarray(mask), r)
    p = oracle.conditional(values, m)
    return -math.log(p)


def _batch_info(oracle, values_rows: np.ndarray, masks: np.ndarray, chunk: int = 200_000):
    out = np.empty(len(values_rows))
    for lo in range(0, len(values_rows), chunk):
        hi = min(lo + chunk, len(values_rows))
        out[lo:hi] = oracle.batch(values_rows[lo:hi], masks[lo:hi])
    return -np.log(out)


def random_info(
    oracle,
    spec: GroupSpec,
    values,
    r: int,
    N: int,
    seed: int,
    past: str = "percolation",
) -> InfoEstimate:
    """Monte Carlo mean of f_r(x, P ∩ B_r) over random pasts P.

    The percolation past draws i.i.d. uniforms on B_r; the lexicographic past
    (Z^d only) is deterministic, so a single evaluation suffices.
    """
    values = np.asarray(values, dtype=np.int64)
    L_r = len(groups.ball(spec, r).elements)
    vals = values[:L_r]
    if past == "lex":
        mask = lex_past_mask(spec, r)
        f = info_fn_truncated(oracle, spec, vals, mask, r)
        return InfoEstimate(f, 0.0, r, 1, oracle.name)
    if past != "percolation":
        raise ValueError(f"unknown past {past!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, r, 0x1FF0]))
    masks = sample_percolation_masks(spec, r, N, rng)
    rows = np.broadcast_to(vals, (N, L_r))
    f = _batch_info(oracle, rows, masks)
    return InfoEstimate(
        float(f.mean()), float(f.std(ddof=1) / math.sqrt(N)) if N > 1 else 0.0, r, N, oracle.name
    )


def potential_at_center(potential: Potential, spec: GroupSpec, values) -> float:
    """phi read at the identity of a ball pattern: h(x_0) + sum_s J_s(x_0, x_s)."""
    b1 = groups.ball(spec, 1)
    center = int(values[0])
    out = float(potential.h[center])
    for s in range(spec.n_generators):
        idx = b1.index[groups.generator(spec, s)]
        out += float(potential.J[s, center, int(values[idx])])
    return out


def kp_pressure_at_fixed_point(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    oracle,
    r: int,
    N: int,
    seed: int,
    past: str = "percolation",
) -> InfoEstimate:
    """Pressure estimate I(x_safe) + phi(x_safe) at the all-safe fixed point."""
    safe = detect_safe_symbol(structure)
    if safe is None:
        raise NoSafeSymbolError("fixed-point pressure formula needs a safe symbol")
    L = len(groups.ball(spec, r).elements)
    values = np.full(L, safe, dtype=np.int64)
    est = random_info(oracle, spec, values, r, N, seed, past=past)
    phi0 = potential_at_center(potential, spec, values)
    return InfoEstimate(
        est.value + phi0,
        est.stderr,
        r,
        est.n_samples,
        oracle.name,
        parts={"info": est.value, "phi": phi0},
    )


def kp_pressure_at_measure(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    oracle,
    r: int,
    N_inner: int,
    M_outer: int,
    seed: int,
    nu: str = "mu",
    pattern_sampler=None,
) -> InfoEstimate:
    """Pressure as an integral against nu: outer Monte Carlo over patterns of
    (random information + potential at the center).

    nu = "fixed0" degenerates to the fixed-point estimator; nu = "mu" samples
    the infinite-volume measure exactly on rank-1 groups (transfer chain) or
    through a caller-supplied pattern sampler elsewhere.  The info part alone
    estimates the entropy of mu when nu = mu.
    """
    if nu == "fixed0":
        return kp_pressure_at_fixed_point(
            structure, potential, spec, oracle, r, N=N_inner * M_outer, seed=seed
        )
    if nu != "mu":
        raise ValueError(f"unknown nu {nu!r}")
    rng = np.random.default_rng(np.random.SeedSequence([seed, r, 0x0AEA]))
    if pattern_sampler is not None:
        patterns = np.asarray(pattern_sampler(M_outer, rng), dtype=np.int64)
    elif spec.rank == 1:
        from .transfer import build_transfer

        tm = build_transfer(structure, potential)
        windows = tm.sample_windows(r, M_outer, rng).astype(np.int64)
        b = groups.ball(spec, r)
        cols = [g[0] + r if spec.kind == "zd" else _free1_offset(g) + r for g in b.elements]
        patterns = windows[:, cols]
    else:
        raise ValueError("nu='mu' needs rank 1 or an explicit pattern_sampler")
    L = patterns.shape[1]
    masks = sample_percolation_masks(spec, r, M_outer * N_inner, rng)[:, :L]
    rows = np.repeat(patterns, N_inner, axis=0)
    f = _batch_info(oracle, rows, masks).reshape(M_outer, N_inner)
    info_means = f.mean(axis=1)
    phis = np.array([potential_at_center(potential, spec, p) for p in patterns])
    totals = info_means + phis
    value = float(totals.mean())
    stderr = float(totals.std(ddof=1) / math.sqrt(M_outer))
    return InfoEstimate(
        value,
        stderr,
        r,
        M_outer * N_inner,
        oracle.name,
        parts={
            "info": float(info_means.mean()),
            "info_stderr": float(info_means.std(ddof=1) / math.sqrt(M_outer)),
            "phi": float(phis.mean()),
        },
    )


def _free1_offset(g) -> int:
    if not g:
        return 0
    return len(g) if g[0] > 0 else -len(g)


def percolative_entropy(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    oracle,
    r: int,
    N_inner: int,
    M_outer: int,
    seed: int,
) -> InfoEstimate:
    """Entropy of mu as the mu-average of the random information function."""
    est = kp_pressure_at_measure(
        structure, potential, spec, oracle, r, N_inner, M_outer, seed, nu="mu"
    )
    return InfoEstimate(
        est.parts["info"], est.parts["info_stderr"], r, est.n_samples, est.oracle, parts=est.parts
    )


def default_truncation_radius(
    structure: ConstraintStructure,
    potential: Potential,
    spec: GroupSpec,
    target_accuracy: float,
    r_max: int = 20,
) -> int:
    """Smallest r with beta(r)/c below a sixth of the target accuracy, so the
    truncation and Monte Carlo error budgets split evenly."""
    from .gibbs import ssm_profile, uniform_bound_c

    c_hat = uniform_bound_c(structure, potential, spec, min(2, r_max)).c_hat
    prof = ssm_profile(structure, potential, spec, r_max)
    for r in range(1, r_max + 1):
        if prof[r - 1] / c_hat < target_accuracy / 6.0:
            return r
    return r_max


def truncation_gap(oracle, spec: GroupSpec, values, mask, r: int, r_prime: int) -> float:
    """|f_r - f_{r'}| for the same pattern and site set."""
    if r > r_prime:
        raise ValueError("need r <= r'")
    f1 = info_fn_truncated(oracle, spec, values, mask, r)
    f2 = info_fn_truncated(oracle, spec, values, mask, r_prime)
    return abs(f1 - f2)


def locality_experiment(
    structure: ConstraintStructure,
    potential: Potential,
    spec_a: GroupSpec,
    spec_b: GroupSpec,
    r: int,
    N: int,
    seed: int,
    oracle_a=None,
    oracle_b=None,
    profile_radius: int | None = None,
) -> dict:
    """Fixed-point pressure on two groups sharing a ball, with the mixing bound.

    Requires the rooted labeled (r+1)-balls to be isomorphic; reports both
    estimates and the bound beta_a(r)/c_a + beta_b(r)/c_b computed from the
    mixing profiles and uniform conditional bounds of the two models.
    """
    from .gibbs import ssm_profile, uniform_bound_c
    from .marginals import make_oracle

    if not groups.balls_isomorphic(spec_a, spec_b, r + 1):
        raise BallMismatchError("the two groups do not share the (r+1)-ball")

    results = {}
    bound = 0.0
    for tag, spec, oracle in (("a", spec_a, oracle_a), ("b", spec_b, oracle_b)):
        if oracle is None:
            kind = "transfer" if spec.rank == 1 else "ball"
            oracle = make_oracle(kind, structure, potential, spec, r)
        est = kp_pressure_at_fixed_point(structure, potential, spec, oracle, r, N, seed)
        prof_r = min(r, profile_radius) if profile_radius is not None else (r if spec.rank == 1 else 1)
        beta = ssm_profile(structure, potential, spec, prof_r)[-1]
        c = uniform_bound_c(structure, potential, spec, min(r, 2)).c_hat
        bound += beta / c
        results[tag] = est
    return {
        "p_a": results["a"],
        "p_b": results["b"],
        "difference": abs(results["a"].value - results["b"].value),
        "bound": bound,
        "joint_stderr": math.hypot(results["a"].stderr, results["b"].stderr),
    }
