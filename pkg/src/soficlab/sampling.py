"""Single-site heat-bath (Glauber) dynamics over a sofic map's labeled graph."""

from __future__ import annotations

import numpy as np

from .constraints import ConstraintStructure, Potential
from .kernels import glauber_sweeps
from .soficmaps import SoficMap


class GlauberEngine:
    """Sequential-sweep heat-bath sampler for the derived Gibbs weights.

    The single-site conditional at v multiplies exp(h), outgoing and incoming
    edge weights, and zeroes candidates that violate an incident non-self
    edge.  An optional per-symbol bias (used by thermodynamic integration)
    adds to h.
    """

    def __init__(
        self,
        sm: SoficMap,
        structure: ConstraintStructure,
        potential: Potential,
        bias: np.ndarray | None = None,
    ):
        if structure.n_generators != sm.n_generators:
            raise ValueError("structure and sofic map disagree on generator count")
        self.sm = sm
        self.structure = structure
        self.potential = potential
        self.nbr_out = np.ascontiguousarray(sm.perms, dtype=np.int64)
        self.nbr_in = np.ascontiguousarray(sm.perms_inv, dtype=np.int64)
        self.allowed = np.ascontiguousarray(structure.allowed, dtype=np.uint8)
        self.wj = np.ascontiguousarray(np.exp(potential.J))
        self.set_bias(bias)

    def set_bias(self, bias: np.ndarray | None):
        h = self.potential.h if bias is None else self.potential.h + bias
        self.wh = np.ascontiguousarray(np.exp(h))

    def initial_state(self, symbol: int = 0) -> np.ndarray:
        return np.full(self.sm.n, symbol, dtype=np.int8)

    def sweeps(self, x: np.ndarray, k: int, rng) -> np.ndarray:
        """Run k full sweeps in place; one uniform per site update."""
        if k <= 0:
            return x
        u = rng.random(k * self.sm.n)
        glauber_sweeps(x, self.nbr_out, self.nbr_in, self.wh, self.wj, self.allowed, u, k)
        return x
