"""Closed-form coverage theory for sub-sampling on core-periphery graphs.

For a two-block model with k core nodes, the expected number of core
nodes captured by a size-q*n sub-sample is q*k*xi for a scheme-specific
size-bias factor xi. These evaluators give xi at finite n, its large-n
limit, the implied expected uncovered-core fraction, the random-walk
coverage recurrence, and a Monte Carlo oracle that validates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .generators import SbmSpec, generate_sbm
from .rngs import derive_rng
from .sampling import sample

_CLOSED_FORM_SCHEMES = ("rn", "dn", "re", "rnn")


@dataclass(frozen=True)
class CpSbmParams:
    """Parameters of a core-periphery block model plus a sampling fraction.

    ``p11``/``p12``/``p22`` are the core-core, core-periphery, and
    periphery-periphery edge probabilities; ``q`` is the sub-sample
    fraction. ``alpha_n`` is the core fraction k/n.
    """

    n: int
    k: int
    p11: float
    p12: float
    p22: float
    q: float

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two nodes")
        if not 1 <= self.k < self.n:
            raise ValueError("core size must satisfy 1 <= k < n")
        if not self.p11 >= self.p12 >= self.p22 > 0.0:
            raise ValueError("edge probabilities must satisfy p11 >= p12 >= p22 > 0")
        if self.p11 > 1.0:
            raise ValueError("edge probabilities must lie in (0, 1]")
        if not 0.0 < self.q <= 1.0:
            raise ValueError("q must lie in (0, 1]")

    @property
    def alpha_n(self) -> float:
        return self.k / self.n

    @property
    def walk_length(self) -> int:
        """Step budget matching the sub-sample size: round(q*n), at least 1."""
        return max(1, int(np.floor(self.q * self.n + 0.5)))


def _check_scheme(scheme: str) -> str:
    scheme = scheme.lower()
    if scheme in ("bfs", "dfs"):
        raise ValueError(f"no closed-form size-bias factor for scheme '{scheme}'")
    return scheme


def xi(scheme: str, p: CpSbmParams) -> float:
    """Size-bias factor of a sampling scheme at finite n.

    The expected number of core nodes in a sub-sample of q*n nodes is
    q*k*xi. Uniform node sampling is unbiased (xi = 1); degree-weighted
    node sampling and edge sampling share one closed form; neighborhood
    sampling has its own.

    Raises:
        ValueError: for schemes without a closed form (bfs, dfs, rw).
    """
    scheme = _check_scheme(scheme)
    n, k = p.n, p.k
    p11, p12, p22 = p.p11, p.p12, p.p22
    if scheme == "rn":
        return 1.0
    if scheme in ("dn", "re"):
        num = n * ((k - 1) * p11 + (n - k) * p12)
        den = (k * (k - 1) * p11 + 2 * k * (n - k) * p12
               + (n - k) * (n - k - 1) * p22)
        return num / den
    if scheme == "rnn":
        num = 1.0 + (k - 1) * p11 + (n - k) * p12
        den = (1.0 + (k / n) * ((k - 1) * p11 + (n - k) * p12)
               + ((n - k) / n) * (k * p12 + (n - k - 1) * p22))
        return num / den
    raise ValueError(f"no closed-form size-bias factor for scheme '{scheme}'")


def xi_limit(scheme: str, p: CpSbmParams) -> float:
    """Large-n limit of the size-bias factor (core fraction k/n -> 0).

    Raises:
        ValueError: for schemes without a closed form (bfs, dfs, rw).
    """
    scheme = _check_scheme(scheme)
    if scheme == "rn":
        return 1.0
    if scheme in ("dn", "re"):
        return p.p12 / p.p22
    if scheme == "rnn":
        return p.p12 / (p.alpha_n * p.p12 + p.p22)
    raise ValueError(f"no closed-form size-bias factor for scheme '{scheme}'")


def expected_uncovered_core_fraction(scheme: str, p: CpSbmParams) -> float:
    """Expected fraction of all nodes that are core and left unsampled.

    For schemes with a closed-form factor this is (1 - q*xi) * k/n; for
    the random walk it is k/n minus the recurrence's expected coverage
    over round(q*n) steps. Clamped below at 0, since a raw negative
    value only signals that the expected coverage exceeds the core size.

    Raises:
        ValueError: for bfs/dfs.
    """
    scheme = _check_scheme(scheme)
    if scheme == "rw":
        e_l = rw_expected_core_nodes(p, p.walk_length)
        return max(0.0, p.k / p.n - e_l / p.n)
    if scheme == "rn":
        # xi is exactly 1; this association makes the value equal the
        # plain expression (1-q)*k/n bit for bit
        return max(0.0, (1.0 - p.q) * p.k / p.n)
    return max(0.0, (1.0 - p.q * xi(scheme, p)) * (p.k / p.n))


def _rw_coefficients(p: CpSbmParams) -> Tuple[float, float, float, float]:
    n, k = p.n, p.k
    a_den = (k - 1) * p.p11 + (n - k) * p.p12
    g_den = k * p.p12 + (n - k - 1) * p.p22
    if a_den <= 0.0 or g_den <= 0.0:
        raise ValueError("degenerate expected degrees; recurrence undefined")
    alpha = (k - 1) * p.p11 / a_den
    gamma = k * p.p12 / g_den
    return alpha, 1.0 - alpha, gamma, 1.0 - gamma


def rw_expected_core_nodes(p: CpSbmParams, l: int) -> float:
    """Expected distinct core nodes met by an l-step random walk.

    Iterates the coupled recurrence x_l = a*x_{l-1} + b*y_{l-1} + a,
    y_l = g*x_{l-1} + d*y_{l-1} + g from x_1 = 1, y_1 = 0, where x/y
    condition on a core/periphery start, a is the probability that a
    step from a core node stays in the core, and g the probability that
    a step from a periphery node enters the core. Returns
    E_l = (k/n)(1 + x_{l-1}) + ((n-k)/n) y_{l-1}.

    Raises:
        ValueError: if l < 1.
    """
    if l < 1:
        raise ValueError("walk length must be at least 1")
    n, k = p.n, p.k
    if l == 1:
        return k / n
    alpha, beta, gamma, delta = _rw_coefficients(p)
    x, y = 1.0, 0.0
    for _ in range(l - 2):
        x, y = alpha * x + beta * y + alpha, gamma * x + delta * y + gamma
    return (k / n) * (1.0 + x) + ((n - k) / n) * y


def rw_expected_core_nodes_matrix(p: CpSbmParams, l: int) -> float:
    """Matrix-power form of the walk recurrence (cross-check).

    With v_l = (x_l, y_l)^T, A the 2x2 transition matrix and c its
    inhomogeneous part, the recurrence v_l = A v_{l-1} + c unrolls to
    v_l = A^(l-1) v_1 + sum_{i=0}^{l-2} A^i c. (A has eigenvalue 1, so
    the geometric sum is accumulated term by term rather than inverted.)

    Raises:
        ValueError: if l < 1.
    """
    if l < 1:
        raise ValueError("walk length must be at least 1")
    n, k = p.n, p.k
    if l == 1:
        return k / n
    alpha, beta, gamma, delta = _rw_coefficients(p)
    a = np.array([[alpha, beta], [gamma, delta]], dtype=np.float64)
    c = np.array([alpha, gamma], dtype=np.float64)
    v1 = np.array([1.0, 0.0], dtype=np.float64)
    steps = l - 1  # recurrence applications to reach v_l from v_1
    power = np.eye(2)
    geom = np.zeros((2, 2))
    for _ in range(steps - 1):  # sum_{i=0}^{l-3} A^i feeds v_{l-1}
        geom += power
        power = power @ a
    v_prev = power @ v1 + geom @ c  # v_{l-1}
    x, y = float(v_prev[0]), float(v_prev[1])
    return (k / n) * (1.0 + x) + ((n - k) / n) * y


def mc_expected_core_sampled(spec: SbmSpec, scheme: str, q: float, reps: int,
                             seed: int) -> Tuple[float, float]:
    """Monte Carlo mean and standard error of core nodes per sub-sample.

    Each rep generates a fresh two-block graph from ``spec`` (block 0
    is the core) and draws one sub-sample of round(q*n) nodes, counting
    how many block-0 nodes it contains.

    Raises:
        ValueError: for reps < 1, q outside (0, 1], or a spec without
            exactly two blocks.
    """
    if reps < 1:
        raise ValueError("need at least one repetition")
    if not 0.0 < q <= 1.0:
        raise ValueError("q must lie in (0, 1]")
    if len(spec.block_sizes) != 2:
        raise ValueError("core-periphery oracle needs a two-block spec")
    k = spec.block_sizes[0]
    n = spec.n
    target = max(1, min(n, int(np.floor(q * n + 0.5))))
    counts = np.empty(reps, dtype=np.float64)
    for r in range(reps):
        g, _ = generate_sbm(spec, derive_rng(seed, r, 0))
        sub = sample(g, scheme, target, (seed, r, 1))
        counts[r] = np.count_nonzero(sub.parent_ids < k)
    mean = float(counts.mean())
    se = float(counts.std(ddof=1) / np.sqrt(reps)) if reps > 1 else 0.0
    return mean, se
