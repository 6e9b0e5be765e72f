"""Exact construction and analysis of the schedule Markov chain.

For a fixed weight vector the per-slot access rule induces a Markov chain on
the independent sets of the conflict graph.  This module builds that chain
exactly, builds the reversible comparison chain sharing its support, and
machine-checks the stationary-distribution and mixing statements: product-form
stationarity of the comparison chain, arborescence-weight (matrix-tree)
stationarity, free-energy maximality of Gibbs laws, spectral norm of the
multiplicative reversibilization, conductance, and the derived inequality
suite tying them together.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import backends
from .errors import (
    ConductanceTooLarge,
    InvalidAdjointBase,
    InvalidWeight,
    InvariantViolation,
    NotContracting,
    NotIrreducible,
    NumericalFailure,
    StateSpaceTooLarge,
    TreeTooLarge,
)
from .graph import (
    InterferenceGraph,
    Schedule,
    enumerate_independent_masks,
    free_nodes,
    mask_nodes,
    max_weight_independent_set,
)

# Exact chain construction sums over up to 2^n coin patterns per row.
CHAIN_CAP = 10
# Conductance brute force scans 2^|states| subsets.
CONDUCTANCE_CAP = 20
# Arborescence-weight stationarity (fraction-exact determinants).
TREE_CAP = 12
# Exhaustive arborescence enumeration cross-check.
TREE_ENUM_CAP = 5

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class TransitionMatrix:
    """Row-stochastic matrix over the ordered independent sets of a graph."""

    states: tuple[int, ...]  # schedule bitmasks, ascending
    p: np.ndarray

    def __post_init__(self):
        m = len(self.states)
        if self.p.shape != (m, m):
            raise ValueError("matrix shape must match state count")
        if self.p.min() < 0:
            raise ValueError("negative transition probability")
        bad = np.abs(self.p.sum(axis=1) - 1.0).max()
        if bad > ROW_SUM_TOL:
            raise ValueError(f"rows must sum to 1 within {ROW_SUM_TOL}, off by {bad}")

    @property
    def size(self) -> int:
        return len(self.states)

    def index_of(self, mask: int) -> int:
        lo, hi = 0, len(self.states)
        while lo < hi:
            mid = (lo + hi) // 2
            if self.states[mid] < mask:
                lo = mid + 1
            else:
                hi = mid
        if lo == len(self.states) or self.states[lo] != mask:
            raise KeyError(f"state {mask:#x} not in chain")
        return lo


def _check_weights(g: InterferenceGraph, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (g.n,):
        raise ValueError(f"need {g.n} weights")
    if np.any(w < 1):
        raise InvalidWeight("weights must be >= 1")
    return w


def _chain_states(g: InterferenceGraph) -> tuple[int, ...]:
    if g.n > CHAIN_CAP:
        raise StateSpaceTooLarge(f"exact chain needs n <= {CHAIN_CAP}, got {g.n}")
    return tuple(int(m) for m in enumerate_independent_masks(g))


def _subsets(mask: int):
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


def build_protocol_chain(g: InterferenceGraph, w) -> TransitionMatrix:
    """Exact one-slot transition matrix of the access rule for fixed weights.

    Row construction follows the rule's independence structure: members of the
    current schedule stop independently with probability 1/(2 w_i); every free
    node attempts independently with probability 1/2 and joins iff no attempting
    free neighbor collides with it.  Blocked nodes contribute nothing.
    """
    w = _check_weights(g, w)
    states = _chain_states(g)
    idx = {s: k for k, s in enumerate(states)}
    nbr = g.neighbor_masks
    m = len(states)
    p = np.zeros((m, m))

    for k, sigma in enumerate(states):
        # stop/keep convolution over schedule members
        stay: dict[int, float] = {0: 1.0}
        for i in mask_nodes(sigma):
            stop = 1.0 / (2.0 * w[i])
            keep = 1.0 - stop
            nxt: dict[int, float] = {}
            for kept, pr in stay.items():
                nxt[kept] = nxt.get(kept, 0.0) + pr * stop
                kbit = kept | (1 << i)
                nxt[kbit] = nxt.get(kbit, 0.0) + pr * keep
            stay = nxt

        # success-set distribution of fair attempts over the free nodes
        free = free_nodes(g, Schedule(sigma))
        p_attempt = 2.0 ** -free.bit_count()
        joins: dict[int, float] = {}
        for a in _subsets(free):
            succ = 0
            rest = a
            while rest:
                low = rest & -rest
                i = low.bit_length() - 1
                if not (nbr[i] & a):
                    succ |= low
                rest ^= low
            joins[succ] = joins.get(succ, 0.0) + p_attempt

        for kept, p1 in stay.items():
            for succ, p2 in joins.items():
                p[k, idx[kept | succ]] += p1 * p2

    tm = TransitionMatrix(states, p)
    if np.diag(p).min() < 2.0 ** -g.n - 1e-15:
        raise NumericalFailure("protocol chain diagonal below 2^-n")
    return tm


def build_comparison_chain(g: InterferenceGraph, w) -> TransitionMatrix:
    """Reversible chain with the protocol chain's support.

    Off-diagonal mass 2^-n * prod(1/w_i, i leaving) for every allowed
    transition; the self-loop absorbs the remainder.  This satisfies detailed
    balance with the product-form law, so its stationary distribution is
    exactly ``closed_form_reversible_stationary``.
    """
    w = _check_weights(g, w)
    states = _chain_states(g)
    allowed = set(states)
    m = len(states)
    scale = 2.0 ** -g.n
    p = np.zeros((m, m))
    for k, s in enumerate(states):
        for l, t in enumerate(states):
            if l == k or (s | t) not in allowed:
                continue
            val = scale
            for i in mask_nodes(s & ~t):
                val /= w[i]
            p[k, l] = val
        p[k, k] = 1.0 - p[k].sum()
    return TransitionMatrix(states, p)


def _assert_irreducible(tm: TransitionMatrix) -> None:
    support = tm.p > 0
    for mat in (support, support.T):
        seen = np.zeros(tm.size, dtype=bool)
        stack = [0]
        seen[0] = True
        while stack:
            v = stack.pop()
            for u in np.nonzero(mat[v])[0]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(int(u))
        if not seen.all():
            raise NotIrreducible("transition support is not strongly connected")


def stationary(tm: TransitionMatrix) -> np.ndarray:
    """Unique stationary distribution via a dense linear solve.

    Residual ||pi P - pi||_inf is driven below 1e-12 (iterative refinement if
    the first solve falls short).
    """
    _assert_irreducible(tm)
    m = tm.size
    a = tm.p.T - np.eye(m)
    a[-1, :] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    pi = np.linalg.solve(a, b)
    for _ in range(3):
        if np.abs(pi @ tm.p - pi).max() <= 1e-12 and pi.min() >= 0:
            break
        pi += np.linalg.solve(a, b - a @ pi)
        pi = np.maximum(pi, 0.0)
        pi /= pi.sum()
    residual = np.abs(pi @ tm.p - pi).max()
    if residual > 1e-12 or pi.min() <= 0:
        raise NumericalFailure(f"stationary solve residual {residual}")
    return pi


def closed_form_reversible_stationary(g: InterferenceGraph, w) -> np.ndarray:
    """Product-form law: mass of a schedule proportional to prod(w_i in it)."""
    w = _check_weights(g, w)
    masks = enumerate_independent_masks(g)
    logw = np.log(w)
    logm = np.zeros(masks.size)
    for i in range(g.n):
        logm += logw[i] * ((masks >> i) & 1)
    logm -= logm.max()
    out = np.exp(logm)
    return out / out.sum()


def detailed_balance_residual(tm: TransitionMatrix, dist: Sequence[float]) -> float:
    """max |d_s p_st - d_t p_ts|; ~0 certifies reversibility wrt ``dist``."""
    d = np.asarray(dist, dtype=np.float64)
    if d.shape != (tm.size,):
        raise ValueError("distribution length must match state count")
    flow = d[:, None] * tm.p
    return float(np.abs(flow - flow.T).max())


@dataclass(frozen=True)
class TransitionDecomposition:
    """One nonzero transition split into leavers S1, joiners S2, and the
    residual probability factor after dividing out prod(1/w_i, i in S1)."""

    source: int
    target: int
    s1: int
    s2: int
    residual: float


def decompose_transition(
    tm: TransitionMatrix, g: InterferenceGraph, w
) -> list[TransitionDecomposition]:
    """Factor every nonzero entry of a protocol chain and range-check it.

    The residual P * prod(w_i, i in S1) must land in [4^-n, 1]: the stop
    factors contribute 2^-|S1| * prod(1/w), the keep factors and the fair
    attempt pattern contribute at least 2^-(n-|S1|) each in the worst split.
    """
    w = _check_weights(g, w)
    lo = 4.0 ** -g.n
    out = []
    for k, s in enumerate(tm.states):
        for l, t in enumerate(tm.states):
            pv = tm.p[k, l]
            if pv == 0.0:
                continue
            s1 = s & ~t
            s2 = t & ~s
            resid = pv
            for i in mask_nodes(s1):
                resid *= w[i]
            if not (lo - 1e-12 <= resid <= 1.0 + 1e-12):
                raise InvariantViolation(
                    "transition-residual-range",
                    f"residual {resid} outside [{lo}, 1] for {s:#x}->{t:#x}",
                )
            out.append(TransitionDecomposition(s, t, s1, s2, resid))
    return out


def adjoint(tm: TransitionMatrix, pi: Sequence[float]) -> TransitionMatrix:
    """Time reversal P*_st = pi_t P_ts / pi_s.

    Rows are renormalized by their computed sums (mathematically exactly 1 for
    stationary pi) so float residue in pi cannot break row-stochasticity.
    """
    pi = np.asarray(pi, dtype=np.float64)
    if pi.shape != (tm.size,):
        raise InvalidAdjointBase("distribution length must match state count")
    if pi.min() <= 0:
        raise InvalidAdjointBase("adjoint needs a strictly positive distribution")
    drift = np.abs(pi @ tm.p - pi).max()
    if drift > 1e-10:
        raise InvalidAdjointBase(f"distribution not stationary (drift {drift})")
    flow = tm.p.T * pi[None, :]
    return TransitionMatrix(tm.states, flow / flow.sum(axis=1, keepdims=True))


@dataclass(frozen=True)
class SpectrumReport:
    """Spectrum of R = P P* and the induced operator norm of P*."""

    reversibilization: TransitionMatrix
    eigenvalues: tuple[float, ...]  # ascending
    lambda2: float
    lambda_min: float
    operator_norm: float
    variational_norm: float


def spectrum_reversibilization(
    tm: TransitionMatrix, pi: Sequence[float]
) -> SpectrumReport:
    """Eigenvalues of R = P P* and ||P*|| = sqrt(max(|lambda2|, |lambda_min|)).

    R is reversible wrt pi, so conjugating by diag(sqrt(pi)) yields a symmetric
    matrix with a real spectrum in [-1, 1].  The variational definition of the
    norm (sup over pi-mean-zero vectors of the weighted ratio) is re-evaluated
    on the maximizing eigenvector plus random trial vectors and must agree with
    the spectral value within 1e-8.
    """
    pi = np.asarray(pi, dtype=np.float64)
    pstar = adjoint(tm, pi)
    r = tm.p @ pstar.p
    sqrtpi = np.sqrt(pi)
    sym = r * sqrtpi[:, None] / sqrtpi[None, :]
    asym = np.abs(sym - sym.T).max()
    if asym > 1e-10:
        raise NumericalFailure(f"reversibilization asymmetry {asym}")
    sym = 0.5 * (sym + sym.T)
    eigvals, eigvecs = np.linalg.eigh(sym)
    lambda2 = float(eigvals[-2])
    lambda_min = float(eigvals[0])
    # eigenvalues within solver roundoff of zero would otherwise inject
    # sqrt(eps)-sized noise into the norm
    top = max(abs(lambda2), abs(lambda_min))
    norm = math.sqrt(top) if top > 1e-13 else 0.0

    def ratio(v: np.ndarray) -> float:
        denom = math.sqrt(float(pi @ (v * v)))
        if denom == 0.0:
            return 0.0
        pv = pstar.p @ v
        return math.sqrt(float(pi @ (pv * pv))) / denom

    candidates = [eigvecs[:, -2] / sqrtpi]
    trials = np.random.default_rng(0x5EED5EED).standard_normal((64, tm.size))
    for v in trials:
        candidates.append(v - float(pi @ v))
    variational = max(ratio(v) for v in candidates)
    if abs(variational - norm) > 1e-8:
        raise NumericalFailure(
            f"variational norm {variational} vs spectral {norm}"
        )
    return SpectrumReport(
        reversibilization=TransitionMatrix(tm.states, r),
        eigenvalues=tuple(float(x) for x in eigvals),
        lambda2=lambda2,
        lambda_min=lambda_min,
        operator_norm=norm,
        variational_norm=variational,
    )


@dataclass(frozen=True)
class ConductanceResult:
    phi: float
    subset_indices: tuple[int, ...]
    subset_states: tuple[int, ...]


def conductance(tm: TransitionMatrix, pi: Sequence[float]) -> ConductanceResult:
    """Brute-force bottleneck ratio min_S Q(S, S^c) / min(pi(S), pi(S^c)).

    Scans all proper subsets of the state space (via the canonical
    representative containing state 0: cut balance under the stationary law
    gives phi(S) = phi(S^c)), so m <= 20.
    """
    pi = np.asarray(pi, dtype=np.float64)
    m = tm.size
    if m > CONDUCTANCE_CAP:
        raise ConductanceTooLarge(
            f"conductance brute force needs <= {CONDUCTANCE_CAP} states, got {m}"
        )
    if m < 2:
        raise ValueError("conductance needs at least two states")
    flow = pi[:, None] * tm.p
    phi, best = backends.kernels().conductance_scan(flow, pi)
    idxs = tuple(i for i in range(m) if (best >> i) & 1)
    return ConductanceResult(
        phi=float(phi),
        subset_indices=idxs,
        subset_states=tuple(tm.states[i] for i in idxs),
    )


# --- arborescence-weight stationarity -------------------------------------


def _fraction_det(rows: list[list[Fraction]]) -> Fraction:
    """Exact determinant by fraction-preserving Gaussian elimination."""
    a = [row[:] for row in rows]
    m = len(a)
    det = Fraction(1)
    for c in range(m):
        piv = next((r for r in range(c, m) if a[r][c] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        inv = Fraction(1) / a[c][c]
        for r in range(c + 1, m):
            if a[r][c] == 0:
                continue
            factor = a[r][c] * inv
            for cc in range(c, m):
                a[r][cc] -= factor * a[c][cc]
    return det


def _tree_masses_determinant(p: list[list[Fraction]]) -> list[Fraction]:
    # Laplacian from off-diagonal mass only: self-loops are absent from every
    # spanning tree, and float rows need not sum to exactly 1 as fractions.
    m = len(p)
    lap = [
        [
            (sum(p[i][k] for k in range(m) if k != i) if i == j else -p[i][j])
            for j in range(m)
        ]
        for i in range(m)
    ]
    masses = []
    for r in range(m):
        minor = [
            [lap[i][j] for j in range(m) if j != r] for i in range(m) if i != r
        ]
        masses.append(_fraction_det(minor))
    return masses


def _tree_masses_enumeration(p: list[list[Fraction]]) -> list[Fraction]:
    m = len(p)
    masses = []
    for root in range(m):
        others = [v for v in range(m) if v != root]
        choices = [
            [u for u in range(m) if u != v and p[v][u] != 0] for v in others
        ]
        total = Fraction(0)
        for combo in itertools.product(*choices):
            parent = dict(zip(others, combo))
            ok = True
            for v in others:
                seen = set()
                x = v
                while x != root:
                    if x in seen:
                        ok = False
                        break
                    seen.add(x)
                    x = parent[x]
                if not ok:
                    break
            if not ok:
                continue
            weight = Fraction(1)
            for v in others:
                weight *= p[v][parent[v]]
            total += weight
        masses.append(total)
    return masses


def tree_stationary(tm: TransitionMatrix, method: str = "auto") -> np.ndarray:
    """Stationary distribution via arborescence weights.

    Mass at a state is proportional to the total weight of directed spanning
    trees rooted there (edges oriented toward the root, weight = product of
    transition probabilities).  Computed exactly in rational arithmetic as the
    determinant of the Laplacian minor; for <= TREE_ENUM_CAP states the
    determinant is cross-checked against explicit arborescence enumeration,
    which must agree exactly.
    """
    if method not in ("auto", "determinant", "enumeration"):
        raise ValueError(f"unknown method {method!r}")
    m = tm.size
    if m > TREE_CAP:
        raise TreeTooLarge(f"tree stationarity needs <= {TREE_CAP} states, got {m}")
    if method == "enumeration" and m > TREE_ENUM_CAP:
        raise TreeTooLarge(
            f"enumeration cross-check needs <= {TREE_ENUM_CAP} states, got {m}"
        )
    p = [[Fraction(float(x)) for x in row] for row in tm.p]
    if method == "enumeration":
        masses = _tree_masses_enumeration(p)
    else:
        masses = _tree_masses_determinant(p)
        if method == "auto" and m <= TREE_ENUM_CAP:
            if masses != _tree_masses_enumeration(p):
                raise InvariantViolation(
                    "tree-theorem-mismatch",
                    "determinant and enumeration arborescence weights differ",
                )
    total = sum(masses)
    if total <= 0:
        raise NotIrreducible("no rooted spanning trees: chain not irreducible")
    return np.array([float(x / total) for x in masses])


# --- free energy / Gibbs variational principle -----------------------------


@dataclass(frozen=True)
class FreeEnergyProblem:
    """A finite base set with a score per element."""

    labels: tuple
    t: np.ndarray

    @classmethod
    def from_values(cls, values: Sequence[float]) -> "FreeEnergyProblem":
        t = np.asarray(values, dtype=np.float64)
        return cls(labels=tuple(range(t.size)), t=t)

    @classmethod
    def from_weights(cls, g: InterferenceGraph, w) -> "FreeEnergyProblem":
        """Score of a schedule = sum of log-weights of its members."""
        w = _check_weights(g, w)
        masks = enumerate_independent_masks(g)
        logw = np.log(w)
        t = np.zeros(masks.size)
        for i in range(g.n):
            t += logw[i] * ((masks >> i) & 1)
        return cls(labels=tuple(int(x) for x in masks), t=t)


@dataclass(frozen=True)
class GibbsReport:
    nu: np.ndarray
    free_energy: float
    mean_score: float
    mean_score_floor: float
    perturbations_checked: int


def _entropy(mu: np.ndarray) -> float:
    nz = mu[mu > 0]
    return float(-(nz * np.log(nz)).sum())


def gibbs_check(
    problem: FreeEnergyProblem, n_perturbations: int = 100, seed: int = 0xF00D
) -> GibbsReport:
    """Verify the Gibbs law maximizes score-plus-entropy free energy.

    nu proportional to exp(score) attains F(nu) = logsumexp(score); the report
    asserts the mean-score floor max(score) - log|set| and that F(nu) beats F
    of random perturbation distributions.
    """
    t = np.asarray(problem.t, dtype=np.float64)
    if t.size < 1:
        raise ValueError("need a non-empty base set")
    shifted = t - t.max()
    expv = np.exp(shifted)
    nu = expv / expv.sum()
    f_nu = float(np.log(expv.sum()) + t.max())
    mean_score = float(nu @ t)
    floor = float(t.max() - math.log(t.size))
    if mean_score < floor - 1e-12:
        raise InvariantViolation(
            "gibbs-mean-bound", f"E[score] {mean_score} < floor {floor}"
        )
    gen = np.random.default_rng(seed)
    for k in range(n_perturbations):
        if k % 2 == 0:
            mu = gen.dirichlet(np.ones(t.size))
        else:
            tilt = nu * np.exp(0.5 * gen.standard_normal(t.size))
            mu = tilt / tilt.sum()
        f_mu = float(mu @ t) + _entropy(mu)
        if f_nu < f_mu - 1e-12:
            raise InvariantViolation(
                "gibbs-maximality", f"F(nu) {f_nu} < F(mu) {f_mu}"
            )
    return GibbsReport(
        nu=nu,
        free_energy=f_nu,
        mean_score=mean_score,
        mean_score_floor=floor,
        perturbations_checked=n_perturbations,
    )


def mixing_time_estimate(norm: float, pi_min: float, eps: float) -> int:
    """Smallest t with norm^t / sqrt(pi_min) <= eps (chi^2-to-TV bound)."""
    if not 0 <= norm:
        raise ValueError("norm must be >= 0")
    if norm >= 1:
        raise NotContracting(f"operator norm {norm} >= 1")
    if not 0 < pi_min <= 1:
        raise ValueError("pi_min must be in (0, 1]")
    if not 0 < eps < 1:
        raise ValueError("eps must be in (0, 1)")
    if norm == 0.0:
        return 1
    target = eps * math.sqrt(pi_min)
    t = max(1, math.ceil(math.log(target) / math.log(norm)))
    while norm**t > target:
        t += 1
    while t > 1 and norm ** (t - 1) <= target:
        t -= 1
    return t


# --- inequality suite ------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    lhs: float
    rhs: float
    relation: str  # "<=" or ">="
    passed: bool | None  # None = skipped
    note: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "relation": self.relation,
            "pass": self.passed,
            "note": self.note,
        }


@dataclass(frozen=True)
class LemmaReport:
    n: int
    w_max: float
    items: tuple[LemmaCheck, ...]

    @property
    def all_pass(self) -> bool:
        return all(item.passed for item in self.items if item.passed is not None)

    def failed_names(self) -> list[str]:
        return [i.name for i in self.items if i.passed is False]

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "w_max": self.w_max,
            "items": [i.as_dict() for i in self.items],
            "all_pass": self.all_pass,
        }


def state_log_weights(states: Sequence[int], logw: np.ndarray) -> np.ndarray:
    """sum(logw[i] for i in state) per state mask."""
    masks = np.asarray(states, dtype=np.int64)
    out = np.zeros(masks.size)
    for i in range(logw.size):
        out += logw[i] * ((masks >> i) & 1)
    return out


def lemma1_gap_budget(n: int) -> float:
    """Allowed gap between the best schedule weight and the stationary mean.

    The chain's per-transition ratio against the comparison chain lives in
    [4^-n, 4^n]; pushed through arborescence weights (at most 2^n edges each)
    and the free-energy floor log|I(G)| <= n log 2 this budgets
    n log2 + 8 n 2^n log2, intentionally slack.
    """
    return n * math.log(2.0) + 8.0 * n * (2.0**n) * math.log(2.0)


def verify_lemma_bounds(
    g: InterferenceGraph,
    w,
    conductance_cap: int = CONDUCTANCE_CAP,
    strict: bool = False,
) -> LemmaReport:
    """Run the full inequality suite for one (graph, weights) instance.

    Items (lhs relation rhs):
      weight-concentration-gap: maxlogw - E_pi[logw] <= budget(n)
      stationary-ratio-bound:   max|ln pi - ln pihat| <= n 2^n ln4
      stationary-minimum:       ln min pi >= -(n 2^n ln4 + n ln2 + n ln wmax)
      cheeger:                  lambda2(R) <= 1 - phi^2 / 2   (skipped when the
                                state space exceeds ``conductance_cap``)
      reversibilization-floor:  lambda_min(R) >= 2^(1-2n) - 1
      operator-norm-bound:      ||P*|| <= 1 - 1/(2^(4n(2^n+2)+2) wmax^(4n));
                                when the bound is within 1e-14 of 1 it is
                                evaluated in extended precision and the pass
                                condition reduces to ||P*|| < 1.

    With ``strict`` a failing item raises InvariantViolation naming it.
    """
    w = _check_weights(g, w)
    n = g.n
    wmax = float(w.max())
    logw = np.log(w)

    tm = build_protocol_chain(g, w)
    pi = stationary(tm)
    pihat = closed_form_reversible_stationary(g, w)
    spectrum = spectrum_reversibilization(tm, pi)
    swl = state_log_weights(tm.states, logw)

    items: list[LemmaCheck] = []

    _, best = max_weight_independent_set(g, logw)
    gap = best - float(pi @ swl)
    budget = lemma1_gap_budget(n)
    items.append(
        LemmaCheck("weight-concentration-gap", gap, budget, "<=", gap <= budget)
    )

    log_ratio = float(np.abs(np.log(pi) - np.log(pihat)).max())
    ratio_budget = n * (2.0**n) * math.log(4.0)
    items.append(
        LemmaCheck(
            "stationary-ratio-bound",
            log_ratio,
            ratio_budget,
            "<=",
            log_ratio <= ratio_budget,
        )
    )

    log_min_pi = float(np.log(pi.min()))
    min_floor = -(
        n * (2.0**n) * math.log(4.0) + n * math.log(2.0) + n * math.log(wmax)
    )
    items.append(
        LemmaCheck(
            "stationary-minimum",
            log_min_pi,
            min_floor,
            ">=",
            log_min_pi >= min_floor,
        )
    )

    if tm.size <= conductance_cap:
        cond = conductance(spectrum.reversibilization, pi)
        cheeger_rhs = 1.0 - cond.phi**2 / 2.0
        items.append(
            LemmaCheck(
                "cheeger",
                spectrum.lambda2,
                cheeger_rhs,
                "<=",
                spectrum.lambda2 <= cheeger_rhs + 1e-12,
                note=f"phi={cond.phi}",
            )
        )
    else:
        items.append(
            LemmaCheck(
                "cheeger",
                spectrum.lambda2,
                math.nan,
                "<=",
                None,
                note=f"skipped: {tm.size} states exceed conductance cap",
            )
        )

    floor = 2.0 ** (1 - 2 * n) - 1.0
    items.append(
        LemmaCheck(
            "reversibilization-floor",
            spectrum.lambda_min,
            floor,
            ">=",
            spectrum.lambda_min >= floor - 1e-12,
        )
    )

    # 1 - rhs underflows double precision for all but the smallest n.
    log2_gap = -(4 * n * (2**n + 2) + 2) - 4 * n * math.log2(wmax)
    gap_val = 2.0**log2_gap
    if gap_val >= 1e-14:
        rhs = 1.0 - gap_val
        items.append(
            LemmaCheck(
                "operator-norm-bound",
                spectrum.operator_norm,
                rhs,
                "<=",
                spectrum.operator_norm <= rhs,
            )
        )
    else:
        import mpmath as mp

        with mp.workprec(int(-log2_gap) + 64):
            one_minus_rhs = mp.mpf(2.0) ** mp.mpf(log2_gap)
            gap_str = mp.nstr(one_minus_rhs, 8)
        items.append(
            LemmaCheck(
                "operator-norm-bound",
                spectrum.operator_norm,
                1.0,
                "<=",
                spectrum.operator_norm < 1.0,
                note=(
                    f"rhs within 1e-14 of 1; extended-precision rhs = 1 - {gap_str}"
                    f" = 1 - 2^{log2_gap:.6g}; asserting strict norm < 1"
                ),
            )
        )

    report = LemmaReport(n=n, w_max=wmax, items=tuple(items))
    if strict and not report.all_pass:
        raise InvariantViolation(report.failed_names()[0], report=report)
    return report
