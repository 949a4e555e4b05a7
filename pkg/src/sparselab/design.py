"""Coalition-incidence design matrices with near-duplicate column groups.

A design holds ``k`` true columns (prototypes) with a prescribed Gram matrix,
``group_size`` near-duplicates per prototype at inner product ``rho_in``, and
random filler columns kept within ``rho_out_max`` of every structured column.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .errors import InfeasibleParams, RejectionBudgetExhausted

COHERENCE_TOL = 1e-8
NORM_TOL = 1e-10
MAX_REJECTIONS = 1000


@dataclass(frozen=True)
class DesignParams:
    """Knobs for :func:`build_design`.

    ``support_gram_offdiag`` is the common inner product among true columns.
    ``shuffle_columns`` scatters structured columns over random positions so
    that index order carries no information about the support.
    """

    m: int
    p: int
    k: int
    group_size: int = 1
    rho_in: float = 0.95
    rho_out_max: float = 0.3
    support_gram_offdiag: float = 0.0
    seed: int = 0
    shuffle_columns: bool = True

    def check(self) -> None:
        if not (0 < self.rho_out_max < self.rho_in < 1):
            raise InfeasibleParams(
                f"need 0 < rho_out_max < rho_in < 1, got rho_out_max={self.rho_out_max}, "
                f"rho_in={self.rho_in}"
            )
        if self.k < 1 or self.group_size < 0:
            raise InfeasibleParams("k must be >= 1 and group_size >= 0")
        if self.k * (1 + self.group_size) > self.p:
            raise InfeasibleParams(
                f"k*(1+group_size)={self.k * (1 + self.group_size)} exceeds p={self.p}"
            )
        if self.k > self.m:
            raise InfeasibleParams(f"k={self.k} exceeds m={self.m}")
        if self.group_size > 0 and self.m <= self.k:
            raise InfeasibleParams("near-duplicates need m > k (no room orthogonal to prototypes)")
        gamma = self.support_gram_offdiag
        if not (0 <= gamma <= self.rho_out_max):
            raise InfeasibleParams(f"support_gram_offdiag={gamma} must lie in [0, rho_out_max]")
        if self.k > 1 and gamma >= 1.0 / (self.k - 1):
            raise InfeasibleParams(
                f"support Gram not positive definite: gamma={gamma} >= 1/(k-1)"
            )

    @classmethod
    def from_dict(cls, d: dict) -> "DesignParams":
        d = dict(d)
        if "gamma" in d:
            d["support_gram_offdiag"] = d.pop("gamma")
        return cls(**d)


@dataclass(frozen=True, eq=False)
class DesignMatrix:
    columns: np.ndarray
    true_support: tuple[int, ...]
    groups: dict[int, tuple[int, ...]] = field(default_factory=dict)
    params: DesignParams | None = None

    def __post_init__(self):
        cols = np.array(self.columns, dtype=float)
        if cols.ndim != 2:
            raise ValueError("columns must be a 2-D array")
        cols.setflags(write=False)
        object.__setattr__(self, "columns", cols)
        object.__setattr__(self, "true_support", tuple(int(j) for j in self.true_support))
        object.__setattr__(
            self,
            "groups",
            {int(j): tuple(int(l) for l in g) for j, g in self.groups.items()},
        )

    @property
    def m(self) -> int:
        return self.columns.shape[0]

    @property
    def p(self) -> int:
        return self.columns.shape[1]

    @property
    def k(self) -> int:
        return len(self.true_support)

    @property
    def support_columns(self) -> np.ndarray:
        return self.columns[:, list(self.true_support)]

    def off_support(self) -> np.ndarray:
        mask = np.ones(self.p, dtype=bool)
        mask[list(self.true_support)] = False
        return np.flatnonzero(mask)

    def violations(self, tol: float = COHERENCE_TOL) -> list[str]:
        """Return human-readable descriptions of every broken invariant."""
        out = []
        norms = np.linalg.norm(self.columns, axis=0)
        bad = np.flatnonzero(np.abs(norms - 1.0) > NORM_TOL)
        if bad.size:
            out.append(f"columns {bad.tolist()} are not unit norm")
        S = set(self.true_support)
        seen: set[int] = set()
        for j, grp in self.groups.items():
            if j not in S:
                out.append(f"group key {j} is not a support index")
            for l in grp:
                if l in S:
                    out.append(f"group member {l} lies in the support")
                if l in seen:
                    out.append(f"group member {l} appears in two groups")
                seen.add(l)
        if self.params is None:
            return out
        G = gram(self)
        rho_in, rho_out = self.params.rho_in, self.params.rho_out_max
        for j, grp in self.groups.items():
            members = set(grp) | {j}
            others = np.array([r for r in range(self.p) if r not in members], dtype=int)
            for l in grp:
                if G[j, l] < rho_in - tol:
                    out.append(f"<a_{j}, a_{l}> = {G[j, l]:.6g} below rho_in")
                if others.size and np.max(np.abs(G[l, others])) > rho_out + tol:
                    r = others[np.argmax(np.abs(G[l, others]))]
                    out.append(f"|<a_{l}, a_{r}>| = {abs(G[l, r]):.6g} above rho_out_max")
        return out

    def to_dict(self) -> dict:
        return {
            "params": None if self.params is None else asdict(self.params),
            "columns": self.columns.tolist(),
            "true_support": list(self.true_support),
            "groups": {str(j): list(g) for j, g in self.groups.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DesignMatrix":
        params = None if d.get("params") is None else DesignParams.from_dict(d["params"])
        return cls(
            columns=np.asarray(d["columns"], dtype=float),
            true_support=tuple(d["true_support"]),
            groups={int(j): tuple(g) for j, g in d.get("groups", {}).items()},
            params=params,
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()))

    @classmethod
    def load(cls, path) -> "DesignMatrix":
        return cls.from_dict(json.loads(Path(path).read_text()))


def gram(design: DesignMatrix) -> np.ndarray:
    """Return the symmetric p x p Gram matrix ``A.T @ A``."""
    A = design.columns
    G = A.T @ A
    return 0.5 * (G + G.T)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def build_design(params: DesignParams) -> DesignMatrix:
    """Construct a design satisfying the near-duplicate coherence structure.

    Prototypes get the exact Gram matrix ``(1-g) I + g 11^T`` through its
    Cholesky factor in a random orthonormal frame. Each duplicate is
    ``rho_in * a_j + sqrt(1 - rho_in^2) * z`` with ``z`` a unit vector
    orthogonal to every prototype, so ``<a_j, a_l> = rho_in`` exactly.
    When room allows, the ``z`` vectors are mutually orthonormal as well.
    Fillers are random unit vectors screened against every structured column.

    Raises
    ------
    InfeasibleParams
        If ``params`` break their invariants.
    RejectionBudgetExhausted
        If a filler needs more than 1000 draws to meet ``rho_out_max``.
    """
    params.check()
    m, p, k, g = params.m, params.p, params.k, params.group_size
    rho, rho_out, gamma = params.rho_in, params.rho_out_max, params.support_gram_offdiag
    rng = np.random.default_rng(params.seed)

    frame, _ = np.linalg.qr(rng.standard_normal((m, m)))
    target = (1.0 - gamma) * np.eye(k) + gamma * np.ones((k, k))
    try:
        L = np.linalg.cholesky(target)
    except np.linalg.LinAlgError as exc:
        raise InfeasibleParams("support Gram matrix is not positive definite") from exc
    protos = frame[:, :k] @ L.T

    n_dup = k * g
    if n_dup and m - k >= n_dup:
        zs = frame[:, k : k + n_dup]
    else:
        zs = _random_complement_units(rng, frame[:, k:], n_dup, rho, rho_out, gamma, g)
    s = np.sqrt(1.0 - rho * rho)
    dups = np.empty((m, n_dup))
    for i in range(k):
        for t in range(g):
            c = i * g + t
            dups[:, c] = _unit(rho * protos[:, i] + s * zs[:, c])

    structured = np.hstack([protos, dups])
    n_fill = p - structured.shape[1]
    fillers = np.empty((m, n_fill))
    for c in range(n_fill):
        for _ in range(MAX_REJECTIONS):
            v = _unit(rng.standard_normal(m))
            if np.max(np.abs(structured.T @ v)) <= rho_out:
                fillers[:, c] = v
                break
        else:
            raise RejectionBudgetExhausted(
                f"filler {c}: no draw within rho_out_max={rho_out} after {MAX_REJECTIONS} tries "
                f"(p={p} may be too large for m={m})"
            )

    order = rng.permutation(p) if params.shuffle_columns else np.arange(p)
    # order[i] is the final position of the i-th constructed column
    A = np.empty((m, p))
    A[:, order] = np.hstack([structured, fillers])
    support = tuple(int(order[i]) for i in range(k))
    groups = {
        support[i]: tuple(int(order[k + i * g + t]) for t in range(g)) for i in range(k)
    }
    return DesignMatrix(columns=A, true_support=support, groups=groups if g else {}, params=params)


def _random_complement_units(rng, complement, n, rho, rho_out, gamma, g):
    """Random unit vectors in the orthogonal complement of the prototypes.

    Used only when the complement is too small for an orthonormal set; draws
    are screened so that duplicates from different groups stay within
    ``rho_out`` of each other.
    """
    dim = complement.shape[1]
    zs = np.empty((complement.shape[0], n))
    for c in range(n):
        grp = c // g
        for _ in range(MAX_REJECTIONS):
            z = _unit(complement @ rng.standard_normal(dim))
            prev = [i for i in range(c) if i // g != grp]
            # <a_l, a_l'> across groups = rho^2 gamma + (1 - rho^2) <z, z'>
            cross = rho * rho * gamma + (1 - rho * rho) * (zs[:, prev].T @ z)
            if not prev or np.max(np.abs(cross)) <= rho_out:
                zs[:, c] = z
                break
        else:
            raise RejectionBudgetExhausted("could not place near-duplicate directions")
    return zs
