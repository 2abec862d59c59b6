"""Finite-propagation operators on orbital modules over a point set.

A `SiteModule` attaches m orbitals (with a Z2 grading and optional labels such
as spin) to every point of a `PointSet`.  A `ControlledOperator` is a complex
matrix on that module together with a declared propagation bound: matrix
entries between sites farther apart than the bound vanish.  Storage is dense -
the intended scale is a few thousand matrix dimensions, where full
eigendecompositions are exact-to-roundoff and cheaper to reason about than any
iterative scheme - while the block structure over (site, site) pairs is the
semantic interface (serialization, propagation accounting, truncation).

Operators are immutable; all operations return new values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .geometry import Partition, PointSet

ZERO_BLOCK_TOL = 1e-14   # below double-precision noise, a block counts as zero


class OperatorError(ValueError):
    """Raised for inconsistent operator input (dimension, gap, hermiticity)."""


@dataclass(frozen=True)
class SiteModule:
    """Uniform orbital space over a point set.

    grading is the diagonal +-1 vector on the orbital space (the same at every
    site); labels are optional per-orbital tags, e.g. labels["spin_z"] = (m,)
    array of +-1 for spinful models.
    """

    pointset: PointSet
    orbitals_per_site: int
    grading: np.ndarray | None = None
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.grading is not None:
            g = np.asarray(self.grading, dtype=int)
            if g.shape != (self.orbitals_per_site,) or not np.isin(g, (-1, 1)).all():
                raise OperatorError("grading must be a +-1 vector over the orbitals")
            object.__setattr__(self, "grading", g)

    @property
    def n_sites(self) -> int:
        return self.pointset.n

    @property
    def dim(self) -> int:
        return self.n_sites * self.orbitals_per_site

    def position(self, axis: int) -> np.ndarray:
        """Coordinate of every basis index along `axis` (constant per site)."""
        return np.repeat(self.pointset.coords[:, axis], self.orbitals_per_site)

    def position_along(self, direction) -> np.ndarray:
        e = np.asarray(direction, dtype=float)
        return np.repeat(self.pointset.coords @ e, self.orbitals_per_site)

    def restrict_sites(self, ids) -> "SiteModule":
        return SiteModule(self.pointset.restrict(ids), self.orbitals_per_site,
                          grading=self.grading, labels=dict(self.labels))

    def restrict_orbitals(self, orbital_idx) -> "SiteModule":
        idx = np.asarray(orbital_idx, dtype=int)
        g = None if self.grading is None else self.grading[idx]
        labels = {k: np.asarray(v)[idx] for k, v in self.labels.items()}
        return SiteModule(self.pointset, len(idx), grading=g, labels=labels)

    def to_json(self) -> dict:
        doc = {"pointset": self.pointset.to_json(),
               "orbitals_per_site": self.orbitals_per_site}
        if self.grading is not None:
            doc["grading"] = self.grading.tolist()
        if self.labels:
            doc["labels"] = {k: np.asarray(v).tolist() for k, v in self.labels.items()}
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "SiteModule":
        return cls(PointSet.from_json(doc["pointset"]), int(doc["orbitals_per_site"]),
                   grading=doc.get("grading"),
                   labels={k: np.asarray(v) for k, v in doc.get("labels", {}).items()})


def site_distances(ps: PointSet) -> np.ndarray:
    return cdist(ps.coords, ps.coords)


@dataclass(frozen=True)
class ControlledOperator:
    """Dense complex matrix with finite-propagation bookkeeping.

    The invariant: every block (x, y) with max entry above 1e-14 satisfies
    d(x, y) <= declared_propagation.  The Hermitian flag asserts
    block(x, y) = block(y, x)^dagger.
    """

    module: SiteModule
    matrix: np.ndarray
    declared_propagation: float
    hermitian: bool = True
    _eig_cache: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.shape != (self.module.dim, self.module.dim):
            raise OperatorError(f"matrix shape {M.shape} != module dim {self.module.dim}")
        object.__setattr__(self, "matrix", M)

    # -- block view ---------------------------------------------------------

    @property
    def m(self) -> int:
        return self.module.orbitals_per_site

    def block(self, x: int, y: int) -> np.ndarray:
        m = self.m
        return self.matrix[x * m:(x + 1) * m, y * m:(y + 1) * m]

    def block_norms(self) -> np.ndarray:
        """(N, N) max absolute entry of every block."""
        N, m = self.module.n_sites, self.m
        return np.abs(self.matrix).reshape(N, m, N, m).max(axis=(1, 3))

    def site_traces(self) -> np.ndarray:
        """(N,) trace of every diagonal block."""
        return np.diag(self.matrix).reshape(-1, self.m).sum(axis=1)

    def nonzero_blocks(self):
        """Iterate (x, y, block) over blocks above the zero threshold."""
        norms = self.block_norms()
        for x, y in zip(*np.where(norms > ZERO_BLOCK_TOL)):
            yield int(x), int(y), self.block(int(x), int(y))

    # -- algebra (propagation bookkeeping per operation) ---------------------

    def __matmul__(self, other: "ControlledOperator") -> "ControlledOperator":
        prop = self.declared_propagation + other.declared_propagation
        return ControlledOperator(self.module, self.matrix @ other.matrix,
                                  prop, hermitian=False)

    def __add__(self, other: "ControlledOperator") -> "ControlledOperator":
        prop = max(self.declared_propagation, other.declared_propagation)
        return ControlledOperator(self.module, self.matrix + other.matrix, prop,
                                  hermitian=self.hermitian and other.hermitian)

    def __sub__(self, other: "ControlledOperator") -> "ControlledOperator":
        prop = max(self.declared_propagation, other.declared_propagation)
        return ControlledOperator(self.module, self.matrix - other.matrix, prop,
                                  hermitian=self.hermitian and other.hermitian)

    def __mul__(self, scalar) -> "ControlledOperator":
        herm = self.hermitian and np.isreal(scalar)
        return ControlledOperator(self.module, self.matrix * scalar,
                                  self.declared_propagation, hermitian=bool(herm))

    __rmul__ = __mul__

    def adjoint(self) -> "ControlledOperator":
        return ControlledOperator(self.module, self.matrix.conj().T,
                                  self.declared_propagation, hermitian=self.hermitian)

    def norm(self) -> float:
        """Operator norm (exact via spectrum for Hermitian input)."""
        if self.hermitian:
            return float(np.abs(np.linalg.eigvalsh(self.matrix)).max())
        return float(np.linalg.norm(self.matrix, 2))

    def eigh(self):
        """Cached eigendecomposition (safe: operators are immutable)."""
        if not self.hermitian:
            raise OperatorError("eigh on a non-Hermitian operator")
        if not self._eig_cache:
            w, v = np.linalg.eigh(self.matrix)
            self._eig_cache.append((w, v))
        return self._eig_cache[0]

    # -- construction / serialization ----------------------------------------

    @classmethod
    def from_blocks(cls, module: SiteModule, blocks: dict,
                    hermitian: bool = True) -> "ControlledOperator":
        """Assemble from {(x, y): m x m block}; for hermitian input, (y, x)
        partners are filled in automatically when absent."""
        m = module.orbitals_per_site
        M = np.zeros((module.dim, module.dim), dtype=complex)
        for (x, y), B in blocks.items():
            B = np.asarray(B, dtype=complex)
            if B.shape != (m, m):
                raise OperatorError(f"block ({x},{y}) has shape {B.shape}, expected ({m},{m})")
            M[x * m:(x + 1) * m, y * m:(y + 1) * m] += B
            if hermitian and x != y and (y, x) not in blocks:
                M[y * m:(y + 1) * m, x * m:(x + 1) * m] += B.conj().T
        if hermitian and np.abs(M - M.conj().T).max() > 1e-12:
            raise OperatorError("blocks declared Hermitian but matrix is not")
        dist = site_distances(module.pointset)
        norms = np.abs(M).reshape(module.n_sites, m, module.n_sites, m).max(axis=(1, 3))
        mask = norms > ZERO_BLOCK_TOL
        prop = float(dist[mask].max()) if mask.any() else 0.0
        return cls(module, M, prop, hermitian=hermitian)

    @classmethod
    def from_dense(cls, module: SiteModule, M, hermitian: bool | None = None,
                   propagation: float | None = None) -> "ControlledOperator":
        M = np.asarray(M, dtype=complex)
        if hermitian is None:
            hermitian = bool(np.abs(M - M.conj().T).max() <= 1e-12)
        op = cls(module, M, 0.0, hermitian=hermitian)
        if propagation is None:
            propagation = compute_propagation(op)
        object.__setattr__(op, "declared_propagation", float(propagation))
        return op

    def to_json(self) -> dict:
        blocks = []
        for x, y, B in self.nonzero_blocks():
            blocks.append([x, y, [[[float(z.real), float(z.imag)] for z in row]
                                  for row in B]])
        return {"module": self.module.to_json(), "hermitian": self.hermitian,
                "propagation": float(self.declared_propagation), "blocks": blocks}

    @classmethod
    def from_json(cls, doc: dict) -> "ControlledOperator":
        module = SiteModule.from_json(doc["module"])
        m = module.orbitals_per_site
        M = np.zeros((module.dim, module.dim), dtype=complex)
        for x, y, rows in doc["blocks"]:
            B = np.array([[complex(v[0], v[1]) for v in row] for row in rows])
            M[x * m:(x + 1) * m, y * m:(y + 1) * m] = B
        return cls(module, M, float(doc.get("propagation", 0.0)),
                   hermitian=bool(doc["hermitian"]))


def identity(module: SiteModule) -> ControlledOperator:
    return ControlledOperator(module, np.eye(module.dim, dtype=complex), 0.0)


def grading_operator(module: SiteModule) -> ControlledOperator:
    if module.grading is None:
        raise OperatorError("module carries no grading")
    g = np.tile(module.grading, module.n_sites).astype(complex)
    return ControlledOperator(module, np.diag(g), 0.0)


# ---------------------------------------------------------------------------
# the controlled-operator toolbox
# ---------------------------------------------------------------------------

def compute_propagation(A: ControlledOperator, tol: float = ZERO_BLOCK_TOL) -> float:
    """Max distance over blocks with any entry above `tol` (0 for the zero op)."""
    norms = A.block_norms()
    mask = norms > tol
    np.fill_diagonal(mask, False)
    if not mask.any():
        return 0.0
    dist = site_distances(A.module.pointset)
    return float(dist[mask].max())


def propagation(A: ControlledOperator) -> float:
    return compute_propagation(A)


def truncate(H: ControlledOperator, R: float) -> ControlledOperator:
    """Drop all blocks between sites at distance >= R (Hermiticity preserved)."""
    if R <= 0:
        raise OperatorError("truncation radius must be positive")
    dist = site_distances(H.module.pointset)
    keep = (dist < R)
    m = H.m
    mask = np.repeat(np.repeat(keep, m, axis=0), m, axis=1)
    return ControlledOperator(H.module, np.where(mask, H.matrix, 0.0),
                              min(H.declared_propagation, R), hermitian=H.hermitian)


@dataclass(frozen=True)
class GapCertificate:
    """Spectral-gap evidence around a Fermi level.

    epsilon is the half-width of the certified gap [-eps, eps] after shifting
    the Fermi level to zero; bulk eigenvalues are those of states not pinned
    to the open sample boundary (eigenvectors with more than half their weight
    within the boundary margin are excluded, since boundary modes are edge
    physics, not bulk).
    """

    epsilon: float
    lower_spectrum_max: float | None
    upper_spectrum_min: float | None
    fermi: float
    gapped: bool
    method: str = "full diagonalization"
    level_spacing: float = 0.0

    @property
    def width(self) -> float:
        if self.lower_spectrum_max is None or self.upper_spectrum_min is None:
            return np.inf
        return self.upper_spectrum_min - self.lower_spectrum_max


def _boundary_weights(H: ControlledOperator, margin: float) -> np.ndarray:
    """Per-eigenvector weight within `margin` of the window boundary."""
    ps = H.module.pointset
    d_bnd = np.minimum((ps.coords - ps.window[:, 0]).min(axis=1),
                       (ps.window[:, 1] - ps.coords).min(axis=1))
    near = np.repeat(d_bnd < margin, H.m)
    _, v = H.eigh()
    return (np.abs(v[near]) ** 2).sum(axis=0)


def certify_gap(H: ControlledOperator, fermi: float = 0.0,
                boundary_margin: float | None = None,
                spacing_factor: float = 2.0) -> GapCertificate:
    """Full-diagonalization gap certificate at the Fermi level.

    Open-boundary samples host in-gap states pinned to the sample boundary;
    these would falsely close the bulk gap, so eigenvectors with > 50% weight
    within the boundary margin (default: two hopping ranges) are excluded.
    The verdict is gapless when the remaining gap does not clear
    `spacing_factor` times the local level spacing - a windowed sample cannot
    distinguish a smaller gap from a discretized continuum, whose levels sit
    about half a spacing from the Fermi level.
    """
    if not H.hermitian:
        raise OperatorError("certify_gap expects a Hermitian operator")
    w, _ = H.eigh()
    if boundary_margin is None:
        norms = H.block_norms()
        np.fill_diagonal(norms, 0.0)
        mask = norms > ZERO_BLOCK_TOL
        if mask.any():
            dist = site_distances(H.module.pointset)
            hop = float(np.median(dist[mask]))
        else:
            hop = 0.0
        extent = float((H.module.pointset.window[:, 1]
                        - H.module.pointset.window[:, 0]).min())
        # wide enough to catch boundary modes with a several-site tail, but
        # never eating into the bulk of a small sample
        boundary_margin = min(max(2 * hop, 0.05 * extent), 0.25 * extent)
    bulk = np.ones(len(w), dtype=bool)
    if boundary_margin > 0:
        bulk = _boundary_weights(H, boundary_margin) <= 0.5
    wb = w[bulk]
    if len(wb) == 0:
        raise OperatorError("no bulk states left after boundary filtering")
    below = wb[wb < fermi]
    above = wb[wb >= fermi]
    lo = float(below.max()) if len(below) else None
    hi = float(above.min()) if len(above) else None
    eps = min([abs(x - fermi) for x in (lo, hi) if x is not None])
    near = np.sort(np.abs(wb - fermi))[:20]
    # typical level spacing near the Fermi level: median of the nonzero gaps
    # (zero gaps are exact degeneracies, and the first gap may be the spectral
    # gap itself, which the median discounts)
    diffs = np.diff(near)
    diffs = diffs[diffs > 1e-12]
    spacing = float(np.median(diffs)) if diffs.size else 0.0
    gapped = eps > max(spacing_factor * spacing, 1e-8)
    return GapCertificate(epsilon=float(eps), lower_spectrum_max=lo,
                          upper_spectrum_min=hi, fermi=fermi, gapped=gapped,
                          level_spacing=spacing)


def flatten(H: ControlledOperator, cert: GapCertificate) -> ControlledOperator:
    """Spectral flattening sgn(H - fermi), a self-adjoint unitary.

    Exact to roundoff via the full eigendecomposition.  The result is only
    approximately local, so its propagation is recorded as the sample
    diameter; the actual off-diagonal decay can be fitted a posteriori with
    `decay_length`.
    """
    if not cert.gapped:
        raise OperatorError("flatten requires a certified gap")
    w, v = H.eigh()
    s = (v * np.sign(w - cert.fermi)) @ v.conj().T
    s = 0.5 * (s + s.conj().T)
    ps = H.module.pointset
    diameter = float(np.linalg.norm(ps.window[:, 1] - ps.window[:, 0]))
    return ControlledOperator(H.module, s, diameter, hermitian=True)


def decay_length(A: ControlledOperator, r_max: float | None = None) -> tuple[float, float]:
    """Fit |block(x,y)| <= C exp(-d(x,y)/xi); returns (xi, C).

    Block max-norms are binned by distance and the log of the bin maxima is
    fitted linearly; a diagnostic for how well a flattened operator is
    approximated by controlled ones.
    """
    dist = site_distances(A.module.pointset)
    norms = A.block_norms()
    mask = ~np.eye(A.module.n_sites, dtype=bool)
    d, n = dist[mask], norms[mask]
    if r_max is None:
        r_max = 0.5 * d.max()
    bins = np.arange(1.0, r_max, 1.0)
    xs, ys = [], []
    for lo, hi in zip(bins[:-1], bins[1:]):
        sel = (d >= lo) & (d < hi)
        if sel.any() and n[sel].max() > 1e-15:
            xs.append(0.5 * (lo + hi))
            ys.append(np.log(n[sel].max()))
    if len(xs) < 2:
        return np.inf, float(n.max(initial=0.0))
    slope, intercept = np.polyfit(xs, ys, 1)
    xi = -1.0 / slope if slope < 0 else np.inf
    return float(xi), float(np.exp(intercept))


def derivation(A: ControlledOperator, axis: int) -> ControlledOperator:
    """Position-commutator derivation i[x_axis, A], exact and entrywise."""
    if axis >= A.module.pointset.dim:
        raise OperatorError(f"axis {axis} out of range for d={A.module.pointset.dim}")
    x = A.module.position(axis)
    M = 1j * (x[:, None] - x[None, :]) * A.matrix
    return ControlledOperator(A.module, M, A.declared_propagation,
                              hermitian=A.hermitian)


def derivation_along(A: ControlledOperator, direction) -> ControlledOperator:
    """i[<e, x>, A] for an arbitrary direction vector e."""
    x = A.module.position_along(direction)
    M = 1j * (x[:, None] - x[None, :]) * A.matrix
    return ControlledOperator(A.module, M, A.declared_propagation,
                              hermitian=A.hermitian)


def compress(H: ControlledOperator, part: Partition) -> ControlledOperator:
    """Restrict to the plus half-space: chi_{Y+} H chi_{Y+} on the sub-module."""
    if part.plus_ids.max(initial=-1) >= H.module.n_sites:
        raise OperatorError("partition does not match the operator's point set")
    sub = H.module.restrict_sites(part.plus_ids)
    m = H.m
    idx = (part.plus_ids[:, None] * m + np.arange(m)[None, :]).ravel()
    return ControlledOperator(sub, H.matrix[np.ix_(idx, idx)],
                              H.declared_propagation, hermitian=H.hermitian)


def direct_sum(A: ControlledOperator, B: ControlledOperator) -> ControlledOperator:
    """Orbital-direct sum of two operators over the same point set."""
    if A.module.pointset is not B.module.pointset and \
            not np.array_equal(A.module.pointset.coords, B.module.pointset.coords):
        raise OperatorError("direct_sum requires a common point set")
    ma, mb = A.m, B.m
    n = A.module.n_sites
    m = ma + mb
    gr = None
    if A.module.grading is not None and B.module.grading is not None:
        gr = np.concatenate([A.module.grading, B.module.grading])
    labels = {}
    for k in set(A.module.labels) & set(B.module.labels):
        labels[k] = np.concatenate([np.asarray(A.module.labels[k]),
                                    np.asarray(B.module.labels[k])])
    mod = SiteModule(A.module.pointset, m, grading=gr, labels=labels)
    M = np.zeros((n * m, n * m), dtype=complex)
    ia = (np.arange(n)[:, None] * m + np.arange(ma)[None, :]).ravel()
    ib = (np.arange(n)[:, None] * m + ma + np.arange(mb)[None, :]).ravel()
    M[np.ix_(ia, ia)] = A.matrix
    M[np.ix_(ib, ib)] = B.matrix
    prop = max(A.declared_propagation, B.declared_propagation)
    return ControlledOperator(mod, M, prop, hermitian=A.hermitian and B.hermitian)


def restrict_orbitals(H: ControlledOperator, orbital_idx) -> ControlledOperator:
    """Keep a subset of orbitals at every site (e.g. one spin sector)."""
    idx = np.asarray(orbital_idx, dtype=int)
    mod = H.module.restrict_orbitals(idx)
    n, m = H.module.n_sites, H.m
    flat = (np.arange(n)[:, None] * m + idx[None, :]).ravel()
    return ControlledOperator(mod, H.matrix[np.ix_(flat, flat)],
                              H.declared_propagation, hermitian=H.hermitian)
