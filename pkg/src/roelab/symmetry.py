"""CT-type symmetry bookkeeping and the symbolic K-group classification layer.

Concrete side: a `SymmetrySpec` records which of time-reversal T, particle-hole
C and chiral P are present, the signs T^2, C^2 and the unitary parts (an
antiunitary operator is "unitary part followed by complex conjugation"), plus
optional signs for how a spatial reflection commutes with them.

Symbolic side: the Cartan label of a spec, and the classifying groups - the
point-symmetry table over the four physical dimensions, the cyclic-rotation
refinement via the real/complex/quaternionic split of group characters
(Frobenius-Schur indicators), and the four-case reflection refinement.

Degree bookkeeping is the one canonical convention used throughout: each
Cartan label L carries a degree j(L); the classifying group of a d-dimensional
system is the real K-group at degree (j - d) mod 8 for the eight real labels
and the complex K-group at (j - d) mod 2 for A and AIII.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

CARTAN_LABELS = ("A", "AIII", "AI", "BDI", "D", "DIII", "AII", "CII", "C", "CI")
COMPLEX_LABELS = ("A", "AIII")

# degree j(L): the real (or complex) K-theory degree attached to each label
LABEL_DEGREE = {
    "A": 0, "AIII": 1,
    "AI": 0, "BDI": 1, "D": 2, "DIII": 3, "AII": 4, "CII": 5, "C": 6, "CI": 7,
}

# KR_j(R) for j = 0..7 and K_j(C) for j = 0..1, as summand names
_KR = ("Z", "Z2", "Z2", "0", "Z", "0", "0", "0")
_KC = ("Z", "0")


class SymmetryError(ValueError):
    """Raised for inconsistent symmetry data."""


# ---------------------------------------------------------------------------
# K-group descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KGroupDescriptor:
    """Multiset of summands from {Z, Z2} (empty = trivial group 0)."""

    summands: tuple
    provenance: str = ""

    def __post_init__(self):
        clean = tuple(sorted(s for s in self.summands if s != "0"))
        for s in clean:
            if s not in ("Z", "Z2"):
                raise SymmetryError(f"unknown summand {s!r}")
        object.__setattr__(self, "summands", clean)

    def render(self) -> str:
        if not self.summands:
            return "0"
        parts = []
        for name in ("Z", "Z2"):
            k = self.summands.count(name)
            if k == 1:
                parts.append(name)
            elif k > 1:
                parts.append(f"{name}^{k}")
        return " + ".join(parts)

    def __str__(self):
        return self.render()

    def __add__(self, other: "KGroupDescriptor") -> "KGroupDescriptor":
        return KGroupDescriptor(self.summands + other.summands,
                                provenance=self.provenance or other.provenance)


def _real_at(degree: int) -> str:
    return _KR[degree % 8]


def _complex_at(degree: int) -> str:
    return _KC[degree % 2]


def _group_at(label: str, degree: int) -> str:
    """Summand name of the label's K-group evaluated at homological degree."""
    if label in COMPLEX_LABELS:
        return _complex_at(degree)
    return _real_at(degree)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def classify(spec: "SymmetrySpec") -> str:
    """Cartan label from the presence and squares of T, C, P."""
    if spec.has_T and spec.has_C:
        return {(1, 1): "BDI", (-1, 1): "DIII",
                (1, -1): "CI", (-1, -1): "CII"}[(spec.T_sq, spec.C_sq)]
    if spec.has_T:
        return "AI" if spec.T_sq == 1 else "AII"
    if spec.has_C:
        return "D" if spec.C_sq == 1 else "C"
    if spec.has_P:
        return "AIII"
    return "A"


def spec_from_label(label: str, CR_sign: int | None = None,
                    TR_sign: int | None = None,
                    PR_sign: int | None = None) -> "SymmetrySpec":
    """Minimal abstract spec (flags and signs only) realizing a Cartan label."""
    if label not in CARTAN_LABELS:
        raise SymmetryError(f"unknown Cartan label {label!r}")
    kw = {"CR_sign": CR_sign, "TR_sign": TR_sign, "PR_sign_explicit": PR_sign}
    if label == "A":
        return SymmetrySpec(**kw)
    if label == "AIII":
        return SymmetrySpec(has_P=True, **kw)
    if label in ("AI", "AII"):
        return SymmetrySpec(has_T=True, T_sq=1 if label == "AI" else -1, **kw)
    if label in ("D", "C"):
        return SymmetrySpec(has_C=True, C_sq=1 if label == "D" else -1, **kw)
    signs = {"BDI": (1, 1), "DIII": (-1, 1), "CI": (1, -1), "CII": (-1, -1)}[label]
    return SymmetrySpec(has_T=True, has_C=True, T_sq=signs[0], C_sq=signs[1], **kw)


def kgroup_point(label: str, d: int) -> KGroupDescriptor:
    """Classifying group of a d-dimensional gapped system in class `label`."""
    if label not in CARTAN_LABELS:
        raise SymmetryError(f"unknown Cartan label {label!r}")
    if d not in (0, 1, 2, 3):
        raise SymmetryError("d must be 0..3")
    s = _group_at(label, LABEL_DEGREE[label] - d)
    return KGroupDescriptor((s,), provenance=f"point table ({label}, d={d})")


def kgroup_rotation(label: str, d: int, k: int) -> KGroupDescriptor:
    """Refinement for a C_k rotation symmetry, from the character split of Z/k.

    The group algebra of Z/k splits into one real character (two for even k)
    plus (k-1)/2 resp. (k-2)/2 conjugate pairs, so a complex class contributes
    k complex summands while a real class contributes one or two real summands
    plus complex pairs, all evaluated at the degree of (label, d).
    """
    if label not in CARTAN_LABELS:
        raise SymmetryError(f"unknown Cartan label {label!r}")
    if k < 2:
        raise SymmetryError("rotation order k must be >= 2")
    deg = LABEL_DEGREE[label] - d
    prov = f"rotation C_{k} ({label}, d={d})"
    if label in COMPLEX_LABELS:
        return KGroupDescriptor((_complex_at(deg),) * k, provenance=prov)
    n_real = 1 if k % 2 else 2
    n_cplx = (k - n_real) // 2
    summands = (_real_at(deg),) * n_real + (_complex_at(deg),) * n_cplx
    return KGroupDescriptor(summands, provenance=prov)


def kgroup_reflection(spec: "SymmetrySpec", d: int) -> KGroupDescriptor:
    """Refinement for a reflection R of one coordinate axis, chiral classes.

    The four sign cases (how R commutes with P and T) shift the evaluation
    degree or split/complexify the group:

      PR = +RP, TR = +RT  ->  class group at degree (d-1)
      PR = +RP, TR = -RT  ->  class group at degree (d+1)
      PR = -RP, TPR = +RPT -> class group at degree d, squared
      PR = -RP, TPR = -RPT -> complex K-group at degree d

    Requires a chiral spec (P present) with the reflection signs set.
    """
    label = classify(spec)
    if not spec.has_P:
        raise SymmetryError("reflection table requires a chiral spec (P present)")
    pr = spec.PR_sign
    if pr is None:
        raise SymmetryError("reflection signs missing (PR undetermined)")
    j = LABEL_DEGREE[label]
    if pr == 1:
        if spec.has_T:
            if spec.TR_sign is None:
                raise SymmetryError("reflection signs missing (TR undetermined)")
            shift = d - 1 if spec.TR_sign == 1 else d + 1
        else:
            shift = d - 1
        s = _group_at(label, j - shift)
        return KGroupDescriptor((s,), provenance=f"reflection case PR=+ ({label}, d={d})")
    # PR = -RP: compare T(RP) with (RP)T; sign is TR_sign * PT commutation
    if spec.has_T:
        if spec.TR_sign is None:
            raise SymmetryError("reflection signs missing (TR undetermined)")
        trp = spec.TR_sign * spec.TP_sign
    else:
        trp = 1
    if trp == 1:
        s = _group_at(label, j - d)
        return KGroupDescriptor((s, s), provenance=f"reflection case PR=-, TRP=+ ({label}, d={d})")
    s = _complex_at(LABEL_DEGREE[label] - d)
    return KGroupDescriptor((s,), provenance=f"reflection case PR=-, TRP=- ({label}, d={d})")


# ---------------------------------------------------------------------------
# character tables and the Frobenius-Schur split
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CharacterTable:
    """Irreducible characters of a finite group as class functions.

    class_sizes[c] is the size of conjugacy class c, square_class[c] the class
    of the squares of its elements, chars[i, c] the value of character i on
    class c.  Column orthogonality is validated on construction.
    """

    order: int
    class_sizes: np.ndarray
    square_class: np.ndarray
    chars: np.ndarray

    def __post_init__(self):
        sizes = np.asarray(self.class_sizes, dtype=int)
        sq = np.asarray(self.square_class, dtype=int)
        chars = np.asarray(self.chars, dtype=complex)
        object.__setattr__(self, "class_sizes", sizes)
        object.__setattr__(self, "square_class", sq)
        object.__setattr__(self, "chars", chars)
        if sizes.sum() != self.order:
            raise SymmetryError("class sizes do not sum to the group order")
        if chars.shape != (len(sizes), len(sizes)):
            raise SymmetryError("character table must be square")
        gram = (chars * sizes) @ chars.conj().T / self.order
        if not np.allclose(gram, np.eye(len(sizes)), atol=1e-9):
            raise SymmetryError("characters fail row orthogonality at 1e-9")

    @classmethod
    def from_json(cls, doc: dict) -> "CharacterTable":
        sizes = [c["size"] for c in doc["classes"]]
        sq = [c["square_class"] for c in doc["classes"]]
        chars = np.array([[complex(v[0], v[1]) if isinstance(v, (list, tuple)) else complex(v)
                           for v in row] for row in doc["chars"]])
        return cls(order=int(doc["order"]), class_sizes=sizes, square_class=sq, chars=chars)

    @classmethod
    def cyclic(cls, k: int) -> "CharacterTable":
        """Character table of Z/k (all classes singletons)."""
        j = np.arange(k)
        chars = np.exp(2j * np.pi * np.outer(j, j) / k)
        return cls(order=k, class_sizes=np.ones(k, dtype=int),
                   square_class=(2 * j) % k, chars=chars)


def frobenius_schur_split(ct: CharacterTable) -> tuple[int, int, int]:
    """Counts (n_+1, n_0, n_-1) of irreducibles by Frobenius-Schur indicator.

    indicator(chi) = |G|^-1 sum_g chi(g^2), evaluated classwise via the
    squaring map.  Values must land on {-1, 0, +1} within 1e-6; n_0 is even
    (complex irreducibles pair with their conjugates).
    """
    ind = (ct.chars[:, ct.square_class] * ct.class_sizes).sum(axis=1) / ct.order
    if np.abs(ind.imag).max() > 1e-6:
        raise SymmetryError("non-real Frobenius-Schur indicator: corrupt table")
    vals = ind.real
    snapped = np.round(vals).astype(int)
    if np.abs(vals - snapped).max() > 1e-6 or not np.isin(snapped, (-1, 0, 1)).all():
        raise SymmetryError("Frobenius-Schur indicators off {-1,0,1}: corrupt table")
    n1 = int((snapped == 1).sum())
    n0 = int((snapped == 0).sum())
    nm1 = int((snapped == -1).sum())
    if n0 % 2:
        raise SymmetryError("odd count of complex-type irreducibles: corrupt table")
    return n1, n0, nm1


def kgroup_finite_group(label: str, d: int, ct: CharacterTable) -> KGroupDescriptor:
    """Classifying group refined by a finite point group via its character split.

    Real-type irreducibles contribute the label's own group, conjugate pairs a
    complex summand, quaternionic ones the group at degree shifted by 4.
    """
    if label in COMPLEX_LABELS:
        n_irr = len(ct.class_sizes)
        deg = LABEL_DEGREE[label] - d
        return KGroupDescriptor((_complex_at(deg),) * n_irr,
                                provenance=f"finite group ({label}, d={d})")
    n1, n0, nm1 = frobenius_schur_split(ct)
    deg = LABEL_DEGREE[label] - d
    summands = ((_real_at(deg),) * n1
                + (_complex_at(deg),) * (n0 // 2)
                + (_real_at(deg + 4),) * nm1)
    return KGroupDescriptor(summands, provenance=f"finite group ({label}, d={d})")


# ---------------------------------------------------------------------------
# concrete symmetry data
# ---------------------------------------------------------------------------

def _as_unitary(U, name: str) -> np.ndarray:
    U = np.asarray(U, dtype=complex)
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise SymmetryError(f"{name} must be a square matrix")
    if not np.allclose(U @ U.conj().T, np.eye(len(U)), atol=1e-10):
        raise SymmetryError(f"{name} is not unitary")
    return U


@dataclass(frozen=True)
class SymmetrySpec:
    """Concrete CT-type data on an orbital space.

    T and C act antiunitarily as (unitary part) o (complex conjugation); P acts
    unitarily and anticommutes with the Hamiltonian.  When both T and C are
    present P is derived as their product.  Reflection signs record whether a
    declared spatial reflection commutes (+1) or anticommutes (-1) with each
    operator; they only matter for the reflection classification.
    """

    has_T: bool = False
    has_C: bool = False
    has_P: bool = False
    T_sq: int | None = None
    C_sq: int | None = None
    T_unitary: np.ndarray | None = None
    C_unitary: np.ndarray | None = None
    P_unitary: np.ndarray | None = None
    CR_sign: int | None = None
    TR_sign: int | None = None
    PR_sign_explicit: int | None = None
    action: object | None = None      # optional geometry.GroupAction

    def __post_init__(self):
        if self.has_T:
            if self.T_sq not in (1, -1):
                raise SymmetryError("has_T requires T_sq in {+1, -1}")
            if self.T_unitary is not None:
                T = _as_unitary(self.T_unitary, "T_unitary")
                object.__setattr__(self, "T_unitary", T)
                if not np.allclose(T @ T.conj(), self.T_sq * np.eye(len(T)), atol=1e-10):
                    raise SymmetryError("T_unitary . conj(T_unitary) != T_sq * 1")
        if self.has_C:
            if self.C_sq not in (1, -1):
                raise SymmetryError("has_C requires C_sq in {+1, -1}")
            if self.C_unitary is not None:
                C = _as_unitary(self.C_unitary, "C_unitary")
                object.__setattr__(self, "C_unitary", C)
                if not np.allclose(C @ C.conj(), self.C_sq * np.eye(len(C)), atol=1e-10):
                    raise SymmetryError("C_unitary . conj(C_unitary) != C_sq * 1")
        if self.has_T and self.has_C:
            object.__setattr__(self, "has_P", True)
            if self.P_unitary is None and self.T_unitary is not None \
                    and self.C_unitary is not None:
                object.__setattr__(self, "P_unitary",
                                   self.C_unitary @ self.T_unitary.conj())
        if self.has_P and self.P_unitary is not None:
            object.__setattr__(self, "P_unitary", _as_unitary(self.P_unitary, "P_unitary"))

    @property
    def PR_sign(self) -> int | None:
        if self.PR_sign_explicit is not None:
            return self.PR_sign_explicit
        if self.CR_sign is not None and self.TR_sign is not None:
            return self.CR_sign * self.TR_sign
        return None

    @property
    def TP_sign(self) -> int:
        """Sign in TP = (sign) PT; follows from P = CT and the squares."""
        if not (self.has_T and self.has_C):
            return 1
        # T(CT) = (TC)T and TC = CT * (T^2 C^2 (CT)^2) with (CT)^2 = +1
        return self.T_sq * self.C_sq

    def label(self) -> str:
        return classify(self)

    def conjugated(self, W) -> "SymmetrySpec":
        """Same symmetry in the rotated orbital basis W (antiunitaries pick W . U . W^T)."""
        W = _as_unitary(W, "W")
        rot_a = lambda U: None if U is None else W @ U @ W.T
        rot_u = lambda U: None if U is None else W @ U @ W.conj().T
        return SymmetrySpec(
            has_T=self.has_T, has_C=self.has_C, has_P=self.has_P,
            T_sq=self.T_sq, C_sq=self.C_sq,
            T_unitary=rot_a(self.T_unitary), C_unitary=rot_a(self.C_unitary),
            P_unitary=rot_u(self.P_unitary),
            CR_sign=self.CR_sign, TR_sign=self.TR_sign,
            PR_sign_explicit=self.PR_sign_explicit, action=self.action)

    def to_json(self) -> dict:
        enc = lambda U: None if U is None else [[[float(z.real), float(z.imag)] for z in row]
                                                for row in U]
        return {
            "has_T": self.has_T, "has_C": self.has_C, "has_P": self.has_P,
            "T_sq": self.T_sq, "C_sq": self.C_sq,
            "T_unitary": enc(self.T_unitary), "C_unitary": enc(self.C_unitary),
            "P_unitary": enc(self.P_unitary),
            "CR_sign": self.CR_sign, "TR_sign": self.TR_sign,
            "PR_sign": self.PR_sign_explicit,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "SymmetrySpec":
        dec = lambda M: None if M is None else np.array(
            [[complex(v[0], v[1]) for v in row] for row in M])
        return cls(has_T=doc.get("has_T", False), has_C=doc.get("has_C", False),
                   has_P=doc.get("has_P", False),
                   T_sq=doc.get("T_sq"), C_sq=doc.get("C_sq"),
                   T_unitary=dec(doc.get("T_unitary")), C_unitary=dec(doc.get("C_unitary")),
                   P_unitary=dec(doc.get("P_unitary")),
                   CR_sign=doc.get("CR_sign"), TR_sign=doc.get("TR_sign"),
                   PR_sign_explicit=doc.get("PR_sign"))


@dataclass(frozen=True)
class SymmetryReport:
    """Max-entry violations of each declared symmetry relation."""

    violations: dict
    tol: float

    @property
    def max_violation(self) -> float:
        return max(self.violations.values(), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol


def verify_symmetry(H, spec: SymmetrySpec, tol: float = 1e-10) -> SymmetryReport:
    """Check the symmetry relations of a controlled operator.

    T H-bar T^-1 = H (antiunitary, commuting), C H-bar C^-1 = -H (antiunitary,
    anticommuting), P H P^-1 = -H (unitary, anticommuting), and U_g H U_g^-1 = H
    for any point-group elements.  Each violation is the max absolute entry of
    the distance from H to its symmetrized part.
    """
    from .operators import ControlledOperator  # local import, no cycle at module load

    if isinstance(H, ControlledOperator):
        mod = H.module
        M = H.matrix
        m = mod.orbitals_per_site
        n_sites = mod.n_sites
    else:
        raise SymmetryError("verify_symmetry expects a ControlledOperator")
    if not H.hermitian:
        raise SymmetryError("verify_symmetry expects a Hermitian operator")

    def onsite(U):
        if U.shape != (m, m):
            raise SymmetryError(f"symmetry block is {U.shape}, orbital space is {m}")
        return np.kron(np.eye(n_sites), U)

    out = {}
    if spec.has_T and spec.T_unitary is not None:
        T = onsite(spec.T_unitary)
        out["T"] = 0.5 * np.abs(M - T @ M.conj() @ T.conj().T).max()
    if spec.has_C and spec.C_unitary is not None:
        C = onsite(spec.C_unitary)
        out["C"] = 0.5 * np.abs(M + C @ M.conj() @ C.conj().T).max()
    if spec.has_P and spec.P_unitary is not None:
        P = onsite(spec.P_unitary)
        out["P"] = 0.5 * np.abs(M + P @ M @ P.conj().T).max()
    if spec.action is not None:
        worst = 0.0
        act = spec.action
        for i in range(act.order):
            perm = act.site_permutation[i]
            if (perm < 0).any():
                continue  # truncated elements checked only on full matches
            blk = act.onsite_blocks[i] if act.onsite_blocks is not None else np.eye(m)
            U = np.zeros((n_sites * m, n_sites * m), dtype=complex)
            for x in range(n_sites):
                U[perm[x] * m:(perm[x] + 1) * m, x * m:(x + 1) * m] = blk
            worst = max(worst, 0.5 * np.abs(M - U @ M @ U.conj().T).max())
        out["group"] = worst
    return SymmetryReport(violations=out, tol=tol)
