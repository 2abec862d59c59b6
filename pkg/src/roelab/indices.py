"""Numerical index pairings from windowed traces and position derivations.

The trace per unit volume is estimated over a nested family of half-open
boxes; pairing it with the position derivations grad_j = i[x_j, .] yields the
even (Chern) and odd (winding) index formulas, their edge counterparts on a
half-space compression, and the spin-resolved mod-2 invariant.  Every report
carries the raw windowed value, the snapped integer (or mod-2 class), the
classifying group, and a two-window error estimate; the non-constructive
limit over windows is replaced by the largest window with the deviation from
the previous one as the error bar.

Orientation conventions are fixed once and used everywhere: the plane pairing
orders the derivations as (grad_1, grad_2); the edge direction of a cut is
the normal rotated by +90 degrees; the chiral pairing uses the block of the
flattened Hamiltonian mapping positive to negative chirality.  The
momentum-space references in `roelab.bloch` are oriented to match.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geometry import Partition
from .operators import (ControlledOperator, OperatorError, GapCertificate,
                        certify_gap, compress, derivation, derivation_along,
                        flatten, restrict_orbitals)
from .symmetry import KGroupDescriptor, SymmetrySpec, kgroup_point, verify_symmetry


class PairingError(ValueError):
    """Raised when an index formula's preconditions fail."""


@dataclass(frozen=True)
class TraceEstimate:
    """Windowed averages of site traces: one value per window radius."""

    windows: tuple
    values: tuple
    extrapolated: complex
    error: float

    def __post_init__(self):
        if not all(a < b for a, b in zip(self.windows, self.windows[1:])):
            raise PairingError("windows must be strictly increasing")


@dataclass(frozen=True)
class IndexReport:
    """Raw pairing value with its snapped class and provenance."""

    raw: float
    snapped: int | None
    group: KGroupDescriptor
    error: float
    formula: str
    windows: tuple
    z2: bool = False
    values: tuple = ()
    warnings: tuple = ()

    def to_json(self) -> dict:
        if self.snapped is None:
            snapped = None
        elif self.z2:
            snapped = f"Z2:{self.snapped}"
        else:
            snapped = int(self.snapped)
        return {"raw": float(self.raw), "snapped": snapped,
                "group": str(self.group), "error": float(self.error),
                "formula": self.formula, "windows": list(self.windows),
                "values": [float(v) for v in self.values],
                "warnings": list(self.warnings)}


def snap_integer(raw: float, tol: float = 0.1):
    """Nearest integer within tol, else (None, warning)."""
    k = int(np.rint(raw))
    if abs(raw - k) <= tol:
        return k, ()
    return None, (f"raw value {raw:.4f} is {abs(raw - k):.3f} from the nearest "
                  f"integer (snap tolerance {tol})",)


def snap_z2(raw: float, tol: float = 0.25):
    """Class of raw mod 2 in {0, 1}, within tol of the nearest representative."""
    r = np.mod(raw, 2.0)
    dist0 = min(r, 2.0 - r)
    dist1 = abs(r - 1.0)
    cls = 0 if dist0 <= dist1 else 1
    if min(dist0, dist1) <= tol:
        return cls, ()
    return None, (f"raw value {raw:.4f} mod 2 is {min(dist0, dist1):.3f} from "
                  f"{{0, 1}} (snap tolerance {tol})",)


# ---------------------------------------------------------------------------
# windowed traces
# ---------------------------------------------------------------------------

def window_mask(ps, radius: float, center=None) -> np.ndarray:
    """Half-open box [center - r, center + r) per axis."""
    c = ps.window.mean(axis=1) if center is None else np.asarray(center, dtype=float)
    return ((ps.coords >= c - radius) & (ps.coords < c + radius)).all(axis=1)


def trace_per_unit_volume(A: ControlledOperator, windows, center=None,
                          margin: float | None = None) -> TraceEstimate:
    """Per-site average of diagonal block traces over nested boxes.

    Windows must fit in the sample with a safety margin (default: the
    operator's propagation), so diagonal blocks inside the window never see
    the open boundary.
    """
    ps = A.module.pointset
    windows = tuple(sorted(float(n) for n in windows))
    c = ps.window.mean(axis=1) if center is None else np.asarray(center, dtype=float)
    if margin is None:
        margin = A.declared_propagation
    for n in windows:
        if ((c - n - margin < ps.window[:, 0]) | (c + n + margin > ps.window[:, 1])).any():
            raise PairingError(f"window radius {n} plus margin {margin} exceeds the sample")
    traces = A.site_traces()
    vals = []
    for n in windows:
        mask = window_mask(ps, n, c)
        if not mask.any():
            raise PairingError(f"window radius {n} contains no sites")
        vals.append(complex(traces[mask].mean()))
    err = abs(vals[-1] - vals[-2]) if len(vals) > 1 else np.inf
    return TraceEstimate(windows=windows, values=tuple(vals),
                         extrapolated=vals[-1], error=float(err))


def _volume_trace(traces: np.ndarray, ps, windows, center=None) -> tuple:
    """Per-unit-volume windowed sums of per-site trace values.

    Uses the point set's analytic density when available (count / volume
    fluctuates by a boundary term on non-unit lattices), else the empirical
    count over the box volume.
    """
    c = ps.window.mean(axis=1) if center is None else np.asarray(center, dtype=float)
    vals = []
    for n in windows:
        mask = window_mask(ps, n, c)
        if not mask.any():
            raise PairingError(f"window radius {n} contains no sites")
        if ps.density is not None:
            vals.append(complex(traces[mask].mean()) * ps.density)
        else:
            vals.append(complex(traces[mask].sum()) / (2.0 * n) ** ps.dim)
    return tuple(vals)


# ---------------------------------------------------------------------------
# bulk pairings
# ---------------------------------------------------------------------------

def chern_even(P: ControlledOperator, windows, center=None, snap_tol: float = 0.1,
               imag_tol: float = 1e-8, group: KGroupDescriptor | None = None,
               proj_tol: float = 1e-8) -> IndexReport:
    """Plane Chern pairing 2 pi i T(P [grad_1 P, grad_2 P]) of a projection.

    The raw value is the real part at the largest window; the imaginary part
    must vanish to `imag_tol` (diagnostic that P is a genuine projection far
    from the boundary).
    """
    ps = P.module.pointset
    if ps.dim != 2:
        raise PairingError("chern_even is the d = 2 pairing")
    M = P.matrix
    if np.abs(M @ M - M).max() > proj_tol or np.abs(M - M.conj().T).max() > proj_tol:
        raise PairingError("input is not a projection (P^2 = P = P* fails)")
    D1 = derivation(P, 0).matrix
    D2 = derivation(P, 1).matrix
    A = M @ (D1 @ D2 - D2 @ D1)
    traces = np.diag(A).reshape(-1, P.m).sum(axis=1)
    windows = tuple(sorted(float(n) for n in windows))
    vals = tuple(2j * np.pi * v for v in _volume_trace(traces, ps, windows, center))
    raw_c = vals[-1]
    if abs(raw_c.imag) > imag_tol:
        raise PairingError(f"pairing has imaginary part {raw_c.imag:.2e} > {imag_tol}")
    raw = float(raw_c.real)
    err = abs(vals[-1] - vals[-2]) if len(vals) > 1 else np.inf
    snapped, warns = snap_integer(raw, snap_tol)
    return IndexReport(raw=raw, snapped=snapped,
                       group=group or kgroup_point("A", 2), error=float(err),
                       formula="chern_even", windows=windows,
                       values=tuple(v.real for v in vals), warnings=warns)


def occupied_projection(H: ControlledOperator, cert: GapCertificate) -> ControlledOperator:
    """Spectral projection below the certified gap: (1 - sgn(H - fermi)) / 2."""
    s = flatten(H, cert)
    M = 0.5 * (np.eye(s.module.dim) - s.matrix)
    return ControlledOperator(s.module, M, s.declared_propagation, hermitian=True)


def _chiral_split(spec: SymmetrySpec, m: int):
    """Eigenbasis of the on-site chiral unitary, split by eigenvalue sign."""
    if not spec.has_P or spec.P_unitary is None:
        raise PairingError("odd pairing requires a chiral operator P")
    w, V = np.linalg.eigh(spec.P_unitary)
    plus = np.where(w > 0)[0]
    minus = np.where(w < 0)[0]
    if len(plus) != len(minus):
        raise PairingError("chiral grading is unbalanced on the orbital space")
    return V, plus, minus


def chiral_unitary(s: ControlledOperator, spec: SymmetrySpec,
                   flat_tol: float = 1e-6, sym_tol: float = 1e-4,
                   boundary_fraction: float = 0.15):
    """Off-diagonal block of a flattened chiral symmetry.

    In the eigenbasis of P the flattened Hamiltonian is off-diagonal; the
    block mapping positive to negative chirality is the unitary whose winding
    is the odd pairing.  The chirality check runs on interior blocks only: an
    open sample in a nontrivial phase necessarily concentrates a chiral
    defect of the flattening at its boundary zero modes, which is exactly the
    index obstruction and not a data error.  The margin and tolerance are set
    so that samples longer than roughly thirty decay lengths pass cleanly
    while genuine chirality breaking (orders of magnitude larger) is caught.
    """
    M = s.matrix
    if np.abs(M @ M - np.eye(len(M))).max() > max(flat_tol, 1e-6):
        raise PairingError("operator is not flattened (s^2 != 1)")
    ps = s.module.pointset
    if spec.P_unitary is None:
        raise PairingError("odd pairing requires a chiral operator P")
    Pfull = np.kron(np.eye(ps.n), spec.P_unitary)
    defect = 0.5 * np.abs(M + Pfull @ M @ Pfull.conj().T)
    margin = boundary_fraction * float((ps.window[:, 1] - ps.window[:, 0]).min())
    d_bnd = np.minimum((ps.coords - ps.window[:, 0]).min(axis=1),
                       (ps.window[:, 1] - ps.coords).min(axis=1))
    interior = np.repeat(d_bnd > margin, s.m)
    viol = float(defect[np.ix_(interior, interior)].max()) if interior.any() else \
        float(defect.max())
    if viol > sym_tol:
        raise PairingError(f"interior chiral violation {viol:.2e} above {sym_tol}")
    V, plus, minus = _chiral_split(spec, s.m)
    n = s.module.n_sites
    W = np.kron(np.eye(n), V)
    Ms = W.conj().T @ M @ W
    m = s.m
    ip = (np.arange(n)[:, None] * m + plus[None, :]).ravel()
    im = (np.arange(n)[:, None] * m + minus[None, :]).ravel()
    return Ms[np.ix_(im, ip)], ip, im


def chern_odd(s: ControlledOperator, spec: SymmetrySpec, windows, center=None,
              snap_tol: float = 0.1, imag_tol: float = 1e-6,
              group: KGroupDescriptor | None = None) -> IndexReport:
    """Odd-dimensional winding pairing of a flattened chiral Hamiltonian.

    d = 1: i T(U* grad_1 U); d = 3: the full six-term alternating sum with
    prefactor i (i pi)^((d-1)/2) / d!!, where U is the chiral off-diagonal
    block of the flattened operator.
    """
    ps = s.module.pointset
    d = ps.dim
    if d not in (1, 3):
        raise PairingError("odd pairing implemented for d = 1 and d = 3")
    U, ip, im = chiral_unitary(s, spec)
    n = s.module.n_sites
    half = len(ip) // n
    xs = [s.module.position(j) for j in range(d)]
    grads = [1j * (xs[j][im][:, None] - xs[j][ip][None, :]) * U for j in range(d)]
    Uc = U.conj().T
    if d == 1:
        A = Uc @ grads[0]
        const = 1j
    else:
        F = [Uc @ g for g in grads]
        A = (F[0] @ F[1] @ F[2] + F[1] @ F[2] @ F[0] + F[2] @ F[0] @ F[1]
             - F[0] @ F[2] @ F[1] - F[2] @ F[1] @ F[0] - F[1] @ F[0] @ F[2])
        const = 1j * (1j * np.pi) / 3.0      # i (i pi)^1 / 3!!
    traces = np.diag(A).reshape(n, half).sum(axis=1)
    windows = tuple(sorted(float(w) for w in windows))
    vals = tuple(const * v for v in _volume_trace(traces, ps, windows, center))
    raw_c = vals[-1]
    if abs(raw_c.imag) > imag_tol:
        raise PairingError(f"pairing has imaginary part {raw_c.imag:.2e} > {imag_tol}")
    raw = float(raw_c.real)
    err = abs(vals[-1] - vals[-2]) if len(vals) > 1 else np.inf
    snapped, warns = snap_integer(raw, snap_tol)
    return IndexReport(raw=raw, snapped=snapped,
                       group=group or kgroup_point("AIII", d), error=float(err),
                       formula=f"chern_odd_d{d}", windows=windows,
                       values=tuple(v.real for v in vals), warnings=warns)


def spin_sectors(H: ControlledOperator, tol: float = 1e-10):
    """Split a spin-conserving operator into its spin-z eigensectors."""
    labels = H.module.labels.get("spin_z")
    if labels is None:
        raise PairingError("module carries no spin_z labels")
    up = np.where(np.asarray(labels) == 1)[0]
    dn = np.where(np.asarray(labels) == -1)[0]
    n, m = H.module.n_sites, H.m
    iu = (np.arange(n)[:, None] * m + up[None, :]).ravel()
    idn = (np.arange(n)[:, None] * m + dn[None, :]).ravel()
    mixing = float(np.abs(H.matrix[np.ix_(iu, idn)]).max()) if len(up) and len(dn) else 0.0
    return restrict_orbitals(H, up), restrict_orbitals(H, dn), mixing


def kane_mele(H: ControlledOperator, spec: SymmetrySpec, windows, center=None,
              snap_tol: float = 0.25, mixing_tol: float = 1e-10,
              fermi: float = 0.0) -> IndexReport:
    """Spin-resolved mod-2 invariant of a time-reversal-invariant plane system.

    Requires T with T^2 = -1 and exact spin-z conservation; the invariant is
    the Chern pairing of the spin-up spectral projection reduced mod 2.  The
    general formula without spin conservation is intentionally not provided.
    """
    if not (spec.has_T and spec.T_sq == -1):
        raise PairingError("mod-2 invariant requires T with T^2 = -1")
    H_up, _, mixing = spin_sectors(H)
    if mixing > mixing_tol:
        raise PairingError(
            f"spin-z mixing {mixing:.2e} exceeds {mixing_tol}: the spin-resolved "
            "route needs spin conservation, and no spin-mixing formula is provided")
    if spec.T_unitary is not None:
        rep = verify_symmetry(H, spec, tol=1e-8)
        if rep.violations.get("T", 0.0) > 1e-8:
            raise PairingError(f"T violation {rep.violations['T']:.2e}: not T-invariant")
    cert = certify_gap(H_up, fermi=fermi)
    if not cert.gapped:
        raise PairingError("spin-up sector is not gapped at the Fermi level")
    P = occupied_projection(H_up, cert)
    up = chern_even(P, windows, center=center, snap_tol=np.inf)
    cls, warns = snap_z2(up.raw, snap_tol)
    return IndexReport(raw=up.raw, snapped=cls, group=kgroup_point("AII", 2),
                       error=up.error, formula="kane_mele_spin_chern",
                       windows=up.windows, z2=True, values=up.values,
                       warnings=up.warnings + warns)


# ---------------------------------------------------------------------------
# edge pairings
# ---------------------------------------------------------------------------

def _interface_frame(H_hat: ControlledOperator, part: Partition):
    """Strip coordinates of a compressed operator: (normal dist, edge coord)."""
    ps = H_hat.module.pointset
    if ps.source_ids is None:
        raise PairingError("edge pairings expect a compressed (half-space) operator")
    proj = ps.coords @ part.normal - part.offset
    e = part.edge_direction()
    return proj, ps.coords @ e, e


def edge_trace(H_hat: ControlledOperator, part: Partition, traces: np.ndarray,
               edge_windows, strip_width: float | None = None,
               center: float | None = None) -> tuple:
    """Per-unit-edge-length windowed sums over the interface strip.

    The strip keeps sites with normal distance in [0, strip_width) - wide
    enough to hold the interface-bound states, narrow enough to exclude the
    sample's outer boundary; windows are half-open intervals along the edge.
    """
    proj, ecoord, _ = _interface_frame(H_hat, part)
    if strip_width is None:
        strip_width = 0.5 * proj.max()
    iface = np.isin(H_hat.module.pointset.source_ids, part.interface_ids)
    c0 = 0.5 * (ecoord[iface].min() + ecoord[iface].max()) if center is None else center
    vals = []
    for n in edge_windows:
        mask = (proj < strip_width) & (ecoord >= c0 - n) & (ecoord < c0 + n)
        if not mask.any():
            raise PairingError(f"edge window {n} contains no strip sites")
        vals.append(complex(traces[mask].sum()) / (2.0 * n))
    return tuple(vals)


def edge_conductance(H_hat: ControlledOperator, part: Partition, interval,
                     edge_windows, bulk_gap: GapCertificate | None = None,
                     strip_width: float | None = None, snap_tol: float = 0.1,
                     width_family: int = 8, edge_direction=None,
                     group: KGroupDescriptor | None = None) -> IndexReport:
    """Edge transport pairing -(2 pi / |Delta|) T^(P_Delta grad_edge H^).

    P_Delta is the spectral projection of the compressed Hamiltonian onto the
    energy interval Delta inside the certified bulk gap; the trace runs per
    unit edge length over the interface strip, and the 2 pi converts natural
    trace units to conductance quanta.  On a finite sample the edge spectrum
    is discrete, so a sharp interval boundary miscounts by up to one level;
    the estimate is therefore averaged over `width_family` sub-intervals
    shrinking from Delta to 0.7 Delta, which cancels the level-quantization
    sawtooth while staying inside the declared interval.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise PairingError("interval must have positive width")
    if bulk_gap is not None:
        lo = bulk_gap.fermi - bulk_gap.epsilon
        hi = bulk_gap.fermi + bulk_gap.epsilon
        if a < lo or b > hi:
            raise PairingError(f"interval ({a}, {b}) leaves the certified bulk gap "
                               f"({lo:.4f}, {hi:.4f}); the edge formula is gap-valid only")
    if H_hat.module.pointset.dim != 2:
        raise PairingError("edge conductance is the d = 2 edge pairing")
    w, v = H_hat.eigh()
    proj, ecoord, e = _interface_frame(H_hat, part)
    if edge_direction is not None:
        # explicit orientation override: measure along a held-fixed direction
        # instead of the one the cut normal induces
        e = np.asarray(edge_direction, dtype=float)
        e = e / np.linalg.norm(e)
        ecoord = H_hat.module.pointset.coords @ e
    ps = H_hat.module.pointset
    if strip_width is None:
        strip_width = 0.5 * proj.max()
    iface = np.isin(ps.source_ids, part.interface_ids)
    c0 = 0.5 * (ecoord[iface].min() + ecoord[iface].max())
    # per-state current within the strip, resolved per site then per window
    DHv = derivation_along(H_hat, e).matrix @ v
    site_state = (v.conj() * DHv).reshape(ps.n, H_hat.m, -1).sum(axis=1)
    centre, half = 0.5 * (a + b), 0.5 * (b - a)
    halves = np.linspace(0.7 * half, half, max(width_family, 1))
    windows = tuple(float(n) for n in edge_windows)
    per_window = []
    for n in windows:
        mask = (proj < strip_width) & (ecoord >= c0 - n) & (ecoord < c0 + n)
        if not mask.any():
            raise PairingError(f"edge window {n} contains no strip sites")
        state_vals = site_state[mask].sum(axis=0) / (2.0 * n)
        ests = []
        for h in halves:
            sel = (w > centre - h) & (w < centre + h)
            ests.append(-2 * np.pi * complex(state_vals[sel].sum()) / (2 * h))
        per_window.append(np.mean(ests))
    raw = float(np.real(per_window[-1]))
    err = abs(per_window[-1] - per_window[-2]) if len(per_window) > 1 else np.inf
    snapped, warns = snap_integer(raw, snap_tol)
    return IndexReport(raw=raw, snapped=snapped,
                       group=group or kgroup_point("A", 2), error=float(err),
                       formula="edge_conductance", windows=windows,
                       values=tuple(float(np.real(s)) for s in per_window),
                       warnings=warns)


def edge_fredholm(H_hat: ControlledOperator, spec: SymmetrySpec,
                  part: Partition | None = None, theta: float = 1e-6,
                  separation: float = 10.0, loc_width: float | None = None,
                  group: KGroupDescriptor | None = None) -> IndexReport:
    """Half-line index: chirality-weighted count of cut-bound zero modes.

    Eigenvalues below theta in modulus are the kernel; the next one must
    clear separation * theta (else the sample is too small to separate the
    kernel).  The count is Tr(P chi Q) with Q the kernel projection and chi
    the indicator of the quarter nearest the cut, which isolates the cut end
    from its partner mode at the sample's far end.
    """
    ps = H_hat.module.pointset
    if ps.dim != 1:
        raise PairingError("the Fredholm count is the d = 1 edge pairing")
    if not spec.has_P or spec.P_unitary is None:
        raise PairingError("Fredholm count requires a chiral operator P")
    rep = verify_symmetry(H_hat, spec, tol=1e-8)
    if rep.violations.get("P", 0.0) > 1e-8:
        raise PairingError(f"chiral violation {rep.violations['P']:.2e} above 1e-08")
    w, v = H_hat.eigh()
    near = np.abs(w) < theta
    rest = np.abs(w[~near])
    if rest.size and rest.min() <= separation * theta:
        raise PairingError(
            f"no clean spectral separation at theta={theta}: next |E| = "
            f"{rest.min():.2e} <= {separation * theta:.2e}; use a larger sample")
    x = ps.coords[:, 0]
    if part is not None:
        proj = x * part.normal[0] - part.offset
    else:
        proj = x - x.min()
    if loc_width is None:
        loc_width = 0.25 * (proj.max() - proj.min())
    chi = np.repeat(proj <= proj.min() + loc_width, H_hat.m).astype(float)
    Q = v[:, near]
    Pfull = np.kron(np.eye(ps.n), spec.P_unitary)
    # chi is constant on each site's orbital block, so P chi is Hermitian
    val = complex(np.trace(Q.conj().T @ (Pfull * chi[None, :]) @ Q))
    raw = float(np.real(val))
    snapped, warns = snap_integer(raw, 0.1)
    return IndexReport(raw=raw, snapped=snapped,
                       group=group or kgroup_point("AIII", 1), error=float(abs(np.imag(val))),
                       formula="edge_fredholm", windows=(), warnings=warns)
