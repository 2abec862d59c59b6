import numpy as np
import pytest

import roelab as rl
from roelab.bulkedge import BulkEdgeError
from roelab.operators import SiteModule
from roelab.symmetry import SymmetrySpec


@pytest.fixture(scope="module")
def qwz26():
    ps = rl.generate({"kind": "square", "window": [[0, 26], [0, 26]]})
    mod, H, spec = rl.build_model("qwz", {"m": 1.0}, ps)
    bulk = rl.make_bulk(mod, H, spec)
    part = rl.partition_halfspace(ps, [1.0, 0.0], 12.6)
    return bulk, part


class TestMakeBulk:
    def test_rejects_gapless(self, chain200):
        _, H, spec = rl.build_model("ssh", {"t1": 1.0, "t2": 1.0}, chain200,
                                    periodic=True)
        with pytest.raises(BulkEdgeError, match="gap"):
            rl.make_bulk(H.module, H, spec)

    def test_rejects_broken_symmetry(self, chain200):
        _, H, spec = rl.build_model("ssh", {"t1": 1.0, "t2": 0.5}, chain200)
        M = H.matrix + 0.2 * np.eye(400)
        Hb = rl.ControlledOperator(H.module, M, H.declared_propagation)
        with pytest.raises(BulkEdgeError, match="symmetry"):
            rl.make_bulk(H.module, Hb, spec)


class TestMakeEdge:
    def test_diagonal_trivial(self, square20):
        mod = SiteModule(square20, 1, grading=np.array([1]))
        H = rl.ControlledOperator(mod, np.diag(
            np.tile([1.0, -1.0], 200)).astype(complex), 0.0)
        bulk = rl.make_bulk(mod, H, SymmetrySpec())
        part = rl.partition_halfspace(square20, [1, 0], 9.6)
        edge = rl.make_edge(bulk, part)
        assert edge.H_hat.module.n_sites == len(part.plus_ids)

    def test_qwz_ingap_states_bound_to_interface(self, qwz26):
        bulk, part = qwz26
        edge = rl.make_edge(bulk, part)
        w, v = edge.H_hat.eigh()
        ps = edge.module.pointset
        proj = ps.coords @ part.normal - part.offset
        d_out = np.minimum((ps.coords - ps.window[:, 0]).min(axis=1),
                           (ps.window[:, 1] - ps.coords).min(axis=1))
        # deep in-gap states away from the outer boundary hug the cut
        sel = (np.abs(w) < 0.3)
        near_iface = np.repeat(proj < 3.0, 2)
        away_out = np.repeat(d_out > 3.0, 2)
        for j in np.where(sel)[0]:
            amp2 = np.abs(v[:, j]) ** 2
            w_iface = amp2[near_iface].sum()
            w_outer = amp2[~away_out].sum()
            assert w_iface + w_outer > 0.9
            if w_outer < 0.1:   # states not living on the outer ring
                assert w_iface > 0.9

    def test_quotient_gap_failure_detected(self, square20):
        """A metallic bulk puts in-gap weight in the interior: rejected."""
        mod, H, spec = rl.build_model("harper", {"flux": 0.0}, square20)
        assert not rl.certify_gap(H).gapped
        fake = rl.GapCertificate(epsilon=0.4, lower_spectrum_max=-0.4,
                                 upper_spectrum_min=0.4, fermi=0.0, gapped=True)
        bulk = rl.BulkSystem(mod, H, spec, fake)
        part = rl.partition_halfspace(square20, [1, 0], 9.6)
        with pytest.raises(BulkEdgeError, match="interface"):
            rl.make_edge(bulk, part)


class TestMVBoundary:
    def test_pure_grading_is_trivial(self, square20):
        mod = SiteModule(square20, 2, grading=np.array([1, -1]))
        g = rl.grading_operator(mod)
        part = rl.partition_halfspace(square20, [1, 0], 9.6)
        bm = rl.mv_boundary(g, part, edge_windows=(4, 6, 8))
        assert np.allclose(bm.s_hat.matrix @ bm.s_hat.matrix,
                           np.eye(bm.s_hat.module.dim))
        assert np.abs(bm.U.matrix - np.eye(bm.U.module.dim)).max() < 1e-12
        assert bm.winding.snapped == 0
        assert bm.off_interface_deviation < 1e-12

    def test_non_symmetry_rejected(self, qwz26):
        bulk, part = qwz26
        with pytest.raises(BulkEdgeError, match="unitary"):
            rl.mv_boundary(bulk.H, part)

    def test_qwz_winding_matches_bulk_and_edge(self, qwz26):
        bulk, part = qwz26
        s = rl.flatten(bulk.H, bulk.gap)
        bm = rl.mv_boundary(s, part, edge_windows=(5, 7, 9))
        P = rl.occupied_projection(bulk.H, bulk.gap)
        cb = rl.chern_even(P, [6, 8, 10])
        edge = rl.make_edge(bulk, part)
        eps = bulk.gap.epsilon
        ce = rl.edge_conductance(edge.H_hat, part, (-eps / 3, eps / 3), (5, 7, 9),
                                 bulk_gap=bulk.gap)
        assert bm.winding.snapped == cb.snapped == ce.snapped == -1
        assert bm.U.matrix @ bm.U.matrix.conj().T == pytest.approx(
            np.eye(bm.U.module.dim), abs=1e-10)

    def test_interface_support_contract(self):
        """On an elongated sample the far region exists and U is the identity
        there to 1e-6."""
        ps = rl.generate({"kind": "square", "window": [[0, 44], [0, 18]]})
        mod, H, spec = rl.build_model("qwz", {"m": 1.0}, ps)
        bulk = rl.make_bulk(mod, H, spec)
        s = rl.flatten(H, bulk.gap)
        part = rl.partition_halfspace(ps, [1.0, 0.0], 10.6)
        bm = rl.mv_boundary(s, part, edge_windows=(4, 5, 6))
        assert bm.off_interface_deviation < 1e-6
        assert np.isfinite(bm.decay_xi) and bm.decay_xi > 0
        assert bm.winding.snapped == -1

    def test_direct_sum_adds(self, qwz26):
        bulk, part = qwz26
        s = rl.flatten(bulk.H, bulk.gap)
        s2 = rl.direct_sum(s, s)
        bm = rl.mv_boundary(s2, part, edge_windows=(5, 7, 9))
        assert bm.winding.snapped == -2


class TestVerifyBEC:
    def test_qwz(self, qwz26):
        bulk, part = qwz26
        rep = rl.verify_bec(bulk, part, {"windows": (6, 8, 10),
                                         "edge_windows": (5, 7, 9)})
        assert rep.passed and rep.bulk.snapped == rep.edge.snapped == -1
        assert rep.plateau_deviation < 0.05
        doc = rep.to_json()
        assert doc["pass"] and doc["bulk"]["snapped"] == -1

    def test_ssh_both_phases(self, chain200):
        part = rl.partition_halfspace(chain200, [1.0], 99.6)
        for t1, t2, expect in ((0.5, 1.0, 1), (1.0, 0.5, 0)):
            _, H, spec = rl.build_model("ssh", {"t1": t1, "t2": t2}, chain200)
            bulk = rl.make_bulk(H.module, H, spec)
            rep = rl.verify_bec(bulk, part, {"windows": (40, 60, 80)})
            assert rep.passed and rep.bulk.snapped == rep.edge.snapped == expect

    def test_kitaev_z2(self, chain200):
        part = rl.partition_halfspace(chain200, [1.0], 99.6)
        for mu, expect in ((1.0, 1), (3.0, 0)):
            _, H, spec = rl.build_model("kitaev", {"mu": mu}, chain200)
            bulk = rl.make_bulk(H.module, H, spec)
            rep = rl.verify_bec(bulk, part, {"windows": (40, 60, 80)})
            assert rep.passed and rep.bulk.z2 and rep.edge.z2
            assert rep.bulk.snapped == rep.edge.snapped == expect

    def test_unsupported_pair(self, chain200):
        mod = SiteModule(chain200, 2, grading=np.array([1, -1]))
        H = rl.ControlledOperator(mod, np.kron(np.eye(200), np.diag(
            [1.0, -1.0])).astype(complex), 0.0)
        spec = SymmetrySpec(has_T=True, T_sq=1, T_unitary=np.eye(2))
        bulk = rl.make_bulk(mod, H, spec)
        part = rl.partition_halfspace(chain200, [1.0], 99.6)
        with pytest.raises(BulkEdgeError, match="supported"):
            rl.verify_bec(bulk, part)

    def test_relation_conjugation_invariance(self, qwz26):
        """Conjugating by an even on-site unitary leaves both snapped values."""
        bulk, part = qwz26
        rng = np.random.default_rng(1)
        A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        W = np.kron(np.eye(bulk.module.n_sites), np.linalg.qr(A)[0])
        Hc = rl.ControlledOperator(bulk.module, W @ bulk.H.matrix @ W.conj().T,
                                   bulk.H.declared_propagation)
        bc = rl.make_bulk(bulk.module, Hc, bulk.spec)
        rep = rl.verify_bec(bc, part, {"windows": (6, 8, 10),
                                       "edge_windows": (5, 7, 9)})
        assert rep.passed and rep.bulk.snapped == -1

    def test_relation_grading_sum_invariance(self, qwz26):
        """Direct sum with a grading (an index-zero system) changes nothing."""
        bulk, part = qwz26
        g = rl.grading_operator(SiteModule(bulk.module.pointset, 2,
                                           grading=np.array([1, -1])))
        Hg = rl.direct_sum(bulk.H, g)
        bg = rl.make_bulk(Hg.module, Hg, bulk.spec)
        rep = rl.verify_bec(bg, part, {"windows": (6, 8, 10),
                                       "edge_windows": (5, 7, 9)})
        assert rep.passed and rep.bulk.snapped == -1

    def test_sweeps_recorded(self, chain200):
        _, H, spec = rl.build_model("ssh", {"t1": 0.5, "t2": 1.0}, chain200)
        bulk = rl.make_bulk(H.module, H, spec)
        part = rl.partition_halfspace(chain200, [1.0], 99.6)
        rep = rl.verify_bec(bulk, part, {
            "windows": (40, 60, 80), "disorder_strength": 0.2,
            "disorder_seeds": (0, 1), "truncation_radii": (1.5,)})
        assert len(rep.sweeps) == 3
        assert all(s["pass"] for s in rep.sweeps)
        kinds = [s["kind"] for s in rep.sweeps]
        assert kinds.count("disorder") == 2 and kinds.count("truncation") == 1
