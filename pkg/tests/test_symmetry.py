import numpy as np
import pytest

import roelab as rl
from roelab.symmetry import (CharacterTable, SymmetryError, SymmetrySpec,
                             kgroup_finite_group, spec_from_label)
from tables import POINT_GROUPS, TENFOLD

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.diag([1, -1]).astype(complex)


def spec_of(key):
    has_T, T_sq, has_C, C_sq, has_P = key
    return SymmetrySpec(has_T=has_T, T_sq=T_sq, has_C=has_C, C_sq=C_sq, has_P=has_P)


class TestClassify:
    def test_all_ten_rows(self):
        for key, (label, _) in TENFOLD.items():
            assert rl.classify(spec_of(key)) == label

    def test_examples(self):
        assert rl.classify(SymmetrySpec()) == "A"
        assert rl.classify(SymmetrySpec(has_T=True, T_sq=-1)) == "AII"
        assert rl.classify(SymmetrySpec(has_T=True, T_sq=-1,
                                        has_C=True, C_sq=1)) == "DIII"

    def test_conjugation_invariance(self):
        rng = np.random.default_rng(0)
        for _ in range(25):
            A = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
            W = np.linalg.qr(A)[0]
            for spec in (
                SymmetrySpec(has_T=True, T_sq=-1, T_unitary=1j * SY),
                SymmetrySpec(has_T=True, T_sq=1, T_unitary=np.eye(2)),
                SymmetrySpec(has_C=True, C_sq=1, C_unitary=SX),
                SymmetrySpec(has_T=True, T_sq=1, T_unitary=np.eye(2),
                             has_C=True, C_sq=1, C_unitary=SX),
            ):
                assert rl.classify(spec.conjugated(W)) == rl.classify(spec)

    def test_bad_antiunitary_square(self):
        with pytest.raises(SymmetryError):
            SymmetrySpec(has_T=True, T_sq=-1, T_unitary=np.eye(2))


class TestKGroupPoint:
    def test_all_forty_entries(self):
        for label, row in POINT_GROUPS.items():
            for d, expect in enumerate(row):
                assert str(rl.kgroup_point(label, d)) == expect

    def test_examples(self):
        assert str(rl.kgroup_point("A", 0)) == "Z"
        assert str(rl.kgroup_point("AII", 2)) == "Z2"
        assert str(rl.kgroup_point("C", 1)) == "0"

    def test_bad_input(self):
        with pytest.raises(SymmetryError):
            rl.kgroup_point("X", 0)
        with pytest.raises(SymmetryError):
            rl.kgroup_point("A", 5)


class TestKGroupRotation:
    def test_complex_class_k3(self):
        assert str(rl.kgroup_rotation("A", 2, 3)) == "Z^3"

    def test_complex_class_trivial_degree(self):
        assert str(rl.kgroup_rotation("A", 1, 4)) == "0"

    def test_real_class_even_order(self):
        # two real characters of C_2, no conjugate pairs, each at the AII/d=2
        # degree where the point group is Z2
        assert str(rl.kgroup_rotation("AII", 2, 2)) == "Z2^2"

    def test_real_class_odd_order(self):
        # one real character plus one conjugate pair
        assert str(rl.kgroup_rotation("AII", 2, 3)) == "Z + Z2"

    def test_real_class_k4(self):
        assert str(rl.kgroup_rotation("AII", 2, 4)) == "Z + Z2^2"

    @pytest.mark.parametrize("label", ["A", "AIII", "AI", "AII", "D", "DIII"])
    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_agrees_with_character_split(self, label, k):
        """Dual route: the closed form must match the Frobenius-Schur split
        of the actual cyclic character table."""
        ct = CharacterTable.cyclic(k)
        for d in range(4):
            assert str(rl.kgroup_rotation(label, d, k)) == \
                str(kgroup_finite_group(label, d, ct))


class TestKGroupReflection:
    def test_commuting_case_single_summand(self):
        # fully commuting reflection: the class group one dimension down
        for label in ("BDI", "DIII", "CI", "CII"):
            for d in (1, 2, 3):
                spec = spec_from_label(label, CR_sign=1, TR_sign=1)
                got = rl.kgroup_reflection(spec, d)
                assert str(got) == str(rl.kgroup_point(label, d - 1))

    def test_tr_anticommuting_shifts_by_two(self):
        spec = spec_from_label("DIII", CR_sign=-1, TR_sign=-1)  # PR=+, TR=-
        assert spec.PR_sign == 1
        got = rl.kgroup_reflection(spec, 2)
        assert str(got) == str(rl.kgroup_point("DIII", 3))  # degree d+1

    def test_pr_anticommuting_squares(self):
        # PR=-RP with TRP=RPT: group at degree d, squared
        spec = spec_from_label("BDI", CR_sign=-1, TR_sign=1)
        assert spec.PR_sign == -1 and spec.TR_sign * spec.TP_sign == 1
        got = rl.kgroup_reflection(spec, 1)
        assert str(got) == "Z^2"

    def test_pr_anticommuting_complex(self):
        # PR=-RP with TRP=-RPT: the complex K-group of matching degree
        spec = spec_from_label("BDI", CR_sign=1, TR_sign=-1)
        assert spec.PR_sign == -1 and spec.TR_sign * spec.TP_sign == -1
        got = rl.kgroup_reflection(spec, 1)
        assert str(got) == "Z"
        got = rl.kgroup_reflection(spec, 2)
        assert str(got) == "0"

    def test_chiral_only_class(self):
        spec = spec_from_label("AIII", PR_sign=1)
        # complex class group evaluated one row down the point table
        assert str(rl.kgroup_reflection(spec, 1)) == str(rl.kgroup_point("AIII", 0))
        assert str(rl.kgroup_reflection(spec, 2)) == str(rl.kgroup_point("AIII", 1))

    def test_signs_missing(self):
        with pytest.raises(SymmetryError):
            rl.kgroup_reflection(spec_from_label("BDI"), 2)
        with pytest.raises(SymmetryError):
            rl.kgroup_reflection(spec_from_label("AII", TR_sign=1), 2)


class TestFrobeniusSchur:
    def test_trivial_group(self):
        ct = CharacterTable(order=1, class_sizes=[1], square_class=[0], chars=[[1]])
        assert rl.frobenius_schur_split(ct) == (1, 0, 0)

    def test_cyclic_three(self):
        assert rl.frobenius_schur_split(CharacterTable.cyclic(3)) == (1, 2, 0)

    def test_quaternion_group(self):
        chars = [
            [1, 1, 1, 1, 1],
            [1, 1, 1, -1, -1],
            [1, 1, -1, 1, -1],
            [1, 1, -1, -1, 1],
            [2, -2, 0, 0, 0],
        ]
        ct = CharacterTable(order=8, class_sizes=[1, 1, 2, 2, 2],
                            square_class=[0, 0, 1, 1, 1], chars=chars)
        n1, n0, nm1 = rl.frobenius_schur_split(ct)
        assert nm1 == 1
        assert (n1, n0) == (4, 0)

    def test_counts_sum(self):
        for k in (2, 3, 4, 5, 7, 8):
            ct = CharacterTable.cyclic(k)
            n1, n0, nm1 = rl.frobenius_schur_split(ct)
            assert n1 + n0 + nm1 == k
            assert n0 % 2 == 0

    def test_corrupt_table_rejected(self):
        # valid orthogonality but broken squaring map -> non-integral indicator
        chars = CharacterTable.cyclic(5).chars
        ct = CharacterTable(order=5, class_sizes=[1] * 5,
                            square_class=[0, 1, 1, 4, 4], chars=chars)
        with pytest.raises(SymmetryError):
            rl.frobenius_schur_split(ct)

    def test_json_loading(self):
        doc = {"order": 2, "classes": [{"size": 1, "square_class": 0},
                                       {"size": 1, "square_class": 0}],
               "chars": [[[1, 0], [1, 0]], [[1, 0], [-1, 0]]]}
        ct = CharacterTable.from_json(doc)
        assert rl.frobenius_schur_split(ct) == (2, 0, 0)


class TestVerifySymmetry:
    def test_real_symmetric_has_exact_T(self, chain200):
        rng = np.random.default_rng(1)
        mod = rl.SiteModule(chain200, 2, grading=np.array([1, -1]))
        from conftest import random_controlled
        H = random_controlled(mod, rng)
        Hre = rl.ControlledOperator(mod, (H.matrix + H.matrix.conj()) / 2,
                                    H.declared_propagation, hermitian=True)
        spec = SymmetrySpec(has_T=True, T_sq=1, T_unitary=np.eye(2))
        rep = rl.verify_symmetry(Hre, spec)
        assert rep.violations["T"] == 0.0

    def test_chiral_violation_is_max_diag(self, chain200):
        mod = rl.SiteModule(chain200, 2, grading=np.array([1, -1]))
        diag = np.repeat(np.linspace(0.1, 0.8, chain200.n), 2)
        H = rl.ControlledOperator(mod, np.diag(diag).astype(complex), 0.0)
        spec = SymmetrySpec(has_P=True, P_unitary=SZ)
        rep = rl.verify_symmetry(H, spec)
        assert rep.violations["P"] == pytest.approx(0.8)

    def test_kane_mele_time_reversal(self):
        ps = rl.generate({"kind": "honeycomb", "window": [[0, 8], [0, 8]]})
        module, H, spec = rl.build_model("kane_mele", {"lso": 0.06, "lv": 0.1}, ps)
        assert spec.T_sq == -1
        rep = rl.verify_symmetry(H, spec)
        assert rep.violations["T"] < 1e-12

    def test_group_covariance(self, square16):
        act = rl.cyclic_rotation_action(square16, 4,
                                        center=square16.coords.mean(axis=0),
                                        onsite_blocks=[np.eye(1)] * 4)
        mod = rl.SiteModule(square16, 1, grading=np.array([1]))
        # rotation-invariant onsite potential: radius-dependent
        r = np.linalg.norm(square16.coords - square16.coords.mean(axis=0), axis=1)
        H = rl.ControlledOperator(mod, np.diag(r).astype(complex), 0.0)
        spec = SymmetrySpec(action=act)
        rep = rl.verify_symmetry(H, spec)
        assert rep.violations["group"] < 1e-12

    def test_dimension_mismatch(self, chain200):
        mod = rl.SiteModule(chain200, 2)
        H = rl.identity(mod)
        spec = SymmetrySpec(has_P=True, P_unitary=np.eye(4))
        with pytest.raises(SymmetryError):
            rl.verify_symmetry(H, spec)
