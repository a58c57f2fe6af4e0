"""Special-frame reduction (a, b, c, |H|) and the traceless splitting."""

import numpy as np
import pytest

from pinchflow.errors import BadDims
from pinchflow.frames import reconstruct, specialize, split_traceless
from pinchflow.identities import kperp_scalar, norms_batch


def special_example():
    # frame already special: A_1 = diag(2.2, 0.8), A_2 = [[0.3, 0.5], [0.5, -0.3]]
    h = np.zeros((2, 2, 2))
    h[:, :, 0] = np.diag([2.2, 0.8])
    h[:, :, 1] = np.array([[0.3, 0.5], [0.5, -0.3]])
    return h


def random_h(rng, count):
    h = rng.uniform(-1.0, 1.0, size=(count, 2, 2, 2))
    return 0.5 * (h + np.swapaxes(h, 1, 2))


def test_specialize_on_already_special_input():
    fr = specialize(special_example())
    assert abs(fr.a - 0.7) < 1e-12
    assert abs(fr.b - 0.3) < 1e-12
    assert abs(fr.c - 0.5) < 1e-12
    assert abs(fr.h_norm - 3.0) < 1e-12
    # K_perp = 2ac and the traceless norm from the frame scalars
    assert abs(kperp_scalar(special_example()) - 0.7) < 1e-12
    assert abs(2 * (fr.a**2 + fr.b**2 + fr.c**2) - 1.66) < 1e-12


def test_specialize_zero_input():
    fr = specialize(np.zeros((2, 2, 2)))
    assert fr.a == 0.0 and fr.b == 0.0 and fr.c == 0.0 and fr.h_norm == 0.0


def test_specialize_rejects_wrong_dims():
    with pytest.raises(BadDims):
        specialize(np.zeros((3, 3, 2)))


def test_roundtrip_and_invariants_random():
    """reconstruct(specialize(h)) == h, plus the three frame identities."""
    rng = np.random.default_rng(42)
    h = random_h(rng, 2000)
    _, _, traceless2 = norms_batch(h)
    for row, t2 in zip(h, traceless2):
        fr = specialize(row)
        assert fr.a >= 0.0
        back = reconstruct(fr)
        assert np.abs(back - row).max() < 1e-10
        assert abs(2 * (fr.a**2 + fr.b**2 + fr.c**2) - t2) < 1e-10
        assert abs(abs(float(kperp_scalar(row))) - 2.0 * fr.a * abs(fr.c)) < 1e-10


def test_specialize_tangent_rotation_invariance():
    # a, b^2, c^2, |H| are gauge-invariant once the frame is canonicalized
    rng = np.random.default_rng(7)
    for _ in range(200):
        h = random_h(rng, 1)[0]
        fr = specialize(h)
        th = rng.uniform(0, 2 * np.pi)
        rot = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
        hr = np.einsum("ki,lj,ija->kla", rot, rot, h)
        fr2 = specialize(hr)
        assert abs(fr.a - fr2.a) < 1e-9
        assert abs(fr.b**2 - fr2.b**2) < 1e-9
        assert abs(fr.c**2 - fr2.c**2) < 1e-9
        assert abs(fr.h_norm - fr2.h_norm) < 1e-12


def test_h_zero_fallback_is_deterministic():
    # H = 0, h_1 = diag(1, -1), h_2 = 0: the fallback picks the first normal
    h = np.zeros((2, 2, 2))
    h[:, :, 0] = np.diag([1.0, -1.0])
    fr = specialize(h)
    assert abs(fr.a - 1.0) < 1e-12
    assert abs(fr.b) < 1e-12 and abs(fr.c) < 1e-12
    assert fr.h_norm == 0.0


def test_h_zero_fallback_veronese_type():
    # minimal surface with a = c = 1/sqrt(3), b = 0; fallback must recover it
    r = 1.0 / np.sqrt(3.0)
    h = np.zeros((2, 2, 2))
    h[:, :, 0] = np.diag([r, -r])
    h[:, :, 1] = np.array([[0.0, r], [r, 0.0]])
    fr = specialize(h)
    assert abs(fr.a - r) < 1e-10
    assert abs(fr.b) < 1e-10
    assert abs(abs(fr.c) - r) < 1e-10
    assert abs(abs(kperp_scalar(h)) - 2.0 / 3.0) < 1e-12


def test_split_traceless_flat_torus_values():
    # principal curvatures r2/r1 = 4/3 and -r1/r2 = -3/4 in the first normal
    h = np.zeros((2, 2, 2))
    h[:, :, 0] = np.diag([4.0 / 3.0, -3.0 / 4.0])
    sp = split_traceless(h)
    assert abs(sp.normA1_2 - 2.0 * (25.0 / 24.0) ** 2) < 1e-10
    assert sp.normAminus_2 < 1e-12


def test_split_traceless_special_example():
    sp = split_traceless(special_example())
    assert abs(sp.normA1_2 - 0.98) < 1e-10
    assert abs(sp.normAminus_2 - 0.68) < 1e-10


def test_split_traceless_zero():
    sp = split_traceless(np.zeros((2, 2, 2)))
    assert sp.normA1_2 == 0.0 and sp.normAminus_2 == 0.0


def test_split_traceless_sums_to_traceless_norm():
    rng = np.random.default_rng(11)
    h = random_h(rng, 500)
    _, _, traceless2 = norms_batch(h)
    for row, t2 in zip(h, traceless2):
        sp = split_traceless(row)
        assert abs(sp.normA1_2 + sp.normAminus_2 - t2) < 1e-10
