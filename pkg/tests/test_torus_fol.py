import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lensfol.errors import (FiberRankNot2, InvalidInput, NotDefinite, NotDiffeo, NotFoliated,
                            NotOrientationPreserving)
from lensfol.fn1d import compose, identity, invert, power_map, reversal, sample_diffeo
from lensfol.gamma_group import DELTA, E, LAMBDA, MU, TAU, GammaElem, mul
from lensfol.homog_bundle import HomogFn, QuadHomogField
from lensfol.torus_fol import (
    Retraction, TorusMap, angle_gap, apply, boundary_points, default_ray, g_A, identity_map,
    is_foliated, leaf_residual, map_residual, point_distance, random_directions, rotation,
    sample_points, sigma, sigma_with_report, stabilizer_residual, theta, to_level,
)

T = np.linspace(0.0, 1.0, 513)


def pts(f, n=1000, seed=0):
    return sample_points(f, n, np.random.default_rng(seed))


def as_complex(v):
    return v[:, 0] + 1j * v[:, 1]


def shear():
    def fwd(a, v):
        return a, v + np.array([0.1, 0.0])

    def inv(a, v):
        return a, v - np.array([0.1, 0.0])
    return TorusMap(fwd, inv, frozenset(), "shear")


def test_g_examples(round_f):
    a, v = pts(round_f)
    assert map_residual(g_A(E), identity_map(), (a, v)) == 0.0
    b, w = g_A(DELTA)(a, v)
    assert np.max(angle_gap(b, a)) < 1e-15
    assert np.max(np.abs(as_complex(w) - np.exp(1j * a) * as_complex(v))) < 1e-15
    b, w = g_A(TAU)(a, v)
    assert np.max(angle_gap(b, -a)) < 1e-15
    assert np.max(np.abs(as_complex(w) - np.conj(as_complex(v)))) == 0.0


def test_g_rank_check():
    with pytest.raises(FiberRankNot2):
        g_A(DELTA)(np.zeros(2), np.ones((2, 3)))


elems = st.builds(GammaElem, st.sampled_from((-1, 1)), st.sampled_from((-1, 1)), st.integers(-50, 50))


@settings(max_examples=50, deadline=None)
@given(elems, elems)
def test_g_homomorphism(A, B):
    p = pts(HomogFn.norm_power(2), 200)
    assert map_residual(g_A(A) @ g_A(B), g_A(mul(A, B)), p) <= 1e-12
    assert map_residual(g_A(A).inv @ g_A(A), identity_map(), p) <= 1e-12


def test_rotation_examples(round_f):
    p = pts(round_f)
    assert map_residual(rotation(0, 0), identity_map(), p) == 0.0
    assert map_residual(rotation(0.4, 1.1) @ rotation(2.0, -0.3), rotation(2.4, 0.8), p) <= 1e-12
    lam = g_A(LAMBDA)
    for alpha, beta in [(0.3, 0.7), (2.0, -1.0), (5.5, 4.0)]:
        p = pts(round_f, 100, seed=int(alpha * 10))
        assert map_residual(lam @ rotation(alpha, beta) @ lam, rotation(-alpha, beta), p) <= 1e-12
        assert map_residual(g_A(MU) @ rotation(alpha, beta) @ g_A(MU), rotation(alpha, -beta), p) <= 1e-12


def test_theta_examples(round_f):
    p = pts(round_f)
    assert map_residual(theta(identity(), round_f), identity_map(), p) < 1e-15
    a, v = p
    b, w = theta(power_map(2), round_f)(a, v)
    r = np.linalg.norm(v, axis=1)
    assert np.max(np.abs(w - r[:, None] * v)) < 1e-15
    assert np.array_equal(b, a)


def test_theta_identity_random(aniso, diffeos):
    for phi in diffeos[:5]:
        assert stabilizer_residual(phi, theta(phi, aniso), aniso, samples=10_000) <= 1e-10


def test_theta_guards(round_f):
    with pytest.raises(NotOrientationPreserving):
        theta(reversal(), round_f)
    indefinite = HomogFn.from_quadratic(QuadHomogField.constant(np.diag([1.0, -1.0])))
    with pytest.raises(NotDefinite):
        theta(identity(), indefinite)


def test_theta_inverse_round_trip(aniso, diffeos):
    p = pts(aniso, 2000)
    h = theta(diffeos[0], aniso)
    assert map_residual(h.inv @ h, identity_map(), p) <= 1e-10
    sq = theta(power_map(2), aniso)
    assert map_residual(sq @ sq.inv, identity_map(), p) <= 1e-10


def test_theta_homomorphism(aniso, diffeos):
    p = pts(aniso, 2000)
    for phi, psi in zip(diffeos[:4], diffeos[4:8]):
        lhs = theta(phi, aniso) @ theta(psi, aniso)
        assert map_residual(lhs, theta(compose(phi, psi), aniso), p) <= 1e-9


def test_sigma_examples(aniso, round_f, diffeos):
    assert np.max(np.abs(sigma(identity_map(), aniso)(T) - T)) < 1e-15
    psi = diffeos[3]
    assert np.max(np.abs(sigma(theta(psi, aniso), aniso)(T) - psi(T))) <= 1e-8
    with pytest.raises(NotDiffeo):
        sigma(identity_map(), round_f, HomogFn.norm_power(4))


def test_sigma_ray_independent(aniso, diffeos):
    h = theta(diffeos[5], aniso)
    rng = np.random.default_rng(1)
    base = sigma(h, aniso)(T)
    for _ in range(5):
        a = rng.uniform(0, 2 * np.pi, 1)
        u = random_directions(rng, 1)
        other = sigma(h, aniso, ray=(a, to_level(aniso, a, u, 1.0)))(T)
        assert np.max(np.abs(other - base)) <= 1e-8


def test_sigma_rejects_shear(round_f):
    with pytest.raises(NotFoliated):
        sigma(shear(), round_f)


def test_sigma_report(round_f):
    _, rep = sigma_with_report(rotation(1.0, 2.0), round_f)
    assert rep.diffeo and abs(rep.delta0 - 1.0) < 1e-6 and rep.spread < 1e-12


def test_default_ray_on_boundary(aniso):
    a, v = default_ray(aniso)
    assert abs(aniso(a, v)[0] - 1.0) < 1e-15
    # smallest eigenvalue of A(0) = diag(0.5, 2) is along e_1
    assert abs(abs(v[0, 0]) - np.sqrt(2.0)) < 1e-12


def test_foliation_examples(round_f, aniso, diffeos):
    assert is_foliated(rotation(0.3, 0.7), round_f).max_spread <= 1e-12
    assert is_foliated(theta(diffeos[0], aniso), aniso).max_spread <= 1e-10
    rep = is_foliated(shear(), round_f)
    assert rep.max_spread > 1e-2 and not rep.foliated


def test_stabilizer_examples(round_f, aniso, diffeos):
    assert stabilizer_residual(lambda s: s, rotation(1.0, 2.0), round_f) <= 1e-10
    assert stabilizer_residual(diffeos[2], theta(diffeos[2], aniso), aniso) <= 1e-10
    # max |t - t^2| = 1/4 at t = 1/2
    r = stabilizer_residual(lambda s: s, theta(power_map(2), aniso), aniso, samples=20_000)
    assert abs(r - 0.25) < 1e-3


def test_retract_leaf_preserving(round_f):
    h = rotation(0.3, 0.7) @ g_A(DELTA)
    R = Retraction(h, round_f)
    p = pts(round_f)
    for t in (0.0, 0.5, 1.0):
        assert map_residual(R(t), h, p) <= 1e-12


def test_retract_theta_to_identity(aniso, diffeos):
    R = Retraction(theta(diffeos[7], aniso), aniso)
    assert map_residual(R(1.0), identity_map(), pts(aniso)) <= 1e-8
    sq = Retraction(theta(power_map(2), aniso), aniso)
    assert leaf_residual(sq(1.0), aniso) <= 1e-8


def test_retract_composite_trajectory(round_f, diffeos):
    h = theta(diffeos[1], round_f) @ g_A(DELTA) @ rotation(0.3, 0.7)
    R = Retraction(h, round_f)
    assert np.max(np.abs(R.phi(T) - invert(diffeos[1])(T))) <= 1e-8
    res = [leaf_residual(R(t), round_f) for t in np.linspace(0, 1, 11)]
    assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))
    assert res[-1] <= 1e-8 and res[0] > 1e-3


def test_retract_fixes_boundary(aniso, diffeos):
    h = theta(diffeos[4], aniso) @ theta(diffeos[6], aniso)
    R = Retraction(h, aniso)
    b = boundary_points(aniso, 1000, np.random.default_rng(2))
    for t in np.linspace(0, 1, 6):
        assert map_residual(R(t), identity_map(), b) <= 1e-10


def test_retract_bad_t(round_f):
    with pytest.raises(InvalidInput):
        Retraction(identity_map(), round_f)(1.5)


def test_retract_rejects_unfoliated(round_f):
    with pytest.raises(NotFoliated):
        Retraction(shear(), round_f)


def test_apply_chunks(aniso, diffeos):
    a, v = pts(aniso, 5000)
    h = theta(diffeos[0], aniso)
    whole = h(a, v)
    chunked = apply(h, a, v, chunk=777)
    assert np.max(point_distance(whole, chunked)) < 1e-15


def test_sampling_levels(aniso):
    a, v = pts(aniso, 4000)
    vals = aniso(a, v)
    assert vals.min() >= 0.0 and vals.max() <= 1.0 + 1e-15
    b = boundary_points(aniso, 100, np.random.default_rng(0))
    assert np.max(np.abs(aniso(*b) - 1.0)) < 1e-14


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sigma_theta_property(seed):
    f = HomogFn.from_quadratic(QuadHomogField.rotated_diag(0.5, 2.0))
    phi = sample_diffeo(np.random.default_rng(seed))
    h = theta(phi, f)
    assert np.max(np.abs(sigma(h, f)(T) - phi(T))) <= 1e-8
    got = sigma(h, f)
    assert got(0.0) == pytest.approx(0.0, abs=1e-12) and got(1.0) == pytest.approx(1.0, abs=1e-12)
