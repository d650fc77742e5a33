import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hullsep.bodies import BallBody, PointSetBody, PolytopeBody
from hullsep.errors import DimensionMismatch, MaxIterExceeded, PreconditionError, StartNotInBody
from hullsep.oracles import hulls_intersect_lp
from hullsep.triangle_i import PairState, contraction_check, initialize, run, separation_residuals, step

from instances import planted_pair, slab_pair

PENTAGON = np.array([[0, 0], [4, 3], [8, 2], [7, 0], [5, -2]], dtype=float)


def test_initialize_singleton_takes_nearest_vertex():
    s = initialize(PointSetBody(PENTAGON), PointSetBody([[1, 5]]))
    assert np.array_equal(s.p, [4, 3]) and np.array_equal(s.p_prime, [1, 5])
    assert s.gap == pytest.approx(np.sqrt(13))


def test_initialize_balls_along_center_line():
    s = initialize(BallBody([-4, 0], 2.1), BallBody([4, 0], 2.1))
    assert s.p == pytest.approx([-1.9, 0]) and s.p_prime == pytest.approx([1.9, 0])


def test_initialize_explicit_start_unchanged():
    K = PointSetBody([[0, 0], [2, 0], [0, 2]])
    Kp = PointSetBody([[0, 0], [1, 1], [1, 0]])
    s = initialize(K, Kp, ([0.5, 0.25], [0.5, 0.25]))
    assert np.array_equal(s.p, [0.5, 0.25]) and np.array_equal(s.p_prime, [0.5, 0.25])
    assert s.gap == 0.0


def test_initialize_rejects_outside_start():
    with pytest.raises(StartNotInBody):
        initialize(PointSetBody(PENTAGON), PointSetBody([[1, 5]]), ([1, 5], [1, 5]))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        initialize(PointSetBody(PENTAGON), PointSetBody([[1, 5, 0]]))


def test_step_segment_example():
    K, Kp = PointSetBody([[0, 0], [4, 0]]), PointSetBody([[2, 1]])
    s0 = PairState.make([0, 0], [2, 1], coeffs_K=np.array([1.0, 0.0]), coeffs_K_prime=np.ones(1))
    outcome, s1, rec = step(s0, K, Kp)
    assert outcome == "Moved"
    assert np.array_equal(rec.pivot, [4, 0]) and rec.alpha == 0.5
    assert np.array_equal(s1.p, [2, 0]) and s1.gap == 1.0
    assert s1.coeffs_K == pytest.approx([0.5, 0.5])


def test_step_pentagon_witness_state():
    K, Kp = PointSetBody(PENTAGON), PointSetBody([[1, 5]])
    s0 = PairState.make([3, 1], [1, 5])
    assert step(s0, K, Kp)[0] == "NoPivot"


def test_step_needs_gap():
    K = PointSetBody(PENTAGON)
    with pytest.raises(PreconditionError):
        step(PairState.make([4, 3], [4, 3]), K, K)


def test_run_pentagon_witness():
    K, Kp = PointSetBody(PENTAGON), PointSetBody([[1, 5]])
    cert, trace = run(K, Kp, 0.01)
    assert cert.kind == "Witness"
    lo, hi = separation_residuals(K, Kp, cert.bisector)
    assert lo > 0 and hi > 0


def test_run_interior_point():
    K, Kp = PointSetBody([[0, 0], [2, 0], [0, 2]]), PointSetBody([[0.5, 0.5]])
    cert, trace = run(K, Kp, 1e-3)
    assert cert.kind == "Intersection"
    assert cert.pair.gap <= 1e-3 * cert.relative_gap_basis
    assert K.contains(cert.pair.p)


def test_run_equal_singletons():
    K = PointSetBody([[1, 1]])
    cert, trace = run(K, PointSetBody([[1, 1]]), 0.1)
    assert cert.kind == "Intersection" and trace.iterations == 0 and cert.pair.gap == 0.0


def test_run_polytope_vs_point():
    A = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=float)
    K = PolytopeBody(A, np.array([1, 0, 1, 0.0]))
    cert, _ = run(K, PointSetBody([[3, 0.5]]), 1e-3)
    assert cert.kind == "Witness"
    # singleton side: the witness gap is within a factor 2 of the distance 2
    assert 2.0 <= cert.pair.gap <= 4.0


def test_max_iter():
    K, Kp = PointSetBody([[0, 0], [2, 0], [0, 2]]), PointSetBody([[0.5, 0.5]])
    with pytest.raises(MaxIterExceeded) as exc:
        run(K, Kp, 1e-9, max_iter=1, start=([0, 2], [0.5, 0.5]))
    assert exc.value.trace.termination == "max-iter"
    assert exc.value.state is not None


def test_bad_eps():
    K = PointSetBody(PENTAGON)
    with pytest.raises(ValueError):
        run(K, K, 1.5)


def test_unknown_engine():
    K = PointSetBody(PENTAGON)
    with pytest.raises(ValueError):
        run(K, PointSetBody([[1, 5]]), 0.1, engine="sparse")


def test_contraction_case_i():
    # fixed p'=(0,0), mover p=(1,0), pivot far away at (0,3): delta=1 <= r=3
    c = contraction_check(1.0, 0.9, [0, 0], [1, 0], [0, 3])
    assert c.case == "i" and c.bound == pytest.approx(np.sqrt(1 - 1 / 36))
    assert c.holds


def test_contraction_flags_violation():
    c = contraction_check(1.0, 0.999999, [0, 0], [1, 0], [0, 3])
    assert not c.holds


def test_first_violation_is_seed_deterministic():
    rng = np.random.default_rng(3)
    V, Vp, _ = planted_pair(rng, 3, 12, 12)
    K, Kp = PointSetBody(V), PointSetBody(Vp)
    a = run(K, Kp, 1e-2, strategy="first-violation", seed=7, alternate_sides=True)[1]
    b = run(K, Kp, 1e-2, strategy="first-violation", seed=7, alternate_sides=True)[1]
    assert [s.pivot_index for s in a.steps] == [s.pivot_index for s in b.steps]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans())
def test_certificate_agrees_with_lp(seed, disjoint):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, 5))
    n, n_p = (int(k) for k in rng.integers(1, 10, 2))
    if disjoint:
        V, Vp, _, _ = slab_pair(rng, m, n, n_p, half_gap=0.3)
    else:
        V, Vp, _ = planted_pair(rng, m, n, n_p)
    K, Kp = PointSetBody(V), PointSetBody(Vp)
    cert, trace = run(K, Kp, 1e-2, alternate_sides=True)
    assert cert.kind == ("Witness" if disjoint else "Intersection")
    assert hulls_intersect_lp(V, Vp) == (not disjoint)
    assert not trace.contraction_violations()
    gaps = trace.gap_history
    assert all(b < a for a, b in zip(gaps, gaps[1:]))
