import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ioncool.analytics import eit_dressed_params
from ioncool.hilbert import E, G, R, HilbertSpec, annihilation, internal_transition, number, sine_of_position
from ioncool.hilbert import thermal_state
from ioncool.liouville import lindblad_rhs
from ioncool.models import (
    EITParams,
    SWParams,
    angular_density,
    dressed_initial_state,
    eit_model,
    eit_resonant_detuning,
    recoil_quadrature,
    sw_model,
)

FIG5 = dict(eta_g=0.1, eta_r=-0.1, omega_g=4.0, omega_r=20.0, gamma_g=5.0, gamma_r=0.0, delta=103.0)


def test_ladder_matrix_elements():
    spec = HilbertSpec(2, 3)
    a = annihilation(spec).data
    ref = np.zeros((3, 3))
    for n in range(1, 3):
        ref[n - 1, n] = np.sqrt(n)
    np.testing.assert_allclose(a[:3, :3], ref)
    assert a[1, 2] == pytest.approx(1.41421356, abs=1e-8)
    np.testing.assert_allclose(np.diag(number(spec).data)[:3], [0, 1, 2])
    vac = np.zeros(6)
    vac[0] = 1
    np.testing.assert_allclose(annihilation(HilbertSpec(2, 2)).data @ np.eye(4)[0], 0)


def test_projector_algebra():
    spec = HilbertSpec(2, 4)
    ge, eg = internal_transition(spec, G, E), internal_transition(spec, E, G)
    np.testing.assert_allclose((ge @ eg).data, internal_transition(spec, G, G).data)
    np.testing.assert_allclose(ge.dag().data, eg.data)
    assert internal_transition(spec, E, E).trace() == 4


def test_sine_matrix_element_series():
    spec = HilbertSpec(2, 80)
    s = sine_of_position(spec, 0.1).data
    # <0| sin(eta x) |1> = eta exp(-eta^2/2)
    assert s[0, 1].real == pytest.approx(0.1 * np.exp(-0.005), abs=1e-12)
    assert s[0, 1].real == pytest.approx(0.09950, abs=1e-4)
    assert np.all(sine_of_position(spec, 0.0).data == 0)


def test_sine_position_third_order_gap():
    spec = HilbertSpec(2, 60)
    a = annihilation(spec).data
    x = a + a.conj().T
    low = slice(0, 20)  # away from the truncation edge
    gaps = [np.linalg.norm((sine_of_position(spec, eta).data - eta * x)[low, low], 2) for eta in (0.2, 0.1, 0.05)]
    ratios = np.array(gaps[:-1]) / np.array(gaps[1:])
    # ratio per halving approaches 8 from below as the O(eta^5) term dies out
    np.testing.assert_allclose(ratios, 8.0, rtol=0.1)
    assert ratios[1] > ratios[0]


def test_recoil_quadrature_moments():
    q = recoil_quadrature(5)
    kw = q.kernel_weights
    assert kw.sum() == pytest.approx(1.0, abs=1e-12)
    assert kw @ q.nodes == pytest.approx(0.0, abs=1e-12)
    assert kw @ q.nodes**2 == pytest.approx(0.4, abs=1e-10)
    assert angular_density(np.array([0.0, 1.0])) @ [1, 1] == pytest.approx(0.375 + 0.75)
    with pytest.raises(ValueError):
        recoil_quadrature(1)


def test_sw_eta_zero_is_diagonal():
    m = sw_model(SWParams(eta=0.0, omega=1.5, gamma=0.1, fock_levels=10))
    h = m.H.data
    np.testing.assert_allclose(h, np.diag(np.diag(h)))
    ref = np.concatenate([np.arange(10), 1.0 + np.arange(10)])
    np.testing.assert_allclose(np.diag(h).real, ref)


def test_sw_full_vs_ld1_third_order():
    gaps = []
    for eta in (0.2, 0.1, 0.05):
        kw = dict(eta=eta, omega=1.0, gamma=0.1, fock_levels=60)
        hf = sw_model(SWParams(**kw)).H.data.reshape(2, 60, 2, 60)[:, :20, :, :20].reshape(40, 40)
        hl = sw_model(SWParams(**kw, fidelity="ld1")).H.data.reshape(2, 60, 2, 60)[:, :20, :, :20].reshape(40, 40)
        gaps.append(np.linalg.norm(hf - hl, 2))
    slope = np.polyfit(np.log([0.2, 0.1, 0.05]), np.log(gaps), 1)[0]
    assert slope == pytest.approx(3.0, abs=0.15)


@pytest.mark.parametrize("fidelity", ["full", "ld1", "rsb"])
def test_sw_total_decay(fidelity):
    p = SWParams(0.1, 1.0, 0.3, fock_levels=12, fidelity=fidelity)
    k = sw_model(p).decay_operator()
    np.testing.assert_allclose(k, 0.3 * internal_transition(p.spec, E, E).data, atol=1e-10)


def test_eit_total_decay_and_dark_g():
    p = EITParams(**{**FIG5, "gamma_r": 1.0}, fock_levels=10)
    k = eit_model(p).decay_operator()
    np.testing.assert_allclose(k, 6.0 * internal_transition(p.spec, E, E).data, atol=1e-10)
    h = eit_model(EITParams(**{**FIG5, "omega_g": 0.0}, fock_levels=10)).H.data.reshape(3, 10, 3, 10)
    assert np.all(h[G, :, E, :] == 0) and np.all(h[E, :, G, :] == 0)


def test_two_level_decay_rhs():
    spec = HilbertSpec(2, 2)
    from ioncool.hilbert import DensityMatrix, Operator
    from ioncool.liouville import LindbladModel

    ge = internal_transition(spec, G, E)
    model = LindbladModel(Operator(spec, np.zeros((4, 4))), (np.sqrt(0.7) * ge,))
    rho = DensityMatrix(spec, internal_transition(spec, E, E).data / 2)
    out = lindblad_rhs(model, rho).data
    ref = 0.7 * (internal_transition(spec, G, G).data - internal_transition(spec, E, E).data) / 2
    np.testing.assert_allclose(out, ref)


def test_eit_resonant_detuning():
    assert eit_resonant_detuning(4.0, 20.0) == pytest.approx(103.0)
    assert eit_resonant_detuning(0.0, 20.0) == pytest.approx(99.0)
    with pytest.raises(ValueError):
        eit_resonant_detuning(1.0, 1.0)


@settings(max_examples=30, deadline=None)
@given(og=st.floats(0.1, 10.0), orr=st.floats(5.0, 30.0))
def test_resonant_detuning_inverts_dressed_energy(og, orr):
    d = eit_resonant_detuning(og, orr)
    q = eit_dressed_params(EITParams(**{**FIG5, "omega_g": og, "omega_r": orr, "delta": d}))
    assert q.energy_plus == pytest.approx(1.0, abs=1e-12)


def test_dressed_reduced_model_structure():
    p = EITParams(**FIG5, fidelity="dressed_reduced", fock_levels=20)
    assert p.spec.internal_dim == 2
    m = eit_model(p)
    q = eit_dressed_params(p)
    np.testing.assert_allclose(m.decay_operator(), q.gamma_eff * internal_transition(p.spec, 1, 1).data,
                               atol=1e-14)


def test_dressed_initial_state():
    spec = HilbertSpec(2, 61)
    rho = dressed_initial_state(spec, 4.0)
    assert rho.trace() == pytest.approx(1.0, abs=1e-12)
    n = np.real(np.diag(rho.data)).reshape(2, 61) @ np.arange(61)
    # mean phonon number n0 - n0 / (2 (1 + n0)) = 3.6
    assert n.sum() == pytest.approx(3.6, abs=1e-3)


def test_parameter_validation():
    with pytest.raises(ValueError, match="eta"):
        SWParams(eta=-0.1, omega=1.0, gamma=0.1)
    with pytest.raises(ValueError, match="fidelity"):
        SWParams(eta=0.1, omega=1.0, gamma=0.1, fidelity="bogus")
    with pytest.raises(ValueError, match="fock_levels"):
        EITParams(**FIG5, fock_levels=1)


def test_thermal_default_truncation_holds_default_n0():
    for p in (SWParams(0.1, 1.5, 0.1), EITParams(**FIG5)):
        thermal_state(p.spec, p.n0)  # no TruncationError


def test_eit_r_level_is_third():
    assert (G, E, R) == (0, 1, 2)
