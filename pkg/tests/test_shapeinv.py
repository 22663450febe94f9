from __future__ import annotations

import numpy as np
import pytest

from ssusy_em import fd, mass, shapeinv, susy2
from ssusy_em.domain import (
    AlgebraicMass,
    Branch,
    Classification,
    ConstantMass,
    Grid,
    HyperbolicMass,
    SequenceTerminated,
    SIParams,
    SpectrumEntry,
    UnderResolved,
)
from ssusy_em.shapeinv import Regime

# frozen singularity data for the shipped benchmark models
NODE_HYP_G1_L4 = -0.12915896548065575
NODE_ALG2_G1_L2 = -0.2525875151150103
STRENGTH_FIG3 = -0.03787058245081089
STRENGTH_FIG5 = 0.19927196266318736
STRENGTH_MERGED = -0.07137318189915609


@pytest.mark.parametrize(
    "lam, k3, regime, kappa",
    [
        (4.0, 4.0, Regime.LARGE, None),
        (6.0, 4.0, Regime.LARGE, None),
        (4.0, 0.0, Regime.LARGE, None),
        (2.0, 4.0, Regime.BOUNDARY, 1),
        (1.0, 4.0, Regime.BOUNDARY, 2),
        (0.5, 4.0, Regime.BOUNDARY, 4),
        (1.5, 4.0, Regime.INTERIOR, 1),
        (0.9, 4.0, Regime.INTERIOR, 2),
    ],
)
def test_regime_classification(lam, k3, regime, kappa):
    got_regime, got_kappa = shapeinv.classify_regime(SIParams(lam, k3, 5.0, 1.0))
    assert got_regime is regime
    assert got_kappa == kappa


def test_regime_commensurate_despite_rounding():
    # 2 * 3 * (4/6) only equals 4 up to roundoff, yet the ratio is exact
    got_regime, got_kappa = shapeinv.classify_regime(SIParams(4.0 / 6.0, 4.0, 5.0, 1.0))
    assert got_regime is Regime.BOUNDARY
    assert got_kappa == 3


def test_spectrum_rejects_negative_count(osc_model):
    with pytest.raises(ValueError, match="nonnegative"):
        shapeinv.spectrum(osc_model, -1)


def test_spectrum_tied_evenly_spaced(osc_model):
    entries = shapeinv.spectrum(osc_model, 4)
    assert [e.energy for e in entries] == [-4.5, -0.5, 3.5, 7.5, 11.5]
    assert [e.branch for e in entries] == [
        Branch.J2, Branch.J1, Branch.J2, Branch.J1, Branch.J2,
    ]
    assert [e.ladder_power for e in entries] == [0, 0, 1, 1, 2]
    assert [e.n for e in entries] == list(range(5))
    assert all(e.regular for e in entries)


def test_spectrum_split_alternating(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(6.0, 4.0, 5.0, 1.0), model_grid)
    entries = shapeinv.spectrum(model, 5)
    assert [e.energy for e in entries] == [-4.5, -0.5, 7.5, 11.5, 19.5, 23.5]
    assert all(e.regular for e in entries)


def test_spectrum_boundary_single_ladder(rational_profile, rational_params, model_grid):
    model = shapeinv.build_model(rational_profile, rational_params, model_grid)
    entries = shapeinv.spectrum(model, 5)
    assert [e.energy for e in entries] == [-4.5 + 4.0 * n for n in range(6)]
    assert all(e.branch is Branch.J2 for e in entries)
    assert [e.regular for e in entries] == [False, True, True, True, True, True]


def test_spectrum_interior_band(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(1.5, 4.0, 5.0, 1.0), model_grid)
    entries = shapeinv.spectrum(model, 5)
    assert [e.energy for e in entries] == [-4.5, -1.5, -0.5, 1.5, 2.5, 4.5]
    assert [e.branch for e in entries] == [
        Branch.J2, Branch.J2, Branch.J1, Branch.J2, Branch.J1, Branch.J2,
    ]
    assert [e.ladder_power for e in entries] == [0, 1, 0, 2, 1, 3]
    # only the smooth branch stays regular across an attractive-core node
    assert [e.regular for e in entries] == [False, False, True, False, True, False]


def test_spectrum_merged_single_sequence(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(4.0, 0.0, 5.0, 1.0), model_grid)
    entries = shapeinv.spectrum(model, 3)
    assert [e.energy for e in entries] == [-2.5, 5.5, 13.5, 21.5]
    assert [e.ladder_power for e in entries] == [0, 1, 2, 3]
    assert all(e.regular for e in entries)


def test_spectrum_large_spacing_alternates():
    rng = np.random.default_rng(20240817)
    for _ in range(12):
        lam = rng.uniform(2.2, 4.5)
        k3 = rng.uniform(0.1, 1.9 * lam)
        params = SIParams(lam, k3, 5.0, 1.0)
        assert shapeinv.classify_regime(params)[0] is Regime.LARGE
        model = shapeinv.build_model(HyperbolicMass(2.0, 1.0), params, Grid.symmetric(6.0, 801))
        energies = np.array([e.energy for e in shapeinv.spectrum(model, 6)])
        gaps = np.diff(energies)
        assert np.allclose(gaps[0::2], k3, rtol=0.0, atol=1e-12)
        assert np.allclose(gaps[1::2], 2.0 * lam - k3, rtol=0.0, atol=1e-12)


def test_spectrum_sorted_in_every_regime():
    rng = np.random.default_rng(6021)
    grid = Grid.symmetric(6.0, 801)
    for _ in range(12):
        lam = rng.uniform(0.3, 1.9)
        model = shapeinv.build_model(HyperbolicMass(2.0, 1.0), SIParams(lam, 4.0, 5.0, 1.0), grid)
        energies = np.array([e.energy for e in shapeinv.spectrum(model, 9)])
        assert np.all(np.diff(energies) >= -1e-9)


def test_spectrum_continuous_at_commensurate_point(osc_profile, model_grid):
    # levels merge pairwise as the spacing approaches half the splitting,
    # so every commensurate energy is approached by the nearby spectra
    delta = 1e-6
    bnd = [
        e.energy
        for e in shapeinv.spectrum(
            shapeinv.build_model(osc_profile, SIParams(2.0, 4.0, 5.0, 1.0), model_grid), 3
        )
    ]
    for lam in (2.0 - delta, 2.0 + delta):
        model = shapeinv.build_model(osc_profile, SIParams(lam, 4.0, 5.0, 1.0), model_grid)
        off = np.array([e.energy for e in shapeinv.spectrum(model, 9)])
        worst = max(min(abs(off - b)) for b in bnd)
        assert worst < 2e-5


def test_boundary_energies_coincide_across_branches():
    params = SIParams(2.0, 4.0, 5.0, 1.0)
    kappa = shapeinv.classify_regime(params)[1]
    for n in range(kappa, 6):
        from_j2 = params.eta2 + 2.0 * n * params.lam
        from_j1 = params.eta1 + 2.0 * (n - kappa) * params.lam
        assert from_j2 == from_j1


def test_si_potential_matches_scheme(osc_model, rational_profile, rational_params, model_grid):
    models = [
        osc_model,
        shapeinv.build_model(rational_profile, rational_params, model_grid),
    ]
    for model in models:
        scale = np.max(np.abs(model.scheme.v_plus.values))
        dev = np.max(np.abs(model.v_si.values - model.scheme.v_plus.values))
        assert dev < 1e-12 * scale


def test_constant_profile_equals_cm_limit():
    grid = Grid.symmetric(6.0, 2401)
    params = SIParams(2.0, 2.0, 3.0, 0.5)
    v_si = shapeinv.si_potential(ConstantMass(1.0), params, grid)
    v_cm = shapeinv.cm_limit_potential(params, grid)
    assert np.max(np.abs(v_si.values - v_cm.values)) <= 1e-12


def test_flat_algebraic_profile_equals_cm_limit():
    grid = Grid.symmetric(6.0, 2401)
    params = SIParams(2.0, 2.0, 3.0, 0.5)
    v_si = shapeinv.si_potential(AlgebraicMass(1.0), params, grid)
    v_cm = shapeinv.cm_limit_potential(params, grid)
    assert np.max(np.abs(v_si.values - v_cm.values)) <= 1e-12


def test_singularity_tied_node_cancels(osc_model):
    report = shapeinv.singularity(osc_model)
    assert report.node == pytest.approx(NODE_HYP_G1_L4, abs=1e-12)
    assert report.strength == 0.0
    assert report.classification is Classification.NON_SINGULAR
    assert report.admissible


def test_singularity_attractive_core(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(6.0, 4.0, 5.0, 1.0), model_grid)
    report = model.singularity
    assert report.strength == pytest.approx(STRENGTH_FIG3, rel=1e-12)
    assert report.classification is Classification.ATTRACTIVE
    assert report.admissible


def test_singularity_repulsive_core(rational_profile, rational_params, model_grid):
    model = shapeinv.build_model(rational_profile, rational_params, model_grid)
    report = model.singularity
    assert report.node == pytest.approx(NODE_ALG2_G1_L2, abs=1e-12)
    assert report.strength == pytest.approx(STRENGTH_FIG5, rel=1e-12)
    assert report.classification is Classification.REPULSIVE
    assert report.admissible


def test_singularity_merged_splitting(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(4.0, 0.0, 5.0, 1.0), model_grid)
    report = model.singularity
    assert report.strength == pytest.approx(STRENGTH_MERGED, rel=1e-12)
    assert report.classification is Classification.ATTRACTIVE
    assert report.admissible


def test_singularity_without_node(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(4.0, 4.0, 5.0, 100.0), model_grid)
    report = model.singularity
    assert report.node is None
    assert report.strength is None
    assert report.classification is Classification.NON_SINGULAR
    assert report.admissible


def test_singularity_inadmissible_strength(rational_profile, model_grid):
    model = shapeinv.build_model(rational_profile, SIParams(0.5, 4.0, 5.0, 1.0), model_grid)
    report = model.singularity
    assert report.strength == pytest.approx(7.679744804705207, rel=1e-10)
    assert report.classification is Classification.REPULSIVE
    assert not report.admissible


def test_ladder_matches_closed_form_powers(osc_model):
    grid = Grid.symmetric(8.0, 3201)
    entries = shapeinv.spectrum(osc_model, 4)
    # n = 2, 4 raise the even seed once and twice; n = 3 raises the odd seed
    for n, tol in ((2, 1e-5), (3, 1e-6), (4, 1e-5)):
        lad = shapeinv.ladder_state(osc_model, entries[n], grid)
        clo = shapeinv.closed_form_state(osc_model, entries[n], grid)
        assert np.max(np.abs(lad.values - clo.values)) < tol


def test_closed_form_rejects_high_power(osc_model):
    grid = Grid.symmetric(8.0, 3201)
    entry = SpectrumEntry(n=6, energy=19.5, branch=Branch.J2, ladder_power=3, regular=True)
    with pytest.raises(ValueError, match="power"):
        shapeinv.closed_form_state(osc_model, entry, grid)


def test_boundary_state_reseeds_on_smooth_branch(rational_profile, rational_params, model_grid):
    model = shapeinv.build_model(rational_profile, rational_params, model_grid)
    node = model.singularity.node
    grid = Grid.from_interval(node + 2e-3, 8.0, 3201)
    entry = shapeinv.spectrum(model, 1)[1]
    lad = shapeinv.ladder_state(model, entry, grid)
    swapped = SpectrumEntry(
        n=entry.n, energy=entry.energy, branch=Branch.J1, ladder_power=0, regular=True
    )
    clo = shapeinv.closed_form_state(model, swapped, grid)
    assert np.max(np.abs(lad.values - clo.values)) < 1e-12


def test_raising_acts_as_polynomial_on_smooth_seed(rational_profile, rational_params):
    # away from the node the raised smooth seed is an exact polynomial
    # multiple of the seed itself
    grid = Grid.from_interval(0.5, 8.0, 3001)
    scheme = susy2.build_scheme(rational_profile, rational_params, grid)
    seed = susy2.zero_modes(scheme).psi_plus[0]
    raised = susy2.apply_A_dagger(scheme, seed)
    g = mass.g_function(rational_profile, rational_params, grid.x)
    expect = (g * g - rational_params.k3 - 2.0 * rational_params.lam) * seed.values
    sl = fd.interior_slice(grid.n)
    got = raised.values[sl] / np.max(np.abs(raised.values[sl]))
    ref = expect[sl] / np.max(np.abs(expect[sl]))
    assert np.max(np.abs(got - ref)) < 1e-8


def test_ladder_checks_resolution(osc_model):
    small = Grid.symmetric(1.0, 1201)
    entries = shapeinv.spectrum(osc_model, 7)
    with pytest.raises(UnderResolved, match="edge"):
        shapeinv.ladder_state(osc_model, entries[7], small)
    ground = shapeinv.ladder_state(osc_model, entries[0], small)
    assert fd.l2_norm(ground.values, small.h) == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("j", [0, 1])
def test_raising_annihilates_adjoint_kernel(j):
    scheme = susy2.build_scheme(
        ConstantMass(1.0), SIParams(1.0, 1.0, 3.0, 0.0), Grid.symmetric(2.0, 4001)
    )
    modes = susy2.zero_modes(scheme)
    with pytest.raises(SequenceTerminated):
        shapeinv.ladder_step(scheme, modes.psi_minus[j])


def test_oracle_family_keeps_all_without_core(osc_model, osc_profile, model_grid):
    entries = shapeinv.spectrum(osc_model, 4)
    assert shapeinv.oracle_family(osc_model, entries) == entries
    far = shapeinv.build_model(osc_profile, SIParams(4.0, 4.0, 5.0, 100.0), model_grid)
    far_entries = shapeinv.spectrum(far, 3)
    assert shapeinv.oracle_family(far, far_entries) == far_entries


def test_oracle_family_keeps_smooth_branch(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(6.0, 4.0, 5.0, 1.0), model_grid)
    family = shapeinv.oracle_family(model, shapeinv.spectrum(model, 5))
    assert [e.energy for e in family] == [-0.5, 11.5, 23.5]
    model = shapeinv.build_model(osc_profile, SIParams(1.5, 4.0, 5.0, 1.0), model_grid)
    family = shapeinv.oracle_family(model, shapeinv.spectrum(model, 5))
    assert [e.energy for e in family] == [-0.5, 2.5]


def test_oracle_family_boundary_drops_seed(rational_profile, rational_params, model_grid):
    model = shapeinv.build_model(rational_profile, rational_params, model_grid)
    family = shapeinv.oracle_family(model, shapeinv.spectrum(model, 5))
    assert [e.n for e in family] == [1, 2, 3, 4, 5]


def test_oracle_family_merged_is_empty(osc_profile, model_grid):
    model = shapeinv.build_model(osc_profile, SIParams(4.0, 0.0, 5.0, 1.0), model_grid)
    assert shapeinv.oracle_family(model, shapeinv.spectrum(model, 4)) == []
