"""Acceptance gate: one test per criterion, each printing a single PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``. The heavy sweeps are
shared between criteria through module-scoped fixtures.
"""

import filecmp

import numpy as np
import pytest

from toruswalk.cli import run_cli
from toruswalk.evolution import evolve, grover_coin
from toruswalk.fitting import fit_power_law
from toruswalk.lattice import LatticeGeometry, make_localized_uniform_coin
from toruswalk.limiting import (
    average_distribution,
    limiting_closed_form_origin,
    limiting_distribution,
    peak_count,
    peak_locations,
)
from toruswalk.mixing import (
    aharonov_bound,
    classical_mixing_baseline,
    classical_mixing_time,
    distance_trace,
    scaling_sweep,
)
from toruswalk.search import run_search, search_mixing_comparison, search_scaling
from toruswalk.spectral import asymptotic_gap, build_eigensystem, fourier_evolve

pytestmark = pytest.mark.slow

SWEEP_SIDES = list(range(21, 102, 10))
SWEEP_EPSILONS = [0.1, 0.2, 0.3, 0.4, 0.5]
U = np.full(4, 0.5)


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
        return ok

    return emit


@pytest.fixture(scope="module")
def grover_sweep():
    return scaling_sweep(SWEEP_SIDES, SWEEP_EPSILONS, coin_kind="grover")


def test_c01_eigen_residuals(verdict):
    worst_res, worst_overlap = 0.0, 0.0
    for side in (3, 5, 7, 41, 101):
        es = build_eigensystem(LatticeGeometry(side))
        vecs, lams = es.eigenvectors, es.eigenvalues
        r = np.einsum("xyab,xybj->xyaj", es.matrices, vecs) - vecs * lams[:, :, None, :]
        worst_res = max(worst_res, np.linalg.norm(r, axis=2).max())
        overlap = np.einsum("xycj,c->xyj", vecs.conj(), U)[..., 2:]
        overlap[0, 0] = 1 / np.sqrt(2)
        worst_overlap = max(worst_overlap, np.abs(overlap - 1 / np.sqrt(2)).max())
        assert es.closed_form.all()
    ok = worst_res < 1e-10 and worst_overlap < 1e-12
    verdict(1, ok, f"max residual {worst_res:.2e} (<1e-10), max |<nu|u> - 1/sqrt2| {worst_overlap:.2e} (<1e-12)")
    assert ok


def test_c02_evolution_equivalence(verdict):
    worst = 0.0
    for side in (3, 5, 41):
        g = LatticeGeometry(side)
        es = build_eigensystem(g)
        state = make_localized_uniform_coin(g)
        done = 0
        for t in (1, 2, 10, 100, 500):
            state = evolve(state, grover_coin(), t - done)
            done = t
            diff = np.abs(state.amplitudes - fourier_evolve(g, t, eigensystem=es).amplitudes).max()
            worst = max(worst, diff)
    ok = worst < 1e-10
    verdict(2, ok, f"max amplitude difference {worst:.2e} (<1e-10)")
    assert ok


def test_c03_limiting_exactness(verdict):
    worst = 0.0
    for side in range(3, 42, 2):
        g = LatticeGeometry(side)
        pi = limiting_distribution(g, make_localized_uniform_coin(g))
        worst = max(worst, abs(pi[0, 0] - limiting_closed_form_origin(g)))
        if side == 41:
            peaks = peak_locations(pi)
            strict = peak_count(pi, rel_height=0)
            global_max = tuple(int(v) for v in np.unravel_index(np.argmax(pi.probabilities), (side, side)))
    ok = worst < 1e-10 and peaks == [(0, 0)] and global_max == (0, 0)
    verdict(3, ok, f"max |pi(0,0) - closed form| {worst:.2e} (<1e-10); side 41 dominant peaks {peaks}, "
                   f"global max at {global_max} ({strict} strict local maxima in total)")
    assert ok


def test_c04_averaging_convergence(verdict):
    g = LatticeGeometry(5)
    s = make_localized_uniform_coin(g)
    trace = distance_trace(g, grover_coin(), s, limiting_distribution(g, s), 10**6)
    final = trace.average[-1]
    T = np.unique(np.round(np.logspace(3, 5, 41)).astype(int))
    fit = fit_power_law(T, trace.average[T - 1])
    slope = fit["exponent"]
    ok = final < 5e-3 and abs(slope + 1) <= 0.2
    verdict(4, ok, f"TV at T=1e6 {final:.3e} (<5e-3); log-log slope over [1e3,1e5] {slope:.3f} (-1 +/- 0.2)")
    assert ok


def test_c05_bound_compliance(verdict):
    details, ok = [], True
    for side in (3, 5, 7, 9):
        g = LatticeGeometry(side)
        s = make_localized_uniform_coin(g)
        trace = distance_trace(g, grover_coin(), s, limiting_distribution(g, s), 10_000)
        bound = aharonov_bound(g, build_eigensystem(g).gap, trace.t)
        margin = float(np.min(bound - trace.average))
        ok &= margin >= 0
        details.append(f"side {side} min(bound - TV) {margin:.3e}")
    verdict(5, ok, "; ".join(details) + " over T=1..1e4")
    assert ok


def test_c06_gap_scaling(verdict):
    sides = list(range(5, 102, 2))
    gaps = np.array([build_eigensystem(LatticeGeometry(s)).gap for s in sides])
    scaled = gaps * np.array(sides)
    fit = fit_power_law(np.array(sides) ** 2, scaled, model="gap*sqrt(N) vs N")
    g = LatticeGeometry(101)
    es = build_eigensystem(g)
    a, b = es.gap_pair()
    predicted = asymptotic_gap(g, a[:2], b[:2])
    rel = abs(predicted - es.gap) / es.gap
    bounded = abs(fit["exponent"]) <= 0.1
    ok = bounded and rel <= 0.1
    verdict(6, ok, f"gap*sqrt(N) from {scaled[0]:.3g} (side 5) to {scaled[-1]:.3g} (side 101), "
                   f"power-law exponent in N {fit['exponent']:.2f} (|.|<=0.1 for bounded); "
                   f"side 101 gap {es.gap:.3e} between modes {tuple(map(int, a[:2]))},{tuple(map(int, b[:2]))}, "
                   f"asymptotic form {predicted:.3e}, relative error {rel:.2e} (<=0.1)")
    assert ok


def test_c07_mixing_scaling(verdict, grover_sweep):
    r2 = {eps: f.r_squared for eps, f in grover_sweep.size_fits.items()}
    c = grover_sweep.joint_fit["exponent"]
    per_side = [grover_sweep.epsilon_fits[s]["exponent"] for s in SWEEP_SIDES]
    ok = (
        not grover_sweep.flagged
        and set(r2) == set(SWEEP_EPSILONS)
        and min(r2.values()) >= 0.95
        and 0.8 <= c <= 1.2
    )
    verdict(7, ok, f"min R^2 over eps {min(r2.values()):.4f} (>=0.95); joint c {c:.3f} in [0.8,1.2] "
                   f"(per-side c {min(per_side):.2f}..{max(per_side):.2f}); unreached {len(grover_sweep.flagged)}")
    assert ok


def test_c08_search_landmark(verdict):
    r41 = run_search(LatticeGeometry(41), (0, 0), 600)
    sc = search_scaling(range(11, 102, 10))
    scaled = {s: sc.success_scaled[s] for s in (21, 41, 61, 81)}
    spread = max(scaled.values()) / min(scaled.values())
    fit = sc.first_max_fit
    ok = r41.found and abs(r41.first_max_step - 80) <= 2 and spread <= 2 and fit.r_squared >= 0.9
    verdict(8, ok, f"side 41 t*={r41.first_max_step} (80+/-2), p*={r41.first_max_probability:.4f}; "
                   f"p* ln N spread {spread:.3f} (<=2) over 21..81; t* vs sqrt(N ln N) R^2 {fit.r_squared:.4f} (>=0.9)")
    assert ok


def test_c09_marked_mixing(verdict):
    eps = [0.1, 0.2, 0.3]
    sweep = scaling_sweep(SWEEP_SIDES, eps, coin_kind="marked")
    r2 = {e: f.r_squared for e, f in sweep.size_fits.items()}
    rep = search_mixing_comparison(LatticeGeometry(41), (0, 0), 0.1)
    contrast = rep.marked_minima >= 5 * max(rep.grover_minima, 1)
    ok = not sweep.flagged and set(r2) == set(eps) and min(r2.values()) >= 0.95 and contrast
    verdict(9, ok, f"marked-walk R^2 per eps {', '.join(f'{e:g}:{v:.4f}' for e, v in r2.items())} (>=0.95); "
                   f"side 41 sub-band minima marked {rep.marked_minima} vs grover {rep.grover_minima} (>=5x)")
    assert ok


def test_c10_classical_contrast(verdict, grover_sweep):
    _, fit = classical_mixing_baseline(range(5, 42, 2), 0.1)
    quantum = {
        r.parameters["side"]: r.outputs["M_eps"]
        for r in grover_sweep.records
        if r.parameters["epsilon"] == 0.1 and r.parameters["side"] >= 41
    }
    classical = {s: classical_mixing_time(LatticeGeometry(s), 0.1)[0] for s in quantum}
    slower = all(classical[s] > quantum[s] for s in quantum)
    beta = fit["exponent"]
    ok = 0.8 <= beta <= 1.2 and slower and len(quantum) > 0
    verdict(10, ok, f"classical beta {beta:.3f} in [0.8,1.2]; side 41 classical {classical[41]} vs quantum "
                    f"M_0.1 {quantum[41]}; classical slower on all sides {sorted(quantum)}: {slower}")
    assert ok


def test_c11_even_lattice_two_peaks(verdict):
    g = LatticeGeometry(40)
    avg = average_distribution(g, grover_coin(), make_localized_uniform_coin(g), 10_000)
    peaks = peak_locations(avg)
    ok = len(peaks) == 2
    verdict(11, ok, f"side 40 P(T=1e4) dominant peaks {peaks} (expect 2)")
    assert ok


DETERMINISM_RUNS = [
    ["spectrum", "--side", "41"],
    ["limiting", "--side", "41"],
    ["limiting", "--side", "40"],
    ["mixing", "--side", "5", "--epsilon", "0.1", "--epsilon", "0.3"],
    ["search", "--side", "41", "--dump-snapshot-at", "80"],
    ["classical", "--sides", "5", "9", "13", "17", "21"],
    ["reproduce", "fig1", "--side", "41"],
    ["reproduce", "fig3", "--side", "41"],
]


def test_c12_determinism(verdict, tmp_path):
    compared = 0
    mismatched = []
    for i, argv in enumerate(DETERMINISM_RUNS):
        dirs = [tmp_path / f"run{i}_{k}" for k in range(2)]
        for d in dirs:
            assert run_cli(argv + ["--out", str(d)]) == 0
        cmp = filecmp.dircmp(dirs[0], dirs[1])
        names = sorted(p.name for p in dirs[0].iterdir())
        _, bad, errors = filecmp.cmpfiles(dirs[0], dirs[1], names, shallow=False)
        mismatched += bad + errors + cmp.left_only + cmp.right_only
        compared += len(names)
    # the sweep must not depend on the worker count
    sweep_dirs = [tmp_path / f"sweep_{w}" for w in (1, 2)]
    for w, d in zip((1, 2), sweep_dirs):
        argv = ["scaling", "--sides", "5", "7", "9", "11", "--horizon", "3000", "--threads", str(w), "--out", str(d)]
        assert run_cli(argv) == 0
    names = sorted(p.name for p in sweep_dirs[0].iterdir())
    _, bad, errors = filecmp.cmpfiles(*sweep_dirs, names, shallow=False)
    mismatched += bad + errors
    compared += len(names)
    ok = not mismatched
    verdict(12, ok, f"{compared} output files compared byte for byte across repeated runs; mismatches {mismatched}")
    assert ok
