"""Acceptance suite: one test per criterion, asserted literally, runtime budget included."""

import re
import time
from pathlib import Path


from qvoa import walgebra as W
from qvoa.cli import run_cli
from qvoa.dsl import catalog_differences, load_model, shipped_model_path
from qvoa.fock import FockSlice
from qvoa.scalar import ONE, q_pow
from qvoa.series import PowerSeries
from qvoa.sl2 import ModelConfig, make_catalog
from qvoa.verify import (fermion_check, screening_handoff, verify_drinfeld, verify_factorization,
                         verify_main_theorem, verify_pole_structure, verify_residue,
                         verify_section4_correlations)
from qvoa.vertex import ContractionResult, oracle_contraction_check

from randomops import random_pair

FIX = Path(__file__).parent / "fixtures"
LEVELS = (1, 2, 3)


def failing(report):
    return [c["name"] for c in report["checks"] if not c["pass"]]


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.time()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.time() - self.t0

    def check(self):
        assert self.elapsed < self.seconds, f"took {self.elapsed:.1f}s, budget {self.seconds}s"


def test_criterion_01_correlation_suite():
    bad = {}
    with Budget(10) as b:
        for k in LEVELS:
            rep = verify_section4_correlations(ModelConfig(k=k, N=12))
            if failing(rep):
                bad[k] = failing(rep)
    assert not bad, f"pairs not reproduced exactly: {bad}"
    b.check()


def test_criterion_02_fermion():
    cat = make_catalog(1)
    with Budget(1) as b:
        results = [fermion_check(cat, name, 12) for name in ("Sp", "Sm")]
    assert all(r["pass"] for r in results), [r["witness"] for r in results]
    b.check()


def test_criterion_03_pole_structure():
    bad = {}
    with Budget(30) as b:
        for k in LEVELS:
            rep = verify_pole_structure(ModelConfig(k=k, N=16), order=16, bounds=(6, 6))
            if failing(rep):
                bad[k] = [(c["name"], c["witness"]) for c in rep["checks"] if not c["pass"]]
    assert not bad, f"pole orders differ: {bad}"
    b.check()


def test_criterion_04_residue():
    bad = {}
    with Budget(10) as b:
        for k in LEVELS:
            rep = verify_residue(ModelConfig(k=k, N=12))
            if failing(rep):
                bad[k] = [(c["name"], c["witness"]) for c in rep["checks"] if not c["pass"]]
    assert not bad, f"residue does not match lambda_1..3: {bad}"
    b.check()


def test_criterion_05_main_theorem():
    with Budget(120) as b:
        rep = verify_main_theorem(ModelConfig(k=1, N=12, D=4, mode_range=2), charge_levels=(1, 2))
    assert not failing(rep), f"failing: {failing(rep)}"
    b.check()


def test_criterion_06_drinfeld():
    with Budget(120) as b:
        rep = verify_drinfeld(ModelConfig(k=1, N=12, D=4, mode_range=2))
    names = [c["name"] for c in rep["checks"]]
    assert "[X+, X-]" in names
    assert not failing(rep), f"failing: {failing(rep)}"
    b.check()


def test_criterion_07_factorization():
    with Budget(1) as b:
        rep = verify_factorization(ModelConfig(k=1, N=12))
    assert len(rep["checks"]) == 8
    assert not failing(rep), f"failing: {failing(rep)}"
    b.check()


def _perturbed(data):
    """One deliberately broken fixture per failure path."""
    Q = q_pow(1)
    N = data.order
    boson = ContractionResult(PowerSeries.from_polynomial([1, -2, 1], N), 2)
    two_poles = (PowerSeries.from_polynomial([ONE, -ONE], N)
                 * PowerSeries([q_pow(-6) ** m for m in range(N + 1)])
                 * PowerSeries([Q ** m for m in range(N + 1)]))
    ex = {**W.extract_two_pole(data)[0], **W.extract_exchange(data)[0]}
    q_prime = (PowerSeries.from_polynomial([ONE, -ex["q1_prime"]], N)
               * PowerSeries([(ex["q2_prime"] * Q) ** m for m in range(N + 1)]) * ex["B_prime"])
    f21 = ContractionResult(data.f21.series * PowerSeries.from_polynomial([1, -Q ** 5], N), data.b)
    return {
        W.check_fermion: W.ScreeningData(**{**data.__dict__, "self_s": (boson, data.self_s[1])}),
        W.check_prop21: data.with_lam_s((1, 1), two_poles),
        W.check_prop22_theorem23: data.with_lam_s((3, 2), q_prime),
        W.check_prop24: W.ScreeningData(**{**data.__dict__, "f21": f21}),
    }


def test_criterion_08_axiom_bridge():
    with Budget(60) as b:
        data = screening_handoff(ModelConfig(k=1, N=12))
        results = {fn: fn(data) for fn in (W.check_fermion, W.check_prop21,
                                           W.check_prop22_theorem23, W.check_prop24)}
        ex, _ = W.extract_two_pole(data)
        broken = {fn.__name__: fn(bad).passed for fn, bad in _perturbed(data).items()}
    assert ex.get("p1_prime") == ONE
    assert not any(broken.values()), f"perturbed fixtures that passed: {broken}"
    failed = {fn.__name__: r.witnesses for fn, r in results.items() if not r.passed}
    assert not failed, f"axiom checks failing on the realization data: {failed}"
    b.check()


def test_criterion_09_oracle_equivalence():
    bad = []
    with Budget(120) as b:
        for seed in range(20):
            alg, A, B, w = random_pair(seed)
            ok, compared = oracle_contraction_check(A, B, FockSlice(alg, w, 4), 8)
            if not ok or compared == 0:
                bad.append(seed)
    assert not bad, f"seeds disagreeing with the mode oracle: {bad}"
    b.check()


def test_criterion_10_classical_limit():
    with Budget(10) as b:
        data = screening_handoff(ModelConfig(k=1, N=12))
        ex = {**W.extract_two_pole(data)[0], **W.extract_exchange(data)[0]}
        f21, _ = W.structure_series(ex["p"], ex["q2_prime"], 8, ex["q"])
        probe = W.classical_limit_probe(f21, data.b, M=6, tol=1e-3)
    assert len(probe["coefficients"]) >= 6
    assert probe["pass"] and probe["max_deviation"] < 1e-3, probe
    b.check()


def test_criterion_11_dsl_cli(capsys):
    with Budget(60) as b:
        model = load_model(shipped_model_path(), k=1, order=12)
        diffs = catalog_differences(model.catalog(), make_catalog(1), 12)
        codes = {}
        for fixture in sorted(FIX.glob("*.vop")):
            if fixture.name == "minimal.vop":
                continue
            codes[fixture.name] = run_cli(["verify", "--suite", "correlations", "--model", str(fixture)])
        err = capsys.readouterr().err
        verify_all = run_cli(["verify", "--suite", "all", "--level", "1"])
    problems = []
    if diffs:
        problems.append(f"catalog differences: {diffs}")
    if not codes or any(c != 2 for c in codes.values()):
        problems.append(f"parse-error exit codes: {codes}")
    problems += [f"no spanned diagnostic for {n}" for n in codes
                 if not re.search(re.escape(str(FIX / n)) + r":\d+:\d+: error: ", err)]
    if verify_all != 0:
        problems.append(f"verify --suite all --level 1 exited {verify_all}")
    if b.elapsed >= b.seconds:
        problems.append(f"took {b.elapsed:.1f}s, budget {b.seconds}s")
    assert not problems, problems
