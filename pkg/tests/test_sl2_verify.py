import json
from pathlib import Path

import pytest

from qvoa.scalar import q_pow
from qvoa.sl2 import ModelConfig, make_catalog
from qvoa.verify import (DISPLAYED_PAIRS, SCREENING_FACTORS, correlation_pair_check, fermion_check,
                         golden_correlations, screening_factor_check, verify_factorization)
from qvoa.vertex import contract

GOLDEN = Path(__file__).parent / "golden"
N = 12


@pytest.mark.parametrize("k", [1, 2, 3])
def test_golden_correlations(k):
    frozen = json.loads((GOLDEN / f"correlations_k{k}.json").read_text())
    assert golden_correlations(k, frozen["order"]) == frozen


@pytest.mark.parametrize("k", [1, 2, 3])
def test_displayed_exponents(k):
    """Every displayed exponent series (both printed forms) matches, monomials aside."""
    cat = make_catalog(k)
    for a, b, forms, z in DISPLAYED_PAIRS:
        if not forms:
            continue
        res = correlation_pair_check(cat, a, b, forms, z, N)
        assert res["witness"]["forms_agree"], (a, b)
        assert all(res["witness"]["exponent_matches"]), (a, b)


def test_displayed_monomial_differs():
    cat = make_catalog(1)
    r = contract(cat.op("Ybarp"), cat.op("Ybarm"), N)
    assert r.z_power == 2  # the display reads z^(4/k)


def test_catalog_currents(cat1):
    xp = cat1.sums["Xp"]
    assert [t.op.name for t in xp.terms] == ["X1p", "X2p"]
    inv = 1 / (q_pow(1) - q_pow(-1))
    assert [t.coeff for t in xp.terms] == [inv, -inv]


def test_phi_replaces_y_by_ybar(cat1):
    for i in ("1p", "2p", "1m", "2m"):
        x, phi = cat1.op("X" + i), cat1.op("Phi" + i)
        assert x.shift.amounts[0] != 0 and phi.shift.amounts[0] == 0
        assert 0 in x.minus and 0 not in phi.minus and 0 not in phi.plus
        assert set(x.differences(phi, N)) <= {"shift", "z_coeffs", "minus[alpha]", "plus[alpha]"}


def test_factorization(cfg1, cat1):
    rep = verify_factorization(cfg1, cat1)
    assert rep["pass"]


@pytest.mark.parametrize("k", [1, 2])
def test_fermions(k):
    cat = make_catalog(k)
    assert fermion_check(cat, "Sp", N)["pass"]
    assert fermion_check(cat, "Sm", N)["pass"]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_screening_factor_shapes(k):
    cat = make_catalog(k)
    for row in SCREENING_FACTORS:
        res = screening_factor_check(cat, *row, N)
        assert res["witness"]["shape_match"], row[:2]


def test_screening_factor_constants(cat1):
    # S X1 products carry no constant; X2 S products carry a power of q
    consts = {row[:2]: screening_factor_check(cat1, *row, N)["witness"]["constant"] for row in SCREENING_FACTORS}
    assert consts[("Sp", "X1p")] == "1"
    assert consts[("X2p", "Sp")] == "q"
    assert consts[("X2m", "Sm")] == "q^-1"


def test_l_weights_rational(cat1):
    c = (q_pow(4) - 1) / (q_pow(6) - 1)
    inv2 = 1 / (q_pow(1) - q_pow(-1)) ** 2
    assert [t.coeff for t in cat1.sums["L"].terms] == [inv2, -c * inv2, -c * q_pow(2) * inv2]


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(k=0)
    with pytest.raises(ValueError):
        ModelConfig(measure="dz")
    assert ModelConfig(sector=(1, 2, 3)).weight().values == (4, -6, 2)


def test_default_order_env(monkeypatch):
    monkeypatch.setenv("QVOA_DEFAULT_ORDER", "7")
    assert ModelConfig().N == 7
