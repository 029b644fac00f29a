"""Catalog of exact arithmetic claims."""
import time
from fractions import Fraction

import pytest

from o2est.errors import InputError
from o2est.interval import PI_COARSE
from o2est.ledger import catalog_ids, simplex_quadratic_max, verify_all, verify_entry


def test_every_entry_passes():
    entries = verify_all()
    assert {e.id for e in entries} == set(catalog_ids())
    assert all(e.passed for e in entries), [e.id for e in entries if not e.passed]


@pytest.mark.parametrize(
    "entry_id, lhs, rhs",
    [
        ("refinement-telescope", Fraction(132132), Fraction(133000)),
        ("rotation-modulus-constant", Fraction(55, 2), Fraction(28)),
        ("rotation-holder-composition", Fraction(825000), Fraction(840000)),
        ("lipschitz-half-schedule", Fraction(29440), Fraction(30000)),
    ],
)
def test_headline_constants(entry_id, lhs, rhs):
    e = verify_entry(entry_id)
    assert e.passed
    assert any(c.relation == "<=" and c.lhs.lo == lhs and c.rhs.lo == rhs for c in e.claims)


def test_rearranger_aggregate_below_eleven():
    e = verify_entry("rearranger-aggregate")
    assert e.passed
    assert e.lhs.hi < 11 and float(e.lhs.lo) == pytest.approx(3 * 2**0.5 + 4 + 6**0.5, abs=1e-12)


def test_coarse_pi_never_flips_a_pass():
    fine = {e.id: e.status for e in verify_all()}
    coarse = {e.id: e.status for e in verify_all(PI_COARSE)}
    assert all(coarse[k] == "pass" for k, v in fine.items() if v == "pass")


def test_unknown_entry():
    with pytest.raises((InputError, KeyError)):
        verify_entry("no-such-entry")


def test_simplex_quadratic_maximum():
    value, point = simplex_quadratic_max(Fraction(9, 4), Fraction(49, 4), Fraction(25))
    assert value <= Fraction(25, 2)
    assert sum(point) == 1


def test_runtime_under_one_second():
    t0 = time.perf_counter()
    verify_all()
    assert time.perf_counter() - t0 < 1.0


def test_to_dict_keys():
    d = verify_entry("gluing-partition").to_dict()
    assert d["status"] == "pass" and d["lhs_float"] <= d["rhs_float"]
