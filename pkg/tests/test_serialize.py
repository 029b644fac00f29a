"""Round trips of the JSON payloads."""
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from o2est.errors import InputError
from o2est.paths import UnitarySection
from o2est.serialize import decode_array, dumps, encode_array, loads
from o2est.synthetic import make_synthetic


@given(arrays(np.complex128, st.tuples(st.integers(1, 4), st.integers(1, 4)),
              elements=st.complex_numbers(allow_nan=False, allow_infinity=False, max_magnitude=1e6)))
def test_array_round_trip_is_exact(a):
    np.testing.assert_array_equal(decode_array(encode_array(a)), a)


def test_real_arrays_keep_dtype():
    a = np.linspace(0, 1, 5)
    b = decode_array(json.loads(json.dumps(encode_array(a))))
    assert b.dtype == np.float64 and np.array_equal(a, b)


def test_family_round_trip():
    fam = make_synthetic(3, 2, 0.5, 1.0, 1e-4, 12)
    back = loads(dumps(fam))
    np.testing.assert_array_equal(back.embed(0.3).images, fam.embed(0.3).images)
    assert back.rho(0.25) == fam.rho(0.25)


def test_rep_and_section_round_trip(rng):
    fam = make_synthetic(3, 1, 1.0, 1.0, 0.0, 13)
    rep = fam.embed(0.5)
    back = loads(dumps(rep))
    np.testing.assert_array_equal(back.images, rep.images)
    np.testing.assert_array_equal(back.frame, rep.frame)
    sec = UnitarySection(np.array([0.0, 1.0]), np.stack([rep.frame, rep.frame]))
    np.testing.assert_array_equal(loads(dumps(sec)).values, sec.values)


def test_bad_payloads():
    with pytest.raises(InputError):
        loads(json.dumps({"format": 99, "payload": {}}))
    with pytest.raises(InputError):
        loads(json.dumps({"format": 1, "payload": {"kind": "nope"}}))
    with pytest.raises(InputError):
        dumps(object())
    with pytest.raises(InputError):
        decode_array({"dtype": "complex128", "shape": [3], "data": "AAAA"})
