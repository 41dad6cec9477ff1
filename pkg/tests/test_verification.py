import pytest

from laboratorio_operadores_no_locales.exceptions import UnknownCheckError
from laboratorio_operadores_no_locales.services.verification import CHECKS, LEMMA_ALIASES, resolve_check, run_verify

FAST_CHECKS = [
    "cosine-identity",
    "chu-vandermonde",
    "constant-closed-form",
    "cross-order",
    "constant-bounds",
    "m-independence",
    "limits",
    "scaling",
    "pathological",
    "ellipticity",
    "jumping-gradient",
    "refusal",
]
SLOW_CHECKS = sorted(set(CHECKS) - set(FAST_CHECKS))


def test_unknown_check_lists_available_ids():
    with pytest.raises(UnknownCheckError) as info:
        run_verify("no-such-check")
    assert info.value.check_id == "no-such-check"
    assert "cosine-identity" in str(info.value)
    assert "agaapa0" in str(info.value)
    assert info.value.available == sorted([*CHECKS, *LEMMA_ALIASES])


def test_lemma_aliases_point_at_registered_checks():
    assert set(LEMMA_ALIASES.values()) <= set(CHECKS)
    assert not set(LEMMA_ALIASES) & set(CHECKS)
    assert resolve_check("special-construction") == "pathological"
    assert resolve_check("scaling") == "scaling"


def test_cosine_identity_by_lemma_id():
    frame, passed = run_verify("agaapa0")
    assert passed
    assert frame["measured"].max() < 1e-12


def test_constant_lemma_by_lemma_id():
    _, passed = run_verify("lem:constant", {"seed": 42})
    assert passed


def test_descriptions_name_the_checked_identity():
    assert "2^m (1 - cos t)^m" in CHECKS["cosine-identity"].description
    assert "C(4m, 2m-h)" in CHECKS["chu-vandermonde"].description


def test_every_check_is_described():
    assert all(check.description for check in CHECKS.values())


@pytest.mark.parametrize("check_id", FAST_CHECKS)
def test_fast_checks_pass(check_id):
    frame, passed = run_verify(check_id, {"seed": 42})
    assert not frame.empty
    assert passed, frame.loc[~frame["passed"], ["name", "measured", "target"]].to_string()


def test_single_order_parameter():
    frame, passed = run_verify("chu-vandermonde", {"m": 6})
    assert len(frame) == 1
    assert passed


@pytest.mark.slow
@pytest.mark.parametrize("check_id", SLOW_CHECKS)
def test_slow_checks_pass(check_id):
    _, passed = run_verify(check_id, {"seed": 42})
    assert passed
