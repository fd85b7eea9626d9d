import cmath
import math

import pytest

import zscat


def test_alpha_at_zero():
    assert abs(zscat.alpha(0.0) - 1j / (2 * math.pi)) < 1e-16


def test_alpha_magnitude():
    for x in (-5.0, 0.5, 3.0):
        ref = math.exp(math.pi * x) * (math.pi * x / math.sinh(math.pi * x)) / (4 * math.pi**2)
        assert abs(abs(zscat.alpha(x)) ** 2 - ref) < 1e-12 * ref


def test_symbol_value():
    s = {"family": "internal-wave-homogeneous", "beta": 2.0}
    assert zscat.evaluate(s, 0.0, 0.0, 0.0, 1.0) == pytest.approx(-1.0)


def test_content_hash_matches_git():
    assert zscat.content_hash(b"hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a"


def test_cycles_report():
    report, files = zscat.run("cycles")
    assert report["sinks"] == 2 and report["sources"] == 2
    assert files["cycles.csv"].startswith(b"# zscat spec=" + zscat.spec_version.encode())


def test_scatter_deterministic_over_workers():
    cfg = {"n": 128, "Ks": 2}
    _, a = zscat.run("scatter", cfg, workers=1)
    _, b = zscat.run("scatter", cfg, workers=4)
    assert a == b


def test_assumption_violation_code():
    with pytest.raises(zscat.ZscatError) as e:
        zscat.run("cycles", omega=-1.0)
    assert e.value.code == 2


def test_config_hash_ignores_workers():
    c = zscat.default_config()
    d = dict(c, workers=3)
    assert zscat.config_hash(c) == zscat.config_hash(d)
