from importlib import resources

import pytest

from art9.techmodel import (TechError, code_size_cells, code_size_comparison, critical_delay,
                            dmips_per_mhz, efficiency, estimate, frequency_mhz,
                            parse_netlist, parse_tech_library, total_gates, total_power)

DATA = resources.files("art9") / "data"


@pytest.fixture(scope="module")
def cntfet():
    lib = parse_tech_library((DATA / "cntfet32.tech").read_text())
    nl = parse_netlist((DATA / "art9.struct").read_text())
    return lib, nl


def test_fixture_totals(cntfet):
    lib, nl = cntfet
    assert lib.name == "cntfet32" and lib.voltage == 0.9
    assert total_gates(nl) == 652
    delay = critical_delay(nl, lib)
    assert delay == pytest.approx(3215.43)
    f = frequency_mhz(delay)
    assert f == pytest.approx(311.0, abs=0.1)
    assert total_power(nl, lib, f) == pytest.approx(42.7e-6, rel=1e-3)


def test_small_library():
    lib = parse_tech_library("""
        library toy voltage 1.0   # comment
        gate A delay_ps 100 dyn_nw_per_mhz 1 static_nw 10
        gate B delay_ps 50 dyn_nw_per_mhz 0 static_nw 5
    """)
    nl = parse_netlist("module m\n  A 2\n  B 4\nmodule n\n  A 1\npath A B B\n")
    assert nl.gate_counts() == {"A": 3, "B": 4}
    assert critical_delay(nl, lib) == 200
    assert frequency_mhz(200) == 5000
    # 3 * (10 + 1 * 5000) + 4 * 5 nW
    assert total_power(nl, lib, 5000) == pytest.approx(15050e-9)


@pytest.mark.parametrize("text,msg", [
    ("gate A delay_ps 1 dyn_nw_per_mhz 1 static_nw 1", "before library"),
    ("library x voltage 1\ngate A delay_ps 0 dyn_nw_per_mhz 1 static_nw 1", "positive"),
    ("library x voltage 1\ngate A delay_ps 1 dyn_nw_per_mhz -1 static_nw 1", "non-negative"),
    ("library x voltage 1\ngate A delay_ps q dyn_nw_per_mhz 1 static_nw 1", "bad delay"),
    ("library x voltage 1\ngate A delay_ps 1 static_nw 1", "expected"),
    ("library x voltage 1\ngate A delay_ps 1 dyn_nw_per_mhz 1 static_nw 1\n"
     "gate A delay_ps 1 dyn_nw_per_mhz 1 static_nw 1", "duplicate"),
    ("", "missing library"),
    ("library x volts 1", "expected"),
])
def test_library_errors(text, msg):
    with pytest.raises(TechError, match=msg):
        parse_tech_library(text)


@pytest.mark.parametrize("text,msg", [
    ("module m\n  A x\npath A", "bad gate count"),
    ("module m\n  A -1\npath A", "non-negative"),
    ("module m\n  A 1\n", "no critical path"),
    ("module m\nmodule m\npath A", "duplicate module"),
    ("  A 1\npath A", "malformed"),
    ("path\n", "empty"),
])
def test_netlist_errors(text, msg):
    with pytest.raises(TechError, match=msg):
        parse_netlist(text)


def test_unknown_gate_is_reported(cntfet):
    lib, _ = cntfet
    nl = parse_netlist("module m\n  XOR9 1\npath STI")
    with pytest.raises(TechError, match="XOR9"):
        estimate(lib, nl, dmips_mhz=0.42)


def test_dhrystone_arithmetic():
    assert dmips_per_mhz(1757) == pytest.approx(1e6 / 1757 ** 2)
    assert round(dmips_per_mhz(1342), 3) == 0.424
    with pytest.raises(ValueError):
        dmips_per_mhz(0)
    assert efficiency(0.42, 150, 1.09) == pytest.approx(57.8, rel=5e-3)
    with pytest.raises(ValueError):
        efficiency(1, 1, 0)


def test_estimate_overrides(cntfet):
    lib, nl = cntfet
    e = estimate(dmips_mhz=0.42, freq_mhz=150, power_w=1.09)
    assert e.total_gates == 0 and e.dmips == pytest.approx(63.0)
    assert e.lines()[-1] == "dmips_per_w: 57.8"
    e = estimate(lib, nl, dmips_mhz=0.42, freq_mhz=100)
    assert e.frequency == 100 and e.total_gates == 652
    with pytest.raises(ValueError):
        estimate(dmips_mhz=0.42, freq_mhz=150)


def test_code_size():
    assert code_size_cells(10) == 90 and code_size_cells(10, 2) == 108
    assert code_size_comparison(10, 5, 7) == {"trits": 90, "rv32_bits": 160, "armv6m_bits": 112}
    with pytest.raises(ValueError):
        code_size_cells(-1)
