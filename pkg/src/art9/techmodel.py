"""Gate-level cost analysis and DMIPS performance estimation.

Two line-oriented inputs drive the estimate. A technology library gives
per-gate delay and power::

    library cntfet32 voltage 0.9
    gate STI delay_ps 60 dyn_nw_per_mhz 0.046 static_nw 1

A structural netlist gives gate counts per module and the gate sequence
along the critical path::

    module talu
      TFA 18
      TMUX 45
    path TDFF TMUX TFA TFA TDFF
"""
from __future__ import annotations

from dataclasses import dataclass, field

DHRYSTONES_PER_DMIPS = 1757  # VAX 11/780 dhrystones per second


class TechError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class Gate:
    delay_ps: float
    dyn_nw_per_mhz: float
    static_nw: float


@dataclass
class TechLibrary:
    name: str
    voltage: float
    gates: dict[str, Gate] = field(default_factory=dict)


@dataclass
class StructuralNetlist:
    modules: dict[str, dict[str, int]] = field(default_factory=dict)
    critical_path: list[str] = field(default_factory=list)

    def gate_counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for counts in self.modules.values():
            for g, n in counts.items():
                out[g] = out.get(g, 0) + n
        return out

    def check(self, lib: TechLibrary):
        for g in list(self.gate_counts()) + self.critical_path:
            if g not in lib.gates:
                raise TechError(f"gate {g!r} is not in library {lib.name!r}")


@dataclass(frozen=True)
class Estimate:
    total_gates: int
    critical_delay: float   # ps
    frequency: float        # MHz
    power: float            # W
    dmips_per_mhz: float
    dmips: float
    dmips_per_watt: float

    def lines(self) -> list[str]:
        return [
            f"total_gates: {self.total_gates}",
            f"critical_delay_ps: {self.critical_delay:.2f}",
            f"frequency_mhz: {self.frequency:.2f}",
            f"power_w: {self.power:.6g}",
            f"dmips_per_mhz: {self.dmips_per_mhz:.4f}",
            f"dmips: {self.dmips:.4g}",
            f"dmips_per_w: {self.dmips_per_watt:.4g}",
        ]


def _float(tok: str, what: str, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise TechError(f"bad {what} {tok!r}", lineno) from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if line.strip():
            yield lineno, line


def parse_tech_library(text: str) -> TechLibrary:
    lib = None
    for lineno, line in _lines(text):
        tok = line.split()
        if tok[0] == "library":
            if len(tok) != 4 or tok[2] != "voltage":
                raise TechError("expected 'library <name> voltage <V>'", lineno)
            if lib is not None:
                raise TechError("second library header", lineno)
            lib = TechLibrary(tok[1], _float(tok[3], "voltage", lineno))
        elif tok[0] == "gate":
            if lib is None:
                raise TechError("gate before library header", lineno)
            if len(tok) != 8 or tok[2::2] != ["delay_ps", "dyn_nw_per_mhz", "static_nw"]:
                raise TechError(
                    "expected 'gate <name> delay_ps <f> dyn_nw_per_mhz <f> static_nw <f>'", lineno)
            name = tok[1]
            if name in lib.gates:
                raise TechError(f"duplicate gate {name!r}", lineno)
            delay = _float(tok[3], "delay", lineno)
            dyn = _float(tok[5], "dynamic power", lineno)
            static = _float(tok[7], "static power", lineno)
            if delay <= 0:
                raise TechError(f"gate {name!r}: delay must be positive", lineno)
            if dyn < 0 or static < 0:
                raise TechError(f"gate {name!r}: power must be non-negative", lineno)
            lib.gates[name] = Gate(delay, dyn, static)
        else:
            raise TechError(f"unexpected {tok[0]!r}", lineno)
    if lib is None:
        raise TechError("missing library header")
    return lib


def parse_netlist(text: str) -> StructuralNetlist:
    nl = StructuralNetlist()
    current = None
    for lineno, line in _lines(text):
        tok = line.split()
        if tok[0] == "module":
            if len(tok) != 2:
                raise TechError("expected 'module <name>'", lineno)
            if tok[1] in nl.modules:
                raise TechError(f"duplicate module {tok[1]!r}", lineno)
            current = nl.modules[tok[1]] = {}
        elif tok[0] == "path":
            if nl.critical_path:
                raise TechError("second path line", lineno)
            if len(tok) < 2:
                raise TechError("critical path is empty", lineno)
            nl.critical_path = tok[1:]
        elif line[0].isspace() and current is not None and len(tok) == 2:
            try:
                n = int(tok[1])
            except ValueError:
                raise TechError(f"bad gate count {tok[1]!r}", lineno) from None
            if n < 0:
                raise TechError("gate count must be non-negative", lineno)
            current[tok[0]] = current.get(tok[0], 0) + n
        else:
            raise TechError(f"malformed line {line.strip()!r}", lineno)
    if not nl.critical_path:
        raise TechError("netlist has no critical path")
    return nl


def total_gates(nl: StructuralNetlist) -> int:
    return sum(sum(m.values()) for m in nl.modules.values())


def critical_delay(nl: StructuralNetlist, lib: TechLibrary) -> float:
    """Critical path delay in picoseconds."""
    total = 0.0
    for g in nl.critical_path:
        if g not in lib.gates:
            raise TechError(f"unknown gate {g!r} on critical path")
        total += lib.gates[g].delay_ps
    return total


def frequency_mhz(delay_ps: float) -> float:
    return 1e6 / delay_ps


def total_power(nl: StructuralNetlist, lib: TechLibrary, frequency: float) -> float:
    """Static plus frequency-proportional dynamic power, in watts."""
    nw = 0.0
    for g, n in nl.gate_counts().items():
        if g not in lib.gates:
            raise TechError(f"unknown gate {g!r}")
        p = lib.gates[g]
        nw += n * (p.static_nw + p.dyn_nw_per_mhz * frequency)
    return nw * 1e-9


def dmips_per_mhz(cycles_per_iteration: float) -> float:
    if cycles_per_iteration <= 0:
        raise ValueError("cycles per iteration must be positive")
    return 1e6 / (cycles_per_iteration * DHRYSTONES_PER_DMIPS)


def efficiency(dmips_per_mhz: float, frequency: float, power: float) -> float:
    """DMIPS per watt."""
    if power <= 0:
        raise ValueError("power must be positive")
    return dmips_per_mhz * frequency / power


def code_size_cells(instructions: int, data_words: int = 0, word_trits: int = 9) -> int:
    if instructions < 0 or data_words < 0:
        raise ValueError("counts must be non-negative")
    return word_trits * (instructions + data_words)


def code_size_comparison(ternary_words: int, rv32_instructions: int,
                         thumb_instructions: int | None = None) -> dict[str, int]:
    out = {"trits": code_size_cells(ternary_words), "rv32_bits": 32 * rv32_instructions}
    if thumb_instructions is not None:
        out["armv6m_bits"] = 16 * thumb_instructions
    return out


def estimate(lib: TechLibrary | None = None, nl: StructuralNetlist | None = None, *,
             dmips_mhz: float, freq_mhz: float | None = None,
             power_w: float | None = None) -> Estimate:
    """Combine gate-level results with a DMIPS/MHz figure.

    ``freq_mhz`` and ``power_w`` override the values derived from the
    netlist; with both given, the library and netlist may be omitted.
    """
    if nl is not None and lib is not None:
        nl.check(lib)
        delay = critical_delay(nl, lib)
        gates = total_gates(nl)
    elif freq_mhz is None or power_w is None:
        raise ValueError("need a library and netlist unless frequency and power are given")
    else:
        delay, gates = 0.0, 0
    f = freq_mhz if freq_mhz is not None else frequency_mhz(delay)
    delay = 1e6 / f
    p = power_w if power_w is not None else total_power(nl, lib, f)
    dmips = dmips_mhz * f
    return Estimate(gates, delay, f, p, dmips_mhz, dmips, efficiency(dmips_mhz, f, p))
