"""The USV long-endurance surveillance model and its fourteen properties.

Environment factors (communication channel, traffic, faults, energy
generation and consumption conditions) are free nondeterministic agents.
Sensors are accurate, so by default each sensor is itself the free agent;
with ``sensor_lag`` the environment factor is a separate agent and the
sensor copies it one tick later, which multiplies the state space by 18
without changing what the decision logic can observe. The energy
system turns the conditions and the USV behaviour into a generation amount,
a consumption amount and a saturating battery level, and the USV and GCS
decision logic reads the sensors and the energy state.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from importlib import resources

from kmc import ctl
from kmc.lang import format_model, parse_formula, parse_model
from kmc.model import ModelDef

USV_STATES = ("SB", "RE", "DP", "PF", "PFH", "CA", "SK", "SFA", "FA", "AR")
GCS_STATES = ("PP", "SW", "LC", "SiA", "PR", "SN")
GEN_CONDITIONS = ("VLEGC", "LEGC", "MEGC", "HEGC")
CONS_CONDITIONS = ("LECC", "MECC", "HECC")
BATTERY_MAX = 10
DIESEL_OUTPUT = 3

SENSORS = (
    ("Communication", "CommDetector", ("ok", "lost")),
    ("Traffic", "AIS", ("none", "giveway", "standon")),
    ("Fault", "FaultDetector", ("none", "fault", "severe")),
)

# states in which the vehicle is under way and reacts to traffic and comms
UNDERWAY = ("PF", "PFH", "CA", "SK")


class BehaviorClass(enum.Enum):
    LECB = "LECB"
    MECB = "MECB"
    HECB = "HECB"
    ZERO = "ZERO"


_CLASS_OF = {"SK": BehaviorClass.LECB, "PF": BehaviorClass.MECB, "CA": BehaviorClass.MECB,
             "PFH": BehaviorClass.HECB}

_CONSUMPTION = {
    BehaviorClass.LECB: {"LECC": 0, "MECC": -1, "HECC": -2},
    BehaviorClass.MECB: {"LECC": -1, "MECC": -2, "HECC": -3},
    BehaviorClass.HECB: {"LECC": -2, "MECC": -3, "HECC": -4},
}

_GENERATION = {"VLEGC": 0, "LEGC": 1, "MEGC": 2, "HEGC": 3}


def behavior_class(usv_state: str) -> BehaviorClass:
    if usv_state not in USV_STATES:
        raise ValueError(f"unknown USV state {usv_state!r}")
    return _CLASS_OF.get(usv_state, BehaviorClass.ZERO)


def consumption_amount(cls: BehaviorClass, cond: str) -> int:
    """Battery units drawn per tick (zero or negative)."""
    if cond not in CONS_CONDITIONS:
        raise ValueError(f"unknown consumption condition {cond!r}")
    if cls is BehaviorClass.ZERO:
        return 0
    return _CONSUMPTION[cls][cond]


def generation_amount(cond: str, diesel_on: bool) -> int:
    if cond not in GEN_CONDITIONS:
        raise ValueError(f"unknown generation condition {cond!r}")
    return DIESEL_OUTPUT if diesel_on else _GENERATION[cond]


@dataclass(frozen=True)
class ScenarioConfig:
    battery_init: int = BATTERY_MAX
    battery_max: int = BATTERY_MAX
    pfh_threshold: int = 8
    sk_reserve: int = 2
    # separate environment agents copied by detectors one tick later
    sensor_lag: bool = False

    def __post_init__(self):
        if not 0 <= self.battery_init <= self.battery_max:
            raise ValueError("battery_init outside 0..battery_max")
        if not 0 <= self.sk_reserve < self.pfh_threshold <= self.battery_max:
            raise ValueError("need 0 <= sk_reserve < pfh_threshold <= battery_max")


def _one_of(var: str, states) -> str:
    return "(" + " or ".join(f"{var} = {s}" for s in states) + ")"


def _env_agent(name: str, members) -> list[str]:
    lines = [f"agent {name} {{", f"  var state : {{{', '.join(members)}}} init {members[0]};"]
    lines += [f"  rule true -> state := {m};" for m in members]
    return lines + ["}"]


def _sensor_agent(name: str, source: str, members) -> list[str]:
    return [f"agent {name} {{",
            f"  var state : {{{', '.join(members)}}} init {members[0]};",
            f"  rule true -> state := {source}.state;",
            "}"]


def _drifting_agent(name: str, levels, init: str) -> list[str]:
    lines = [f"agent {name} {{", f"  var state : {{{', '.join(levels)}}} init {init};",
             "  rule true -> state := state;"]
    for a, b in zip(levels, levels[1:]):
        lines.append(f"  rule state = {a} -> state := {b};")
        lines.append(f"  rule state = {b} -> state := {a};")
    return lines + ["}"]


def model_text(cfg: ScenarioConfig = ScenarioConfig()) -> str:
    """Source text of the scenario, before canonical formatting."""
    sk, pfh, top = cfg.sk_reserve, cfg.pfh_threshold, cfg.battery_max
    no_giveway = "AIS.state != giveway"
    lines: list[str] = []
    for env, sensor, members in SENSORS:
        if cfg.sensor_lag:
            lines += _env_agent(env, members)
            lines += _sensor_agent(sensor, env, members)
        else:
            lines += _env_agent(sensor, members)
    lines += _drifting_agent("GenCondition", GEN_CONDITIONS, "MEGC")
    lines += _drifting_agent("ConsCondition", CONS_CONDITIONS, "LECC")

    lines += ["agent GenModule {", f"  var amount : 0..{DIESEL_OUTPUT} init {_GENERATION['MEGC']};",
              f"  rule Battery.level < {sk} -> amount := {DIESEL_OUTPUT};"]
    for cond in GEN_CONDITIONS:
        lines.append(f"  rule Battery.level >= {sk} and GenCondition.state = {cond}"
                     f" -> amount := {generation_amount(cond, False)};")
    lines.append("}")

    lines += ["agent ConsModule {", "  var amount : -4..0 init 0;"]
    for cls in BehaviorClass:
        members = [s for s in USV_STATES if behavior_class(s) is cls]
        if cls is BehaviorClass.ZERO:
            lines.append(f"  rule {_one_of('USV.state', members)} -> amount := 0;")
            continue
        for cond in CONS_CONDITIONS:
            lines.append(f"  rule {_one_of('USV.state', members)} and ConsCondition.state = {cond}"
                         f" -> amount := {consumption_amount(cls, cond)};")
    lines.append("}")

    lines += ["agent Battery {", f"  var level : 0..{top} init {cfg.battery_init};",
              f"  rule true -> level := clamp(level + GenModule.amount + ConsModule.amount, 0, {top});",
              "}"]

    underway = _one_of("state", UNDERWAY)
    lines += [
        "agent USV {",
        f"  var state : {{{', '.join(USV_STATES)}}} init SB;",
        f"  rule state = SB and GCS.state = SW and FaultDetector.state = none and Battery.level > {sk}"
        " -> state := RE;",
        "  rule state = RE and GCS.state = LC and FaultDetector.state = none -> state := DP;",
        "  rule state = DP and FaultDetector.state = none -> state := PF;",
        # arrival is only observed while following the path in nominal conditions
        f"  rule state = PF and {no_giveway} and CommDetector.state = ok and FaultDetector.state = none"
        " -> state := AR;",
        f"  rule {underway} and {no_giveway} and CommDetector.state = ok and FaultDetector.state = none"
        f" and Battery.level > {sk} -> state := PF;",
        f"  rule {underway} and AIS.state = giveway and FaultDetector.state != severe"
        f" and Battery.level >= {sk} -> state := CA;",
        f"  rule {underway} and (({no_giveway} and CommDetector.state = lost"
        f" and FaultDetector.state != severe and Battery.level >= {sk})"
        f" or (FaultDetector.state = fault and {no_giveway})"
        f" or (FaultDetector.state = none and Battery.level = {sk} and {no_giveway})) -> state := SK;",
        f"  rule {_one_of('state', ('RE', 'DP', 'PF', 'PFH', 'CA', 'SK', 'AR'))}"
        " and FaultDetector.state = severe -> state := SFA;",
        "  rule state = SFA -> state := SB;",
        f"  rule {_one_of('state', ('PF', 'PFH', 'CA', 'SK', 'RE', 'DP', 'AR'))}"
        f" and Battery.level < {sk} -> state := SB;",
        f"  rule [prio 0] {underway} and {no_giveway} and FaultDetector.state = none"
        f" and CommDetector.state = ok and Battery.level > {pfh}"
        " and GenModule.amount + ConsModule.amount > 0 -> state := PFH;",
        "}",
    ]

    lines += [
        "agent GCS {",
        f"  var state : {{{', '.join(GCS_STATES)}}} init PP;",
        "  rule state = PP and USV.state = SB -> state := SW;",
        "  rule state = SW and USV.state = RE -> state := LC;",
        "  rule state = LC and USV.state = PF -> state := SiA;",
        "  rule state = SiA and USV.state = SK and CommDetector.state = ok"
        " and FaultDetector.state != severe -> state := PR;",
        "  rule state = PR -> state := SN;",
        "  rule state = SN and USV.state = PF -> state := SiA;",
        "  rule FaultDetector.state = fault and CommDetector.state = ok -> state := SiA;",
        "}",
    ]
    lines += [f"formula {name} := {text};" for name, text in FORMULA_TEXT.items()]
    return "\n".join(lines) + "\n"


_F4_PREMISE = ("USV.state = CA and CommDetector.state = ok and AIS.state = none"
               " and FaultDetector.state = none and Battery.level > 2")

FORMULA_TEXT = {
    "F1": "AG((USV.state = RE and CommDetector.state = ok and FaultDetector.state = none"
          " and GCS.state = LC and Battery.level > 2) -> AX(USV.state = DP))",
    "F2": "AG((USV.state = PF and FaultDetector.state = none and Battery.level > 2"
          " and AIS.state = giveway) -> AX(USV.state = CA))",
    "F3": "AG(AIS.state != giveway -> AX(USV.state != CA))",
    "F4": f"AG(({_F4_PREMISE}) -> AX(USV.state = PF))",
    "F4prime": f"AG(({_F4_PREMISE}) -> AX(USV.state = PF or USV.state = PFH))",
    "F5": "AG((USV.state = SK and FaultDetector.state = none and GCS.state = SiA"
          " and CommDetector.state = ok) -> AX(GCS.state = PR))",
    "F6": "AG((USV.state = PF and AIS.state = none and FaultDetector.state = none"
          " and Battery.level > 2 and CommDetector.state = lost) -> AX(USV.state = SK))",
    "F7": "AG((USV.state = SK and CommDetector.state = ok and Battery.level > 2"
          " and GCS.state = SN) -> AX(USV.state = PF))",
    "F8": "AG((USV.state = PF and FaultDetector.state = none and CommDetector.state = lost)"
          " -> AX(USV.state = SK))",
    "F9": "AG((CommDetector.state = ok and Battery.level >= 3 and FaultDetector.state = none)"
          " -> AX(USV.state != SK))",
    "F10": "AG((CommDetector.state = lost and AIS.state != giveway"
           " and (USV.state = PF or USV.state = PFH or USV.state = SK))"
           " -> AX(USV.state = SK or USV.state = SB or USV.state = SFA))",
    "F11": "AG(USV.state = SFA -> AX(USV.state = SB))",
    "F12": "AG(Battery.level < 2 -> AX(USV.state != PF and USV.state != PFH))",
    "F13": "AG(((USV.state = PF or USV.state = CA) and Battery.level = 9 and GenModule.amount = 3"
           " and ConsModule.amount >= -1 and AIS.state != giveway and FaultDetector.state = none"
           " and CommDetector.state = ok) -> AX(USV.state = PFH))",
    "F14": "AG(Battery.level <= 8 -> AX(USV.state != PFH))",
}

EXPECTED = {name: name not in ("F4", "F7", "F8") for name in FORMULA_TEXT}


def build_usv_model(cfg: ScenarioConfig = ScenarioConfig()) -> ModelDef:
    return parse_model(model_text(cfg))


def usv_formulas() -> list[tuple[str, ctl.Formula]]:
    return [(name, parse_formula(text)) for name, text in FORMULA_TEXT.items()]


def expected_verdicts() -> dict[str, bool]:
    return dict(EXPECTED)


def scenario_text() -> str:
    """Canonical text of the default scenario, as shipped in ``usv_scenario.kmc``."""
    return format_model(build_usv_model())


def shipped_scenario_text() -> str:
    return resources.files("kmc.data").joinpath("usv_scenario.kmc").read_text(encoding="utf-8")


def shipped_expected_verdicts() -> dict[str, bool]:
    raw = resources.files("kmc.data").joinpath("expected_verdicts.json").read_text(encoding="utf-8")
    return json.loads(raw)
