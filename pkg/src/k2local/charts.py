"""The homotopy fixed point E2 page, d3 scenarios, extension bookkeeping and chart rendering."""

from __future__ import annotations

import json
import re
from functools import lru_cache
from dataclasses import dataclass, field
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

PERIOD = 6
ZETA = "zeta "


class ChartError(ValueError):
    pass


@dataclass(frozen=True)
class ChartClass:
    s: int
    stem: int
    name: str
    zeta: bool

    @property
    def v2_orbit(self) -> int:
        return self.stem % PERIOD

    def to_json(self) -> Dict[str, object]:
        return {"s": self.s, "stem": self.stem, "name": self.name, "zeta": self.zeta}


@dataclass(frozen=True)
class Differential:
    source: str
    target: str
    status: str  # possible | imposed | ruled_out
    reason: str
    r: int = 3

    def to_json(self) -> Dict[str, object]:
        return {"r": self.r, "source": self.source, "target": self.target, "status": self.status,
                "reason": self.reason}


@dataclass(frozen=True)
class ExtensionAnnotation:
    source: str
    target: str
    status: str  # open | ruled_out
    reason: str

    def to_json(self) -> Dict[str, object]:
        return {"source": self.source, "target": self.target, "status": self.status, "reason": self.reason}


@dataclass
class ChartPage:
    page: str
    classes: List[ChartClass]
    differentials: List[Differential] = field(default_factory=list)
    extensions: List[ExtensionAnnotation] = field(default_factory=list)

    def by_name(self) -> Dict[str, ChartClass]:
        return {c.name: c for c in self.classes}

    def count(self) -> int:
        return len(self.classes)

    def at(self, s: int) -> List[str]:
        return [c.name for c in self.classes if c.s == s]

    def to_json(self) -> str:
        doc = {"page": self.page, "period": PERIOD,
               "classes": [c.to_json() for c in self.classes],
               "differentials": [d.to_json() for d in self.differentials],
               "extensions": [e.to_json() for e in self.extensions]}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def parse_chart_json(text: str) -> ChartPage:
    doc = json.loads(text)
    if doc.get("period") != PERIOD:
        raise ChartError("unexpected period")
    return ChartPage(doc["page"],
                     [ChartClass(c["s"], c["stem"], c["name"], c["zeta"]) for c in doc["classes"]],
                     [Differential(d["source"], d["target"], d["status"], d["reason"], d["r"]) for d in doc["differentials"]],
                     [ExtensionAnnotation(e["source"], e["target"], e["status"], e["reason"]) for e in doc["extensions"]])


# ------------------------------------------------------------ the E2 page

def _class(s: int, degree: int, zeta: bool = False) -> ChartClass:
    """x_{s,degree} sits at stem degree - s; the zeta multiple one filtration up and one stem down."""
    base = f"x_{{{s},{degree}}}"
    if zeta:
        return ChartClass(s + 1, degree - s - 1, ZETA + base, True)
    return ChartClass(s, degree - s, base, False)


def e2_generators(params: Tuple[int, int] = (0, 0)) -> Dict[int, List[int]]:
    """Internal degrees of the generators of H^s(S2^1; E_*Z), read off the duality computation."""
    return {s: list(d) for s, d in _e2_generators(tuple(params))}


@lru_cache(maxsize=4)
def _e2_generators(params: Tuple[int, int]) -> Tuple[Tuple[int, Tuple[int, ...]], ...]:
    from . import cohomology
    e2 = cohomology.duality_e2(params)
    out = []
    for s in range(5):
        names = e2.labels.get((s, 0), [])
        degrees = sorted(int(re.match(r"x_\{\d+,(\d+)\}", n).group(1)) for n in names)
        if len(degrees) != e2.rank(s):
            raise ChartError(f"label count and rank disagree at s = {s}")
        out.append((s, tuple(degrees)))
    return tuple(out)


def hfpss_e2(generators: Optional[Dict[int, List[int]]] = None, check_collapse: bool = True) -> ChartPage:
    """E(zeta) tensor H*(S2^1; E_*Z), one v2-period."""
    if check_collapse:
        from . import action
        if not action.triviality_checks()["alpha_inv_pi_identity"]:
            raise ChartError("the extension element does not act trivially; the collapse hypothesis fails")
    generators = generators if generators is not None else e2_generators()
    classes = []
    for s in sorted(generators):
        for n in generators[s]:
            classes.append(_class(s, n))
    for s in sorted(generators):
        for n in generators[s]:
            classes.append(_class(s, n, zeta=True))
    classes.sort(key=lambda c: (c.s, c.zeta, c.stem, c.name))
    return ChartPage("E2", classes)


# ------------------------------------------------------------ d3 scenarios

def _parse_target(name: str) -> Tuple[int, str]:
    m = re.match(r"v2(\^(-?\d+))? (.*)", name)
    if not m:
        return 0, name
    return int(m.group(2) or 1), m.group(3)


def differential_bidegree_ok(page: ChartPage, d: Differential) -> bool:
    classes = page.by_name()
    if d.source not in classes:
        return False
    power, base = _parse_target(d.target)
    if base not in classes:
        return False
    src, tgt = classes[d.source], classes[base]
    return tgt.s == src.s + d.r and tgt.stem + PERIOD * power == src.stem - 1


BOTTOM_CELL = Differential("x_{0,0}", "zeta x_{2,2}", "ruled_out",
                           "bottom-cell class is a permanent cycle")
FAMILY_B = "v2 zeta x_{3,0}"


@dataclass
class DifferentialScenario:
    label: str
    d3_list: List[Differential]

    def imposed(self) -> List[Differential]:
        return [d for d in self.d3_list if d.status == "imposed"]


def _e_infinity(e2: ChartPage, scenario: DifferentialScenario) -> ChartPage:
    dead = set()
    for d in scenario.imposed():
        dead.add(d.source)
        dead.add(_parse_target(d.target)[1])
    classes = [c for c in e2.classes if c.name not in dead]
    return ChartPage(f"Einf-{scenario.label}", classes, list(scenario.d3_list), extension_annotations())


def d3_scenarios(e2: Optional[ChartPage] = None) -> List[Tuple[DifferentialScenario, ChartPage]]:
    e2 = e2 or hfpss_e2()
    out = []
    for label, status in (("A", "possible"), ("B", "imposed")):
        fam = Differential("x_{1,4}", FAMILY_B, status,
                           "zero in this scenario" if status == "possible" else "nonzero in this scenario")
        scen = DifferentialScenario(label, [BOTTOM_CELL, fam])
        for d in scen.d3_list:
            if not differential_bidegree_ok(e2, d):
                raise ChartError(f"{d.source} -> {d.target} does not have the bidegree of a d3")
        out.append((scen, _e_infinity(e2, scen)))
    return out


def homotopy_table(page: ChartPage) -> Tuple[int, ...]:
    counts = [0] * PERIOD
    for c in page.classes:
        counts[c.v2_orbit] += 1
    return tuple(counts)


def exterior_ranks(stems: Sequence[int] = (1, 3, 5, -1)) -> Tuple[int, ...]:
    """Ranks per stem mod 6 of an exterior algebra on generators in the given stems."""
    counts = [0] * PERIOD
    for r in range(len(stems) + 1):
        for sub in combinations(stems, r):
            counts[sum(sub) % PERIOD] += 1
    return tuple(counts)


# ------------------------------------------------------------ extensions

def extension_annotations() -> List[ExtensionAnnotation]:
    unit_reason = "2 times the unit class vanishes because the bottom homotopy group is Z/2"
    zeta_reason = "2 times zeta times the unit class is zeta times 2 times the unit class, hence zero"
    out = [
        ExtensionAnnotation("x_{0,0}", "x_{2,2}", "ruled_out", unit_reason),
        ExtensionAnnotation("x_{0,0}", "zeta x_{1,2}", "ruled_out", unit_reason),
        ExtensionAnnotation("zeta x_{0,0}", "zeta x_{2,2}", "ruled_out", zeta_reason),
    ]
    for src, tgt in (("x_{1,0}", "zeta x_{2,2}"), ("x_{1,2}", "zeta x_{2,4}"), ("x_{1,4}", "x_{3,0}"),
                     ("x_{1,4}", "zeta x_{2,6}"), ("zeta x_{1,4}", "zeta x_{3,0}"), ("x_{2,4}", "zeta x_{3,0}")):
        out.append(ExtensionAnnotation(src, tgt, "open", "not decided by the available arguments"))
    return out


def extension_bidegree_ok(page: ChartPage, e: ExtensionAnnotation) -> bool:
    classes = page.by_name()
    src, tgt = classes.get(e.source), classes.get(e.target)
    return bool(src and tgt) and src.v2_orbit == tgt.v2_orbit and tgt.s >= src.s + 2


# ------------------------------------------------------------ rendering

STEM_WINDOW = (-8, 10)


@dataclass(frozen=True)
class _Pos:
    s: int
    stem: int
S_WINDOW = (0, 4)


def _window_classes(page: ChartPage, stems=STEM_WINDOW):
    out = []
    for c in page.classes:
        for k in range(-3, 4):
            stem = c.stem + PERIOD * k
            if stems[0] <= stem <= stems[1]:
                out.append((c, stem, k))
    return out


def class_position(name: str) -> Tuple[int, int]:
    """(s, stem) of a class from its name."""
    m = re.fullmatch(r"(zeta )?x_\{(\d+),(\d+)\}", name)
    if not m:
        raise ChartError(f"cannot parse class name {name!r}")
    c = _class(int(m.group(2)), int(m.group(3)), bool(m.group(1)))
    return c.s, c.stem


def _window_arrows(page: ChartPage, scenario_diffs: Sequence[Differential], stems=STEM_WINDOW):
    arrows = []
    for d in scenario_diffs:
        if d.status != "imposed":
            continue
        power, base = _parse_target(d.target)
        src, tgt = _Pos(*class_position(d.source)), _Pos(*class_position(base))
        for k in range(-3, 4):
            a, b = src.stem + PERIOD * k, tgt.stem + PERIOD * (k + power)
            if stems[0] <= a <= stems[1] and stems[0] <= b <= stems[1]:
                arrows.append(((a, src.s), (b, tgt.s), d))
    return arrows


def render_ascii(page: ChartPage, stems=STEM_WINDOW, s_range=S_WINDOW) -> str:
    cells: Dict[Tuple[int, int], List[bool]] = {}
    for c, stem, _ in _window_classes(page, stems):
        cells.setdefault((stem, c.s), []).append(c.zeta)
    lines = []
    for s in range(s_range[1], s_range[0] - 1, -1):
        row = []
        for stem in range(stems[0], stems[1] + 1):
            flags = cells.get((stem, s), [])
            plain, zeta = flags.count(False), flags.count(True)
            if not flags:
                ch = "."
            elif plain and zeta:
                ch = "8"
            elif plain:
                ch = "*" if plain == 1 else str(plain)
            else:
                ch = "o" if zeta == 1 else str(zeta)
            row.append(ch.rjust(3))
        lines.append(f"{s:>2} |" + "".join(row))
    lines.append("   +" + "---" * (stems[1] - stems[0] + 1))
    lines.append("    " + "".join(str(t).rjust(3) for t in range(stems[0], stems[1] + 1)))
    lines.append("    * class, o zeta multiple, 8 both")
    return "\n".join(lines) + "\n"


def render_svg(page: ChartPage, stems=STEM_WINDOW, s_range=S_WINDOW) -> str:
    cell = 40
    width = (stems[1] - stems[0] + 2) * cell
    height = (s_range[1] - s_range[0] + 2) * cell

    def xy(stem, s, shift=0.0):
        return ((stem - stems[0] + 1) * cell + shift, height - (s - s_range[0] + 1) * cell)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
             f'viewBox="0 0 {width} {height}">']
    for stem in range(stems[0], stems[1] + 1):
        x, _ = xy(stem, 0)
        parts.append(f'<text x="{x:.1f}" y="{height - 8}" font-size="10" text-anchor="middle">{stem}</text>')
    for c, stem, _ in sorted(_window_classes(page, stems), key=lambda t: (t[1], t[0].s, t[0].zeta, t[0].name)):
        x, y = xy(stem, c.s, 7.0 if c.zeta else -7.0)
        fill = "white" if c.zeta else "black"
        parts.append(f'<circle class="{"zeta" if c.zeta else "plain"}" cx="{x:.1f}" cy="{y:.1f}" r="5" '
                     f'fill="{fill}" stroke="black"><title>{c.name}</title></circle>')
    for (a, sa), (b, sb), d in _window_arrows(page, page.differentials, stems):
        x1, y1 = xy(a, sa, -7.0)
        x2, y2 = xy(b, sb, 7.0)
        parts.append(f'<line class="d3" x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" y2="{y2:.1f}" '
                     f'stroke="black" stroke-dasharray="4,3"/>')
    classes = page.by_name()
    for e in page.extensions:
        if e.status != "open" or e.source not in classes or e.target not in classes:
            continue
        src, tgt = classes[e.source], classes[e.target]
        for k in range(-3, 4):
            a, b = src.stem + PERIOD * k, tgt.stem + PERIOD * k
            if stems[0] <= a <= stems[1]:
                x1, y1 = xy(a, src.s, 7.0 if src.zeta else -7.0)
                x2, y2 = xy(b, tgt.s, 7.0 if tgt.zeta else -7.0)
                parts.append(f'<line class="extension" x1="{x1:.1f}" y1="{y1:.1f}" x2="{x2:.1f}" '
                             f'y2="{y2:.1f}" stroke="gray" stroke-dasharray="1,3"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


FORMATS = ("svg", "ascii", "json")


def emit_chart(page: ChartPage, fmt: str) -> str:
    if fmt == "json":
        return page.to_json()
    if fmt == "ascii":
        return render_ascii(page)
    if fmt == "svg":
        return render_svg(page)
    raise ChartError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def scenario_page(label: str) -> ChartPage:
    for scen, page in d3_scenarios():
        if scen.label == label:
            return page
    raise ChartError(f"unknown scenario {label!r}")
