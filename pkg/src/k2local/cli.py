"""Command-line entry point: configuration, per-module checks, and the full verification run."""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

PARAMS = ((0, 0), (0, 1), (1, 0), (1, 1))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    precision: int = 8
    series_degree: int = 16
    params: str = "all"  # "all" or "a,b"
    pmax: int = 4
    scenario: str = "A"
    format: str = "json"
    out: Optional[str] = None
    group: str = "q8"

    def validate(self) -> "RunConfig":
        if self.precision < 4:
            raise ConfigError("precision must be at least 4")
        if self.series_degree < 8:
            raise ConfigError("series degree must be at least 8")
        if not 0 <= self.pmax <= 4:
            raise ConfigError("pmax must lie in [0, 4]")
        if self.scenario not in ("A", "B"):
            raise ConfigError("scenario must be A or B")
        if self.format not in ("svg", "ascii", "json"):
            raise ConfigError("format must be svg, ascii or json")
        if self.group not in ("q8", "g24", "c6", "g24p", "s12"):
            raise ConfigError("unknown group")
        self.param_list()
        return self

    def param_list(self) -> List[Tuple[int, int]]:
        if self.params == "all":
            return list(PARAMS)
        try:
            a, b = (int(x) for x in self.params.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad comodule parameters {self.params!r}") from exc
        if (a, b) not in PARAMS:
            raise ConfigError("comodule parameters must be 0 or 1")
        return [(a, b)]


_KEYS = {"precision": int, "series_degree": int, "params": str, "pmax": int, "scenario": str,
         "format": str, "out": str, "group": str, "a": int, "b": int}


def read_config(path: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for n, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{n}: expected key = value")
        key, value = (x.strip() for x in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _KEYS:
            raise ConfigError(f"{path}:{n}: unknown key {key!r}")
        try:
            out[key] = _KEYS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{n}: bad value for {key}") from exc
    return out


def _merge_ab(values: Dict[str, object]) -> Dict[str, object]:
    a, b = values.pop("a", None), values.pop("b", None)
    if (a is None) != (b is None):
        raise ConfigError("give both --a and --b")
    if a is not None:
        values["params"] = f"{a},{b}"
    return values


def config_from_file(path: str) -> RunConfig:
    return RunConfig(**_merge_ab(read_config(path))).validate()


def build_config(args: argparse.Namespace) -> RunConfig:
    values: Dict[str, object] = {}
    if getattr(args, "config", None):
        values.update(_merge_ab(read_config(args.config)))
    flags = {k: getattr(args, k) for k in ("precision", "series_degree", "pmax", "scenario", "format", "out",
                                           "group", "a", "b") if getattr(args, k, None) is not None}
    values.update(_merge_ab(flags))
    return RunConfig(**values).validate()


# ------------------------------------------------------------ checks

@dataclass
class CheckResult:
    check: str
    status: str
    detail: str
    ms: float

    def to_json(self) -> str:
        return json.dumps({"check": self.check, "status": self.status, "detail": self.detail,
                           "ms": round(self.ms, 1)}, sort_keys=False)


@dataclass
class VerificationReport:
    results: List[CheckResult] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.status == "pass" for r in self.results)

    def lines(self) -> List[str]:
        return [r.to_json() for r in self.results]


Check = Tuple[str, Callable[[RunConfig], Tuple[bool, str]]]


def _fgl_checks() -> List[Check]:
    from . import fgl

    def law(cfg):
        return fgl.honda_gamma2(cfg.series_degree, cfg.precision)

    def two_series(cfg):
        F = law(cfg)
        x4 = fgl.TruncSeries.monomial(("x",), F.cap, (4,), fgl.ONE)
        s = fgl.n_series(F, 2)
        return s == x4, f"[2](x) = {s}"

    def inverse(cfg):
        F = law(cfg)
        terms, e = [], 1
        while e <= F.cap:
            terms.append(fgl.TruncSeries.monomial(("x",), F.cap, (e,), fgl.ONE))
            e *= 4
        expected = fgl.formal_sum(F, terms)
        inv = F.inverse()
        return inv == expected, f"inverse = {inv}"

    def axioms(cfg):
        res = fgl.check_axioms(law(cfg), fgl.ASSOC_DEGREE)
        return all(res.values()), json.dumps(res, sort_keys=True)

    return [("fgl.two_series", two_series), ("fgl.formal_inverse", inverse), ("fgl.axioms", axioms)]


def _stabilizer_checks() -> List[Check]:
    from . import stabilizer as st

    def quaternions(cfg):
        e = st.named_elements(cfg.precision)
        one = st.O2Element.one(cfg.precision)
        i, j = e["i"], e["j"]
        ok = (i * i == -one and j * j == -one and i * i * i * i == one
              and i * i * i * j == j * i and st.ttilde_profile(i * j).t1 == st.OMEGA2)
        return ok, "i^2 = j^2 = -1, i^3 j = j i"

    def profiles(cfg):
        e = st.named_elements(cfg.precision)
        got = {n: str(st.ttilde_profile(e[n])) for n in ("1", "-1", "i", "j", "k", "w", "alpha")}
        ok = (got["-1"] == "(1, 0, 1)" and got["w"] == "(w2, 0, 0)" and got["alpha"] == "(1, 0, w)"
              and all(got[n].startswith(f"(1, {t1},") for n, t1 in (("i", "1"), ("j", "w"), ("k", "w2"))))
        return ok, json.dumps(got, sort_keys=True)

    def alpha_pi(cfg):
        alpha, pi = st.construct_alpha_pi(cfg.precision)
        prof = st.ttilde_profile(st.o2_inv(alpha) * pi)
        ok = (st.o2_det(alpha) == -1 and st.o2_det(pi) == 3 and prof.as_tuple() == (st.ONE, st.ZERO, st.ZERO)
              and st.filtration_level(st.o2_inv(alpha) * pi) >= 2)
        return ok, f"profile(alpha^-1 pi) = {prof}"

    def product_tk(cfg):
        e = st.named_elements(cfg.precision)
        names = ["1", "-1", "i", "-i", "j", "-j", "k", "-k", "w", "alpha", "pi"]
        bad = [(g, h) for g in names for h in names if not st.product_tk_check(e[g], e[h])]
        return not bad, f"{len(names) ** 2 - len(bad)}/{len(names) ** 2} pairs"

    return [("stabilizer.quaternions", quaternions), ("stabilizer.profiles", profiles),
            ("stabilizer.alpha_pi", alpha_pi), ("stabilizer.product_tk", product_tk)]


def _comodule_checks() -> List[Check]:
    from . import comodule as cm

    def family(cfg):
        fam = cm.solve_comodule_family()
        ok = len(fam) == 4 and all(fam[p] == cm.four_structures_reference(*p) for p in cfg.param_list())
        ok = ok and all(cm.check_counit(fam[p]) and cm.check_coassoc(fam[p]) for p in cfg.param_list())
        return ok, f"{len(fam)} structures"

    def perturbations(cfg):
        fam = cm.solve_comodule_family()
        slots = cm.homogeneous_slots()
        survivors = []
        for p in cfg.param_list():
            for g, m, h in slots:
                s = fam[p].flipped(g, (m, h))
                if cm.check_counit(s) and cm.check_coassoc(s):
                    survivors.append(cm.slot_name(g, m, h))
        return not survivors, f"{len(slots)} slots per structure, survivors: {survivors}"

    def reductions(cfg):
        fam = cm.solve_comodule_family()
        ref = cm.mod_small_reference()
        ok = all(cm.reduce_mod_small(fam[p]) == ref and cm.steenrod_double_check(fam[p])
                 and cm.exact_sequence_check(fam[p]) for p in cfg.param_list())
        return ok, "mod (v2, t1^4, t2^2) reduction, Steenrod double and exact sequence"

    return [("comodule.family", family), ("comodule.perturbations", perturbations),
            ("comodule.reductions", reductions)]


def _action_checks() -> List[Check]:
    from . import action as ac
    from . import comodule as cm
    from .stabilizer import TtildeProfile
    from .core_algebra import F4_ELEMENTS

    def table_vs_coaction(cfg):
        fam = cm.solve_comodule_family()
        bad = 0
        for p in cfg.param_list():
            for t0 in F4_ELEMENTS[1:]:
                for t1 in F4_ELEMENTS:
                    for t2 in F4_ELEMENTS:
                        prof = TtildeProfile(t0, t1, t2)
                        bad += ac.action_matrix(prof, p) != ac.derived_action_matrix(prof, fam[p])
        return bad == 0, f"{bad} mismatching profiles"

    def regularity(cfg):
        verdicts = {}
        for p in cfg.param_list():
            verdicts[f"{p}"] = ac.regularity_test(ac.q8_module(p, cfg.precision)).verdict
            verdicts[f"{p}'"] = ac.regularity_test(ac.conjugate_q8_module(p, cfg.precision)).verdict
        split = ac.regularity_test(ac.split_module()).verdict
        ok = all(v == "regular" for v in verdicts.values()) and split == "not_regular"
        return ok, json.dumps({"modules": verdicts, "split": split}, sort_keys=True)

    def certificate(cfg):
        from .core_algebra import Poly4
        det = ac.regularity_certificate()
        return det == Poly4.var("c") ** 4, f"det A = {det}"

    def fixed(cfg):
        checks = ac.triviality_checks(cfg.param_list()[0], cfg.precision)
        return all(checks.values()), json.dumps(checks, sort_keys=True)

    return [("action.table_vs_coaction", table_vs_coaction), ("action.regularity", regularity),
            ("action.certificate", certificate), ("action.fixed_points", fixed)]


def _cohomology_checks() -> List[Check]:
    from . import cohomology as co

    def q8(cfg):
        got = {f"{p}": [co.q8_cohomology(p, cfg.pmax, cfg.precision).dims[(q, 0)] for q in range(cfg.pmax + 1)]
               for p in cfg.param_list()}
        ok = all(v == [1] + [0] * cfg.pmax for v in got.values())
        return ok, json.dumps(got)

    def sylow(cfg):
        p = cfg.param_list()[0]
        g24 = co.g24_cohomology(p, cfg.pmax, cfg.precision).by_degree(0)
        c6 = co.c6_cohomology(p, cfg.pmax, cfg.precision).by_degree(0)
        ok = g24 == {0: 1, 2: 0, 4: 0} and sum(c6.values()) == 4
        return ok, json.dumps({"g24": g24, "c6": c6})

    return [("cohomology.q8", q8), ("cohomology.sylow", sylow)]


def _duality_checks() -> List[Check]:
    from . import cohomology as co

    def d1(cfg):
        rep = co.duality_d1(cfg.param_list()[0], k=cfg.precision)
        return rep.ok and rep.sampled_pairs >= 50, f"{rep.sampled_pairs} pairs, {rep.nonzero_pairs} nonzero"

    def routes(cfg):
        e2 = {p: co.duality_e2(p, cfg.precision).dims for p in cfg.param_list()}
        k1 = co.s12_via_k1().dims
        ok = all(d == {k: k1[k] for k in d} for d in e2.values())
        ranks = [sum(v for (s, _), v in k1.items() if s == q) for q in range(4)]
        return ok and ranks == [1, 3, 3, 1], f"ranks {ranks}"

    return [("duality.d1", d1), ("duality.two_routes", routes)]


def _hfpss_checks() -> List[Check]:
    from . import charts as ch

    def page(cfg):
        e2 = ch.hfpss_e2()
        scen = ch.d3_scenarios(e2)
        counts = {s.label: p.count() for s, p in scen}
        ranks = ch.homotopy_table(scen[0][1])
        ruled = all(any(d.source == "x_{0,0}" and d.status == "ruled_out" for d in s.d3_list) for s, _ in scen)
        ok = e2.count() == 16 and counts == {"A": 16, "B": 14} and ranks == ch.exterior_ranks() and ruled
        return ok, json.dumps({"e2": e2.count(), "einf": counts, "ranks_A": ranks})

    def roundtrip(cfg):
        p = ch.scenario_page(cfg.scenario)
        text = ch.emit_chart(p, "json")
        return ch.emit_chart(ch.parse_chart_json(text), "json") == text, f"{len(text)} bytes"

    return [("hfpss.page", page), ("hfpss.json_roundtrip", roundtrip)]


SECTIONS: Dict[str, Callable[[], List[Check]]] = {
    "fgl": _fgl_checks, "stabilizer": _stabilizer_checks, "comodule": _comodule_checks,
    "action": _action_checks, "cohomology": _cohomology_checks, "duality": _duality_checks,
    "hfpss": _hfpss_checks,
}


def run_section(name: str, cfg: RunConfig) -> VerificationReport:
    report = VerificationReport()
    for check, fn in SECTIONS[name]():
        start = time.perf_counter()
        try:
            ok, detail = fn(cfg)
        except Exception as exc:  # a crash is a failed check, reported like any other
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        report.results.append(CheckResult(check, "pass" if ok else "fail", detail,
                                          1000 * (time.perf_counter() - start)))
    return report


def run_all(cfg: RunConfig) -> VerificationReport:
    report = VerificationReport()
    for name in SECTIONS:
        report.results.extend(run_section(name, cfg).results)
    return report


# ------------------------------------------------------------ artifact commands

def _write(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _emit_report(report: VerificationReport, out: Optional[str]) -> int:
    _write("\n".join(report.lines()) + "\n", out)
    return 0 if report.ok else 1


def cmd_stabilizer_build(cfg: RunConfig) -> str:
    from . import stabilizer as st
    e = st.named_elements(cfg.precision)
    return json.dumps({n: {"element": g.to_json(), "profile": [str(x) for x in st.ttilde_profile(g).as_tuple()]}
                       for n, g in e.items()}, sort_keys=True, indent=1)


def cmd_comodule_solve(cfg: RunConfig) -> str:
    from . import comodule as cm
    fam = cm.solve_comodule_family()
    fam = {p: fam[p] for p in cfg.param_list()}
    return cm.family_to_json(fam) if cfg.format == "json" else cm.family_to_text(fam)


def cmd_cohomology(cfg: RunConfig) -> str:
    from . import cohomology as co
    p = cfg.param_list()[0]
    if cfg.group == "q8":
        res = co.q8_cohomology(p, cfg.pmax, cfg.precision)
    elif cfg.group == "g24":
        res = co.g24_cohomology(p, cfg.pmax, cfg.precision)
    elif cfg.group == "g24p":
        res = co.g24_cohomology(p, cfg.pmax, cfg.precision, conjugate=True)
    elif cfg.group == "c6":
        res = co.c6_cohomology(p, cfg.pmax, cfg.precision)
    else:
        res = co.s12_via_k1()
    return "\n".join(json.dumps(row) for row in res.table())


def cmd_chart(cfg: RunConfig) -> str:
    from . import charts as ch
    return ch.emit_chart(ch.scenario_page(cfg.scenario), cfg.format)


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key = value configuration file; flags override it")
    common.add_argument("--precision", type=int)
    common.add_argument("--series-degree", dest="series_degree", type=int)
    common.add_argument("--a", type=int)
    common.add_argument("--b", type=int)
    common.add_argument("--pmax", type=int)
    common.add_argument("--scenario")
    common.add_argument("--format", "--emit", dest="format")
    common.add_argument("--out")
    common.add_argument("--group")
    parser = argparse.ArgumentParser(prog="k2local", description=__doc__)
    sub = parser.add_subparsers(dest="module", required=True)
    for module, actions in (("fgl", ["verify"]), ("stabilizer", ["build", "verify"]),
                            ("comodule", ["solve", "verify"]), ("action", ["verify"]),
                            ("cohomology", ["compute", "verify"]), ("duality", ["run"]),
                            ("hfpss", ["chart", "verify"])):
        p = sub.add_parser(module, parents=[common])
        p.add_argument("action", choices=actions)
    sub.add_parser("all", parents=[common])
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = build_config(args)
    except (ConfigError, OSError, TypeError) as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    if args.module == "all":
        return _emit_report(run_all(cfg), cfg.out)
    action = args.action
    if args.module == "stabilizer" and action == "build":
        _write(cmd_stabilizer_build(cfg), cfg.out)
        return 0
    if args.module == "comodule" and action == "solve":
        _write(cmd_comodule_solve(cfg), cfg.out)
        return 0
    if args.module == "cohomology" and action == "compute":
        _write(cmd_cohomology(cfg), cfg.out)
        return 0
    if args.module == "hfpss" and action == "chart":
        _write(cmd_chart(cfg), cfg.out)
        return 0
    return _emit_report(run_section(args.module, cfg), cfg.out)


if __name__ == "__main__":
    sys.exit(main())
