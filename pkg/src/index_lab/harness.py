"""Scenario configs, execution, regression baselines and reports.

A scenario is one YAML file.  ``include`` pulls in other files (relative to
the including file) whose keys are overridden by the includer.  Validated
configs are hashed over their canonical JSON form, so two files that differ
only in layout or key order share a hash.
"""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import os
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .errors import BaselineMissing, IndexLabError, ParseError, SignatureTrivial, ValidationError
from .geometry import CylinderSpec, LandauSpec, LineSpec, TorusSpec
from .grading import Signature
from .product import INCONCLUSIVE, IndexResult

KINDS = (
    "lineIndexEqualsSF",
    "calliasCylinder",
    "cobordism",
    "toeplitzEvenEven",
    "toeplitzFamily",
    "oddPairing",
    "evenPairing",
    "vanishingGap",
    "clifford",
)

TOP_KEYS = {
    "name", "kind", "signature", "geometry", "potential", "lambdaGrid",
    "tolerances", "expected", "provenance", "negativeControl", "description", "include",
}

GEOMETRY_KEYS = {
    "line": {"type": None, "halfLength": 20.0, "points": 400},
    "cylinder": {"type": None, "halfLength": 12.0, "linePoints": 160, "circleModes": 12},
    "landau": {"type": None, "fockModes": 96, "levels": 3},
    "torus": {"type": None, "modesPerAxis": 8},
    "hardy": {"type": None, "modes": 16},
}

DEFAULT_GEOMETRY = {
    "lineIndexEqualsSF": "line",
    "calliasCylinder": "cylinder",
    "cobordism": "hardy",
    "toeplitzEvenEven": "landau",
    "toeplitzFamily": "landau",
    "oddPairing": "hardy",
    "evenPairing": "torus",
    "vanishingGap": "line",
    "clifford": "landau",
}

DEFAULT_SIGNATURE = {
    "lineIndexEqualsSF": (1, 1),
    "calliasCylinder": (1, 1),
    "cobordism": (0, 0),
    "toeplitzEvenEven": (0, 0),
    "toeplitzFamily": (1, 0),
    "oddPairing": (1, 0),
    "evenPairing": (0, 0),
    "vanishingGap": (1, 1),
    "clifford": (0, 1),
}

# admissible potential keys per kind, with defaults
POTENTIAL_KEYS = {
    "lineIndexEqualsSF": {"kind": "tanh", "level": 1.0, "width": 1.0, "seed": 0, "fiber": 1, "suspension": False},
    "calliasCylinder": {"kind": "hedgehog", "k": 1},
    "cobordism": {"kind": "diagonal", "degrees": [0], "samples": 256},
    "toeplitzEvenEven": {"kind": "monomial", "k": 1},
    "toeplitzFamily": {"kind": "hedgehog", "speed": 1, "samples": 48},
    "oddPairing": {"kind": "diagonal", "degrees": [1], "mixing": 0.0},
    "evenPairing": {"kind": "bott", "mu": 1.0, "conjugate": False, "sum": []},
    "vanishingGap": {"kind": "kink", "mass": 1.0},
    "clifford": {"kind": "monomial", "k": 1},
}

DEFAULT_LAMBDA_GRID = [1.0, 2.0, 4.0]

TOLERANCE_KEYS = {"window", "maxRefine", "samples"}


# ------------------------------------------------------------------ configs


def _read_yaml(path: Path):
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ParseError(f"{path}: {where}: {exc.problem}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ParseError(f"{path}: line 1, column 1: top level must be a mapping")
    return data


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _load_raw(path: Path, stack: tuple = ()) -> dict:
    path = path.resolve()
    if path in stack:
        chain = " -> ".join(p.name for p in stack + (path,))
        raise ParseError(f"circular include: {chain}")
    data = _read_yaml(path)
    includes = data.pop("include", []) or []
    if isinstance(includes, str):
        includes = [includes]
    merged: dict = {}
    for inc in includes:
        merged = _merge(merged, _load_raw(path.parent / inc, stack + (path,)))
    return _merge(merged, data)


@dataclass
class ScenarioConfig:
    name: str
    kind: str
    signature: tuple
    geometry: dict
    potential: dict
    lambda_grid: list
    tolerances: dict = field(default_factory=dict)
    expected: object = None
    provenance: str = ""
    negative_control: bool = False
    description: str = ""

    def canonical(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "signature": list(self.signature),
            "geometry": self.geometry,
            "potential": self.potential,
            "lambdaGrid": self.lambda_grid,
            "tolerances": self.tolerances,
            "expected": self.expected,
            "provenance": self.provenance,
            "negativeControl": self.negative_control,
        }

    @property
    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _unknown(keys, allowed, where: str):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ValidationError(f"unknown key {where}{extra[0]!r}")


def validate_config(raw: dict, source: str = "<config>") -> ScenarioConfig:
    """Fill defaults and reject anything the runner would not understand."""
    raw = dict(raw)
    raw.pop("include", None)
    _unknown(raw, TOP_KEYS, "")
    for req in ("name", "kind"):
        if req not in raw:
            raise ValidationError(f"{source}: missing required field {req!r}")
    name, kind = raw["name"], raw["kind"]
    if not isinstance(name, str) or not name:
        raise ValidationError(f"{source}: field 'name' must be a non-empty string")
    if kind not in KINDS:
        raise ValidationError(f"{source}: field 'kind' must be one of {', '.join(KINDS)}")

    sig = raw.get("signature", list(DEFAULT_SIGNATURE[kind]))
    try:
        sig = Signature(*sig)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{source}: field 'signature': {exc}") from exc

    geo_in = dict(raw.get("geometry") or {})
    gtype = geo_in.get("type", DEFAULT_GEOMETRY[kind])
    if gtype not in GEOMETRY_KEYS:
        raise ValidationError(f"{source}: field 'geometry.type' must be one of {', '.join(GEOMETRY_KEYS)}")
    _unknown(geo_in, GEOMETRY_KEYS[gtype], "geometry.")
    geometry = {k: v for k, v in GEOMETRY_KEYS[gtype].items() if k != "type"}
    geometry.update({k: v for k, v in geo_in.items() if k != "type"})
    geometry["type"] = gtype
    for k, v in geometry.items():
        if k != "type" and not isinstance(v, (int, float)):
            raise ValidationError(f"{source}: field 'geometry.{k}' must be a number")
    try:
        _geometry_spec(geometry).validate()
    except (ValueError, IndexLabError) as exc:
        raise ValidationError(f"{source}: field 'geometry': {exc}") from exc

    pot_in = dict(raw.get("potential") or {})
    _unknown(pot_in, POTENTIAL_KEYS[kind], "potential.")
    potential = copy.deepcopy(POTENTIAL_KEYS[kind])
    potential.update(pot_in)

    grid = raw.get("lambdaGrid", DEFAULT_LAMBDA_GRID)
    if not isinstance(grid, list) or not grid or not all(isinstance(x, (int, float)) and x > 0 for x in grid):
        raise ValidationError(f"{source}: field 'lambdaGrid' must be a non-empty list of positive numbers")

    tol = dict(raw.get("tolerances") or {})
    _unknown(tol, TOLERANCE_KEYS, "tolerances.")

    expected = raw.get("expected")
    if expected is not None and expected != INCONCLUSIVE and not isinstance(expected, int):
        raise ValidationError(f"{source}: field 'expected' must be an integer or {INCONCLUSIVE}")
    return ScenarioConfig(
        name=name,
        kind=kind,
        signature=(sig.p, sig.q),
        geometry=geometry,
        potential=potential,
        lambda_grid=[float(x) for x in grid],
        tolerances=tol,
        expected=expected,
        provenance=str(raw.get("provenance", "")),
        negative_control=bool(raw.get("negativeControl", False)),
        description=str(raw.get("description", "")),
    )


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return validate_config(_load_raw(path), str(path))


def _geometry_spec(geo: dict):
    t = geo["type"]
    if t == "line":
        return LineSpec(float(geo["halfLength"]), int(geo["points"]))
    if t == "cylinder":
        return CylinderSpec(float(geo["halfLength"]), int(geo["linePoints"]), int(geo["circleModes"]))
    if t == "landau":
        return LandauSpec(int(geo["fockModes"]), int(geo["levels"]))
    if t == "torus":
        return TorusSpec(int(geo["modesPerAxis"]))
    return _HardySpec(int(geo["modes"]))


@dataclass(frozen=True)
class _HardySpec:
    modes: int

    def validate(self):
        if self.modes < 4:
            raise ValidationError("modes must be at least 4")
        return self


# ------------------------------------------------------------------ records


@dataclass
class RunRecord:
    scenario: str
    verdict: object
    sides: dict
    diagnostics: dict
    configHash: str
    version: str
    status: str = "pass"

    def to_json(self) -> dict:
        d = asdict(self)
        d["diagnostics"] = dict(d["diagnostics"], status=d.pop("status"))
        return d

    @classmethod
    def from_json(cls, d: dict) -> "RunRecord":
        diag = dict(d.get("diagnostics", {}))
        status = diag.pop("status", "pass")
        return cls(d["scenario"], d["verdict"], dict(d["sides"]), diag, d["configHash"], d["version"], status)


def _diagnostics(res: IndexResult | None) -> dict:
    if res is None:
        return {"gapRatio": None, "zeroCluster": [], "chirality": [], "localization": []}
    gap = res.gap_ratio
    return {
        "gapRatio": None if gap is None or not np.isfinite(gap) else round(float(gap), 6),
        "zeroCluster": [round(float(np.real(v)), 12) for v in res.zero_cluster],
        "chirality": [round(float(c), 9) for c in res.chirality],
        "localization": [round(float(c), 9) for c in res.localization],
    }


def _verdict(sides: dict):
    vals = list(sides.values())
    if any(v == INCONCLUSIVE for v in vals):
        return INCONCLUSIVE, True
    first = vals[0]
    return first, all(v == first for v in vals)


# ---------------------------------------------------------------- dispatch


def _run_line(cfg, spec, pot):
    from .product import line_index_triple, random_kink

    if pot["kind"] == "tanh":
        level, width = float(pot["level"]), float(pot["width"])

        def fn(x):
            return level * np.tanh(x / width)
    elif pot["kind"] == "constant":
        level = float(pot["level"])

        def fn(x):
            return level + 0.0 * x
    elif pot["kind"] == "random":
        fn, _, _ = random_kink(np.random.default_rng(int(pot["seed"])), int(pot["fiber"]))
    else:
        raise ValidationError(f"unknown line potential {pot['kind']!r}")
    out = line_index_triple(fn, spec, lam=cfg.lambda_grid[0], suspension=bool(pot["suspension"]))
    res = out.pop("result")
    return out, res, {"notes": list(res.notes)}


def _run_callias(cfg, spec, pot):
    from .callias import hedgehog_scenario, callias_verify

    if pot["kind"] != "hedgehog":
        raise ValidationError(f"unknown cylinder potential {pot['kind']!r}")
    sc = hedgehog_scenario(spec, int(pot["k"]), cfg.signature)
    sc.lambda_grid = tuple(cfg.lambda_grid)
    sign = -1 if cfg.signature == (0, 0) else 1
    rep = callias_verify(sc, sign=sign)
    sides = {"index": rep.lhs.value, "boundary": rep.rhs if rep.rhs == INCONCLUSIVE else sign * rep.rhs}
    extra = {"boundaryRaw": rep.rhs, "relativeClass": rep.relative_class, "lambda": rep.lam, "sign": sign}
    return sides, rep.lhs, extra


def _run_cobordism(cfg, spec, pot):
    from .callias import cobordism_check
    from .pairlab import diagonal_symbol

    u = diagonal_symbol(pot["degrees"])
    fn = u.samples if u.size > 1 else (lambda th: u.samples(th)[:, 0, 0])
    flow = cobordism_check(fn, modes=spec.modes, samples=int(pot["samples"]))
    return {"sf": int(flow), "winding": u.det_winding()}, None, {}


def _run_toeplitz_even(cfg, spec, pot):
    from .toeplitz import even_even_toeplitz_index

    rep = even_even_toeplitz_index(spec, {int(pot["k"]): 1.0}, lam=cfg.lambda_grid[0])
    sides = {"toeplitz": rep.lhs, "product": rep.product_index}
    extra = {"indexTplus": rep.index_t_plus, "indexTminus": rep.index_t_minus,
             "kernelCount": rep.cross_check.value}
    return sides, rep.product, extra


def _run_toeplitz_family(cfg, spec, pot):
    from . import toeplitz as tp

    makers = {"hedgehog": tp.hedgehog_family, "rotating": tp.rotating_family}
    if pot["kind"] == "constant":
        fam = tp.constant_family()
    elif pot["kind"] in makers:
        fam = makers[pot["kind"]](int(pot["speed"]))
    else:
        raise ValidationError(f"unknown family {pot['kind']!r}")
    rep = tp.toeplitz_family_flow(fam, spec, lam=cfg.lambda_grid[0], samples=int(pot["samples"]),
                                  window=cfg.tolerances.get("window"))
    return {"toeplitzFlow": rep.toeplitz_flow, "productFlow": rep.product_flow}, None, {}


def _run_odd(cfg, spec, pot):
    from .pairlab import hardy_projection, odd_pairing_report, rotated_symbol

    u = rotated_symbol(pot["degrees"], float(pot["mixing"]))
    rep = odd_pairing_report(u, hardy_projection(spec.modes))
    return {"flow": rep.flow, "kernelCount": rep.kernel_count, "winding": rep.winding}, None, {}


def _even_field(pot, spec):
    from .pairlab import bott_field, constant_field

    if pot["kind"] == "bott":
        f = bott_field(spec, float(pot["mu"]))
    elif pot["kind"] == "constant":
        f = constant_field(spec)
    else:
        raise ValidationError(f"unknown projection field {pot['kind']!r}")
    if pot["conjugate"]:
        f = f.conjugate()
    for part in pot["sum"] or []:
        sub = dict(POTENTIAL_KEYS["evenPairing"], **part)
        sub["sum"] = []
        f = f.direct_sum(_even_field(sub, spec))
    return f


def _run_even(cfg, spec, pot):
    from .pairlab import even_pairing_report

    rep = even_pairing_report(_even_field(pot, spec), spec)
    res = IndexResult(rep.value, [], rep.gap_ratio, [], [], "evenPairing", rep.notes)
    return {"pairing": rep.value, "chern": rep.calibrated}, res, {"chernRaw": rep.oracle}


def _run_vanishing(cfg, spec, pot):
    from .product import gapped_vanishing

    value, res = gapped_vanishing(cfg.signature, spec, float(pot["mass"]), cfg.lambda_grid[0],
                                  int(cfg.tolerances.get("samples", 24)))
    return {"index": value}, res, {}


def _run_clifford(cfg, spec, pot):
    from .grading import Symmetry
    from .toeplitz import landau_kernel, landau_multiplication, q1_vanishing_certificate, toeplitz_compress

    kp = landau_kernel(spec)
    f = landau_multiplication({int(pot["k"]): 1.0}, spec)
    if cfg.signature[0] == 0:
        # odd for the fibre grading diag(1, -1)
        n = f.shape[0]
        big = np.zeros((2 * n, 2 * n), dtype=complex)
        big[n:, :n] = f
        big[:n, n:] = f.conj().T
    else:
        big = 0.5 * (f + f.conj().T)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SignatureTrivial)
        t = toeplitz_compress(big, kp, cfg.signature)
    defect, verdict = q1_vanishing_certificate(t)
    value = 0 if verdict is Symmetry.EXACT else INCONCLUSIVE
    return {"symmetry": value}, None, {"defect": float(defect), "certificate": verdict.value}


RUNNERS = {
    "lineIndexEqualsSF": _run_line,
    "calliasCylinder": _run_callias,
    "cobordism": _run_cobordism,
    "toeplitzEvenEven": _run_toeplitz_even,
    "toeplitzFamily": _run_toeplitz_family,
    "oddPairing": _run_odd,
    "evenPairing": _run_even,
    "vanishingGap": _run_vanishing,
    "clifford": _run_clifford,
}


def run_scenario(cfg: ScenarioConfig) -> RunRecord:
    """Evaluate one scenario; module errors are caught into the record."""
    start = time.perf_counter()
    spec = _geometry_spec(cfg.geometry)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", SignatureTrivial)
            sides, res, extra = RUNNERS[cfg.kind](cfg, spec, dict(cfg.potential))
        diag = _diagnostics(res)
        diag.update(extra)
        verdict, agree = _verdict(sides)
        if verdict == INCONCLUSIVE:
            status = "inconclusive"
        elif not agree:
            status = "disagree"
        else:
            status = "pass"
    except Exception as exc:  # recorded, never raised
        sides = {}
        verdict = INCONCLUSIVE
        diag = _diagnostics(None)
        diag["error"] = f"{type(exc).__name__}: {exc}"
        status = "error"
    if cfg.expected is not None and status in ("pass", "inconclusive"):
        hit = verdict == cfg.expected
        status = "pass" if hit else ("inconclusive" if verdict == INCONCLUSIVE else "fail")
    if cfg.negative_control:
        diag["negativeControl"] = True
        status = "pass" if status in ("fail", "disagree") else "fail"
    diag["timingMs"] = round(1000 * (time.perf_counter() - start), 1)
    return RunRecord(cfg.name, verdict, sides, diag, cfg.config_hash, __version__, status)


# -------------------------------------------------------------- execution


def default_jobs() -> int:
    try:
        return max(1, int(os.environ.get("INDEX_LAB_JOBS", "1")))
    except ValueError:
        return 1


def run_many(configs, jobs: int | None = None) -> list:
    """Run configs with a bounded process pool; records come back sorted by name."""
    configs = list(configs)
    names = [c.name for c in configs]
    dup = {n for n in names if names.count(n) > 1}
    if dup:
        raise ValidationError(f"duplicate scenario name {sorted(dup)[0]!r}")
    jobs = default_jobs() if jobs is None else max(1, int(jobs))
    if jobs == 1 or len(configs) <= 1:
        records = [run_scenario(c) for c in configs]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(run_scenario, configs))
    return sorted(records, key=lambda r: r.scenario)


def suite_files(suite_dir) -> list:
    """Scenario files of a suite; names starting with ``_`` are include fragments."""
    d = Path(suite_dir)
    if not d.is_dir():
        raise ValidationError(f"suite directory {d} does not exist")
    return sorted(p for p in d.glob("*.yaml") if not p.name.startswith("_"))


def load_suite(suite_dir) -> list:
    return [load_scenario(p) for p in suite_files(suite_dir)]


def strip_timing(record: dict) -> dict:
    out = copy.deepcopy(record)
    out.get("diagnostics", {}).pop("timingMs", None)
    return out


@dataclass
class RegressionDiff:
    status: int
    mismatches: list
    additive: list
    missing: list

    def lines(self) -> list:
        out = [f"mismatch {m}" for m in self.mismatches]
        out += [f"new scenario {n} (not in baseline)" for n in self.additive]
        out += [f"baseline scenario {n} not in suite" for n in self.missing]
        return out


def compare_records(records, baseline: list) -> RegressionDiff:
    base = {b["scenario"]: b for b in baseline}
    mismatches, additive = [], []
    for rec in records:
        old = base.get(rec.scenario)
        if old is None:
            additive.append(rec.scenario)
            continue
        if rec.verdict != old["verdict"]:
            mismatches.append(f"{rec.scenario}: verdict {old['verdict']} -> {rec.verdict}")
        if rec.sides != old["sides"]:
            mismatches.append(f"{rec.scenario}: sides {old['sides']} -> {rec.sides}")
    seen = {r.scenario for r in records}
    missing = sorted(set(base) - seen)
    return RegressionDiff(1 if mismatches else 0, mismatches, additive, missing)


def regression_compare(suite_dir, baseline_path, jobs: int | None = None, records=None) -> RegressionDiff:
    """Run a suite and diff verdicts and sides exactly against a baseline file."""
    path = Path(baseline_path)
    if not path.exists():
        raise BaselineMissing(f"baseline {path} does not exist")
    baseline = json.loads(path.read_text())
    if records is None:
        records = run_many(load_suite(suite_dir), jobs)
    return compare_records(records, baseline)


def emit_report(records, out_dir, fmt: str = "json") -> list:
    """Write ``records.json`` or one spectrum CSV per scenario; returns the paths written."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / "records.json"
        path.write_text(dumps_records(records))
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    paths = []
    for rec in records:
        path = out / f"{rec.scenario}.csv"
        d = rec.diagnostics
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "eigenvalue", "chirality", "localization"])
            cluster = d.get("zeroCluster", [])
            chir, loc = d.get("chirality", []), d.get("localization", [])
            for i, ev in enumerate(cluster):
                w.writerow([i, ev, chir[i] if i < len(chir) else "", loc[i] if i < len(loc) else ""])
        paths.append(path)
    return paths


def dumps_records(records) -> str:
    return json.dumps([r.to_json() for r in records], indent=2, sort_keys=True) + "\n"


def exit_status(records) -> int:
    statuses = {r.status for r in records}
    if statuses & {"fail", "disagree", "error"}:
        return 1
    if "inconclusive" in statuses:
        return 2
    return 0


def corpus_dir() -> Path:
    return Path(__file__).with_name("corpus")
