"""Run configuration: TOML text -> validated RunConfig, plus builders that
turn config blocks into families, generators, word sources and observables.

Validation collects every problem before reporting; unknown keys are errors.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .cocycle import CocycleGenerator
from .dynamics import MapFamily
from .errors import BudgetError, ConfigError
from .estimators.observables import ObservableSequence
from .expr import Expression
from .words import Word, WordSource, enumeration_budget

EXPERIMENTS = ("lambda-fixed", "branch-exact", "branch-mc", "birkhoff", "kingman", "fekete", "subadd-check")
NEEDS_COCYCLE = ("lambda-fixed", "branch-exact", "branch-mc")
TOP_KEYS = {"seed", "output", "naive", "threads", "family", "cocycle", "experiment"}
SEED_MAX = 2**64 - 1


@dataclass
class RunConfig:
    family: dict
    experiments: list[dict]
    cocycle: dict | None = None
    seed: int = 0
    output: str = "out"
    naive: bool = False
    threads: int = 1
    budget: int = field(default_factory=enumeration_budget)

    def semantic(self) -> dict:
        """Fields that determine the numbers (output dir and threads excluded)."""
        return {"family": self.family, "cocycle": self.cocycle, "experiments": self.experiments,
                "seed": self.seed, "naive": self.naive}

    def echo(self) -> dict:
        return {**self.semantic(), "output": self.output, "threads": self.threads}

    def config_hash(self) -> str:
        blob = json.dumps(self.semantic(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# -- validation helpers ---------------------------------------------------------


class _Checker:
    def __init__(self):
        self.errors: list[str] = []

    def fail(self, key, constraint):
        self.errors.append(f"{key}: {constraint}")

    def unknown(self, table, allowed, where):
        for k in table:
            if k not in allowed:
                self.fail(f"{where}.{k}" if where else k, "unknown key")

    def integer(self, table, key, where, lo=None, hi=None, required=True, default=None, label=None):
        name = f"{where}.{key}"
        if key not in table:
            if required:
                self.fail(name, "missing required key")
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(name, "must be an integer")
            return default
        if lo is not None and v < lo:
            self.fail(name, f"must satisfy {label or key} ≥ {lo}")
            return default
        if hi is not None and v > hi:
            self.fail(name, f"must satisfy {label or key} ≤ {hi}")
            return default
        return v

    def number(self, table, key, where, required=True, default=None, unit=False):
        name = f"{where}.{key}"
        if key not in table:
            if required:
                self.fail(name, "missing required key")
            return default
        v = table[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(name, "must be a number")
            return default
        if unit and not 0.0 <= v < 1.0:
            self.fail(name, "must satisfy 0 ≤ x < 1")
            return default
        return float(v)

    def choice(self, table, key, where, options, required=True, default=None):
        name = f"{where}.{key}"
        if key not in table:
            if required:
                self.fail(name, "missing required key")
            return default
        v = table[key]
        if v not in options:
            self.fail(name, f"must be one of {', '.join(options)}")
            return default
        return v

    def expression(self, table, key, where, var="x", required=True):
        name = f"{where}.{key}"
        if key not in table:
            if required:
                self.fail(name, "missing required key")
            return None
        try:
            return Expression(str(table[key]), var=var)
        except ValueError as exc:
            self.fail(name, str(exc))
            return None


# -- sections -------------------------------------------------------------------


def _check_family(c: _Checker, fam) -> int | None:
    if not isinstance(fam, dict):
        c.fail("family", "missing [family] table")
        return None
    kind = c.choice(fam, "kind", "family", ("expanding_affine", "rotation", "piecewise_affine"))
    N = c.integer(fam, "N", "family", lo=1, label="N")
    allowed = {"kind", "N"}
    if kind == "rotation":
        allowed |= {"alphas"}
        alphas = fam.get("alphas")
        if not isinstance(alphas, list) or not all(isinstance(a, (int, float)) for a in alphas):
            c.fail("family.alphas", "must be a list of numbers")
        elif N is not None and len(alphas) != N:
            c.fail("family.alphas", f"must have N = {N} entries")
    elif kind == "piecewise_affine":
        allowed |= {"maps", "invariant_measure"}
        maps = fam.get("maps")
        if not isinstance(maps, list) or not maps:
            c.fail("family.maps", "must be a non-empty list of map tables")
        else:
            if N is not None and len(maps) != N:
                c.fail("family.maps", f"must have N = {N} entries")
            try:
                MapFamily.piecewise_affine(maps)
            except (KeyError, TypeError, ValueError) as exc:
                c.fail("family.maps", f"invalid map definition ({exc})")
            for i, m in enumerate(maps):
                if isinstance(m, dict):
                    c.unknown(m, {"breakpoints", "slopes", "offsets"}, f"family.maps[{i}]")
    c.unknown(fam, allowed, "family")
    return N


def _check_cocycle(c: _Checker, coc):
    if not isinstance(coc, dict):
        c.fail("cocycle", "must be a table")
        return
    kind = c.choice(coc, "kind", "cocycle", ("constant", "piecewise_constant", "parametric"))
    d = c.integer(coc, "d", "cocycle", lo=1, hi=16, label="d")
    allowed = {"kind", "d", "det_floor"}
    c.number(coc, "det_floor", "cocycle", required=False)
    if kind is None or d is None:
        c.unknown(coc, allowed | {"matrix", "matrices", "breakpoints", "entries"}, "cocycle")
        return
    try:
        if kind == "constant":
            allowed.add("matrix")
            gen = build_cocycle(coc)
        elif kind == "piecewise_constant":
            allowed |= {"matrices", "breakpoints"}
            gen = build_cocycle(coc)
        else:
            allowed.add("entries")
            gen = build_cocycle(coc)
        if gen.d != d:
            c.fail("cocycle.d", f"declared d = {d} but matrices are {gen.d}x{gen.d}")
    except KeyError as exc:
        c.fail(f"cocycle.{exc.args[0]}", "missing required key")
    except Exception as exc:  # noqa: BLE001 - every failure becomes a config error
        c.fail("cocycle", f"invalid generator ({exc})")
    c.unknown(coc, allowed, "cocycle")


_SOURCE_KEYS = {"kind", "word", "seed"}


def _check_source(c, src, where, N):
    if src is None:
        return
    if not isinstance(src, dict):
        c.fail(where, "must be a table")
        return
    kind = c.choice(src, "kind", where, ("random", "periodic", "explicit"))
    c.unknown(src, _SOURCE_KEYS, where)
    if kind in ("periodic", "explicit"):
        if "word" not in src:
            c.fail(f"{where}.word", "missing required key")
        elif N is not None:
            try:
                w = Word.parse(str(src["word"]), N)
                if kind == "periodic" and not len(w):
                    c.fail(f"{where}.word", "periodic word must be non-empty")
            except ValueError as exc:
                c.fail(f"{where}.word", str(exc))
    if kind == "random":
        c.integer(src, "seed", where, lo=0, hi=SEED_MAX, required=False)


def _check_observable(c, obs, where, has_cocycle):
    if not isinstance(obs, dict):
        c.fail(where, "missing observable table")
        return
    kind = c.choice(obs, "kind", where, ("ergodic_sum", "log_norm_cocycle", "log_conorm_cocycle"))
    allowed = {"kind"}
    if kind == "ergodic_sum":
        allowed.add("phi")
        c.expression(obs, "phi", where)
    elif kind is not None and not has_cocycle:
        c.fail(where, f"{kind} requires a [cocycle] table")
    c.unknown(obs, allowed, where)


def _check_points(c, table, where):
    pts = table.get("points", "panel")
    if pts == "panel":
        return
    if not isinstance(pts, list) or not pts or not all(
            isinstance(p, (int, float)) and not isinstance(p, bool) and 0 <= p < 1 for p in pts):
        c.fail(f"{where}.points", 'must be "panel" or a non-empty list of points in [0, 1)')


def _budget_ok(c, where, N, n, budget):
    if N is None or n is None:
        return
    if N**n > budget:
        c.fail(where, f"N^n = {N}^{n} = {N**n} exceeds enumeration budget {budget}")
        c.budget_exceeded = True


def _check_experiment(c, exp, where, N, has_cocycle, budget):
    if not isinstance(exp, dict):
        c.fail(where, "must be a table")
        return
    kind = c.choice(exp, "kind", where, EXPERIMENTS)
    if kind is None:
        return
    allowed = {"kind", "tol"}
    c.number(exp, "tol", where, required=False)
    if kind in NEEDS_COCYCLE and not has_cocycle:
        c.fail(where, f"{kind} requires a [cocycle] table")
    if kind == "lambda-fixed":
        allowed |= {"x", "m_max", "stride", "source"}
        c.number(exp, "x", where, required=False, unit=True)
        c.integer(exp, "m_max", where, lo=2, label="m_max")
        c.integer(exp, "stride", where, lo=1, required=False, label="stride")
        _check_source(c, exp.get("source"), f"{where}.source", N)
    elif kind == "branch-exact":
        allowed |= {"x", "n_max", "normalization"}
        c.number(exp, "x", where, required=False, unit=True)
        n = c.integer(exp, "n_max", where, lo=1, label="n_max")
        c.choice(exp, "normalization", where, ("per_word", "per_word_per_time"), required=False)
        _budget_ok(c, f"{where}.n_max", N, n, budget)
    elif kind == "branch-mc":
        allowed |= {"x", "n", "samples", "normalization"}
        c.number(exp, "x", where, required=False, unit=True)
        c.integer(exp, "n", where, lo=1, label="n")
        c.integer(exp, "samples", where, lo=2, label="samples")
        c.choice(exp, "normalization", where, ("per_word", "per_word_per_time"), required=False)
    elif kind == "birkhoff":
        allowed |= {"x", "n_max", "phi"}
        c.number(exp, "x", where, required=False, unit=True)
        n = c.integer(exp, "n_max", where, lo=1, label="n_max")
        c.expression(exp, "phi", where)
        _budget_ok(c, f"{where}.n_max", N, n, budget)
    elif kind in ("kingman", "subadd-check"):
        allowed |= {"observable", "mode", "points", "n_max", "source"}
        mode = c.choice(exp, "mode", where, ("fixed_word", "branch_total"), required=False,
                        default="fixed_word")
        n = c.integer(exp, "n_max", where, lo=1, label="n_max")
        _check_observable(c, exp.get("observable"), f"{where}.observable", has_cocycle)
        _check_points(c, exp, where)
        _check_source(c, exp.get("source"), f"{where}.source", N)
        if kind == "kingman":
            allowed |= {"divisor", "invariance_steps"}
            c.choice(exp, "divisor", where, ("n", "N^n", "n*N^n"), required=False)
            c.integer(exp, "invariance_steps", where, lo=1, required=False, label="invariance_steps")
            if mode == "branch_total":
                _budget_ok(c, f"{where}.n_max", N, n, budget)
        else:
            allowed.add("p_max")
            p = c.integer(exp, "p_max", where, lo=1, label="p_max")
            if mode == "branch_total" and n is not None and p is not None:
                _budget_ok(c, f"{where}.n_max", N, n + p, budget)
    elif kind == "fekete":
        allowed |= {"sequence", "values", "K", "l"}
        c.integer(exp, "l", where, lo=1, required=False, label="l")
        if "values" in exp:
            vals = exp["values"]
            if not isinstance(vals, list) or len(vals) < 2 or not all(
                    isinstance(v, (int, float)) and not isinstance(v, bool) for v in vals):
                c.fail(f"{where}.values", "must be a list of at least 2 numbers")
            if "sequence" in exp:
                c.fail(where, "give either sequence or values, not both")
        else:
            c.expression(exp, "sequence", where, var="k")
            c.integer(exp, "K", where, lo=2, label="K")
    c.unknown(exp, allowed, where)


# -- entry points -----------------------------------------------------------------


def _syntax_error(exc) -> ConfigError:
    line = getattr(exc, "lineno", None)
    if line is None:
        m = re.search(r"line (\d+)", str(exc))
        line = int(m.group(1)) if m else "?"
    msg = getattr(exc, "msg", str(exc))
    return ConfigError(f"syntax error at line {line}: {msg}")


def load_toml(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise _syntax_error(exc) from None


def validate(raw: dict, budget: int | None = None) -> RunConfig:
    budget = enumeration_budget() if budget is None else budget
    c = _Checker()
    c.budget_exceeded = False
    c.unknown(raw, TOP_KEYS, "")
    c.errors = [e.lstrip(".") for e in c.errors]
    seed = c.integer(raw, "seed", "", lo=0, hi=SEED_MAX, required=False, default=0, label="seed")
    threads = c.integer(raw, "threads", "", lo=1, required=False, default=1, label="threads")
    naive = raw.get("naive", False)
    if not isinstance(naive, bool):
        c.fail("naive", "must be true or false")
    output = raw.get("output", "out")
    if not isinstance(output, str) or not output:
        c.fail("output", "must be a non-empty path string")
    N = _check_family(c, raw.get("family"))
    has_cocycle = "cocycle" in raw
    if has_cocycle:
        _check_cocycle(c, raw["cocycle"])
    exps = raw.get("experiment")
    if exps is None:
        c.fail("experiment", "missing [experiment] table")
        exps = []
    elif isinstance(exps, dict):
        exps = [exps]
    for i, exp in enumerate(exps):
        where = "experiment" if len(exps) == 1 else f"experiment[{i}]"
        _check_experiment(c, exp, where, N, has_cocycle, budget)
    c.errors = [e.replace("..", ".").lstrip(".") for e in c.errors]
    if c.errors:
        if c.budget_exceeded and all("enumeration budget" in e for e in c.errors):
            raise BudgetError("; ".join(c.errors))
        raise ConfigError(c.errors)
    return RunConfig(family=raw["family"], experiments=exps, cocycle=raw.get("cocycle"),
                     seed=seed, output=output, naive=naive, threads=threads, budget=budget)


def parse_config(text: str, overrides: dict | None = None, budget: int | None = None) -> RunConfig:
    """Parse and validate config text. ``overrides`` maps dotted keys to values
    (``{"experiment.n_max": 12, "seed": 3}``) and wins over the file."""
    raw = load_toml(text)
    if overrides:
        raw = apply_overrides(raw, overrides)
    return validate(raw, budget)


def apply_overrides(raw: dict, overrides: dict) -> dict:
    raw = copy.deepcopy(raw)
    for dotted, value in overrides.items():
        parts = dotted.split(".")
        targets = [raw]
        for part in parts[:-1]:
            nxt = []
            for t in targets:
                child = t.setdefault(part, {})
                nxt.extend(child if isinstance(child, list) else [child])
            targets = nxt
        for t in targets:
            t[parts[-1]] = value
    return raw


def parse_override(text: str):
    """``key=value`` with the value read as a TOML literal, else as a string."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} must look like key=value")
    key, value = text.split("=", 1)
    try:
        parsed = tomllib.loads(f"v = {value}")["v"]
    except tomllib.TOMLDecodeError:
        parsed = value
    return key.strip(), parsed


# -- builders ---------------------------------------------------------------------


def build_family(fam: dict) -> MapFamily:
    kind = fam["kind"]
    if kind == "expanding_affine":
        return MapFamily.expanding_affine(fam["N"])
    if kind == "rotation":
        return MapFamily.rotation(fam["alphas"])
    return MapFamily.piecewise_affine(fam["maps"], fam.get("invariant_measure", "lebesgue"))


def build_cocycle(coc: dict) -> CocycleGenerator:
    floor = coc.get("det_floor", 1e-300)
    kind = coc["kind"]
    if kind == "constant":
        return CocycleGenerator.constant(coc["matrix"], det_floor=floor)
    if kind == "piecewise_constant":
        return CocycleGenerator.piecewise_constant(coc["breakpoints"], coc["matrices"], det_floor=floor)
    return CocycleGenerator.parametric(coc["entries"], det_floor=floor)


def build_source(src: dict | None, N: int, seed: int) -> WordSource:
    if src is None:
        return WordSource.random(N, seed)
    if src["kind"] == "random":
        return WordSource.random(N, src.get("seed", seed))
    word = Word.parse(str(src["word"]), N)
    return WordSource.periodic(word) if src["kind"] == "periodic" else WordSource.explicit(word)


def build_observable(obs: dict, cocycle: CocycleGenerator | None) -> ObservableSequence:
    kind = obs["kind"]
    if kind == "ergodic_sum":
        return ObservableSequence.ergodic_sum(str(obs["phi"]))
    if kind == "log_norm_cocycle":
        return ObservableSequence.log_norm(cocycle)
    return ObservableSequence.log_conorm(cocycle)


def fekete_values(exp: dict) -> list[float]:
    if "values" in exp:
        return [float(v) for v in exp["values"]]
    expr = Expression(str(exp["sequence"]), var="k")
    return [float(expr(k)) for k in range(1, exp["K"] + 1)]


def config_to_json(cfg: RunConfig) -> str:
    return json.dumps(cfg.echo(), sort_keys=True, indent=2, default=_jsonable)


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    raise TypeError(f"not serializable: {type(v).__name__}")
