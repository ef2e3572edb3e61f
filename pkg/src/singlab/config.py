"""Line-oriented key-value run configuration.

One assignment per line, ``block.key = value``, where the value is a Python
literal (numbers, strings, lists, dicts, ``true``/``false``). ``#`` starts a
comment. The top-level key ``scenario`` names a registered scenario; without
it the problem blocks are run as a plain ladder (``monotone_ladder``).

    scenario = "monotone_ladder"
    grid.n = 1
    grid.N = 64
    operator.s = 0.5
    physics.gamma = 2.0
    physics.f = "constant"
    physics.f_params = {"value": 1.0}
    ladder.k = [1, 2, 4, 8]
    output.dir = "runs/ladder"
    output.emit_plots = true
    params.box_fraction = 0.5

``params.*`` passes scenario-specific settings through unchanged.
"""

from __future__ import annotations

import ast
import re
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["ConfigSchemaError", "RunConfig", "parse_config", "load_config", "format_config"]

DEFAULT_SCENARIO = "monotone_ladder"

# block -> key -> (scenario parameter name, accepted python types)
_NUM = (int, float)
_FIELD = (int, float, str)
SCHEMA: dict[str, dict[str, tuple[str, tuple]]] = {
    "grid": {"n": ("n", (int,)), "N": ("N", (int,))},
    "operator": {"s": ("s", _NUM)},
    "physics": {
        "gamma": ("gamma", _FIELD),
        "gamma_params": ("gamma_params", (dict,)),
        "f": ("f", _FIELD),
        "f_params": ("f_params", (dict,)),
        "u0": ("u0", _FIELD),
        "u0_params": ("u0_params", (dict,)),
        "T": ("T", _NUM),
        "tau": ("tau", _NUM),
        "scheme": ("scheme", (str,)),
        "threads": ("threads", (int,)),
    },
    "ladder": {"k": ("ladder", (list,))},
    "output": {"dir": ("", (str,)), "emit_plots": ("", (bool,))},
}
REQUIRED = (("grid", "n"), ("grid", "N"))

_LINE = re.compile(r"^(?P<key>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)\s*=\s*(?P<value>.+)$")


class ConfigSchemaError(ValueError):
    """Schema violation; ``line`` is 1-based or None when not tied to a line."""

    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)


@dataclass
class RunConfig:
    scenario: str = DEFAULT_SCENARIO
    grid: dict = field(default_factory=dict)
    operator: dict = field(default_factory=dict)
    physics: dict = field(default_factory=dict)
    ladder: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def out_dir(self) -> str | None:
        return self.output.get("dir")

    @property
    def emit_plots(self) -> bool:
        return bool(self.output.get("emit_plots", True))

    def scenario_config(self) -> dict:
        """Flat parameter dict for ``run_scenario``."""
        out = {}
        for block, keys in SCHEMA.items():
            if block == "output":
                continue
            for key, value in getattr(self, block).items():
                out[keys[key][0]] = value
        out.update(self.params)
        return out

    def as_dict(self) -> dict:
        d = asdict(self)
        d.pop("lines")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> RunConfig:
        return parse_config(format_config(cls(**{k: v for k, v in d.items() if k != "lines"})))


_JSON_NAMES = {"true": True, "false": False, "null": None}


class _JsonNames(ast.NodeTransformer):
    # bare true/false/null become constants; quoted text is left alone
    def visit_Name(self, node):
        if node.id in _JSON_NAMES:
            return ast.copy_location(ast.Constant(_JSON_NAMES[node.id]), node)
        return node


def _literal(text: str):
    tree = _JsonNames().visit(ast.parse(text.strip(), mode="eval"))
    return ast.literal_eval(tree)


def _strip_comment(line: str) -> str:
    out, quote = [], None
    for ch in line:
        if quote:
            if ch == quote:
                quote = None
        elif ch in "\"'":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
    return "".join(out).strip()


def _check_type(block: str, key: str, value, line: int, source: str):
    if block == "params":
        return
    if block == "" and key == "scenario":
        if not isinstance(value, str):
            raise ConfigSchemaError("scenario must be a string", line, source)
        return
    allowed = SCHEMA[block][key][1]
    ok = isinstance(value, allowed) and not (isinstance(value, bool) and bool not in allowed)
    if not ok:
        names = " or ".join(t.__name__ for t in allowed)
        raise ConfigSchemaError(f"{block}.{key} must be {names}, got {value!r}", line, source)
    if (block, key) == ("grid", "n") and value not in (1, 2, 3):
        raise ConfigSchemaError("grid.n must be 1, 2 or 3", line, source)
    if (block, key) == ("grid", "N") and value < 4:
        raise ConfigSchemaError("grid.N must be >= 4", line, source)
    if (block, key) == ("ladder", "k"):
        if not value or not all(isinstance(k, _NUM) and not isinstance(k, bool) for k in value):
            raise ConfigSchemaError("ladder.k must be a non-empty list of numbers", line, source)


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    """Parse and schema-check a configuration; raises ``ConfigSchemaError``."""
    cfg = RunConfig()
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        m = _LINE.match(line)
        if not m:
            raise ConfigSchemaError(f"expected 'block.key = value', got {raw.strip()!r}", lineno, source)
        dotted = m.group("key")
        if dotted in seen:
            raise ConfigSchemaError(f"duplicate key {dotted!r} (first set on line {seen[dotted]})", lineno, source)
        seen[dotted] = lineno
        block, _, key = dotted.rpartition(".")
        if block == "" and key != "scenario":
            raise ConfigSchemaError(f"unknown key {dotted!r}; top-level keys: scenario", lineno, source)
        if block and block != "params" and block not in SCHEMA:
            raise ConfigSchemaError(
                f"unknown block {block!r}; blocks: {', '.join(list(SCHEMA) + ['params'])}", lineno, source
            )
        if block in SCHEMA and key not in SCHEMA[block]:
            raise ConfigSchemaError(
                f"unknown key {dotted!r}; {block} takes: {', '.join(SCHEMA[block])}", lineno, source
            )
        try:
            value = _literal(m.group("value"))
        except (ValueError, SyntaxError):
            raise ConfigSchemaError(f"value of {dotted!r} is not a literal: {m.group('value')!r}", lineno, source) from None
        _check_type(block, key, value, lineno, source)
        if block == "":
            cfg.scenario = value
        else:
            getattr(cfg, block)[key] = value
        cfg.lines[dotted] = lineno
    for block, key in REQUIRED:
        if key not in getattr(cfg, block):
            raise ConfigSchemaError(f"missing required key '{block}.{key}'", None, source)
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigSchemaError(f"cannot read config: {exc.strerror}", None, str(path)) from None
    return parse_config(text, str(path))


def format_config(cfg: RunConfig) -> str:
    """Canonical text form (keys sorted per block) that parses back to an equal ``RunConfig``."""
    lines = [f"scenario = {cfg.scenario!r}"]
    for block in ("grid", "operator", "physics", "ladder", "output", "params"):
        for key, value in sorted(getattr(cfg, block).items()):
            lines.append(f"{block}.{key} = {value!r}")
    return "\n".join(lines) + "\n"
