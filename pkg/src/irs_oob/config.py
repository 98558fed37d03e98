"""Experiment definition files.

A spec is UTF-8 text with one ``section.key = value`` per line; ``#`` starts a
comment. Lists are comma separated, optionally in brackets, or written as an
inclusive range ``start:step:stop``. Positions are ``x,y``; UE lists separate
positions with ``;``. Unknown keys are rejected. Every absent key takes the
default evaluation setup.

Example::

    experiment.kind = se-vs-snr
    sim.trials = 100
    layout.bs_x = 0,200
    sweep.gamma_db = 110:5:160
    sweep.n_elements = 0, 16, 64
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from irs_oob.geometry import NetworkLayout, PathLossParams, Position, db_to_linear
from irs_oob.montecarlo import DEFAULT_SEED, SimConfig

KINDS = ("se-vs-snr", "se-vs-n", "ccdf", "validate")

KIND_DEFAULTS = {
    "se-vs-snr": {"sweep.n_elements": (0, 16, 64), "sweep.gamma_db": tuple(range(110, 161, 5))},
    "se-vs-n": {"sweep.n_elements": (4, 8, 16, 32, 64, 128, 256, 512), "sweep.gamma_db": (130, 150)},
    "ccdf": {"sweep.n_elements": (0, 4, 8, 16, 64, 256), "sweep.gamma_db": (135,)},
    "validate": {"sweep.n_elements": (8, 32), "sweep.gamma_db": (135,)},
}


class SpecError(Exception):
    """Malformed or semantically invalid experiment spec."""


def _float(key, text):
    try:
        v = float(text)
    except ValueError:
        raise SpecError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise SpecError(f"{key}: value must be finite, got {text!r}")
    return v


def _int(key, text):
    v = _float(key, text)
    if v != int(v):
        raise SpecError(f"{key}: expected an integer, got {text!r}")
    return int(v)


def _float_list(key, text):
    text = text.strip()
    if text.startswith("[") and text.endswith("]"):
        text = text[1:-1]
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise SpecError(f"{key}: range must be start:step:stop, got {text!r}")
        start, step, stop = (_float(key, p) for p in parts)
        if step <= 0 or stop < start:
            raise SpecError(f"{key}: empty or descending range {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(float(start + i * step) for i in range(count))
    items = [t for t in (p.strip() for p in text.split(",")) if t]
    if not items:
        raise SpecError(f"{key}: list must be non-empty")
    return tuple(_float(key, t) for t in items)


def _int_list(key, text):
    values = _float_list(key, text)
    if any(v != int(v) for v in values):
        raise SpecError(f"{key}: expected integers, got {text!r}")
    return tuple(int(v) for v in values)


def _position(key, text):
    text = text.strip().strip("()")
    parts = [p for p in text.split(",")]
    if len(parts) != 2:
        raise SpecError(f"{key}: expected 'x,y', got {text!r}")
    return Position(_float(key, parts[0]), _float(key, parts[1]))


def _positions(key, text):
    return tuple(_position(key, p) for p in text.split(";") if p.strip())


def _pair(key, text):
    lo, hi = _position(key, text)
    if not hi > lo:
        raise SpecError(f"{key}: interval must satisfy lo < hi, got {text!r}")
    return (lo, hi)


def _bool(key, text):
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise SpecError(f"{key}: expected true/false, got {text!r}")


def _kind(key, text):
    t = text.strip()
    if t not in KINDS:
        raise SpecError(f"{key}: must be one of {', '.join(KINDS)}, got {t!r}")
    return t


def _str(key, text):
    return text.strip()


# key -> (parser, default); None defaults are filled per kind or derived
FIELDS = {
    "experiment.kind": (_kind, "se-vs-snr"),
    "sim.k_ues": (_int, 10),
    "sim.q_ues": (_int, 10),
    "sim.n_elements": (_int, 64),
    "sim.slots": (_int, 1000),
    "sim.trials": (_int, 100),
    "sim.seed": (_int, DEFAULT_SEED),
    "layout.bs_x": (_position, Position(0.0, 200.0)),
    "layout.bs_y": (_position, Position(200.0, 0.0)),
    "layout.irs": (_position, Position(0.0, 0.0)),
    "layout.region_x": (_pair, (0.0, 200.0)),
    "layout.region_y": (_pair, (0.0, 200.0)),
    "layout.ues_x": (_positions, ()),
    "layout.ues_y": (_positions, ()),
    "pathloss.c0_db": (_float, -30.0),
    "pathloss.d0": (_float, 1.0),
    "pathloss.alpha_bs_irs": (_float, 1.5),
    "pathloss.alpha_irs_ue": (_float, 2.0),
    "pathloss.alpha_direct": (_float, 3.0),
    "sweep.gamma_db": (_float_list, None),
    "sweep.n_elements": (_int_list, None),
    "ccdf.ue": (_position, Position(100.0, 100.0)),
    "ccdf.samples": (_int, 100_000),
    "ccdf.grid_points": (_int, 512),
    "validate.samples": (_int, 1_000_000),
    "validate.mc_sigmas": (_float, 3.0),
    "output.dir": (_str, "results"),
    "output.plots": (_bool, True),
}

# keys that do not influence any computed number; kept out of CSV headers
_PRESENTATION_KEYS = ("output.dir", "output.plots")


@dataclass
class ExperimentSpec:
    kind: str
    sim: SimConfig
    output_dir: Path
    n_list: tuple[int, ...]
    gamma_db: tuple[float, ...]
    ccdf_ue: Position
    ccdf_samples: int
    grid_points: int
    validate_samples: int
    mc_sigmas: float
    plots: bool
    values: dict = field(repr=False, default_factory=dict)

    def header_lines(self) -> list[str]:
        """The resolved spec in file syntax, one ``key = value`` per line."""
        lines = []
        for key in FIELDS:
            if key in _PRESENTATION_KEYS:
                continue
            text = format_value(self.values[key])
            if text:
                lines.append(f"{key} = {text}")
        return lines


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, Position):
        return f"{v.x!r},{v.y!r}"
    if isinstance(v, tuple):
        if v and isinstance(v[0], Position):
            return "; ".join(format_value(p) for p in v)
        return ", ".join(format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def parse_text(text: str, source: str = "<spec>") -> dict:
    """Parse spec text into ``{key: value}`` for the keys present."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip().replace("−", "-")
        if not line:
            continue
        if "=" not in line:
            raise SpecError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in FIELDS:
            raise SpecError(f"{source}:{lineno}: unknown key {key!r}")
        if key in out:
            raise SpecError(f"{source}:{lineno}: duplicate key {key!r}")
        parser, _ = FIELDS[key]
        try:
            out[key] = parser(key, value)
        except SpecError as exc:
            raise SpecError(f"{source}:{lineno}: {exc}") from None
    return out


def build_spec(values: dict, kind: str | None = None) -> ExperimentSpec:
    """Apply defaults to parsed values and validate them."""
    file_kind = values.get("experiment.kind")
    if kind is not None and file_kind is not None and kind != file_kind:
        raise SpecError(f"experiment.kind: spec says {file_kind!r} but {kind!r} was requested")
    kind = kind or file_kind or FIELDS["experiment.kind"][1]
    resolved = {key: default for key, (_, default) in FIELDS.items()}
    resolved.update(KIND_DEFAULTS[kind])
    resolved.update(values)
    resolved["experiment.kind"] = kind
    resolved["sweep.gamma_db"] = tuple(float(g) for g in resolved["sweep.gamma_db"])
    resolved["sweep.n_elements"] = tuple(int(n) for n in resolved["sweep.n_elements"])
    v = resolved

    for key in ("sim.k_ues", "sim.q_ues", "sim.slots", "sim.trials", "ccdf.samples", "validate.samples"):
        if v[key] < 1:
            raise SpecError(f"{key}: must be >= 1, got {v[key]}")
    if v["sim.n_elements"] < 0:
        raise SpecError(f"sim.n_elements: must be >= 0, got {v['sim.n_elements']}")
    if any(n < 0 for n in v["sweep.n_elements"]):
        raise SpecError(f"sweep.n_elements: entries must be >= 0, got {v['sweep.n_elements']}")
    if not 0 <= v["sim.seed"] < 2**64:
        raise SpecError(f"sim.seed: must be an unsigned 64-bit integer, got {v['sim.seed']}")
    if v["ccdf.grid_points"] < 2:
        raise SpecError(f"ccdf.grid_points: must be >= 2, got {v['ccdf.grid_points']}")
    if not v["validate.mc_sigmas"] > 0:
        raise SpecError(f"validate.mc_sigmas: must be > 0, got {v['validate.mc_sigmas']}")
    if kind == "se-vs-n" and sum(1 for n in v["sweep.n_elements"] if n > 0) < 2:
        raise SpecError("sweep.n_elements: se-vs-n needs at least two positive element counts")

    try:
        pathloss = PathLossParams(
            c0=float(db_to_linear(v["pathloss.c0_db"])),
            d0=v["pathloss.d0"],
            alpha_bs_irs=v["pathloss.alpha_bs_irs"],
            alpha_irs_ue=v["pathloss.alpha_irs_ue"],
            alpha_direct=v["pathloss.alpha_direct"],
        )
    except ValueError as exc:
        raise SpecError(f"pathloss: {exc}") from None
    layout = NetworkLayout(
        bs_x=v["layout.bs_x"],
        bs_y=v["layout.bs_y"],
        irs=v["layout.irs"],
        ues_x=v["layout.ues_x"],
        ues_y=v["layout.ues_y"],
    )
    try:
        sim = SimConfig(
            k_ues=v["sim.k_ues"],
            q_ues=v["sim.q_ues"],
            n_elements=v["sim.n_elements"],
            slots=v["sim.slots"],
            trials=v["sim.trials"],
            gamma_db_grid=v["sweep.gamma_db"],
            seed=v["sim.seed"],
            layout=layout,
            pathloss=pathloss,
            region_x=v["layout.region_x"],
            region_y=v["layout.region_y"],
        )
    except ValueError as exc:
        raise SpecError(f"sim: {exc}") from None

    return ExperimentSpec(
        kind=kind,
        sim=sim,
        output_dir=Path(v["output.dir"]),
        n_list=v["sweep.n_elements"],
        gamma_db=v["sweep.gamma_db"],
        ccdf_ue=v["ccdf.ue"],
        ccdf_samples=v["ccdf.samples"],
        grid_points=v["ccdf.grid_points"],
        validate_samples=v["validate.samples"],
        mc_sigmas=v["validate.mc_sigmas"],
        plots=v["output.plots"],
        values=v,
    )


def load_spec(path=None, kind: str | None = None, overrides: dict | None = None) -> ExperimentSpec:
    """Read, default and validate a spec file.

    ``path=None`` means an empty spec. ``overrides`` maps keys to already
    parsed values (used for command-line flags such as ``--seed``).
    """
    values = {}
    if path is not None:
        path = Path(path)
        values = parse_text(path.read_text(encoding="utf-8"), str(path))
    if overrides:
        for key in overrides:
            if key not in FIELDS:
                raise SpecError(f"unknown key {key!r}")
        values.update(overrides)
    return build_spec(values, kind)
