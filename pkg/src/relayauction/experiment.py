"""Monte-Carlo comparison of the auctions over relay counts and schemes.

Mechanisms that answer the same question (constant power, constant rate,
BS-utility maximisation) are run on identical scenarios: a trial is kept
only if every mechanism of its family succeeds, otherwise the trial is
redrawn from a fresh substream and the redraw is counted.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .channel import COST_MODELS, MBPS, CellConfig, ConfigError, sample_scenario
from .matching import Uncoverable
from .mechanisms import InsufficientCompetition, MechanismKind, MechanismSpec, run_mechanism
from .relaying import ALL_SCHEMES, Scheme

CSV_HEADER = ("mechanism", "scheme", "num_relays", "avg_rate_mbps", "avg_bs_utility",
              "avg_interference_cost", "resampled_trials")
RESAMPLE_FACTOR = 10

FAMILIES = {
    MechanismKind.PROPOSED_CONST_POWER: "const_power",
    MechanismKind.VCG_CONST_POWER: "const_power",
    MechanismKind.PROPOSED_CONST_RATE: "const_rate",
    MechanismKind.VCG_CONST_RATE: "const_rate",
    MechanismKind.PROPOSED_BS_UTIL_MAX: "bs_util_max",
    MechanismKind.FULL_INFO_BASELINE: "bs_util_max",
}


class ExperimentFailure(RuntimeError):
    """Too many trials had to be redrawn for some grid cell."""


@dataclass(frozen=True)
class ExperimentConfig:
    cell: CellConfig = field(default_factory=CellConfig)
    mechanisms: tuple = tuple(MechanismSpec(k) for k in MechanismKind)
    schemes: tuple = ALL_SCHEMES
    relay_counts: tuple = (20, 40, 60, 80, 100)
    trials: int = 100
    cost_model: str = "rate_delta"
    output_path: str | None = None
    workers: int = 1

    def validate(self) -> None:
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not self.relay_counts:
            raise ConfigError("relay_counts must not be empty")
        if not self.mechanisms or not self.schemes:
            raise ConfigError("need at least one mechanism and one scheme")
        if self.cost_model not in COST_MODELS:
            raise ConfigError(f"cost_model must be one of {COST_MODELS}")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        for r in self.relay_counts:
            replace(self.cell, num_relays_r=r).validate()


@dataclass(frozen=True)
class MetricsRow:
    mechanism: str
    scheme: str
    num_relays: int
    avg_rate_mbps: float
    avg_bs_utility: float
    avg_interference_cost: float
    resampled_trials: int

    def rounded(self) -> "MetricsRow":
        """The row as it reads back from CSV (9 significant digits)."""
        return replace(self, **{n: float(_fmt(getattr(self, n))) for n in
                                ("avg_rate_mbps", "avg_bs_utility", "avg_interference_cost")})


# -- running ------------------------------------------------------------------

def _trial_metrics(outcome):
    D = len(outcome.assignment)
    rate = math.fsum(outcome.achieved_rate) / D / MBPS
    cost = math.fsum(outcome.interference_cost) / D
    return rate, outcome.bs_utility, cost


def _run_cell(cfg: ExperimentConfig, specs: tuple, scheme: Scheme, num_relays: int):
    """All trials of one (family, scheme, R) cell; returns rows in ``specs`` order."""
    cell = replace(cfg.cell, num_relays_r=num_relays)
    specs = tuple(replace(s, scheme=scheme, cost_model=cfg.cost_model) for s in specs)
    per_spec = [[] for _ in specs]
    resampled = 0
    for t in range(cfg.trials):
        attempt = 0
        while True:
            s = sample_scenario(cell, t + attempt * cfg.trials)
            try:
                outs = [run_mechanism(s, spec) for spec in specs]
                break
            except (Uncoverable, InsufficientCompetition):
                resampled += 1
                attempt += 1
                if resampled > RESAMPLE_FACTOR * cfg.trials:
                    raise ExperimentFailure(
                        f"{scheme} R={num_relays}: more than "
                        f"{RESAMPLE_FACTOR * cfg.trials} redraws needed") from None
        for bucket, out in zip(per_spec, outs):
            bucket.append(_trial_metrics(out))
    rows = []
    for spec, bucket in zip(specs, per_spec):
        cols = list(zip(*bucket))
        rows.append(MetricsRow(spec.kind.value, str(scheme), num_relays,
                               *(math.fsum(c) / cfg.trials for c in cols), resampled))
    return rows


def _cells(cfg: ExperimentConfig):
    families = {}
    for spec in cfg.mechanisms:
        families.setdefault(FAMILIES[spec.kind], []).append(spec)
    for specs in families.values():
        for scheme in cfg.schemes:
            for r in cfg.relay_counts:
                yield tuple(specs), scheme, r


def run_experiment(cfg: ExperimentConfig) -> list:
    """Rows ordered by mechanism, scheme and relay count, as configured."""
    cfg.validate()
    cells = list(_cells(cfg))
    if cfg.workers == 1:
        results = [_run_cell(cfg, *c) for c in cells]
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_run_cell, cfg, *c) for c in cells]
            results = [f.result() for f in futures]
    rows = [row for cell_rows in results for row in cell_rows]
    order = {spec.kind.value: k for k, spec in enumerate(cfg.mechanisms)}
    scheme_order = {str(s): k for k, s in enumerate(cfg.schemes)}
    relay_order = {r: k for k, r in enumerate(cfg.relay_counts)}
    rows.sort(key=lambda r: (order[r.mechanism], scheme_order[r.scheme],
                             relay_order[r.num_relays]))
    return rows


# -- serialisation ------------------------------------------------------------

def _fmt(x) -> str:
    return f"{x:.9g}"


def emit_csv(rows, path) -> Path:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to write")
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in rows:
            w.writerow([r.mechanism, r.scheme, r.num_relays, _fmt(r.avg_rate_mbps),
                        _fmt(r.avg_bs_utility), _fmt(r.avg_interference_cost),
                        r.resampled_trials])
    return path


def read_csv(path) -> list:
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        return [MetricsRow(m, s, int(n), float(r), float(u), float(c), int(k))
                for m, s, n, r, u, c, k in reader]


_PLOT_TEMPLATE = '''"""Plot experiment results: one figure per (family, metric)."""
import csv
import sys
from collections import defaultdict
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

CSV_PATH = Path(sys.argv[1] if len(sys.argv) > 1 else {csv_name!r})
FAMILIES = {families!r}
METRICS = (
    ("avg_rate_mbps", "Average data rate per destination (Mbps)"),
    ("avg_bs_utility", "Average BS utility"),
    ("avg_interference_cost", "Average interference cost per destination"),
)

curves = defaultdict(list)
with CSV_PATH.open() as fh:
    for row in csv.DictReader(fh):
        curves[(row["mechanism"], row["scheme"])].append(row)

for family, kinds in FAMILIES.items():
    present = [key for key in curves if key[0] in kinds]
    if not present:
        continue
    for metric, label in METRICS:
        fig, ax = plt.subplots(figsize=(6, 4))
        for mech, scheme in sorted(present):
            pts = sorted((int(r["num_relays"]), float(r[metric])) for r in curves[(mech, scheme)])
            ax.plot(*zip(*pts), marker="o", label=f"{{mech}} / {{scheme}}")
        ax.set_xlabel("Number of relay nodes")
        ax.set_ylabel(label)
        ax.grid(True, alpha=0.3)
        ax.legend(fontsize=7)
        fig.tight_layout()
        out = CSV_PATH.with_name(f"{{family}}_{{metric}}.png")
        fig.savefig(out, dpi=120)
        plt.close(fig)
        print("wrote", out)
'''


def emit_plot_script(rows, path, csv_name: str = "results.csv") -> Path:
    """Write a standalone matplotlib script that renders the CSV."""
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to plot")
    families = {}
    for kind, fam in FAMILIES.items():
        families.setdefault(fam, []).append(kind.value)
    path = Path(path)
    path.write_text(_PLOT_TEMPLATE.format(csv_name=csv_name, families=families))
    return path


# -- configuration files ------------------------------------------------------

_CELL_KEYS = {f.name for f in fields(CellConfig)}
_SPEC_KEYS = {"fixed_power_p", "c_t", "p_m", "a", "c_i"}
_OTHER_KEYS = {"mechanisms", "schemes", "relay_counts", "trials", "cost_model", "workers",
               "target_rate_mbps", "zeta", "num_destinations", "num_relays",
               "output_path"}


def _parse_flat(text: str) -> dict:
    out = {}
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _coerce(raw: str, like):
    if isinstance(like, bool):
        if isinstance(raw, bool):
            return raw
        if str(raw).lower() in ("1", "true", "yes", "on"):
            return True
        if str(raw).lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    return type(like)(raw) if not isinstance(like, float) else float(raw)


def config_from_mapping(data: dict) -> ExperimentConfig:
    """Build a validated config from a flat mapping (JSON object or key = value)."""
    unknown = set(data) - _CELL_KEYS - _SPEC_KEYS - _OTHER_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    try:
        defaults = CellConfig()
        cell_kw = {k: _coerce(data[k], getattr(defaults, k)) for k in _CELL_KEYS & set(data)}
        if "num_destinations" in data:
            cell_kw["num_destinations_d"] = int(data["num_destinations"])
        if "num_relays" in data:
            cell_kw["num_relays_r"] = int(data["num_relays"])
        cell = CellConfig(**cell_kw)

        spec_kw = {k: float(data[k]) for k in _SPEC_KEYS & set(data)}
        if "target_rate_mbps" in data:
            spec_kw["target_rates"] = float(data["target_rate_mbps"]) * MBPS
        zeta = float(data.get("zeta", 1.0))
        kinds = [_kind(k) for k in _as_list(data["mechanisms"])] if "mechanisms" in data \
            else list(MechanismKind)
        mechanisms = tuple(MechanismSpec(k, **spec_kw) for k in kinds)
        schemes = tuple(Scheme.parse(x, zeta) for x in _as_list(data["schemes"])) \
            if "schemes" in data else tuple(Scheme(s.tag, zeta) for s in ALL_SCHEMES)
        other = {}
        if "relay_counts" in data:
            other["relay_counts"] = tuple(int(x) for x in _as_list(data["relay_counts"]))
        for key, cast in (("trials", int), ("workers", int), ("cost_model", str),
                          ("output_path", str)):
            if key in data:
                other[key] = cast(data[key])
        cfg = ExperimentConfig(cell=cell, mechanisms=mechanisms, schemes=schemes, **other)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _kind(text: str) -> MechanismKind:
    key = text.replace("-", "").replace("_", "").lower()
    for kind in MechanismKind:
        if kind.value.lower() == key:
            return kind
    raise ConfigError(f"unknown mechanism {text!r}")


def load_config(path) -> ExperimentConfig:
    """Read a JSON object or a flat ``key = value`` file."""
    text = Path(path).read_text()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
    else:
        data = _parse_flat(text)
    return config_from_mapping(data)


def write_results(rows, out_dir) -> tuple:
    out = Path(out_dir)
    os.makedirs(out, exist_ok=True)
    csv_path = emit_csv(rows, out / "results.csv")
    script = emit_plot_script(rows, out / "plot_results.py")
    return csv_path, script

