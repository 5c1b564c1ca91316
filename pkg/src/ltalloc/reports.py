"""Tables and plot data built from the library calls."""

import csv
import io
import math
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path

from . import aggregation as agg
from . import closed_form as cf
from .errors import InvalidParams, NonNormalRegime
from .var_kernel import BRANDT_PARAMS, DiscreteVarParams, validate


@dataclass
class RunConfig:
    var_params: DiscreteVarParams = BRANDT_PARAMS
    percentiles: list = field(default_factory=lambda: [10, 30, 50, 70, 90])
    gammas: list = field(default_factory=lambda: [5, 15])
    horizons: list = field(default_factory=lambda: [10, 20, 30, 40])
    output_dir: Path = Path("out")
    seed: int = 0

    def __post_init__(self):
        for name in ("percentiles", "gammas", "horizons"):
            if not getattr(self, name):
                raise InvalidParams("list must be nonempty", field=name)
        if any(not 0 < p < 100 for p in self.percentiles):
            raise InvalidParams("percentiles must lie in (0, 100)", field="percentiles")
        validate(self.var_params)
        self.output_dir = Path(self.output_dir)


# Garlappi-Skoulakis (2009) constrained allocations in percent, quoted as
# reference values only: {(T, gamma): [X_(10), X_(30), X_(50), X_(70), X_(90)]}.
# They are never recomputed here.
GS_TABLE3 = {
    (10, 5): (0.0, 13.3, 43.2, 73.1, 100.0),
    (10, 15): (0.0, 4.3, 15.4, 27.0, 44.7),
    (20, 5): (0.0, 24.4, 57.2, 89.7, 100.0),
    (20, 15): (0.0, 10.7, 25.1, 40.4, 63.2),
    (30, 5): (0.0, 32.8, 68.4, 100.0, 100.0),
    (30, 15): (0.0, 17.5, 35.2, 54.0, 80.7),
    (40, 5): (0.0, 38.8, 77.6, 100.0, 100.0),
    (40, 15): (0.0, 24.1, 44.5, 65.7, 94.6),
}
GS_PERCENTILES = (10, 30, 50, 70, 90)


def gs_reference(T, gamma, p):
    row = GS_TABLE3.get((T, gamma))
    if row is None or p not in GS_PERCENTILES:
        return None
    return row[GS_PERCENTILES.index(p)]


def round_half_away(x, digits=1):
    """Round to ``digits`` decimals, ties away from zero (on the shortest repr)."""
    q = Decimal(1).scaleb(-digits)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))


def fmt_cell(value, raw=False):
    if value is None:
        return "n/a"
    if raw:
        return repr(float(value))
    v = round_half_away(value, 1)
    return f"{v + 0.0:.1f}"  # + 0.0 turns -0.0 into 0.0


@dataclass
class Table:
    title: str
    header: list
    rows: list  # each row: [T, label, value, value, ...]; value None = n/a

    def to_csv(self, raw=False):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow(row[:2] + [fmt_cell(v, raw) for v in row[2:]])
        return buf.getvalue()

    def to_text(self, raw=False):
        cells = [self.header] + [
            [str(r[0]), r[1]] + [fmt_cell(v, raw) for v in r[2:]] for r in self.rows
        ]
        widths = [max(len(c[i]) for c in cells) for i in range(len(self.header))]
        lines = [self.title]
        for c in cells:
            lines.append(
                "  ".join(
                    s.ljust(w) if i < 2 else s.rjust(w)
                    for i, (s, w) in enumerate(zip(c, widths))
                )
            )
        return "\n".join(lines) + "\n"


def percentile_points(config):
    dist = agg.x_distribution(config.var_params)
    return [agg.x_percentile(dist, p) for p in config.percentiles]


def _header(config):
    return ["T", ""] + [f"g={g:g} X({p:g})" for g in config.gammas for p in config.percentiles]


def _cell(grid, i, j, k, attr, scale=100.0):
    d = grid[i, j, k]
    if isinstance(d, NonNormalRegime):
        return None
    return getattr(d, attr) * scale


def table2(config):
    """Unconstrained myopic (MD) and hedging (HD) demands, percent."""
    cont = agg.recover_continuous(config.var_params)
    xs = percentile_points(config)
    grid = cf.evaluate_grid(cont, config.gammas, config.horizons, xs)
    rows = []
    nx = len(xs)
    for i, T in enumerate(config.horizons):
        for label, attr in (("MD", "myopic"), ("HD", "hedging")):
            vals = [
                _cell(grid, i, j, k, attr)
                for j in range(len(config.gammas))
                for k in range(nx)
            ]
            rows.append([T, label] + vals)
    return Table("Myopic and hedging demands (%)", _header(config), rows)


def table3(config):
    """Constrained allocation (LT), reference GS values and LT - GS, percent.

    The GS line is reference data, not reproduced by this package.
    """
    cont = agg.recover_continuous(config.var_params)
    xs = percentile_points(config)
    grid = cf.evaluate_grid(cont, config.gammas, config.horizons, xs)
    rows = []
    for i, T in enumerate(config.horizons):
        lt, gs, delta = [], [], []
        for j, g in enumerate(config.gammas):
            for k, p in enumerate(config.percentiles):
                v = _cell(grid, i, j, k, "constrained")
                ref = gs_reference(T, g, p)
                lt.append(v)
                gs.append(ref)
                delta.append(None if v is None or ref is None else v - ref)
        rows.append([T, "LT"] + lt)
        rows.append([T, "GS (reference, not reproduced)"] + gs)
        rows.append([T, "Delta"] + delta)
    return Table("Optimal constrained allocation to stocks (%)", _header(config), rows)


def format_xy(x, y):
    return f"{x:.6g} {y:.6g}\n"


def write_xy(path, pairs):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for x, y in pairs:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ValueError(f"non-finite value in {path.name}: ({x}, {y})")
            fh.write(format_xy(x, y))
    return path


GAMMA_GRID = [1.0 + i / 10 for i in range(191)]  # 1.0 .. 20.0


def figure1(config, out_dir):
    """Hedging demand vs gamma at X = theta for each horizon, plus the myopic curve."""
    cont = agg.recover_continuous(config.var_params)
    x = cont.theta
    files = []
    for T in config.horizons:
        pairs = cf.sweep("gamma", GAMMA_GRID, cont, x=x, horizon=T, field="hedging")
        files.append(write_xy(Path(out_dir) / f"explicit-solution-hd-wrt-gamma-{T:g}.txt", pairs))
    pairs = cf.sweep("gamma", GAMMA_GRID, cont, x=x, horizon=0, field="myopic")
    files.append(write_xy(Path(out_dir) / "explicit-solution-md-wrt-gamma.txt", pairs))
    return files


def figure2(config, out_dir, step=0.25):
    """Constrained allocation (percent) vs horizon, per gamma and percentile."""
    cont = agg.recover_continuous(config.var_params)
    dist = agg.x_distribution(config.var_params)
    t_max = max(config.horizons)
    n = int(round(t_max / step))
    horizons = [t_max * i / n for i in range(n + 1)]
    files = []
    for g in config.gammas:
        for p in config.percentiles:
            x = agg.x_percentile(dist, p)
            pairs = cf.sweep("horizon", horizons, cont, x=x, gamma=g, field="constrained")
            name = f"explicit-solution-wrt-T-{g:g}-{p / 100:.6f}.txt"
            files.append(write_xy(Path(out_dir) / name, [(t, 100 * v) for t, v in pairs]))
    return files


def figure3_paths(config, gamma, horizon, percentile):
    cont = agg.recover_continuous(config.var_params)
    x0 = agg.x_percentile(agg.x_distribution(config.var_params), percentile)
    prefs = cf.Preferences(gamma=gamma, horizon_T=horizon)
    return cf.expected_path(cont, prefs, x0)


def figure3_name(gamma, horizon, percentile, kind="explicit-solution-path"):
    return f"{kind}-{gamma:g}-{percentile / 100:.6f}-{horizon:g}.txt"


def staircase_pairs(sequence):
    """Open-loop sequence as plot points; the last weight is held to t = T."""
    seq = list(sequence)
    return [(float(t), float(a)) for t, a in enumerate(seq)] + [(float(len(seq)), float(seq[-1]))]
