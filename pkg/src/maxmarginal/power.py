"""Monte-Carlo power estimation over sweeps of dimension or dependence.

Every trial draws a fresh sample from a :class:`~maxmarginal.simgen.Scenario`
and runs one or more tests on it.  The sample for replicate ``s`` at sweep
value ``v`` of a study seeded with ``seed`` is generated from
:func:`trial_seed` ``(seed, v, s)``, and the same integer seeds any
permutation test run on that sample.  A point of a curve can therefore be
recomputed on its own, and a study can be resumed point by point.
"""
import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Tuple

import numpy as np

from .dcor import unbiased_dcor
from .errors import InvalidParameter
from .inference import (
    DEFAULT_PERMUTATIONS,
    METHODS,
    TEST_KINDS,
    chisq_avg_pvalue,
    chisq_full_pvalue,
    chisq_max_pvalue,
    permutation_test,
)
from .marginal import default_threads, marginal_grid, max_marginal
from .simgen import Scenario

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "family", "relationship", "method", "test_kind", "n", "p", "q", "d",
    "alpha", "replicates", "power_hat", "std_err", "seed",
)

# trials handed to one worker at a time
_TRIALS_PER_BLOCK = 16


def trial_seed(seed, sweep_value, replicate):
    """Integer seed of one Monte-Carlo trial."""
    ss = np.random.SeedSequence([int(seed), int(sweep_value), int(replicate)])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def sweep_value(scenario):
    """``p`` for the fixed-dependence family, ``d`` for the increasing one."""
    return scenario.p if scenario.family == "fixed_dep" else scenario.d


@dataclass(frozen=True)
class PowerPoint:
    scenario: Scenario
    method: str
    test_kind: str
    sweep_value: int
    alpha: float
    replicates: int
    power_hat: float
    std_err: float
    seed: int

    def row(self):
        """CSV row in :data:`CSV_COLUMNS` order (numbers at 17 digits)."""
        s = self.scenario
        return [
            s.family, s.relationship, self.method, self.test_kind,
            str(s.n), str(s.p), str(s.q), "" if s.d is None else str(s.d),
            format(self.alpha, ".17g"), str(self.replicates),
            format(self.power_hat, ".17g"), format(self.std_err, ".17g"),
            str(self.seed),
        ]

    def to_dict(self):
        return dict(zip(CSV_COLUMNS, self._typed_row()))

    def _typed_row(self):
        s = self.scenario
        return [
            s.family, s.relationship, self.method, self.test_kind, s.n, s.p,
            s.q, s.d, self.alpha, self.replicates, self.power_hat,
            self.std_err, self.seed,
        ]


@dataclass(frozen=True)
class PowerCurve:
    family: str
    relationship: str
    method: str
    test_kind: str
    points: Tuple[PowerPoint, ...]

    def __post_init__(self):
        values = [pt.sweep_value for pt in self.points]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidParameter("sweep values of a curve must increase strictly")
        for pt in self.points:
            if (pt.scenario.family, pt.scenario.relationship, pt.method,
                    pt.test_kind) != (self.family, self.relationship,
                                      self.method, self.test_kind):
                raise InvalidParameter("inconsistent metadata within a curve")

    @property
    def sweep(self):
        return [pt.sweep_value for pt in self.points]

    @property
    def power(self):
        return np.array([pt.power_hat for pt in self.points])

    @property
    def std_err(self):
        return np.array([pt.std_err for pt in self.points])


def _check_tests(tests):
    out = []
    for method, kind in tests:
        if method not in METHODS:
            raise InvalidParameter(f"unknown method {method!r}")
        if kind not in TEST_KINDS:
            raise InvalidParameter(f"unknown test kind {kind!r}")
        out.append((method, kind))
    if not out:
        raise InvalidParameter("at least one (method, test_kind) pair is needed")
    return tuple(out)


def _check_mc(alpha, replicates):
    if not (0.0 < float(alpha) < 1.0):
        raise InvalidParameter(f"alpha must lie in (0, 1), got {alpha}")
    if (isinstance(replicates, bool) or not isinstance(replicates, (int, np.integer))
            or replicates < 1):
        raise InvalidParameter(f"replicates must be an integer >= 1, got {replicates!r}")


def _trial_pvalues(x, y, tests, seed, permutations):
    """P-values of every requested test on one sample (threads = 1)."""
    n, p, q = x.shape[0], x.shape[1], y.shape[1]
    out = {}
    agg = None
    full = None
    for method, kind in tests:
        if kind == "permutation":
            out[method, kind] = permutation_test(
                x, y, method, permutations, seed, threads=1
            ).p_value
            continue
        if method == "full":
            if full is None:
                full = unbiased_dcor(x, y).dcor
            out[method, kind] = chisq_full_pvalue(full, n)
            continue
        if agg is None:
            agg = max_marginal(marginal_grid(x, y, threads=1))
        if method == "max":
            out[method, kind] = chisq_max_pvalue(agg.max_value, n, p, q)
        else:
            out[method, kind] = chisq_avg_pvalue(agg.avg_value, n, p, q)
    return out


def _rejection_counts(scenario, tests, alpha, replicates, seed, permutations, threads):
    sweep = sweep_value(scenario)
    blocks = [
        range(start, min(start + _TRIALS_PER_BLOCK, replicates))
        for start in range(0, replicates, _TRIALS_PER_BLOCK)
    ]

    def work(block):
        counts = dict.fromkeys(tests, 0)
        for s in block:
            tseed = trial_seed(seed, sweep, s)
            x, y = scenario.generate(tseed)
            pvals = _trial_pvalues(x, y, tests, tseed, permutations)
            for key in tests:
                counts[key] += pvals[key] < alpha
        return counts

    if threads == 1 or len(blocks) == 1:
        parts = [work(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=min(threads, len(blocks))) as pool:
            parts = list(pool.map(work, blocks))
    return {key: sum(part[key] for part in parts) for key in tests}


def _make_point(scenario, method, kind, alpha, replicates, rejections, seed):
    power_hat = rejections / replicates
    std_err = math.sqrt(power_hat * (1.0 - power_hat) / replicates)
    return PowerPoint(
        scenario, method, kind, sweep_value(scenario), float(alpha),
        int(replicates), power_hat, std_err, int(seed),
    )


def estimate_power(scenario, method="max", test_kind="chisquare", alpha=0.05,
                   replicates=200, seed=0, *, permutations=DEFAULT_PERMUTATIONS,
                   threads=None):
    """Rejection rate of one test on ``replicates`` samples from ``scenario``."""
    _check_mc(alpha, replicates)
    tests = _check_tests([(method, test_kind)])
    counts = _rejection_counts(
        scenario, tests, alpha, replicates, seed, permutations,
        default_threads(threads),
    )
    return _make_point(scenario, method, test_kind, alpha, replicates,
                       counts[tests[0]], seed)


# ---------------------------------------------------------------------------
# studies


@dataclass(frozen=True)
class Panel:
    """One relationship swept over ``p`` (fixed_dep) or ``d`` (increasing_dep)."""

    family: str
    relationship: str
    n: int
    sweep: Tuple[int, ...]
    p: Optional[int] = None
    q: Optional[int] = None

    def scenarios(self):
        for v in self.sweep:
            if self.family == "fixed_dep":
                yield Scenario("fixed_dep", self.relationship, self.n, int(v))
            else:
                yield Scenario("increasing_dep", self.relationship, self.n,
                               self.p, self.q, int(v))


@dataclass(frozen=True)
class StudyConfig:
    panels: Tuple[Panel, ...]
    tests: Tuple[Tuple[str, str], ...] = (
        ("max", "chisquare"), ("avg", "chisquare"), ("full", "chisquare"),
    )
    alpha: float = 0.05
    replicates: int = 200
    seed: int = 0
    permutations: int = DEFAULT_PERMUTATIONS
    name: str = field(default="custom", compare=False)

    def validate(self):
        _check_mc(self.alpha, self.replicates)
        _check_tests(self.tests)
        if not self.panels:
            raise InvalidParameter("the study has no panels")
        for panel in self.panels:
            if not panel.sweep:
                raise InvalidParameter(
                    f"empty sweep for {panel.family}/{panel.relationship}"
                )
            if list(panel.sweep) != sorted(set(panel.sweep)):
                raise InvalidParameter("sweep values must increase strictly")
            # constructing the scenarios validates every parameter
            list(panel.scenarios())
        return self

    def restrict(self, relationships=None, replicates=None, seed=None):
        """Copy keeping only ``relationships`` and/or overriding counts."""
        panels = self.panels
        if relationships:
            panels = tuple(p for p in panels if p.relationship in relationships)
        changes = {"panels": panels}
        if replicates is not None:
            changes["replicates"] = replicates
        if seed is not None:
            changes["seed"] = seed
        return replace(self, **changes)

    def to_dict(self):
        return {
            "name": self.name,
            "alpha": self.alpha,
            "replicates": self.replicates,
            "seed": self.seed,
            "permutations": self.permutations,
            "tests": [list(t) for t in self.tests],
            "panels": [
                {k: (list(v) if k == "sweep" else v)
                 for k, v in vars(p).items() if v is not None}
                for p in self.panels
            ],
        }

    @classmethod
    def from_dict(cls, data):
        try:
            panels = tuple(
                Panel(
                    family=p["family"],
                    relationship=p["relationship"],
                    n=int(p["n"]),
                    sweep=tuple(int(v) for v in p["sweep"]),
                    p=None if p.get("p") is None else int(p["p"]),
                    q=None if p.get("q") is None else int(p["q"]),
                )
                for p in data["panels"]
            )
            kwargs = {"panels": panels}
            if "tests" in data:
                kwargs["tests"] = tuple((m, k) for m, k in data["tests"])
            for key, conv in (("alpha", float), ("replicates", int), ("seed", int),
                              ("permutations", int), ("name", str)):
                if key in data:
                    kwargs[key] = conv(data[key])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameter(f"malformed study config: {exc!r}") from None
        return cls(**kwargs).validate()


FIGURE1_P = (5, 10, 20, 50, 100)
FIGURE1_LINEAR_P = FIGURE1_P + (200, 500, 1000)
FIGURE2_D = tuple(range(1, 11))


def _figure1(replicates, tests, name):
    panels = tuple(
        Panel("fixed_dep", rel, 100,
              FIGURE1_LINEAR_P if rel == "linear" else FIGURE1_P)
        for rel in ("linear", "quadratic", "fourth_root", "independent")
    )
    return StudyConfig(panels, tests, replicates=replicates, name=name)


def _figure2(replicates, tests, name):
    panels = (
        Panel("increasing_dep", "linear", 20, FIGURE2_D, 50, 50),
        Panel("increasing_dep", "quadratic", 50, FIGURE2_D, 50, 50),
    )
    return StudyConfig(panels, tests, replicates=replicates, name=name)


_CHI = (("max", "chisquare"), ("avg", "chisquare"), ("full", "chisquare"))
_PERM = (("max", "permutation"), ("avg", "chisquare"), ("full", "chisquare"))

PRESETS = {
    "figure1": lambda: _figure1(200, _CHI, "figure1"),
    "figure1-paper-scale": lambda: _figure1(1000, _CHI, "figure1-paper-scale"),
    "figure1-permutation": lambda: _figure1(200, _PERM, "figure1-permutation"),
    "figure1-permutation-paper-scale": lambda: _figure1(
        1000, _PERM, "figure1-permutation-paper-scale"),
    "figure2": lambda: _figure2(200, _CHI, "figure2"),
    "figure2-paper-scale": lambda: _figure2(1000, _CHI, "figure2-paper-scale"),
    "figure2-permutation": lambda: _figure2(200, _PERM, "figure2-permutation"),
    "figure2-permutation-paper-scale": lambda: _figure2(
        1000, _PERM, "figure2-permutation-paper-scale"),
}


def preset(name):
    """Named study configuration; see :data:`PRESETS`."""
    try:
        return PRESETS[name]().validate()
    except KeyError:
        raise InvalidParameter(
            f"unknown preset {name!r}; available: {', '.join(PRESETS)}"
        ) from None


def _point_key(scenario, method, kind):
    return (scenario.family, scenario.relationship, method, kind,
            scenario.n, scenario.p, scenario.q, scenario.d)


def power_study(config, *, threads=None, completed=None, progress=None):
    """Run every (panel, sweep value, test) of ``config``.

    ``completed`` maps point keys (see :func:`read_results_csv`) to points
    computed earlier with the same seed, alpha and replicate count; those
    points are reused instead of recomputed.  ``progress`` is called with
    ``(done, total, points)`` after every sweep value.
    """
    config.validate()
    threads = default_threads(threads)
    completed = completed or {}
    curves = []
    work = [(panel, sc) for panel in config.panels for sc in panel.scenarios()]
    by_curve = {}
    for done, (panel, scenario) in enumerate(work, start=1):
        keys = [_point_key(scenario, m, k) for m, k in config.tests]
        cached = [completed.get(key) for key in keys]
        if all(
            pt is not None and pt.seed == config.seed and pt.alpha == config.alpha
            and pt.replicates == config.replicates
            for pt in cached
        ):
            points = cached
        else:
            counts = _rejection_counts(
                scenario, config.tests, config.alpha, config.replicates,
                config.seed, config.permutations, threads,
            )
            points = [
                _make_point(scenario, m, k, config.alpha, config.replicates,
                            counts[m, k], config.seed)
                for m, k in config.tests
            ]
        for (m, k), pt in zip(config.tests, points):
            by_curve.setdefault((panel, m, k), []).append(pt)
        logger.info("point %d/%d: %s", done, len(work), scenario)
        if progress is not None:
            progress(done, len(work), points)
    for (panel, m, k), pts in by_curve.items():
        curves.append(PowerCurve(panel.family, panel.relationship, m, k, tuple(pts)))
    return curves


# ---------------------------------------------------------------------------
# output


def iter_points(curves):
    for curve in curves:
        yield from curve.points


def write_results_csv(curves, fh):
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for pt in iter_points(curves):
        writer.writerow(pt.row())


def write_results_json(curves, fh, config=None):
    doc = {
        "schema": "maxmarginal.power/1",
        "config": None if config is None else config.to_dict(),
        "columns": list(CSV_COLUMNS),
        "rows": [pt._typed_row() for pt in iter_points(curves)],
    }
    json.dump(doc, fh, indent=2)
    fh.write("\n")


def read_results_csv(fh):
    """Parse a results CSV into ``{point key: PowerPoint}``."""
    out = {}
    for row in csv.DictReader(fh):
        d = int(row["d"]) if row["d"] else None
        scenario = Scenario(row["family"], row["relationship"], int(row["n"]),
                            int(row["p"]), int(row["q"]), d)
        pt = PowerPoint(
            scenario, row["method"], row["test_kind"], sweep_value(scenario),
            float(row["alpha"]), int(row["replicates"]), float(row["power_hat"]),
            float(row["std_err"]), int(row["seed"]),
        )
        out[_point_key(scenario, pt.method, pt.test_kind)] = pt
    return out


def curves_by_key(curves) -> dict:
    """Index curves by ``(relationship, method, test_kind)``."""
    return {(c.relationship, c.method, c.test_kind): c for c in curves}

