"""Named fixtures and the fixture file format.

A fixture is fully described by a :class:`FixtureDescriptor`; named fixtures
are generated from ``(name, seed, grid_size)`` and rebuild bit-exactly.  Files
are JSON objects tagged ``"format": "abundle-fixture/1"``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .bundle import (
    BaseRegion,
    BundleAtlas,
    Chart,
    CorruptedCocycle,
    PartitionOfUnity,
    Section,
    diagonal_cocycle,
    make_bump_partition,
    phase_cocycle,
    rotation_cocycle,
    trivial_cocycle,
)
from .calculus import Polynomial, stack_maps
from .errors import ParseError, UnknownFixture
from .hermitian import HermitianForm, random_positive_gram, standard_form
from .pmodule import PModule, matrix_from_json, matrix_to_json, mixed_rank_idempotent

FIXTURE_FORMAT = "abundle-fixture/1"
DEFAULT_SEED = 7

# section components as {(zpow, zbarpow): coef} in one variable
_XI = [{(1, 0): 1.0}, {(0, 2): 1.0}]
_ETA = [{(0, 0): 1.0, (2, 0): 1.0}, {(1, 1): 1.0}]
_F = {(2, 0): 1.0, (0, 1): 0.5}


def _poly(powers) -> list:
    return Polynomial.from_dict(powers).to_json()


@dataclass
class FixtureDescriptor:
    name: str
    grid_size: int = 8
    seed: int = DEFAULT_SEED
    dim: int = 1
    centers: list = field(default_factory=lambda: [[0.0, 0.0]])
    chart_radius: float = 2.2
    bump_radius: float = 2.0
    sample_radius: float = 1.0
    per_chart: int = 64
    per_overlap: int = 32
    fiber: dict = field(default_factory=lambda: {"kind": "free", "rank": 1})
    cocycle: dict = field(default_factory=lambda: {"generator": "trivial"})
    form: dict = field(default_factory=lambda: {"kind": "standard"})
    sections: dict = field(default_factory=dict)
    role: str = "positive"
    notes: str = ""

    @property
    def n_charts(self) -> int:
        return len(self.centers)

    def to_json(self) -> dict:
        return {"format": FIXTURE_FORMAT, **asdict(self)}

    @classmethod
    def from_json(cls, data: dict) -> FixtureDescriptor:
        if not isinstance(data, dict) or data.get("format") != FIXTURE_FORMAT:
            raise ParseError(f"not an {FIXTURE_FORMAT} document")
        body = {k: v for k, v in data.items() if k != "format"}
        known = set(cls.__dataclass_fields__)
        extra = set(body) - known
        if extra:
            raise ParseError(f"unknown fixture fields {sorted(extra)}")
        if "name" not in body:
            raise ParseError("fixture has no name")
        try:
            return cls(**body)
        except TypeError as exc:
            raise ParseError(str(exc)) from exc


def _trivial_line(grid_size: int, seed: int) -> FixtureDescriptor:
    return FixtureDescriptor(
        "trivial-line", grid_size, seed,
        sections={"xi": [_poly(_XI[0])], "eta": [_poly(_ETA[0])], "f": _poly(_F)},
        notes="rank-1 free fiber over one chart, trivial cocycle, standard form",
    )


def _two_chart(name: str, grid_size: int, seed: int, fiber: dict, cocycle: dict,
               role: str = "positive", notes: str = "") -> FixtureDescriptor:
    return FixtureDescriptor(
        name, grid_size, seed,
        centers=[[0.0, 0.0], [1.0, 0.0]], chart_radius=1.3, bump_radius=1.2,
        sample_radius=0.9 * 1.2, fiber=fiber, cocycle=cocycle,
        sections={"xi": [_poly(c) for c in _XI], "eta": [_poly(c) for c in _ETA], "f": _poly(_F)},
        role=role, notes=notes,
    )


def _phase_params(seed: int) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "generator": "phase",
        "frequencies": np.round(rng.uniform(0.3, 1.0, (2, 2)), 6).tolist(),
        "offsets": np.round(rng.uniform(0.0, 2 * np.pi, (2, 2)), 6).tolist(),
    }


def _phase_two_chart(grid_size, seed):
    return _two_chart("phase-two-chart", grid_size, seed, {"kind": "free", "rank": 2},
                      _phase_params(seed), notes="form-unitary phase cocycle, standard form")


def _mixed_rank(grid_size, seed):
    return _two_chart("mixed-rank-grassmann", grid_size, seed, {"kind": "mixed-rank"},
                      _phase_params(seed),
                      notes="fiber diag(1,0) on half the grid and A^2 on the rest; Grassmann connection")


def _nonunitary(grid_size, seed):
    return _two_chart("nonunitary-two-chart", grid_size, seed, {"kind": "free", "rank": 2},
                      {"generator": "diagonal", "scales": [[1.0, 1.0], [0.5, 1.0]]},
                      role="negative-reduction",
                      notes="g_01 = diag(2,1); glued structure exists, reduction must fail")


def _broken(grid_size, seed):
    coc = dict(_phase_params(seed), corrupt={"pair": [0, 1], "factor": 2.0})
    return _two_chart("broken-cocycle", grid_size, seed, {"kind": "free", "rank": 2}, coc,
                      role="negative", notes="g_01 scaled by 2 on one side only")


def _rotation(grid_size, seed):
    rng = np.random.default_rng(seed)
    coc = {"generator": "rotation", "frequencies": np.round(rng.uniform(0.3, 1.0, 2), 6).tolist(),
           "offsets": np.round(rng.uniform(0.0, 2 * np.pi, 2), 6).tolist()}
    return _two_chart("rotation-two-chart", grid_size, seed, {"kind": "free", "rank": 2}, coc,
                      notes="non-diagonal unitary cocycle")


NAMED_FIXTURES = {
    "trivial-line": _trivial_line,
    "phase-two-chart": _phase_two_chart,
    "mixed-rank-grassmann": _mixed_rank,
    "nonunitary-two-chart": _nonunitary,
    "broken-cocycle": _broken,
    "rotation-two-chart": _rotation,
}


def fixture_names() -> list[str]:
    return sorted(NAMED_FIXTURES)


def describe(name: str, seed: int = DEFAULT_SEED, grid_size: int = 8) -> FixtureDescriptor:
    try:
        maker = NAMED_FIXTURES[name]
    except KeyError:
        raise UnknownFixture(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}") from None
    return maker(int(grid_size), int(seed))


@dataclass(eq=False)
class Fixture:
    """Built objects of a fixture."""

    descriptor: FixtureDescriptor
    base: BaseRegion
    atlas: BundleAtlas
    alpha: HermitianForm
    partition: PartitionOfUnity
    xi: Section
    eta: Section
    f: Polynomial

    @property
    def name(self) -> str:
        return self.descriptor.name

    @property
    def fiber(self) -> PModule:
        return self.atlas.fiber


def _fiber(d: FixtureDescriptor) -> PModule:
    kind = d.fiber.get("kind")
    n = d.grid_size
    if "p" in d.fiber:
        try:
            p = matrix_from_json(d.fiber["p"])
        except ValueError as exc:
            raise ParseError(f"bad fiber idempotent: {exc}") from exc
        if p.shape[0] != n:
            raise ParseError(f"fiber idempotent has {p.shape[0]} grid points, expected {n}")
        return PModule(p)
    if kind == "free":
        return PModule.free(n, int(d.fiber.get("rank", 1)))
    if kind == "mixed-rank":
        return PModule(mixed_rank_idempotent(n))
    raise ParseError(f"unknown fiber kind {kind!r}")


def _cocycle(d: FixtureDescriptor, rank: int):
    params = d.cocycle
    gen = params.get("generator")
    try:
        if gen == "trivial":
            coc = trivial_cocycle(d.n_charts, rank)
        elif gen == "phase":
            coc = phase_cocycle(params["frequencies"], params["offsets"])
        elif gen == "diagonal":
            coc = diagonal_cocycle(params["scales"])
        elif gen == "rotation":
            coc = rotation_cocycle(params["frequencies"], params["offsets"])
        else:
            raise ParseError(f"unknown cocycle generator {gen!r}")
    except KeyError as exc:
        raise ParseError(f"cocycle {gen!r} is missing parameter {exc}") from exc
    if "corrupt" in params:
        c = params["corrupt"]
        coc = CorruptedCocycle(coc, tuple(c["pair"]), c["factor"])
    return coc


def _form(d: FixtureDescriptor, fiber: PModule) -> HermitianForm:
    kind = d.form.get("kind")
    if kind == "standard":
        return standard_form(fiber)
    if kind == "random-positive":
        rng = np.random.default_rng(int(d.form.get("seed", d.seed)))
        return HermitianForm(fiber, random_positive_gram(rng, fiber.grid_size, fiber.ambient_rank))
    raise ParseError(f"unknown form kind {kind!r}")


def _section(atlas: BundleAtlas, comps) -> Section:
    polys = [Polynomial.from_json(c) for c in comps]
    if len(polys) != atlas.rank:
        raise ParseError(f"section has {len(polys)} components, fiber rank is {atlas.rank}")
    return Section.from_chart(atlas, 0, stack_maps(polys), project=True)


def build(d: FixtureDescriptor) -> Fixture:
    """Construct every object a fixture describes."""
    n = d.grid_size
    if d.dim != 1:
        raise ParseError("fixtures are defined over a one-dimensional base")
    charts = [Chart(np.full((n, 1), complex(*c)), d.chart_radius) for c in d.centers]
    base = BaseRegion.build(charts, d.sample_radius, d.seed, d.per_chart, d.per_overlap)
    fiber = _fiber(d)
    atlas = BundleAtlas(base, fiber, _cocycle(d, fiber.ambient_rank))
    partition = make_bump_partition(base, d.bump_radius)
    sec = d.sections
    try:
        xi, eta = _section(atlas, sec["xi"]), _section(atlas, sec["eta"])
        f = Polynomial.from_json(sec["f"])
    except KeyError as exc:
        raise ParseError(f"fixture sections are missing {exc}") from exc
    return Fixture(d, base, atlas, _form(d, fiber), partition, xi, eta, f)


def build_fixture(name: str, seed: int = DEFAULT_SEED, grid_size: int = 8) -> Fixture:
    return build(describe(name, seed, grid_size))


def dumps(d: FixtureDescriptor) -> str:
    data = d.to_json()
    if d.fiber.get("kind") != "free":
        # record the idempotent itself so the file is self-describing
        data["fiber"] = dict(d.fiber, p=matrix_to_json(_fiber(d).p))
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def loads(text: str) -> FixtureDescriptor:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"fixture is not valid JSON: {exc}") from exc
    return FixtureDescriptor.from_json(data)


def save(d: FixtureDescriptor, path) -> Path:
    path = Path(path)
    path.write_text(dumps(d))
    return path


def load(path) -> FixtureDescriptor:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read fixture file {path}: {exc}") from exc
    return loads(text)
