"""Domain types for assignment problems on a private bipartite graph.

Every number in this package is a :class:`fractions.Fraction`; there is no
floating point anywhere on a computational path.  Jobs and machines are
0-based internally.  The file format (see :mod:`tafm.fileformat`) is 1-based.
"""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

Edge = tuple[int, int]
Matrix = tuple[tuple[Fraction, ...], ...]


class InstanceError(ValueError):
    """An instance violates its structural or variant constraints."""

    def __init__(self, violations: Sequence["Violation"]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))


class InfeasibleError(ValueError):
    """An assignment violates the job, machine or edge constraints."""


class VariantError(ValueError):
    """A mechanism was handed an instance of an incompatible variant."""


def as_rational(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: a binary float rarely means the rational the caller
    had in mind.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    raise TypeError(f"cannot use {type(value).__name__} {value!r} as an exact rational")


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if not text:
        raise ValueError("empty rational literal")
    # Fraction() also accepts decimals like "0.5" and "1e3"; the file format does not.
    allowed = set("0123456789+-/")
    if not set(text) <= allowed:
        raise ValueError(f"malformed rational literal {text!r}")
    return Fraction(text)


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


class Variant(str, enum.Enum):
    GAP = "GAP"
    SIGAP = "SIGAP"
    VIGAP = "VIGAP"
    MKP = "MKP"
    KP = "KP"
    MWBM = "MWBM"
    MBM = "MBM"


# Properties each variant imposes on the public data.
_SIZE_ROW = "sizes constant per job"
_VALUE_ROW = "values constant per job"
_UNIT = "all sizes and capacities equal 1"
_UNIT_VALUE = "all values equal 1"
_SINGLE = "exactly one machine"

_VARIANT_PROPERTIES = {
    Variant.GAP: frozenset(),
    Variant.SIGAP: frozenset({_SIZE_ROW}),
    Variant.VIGAP: frozenset({_VALUE_ROW}),
    Variant.MKP: frozenset({_SIZE_ROW, _VALUE_ROW}),
    Variant.KP: frozenset({_SIZE_ROW, _VALUE_ROW, _SINGLE}),
    Variant.MWBM: frozenset({_SIZE_ROW, _UNIT}),
    Variant.MBM: frozenset({_SIZE_ROW, _VALUE_ROW, _UNIT, _UNIT_VALUE}),
}


def specializes(variant: Variant, general: Variant) -> bool:
    """True if every instance of ``variant`` is also an instance of ``general``."""
    return _VARIANT_PROPERTIES[general] <= _VARIANT_PROPERTIES[variant]


class Violation(NamedTuple):
    field: str
    index: tuple
    constraint: str

    def __str__(self) -> str:
        where = ",".join(str(k + 1) for k in self.index)
        return f"{self.field}[{where}]: {self.constraint}"


def _matrix(rows, n: int, m: int, name: str) -> Matrix:
    rows = tuple(tuple(as_rational(v) for v in row) for row in rows)
    if len(rows) != n or any(len(row) != m for row in rows):
        raise InstanceError([Violation(name, (), f"must be a {n}x{m} matrix")])
    return rows


@dataclass(frozen=True)
class Instance:
    """Public data of an assignment problem.

    ``values[i][j]`` and ``sizes[i][j]`` describe job ``i`` on machine ``j``;
    ``capacities[j]`` bounds the total size placed on machine ``j``.
    Construction only checks shapes; call :func:`validate` for the full
    variant contract.
    """

    values: Matrix
    sizes: Matrix
    capacities: tuple[Fraction, ...]
    variant: Variant = Variant.GAP

    @classmethod
    def create(cls, values, sizes, capacities, variant=Variant.GAP) -> "Instance":
        values = list(values)
        n = len(values)
        m = len(capacities)
        return cls(
            values=_matrix(values, n, m, "values"),
            sizes=_matrix(sizes, n, m, "sizes"),
            capacities=tuple(as_rational(c) for c in capacities),
            variant=Variant(variant),
        )

    @property
    def n(self) -> int:
        return len(self.values)

    @property
    def m(self) -> int:
        return len(self.capacities)

    def value(self, edge: Edge) -> Fraction:
        return self.values[edge[0]][edge[1]]

    def size(self, edge: Edge) -> Fraction:
        return self.sizes[edge[0]][edge[1]]

    def fits(self, edge: Edge) -> bool:
        """Whether the job alone fits on the machine (``s_ij <= c_j``)."""
        return self.sizes[edge[0]][edge[1]] <= self.capacities[edge[1]]

    def retag(self, variant: Variant) -> "Instance":
        return Instance(self.values, self.sizes, self.capacities, Variant(variant))


def validate(inst: Instance) -> list[Violation]:
    """Check every instance invariant; an empty list means the instance is valid.

    Violations are reported in a fixed scan order, so ``validate(inst)[0]``
    is the first violated constraint.
    """
    out: list[Violation] = []
    n, m = inst.n, inst.m
    for i in range(n):
        for j in range(m):
            if inst.values[i][j] < 0:
                out.append(Violation("values", (i, j), "must be >= 0"))
            if inst.sizes[i][j] <= 0:
                out.append(Violation("sizes", (i, j), "must be > 0"))
    for j, c in enumerate(inst.capacities):
        if c <= 0:
            out.append(Violation("capacities", (j,), "must be > 0"))

    props = _VARIANT_PROPERTIES[inst.variant]
    tag = f"required by {inst.variant.value}"
    if _SINGLE in props and m != 1:
        out.append(Violation("capacities", (), f"{_SINGLE} {tag}"))
    for i in range(n):
        for j in range(1, m):
            if _SIZE_ROW in props and inst.sizes[i][j] != inst.sizes[i][0]:
                out.append(Violation("sizes", (i, j), f"{_SIZE_ROW} {tag}"))
            if _VALUE_ROW in props and inst.values[i][j] != inst.values[i][0]:
                out.append(Violation("values", (i, j), f"{_VALUE_ROW} {tag}"))
    if _UNIT in props:
        for i in range(n):
            for j in range(m):
                if inst.sizes[i][j] != 1:
                    out.append(Violation("sizes", (i, j), f"{_UNIT} {tag}"))
        for j, c in enumerate(inst.capacities):
            if c != 1:
                out.append(Violation("capacities", (j,), f"{_UNIT} {tag}"))
    if _UNIT_VALUE in props:
        for i in range(n):
            for j in range(m):
                if inst.values[i][j] != 1:
                    out.append(Violation("values", (i, j), f"{_UNIT_VALUE} {tag}"))
    return out


def check_instance(inst: Instance) -> Instance:
    violations = validate(inst)
    if violations:
        raise InstanceError(violations)
    return inst


def require_variant(inst: Instance, variant: Variant) -> None:
    """Raise :class:`VariantError` unless ``inst`` is tagged with a specialization
    of ``variant`` and its data satisfies the tag."""
    if not specializes(inst.variant, variant):
        raise VariantError(f"{inst.variant.value} instance given to a {variant.value} mechanism")
    violations = validate(inst)
    if violations:
        raise InstanceError(violations)


@dataclass(frozen=True)
class EdgeSet:
    """The reported (or true) compatibility graph ``E``, a subset of [n]x[m]."""

    n: int
    m: int
    edges: frozenset[Edge]

    def __post_init__(self):
        object.__setattr__(self, "edges", frozenset((int(i), int(j)) for i, j in self.edges))
        for i, j in self.edges:
            if not (0 <= i < self.n and 0 <= j < self.m):
                raise ValueError(f"edge ({i}, {j}) outside {self.n}x{self.m}")

    @classmethod
    def full(cls, n: int, m: int) -> "EdgeSet":
        return cls(n, m, frozenset((i, j) for i in range(n) for j in range(m)))

    @classmethod
    def empty(cls, n: int, m: int) -> "EdgeSet":
        return cls(n, m, frozenset())

    @classmethod
    def of(cls, inst: Instance, edges: Iterable[Edge]) -> "EdgeSet":
        return cls(inst.n, inst.m, frozenset(edges))

    def __contains__(self, edge) -> bool:
        return edge in self.edges

    def __iter__(self) -> Iterator[Edge]:
        return iter(sorted(self.edges))

    def __len__(self) -> int:
        return len(self.edges)

    def job_edges(self, i: int) -> frozenset[Edge]:
        """``E_i``: the edges incident on job ``i``."""
        return frozenset(e for e in self.edges if e[0] == i)

    def machines_of(self, i: int) -> frozenset[int]:
        return frozenset(j for (k, j) in self.edges if k == i)

    def without_job(self, i: int) -> "EdgeSet":
        """``E_{-i}``."""
        return EdgeSet(self.n, self.m, frozenset(e for e in self.edges if e[0] != i))

    def with_report(self, i: int, machines: Iterable[int]) -> "EdgeSet":
        """``E_{-i}`` together with job ``i`` reporting ``machines``."""
        report = frozenset((i, j) for j in machines)
        return EdgeSet(self.n, self.m, self.without_job(i).edges | report)

    def restrict(self, keep) -> "EdgeSet":
        return EdgeSet(self.n, self.m, frozenset(e for e in self.edges if keep(e)))

    def usable(self, inst: Instance) -> "EdgeSet":
        """Edges whose job fits on the machine by itself; the others are in no
        feasible integral assignment."""
        return self.restrict(inst.fits)


def canonical_edge_order(n: int, m: int) -> list[Edge]:
    """Row-major order on [n]x[m]; depends on nothing but the dimensions."""
    return [(i, j) for i in range(n) for j in range(m)]


def _zero_matrix(n: int, m: int) -> Matrix:
    return tuple((Fraction(0),) * m for _ in range(n))


@dataclass(frozen=True)
class FractionalAssignment:
    x: Matrix

    @classmethod
    def zeros(cls, n: int, m: int) -> "FractionalAssignment":
        return cls(_zero_matrix(n, m))

    @classmethod
    def from_dict(cls, n: int, m: int, entries: dict) -> "FractionalAssignment":
        rows = [[Fraction(0)] * m for _ in range(n)]
        for (i, j), v in entries.items():
            rows[i][j] = as_rational(v)
        return cls(tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.x[0]) if self.x else 0

    def __getitem__(self, edge: Edge) -> Fraction:
        return self.x[edge[0]][edge[1]]

    def support(self) -> list[Edge]:
        return [(i, j) for i, row in enumerate(self.x) for j, v in enumerate(row) if v != 0]

    def scaled(self, factor) -> "FractionalAssignment":
        factor = as_rational(factor)
        return FractionalAssignment(tuple(tuple(v * factor for v in row) for row in self.x))

    def vector(self) -> tuple[Fraction, ...]:
        """Coordinates in canonical edge order."""
        return tuple(v for row in self.x for v in row)


@dataclass(frozen=True)
class Assignment:
    """Integral assignment: ``jobs[i]`` is a machine index or ``None`` (unassigned)."""

    jobs: tuple[Optional[int], ...]
    m: int

    @classmethod
    def empty(cls, n: int, m: int) -> "Assignment":
        return cls((None,) * n, m)

    @classmethod
    def from_edges(cls, n: int, m: int, edges: Iterable[Edge]) -> "Assignment":
        jobs: list[Optional[int]] = [None] * n
        for i, j in edges:
            if jobs[i] is not None:
                raise InfeasibleError(f"job {i + 1} assigned twice")
            jobs[i] = j
        return cls(tuple(jobs), m)

    @property
    def n(self) -> int:
        return len(self.jobs)

    def edges(self) -> list[Edge]:
        return [(i, j) for i, j in enumerate(self.jobs) if j is not None]

    def to_fractional(self) -> FractionalAssignment:
        rows = [[Fraction(0)] * self.m for _ in range(self.n)]
        for i, j in self.edges():
            rows[i][j] = Fraction(1)
        return FractionalAssignment(tuple(tuple(r) for r in rows))

    def vector(self) -> tuple[int, ...]:
        return tuple(int(self.jobs[i] == j) for i in range(self.n) for j in range(self.m))

    def without_job(self, i: int) -> "Assignment":
        jobs = list(self.jobs)
        jobs[i] = None
        return Assignment(tuple(jobs), self.m)


Outcome = Union[Assignment, FractionalAssignment, "OutcomeLottery"]


def _as_matrix(x) -> FractionalAssignment:
    if isinstance(x, Assignment):
        return x.to_fractional()
    return x


def feasibility_violations(x, inst: Instance, E: Optional[EdgeSet] = None) -> list[str]:
    x = _as_matrix(x)
    problems = []
    if x.n != inst.n or x.m != inst.m:
        return [f"assignment is {x.n}x{x.m}, instance is {inst.n}x{inst.m}"]
    for i in range(inst.n):
        for j in range(inst.m):
            v = x.x[i][j]
            if v < 0 or v > 1:
                problems.append(f"x[{i + 1},{j + 1}] = {v} outside [0,1]")
            if v != 0 and E is not None and (i, j) not in E:
                problems.append(f"x[{i + 1},{j + 1}] = {v} on a non-edge")
        if sum(x.x[i]) > 1:
            problems.append(f"job {i + 1} assigned {sum(x.x[i])} > 1")
    for j in range(inst.m):
        load = sum(inst.sizes[i][j] * x.x[i][j] for i in range(inst.n))
        if load > inst.capacities[j]:
            problems.append(f"machine {j + 1} load {load} > capacity {inst.capacities[j]}")
    return problems


def is_feasible(x, inst: Instance, E: Optional[EdgeSet] = None) -> bool:
    return not feasibility_violations(x, inst, E)


def check_feasible(x, inst: Instance, E: Optional[EdgeSet] = None) -> None:
    problems = feasibility_violations(x, inst, E)
    if problems:
        raise InfeasibleError("; ".join(problems))


@dataclass(frozen=True)
class OutcomeLottery:
    """A finite distribution over integral assignments with exact probabilities."""

    support: tuple[tuple[Assignment, Fraction], ...]

    def __post_init__(self):
        if not self.support:
            raise ValueError("a lottery needs at least one outcome")
        if any(p <= 0 for _, p in self.support):
            raise ValueError("lottery probabilities must be positive")
        total = sum(p for _, p in self.support)
        if total != 1:
            raise ValueError(f"lottery probabilities sum to {total}, not 1")

    @classmethod
    def point(cls, a: Assignment) -> "OutcomeLottery":
        return cls(((a, Fraction(1)),))

    @classmethod
    def merge(cls, weighted: Iterable[tuple[Assignment, Fraction]]) -> "OutcomeLottery":
        """Sum the probabilities of repeated assignments and drop zeros.

        Support is sorted by decreasing probability, then by assignment
        vector, which keeps emitted reports stable.
        """
        acc: dict[Assignment, Fraction] = {}
        for a, p in weighted:
            if p:
                acc[a] = acc.get(a, Fraction(0)) + p
        items = sorted(acc.items(), key=lambda kv: (-kv[1], kv[0].vector()))
        return cls(tuple(items))

    def __iter__(self):
        return iter(self.support)

    def __len__(self) -> int:
        return len(self.support)

    def expectation(self) -> FractionalAssignment:
        """The marginal matrix ``E[x]``."""
        a0 = self.support[0][0]
        rows = [[Fraction(0)] * a0.m for _ in range(a0.n)]
        for a, p in self.support:
            for i, j in a.edges():
                rows[i][j] += p
        return FractionalAssignment(tuple(tuple(r) for r in rows))

    def sample(self, seed=None) -> Assignment:
        """Draw one assignment; only for producing a realized outcome, never for audits."""
        rng = random.Random(seed)
        # Exact inverse-CDF draw on a common denominator.
        denom = math.lcm(*(p.denominator for _, p in self.support))
        ticket = rng.randrange(denom)
        acc = 0
        for a, p in self.support:
            acc += p.numerator * (denom // p.denominator)
            if ticket < acc:
                return a
        return self.support[-1][0]


def welfare(x, inst: Instance, E: EdgeSet) -> Fraction:
    """``sum over (i,j) in E of v_ij x_ij``; rejects infeasible ``x``.

    Lotteries are evaluated in expectation.
    """
    if isinstance(x, OutcomeLottery):
        return sum((p * welfare(a, inst, E) for a, p in x), Fraction(0))
    x = _as_matrix(x)
    check_feasible(x, inst, E)
    return sum((inst.values[i][j] * x.x[i][j] for (i, j) in E.edges), Fraction(0))


def utility(job: int, outcome, true_edges: EdgeSet, inst: Instance) -> Fraction:
    """Value job ``job`` derives from ``outcome``, counted on its *true* edges only."""
    if isinstance(outcome, OutcomeLottery):
        return sum((p * utility(job, a, true_edges, inst) for a, p in outcome), Fraction(0))
    if isinstance(outcome, Assignment):
        j = outcome.jobs[job]
        if j is None or (job, j) not in true_edges:
            return Fraction(0)
        return inst.values[job][j]
    row = outcome.x[job]
    return sum(
        (inst.values[job][j] * row[j] for j in range(inst.m) if (job, j) in true_edges and row[j]),
        Fraction(0),
    )
