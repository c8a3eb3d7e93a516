"""Weighted CNF formulas, DIMACS WCNF serialization, and solver-output parsing.

Literals are nonzero integers: ``v`` means variable ``v`` is true, ``-v``
means it is false.  A clause weight of ``None`` marks the clause as hard;
hard clauses are serialized with the formula's top weight.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class CnfError(ValueError):
    """Malformed clause, formula, DIMACS text, or solver output."""


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals. ``weight is None`` means hard."""

    literals: tuple[int, ...]
    weight: int | None = None

    def __post_init__(self):
        lits = tuple(int(l) for l in self.literals)
        object.__setattr__(self, "literals", lits)
        if not lits:
            raise CnfError("clause must contain at least one literal")
        seen = set()
        for lit in lits:
            if lit == 0:
                raise CnfError("0 is the clause terminator, not a literal")
            var = abs(lit)
            if var in seen:
                raise CnfError(f"variable {var} occurs twice in clause {lits}")
            seen.add(var)
        if self.weight is not None:
            w = int(self.weight)
            if w < 1:
                raise CnfError(f"soft clause weight must be >= 1, got {w}")
            object.__setattr__(self, "weight", w)

    @property
    def is_hard(self) -> bool:
        return self.weight is None

    def satisfied_by(self, assignment) -> bool:
        return any(assignment[abs(l)] == (l > 0) for l in self.literals)


@dataclass(frozen=True)
class WcnfFormula:
    """Ordered weighted clause set.

    ``top`` is the hard-clause sentinel weight and must exceed the sum of all
    soft weights.  When not given it defaults to that sum plus one.
    """

    num_vars: int
    clauses: tuple[Clause, ...]
    top: int | None = None

    def __post_init__(self):
        clauses = tuple(self.clauses)
        object.__setattr__(self, "clauses", clauses)
        if self.num_vars < 1:
            raise CnfError("formula needs at least one variable")
        soft_sum = 0
        for c in clauses:
            if not isinstance(c, Clause):
                raise CnfError(f"expected Clause, got {type(c).__name__}")
            if max(abs(l) for l in c.literals) > self.num_vars:
                raise CnfError(
                    f"clause {c.literals} uses a variable beyond num_vars={self.num_vars}"
                )
            if not c.is_hard:
                soft_sum += c.weight
        top = soft_sum + 1 if self.top is None else int(self.top)
        if top <= soft_sum:
            raise CnfError(f"top weight {top} must exceed soft weight sum {soft_sum}")
        object.__setattr__(self, "top", top)

    @property
    def hard_clauses(self) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if c.is_hard)

    @property
    def soft_clauses(self) -> tuple[Clause, ...]:
        return tuple(c for c in self.clauses if not c.is_hard)

    @property
    def soft_weight_sum(self) -> int:
        return sum(c.weight for c in self.clauses if not c.is_hard)

    def hard_satisfied(self, assignment) -> bool:
        return all(c.satisfied_by(assignment) for c in self.clauses if c.is_hard)

    def falsified_weight(self, assignment) -> int:
        """Total weight of soft clauses falsified by a total assignment."""
        return sum(
            c.weight
            for c in self.clauses
            if not c.is_hard and not c.satisfied_by(assignment)
        )


@dataclass(frozen=True)
class Model:
    """A total truth assignment plus its soft-violation cost."""

    assignment: dict[int, bool]
    cost: int

    @classmethod
    def checked(cls, formula: WcnfFormula, assignment, reported_cost: int | None = None) -> "Model":
        """Build a model, recomputing the cost instead of trusting the caller."""
        assignment = {v: bool(assignment[v]) for v in range(1, formula.num_vars + 1)}
        cost = formula.falsified_weight(assignment)
        if reported_cost is not None and reported_cost != cost:
            raise CnfError(
                f"reported cost {reported_cost} does not match recomputed cost {cost}"
            )
        return cls(assignment, cost)


def write_dimacs(formula: WcnfFormula, comments: tuple[str, ...] = ()) -> str:
    """Serialize to classic WCNF ("p wcnf <vars> <clauses> <top>"), LF endings.

    Clause order is preserved exactly; hard clauses carry the top weight.
    """
    lines = [f"c {c}" for c in comments]
    lines.append(f"p wcnf {formula.num_vars} {len(formula.clauses)} {formula.top}")
    for c in formula.clauses:
        w = formula.top if c.is_hard else c.weight
        lines.append(f"{w} {' '.join(str(l) for l in c.literals)} 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> WcnfFormula:
    """Parse WCNF text. Classic headers are canonical; the header-less
    "h"-marker variant is accepted too. Weights >= top normalize to hard."""
    num_vars = num_clauses = top = None
    raw: list[tuple[int | None, list[int]]] = []  # (weight or None for hard, lits)
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.strip()
        if not s or s.startswith("c"):
            continue
        if s.startswith("p"):
            parts = s.split()
            if len(parts) != 5 or parts[1] != "wcnf":
                raise CnfError(f"line {lineno}: malformed header {s!r}")
            try:
                num_vars, num_clauses, top = (int(x) for x in parts[2:])
            except ValueError:
                raise CnfError(f"line {lineno}: malformed header {s!r}") from None
            if num_vars < 1 or num_clauses < 0 or top < 1:
                raise CnfError(f"line {lineno}: malformed header {s!r}")
            continue
        tokens = s.split()
        if tokens[-1] != "0":
            raise CnfError(f"line {lineno}: clause missing terminating 0")
        hard = tokens[0] == "h"
        try:
            weight = None if hard else int(tokens[0])
            lits = [int(t) for t in tokens[1:-1]]
        except ValueError:
            raise CnfError(f"line {lineno}: bad token in clause {s!r}") from None
        if not hard and weight < 1:
            raise CnfError(f"line {lineno}: nonpositive clause weight {weight}")
        if not lits:
            raise CnfError(f"line {lineno}: empty clause")
        raw.append((weight, lits))
    if not raw and num_vars is None:
        raise CnfError("no header and no clauses found")
    if num_clauses is not None and len(raw) != num_clauses:
        raise CnfError(
            f"header declares {num_clauses} clauses but file contains {len(raw)}"
        )
    if num_vars is None:
        num_vars = max(abs(l) for _, lits in raw for l in lits)
    clauses = []
    for weight, lits in raw:
        for l in lits:
            if abs(l) > num_vars:
                raise CnfError(f"literal {l} exceeds declared variable count {num_vars}")
        if weight is not None and top is not None and weight >= top:
            weight = None
        clauses.append(Clause(tuple(lits), weight))
    return WcnfFormula(num_vars, tuple(clauses), top)


class OutputStatus(Enum):
    OPTIMUM = "OPTIMUM"
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SolverOutput:
    status: OutputStatus
    cost: int | None
    model: dict[int, bool] | None


def parse_solver_output(text: str, num_vars: int | None = None) -> SolverOutput:
    """Read Max-SAT evaluation style output: "o <cost>", "s <status>", "v" lines.

    The last "o" line wins.  "v" lines may carry signed literals (classic)
    or a single contiguous 0/1 string.  With ``num_vars`` given, literals
    out of range are an error and unmentioned variables default to false.
    """
    status = OutputStatus.UNKNOWN
    cost = None
    vtokens: list[str] = []
    for line in text.splitlines():
        s = line.strip()
        if s.startswith("o ") or s == "o":
            parts = s.split()
            if len(parts) == 2:
                try:
                    cost = int(parts[1])
                except ValueError:
                    raise CnfError(f"bad objective line {s!r}") from None
        elif s.startswith("s "):
            tag = s[2:].strip().upper()
            if tag == "OPTIMUM FOUND":
                status = OutputStatus.OPTIMUM
            elif tag.startswith("UNSAT"):
                status = OutputStatus.UNSAT
            elif tag.startswith("SAT"):
                status = OutputStatus.SAT
            else:
                status = OutputStatus.UNKNOWN
        elif s.startswith("v ") or s == "v":
            vtokens.extend(s[1:].split())
    model = None
    if vtokens:
        if len(vtokens) == 1 and len(vtokens[0]) > 1 and set(vtokens[0]) <= {"0", "1"}:
            bits = vtokens[0]
            model = {i + 1: bits[i] == "1" for i in range(len(bits))}
        else:
            model = {}
            for tok in vtokens:
                try:
                    lit = int(tok)
                except ValueError:
                    raise CnfError(f"bad literal {tok!r} in model line") from None
                if lit == 0:
                    continue
                model[abs(lit)] = lit > 0
        if num_vars is not None:
            for var in model:
                if var > num_vars:
                    raise CnfError(
                        f"model mentions variable {var} beyond num_vars={num_vars}"
                    )
            for var in range(1, num_vars + 1):
                model.setdefault(var, False)
    return SolverOutput(status, cost, model)
