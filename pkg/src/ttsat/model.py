"""Timetabling instance model: types, JSON parsing, validation, generation.

An instance file is a UTF-8 JSON document with label-based cross references;
parsing assigns dense integer ids in file order.  Instances are immutable
after construction and safe to share across threads.
"""

from __future__ import annotations

import itertools
import json
import random
from dataclasses import dataclass
from enum import Enum
from functools import cached_property


class InstanceError(ValueError):
    """Semantic problem in an instance."""


class ParseError(InstanceError):
    """Syntactically or referentially invalid instance file."""


class SessionKind(Enum):
    LECTURE = "lecture"
    SECTION = "section"
    LAB = "lab"


SHORT_KIND = {
    SessionKind.LECTURE: "lect.",
    SessionKind.SECTION: "sec.",
    SessionKind.LAB: "lab",
}


@dataclass(frozen=True)
class Day:
    id: int
    label: str


@dataclass(frozen=True)
class Timeslot:
    id: int
    day: int
    label: str


@dataclass(frozen=True)
class Room:
    id: int
    label: str
    capacity: int
    is_lab: bool


@dataclass(frozen=True)
class Staff:
    id: int
    label: str


@dataclass(frozen=True)
class Session:
    """One weekly meeting of a course; the schedulable unit."""

    id: int
    course: int
    kind: SessionKind
    staff: int
    enrollment: int
    forbidden_timeslots: frozenset[int]


@dataclass(frozen=True)
class Course:
    id: int
    label: str
    curriculum: int
    sessions: tuple[int, int]  # (lecture, section-or-lab)


@dataclass(frozen=True)
class Curriculum:
    id: int
    label: str
    courses: tuple[int, ...]


@dataclass(frozen=True)
class RegistrationGroup:
    courses: tuple[int, ...]
    students: int


@dataclass(frozen=True)
class Instance:
    days: tuple[Day, ...]
    timeslots: tuple[Timeslot, ...]
    rooms: tuple[Room, ...]
    staff: tuple[Staff, ...]
    courses: tuple[Course, ...]
    sessions: tuple[Session, ...]
    curricula: tuple[Curriculum, ...]
    registration_groups: tuple[RegistrationGroup, ...]

    @cached_property
    def slots_by_day(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {d.id: [] for d in self.days}
        for t in self.timeslots:
            if t.day in out:
                out[t.day].append(t.id)
        return {d: tuple(ts) for d, ts in out.items()}

    @cached_property
    def sessions_by_curriculum(self) -> dict[int, tuple[int, ...]]:
        out: dict[int, list[int]] = {k.id: [] for k in self.curricula}
        for k in self.curricula:
            for cid in k.courses:
                out[k.id].extend(self.courses[cid].sessions)
        return {k: tuple(s) for k, s in out.items()}

    @cached_property
    def lab_rooms(self) -> tuple[int, ...]:
        return tuple(r.id for r in self.rooms if r.is_lab)

    def session_label(self, sid: int) -> str:
        s = self.sessions[sid]
        return f"{self.courses[s.course].label}/{s.kind.value}"

    def session_short(self, sid: int) -> str:
        s = self.sessions[sid]
        return f"{self.courses[s.course].label} {SHORT_KIND[s.kind]}"


@dataclass(frozen=True)
class Finding:
    level: str  # "error" | "warning"
    message: str


def _as_obj(val, where):
    if not isinstance(val, dict):
        raise ParseError(f"{where}: expected an object")
    return val


def _get(obj, key, where, types, optional=False, default=None):
    if key not in obj:
        if optional:
            return default
        raise ParseError(f"{where}: missing key '{key}'")
    val = obj[key]
    if not isinstance(val, types) or isinstance(val, bool) and types is int:
        raise ParseError(f"{where}: key '{key}' has the wrong type")
    return val


def _label_index(labels, what):
    index = {}
    for i, label in enumerate(labels):
        if label in index:
            raise ParseError(f"duplicate {what} label '{label}'")
        index[label] = i
    return index


def parse_instance(text: str) -> Instance:
    """Parse a JSON instance file into a fully cross-linked Instance."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            f"syntax error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from None
    return instance_from_doc(doc)


def instance_from_doc(doc) -> Instance:
    doc = _as_obj(doc, "instance")
    for key in ("days", "timeslots", "rooms", "staff", "courses", "curricula", "registrations"):
        _get(doc, key, "instance", list)

    day_labels = [str(x) for x in doc["days"]]
    day_index = _label_index(day_labels, "day")
    days = tuple(Day(i, lab) for i, lab in enumerate(day_labels))
    if not days:
        raise ParseError("at least one day is required")

    timeslots = []
    slot_labels = []
    for i, raw in enumerate(doc["timeslots"]):
        obj = _as_obj(raw, f"timeslot #{i}")
        label = str(_get(obj, "label", f"timeslot #{i}", str))
        day_label = str(_get(obj, "day", f"timeslot '{label}'", str))
        if day_label not in day_index:
            raise ParseError(f"timeslot '{label}' references unknown day '{day_label}'")
        slot_labels.append(label)
        timeslots.append(Timeslot(i, day_index[day_label], label))
    slot_index = _label_index(slot_labels, "timeslot")
    if not timeslots:
        raise ParseError("at least one timeslot is required")

    rooms = []
    room_labels = []
    for i, raw in enumerate(doc["rooms"]):
        obj = _as_obj(raw, f"room #{i}")
        label = str(_get(obj, "label", f"room #{i}", str))
        capacity = _get(obj, "capacity", f"room '{label}'", int)
        if capacity < 0:
            raise ParseError(f"room '{label}': capacity must be nonnegative")
        is_lab = bool(_get(obj, "lab", f"room '{label}'", bool, optional=True, default=False))
        room_labels.append(label)
        rooms.append(Room(i, label, int(capacity), is_lab))
    _label_index(room_labels, "room")
    if not rooms:
        raise ParseError("at least one room is required")

    staff_labels = [str(x) for x in doc["staff"]]
    staff_index = _label_index(staff_labels, "staff")
    staff = tuple(Staff(i, lab) for i, lab in enumerate(staff_labels))

    curriculum_labels = [str(x) for x in doc["curricula"]]
    curriculum_index = _label_index(curriculum_labels, "curriculum")

    courses = []
    sessions = []
    course_labels = []
    curriculum_courses: dict[int, list[int]] = {i: [] for i in range(len(curriculum_labels))}

    def parse_session(obj, course_id, kind, where):
        obj = _as_obj(obj, where)
        staff_label = str(_get(obj, "staff", where, str))
        if staff_label not in staff_index:
            raise ParseError(f"{where}: unknown staff '{staff_label}'")
        enrollment = _get(obj, "enrollment", where, int)
        if enrollment < 0:
            raise ParseError(f"{where}: enrollment must be nonnegative")
        forbidden = _get(obj, "forbidden", where, list, optional=True, default=[])
        forbidden_ids = set()
        for f in forbidden:
            f = str(f)
            if f not in slot_index:
                raise ParseError(f"{where}: unknown forbidden timeslot '{f}'")
            forbidden_ids.add(slot_index[f])
        sid = len(sessions)
        sessions.append(
            Session(sid, course_id, kind, staff_index[staff_label], int(enrollment),
                    frozenset(forbidden_ids))
        )
        return sid

    for i, raw in enumerate(doc["courses"]):
        obj = _as_obj(raw, f"course #{i}")
        label = str(_get(obj, "label", f"course #{i}", str))
        course_labels.append(label)
        cur_label = str(_get(obj, "curriculum", f"course '{label}'", str))
        if cur_label not in curriculum_index:
            raise ParseError(f"course '{label}' references unknown curriculum '{cur_label}'")
        cur_id = curriculum_index[cur_label]
        lecture_obj = _get(obj, "lecture", f"course '{label}'", dict)
        second_obj = _get(obj, "second", f"course '{label}'", dict)
        kind_label = str(_get(second_obj, "kind", f"course '{label}' second session", str))
        if kind_label not in (SessionKind.SECTION.value, SessionKind.LAB.value):
            raise ParseError(
                f"course '{label}': second session kind must be 'section' or 'lab'"
            )
        course_id = len(courses)
        lec = parse_session(lecture_obj, course_id, SessionKind.LECTURE, f"course '{label}' lecture")
        snd = parse_session(second_obj, course_id, SessionKind(kind_label), f"course '{label}' second session")
        courses.append(Course(course_id, label, cur_id, (lec, snd)))
        curriculum_courses[cur_id].append(course_id)
    course_index = _label_index(course_labels, "course")

    curricula = tuple(
        Curriculum(i, lab, tuple(curriculum_courses[i]))
        for i, lab in enumerate(curriculum_labels)
    )

    groups = []
    for i, raw in enumerate(doc["registrations"]):
        obj = _as_obj(raw, f"registration #{i}")
        course_list = _get(obj, "courses", f"registration #{i}", list)
        ids = []
        for c in course_list:
            c = str(c)
            if c not in course_index:
                raise ParseError(f"registration #{i}: unknown course '{c}'")
            ids.append(course_index[c])
        if len(set(ids)) < 2:
            raise ParseError(f"registration #{i}: needs at least two distinct courses")
        students = _get(obj, "students", f"registration #{i}", int)
        if students < 1:
            raise ParseError(f"registration #{i}: students must be positive")
        groups.append(RegistrationGroup(tuple(sorted(set(ids))), int(students)))

    return Instance(
        days=days,
        timeslots=tuple(timeslots),
        rooms=tuple(rooms),
        staff=staff,
        courses=tuple(courses),
        sessions=tuple(sessions),
        curricula=curricula,
        registration_groups=tuple(groups),
    )


def serialize_instance(instance: Instance) -> str:
    """Inverse of parse_instance; deterministic JSON text."""
    doc = {
        "days": [d.label for d in instance.days],
        "timeslots": [
            {"label": t.label, "day": instance.days[t.day].label}
            for t in instance.timeslots
        ],
        "rooms": [
            {"label": r.label, "capacity": r.capacity, "lab": r.is_lab}
            for r in instance.rooms
        ],
        "staff": [s.label for s in instance.staff],
        "curricula": [k.label for k in instance.curricula],
        "courses": [],
        "registrations": [
            {
                "courses": [instance.courses[c].label for c in g.courses],
                "students": g.students,
            }
            for g in instance.registration_groups
        ],
    }

    def session_doc(sid, with_kind):
        s = instance.sessions[sid]
        out = {}
        if with_kind:
            out["kind"] = s.kind.value
        out["staff"] = instance.staff[s.staff].label
        out["enrollment"] = s.enrollment
        out["forbidden"] = [
            instance.timeslots[t].label for t in sorted(s.forbidden_timeslots)
        ]
        return out

    for c in instance.courses:
        lec, snd = c.sessions
        lec_doc = session_doc(lec, with_kind=False)
        snd_doc = session_doc(snd, with_kind=True)
        doc["courses"].append(
            {
                "label": c.label,
                "curriculum": instance.curricula[c.curriculum].label,
                "lecture": lec_doc,
                "second": snd_doc,
            }
        )
    return json.dumps(doc, indent=2) + "\n"


def validate_instance(instance: Instance) -> list[Finding]:
    """Semantic checks: errors for broken invariants, warnings for
    satisfiability red flags. Returns findings instead of raising."""
    findings: list[Finding] = []
    err = lambda msg: findings.append(Finding("error", msg))
    warn = lambda msg: findings.append(Finding("warning", msg))

    n_slots = len(instance.timeslots)
    if not instance.rooms:
        err("at least one room is required")
    if not instance.days:
        err("at least one day is required")
    if n_slots == 0:
        err("at least one timeslot is required")
    elif n_slots < 2:
        warn("every course needs 2 distinct timeslots, only 1 exists")

    for t in instance.timeslots:
        if not 0 <= t.day < len(instance.days):
            err(f"timeslot '{t.label}' references missing day id {t.day}")
    for d in instance.days:
        if not instance.slots_by_day.get(d.id):
            err(f"day '{d.label}' owns no timeslots")

    for r in instance.rooms:
        if r.capacity < 0:
            err(f"room '{r.label}' has negative capacity")

    seen_course_curriculum: dict[int, int] = {}
    for k in instance.curricula:
        if not k.courses:
            err(f"curriculum '{k.label}' contains no courses")
        for cid in k.courses:
            if cid in seen_course_curriculum:
                err(
                    f"course '{instance.courses[cid].label}' appears in more than one curriculum"
                )
            seen_course_curriculum[cid] = k.id
    for c in instance.courses:
        if seen_course_curriculum.get(c.id) != c.curriculum:
            err(f"course '{c.label}' is not listed by its own curriculum")
        lec, snd = c.sessions
        if instance.sessions[lec].kind is not SessionKind.LECTURE:
            err(f"course '{c.label}': first session must be a lecture")
        if instance.sessions[snd].kind is SessionKind.LECTURE:
            err(f"course '{c.label}': second session must be a section or lab")
        for sid in c.sessions:
            if instance.sessions[sid].course != c.id:
                err(f"course '{c.label}': session back-reference mismatch")

    has_lab_room = bool(instance.lab_rooms)
    for s in instance.sessions:
        label = instance.session_label(s.id)
        if s.enrollment < 0:
            err(f"session '{label}' has negative enrollment")
        if not 0 <= s.staff < len(instance.staff):
            err(f"session '{label}' references missing staff id {s.staff}")
        bad = [t for t in s.forbidden_timeslots if not 0 <= t < n_slots]
        if bad:
            err(f"session '{label}' forbids unknown timeslot ids {sorted(bad)}")
        elif n_slots and len(s.forbidden_timeslots) == n_slots:
            warn(f"session '{label}': all timeslots are soft-forbidden")
        if s.kind is SessionKind.LAB and not has_lab_room:
            err(f"session '{label}' is a lab but no lab room exists")

    for k in instance.curricula:
        need = len(instance.sessions_by_curriculum.get(k.id, ()))
        if need > n_slots:
            warn(
                f"curriculum '{k.label}' needs {need} distinct timeslots, "
                f"only {n_slots} exist"
            )

    for i, g in enumerate(instance.registration_groups):
        if g.students < 1:
            err(f"registration group #{i} has nonpositive student count")
        if len(g.courses) < 2:
            err(f"registration group #{i} lists fewer than two courses")
        for cid in g.courses:
            if not 0 <= cid < len(instance.courses):
                err(f"registration group #{i} references missing course id {cid}")

    return findings


def validation_errors(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.level == "error"]


def cross_curriculum_pairs(instance: Instance) -> dict[tuple[int, int], int]:
    """Aggregate registration demand per cross-curriculum course pair.

    Same-curriculum pairs are dropped (they already clash hard); repeated
    pairs across groups have their student counts summed.  Keys are sorted
    course-id pairs, in sorted order.
    """
    out: dict[tuple[int, int], int] = {}
    for g in instance.registration_groups:
        for a, b in itertools.combinations(sorted(g.courses), 2):
            if instance.courses[a].curriculum == instance.courses[b].curriculum:
                continue
            out[(a, b)] = out.get((a, b), 0) + g.students
    return dict(sorted(out.items()))


def gen_random_instance(
    seed: int,
    *,
    days: int = 2,
    slots_per_day: int = 2,
    rooms: int = 2,
    courses: int = 3,
    curricula: int = 2,
    overlap_density: float = 0.5,
) -> Instance:
    """Deterministic random instance; always validates with zero errors."""
    if min(days, slots_per_day, rooms, courses, curricula) < 1:
        raise ValueError("all size parameters must be positive")
    if curricula > courses:
        raise ValueError(f"curricula ({curricula}) must not exceed courses ({courses})")
    if not 0.0 <= overlap_density <= 1.0:
        raise ValueError(f"overlap_density must be in [0, 1], got {overlap_density}")

    rng = random.Random(seed)
    n_slots = days * slots_per_day

    doc: dict = {"days": [f"d{i + 1}" for i in range(days)]}
    slot_labels = [f"t{i + 1}" for i in range(n_slots)]
    doc["timeslots"] = [
        {"label": slot_labels[i], "day": f"d{i // slots_per_day + 1}"}
        for i in range(n_slots)
    ]

    lab_flags = [rooms >= 2 and rng.random() < 0.4 for _ in range(rooms)]
    if rooms >= 2 and not any(lab_flags):
        lab_flags[-1] = True
    doc["rooms"] = [
        {
            "label": f"{'lab' if lab_flags[i] else 'r'}{i + 1}",
            "capacity": rng.choice([25, 40, 60, 90, 120]),
            "lab": lab_flags[i],
        }
        for i in range(rooms)
    ]
    has_lab = any(lab_flags)

    n_teachers = max(1, (2 * courses + 2) // 3)
    n_tas = max(1, (courses + 1) // 2)
    teachers = [f"prof{i + 1}" for i in range(n_teachers)]
    tas = [f"ta{i + 1}" for i in range(n_tas)]
    doc["staff"] = teachers + tas

    doc["curricula"] = [f"k{i + 1}" for i in range(curricula)]

    def forbidden_set():
        if rng.random() >= 0.25 or n_slots < 2:
            return []
        count = rng.randint(1, max(1, min(n_slots - 1, n_slots // 3)))
        return sorted(rng.sample(slot_labels, count), key=slot_labels.index)

    doc["courses"] = []
    for i in range(courses):
        # first `curricula` courses seed one curriculum each, rest go anywhere
        cur = i if i < curricula else rng.randrange(curricula)
        second_kind = "lab" if has_lab and rng.random() < 0.5 else "section"
        enrollment = rng.randint(5, 120)
        doc["courses"].append(
            {
                "label": f"c{i + 1}",
                "curriculum": f"k{cur + 1}",
                "lecture": {
                    "staff": rng.choice(teachers),
                    "enrollment": enrollment,
                    "forbidden": forbidden_set(),
                },
                "second": {
                    "kind": second_kind,
                    "staff": rng.choice(tas),
                    "enrollment": enrollment,
                    "forbidden": forbidden_set(),
                },
            }
        )

    doc["registrations"] = []
    course_cur = {c["label"]: c["curriculum"] for c in doc["courses"]}
    labels = [c["label"] for c in doc["courses"]]
    for a, b in itertools.combinations(labels, 2):
        if course_cur[a] == course_cur[b]:
            continue
        if rng.random() < overlap_density:
            doc["registrations"].append(
                {"courses": [a, b], "students": rng.randint(1, 40)}
            )

    return instance_from_doc(doc)
