"""Deterministic multi-cloud storage simulator.

A dealer shares ``z`` secrets across ``n`` servers; servers are later
unsubscribed and their shares relocated by one of the four methods, and
reconstruction queries are replayed against whatever the survivors hold.

Storage is linear in ``z`` and every secret is relocated by the same linear
map, so the default ``analytic`` mode tracks one representative secret (plus
any secret a query names) and multiplies element counts by ``z``.
``material`` mode stores and relocates every secret.
"""

from __future__ import annotations

import csv
import io
import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import access
from .access import AccessStructure
from .exceptions import ValidationError
from .galois import FieldMatrix, solve_in_span
from .msp import Msp, msp_from_dict, shamir
from .relocate import METHODS, StorageMetrics, plan

__all__ = [
    "Event",
    "Scenario",
    "Snapshot",
    "Transfer",
    "ReconstructionResult",
    "SimReport",
    "ScenarioError",
    "run",
    "sweep_fig1",
    "scenario_from_dict",
    "load_scenario",
    "SWEEP_CSV_FIELDS",
    "sweep_to_csv",
    "sweep_to_gnuplot",
]

DEFAULT_PRIME = 2**16 - 15
SWEEP_CSV_FIELDS = ("method", "m", "L_bits", "L_MiB", "rho")
FIG1_METHOD_ORDER = ("ps", "is", "cs", "lc")

_BYTES_PER_MIB = 1 << 20


class ScenarioError(ValidationError):
    """The scenario is inconsistent; raised before any event runs."""


@dataclass(frozen=True)
class Event:
    kind: str  # distribute | remove | reconstruct | snapshot
    servers: frozenset[int] = frozenset()
    method: Optional[str] = None
    secret: int = 0
    label: str = ""


@dataclass(frozen=True)
class Scenario:
    n: int
    t: Optional[int] = None
    p: int = DEFAULT_PRIME
    share_bits: int = 16
    z: int = 10**6
    seed: int = 0
    events: tuple[Event, ...] = ()
    structure: Optional[AccessStructure] = None
    msp: Optional[Msp] = None
    mode: str = "analytic"

    def scheme(self) -> Msp:
        if self.msp is not None:
            return self.msp
        if self.t is None:
            raise ScenarioError("a scenario needs t (Shamir) or an explicit msp")
        return shamir(self.t, self.n, self.p)

    def access_structure(self) -> AccessStructure:
        if self.structure is not None:
            return self.structure
        if self.msp is None:
            return access.threshold(self.t, self.n)
        from .msp import realized_structure

        return realized_structure(self.msp)


@dataclass(frozen=True)
class Snapshot:
    event: int
    label: str
    removed: int
    methods: tuple[str, ...]
    metrics: StorageMetrics


@dataclass(frozen=True)
class Transfer:
    event: int
    method: str
    servers: tuple[int, ...]
    elements: int
    bits: int


@dataclass(frozen=True)
class ReconstructionResult:
    event: int
    servers: tuple[int, ...]
    secret: int
    ok: bool
    value: Optional[int] = None
    expected: Optional[int] = None
    reason: str = ""


@dataclass
class SimReport:
    snapshots: list[Snapshot] = field(default_factory=list)
    transfers: list[Transfer] = field(default_factory=list)
    reconstructions: list[ReconstructionResult] = field(default_factory=list)

    def to_csv(self) -> str:
        """One CSV document with a ``record`` column distinguishing the three tables."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["record", "event", "label", "methods", "removed", "servers", "secret",
                    "elements", "L_bits", "L_MiB", "rho", "ok", "value", "reason"])
        for s in self.snapshots:
            w.writerow(["snapshot", s.event, s.label, "+".join(s.methods), s.removed, "", "",
                        s.metrics.elements_per_secret, s.metrics.total_bits,
                        f"{s.metrics.total_mib:.4f}", str(s.metrics.rho), "", "", ""])
        for t in self.transfers:
            w.writerow(["transfer", t.event, "", t.method, "", " ".join(map(str, t.servers)), "",
                        t.elements, t.bits, f"{t.bits / 8 / _BYTES_PER_MIB:.4f}", "", "", "", ""])
        for r in self.reconstructions:
            w.writerow(["reconstruct", r.event, "", "", "", " ".join(map(str, r.servers)), r.secret,
                        "", "", "", "", int(r.ok), "" if r.value is None else r.value, r.reason])
        return buf.getvalue()


def _secret_rng(seed: int, index: int) -> random.Random:
    # one independent stream per secret, so analytic and material mode agree
    return random.Random(f"lsscontract/simcloud/{seed}/{index}")


def _draw(p: int, d: int, seed: int, index: int) -> tuple[int, ...]:
    rng = _secret_rng(seed, index)
    return tuple(rng.randrange(p) for _ in range(d))


def _validate(sc: Scenario, base: Msp, gamma: AccessStructure) -> None:
    if sc.mode not in ("analytic", "material"):
        raise ScenarioError(f"unknown mode {sc.mode!r}")
    if sc.z < 1 or sc.share_bits < 1:
        raise ScenarioError("z and share_bits must be positive")
    if base.n != sc.n:
        raise ScenarioError("msp participant count differs from n")
    live = set(range(1, sc.n + 1))
    removed: set[int] = set()
    distributed = False
    only_lc = True
    for idx, ev in enumerate(sc.events):
        if ev.kind == "distribute":
            if distributed:
                raise ScenarioError(f"event {idx}: secrets already distributed")
            distributed = True
        elif ev.kind == "remove":
            if not distributed:
                raise ScenarioError(f"event {idx}: nothing stored yet")
            if ev.method not in METHODS:
                raise ScenarioError(f"event {idx}: unknown method {ev.method!r}")
            if not ev.servers:
                raise ScenarioError(f"event {idx}: empty removal")
            if not ev.servers <= live:
                raise ScenarioError(f"event {idx}: servers {sorted(ev.servers - live)} are not live")
            if access.is_authorized(gamma, removed | ev.servers):
                raise ScenarioError(f"event {idx}: cumulative removal is authorized")
            if ev.method == "lc" and not only_lc:
                raise ScenarioError(f"event {idx}: lc needs an ideal state (only lc removals before it)")
            only_lc = only_lc and ev.method == "lc"
            live -= ev.servers
            removed |= ev.servers
        elif ev.kind == "reconstruct":
            if not distributed:
                raise ScenarioError(f"event {idx}: nothing stored yet")
            if not ev.servers <= live:
                raise ScenarioError(f"event {idx}: servers {sorted(ev.servers - live)} are not live")
            if not 0 <= ev.secret < sc.z:
                raise ScenarioError(f"event {idx}: secret index out of range")
        elif ev.kind == "snapshot":
            pass
        else:
            raise ScenarioError(f"event {idx}: unknown kind {ev.kind!r}")


@dataclass
class _State:
    scheme: Msp
    public: FieldMatrix
    live: tuple[int, ...]  # original labels, ascending; scheme label j is live[j - 1]
    values: dict[int, tuple[int, ...]]  # secret index -> scheme row values + public values
    secrets: dict[int, int]
    removed: frozenset[int] = frozenset()
    methods: tuple[str, ...] = ()


def run(sc: Scenario) -> SimReport:
    base = sc.scheme()
    gamma = sc.access_structure()
    _validate(sc, base, gamma)
    report = SimReport()
    state: Optional[_State] = None
    tracked = {0} | {ev.secret for ev in sc.events if ev.kind == "reconstruct"}
    indices = range(sc.z) if sc.mode == "material" else sorted(tracked)

    for idx, ev in enumerate(sc.events):
        if ev.kind == "distribute":
            values, secrets = {}, {}
            for i in indices:
                v = _draw(base.p, base.d, sc.seed, i)
                secrets[i] = v[0]
                values[i] = base.matrix.apply(v)
            state = _State(base, FieldMatrix(base.p, (), base.d),
                           tuple(range(1, sc.n + 1)), values, secrets)
        elif ev.kind == "snapshot":
            report.snapshots.append(_snapshot(idx, ev, sc, state))
        elif ev.kind == "remove":
            state = _remove(idx, ev, sc, gamma, state, report)
        elif ev.kind == "reconstruct":
            report.reconstructions.append(_reconstruct(idx, ev, state))
    return report


def _snapshot(idx: int, ev: Event, sc: Scenario, state: Optional[_State]) -> Snapshot:
    if state is None:
        m = StorageMetrics(0, Fraction(0), sc.share_bits, sc.z, 0, 0)
        return Snapshot(idx, ev.label, 0, (), m)
    per_server: dict[int, int] = {}
    for owner in state.scheme.psi:
        per_server[owner] = per_server.get(owner, 0) + 1
    max_held = max(per_server.values()) if per_server else 0
    elements = state.scheme.ell + state.public.nrows
    if sc.mode == "material":
        total = sum(len(v) for v in state.values.values()) * sc.share_bits
    else:
        total = elements * sc.share_bits * sc.z
    m = StorageMetrics(
        total_bits=total,
        rho=Fraction(1, max_held) if max_held else Fraction(0),
        share_bits=sc.share_bits,
        z=sc.z,
        elements_per_secret=elements,
        max_server_elements=max_held,
    )
    return Snapshot(idx, ev.label, len(state.removed), state.methods, m)


def _remove(idx: int, ev: Event, sc: Scenario, gamma: AccessStructure, state: _State,
            report: SimReport) -> _State:
    lookup = {old: new for new, old in enumerate(state.live, start=1)}
    q = frozenset(lookup[s] for s in ev.servers)
    live_gamma = access.contract(gamma, state.removed).structure
    pl = plan(ev.method, state.scheme, q, live_gamma)
    k_old = state.scheme.ell
    values = {}
    for i, vals in state.values.items():
        stored = pl.transfer.apply(vals[:k_old])
        values[i] = stored + vals[k_old:]  # earlier public storage stays put
    # value layout: new scheme rows, fresh public rows, earlier public rows
    public = pl.public.stack(state.public) if pl.public.nrows else state.public
    moved = pl.moved_elements()
    report.transfers.append(
        Transfer(idx, ev.method, tuple(sorted(ev.servers)), moved, moved * sc.share_bits * sc.z)
    )
    live = tuple(state.live[j - 1] for j in pl.reindex)
    return _State(pl.scheme, public, live, values, state.secrets,
                  state.removed | ev.servers, state.methods + (ev.method,))


def _reconstruct(idx: int, ev: Event, state: _State) -> ReconstructionResult:
    lookup = {old: new for new, old in enumerate(state.live, start=1)}
    servers = tuple(sorted(ev.servers))
    rows = state.scheme.rows_of(lookup[s] for s in servers)
    k = state.scheme.ell
    matrix = state.scheme.matrix.select(rows).stack(state.public)
    alpha = solve_in_span(matrix, state.scheme.target)
    expected = state.secrets[ev.secret]
    if alpha is None:
        return ReconstructionResult(idx, servers, ev.secret, False, None, expected, "unauthorized set")
    vals = state.values[ev.secret]
    picked = [vals[j] for j in rows] + list(vals[k:])
    value = sum(a * b for a, b in zip(alpha, picked)) % state.scheme.p
    return ReconstructionResult(idx, servers, ev.secret, value == expected, value, expected,
                                "" if value == expected else "wrong value")


def sweep_fig1(
    n: int = 10,
    t: int = 8,
    share_bits: int = 16,
    z: int = 10**6,
    p: int = DEFAULT_PRIME,
    seed: int = 0,
    mode: str = "analytic",
    methods: Sequence[str] = FIG1_METHOD_ORDER,
) -> list[dict]:
    """Storage and information rate after removing the last m servers, m = 0..t-1."""
    rows = []
    base = shamir(t, n, p)
    gamma = access.threshold(t, n)
    for method in methods:
        for m in range(t):
            events = [Event("distribute")]
            if m:
                events.append(Event("remove", frozenset(range(n - m + 1, n + 1)), method))
            events.append(Event("snapshot", label=f"{method}/m={m}"))
            sc = Scenario(n=n, t=t, p=p, share_bits=share_bits, z=z, seed=seed,
                          events=tuple(events), structure=gamma, msp=base, mode=mode)
            snap = run(sc).snapshots[-1]
            rows.append({
                "method": method,
                "m": m,
                "L_bits": snap.metrics.total_bits,
                "L_MiB": f"{snap.metrics.total_mib:.4f}",
                "rho": str(snap.metrics.rho),
            })
    return rows


def sweep_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def sweep_to_gnuplot(rows: Sequence[dict]) -> str:
    """Two whitespace-separated blocks: storage in MiB, then information rate."""
    methods = list(dict.fromkeys(r["method"] for r in rows))
    ms = sorted({r["m"] for r in rows})
    lookup = {(r["method"], r["m"]): r for r in rows}
    out = ["# panel (a): total storage in MiB", "# m " + " ".join(methods)]
    for m in ms:
        out.append(" ".join([str(m)] + [lookup[(meth, m)]["L_MiB"] for meth in methods]))
    out += ["", "", "# panel (b): information rate", "# m " + " ".join(methods)]
    for m in ms:
        out.append(" ".join([str(m)] + [f"{float(Fraction(lookup[(meth, m)]['rho'])):.6f}" for meth in methods]))
    return "\n".join(out) + "\n"


def scenario_from_dict(data: dict) -> Scenario:
    try:
        events = []
        for raw in data.get("events", []):
            kind = str(raw["kind"]).lower()
            events.append(Event(
                kind=kind,
                servers=frozenset(int(s) for s in raw.get("servers", ())),
                method=raw.get("method"),
                secret=int(raw.get("secret", 0)),
                label=str(raw.get("label", "")),
            ))
        structure = data.get("structure")
        msp_doc = data.get("msp")
        return Scenario(
            n=int(data["n"]),
            t=None if data.get("t") is None else int(data["t"]),
            p=int(data.get("modulus", DEFAULT_PRIME)),
            share_bits=int(data.get("share_bits", 16)),
            z=int(data.get("z", 10**6)),
            seed=int(data["seed"]),
            events=tuple(events),
            structure=access.parse_structure(structure) if structure else None,
            msp=msp_from_dict(msp_doc) if msp_doc else None,
            mode=str(data.get("mode", "analytic")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ScenarioError(f"malformed scenario: {exc!r}") from exc


def load_scenario(text: str) -> Scenario:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(
            f"scenario parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"
        ) from exc
    return scenario_from_dict(data)
