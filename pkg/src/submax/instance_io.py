"""Line-oriented instance file format.

    # comment lines start with '#'
    K <int>
    item <id> <cost> cover <p1> <p2> ...     coverage instance
    item <id> <cost>                         facility instance (no cover)
    weight <point> <w>                       optional, coverage only
    facility <n_universe>                    then n_universe 'sim' rows
    sim <w1> ... <w_n_items>                 one row per universe point

Costs must parse as integers; real-valued costs are rejected. Serialization is
canonical (items in stream order, cover points sorted), so parse -> serialize
-> parse is the identity and serialize is idempotent byte-for-byte.
"""

from __future__ import annotations

from .core import (CoverageOracle, FacilityLocationOracle, Instance,
                   InstanceError, Item, WeightedCoverageOracle)


def _num(tok: str):
    try:
        return int(tok)
    except ValueError:
        return float(tok)


def _fmt_num(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def _token_sort_key(tok: str):
    try:
        return (0, int(tok), "")
    except ValueError:
        return (1, 0, tok)


def parse_instance(text: str, name: str = "instance") -> Instance:
    K = None
    items = []  # (id, cost)
    cover = {}
    weights = {}
    sim_rows = []
    facility_n = None

    lines = [ln.strip() for ln in text.splitlines()]
    expect_sim = 0
    for lineno, ln in enumerate(lines, 1):
        if not ln or ln.startswith("#"):
            continue
        toks = ln.split()
        kind = toks[0]
        if expect_sim and kind != "sim":
            raise InstanceError(f"line {lineno}: expected {expect_sim} more 'sim' rows")
        if kind == "K":
            if K is not None:
                raise InstanceError(f"line {lineno}: duplicate K")
            K = _parse_int(toks[1], lineno, "K")
        elif kind == "item":
            if len(toks) < 3:
                raise InstanceError(f"line {lineno}: item needs an id and a cost")
            iid = toks[1]
            cost = _parse_int(toks[2], lineno, f"cost of item {iid!r}")
            items.append((iid, cost))
            if len(toks) > 3:
                if toks[3] != "cover":
                    raise InstanceError(f"line {lineno}: expected 'cover', got {toks[3]!r}")
                cover[iid] = frozenset(toks[4:])
        elif kind == "weight":
            if len(toks) != 3:
                raise InstanceError(f"line {lineno}: weight needs a point and a value")
            weights[toks[1]] = _num(toks[2])
        elif kind == "facility":
            if facility_n is not None:
                raise InstanceError(f"line {lineno}: duplicate facility section")
            facility_n = _parse_int(toks[1], lineno, "facility row count")
            expect_sim = facility_n
        elif kind == "sim":
            if facility_n is None:
                raise InstanceError(f"line {lineno}: 'sim' before 'facility'")
            sim_rows.append([_num(t) for t in toks[1:]])
            expect_sim -= 1
        else:
            raise InstanceError(f"line {lineno}: unknown directive {kind!r}")

    if K is None:
        raise InstanceError("missing K header line")
    if expect_sim:
        raise InstanceError(f"facility section short by {expect_sim} sim rows")
    if not items:
        return Instance((), K, CoverageOracle({}), name=name)

    covered = [iid for iid, _ in items if iid in cover]
    if facility_n is not None:
        if covered:
            raise InstanceError("facility instance must not carry cover lines")
        if weights:
            raise InstanceError("weight lines are only valid for coverage instances")
        ids = [iid for iid, _ in items]
        for row in sim_rows:
            if len(row) != len(ids):
                raise InstanceError("sim row length must equal the number of items")
        oracle = FacilityLocationOracle(ids, sim_rows)
    else:
        if len(covered) != len(items):
            missing = [iid for iid, _ in items if iid not in cover]
            raise InstanceError(f"coverage instance: items without cover: {missing!r}")
        if weights:
            oracle = WeightedCoverageOracle(cover, weights)
        else:
            oracle = CoverageOracle(cover)

    return Instance(tuple(Item(iid, cost) for iid, cost in items), K, oracle, name=name)


def _parse_int(tok: str, lineno: int, what: str) -> int:
    # Reject anything non-integer, including "2.0": costs and K are integers.
    try:
        return int(tok)
    except ValueError:
        raise InstanceError(f"line {lineno}: {what} must be an integer, got {tok!r}") from None


def serialize_instance(instance: Instance) -> str:
    out = [f"K {instance.K}"]
    oracle = instance.oracle
    if isinstance(oracle, (CoverageOracle, WeightedCoverageOracle)):
        for it in instance.items:
            pts = sorted(oracle.cover[it.id], key=_token_sort_key)
            out.append(f"item {it.id} {it.cost} cover {' '.join(pts)}".rstrip())
        if isinstance(oracle, WeightedCoverageOracle):
            for p in sorted(oracle.weights, key=_token_sort_key):
                out.append(f"weight {p} {_fmt_num(oracle.weights[p])}")
    elif isinstance(oracle, FacilityLocationOracle):
        for it in instance.items:
            out.append(f"item {it.id} {it.cost}")
        out.append(f"facility {oracle.sim.shape[0]}")
        for row in oracle.sim:
            out.append("sim " + " ".join(_fmt_num(float(x)) for x in row))
    else:
        raise InstanceError(f"cannot serialize oracle type {type(oracle).__name__}")
    return "\n".join(out) + "\n"


def load_instance(path, name: str | None = None) -> Instance:
    with open(path) as fh:
        text = fh.read()
    return parse_instance(text, name=name or str(path))


def save_instance(instance: Instance, path):
    with open(path, "w") as fh:
        fh.write(serialize_instance(instance))


def read_manifest(path) -> dict:
    """Return the planted-structure manifest embedded as '# manifest <json>'."""
    import json

    with open(path) as fh:
        for ln in fh:
            ln = ln.strip()
            if ln.startswith("# manifest "):
                return json.loads(ln[len("# manifest "):])
    return {}
