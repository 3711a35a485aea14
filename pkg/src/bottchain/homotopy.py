"""Stable homotopy tables of O, U, Sp and exact-sequence reasoning.

Groups are restricted to the three kinds ``0``, ``Z`` and ``Z2``; a
homomorphism between them is one of ``zero``, ``mul(m)`` (``Z -> Z``),
``mod2`` (``Z -> Z2``) or ``iso`` (``Z2 -> Z2``). Exactness of a sequence
is decided by comparing images and kernels, which are subgroups of the
form ``dZ`` inside ``Z`` and ``0`` or everything inside ``Z2``.
"""
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product

ZERO, Z, Z2 = "0", "Z", "Z2"
KINDS = (ZERO, Z, Z2)

# candidate multipliers when a Z -> Z map is unknown
MULTIPLIER_BOUND = 12


@dataclass(frozen=True)
class StableGroup:
    kind: str

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"group kind {self.kind!r} is outside {{0, Z, Z2}}")

    def __str__(self):
        return self.kind

    def elements(self, N=MULTIPLIER_BOUND):
        """All elements, or the window ``-N..N`` for ``Z``."""
        return {ZERO: [0], Z2: [0, 1], Z: list(range(-N, N + 1))}[self.kind]


G0, GZ, GZ2 = StableGroup(ZERO), StableGroup(Z), StableGroup(Z2)
_GROUPS = {ZERO: G0, Z: GZ, Z2: GZ2}


@dataclass(frozen=True)
class StableHom:
    """Homomorphism between stable groups; ``m`` is the multiplier of ``mul``."""

    domain: StableGroup
    codomain: StableGroup
    kind: str
    m: int = 0

    def __post_init__(self):
        d, c = self.domain.kind, self.codomain.kind
        ok = {
            "zero": True,
            "mul": d == Z and c == Z and self.m != 0,
            "mod2": d == Z and c == Z2,
            "iso": d == Z2 and c == Z2,
        }.get(self.kind, False)
        if not ok:
            raise ValueError(f"hom kind {self.kind!r} incompatible with {d} -> {c}")

    def __call__(self, x):
        if self.kind == "zero":
            return 0
        if self.kind == "mul":
            return self.m * x
        if self.kind == "mod2":
            return x % 2
        return x

    def image(self):
        """Image as ``(group kind, d)``: ``dZ`` in ``Z``; ``0`` trivial / ``1`` all in ``Z2``."""
        if self.kind == "zero":
            return 0
        if self.kind == "mul":
            return abs(self.m)
        return 1

    def kernel(self):
        """Kernel in the same encoding as :meth:`image`."""
        if self.kind == "zero":
            return 1
        if self.kind == "mod2":
            return 2
        return 0

    def normalized(self):
        """Sign of a ``Z -> Z`` multiplier is a choice of basis; drop it."""
        if self.kind == "mul" and self.m < 0:
            return StableHom(self.domain, self.codomain, "mul", -self.m)
        return self

    def equivalent(self, other):
        return self.normalized() == other.normalized()

    def label(self):
        """Notation used in the printed tables."""
        if self.kind == "zero":
            return "0"
        if self.kind == "mod2":
            return "k -> k mod 2"
        if self.kind == "iso" or abs(self.m) == 1:
            return "id"
        return f"k -> {abs(self.m)}k"

    def to_json(self):
        return {"domain": self.domain.kind, "codomain": self.codomain.kind,
                "hom_kind": self.kind, "multiplier": abs(self.m) if self.kind == "mul" else None}

    def __str__(self):
        return f"{self.domain}->{self.codomain}:{self.label()}"


def zero(a, b):
    return StableHom(a, b, "zero")


def mul(m):
    return StableHom(GZ, GZ, "mul", m)


def mod2():
    return StableHom(GZ, GZ2, "mod2")


def identity(g):
    if g.kind == Z:
        return mul(1)
    if g.kind == Z2:
        return StableHom(GZ2, GZ2, "iso")
    return zero(G0, G0)


def compose(h2, h1):
    """``h2 o h1``."""
    if h1.codomain != h2.domain:
        raise ValueError("incompatible endpoints for composition")
    a, c = h1.domain, h2.codomain
    if h1.kind == "zero" or h2.kind == "zero":
        return zero(a, c)
    if h1.kind == "mul" and h2.kind == "mul":
        return mul(h1.m * h2.m)
    if h1.kind == "mul" and h2.kind == "mod2":
        return mod2() if h1.m % 2 else zero(a, c)
    if h1.kind == "mod2" and h2.kind == "iso":
        return mod2()
    if h1.kind == "iso":
        return h2
    raise ValueError(f"cannot compose {h2} after {h1}")


def all_homs(a, b, bound=MULTIPLIER_BOUND, extra=()):
    """Every hom ``a -> b``, with ``Z -> Z`` multipliers limited to ``|m| <= bound``
    plus any ``extra`` magnitudes."""
    out = [zero(a, b)]
    if a.kind == Z and b.kind == Z:
        mags = sorted(set(range(1, bound + 1)) | {e for e in extra if e > 0})
        out += [mul(s * m) for m in mags for s in (1, -1)]
    elif a.kind == Z and b.kind == Z2:
        out.append(mod2())
    elif a.kind == Z2 and b.kind == Z2:
        out.append(identity(GZ2))
    return out


# ---------------------------------------------------------------------------
# exact sequences


@dataclass
class ExactSequence:
    """``groups[0] -> groups[1] -> ...`` with ``homs[i]: groups[i] -> groups[i+1]``.

    An unknown hom is ``None``.
    """

    groups: list
    homs: list

    def __post_init__(self):
        self.groups = [_GROUPS[g] if isinstance(g, str) else g for g in self.groups]
        if len(self.homs) != len(self.groups) - 1:
            raise ValueError("need exactly one hom between consecutive groups")
        for i, h in enumerate(self.homs):
            if h is not None and (h.domain != self.groups[i] or h.codomain != self.groups[i + 1]):
                raise ValueError(f"hom {i} has endpoints {h.domain}->{h.codomain}, "
                                 f"expected {self.groups[i]}->{self.groups[i + 1]}")

    def unknowns(self):
        return [i for i, h in enumerate(self.homs) if h is None]

    def with_hom(self, i, h):
        homs = list(self.homs)
        homs[i] = h
        return ExactSequence(list(self.groups), homs)

    def __str__(self):
        parts = [str(self.groups[0])]
        for h, g in zip(self.homs, self.groups[1:]):
            parts.append(f"--{h.label() if h else '?'}--> {g}")
        return " ".join(parts)


@dataclass(frozen=True)
class Exactness:
    """Truthy iff exact; ``position`` is the first interior group where it fails."""

    exact: bool
    position: int = None

    def __bool__(self):
        return self.exact


def check_exactness(seq):
    """Image equals kernel at every interior position."""
    if seq.unknowns():
        raise ValueError("sequence has unknown homs")
    for pos in range(1, len(seq.groups) - 1):
        f, g = seq.homs[pos - 1], seq.homs[pos]
        if seq.groups[pos].kind == ZERO:
            continue
        if f.image() != g.kernel():
            return Exactness(False, pos)
    return Exactness(True)


def check_exactness_bruteforce(seq, N=MULTIPLIER_BOUND):
    """Exactness with ``Z`` truncated to ``-N..N``; compares image and kernel in the window."""
    for pos in range(1, len(seq.groups) - 1):
        f, g = seq.homs[pos - 1], seq.homs[pos]
        window = set(seq.groups[pos].elements(N))
        img = {f(a) for a in seq.groups[pos - 1].elements(N)} & window
        ker = {b for b in window if g(b) == 0}
        if img != ker:
            return Exactness(False, pos)
    return Exactness(True)


def _needed_magnitudes(seq, i):
    """Multipliers an unknown ``Z -> Z`` map at ``i`` could need: the kernel index of the next map."""
    extra = set()
    if i + 1 < len(seq.homs) and seq.homs[i + 1] is not None:
        extra.add(seq.homs[i + 1].kernel())
    return extra


def solve_forced_map(seq):
    """All homs filling the single unknown slot so that ``seq`` is exact."""
    unk = seq.unknowns()
    if len(unk) != 1:
        raise ValueError(f"expected exactly one unknown hom, found {len(unk)}")
    i = unk[0]
    cands = all_homs(seq.groups[i], seq.groups[i + 1], extra=_needed_magnitudes(seq, i))
    return {h for h in cands if check_exactness(seq.with_hom(i, h))}


# ---------------------------------------------------------------------------
# tables

_O = [Z2, Z2, ZERO, Z, ZERO, ZERO, ZERO, Z]
_U = [ZERO, Z] * 4
_SP = [ZERO, ZERO, ZERO, Z, Z2, Z2, ZERO, Z]

BASE_SERIES = {"O": _O, "U": _U, "Sp": _SP}
PAIRS = {"O_to_U": ("O", "U"), "U_to_Sp": ("U", "Sp"),
         "Sp_to_U": ("Sp", "U"), "U_to_O": ("U", "O")}


def _hom_from_spec(spec, a, b):
    if spec == "0":
        return zero(a, b)
    if spec == "id":
        return identity(a)
    if spec == "x2":
        return mul(2)
    if spec == "mod2":
        return mod2()
    raise ValueError(spec)


MAP_TABLES = {
    "O_to_U": ["0", "0", "0", "x2", "0", "0", "0", "id"],
    "Sp_to_U": ["0", "0", "0", "id", "0", "0", "0", "x2"],
    "U_to_Sp": ["0", "0", "0", "x2", "0", "mod2", "0", "id"],
    "U_to_O": ["0", "mod2", "0", "id", "0", "0", "0", "x2"],
}

# values quoted for the quotient U/O, used to cross-check the derivation
QUOTED_U_MOD_O = {3: Z2, 4: ZERO}

QUOTIENTS = {"U_mod_O": "O_to_U", "Sp_mod_U": "U_to_Sp"}


def stable_group(series, i):
    """``pi_i`` of a stable series; depends only on ``i mod 8``."""
    if i < 0:
        raise ValueError("degree must be nonnegative")
    if series in BASE_SERIES:
        return _GROUPS[BASE_SERIES[series][i % 8]]
    if series in QUOTIENTS:
        return _GROUPS[derive_quotient_tables()[series]["groups"][i % 8]]
    raise ValueError(f"unknown series {series!r}")


def stable_map(pair, i, tables=None):
    """Tabulated map ``pi_i(A) -> pi_i(B)`` for a series pair."""
    if pair not in PAIRS:
        raise ValueError(f"unknown pair {pair!r}")
    tables = MAP_TABLES if tables is None else tables
    a, b = PAIRS[pair]
    spec = tables[pair]
    spec = spec[i] if len(spec) > 8 else spec[i % 8]
    return _hom_from_spec(spec, stable_group(a, i), stable_group(b, i))


def table_rows():
    """The four printed tables as rows of labels indexed by ``i mod 8``."""
    rows = {}
    for pair, (a, b) in PAIRS.items():
        rows[pair] = {
            a: [stable_group(a, i).kind for i in range(8)],
            b: [stable_group(b, i).kind for i in range(8)],
            "map": [stable_map(pair, i).label() for i in range(8)],
        }
    return rows


# ---------------------------------------------------------------------------
# quotient tables


def _quotient_segment(pair, i, G, p=None, d=None, tables=None):
    """``pi_i(A) -f_i-> pi_i(B) -p-> G -d-> pi_{i-1}(A) -f_{i-1}-> pi_{i-1}(B)``.

    Degrees are taken mod 8 so the segment at ``i = 0`` wraps to ``i - 1 = 7``.
    """
    a, b = PAIRS[pair]
    j = (i - 1) % 8
    f_i, f_j = stable_map(pair, i % 8, tables), stable_map(pair, j, tables)
    return ExactSequence(
        [stable_group(a, i % 8), stable_group(b, i % 8), G, stable_group(a, j), stable_group(b, j)],
        [f_i, p, d, f_j])


def _quotient_solutions(pair, i, tables=None):
    """All ``(G, p, d)`` with ``G`` in ``{0, Z, Z2}`` making the segment exact."""
    a, b = PAIRS[pair]
    Bi = stable_group(b, i % 8)
    Aj = stable_group(a, (i - 1) % 8)
    found = []
    for kind in KINDS:
        G = _GROUPS[kind]
        for p, d in product(all_homs(Bi, G), all_homs(G, Aj)):
            seq = _quotient_segment(pair, i, G, p, d, tables)
            if check_exactness(seq):
                found.append((G, p, d))
    return found


@lru_cache(maxsize=None)
def _derive(pair):
    groups, conn = [], []
    for i in range(8):
        sols = _quotient_solutions(pair, i)
        kinds = {G.kind for G, _, _ in sols}
        if not kinds:
            raise ValueError(f"{pair}, i={i}: no group in {{0, Z, Z2}} fits the exact sequence")
        if len(kinds) > 1:
            raise ValueError(f"{pair}, i={i}: quotient group is ambiguous ({sorted(kinds)})")
        groups.append(kinds.pop())
        # keep a representative with nonnegative multipliers
        sols.sort(key=lambda s: (s[1].m < 0, s[2].m < 0, abs(s[1].m), abs(s[2].m)))
        conn.append((sols[0][1], sols[0][2]))
    return tuple(groups), tuple(conn)


def derive_quotient_tables():
    """Unique ``pi_i`` of ``U/O`` and ``Sp/U`` forced by exactness, with connecting maps.

    Raises ``ValueError`` on ambiguity, on a group outside ``{0, Z, Z2}`` or
    if the quoted values for ``U/O`` are not reproduced.
    """
    out = {}
    for series, pair in QUOTIENTS.items():
        groups, conn = _derive(pair)
        out[series] = {"groups": list(groups),
                       "p": [c[0] for c in conn], "d": [c[1] for c in conn]}
    for i, kind in QUOTED_U_MOD_O.items():
        if out["U_mod_O"]["groups"][i] != kind:
            raise ValueError(f"derived pi_{i}(U/O) = {out['U_mod_O']['groups'][i]}, quoted {kind}")
    return out


def les_segments(range_max=16):
    """Assembled segments of both long exact sequences for ``i = 0..range_max``."""
    tabs = derive_quotient_tables()
    segs = []
    for series, pair in QUOTIENTS.items():
        t = tabs[series]
        for i in range(range_max + 1):
            k = i % 8
            segs.append(((pair, i), _quotient_segment(pair, i, _GROUPS[t["groups"][k]],
                                                      t["p"][k], t["d"][k])))
    return segs


def masked_map_solutions(pair, i):
    """Solutions for ``f_i`` when it is masked in ``pi_{i+1}(Q) -> pi_i(A) -> pi_i(B) -> pi_i(Q)``."""
    series = {v: k for k, v in QUOTIENTS.items()}[pair]
    t = derive_quotient_tables()[series]
    a, b = PAIRS[pair]
    k, k1 = i % 8, (i + 1) % 8
    seq = ExactSequence(
        [_GROUPS[t["groups"][k1]], stable_group(a, k), stable_group(b, k), _GROUPS[t["groups"][k]]],
        [t["d"][k1], None, t["p"][k]])
    return solve_forced_map(seq)


def verify_periodicity(range_max=24, lookup=None):
    """``map(pair, i)`` equals ``map(pair, i + 8)`` up to multiplier sign.

    ``lookup(pair, i)`` defaults to :func:`stable_map`; a different table
    can be injected to exercise the failure path. For the O -> U and
    U -> Sp pairs each value is also checked against the maps forced by the
    long exact sequence.
    """
    if range_max < 8:
        raise ValueError("range_max must be at least 8")
    lookup = lookup or stable_map
    failures = []
    for pair in PAIRS:
        for i in range(range_max - 7):
            if not lookup(pair, i).equivalent(lookup(pair, i + 8)):
                failures.append({"pair": pair, "i": i, "reason": "period",
                                 "map_i": str(lookup(pair, i)), "map_i+8": str(lookup(pair, i + 8))})
        if pair in QUOTIENTS.values():
            for i in range(range_max + 1):
                if lookup(pair, i) not in masked_map_solutions(pair, i):
                    failures.append({"pair": pair, "i": i, "reason": "not forced",
                                     "map_i": str(lookup(pair, i))})
    return {"check": "periodicity", "status": "fail" if failures else "pass",
            "range_max": range_max, "witness": failures[0] if failures else None,
            "failures": failures}


def corollary_map(chain_pair, k, i):
    """Stable map ``pi_i(P_k) -> pi_i(P~_k)`` (``SO_U``) or ``pi_i(P~_k) -> pi_i(P-_k)`` (``U_Sp``).

    It is the shifted lookup at degree ``i + k``; for ``SO_U`` with ``k = 1``
    and ``i = 0 mod 8`` the target ``pi_i`` of the complex Grassmannian is
    trivial and the map is zero.
    """
    if not 0 <= k <= 8:
        raise ValueError("k must be in 0..8")
    pair = {"SO_U": "O_to_U", "U_Sp": "U_to_Sp"}[chain_pair]
    h = stable_map(pair, i + k)
    if chain_pair == "SO_U" and k == 1 and i % 8 == 0:
        return zero(h.domain, G0)
    return h


def tables_to_json():
    tabs = derive_quotient_tables()
    groups = [{"series": s, "i_mod_8": i, "group": stable_group(s, i).kind}
              for s in list(BASE_SERIES) + list(QUOTIENTS) for i in range(8)]
    maps = []
    for pair in PAIRS:
        for i in range(8):
            h = stable_map(pair, i)
            maps.append({"pair": pair, "i_mod_8": i, "hom_kind": h.kind,
                         "multiplier": abs(h.m) if h.kind == "mul" else None})
    return {"groups": groups, "maps": maps,
            "quotients": {s: tabs[s]["groups"] for s in tabs}}
