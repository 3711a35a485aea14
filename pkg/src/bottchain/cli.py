"""Command-line runner for the verification suites.

Usage::

    bottchain --suite all --n 1 --seed 42 --format text
    bottchain --config run.cfg --out report.json

A config file holds ``key = value`` lines (``#`` starts a comment) with the
same keys as the long flags; flags given on the command line win.
"""
import argparse
import json
import sys
import time
import zlib
from dataclasses import asdict, dataclass

import numpy as np

from . import algebra as alg
from . import chains as ch
from . import homotopy as hp
from . import inclusions as inc

SUITES = ("algebra", "chains", "inclusions", "homotopy")
DIM_CAP = 64


@dataclass
class RunConfig:
    n: int = 1
    seed: int = 0
    tol_predicate: float = 1e-10
    tol_distance: float = 1e-9
    samples: int = 100
    suites: tuple = SUITES
    output: str = None
    format: str = "json"
    dim_cap: int = DIM_CAP

    def validate(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if 16 * self.n > self.dim_cap:
            raise ValueError(f"16n = {16 * self.n} exceeds the dimension cap {self.dim_cap}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.format not in ("json", "text"):
            raise ValueError("format must be json or text")
        bad = set(self.suites) - set(SUITES)
        if bad:
            raise ValueError(f"unknown suites {sorted(bad)}")

    def to_json(self):
        d = asdict(self)
        d["suites"] = list(self.suites)
        return d


@dataclass
class CheckResult:
    check_id: str
    status: str
    max_residual: float = None
    witness: object = None
    paper_ref: str = ""
    elapsed_ms: int = 0


def check_seed(seed, check_id):
    """Per-check seed from the run seed and the check id."""
    return ((int(seed) & 0xFFFFFFFF) << 32) | zlib.crc32(check_id.encode())


def _run(check_id, paper_ref, fn, cfg):
    t0 = time.perf_counter()
    try:
        status, res, witness = fn(check_seed(cfg.seed, check_id))
    except Exception as exc:  # collect and continue
        status, res, witness = "fail", None, {"error": f"{type(exc).__name__}: {exc}"}
    if status == "fail" and witness is None:
        witness = {"max_residual": res}
    ms = int(round(1000 * (time.perf_counter() - t0)))
    return CheckResult(check_id, status, None if res is None else float(res), witness, paper_ref, ms)


def _status(ok):
    return "pass" if ok else "fail"


def _falsify(inner):
    """A corrupted fixture passes this wrapper only if it fails with a witness."""
    def fn(seed):
        status, res, witness = inner(seed)
        caught = status == "fail" and witness is not None
        return _status(caught), res, {"corrupted_fixture": status, "detail": witness}
    return fn


# ---------------------------------------------------------------------------
# algebra suite


def _quat_product_check(seed, product=None):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        r = 3
        P = alg.QuatMatrix(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)),
                           rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        Q = alg.QuatMatrix(rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)),
                           rng.normal(size=(r, r)) + 1j * rng.normal(size=(r, r)))
        native = (product or (lambda a, b: a @ b))(P, Q)
        ref = alg.quat_to_complex(P) @ alg.quat_to_complex(Q)
        worst = max(worst, float(np.max(np.abs(alg.quat_to_complex(native) - ref))))
    return _status(worst < 1e-12), worst, None if worst < 1e-12 else {"max_deviation": worst}


def _commutative_product(P, Q):
    # corrupted: drops the conjugations in the quaternion product
    return alg.QuatMatrix(P.A @ Q.A - P.B @ Q.B, P.A @ Q.B + P.B @ Q.A)


def _real_picture_check(seed):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        M = alg.QuatMatrix(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)),
                           rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
        back = alg.real_to_quat(alg.quat_to_real(M))
        worst = max(worst, float(np.max(np.abs(alg.quat_to_complex(back) - alg.quat_to_complex(M)))))
    return _status(worst < 1e-12), worst, None


def _distance_check(cfg):
    def fn(seed):
        N = 16 * cfg.n
        target = np.pi * np.sqrt(N)
        I_r, I_c = np.eye(N), np.eye(N, dtype=complex)
        d = {"SO": alg.geodesic_distance(I_r, -I_r),
             "U": alg.geodesic_distance(I_c, -I_c),
             "Sp": alg.geodesic_distance(ch.sp_embed(I_c), -ch.sp_embed(I_c), alg.SYMPLECTIC_HALF)}
        dev = max(abs(v - target) for v in d.values())
        return _status(dev <= cfg.tol_distance), dev, {"distances": d, "expected": target}
    return fn


def _pfaffian_check(seed):
    rng = np.random.default_rng(seed)
    worst = 0
    for _ in range(20):
        Q = alg.haar_orthogonal(rng, 8, special=False)
        J0 = np.block([[np.zeros((4, 4)), -np.eye(4)], [np.eye(4), np.zeros((4, 4))]])
        J = Q @ J0 @ Q.T
        expected = alg.pfaffian_sign(J0) * int(round(np.linalg.det(Q)))
        if alg.pfaffian_sign(J) != expected:
            worst = 1
    return _status(worst == 0), worst, None


def algebra_checks(cfg):
    return [
        ("algebra.quaternion_product", "quaternion matrix product against the complex picture",
         _quat_product_check),
        ("algebra.real_picture_roundtrip", "real picture of quaternion matrices",
         _real_picture_check),
        ("algebra.distance_identity_to_minus_identity", "distance from I to -I in U_2q",
         _distance_check(cfg)),
        ("algebra.pfaffian_conjugation", "pfaffian sign under orthogonal conjugation",
         _pfaffian_check),
        ("algebra.falsifiability", "corrupted quaternion product",
         _falsify(lambda s: _quat_product_check(s, _commutative_product))),
    ]


# ---------------------------------------------------------------------------
# chains suite


def _clifford_check(cliff, tol=1e-12):
    def fn(seed):
        res = cliff.residuals()
        worst = max(res.values())
        return _status(worst <= tol), worst, None if worst <= tol else res
    return fn


def _broken_clifford(n):
    cliff = ch.make_clifford_system(n)
    s = list(cliff.structures)
    s[1] = s[0]
    return ch.CliffordSystem(n, tuple(s))


def _profile_check(kind, cfg):
    def fn(seed):
        nodes = ch.build_chain(kind, cfg.n)
        prof = ch.chain_distance_profile(nodes, cfg.tol_predicate)
        target = 4 * np.pi * np.sqrt(cfg.n)
        dev = max(abs(p - target) for p in prof)
        return _status(dev <= cfg.tol_distance), dev, {"profile": prof}
    return fn


def _sampled_membership_check(kind, cfg):
    def fn(seed):
        nodes = ch.build_chain(kind, cfg.n)
        worst, witness = 0.0, None
        count = max(1, cfg.samples // 10)
        for node in nodes:
            pts = ch.sample_node_points(node, count, seed) + \
                ch.sample_node_geodesic_points(node, count, seed)
            for J in pts:
                r = max(node.residuals(J).values())
                worst = max(worst, r)
                if not node.membership(J, cfg.tol_predicate) and witness is None:
                    witness = {"k": node.k, "matrix": alg.matrix_to_json(J)}
        return _status(witness is None), worst, witness
    return fn


def _grassmann_midpoint_check(cfg):
    def fn(seed):
        q = 8
        gamma = ch.grassmannian_geodesic(q)
        Z, I = np.zeros((q, q)), np.eye(q)
        mid = np.block([[Z, I], [-I, Z]])
        dev = max(float(np.max(np.abs(gamma(0.5) - mid))),
                  float(np.max(np.abs(gamma(1.0) + alg.standard_complex_structure(q)))))
        return _status(dev <= 1e-11), dev, None
    return fn


def chains_checks(cfg):
    cliff = ch.make_clifford_system(cfg.n)
    out = [("chains.clifford_system", "eight anticommuting orthogonal complex structures",
            _clifford_check(cliff)),
           ("chains.grassmannian_midpoint", "midpoint of the Grassmannian geodesic",
            _grassmann_midpoint_check(cfg))]
    for kind in ch.CHAINS:
        out.append((f"chains.{kind}.distance_profile", "equal distances along the chain",
                    _profile_check(kind, cfg)))
        out.append((f"chains.{kind}.sampled_membership", "nodes as iterated centrioles",
                    _sampled_membership_check(kind, cfg)))
    out.append(("chains.falsifiability", "broken anticommutation in the Clifford system",
                _falsify(_clifford_check(_broken_clifford(cfg.n)))))
    return out


# ---------------------------------------------------------------------------
# inclusions suite


def _wrap_report(fn):
    def run(seed):
        rep = fn(seed)
        return rep["status"], rep["max_residual"], rep.get("witness")
    return run


def _wrong_ratio_fixture(cfg):
    def fn(seed):
        ratio = inc.metric_pullback_scale(inc.p4_embedding(cfg.n), seed=0)
        claimed = 16.0
        ok = abs(ratio - claimed) / claimed <= 1e-4
        return _status(ok), abs(ratio - claimed), None if ok else {"ratio": ratio, "claimed": claimed}
    return fn


def inclusions_checks(cfg):
    out = []
    for pair in (("SO", "U"), ("U", "Sp")):
        tag = f"{pair[0]}_{pair[1]}"
        for k in range(9):
            out.append((f"inclusions.{tag}.fixed_point.k{k}", inc.PAPER_REF["fixed_point_node"],
                        _wrap_report(lambda s, k=k, pair=pair: inc.verify_fixed_point_node(
                            k, pair, cfg.samples, s, cfg.tol_predicate, cfg.n))))
        for k in range(8):
            out.append((f"inclusions.{tag}.square.k{k}", inc.PAPER_REF["square_commutes"],
                        _wrap_report(lambda s, k=k, pair=pair: inc.verify_square_commutes(
                            k, pair, max(1, cfg.samples // 4), s, cfg.tol_distance, cfg.n))))
    for which in inc.NORMAL_FORMS:
        out.append((f"inclusions.normal_form.{which}", inc.PAPER_REF["normal_form"],
                    _wrap_report(lambda s, w=which: inc.verify_isometry_normal_form(
                        w, cfg.n, max(1, cfg.samples // 2), s, cfg.tol_predicate))))
    out.append(("inclusions.falsifiability", "wrong metric multiplier for P4",
                _falsify(_wrong_ratio_fixture(cfg))))
    return out


# ---------------------------------------------------------------------------
# homotopy suite


def _periodicity(lookup=None):
    def fn(seed):
        rep = hp.verify_periodicity(24, lookup)
        return rep["status"], None, rep["witness"]
    return fn


def _forced_maps(seed):
    f3 = hp.ExactSequence(["0", "Z", "Z", "Z2", "0"],
                          [hp.zero(hp.G0, hp.GZ), None, hp.mod2(), hp.zero(hp.GZ2, hp.G0)])
    f7 = hp.ExactSequence(["0", "Z", "Z", "0"], [hp.zero(hp.G0, hp.GZ), None, hp.zero(hp.GZ, hp.G0)])
    s3, s7 = hp.solve_forced_map(f3), hp.solve_forced_map(f7)
    ok = s3 == {hp.mul(2), hp.mul(-2)} and s7 == {hp.mul(1), hp.mul(-1)}
    return _status(ok), None, None if ok else {"f3": sorted(map(str, s3)), "f7": sorted(map(str, s7))}


def _quotients(seed):
    tabs = hp.derive_quotient_tables()
    g = tabs["U_mod_O"]["groups"]
    ok = g[3] == hp.Z2 and g[4] == hp.ZERO
    return _status(ok), None, {k: v["groups"] for k, v in tabs.items()}


def _segments(seed):
    bad = [key for key, seg in hp.les_segments(16)
           if not (hp.check_exactness(seg) and hp.check_exactness_bruteforce(seg))]
    return _status(not bad), None, {"failing_segments": bad} if bad else None


def _corrupted_lookup(pair, i):
    if pair == "O_to_U" and i == 3:
        return hp.identity(hp.GZ)
    return hp.stable_map(pair, i)


def homotopy_checks(cfg):
    return [
        ("homotopy.periodicity", "periodicity of the induced maps", _periodicity()),
        ("homotopy.forced_maps", "maps forced by exact sequences", _forced_maps),
        ("homotopy.quotient_tables", "homotopy of U/O and Sp/U from exactness", _quotients),
        ("homotopy.les_segments", "long exact sequences of the bundles", _segments),
        ("homotopy.falsifiability", "corrupted table f_3 = id", _falsify(_periodicity(_corrupted_lookup))),
    ]


SUITE_CHECKS = {"algebra": algebra_checks, "chains": chains_checks,
                "inclusions": inclusions_checks, "homotopy": homotopy_checks}


def run_suite(cfg):
    """Run every check of the selected suites; failures never abort the run."""
    cfg.validate()
    results = []
    for suite in SUITES:
        if suite not in cfg.suites:
            continue
        for check_id, ref, fn in SUITE_CHECKS[suite](cfg):
            results.append(_run(check_id, ref, fn, cfg))
    return results


def summarize(results):
    s = {"pass": 0, "fail": 0, "skip": 0}
    for r in results:
        s[r.status] += 1
    return s


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return alg.matrix_to_json(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


def report_dict(cfg, results):
    return {"config": cfg.to_json(),
            "results": [_jsonable(asdict(r)) for r in results],
            "summary": summarize(results)}


def emit_report(cfg, results, fmt="json", path=None):
    if not results:
        raise ValueError("no results to report")
    if fmt == "json":
        text = json.dumps(report_dict(cfg, results), indent=2, sort_keys=True) + "\n"
    else:
        lines = []
        for r in results:
            res = "-" if r.max_residual is None else f"{r.max_residual:.3e}"
            lines.append(f"{r.status.upper():4s}  {r.check_id:48s} residual={res:10s} {r.paper_ref}")
        s = summarize(results)
        lines.append(f"summary: pass={s['pass']} fail={s['fail']} skip={s['skip']}")
        text = "\n".join(lines) + "\n"
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return text


def read_config_file(path):
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            k, v = (s.strip() for s in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _suites(value):
    parts = [p.strip() for p in str(value).split(",") if p.strip()]
    return SUITES if "all" in parts else tuple(parts)


def build_config(argv=None):
    ap = argparse.ArgumentParser(prog="bottchain", description="Verify Bott chain geometry and tables.")
    ap.add_argument("--config", help="key = value file with defaults")
    ap.add_argument("--n", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--tol", type=float, help="predicate tolerance")
    ap.add_argument("--tol-distance", type=float)
    ap.add_argument("--samples", type=int,
                    help="fixed-point samples; squares use samples/4, normal forms samples/2")
    ap.add_argument("--suite", help="comma-separated subset of algebra,chains,inclusions,homotopy or all")
    ap.add_argument("--out")
    ap.add_argument("--format", choices=["json", "text"])
    ap.add_argument("--dim-cap", type=int)
    args = ap.parse_args(argv)

    vals = read_config_file(args.config) if args.config else {}
    flags = {"n": args.n, "seed": args.seed, "tol_predicate": args.tol,
             "tol_distance": args.tol_distance, "samples": args.samples,
             "suites": args.suite, "output": args.out, "format": args.format,
             "dim_cap": args.dim_cap}
    aliases = {"tol": "tol_predicate", "suite": "suites", "out": "output"}
    vals = {aliases.get(k, k): v for k, v in vals.items()}
    vals.update({k: v for k, v in flags.items() if v is not None})
    casts = {"n": int, "seed": int, "tol_predicate": float, "tol_distance": float,
             "samples": int, "suites": _suites, "output": str, "format": str, "dim_cap": int}
    unknown = set(vals) - set(casts)
    if unknown:
        ap.error(f"unknown config keys {sorted(unknown)}")
    return RunConfig(**{k: casts[k](v) for k, v in vals.items()})


def main(argv=None):
    try:
        cfg = build_config(argv)
        cfg.validate()
    except ValueError as exc:
        print(f"bottchain: {exc}", file=sys.stderr)
        return 2
    results = run_suite(cfg)
    try:
        emit_report(cfg, results, cfg.format, cfg.output)
    except OSError as exc:
        print(f"bottchain: cannot write report: {exc}", file=sys.stderr)
        return 2
    return 0 if summarize(results)["fail"] == 0 else 1


if __name__ == "__main__":
    sys.exit(main())
