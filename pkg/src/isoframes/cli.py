"""Command-line surface: batch verification runs emitting JSON reports.

Exit codes: 0 all checks passed, 1 a check failed, 2 the configuration was
refused (outside the supported hypotheses or over budget).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from .cache import EnumerationCache
from .chains import RefusalError, acyclicity_verdict
from .fields import ConfigurationError, FiniteField, field_make, is_prime
from .genpos import NotFound, find_general_position, verify_certificate
from .hermitian import HyperbolicSpace, UnsupportedConvention
from .posets import BudgetExceeded, PosetSpec
from . import spectral, unitary

FRAME_KIND_CHOICES = ("u", "u-proj", "iu", "iu-proj", "iv", "tits")


def _field_from_args(args) -> FiniteField:
    q = args.q
    p, e = _factor_prime_power(q)
    inv = "frobenius-sqrt" if args.inv.startswith("frob") else "identity"
    return field_make(p, e, inv)


def _factor_prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if is_prime(p) and q % p == 0:
            e = 0
            x = q
            while x % p == 0:
                x //= p
                e += 1
            if x != 1:
                raise ConfigurationError(f"{q} is not a prime power")
            return p, e
    raise ConfigurationError(f"{q} is not a prime power")


def _space_from_args(args) -> HyperbolicSpace:
    field = _field_from_args(args)
    eps = field.minus_one if args.eps == -1 else 1
    return HyperbolicSpace(field, args.n, eps)


def _eps_code(field: FiniteField, eps: int) -> int:
    return field.minus_one if eps == -1 else 1


def parse_frame(text: str, dim: int, field: FiniteField) -> tuple:
    """Frames as "e1;e3" or "1,0,0,0;0,0,1,0"."""
    out = []
    for part in text.split(";"):
        part = part.strip()
        if not part:
            continue
        if part.startswith("e"):
            i = int(part[1:])
            v = [0] * dim
            v[i - 1] = 1
            out.append(tuple(v))
        else:
            coords = tuple(int(x) % field.q for x in part.split(","))
            if len(coords) != dim:
                raise ConfigurationError(
                    f"vector {part!r} has {len(coords)} coordinates, need {dim}"
                )
            out.append(coords)
    return tuple(out)


def _cache_from_args(args):
    path = args.cache_dir or os.environ.get("ISOFRAMES_CACHE")
    return EnumerationCache(path) if path else None


def write_report(report: dict, out_path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    if out_path:
        d = os.path.dirname(os.path.abspath(out_path)) or "."
        fd, tmp = tempfile.mkstemp(dir=d, suffix=".json.tmp")
        with os.fdopen(fd, "w") as f:
            f.write(text + "\n")
        os.replace(tmp, out_path)
    print(text)


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.bool_,)):
        return bool(x)
    raise TypeError(f"not JSON serializable: {type(x)}")


def validate_report_roundtrip(report: dict) -> bool:
    """Reports must survive a serialize/parse cycle unchanged."""
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    return json.loads(text) == json.loads(
        json.dumps(json.loads(text), indent=2, sort_keys=True)
    )


def _base_report(args, command: str) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k not in ("func",)}
    return {
        "version": __version__,
        "command": command,
        "config": cfg,
        "seed": getattr(args, "seed", None),
        "checks": [],
    }


def _finish(report: dict, args, cache, t0: float) -> int:
    report["elapsed_s"] = round(time.time() - t0, 3)
    if cache is not None:
        report["cache"] = cache.stats()
    verdicts = [c.get("verdict") for c in report["checks"]]
    report["verdict"] = "PASS" if all(v == "PASS" for v in verdicts) else "FAIL"
    assert validate_report_roundtrip(report)
    write_report(report, args.out)
    return 0 if report["verdict"] == "PASS" else 1


def cmd_acyclicity(args) -> int:
    t0 = time.time()
    cache = _cache_from_args(args)
    report = _base_report(args, "acyclicity")
    field = _field_from_args(args)
    eps = _eps_code(field, args.eps)
    w = None
    if args.w:
        dim = 2 * args.n if args.kind.startswith("iu") or args.kind == "iv" else (args.m or args.n)
        w = parse_frame(args.w, dim, field)
    spec = PosetSpec(
        kind=args.kind,
        p=field.p,
        e=field.e,
        involution=field.involution,
        n=args.n,
        m=args.m,
        eps=eps if args.kind in ("iu", "iu-proj", "iv") else None,
        w=w,
        budget=args.budget,
    )
    bound = args.bound if args.bound is not None else _default_bound(args.kind, args.n, w)
    rep = acyclicity_verdict(
        spec, bound, coeff=args.coeff, cache=cache, threads=args.threads,
        label=f"{args.kind}(q={field.q}, n={args.n}" + (f", m={args.m}" if args.m else "") + ")",
    )
    report["checks"].append(
        {
            "name": "acyclicity",
            "bound": bound,
            "rows": rep.rows,
            "verdict": rep.verdict,
        }
    )
    return _finish(report, args, cache, t0)


def _default_bound(kind: str, n: int, w) -> int:
    r = len(w) if w else 0
    if kind in ("u", "u-proj"):
        return max(n - r - 2, -1)
    if kind in ("iu", "iu-proj", "iv"):
        return max(n - 2, -1)
    return max(n - 3, -1)  # tits


def cmd_genpos(args) -> int:
    t0 = time.time()
    report = _base_report(args, "genpos")
    space = _space_from_args(args)
    import random as _random

    rng = _random.Random(args.seed)
    frames = []
    if args.frames:
        for chunk in args.frames.split("|"):
            frames.append(parse_frame(chunk, space.dim, space.field))
    else:
        from .genpos import _random_isotropic_frame

        for _ in range(args.l):
            fr = _random_isotropic_frame(space, args.k, rng)
            frames.append(fr)
    res = find_general_position(space, frames, seed=args.seed)
    if isinstance(res, NotFound):
        report["checks"].append(
            {"name": "general-position", "verdict": "FAIL", "result": res.evidence}
        )
    else:
        ok = verify_certificate(space, res)
        report["checks"].append(
            {
                "name": "general-position",
                "verdict": "PASS" if ok else "FAIL",
                "certificate": json.loads(res.to_json()),
                "reverified": ok,
            }
        )
    return _finish(report, args, None, t0)


def cmd_orbit(args) -> int:
    t0 = time.time()
    report = _base_report(args, "orbit")
    space = _space_from_args(args)
    frame = parse_frame(args.frame, space.dim, space.field)
    from .hermitian import line_representative

    frame = tuple(line_representative(space.field, v) for v in frame)
    gens = unitary.make_generators(space)
    orbit = unitary.orbit_of_frame(space, gens, frame, budget=args.budget)
    check = {"name": "orbit", "size": len(orbit), "verdict": "PASS"}
    if args.expect_enumeration:
        from .posets import PosetComplex, spec_for_space

        cx = PosetComplex(spec_for_space(space, "iu-proj"))
        count = len(cx.simplices(len(frame) - 1))
        check["enumerated"] = count
        check["verdict"] = "PASS" if count == len(orbit) else "FAIL"
    report["checks"].append(check)
    return _finish(report, args, None, t0)


def cmd_stab(args) -> int:
    t0 = time.time()
    report = _base_report(args, "stab")
    space = _space_from_args(args)
    rep = unitary.stabilizer_report(space, args.p, samples=args.samples, seed=args.seed)
    ok = (
        rep.samples_pattern_ok == rep.samples_checked
        and rep.factorization_ok
        and rep.nprime_pattern_is_group
        and rep.nprime_pattern_in_stab
        and rep.derived_inside_pattern
    )
    report["checks"].append(
        {"name": "stabilizer-structure", "verdict": "PASS" if ok else "FAIL", "report": rep.to_dict()}
    )
    return _finish(report, args, None, t0)


def cmd_spectral(args) -> int:
    t0 = time.time()
    report = _base_report(args, f"spectral.{args.spectral_cmd}")
    if args.spectral_cmd == "bottom-row":
        space = _space_from_args(args)
        row = spectral.build_bottom_row(space, ell=args.ell, threads=args.threads)
        van = spectral.check_E2_vanishing(row)
        report["checks"].append(
            {
                "name": "bottom-row",
                "row": row.to_dict(),
                "vanishing": van,
                "verdict": van["verdict"],
            }
        )
    elif args.spectral_cmd == "theta":
        space = _space_from_args(args)
        res = spectral.theta_check(space, ell=args.ell)
        report["checks"].append({"name": "theta", **res})
    elif args.spectral_cmd == "alpha":
        space = _space_from_args(args)
        res = spectral.alpha_chain_map_check(space, samples=args.samples, seed=args.seed)
        report["checks"].append({"name": "alpha-chain-map", **res})
    elif args.spectral_cmd == "coinvariants":
        field = _field_from_args(args)
        weights = [int(x) for x in args.weights.split(",")]
        dim = spectral.unit_weight_coinvariants(field, weights)
        report["checks"].append(
            {"name": "coinvariants", "dim": dim, "verdict": "PASS"}
        )
    elif args.spectral_cmd == "coprime":
        dims = spectral.coprime_module_homology(
            args.torsion_prime, args.copies, args.ell, args.degrees
        )
        expected = [1] + [0] * args.degrees
        report["checks"].append(
            {
                "name": "coprime-module-homology",
                "dims": dims,
                "verdict": "PASS" if dims == expected else "FAIL",
            }
        )
    else:  # pragma: no cover
        raise AssertionError(args.spectral_cmd)
    return _finish(report, args, None, t0)


def cmd_h1(args) -> int:
    t0 = time.time()
    report = _base_report(args, "h1")
    field = _field_from_args(args)
    eps = _eps_code(field, args.eps)
    res = spectral.h1_stability_check(field, eps, ell=args.ell, n_max=args.n_max)
    report["checks"].append({"name": "h1-stability", **res})
    return _finish(report, args, None, t0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="isoframes",
        description="Exact homology and group checks for isotropic unimodular frame posets",
    )
    ap.add_argument("--out", default=None, help="write the JSON report here (atomic)")

    def common(sub, n_default=2):
        sub.add_argument("--q", type=int, required=True, help="field size (prime power)")
        sub.add_argument("--inv", default="identity", choices=["identity", "frobenius", "frobenius-sqrt"])
        sub.add_argument("--eps", type=int, default=-1, choices=[1, -1])
        sub.add_argument("--n", type=int, default=n_default)
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--threads", type=int, default=1)
        sub.add_argument("--budget", type=int, default=5_000_000)
        sub.add_argument("--cache-dir", default=None)
        sub.add_argument("--out", default=None)

    sp = ap.add_subparsers(dest="command", required=True)

    a = sp.add_parser("acyclicity", help="homology vanishing verdicts for a poset")
    common(a)
    a.add_argument("--kind", default="iu-proj", choices=FRAME_KIND_CHOICES)
    a.add_argument("--m", type=int, default=None)
    a.add_argument("--w", default=None, help='link frame, e.g. "e3" or "0,0,1"')
    a.add_argument("--bound", type=int, default=None)
    a.add_argument("--coeff", default="auto", help="int | rat | mod | auto | a prime")
    a.set_defaults(func=cmd_acyclicity)

    g = sp.add_parser("genpos", help="search for a frame in general position")
    common(g, n_default=3)
    g.add_argument("--l", type=int, default=2, help="number of random input frames")
    g.add_argument("--k", type=int, default=1, help="components per input frame")
    g.add_argument("--frames", default=None, help='explicit frames "v;v|v;v"')
    g.set_defaults(func=cmd_genpos)

    o = sp.add_parser("orbit", help="orbit of a line frame under the group")
    common(o)
    o.add_argument("--frame", required=True, help='e.g. "e1;e3"')
    o.add_argument("--expect-enumeration", action="store_true")
    o.set_defaults(func=cmd_orbit)

    st = sp.add_parser("stab", help="stabilizer block structure report")
    common(st)
    st.add_argument("--p", type=int, default=2)
    st.add_argument("--samples", type=int, default=200)
    st.set_defaults(func=cmd_stab)

    spc = sp.add_parser("spectral", help="bottom-row and related checks")
    spc_sub = spc.add_subparsers(dest="spectral_cmd", required=True)
    for name in ("bottom-row", "theta", "alpha"):
        s = spc_sub.add_parser(name)
        common(s, n_default=2 if name != "alpha" else 3)
        s.add_argument("--ell", type=int, default=5)
        s.add_argument("--samples", type=int, default=100)
        s.set_defaults(func=cmd_spectral)
    s = spc_sub.add_parser("coinvariants")
    common(s)
    s.add_argument("--weights", required=True, help="comma-separated weights")
    s.set_defaults(func=cmd_spectral)
    s = spc_sub.add_parser("coprime")
    s.add_argument("--torsion-prime", type=int, required=True)
    s.add_argument("--copies", type=int, default=1)
    s.add_argument("--ell", type=int, required=True)
    s.add_argument("--degrees", type=int, default=3)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", default=None)
    s.set_defaults(func=cmd_spectral)

    h = sp.add_parser("h1", help="first homology stability table")
    common(h)
    h.add_argument("--ell", type=int, required=True)
    h.add_argument("--n-max", type=int, default=2)
    h.set_defaults(func=cmd_h1)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (RefusalError, UnsupportedConvention, ConfigurationError, BudgetExceeded) as e:
        report = {
            "version": __version__,
            "command": args.command,
            "verdict": "REFUSED",
            "reason": str(e),
        }
        write_report(report, getattr(args, "out", None))
        return 2


if __name__ == "__main__":
    sys.exit(main())
