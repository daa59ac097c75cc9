"""qlocc command line interface.

Exit codes: 0 = affirmative/clean verdict, 1 = negative verdict
(non-orthogonal, reducible, extendible, not activable, protocol failed),
2 = input or usage error. `--json` switches the report to JSON; the
`timings` field is the only part excluded from byte-determinism.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__
from .fixtures import FIXTURE_NAMES, build_fixture, fixture_corrections
from .oplm import block_structure, is_locally_irreducible, oplm_space, projective_oplms
from .partitions import hidden_nonlocality_profile
from .protocol import (
    BUILTIN_PROTOCOLS,
    activation_search,
    builtin_protocol,
    certify_activation_protocol,
    search_distinguishing_protocol,
    tree_from_json,
    tree_to_json,
    verify_protocol,
)
from .qset import QsetError, parse_qset, serialize_qset
from .render import overlay_from_kraus, render
from .states import gram_check, party_letter, redundancy_check
from .upb import check_unextendible, numeric_extension_search

DEFAULT_TOL = 1e-9


class UsageError(Exception):
    pass


def _tol(args) -> float:
    if getattr(args, "tol", None) is not None:
        return args.tol
    env = os.environ.get("QLOCC_TOL")
    return float(env) if env else DEFAULT_TOL


def _load_set(args, report):
    path = getattr(args, "set", None)
    if not path:
        raise UsageError("--set FILE is required")
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")
    report["inputs"][os.path.basename(path)] = hashlib.sha256(raw).hexdigest()
    s = parse_qset(raw.decode("utf-8"))
    return s


def _require_orthogonal(s, tol, force: bool):
    rep = gram_check(s, tol=tol)
    if not rep.ok and not force:
        worst = rep.violations[0]
        raise NegativeVerdict(
            {
                "verdict": "non-orthogonal input",
                "worst_pair": {"labels": [worst[0], worst[1]], "magnitude": worst[2]},
            },
            f"input set is not pairwise orthogonal (|<{worst[0]}|{worst[1]}>| = {worst[2]:.4g}); "
            "rerun with --force to analyze anyway",
        )
    return rep


class NegativeVerdict(Exception):
    def __init__(self, payload: dict, text: str):
        self.payload = payload
        self.text = text


def _matrix_json(m) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


# -- command handlers: return (exit_code, verdict_payload, human_text) -------


def cmd_fixture(args, report):
    s = build_fixture(args.name, args.variant, d=args.d)
    text = serialize_qset(s)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    corrections = fixture_corrections(args.name)
    payload = {
        "fixture": args.name,
        "variant": args.variant,
        "states": len(s),
        "dims": list(s.space.party_dims),
        "corrections": [
            {"printed": p, "corrected": c, "justification": j} for p, c, j in corrections
        ],
        "written": args.output or None,
    }
    human = text if not args.output else f"wrote {len(s)}-state fixture {args.name}[{args.variant}] to {args.output}"
    return 0, payload, human


def cmd_check_ortho(args, report):
    s = _load_set(args, report)
    tol = _tol(args)
    rep = gram_check(s, tol=tol)
    payload = {
        "verdict": "orthogonal" if rep.ok else "non-orthogonal",
        "tol": tol,
        "pairs_checked": len(s) * (len(s) - 1) // 2,
        "violations": [
            {"labels": [a, b], "magnitude": v} for a, b, v in rep.violations[:20]
        ],
    }
    human = (
        f"{s.name or args.set}: pairwise orthogonal at tol {tol:g} ({payload['pairs_checked']} pairs)"
        if rep.ok
        else f"{s.name or args.set}: NOT orthogonal; worst pair "
        f"({rep.violations[0][0]}, {rep.violations[0][1]}) magnitude {rep.violations[0][2]:.6g}"
    )
    return (0 if rep.ok else 1), payload, human


def cmd_redundancy(args, report):
    s = _load_set(args, report)
    tol = _tol(args)
    _require_orthogonal(s, tol, args.force)
    rep = redundancy_check(s, tol=tol)
    payload = {
        "verdict": rep.verdict,
        "witness_discard": list(rep.witness_discard) if rep.witness_discard else None,
        "per_discard": {
            "|".join(discard): [{"labels": [a, b], "trace_product": v} for a, b, v in bad[:5]]
            for discard, bad in rep.violations.items()
        },
    }
    if rep.redundant:
        human = f"{s.name}: locally redundant (discard {','.join(rep.witness_discard)} keeps orthogonality)"
        return 1, payload, human
    human = f"{s.name}: locally irredundant (every discard choice breaks some pair)"
    return 0, payload, human


def cmd_oplm(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    party = args.party
    if party is None or not 0 <= party < s.space.n_parties:
        raise UsageError("--party INDEX is required and must be in range")
    sp = oplm_space(s, party, on_support=args.on_support)
    bs = block_structure(sp)
    payload = {
        "party": party_letter(party),
        "space_dim": sp.space_dim,
        "support_dim": sp.support_dim,
        "trivial": sp.space_dim == 1,
        "identity_residual": sp.identity_residual(),
        "basis": [_matrix_json(sp.embed(b)) for b in sp.basis],
        "commuting": bs.commuting,
        "block_supports": bs.index_supports if bs.commuting else None,
    }
    if bs.commuting:
        ms = projective_oplms(sp, bs)
        payload["projective_measurements"] = [m.labels[0] for m in ms]
    human = (
        f"{s.name}: party {party_letter(party)} OPLM space dim {sp.space_dim} "
        f"(support {sp.support_dim}), " + ("commuting" if bs.commuting else "non-commuting")
    )
    if bs.commuting:
        human += f"; blocks {payload['block_supports']}; measurements {payload.get('projective_measurements')}"
    return 0, payload, human


def cmd_irreducible(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    v = is_locally_irreducible(s)
    payload = {
        "verdict": v.verdict,
        "space_dims": v.space_dims,
        "witness": v.witness.labels if v.witness else None,
        "witness_party": party_letter(v.witness.party) if v.witness else None,
        "candidates_checked": v.candidates_checked,
        "class_note": v.class_note,
    }
    human = f"{s.name}: {v.verdict} (per-party space dims {v.space_dims})"
    if v.witness:
        human += f"; witness {v.witness.labels[0]} on party {party_letter(v.witness.party)}"
    return (0 if v.irreducible else 1), payload, human


def cmd_upb(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    v = check_unextendible(s)
    payload = {
        "verdict": "UNEXTENDIBLE" if v.unextendible else "EXTENDIBLE",
        "support_note": v.support_note,
        "nodes_explored": v.nodes_explored,
    }
    if v.witness is not None:
        payload["extension_witness"] = serialize_qset(
            type(s)(s.space, [v.witness], "extension")
        )
    if args.oracle_restarts:
        res = numeric_extension_search(s, restarts=args.oracle_restarts, seed=args.seed or 0)
        payload["oracle"] = {
            "residual": res.residual,
            "restarts": res.restarts,
            "agrees": (res.residual <= 1e-8) == (not v.unextendible),
        }
    human = f"{s.name}: {payload['verdict']} ({v.support_note})"
    if "oracle" in payload:
        human += f"; oracle residual {payload['oracle']['residual']:.3g} ({'agrees' if payload['oracle']['agrees'] else 'DISAGREES'})"
    return (0 if v.unextendible else 1), payload, human


def _load_protocol(spec: str):
    if spec.startswith("builtin:"):
        return builtin_protocol(spec[len("builtin:") :])
    with open(spec) as fh:
        return tree_from_json(json.load(fh))


def cmd_protocol_verify(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    tree = _load_protocol(args.protocol)
    if args.activation:
        cert = certify_activation_protocol(s, tree)
        payload = cert.to_json()
        ok = cert.verified
        human = f"{s.name}: activation protocol {'CERTIFIED' if ok else 'FAILED'} ({len(cert.leaf_evidence)} leaves)"
        return (0 if ok else 1), payload, human
    vr = verify_protocol(s, tree)
    payload = {"verdict": vr.verdict, "failures": vr.failures, "identified": vr.identified}
    human = f"{s.name}: {vr.verdict}" + ("" if vr.passed else "; " + "; ".join(vr.failures[:3]))
    return (0 if vr.passed else 1), payload, human


def cmd_protocol_search(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    cert = search_distinguishing_protocol(s, max_depth=args.max_depth)
    payload = cert.to_json()
    if args.output and cert.tree is not None:
        with open(args.output, "w") as fh:
            json.dump(tree_to_json(cert.tree), fh, indent=1, sort_keys=True)
    found = cert.kind == "Distinguishability"
    human = (
        f"{s.name}: distinguishing protocol found and verified (depth <= {args.max_depth})"
        if found
        else f"{s.name}: {cert.kind} - {cert.notes}"
    )
    return (0 if found else 1), payload, human


def cmd_activate(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    if args.protocol:
        cert = certify_activation_protocol(s, _load_protocol(args.protocol))
    else:
        cert = activation_search(s, max_depth=args.max_depth)
    payload = cert.to_json()
    ok = cert.kind == "Activation"
    if ok:
        human = f"{s.name}: Activation certificate, {len(cert.leaf_evidence)} leaves all certified locally indistinguishable"
    else:
        human = f"{s.name}: {cert.kind} - {cert.notes or 'no activation found'}"
    return (0 if ok else 1), payload, human


def cmd_profile(args, report):
    s = _load_set(args, report)
    _require_orthogonal(s, _tol(args), args.force)
    prof = hidden_nonlocality_profile(s, max_depth=args.max_depth)
    payload = prof.to_json()
    lines = [f"{s.name}: hidden-nonlocality profile"]
    for r in prof.records:
        lines.append(
            f"  {r.partition}: distinguishable={r.distinguishable} activable={r.activable} "
            f"[{r.basis}, {r.rule}]"
        )
    for k, f in prof.h_flags.items():
        lines.append(f"  H_{k} = {f['value']} [{f['basis']}] {f['evidence']}")
    return 0, payload, "\n".join(lines)


def _parse_overlay(spec: str):
    src, _, path = spec.rpartition(":")
    if not src:
        src, path = spec, ""
    if src == "builtin":  # user wrote builtin:NAME with no path
        src, path = spec, ""
    tree = _load_protocol(src)
    node = tree
    if path:
        for hop in path.split("/"):
            node = node.children[int(hop)]
    if node is None or not hasattr(node, "measurement"):
        raise UsageError("overlay path does not reach a measurement node")
    return node.party, overlay_from_kraus(node.measurement.kraus[0])


def cmd_render(args, report):
    s = _load_set(args, report)
    overlay = _parse_overlay(args.overlay) if args.overlay else None
    text = render(s, fmt=args.format, overlay=overlay)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        return 0, {"written": args.output, "format": args.format}, f"wrote {args.format} to {args.output}"
    return 0, {"format": args.format, "document": text}, text


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qlocc", description=__doc__)
    ap.add_argument("--version", action="version", version=f"qlocc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, with_depth=False):
        p.add_argument("--set", help="input .qset file")
        p.add_argument("--json", action="store_true", help="JSON report on stdout")
        p.add_argument("--tol", type=float, default=None, help="orthogonality tolerance (default 1e-9 or QLOCC_TOL)")
        p.add_argument("--seed", type=int, default=None, help="seed for numeric oracle restarts")
        p.add_argument("--force", action="store_true", help="analyze even if the input fails the orthogonality check")
        if with_depth:
            p.add_argument("--max-depth", type=int, default=8, help="protocol search depth cap")

    p = sub.add_parser("fixture", help="emit a built-in state set as qset text")
    p.add_argument("--name", required=True, choices=FIXTURE_NAMES)
    p.add_argument("--variant", default="corrected", choices=("corrected", "verbatim"))
    p.add_argument("--d", type=int, default=None, help="local dimension for s1_general")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_fixture)

    p = sub.add_parser("check-ortho", help="pairwise orthogonality report")
    common(p)
    p.set_defaults(func=cmd_check_ortho)

    p = sub.add_parser("redundancy", help="local redundancy check (sub-splits honored)")
    common(p)
    p.set_defaults(func=cmd_redundancy)

    p = sub.add_parser("oplm", help="orthogonality-preserving measurement space of one party")
    common(p)
    p.add_argument("--party", type=int, default=None)
    p.add_argument("--on-support", action="store_true", help="compress to the joint local support")
    p.set_defaults(func=cmd_oplm)

    p = sub.add_parser("irreducible", help="local irreducibility verdict")
    common(p)
    p.set_defaults(func=cmd_irreducible)

    p = sub.add_parser("upb", help="unextendibility of an orthogonal product set")
    common(p)
    p.add_argument("--oracle-restarts", type=int, default=0)
    p.set_defaults(func=cmd_upb)

    p = sub.add_parser("protocol", help="verify or search discrimination protocols")
    psub = p.add_subparsers(dest="subcommand", required=True)
    pv = psub.add_parser("verify")
    common(pv)
    pv.add_argument("--protocol", required=True, help="protocol JSON file or builtin:NAME")
    pv.add_argument("--activation", action="store_true", help="verify as an activation protocol")
    pv.set_defaults(func=cmd_protocol_verify)
    ps = psub.add_parser("search")
    common(ps, with_depth=True)
    ps.add_argument("-o", "--output", default=None, help="write the found protocol JSON here")
    ps.set_defaults(func=cmd_protocol_search)

    p = sub.add_parser("activate", help="search for a nonlocality-activation protocol")
    common(p, with_depth=True)
    p.add_argument("--protocol", default=None, help="certify this protocol instead of searching")
    p.set_defaults(func=cmd_activate)

    p = sub.add_parser("profile", help="hidden-nonlocality profile across partitions")
    common(p, with_depth=True)
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("render", help="domino-tiling diagram (ascii or svg)")
    common(p)
    p.add_argument("--format", default="ascii", choices=("ascii", "svg"))
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--overlay", default=None, help="PROTOCOL.json[:path] or builtin:NAME[:path]")
    p.set_defaults(func=cmd_render)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    report = {
        "command": args.command + (f" {args.subcommand}" if getattr(args, "subcommand", None) else ""),
        "tool": {"name": "qlocc", "version": __version__},
        "inputs": {},
        "params": {
            k: v
            for k, v in vars(args).items()
            if k not in ("func", "command", "subcommand", "json") and v is not None
        },
    }
    t0 = time.perf_counter()
    try:
        code, payload, human = args.func(args, report)
    except UsageError as exc:
        print(f"qlocc: error: {exc}", file=sys.stderr)
        return 2
    except QsetError as exc:
        print(f"qlocc: parse error: {exc}", file=sys.stderr)
        return 2
    except NegativeVerdict as exc:
        report["verdicts"] = exc.payload
        report["timings"] = {"seconds": time.perf_counter() - t0}
        if getattr(args, "json", False):
            print(json.dumps(report, indent=2, sort_keys=True))
        else:
            print(exc.text)
        return 1
    except (ValueError, OSError) as exc:
        print(f"qlocc: error: {exc}", file=sys.stderr)
        return 2
    report["verdicts"] = payload
    report["timings"] = {"seconds": time.perf_counter() - t0}
    if getattr(args, "json", False):
        print(json.dumps(report, indent=2, sort_keys=True))
    else:
        print(human)
    return code


if __name__ == "__main__":
    sys.exit(main())
