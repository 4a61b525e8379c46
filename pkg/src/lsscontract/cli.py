"""Command-line interface: ``lsscontract <command> ...``.

Exit status is 0 on success, 2 for malformed input or usage errors and 3
when an operation is refused because a set is unauthorized (or, for
contraction, authorized).
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import access, msp as msp_mod, relocate as relocate_mod, simcloud
from .abe import scheme as abe
from .abe import serialize as abe_io
from .abe.pairing import DebugPairing
from .exceptions import AuthorizedSetError, LssError, UnauthorizedSetError, ValidationError
from .msp import Msp, ShareVector

EXIT_OK, EXIT_INVALID, EXIT_REFUSED = 0, 2, 3

SHARES_FORMAT = "lsscontract.shares/1"
OUTCOME_FORMAT = "lsscontract.relocation/1"

# order of the pairing groups used by default for ABE: a 160-bit prime
ABE_DEFAULT_MODULUS = 2**159 + 162259276829213363391578010288129


# --- file helpers -------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text if text.endswith("\n") else text + "\n")


def _load_msp(path: str) -> Msp:
    return msp_mod.loads(_read(path))


def _load_json(path: str) -> dict:
    text = _read(path)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    text = text.strip().strip("{}")
    if not text:
        return ()
    try:
        return tuple(int(x) for x in text.replace(" ", "").split(","))
    except ValueError:
        raise ValidationError(f"expected comma-separated integers, got {text!r}") from None


def _name_list(text: str) -> tuple[str, ...]:
    return tuple(x for x in (s.strip() for s in text.strip().strip("{}").split(",")) if x)


def shares_to_dict(sv: ShareVector, p: int, randomness: Sequence[int] = ()) -> dict:
    return {
        "format": SHARES_FORMAT,
        "modulus": p,
        "psi": list(sv.psi),
        "values": list(sv.values),
        "randomness": list(randomness),
    }


def shares_from_dict(data: dict) -> ShareVector:
    try:
        if data.get("format") != SHARES_FORMAT:
            raise ValidationError(f"not a shares document: format {data.get('format')!r}")
        return ShareVector(tuple(int(x) for x in data["values"]), tuple(int(x) for x in data["psi"]))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed shares document: {exc!r}") from exc


def outcome_to_dict(out: relocate_mod.RelocationOutcome) -> dict:
    return {
        "format": OUTCOME_FORMAT,
        "method": out.method,
        "removed": sorted(out.removed),
        "reindex": list(out.reindex),
        "scheme": msp_mod.msp_to_dict(out.scheme),
        "values": list(out.values),
        "public_rows": out.public.tolist(),
        "public_values": list(out.public_values),
        "servers": {str(k): list(v) for k, v in out.servers.items()},
    }


def _require_seed(args) -> int:
    if args.seed is None:
        raise ValidationError(f"{args.command}: --seed is required")
    return args.seed


# --- secret sharing commands ---------------------------------------------------


def cmd_share(args) -> int:
    m = _load_msp(args.msp)
    if not 0 <= args.secret < m.p:
        raise ValidationError(f"secret must lie in [0, {m.p})")
    if args.randomness is not None:
        sv, tail = msp_mod.share(m, args.secret, randomness=_int_list(args.randomness))
    else:
        sv, tail = msp_mod.share(m, args.secret, rng=random.Random(_require_seed(args)))
    _emit(json.dumps(shares_to_dict(sv, m.p, tail), indent=2), args.out)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    m = _load_msp(args.msp)
    sv = shares_from_dict(_load_json(args.shares))
    q = _int_list(args.q) if args.q else range(1, m.n + 1)
    print(msp_mod.reconstruct(m, q, sv))
    return EXIT_OK


def cmd_contract(args) -> int:
    m = _load_msp(args.msp)
    c = msp_mod.contract(m, _int_list(args.q))
    if c.k is not None:
        print(f"# k = {c.k + 1} (1-based column)", file=sys.stderr)
    else:
        print(f"# W = {[w + 1 for w in c.W]} (1-based rows)", file=sys.stderr)
        print(f"# K = {[k + 1 for k in c.K]} (1-based columns)", file=sys.stderr)
        print(f"# U^-1 = {c.U_inverse.tolist()}", file=sys.stderr)
    print(f"# reindex (new -> original) = {list(c.reindex)}", file=sys.stderr)
    _emit(msp_mod.dumps(c.msp), args.out)
    return EXIT_OK


def cmd_relocate(args) -> int:
    m = _load_msp(args.msp)
    sv = shares_from_dict(_load_json(args.shares))
    gamma = access.parse_structure(args.structure) if args.structure else None
    out = relocate_mod.relocate(args.method, m, _int_list(args.q), sv, gamma)
    doc = outcome_to_dict(out)
    met = relocate_mod.metrics(out, args.share_bits, args.z)
    doc["metrics"] = {"L_bits": met.total_bits, "L_MiB": round(met.total_mib, 4), "rho": str(met.rho)}
    _emit(json.dumps(doc, indent=2), args.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = simcloud.load_scenario(_read(args.scenario))
    if args.seed is not None:
        sc = simcloud.Scenario(**{**sc.__dict__, "seed": args.seed})
    report = simcloud.run(sc)
    text = report.to_csv()
    if args.format == "table":
        text = _as_table(text)
    _emit(text, args.out)
    return EXIT_OK


def _as_table(csv_text: str) -> str:
    import csv as _csv

    rows = list(_csv.reader(csv_text.splitlines()))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows) + "\n"


def cmd_bench(args) -> int:
    if args.mode == "material":
        _require_seed(args)
    methods = _name_list(args.methods) if args.methods else simcloud.FIG1_METHOD_ORDER
    rows = simcloud.sweep_fig1(
        n=args.n, t=args.t, share_bits=args.share_bits, z=args.z,
        p=args.modulus or simcloud.DEFAULT_PRIME, seed=args.seed or 0, mode=args.mode, methods=methods,
    )
    if args.format == "plot-data":
        text = simcloud.sweep_to_gnuplot(rows)
    elif args.format == "table":
        text = _as_table(simcloud.sweep_to_csv(rows))
    else:
        text = simcloud.sweep_to_csv(rows)
    _emit(text, args.out)
    return EXIT_OK


# --- ABE commands ----------------------------------------------------------------


def _abe_load(path: str, kind):
    obj = abe_io.loads(_read(path))
    if not isinstance(obj, kind):
        raise ValidationError(f"{path} does not hold a {kind.__name__}")
    return obj


def cmd_abe_setup(args) -> int:
    rng = random.Random(_require_seed(args))
    backend = DebugPairing(args.modulus or ABE_DEFAULT_MODULUS)
    universe = _name_list(args.attributes)
    pk, msk = abe.setup(backend, universe, rng)
    Path(args.pk).write_text(abe_io.dumps(pk) + "\n")
    Path(args.msk).write_text(abe_io.dumps(msk, backend) + "\n")
    return EXIT_OK


def cmd_abe_keygen(args) -> int:
    pk = _abe_load(args.pk, abe.PublicKey)
    msk = _abe_load(args.msk, abe.MasterKey)
    sk = abe.keygen(pk, msk, _name_list(args.attributes), random.Random(_require_seed(args)))
    _emit(abe_io.dumps(sk), args.out)
    return EXIT_OK


def _policy_msp(args, pk: abe.PublicKey) -> tuple[Msp, tuple[str, ...]]:
    policy = _name_list(args.policy)
    p = pk.backend.order
    if args.msp:
        m = _load_msp(args.msp)
    elif args.threshold:
        m = msp_mod.shamir(args.threshold, len(policy), p)
    else:
        raise ValidationError("encrypt needs --msp or --threshold")
    return m, policy


def cmd_abe_encrypt(args) -> int:
    pk = _abe_load(args.pk, abe.PublicKey)
    rng = random.Random(_require_seed(args))
    m, policy = _policy_msp(args, pk)
    message = pk.backend.gt_from_json(str(args.message))
    ct, ck = abe.encrypt_star(pk, message, m, policy, rng)
    if args.explicit_ck:
        ck = ck.explicit()
    Path(args.ck_out).write_text(abe_io.dumps(ck) + "\n")
    _emit(abe_io.dumps(ct), args.out)
    return EXIT_OK


def cmd_abe_restrict_ck(args) -> int:
    ck = _abe_load(args.ck, abe.ContractionKey)
    ct = _abe_load(args.ct, abe.Ciphertext)
    _emit(abe_io.dumps(ck.restrict(ct, _name_list(args.q))), args.out)
    return EXIT_OK


def cmd_abe_contract_sct(args) -> int:
    pk = _abe_load(args.pk, abe.PublicKey)
    ct = _abe_load(args.ct, abe.Ciphertext)
    ckq = _abe_load(args.ck, abe.RestrictedKey)
    _emit(abe_io.dumps(abe.contract_sct(pk, ct, _name_list(args.q), ckq)), args.out)
    return EXIT_OK


def cmd_abe_contract_ect(args) -> int:
    ct = _abe_load(args.ct, abe.Ciphertext)
    ckq = _abe_load(args.ck, abe.RestrictedKey)
    _emit(abe_io.dumps(abe.contract_ect(ct, _name_list(args.q), ckq)), args.out)
    return EXIT_OK


def cmd_abe_contract_re(args) -> int:
    pk = _abe_load(args.pk, abe.PublicKey)
    sk = _abe_load(args.sk, abe.SecretKey)
    ct = _abe_load(args.ct, abe.Ciphertext)
    new_ct, ck = abe.contract_re(pk, sk, ct, _name_list(args.q), random.Random(_require_seed(args)))
    Path(args.ck_out).write_text(abe_io.dumps(ck) + "\n")
    _emit(abe_io.dumps(new_ct), args.out)
    return EXIT_OK


def cmd_abe_decrypt(args) -> int:
    sk = _abe_load(args.sk, abe.SecretKey)
    ct = _abe_load(args.ct, abe.Ciphertext)
    pk = _abe_load(args.pk, abe.PublicKey) if args.pk else None
    print(ct.backend.gt_to_json(abe.decrypt(sk, ct, pk)))
    return EXIT_OK


def cmd_abe_size(args) -> int:
    size = abe.ciphertext_size(_abe_load(args.ct, abe.Ciphertext))
    print("target,source,matrix_scalars,map_entries,ck_scalars,total")
    print(f"{size.target},{size.source},{size.matrix_scalars},{size.map_entries},{size.ck_scalars},{size.total}")
    return EXIT_OK


# --- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsscontract", description="Contraction of access structures for linear secret sharing.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        p.add_argument("--out", "-o", help="output file (default: stdout)")
        return p

    p = add("share", cmd_share, "share a secret with an MSP")
    p.add_argument("--msp", required=True)
    p.add_argument("--secret", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--randomness", help="explicit v_2..v_d instead of seeded sampling")

    p = add("reconstruct", cmd_reconstruct, "reconstruct a secret from a shares file")
    p.add_argument("--msp", required=True)
    p.add_argument("--shares", required=True)
    p.add_argument("--q", help="participants pooling their shares (default: all)")

    p = add("contract", cmd_contract, "contract an ideal MSP at an unauthorized set")
    p.add_argument("--msp", required=True)
    p.add_argument("--q", required=True, help="removed participants, e.g. 1,5,9")

    p = add("relocate", cmd_relocate, "relocate shares after removing servers")
    p.add_argument("--msp", required=True)
    p.add_argument("--shares", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--method", choices=relocate_mod.METHODS, default="lc")
    p.add_argument("--structure", help="access structure text for cs, e.g. 'n=4; basis={1,2},{3,4}'")
    p.add_argument("--share-bits", type=int, default=16)
    p.add_argument("--z", type=int, default=1)

    p = add("simulate", cmd_simulate, "replay a storage scenario")
    p.add_argument("--scenario", required=True)
    p.add_argument("--seed", type=int, help="override the scenario seed")
    p.add_argument("--format", choices=("csv", "table"), default="csv")

    p = add("bench", cmd_bench, "storage / information-rate sweep over m")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--t", type=int, default=8)
    p.add_argument("--share-bits", type=int, default=16)
    p.add_argument("--z", type=int, default=10**6)
    p.add_argument("--modulus", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("analytic", "material"), default="analytic")
    p.add_argument("--methods", help="comma-separated subset of lc,ps,is,cs")
    p.add_argument("--format", choices=("csv", "table", "plot-data"), default="csv")

    abe_parser = sub.add_parser("abe", help="CP-ABE with contraction (debug pairing)")
    abe_sub = abe_parser.add_subparsers(dest="abe_command", required=True)

    def add_abe(name, func, help_):
        p = abe_sub.add_parser(name, help=help_)
        p.set_defaults(func=func, command=f"abe {name}")
        p.add_argument("--out", "-o", help="output file (default: stdout)")
        return p

    p = add_abe("setup", cmd_abe_setup, "generate PK and MSK")
    p.add_argument("--attributes", required=True, help="attribute universe, comma-separated")
    p.add_argument("--modulus", type=int, help="group order (default: 160-bit prime)")
    p.add_argument("--seed", type=int)
    p.add_argument("--pk", required=True)
    p.add_argument("--msk", required=True)

    p = add_abe("keygen", cmd_abe_keygen, "issue a user key")
    p.add_argument("--pk", required=True)
    p.add_argument("--msk", required=True)
    p.add_argument("--attributes", required=True)
    p.add_argument("--seed", type=int)

    p = add_abe("encrypt", cmd_abe_encrypt, "encrypt and emit the contraction key")
    p.add_argument("--pk", required=True)
    p.add_argument("--policy", required=True, help="attribute of each MSP participant, in order")
    p.add_argument("--msp")
    p.add_argument("--threshold", type=int, help="use Shamir's scheme with this threshold")
    p.add_argument("--message", type=int, required=True, help="target-group element (debug: exponent)")
    p.add_argument("--seed", type=int)
    p.add_argument("--ck-out", required=True)
    p.add_argument("--explicit-ck", action="store_true", help="store r_i values rather than the PRF seed")

    p = add_abe("restrict-ck", cmd_abe_restrict_ck, "restrict a contraction key to Q")
    p.add_argument("--ck", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--q", required=True)

    p = add_abe("contract-sct", cmd_abe_contract_sct, "shorten the ciphertext")
    p.add_argument("--pk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--ck", required=True, help="contraction key restricted to Q")

    p = add_abe("contract-ect", cmd_abe_contract_ect, "extend the ciphertext with CK_Q")
    p.add_argument("--ct", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--ck", required=True, help="contraction key restricted to Q")

    p = add_abe("contract-re", cmd_abe_contract_re, "decrypt and re-encrypt for the contracted policy")
    p.add_argument("--pk", required=True)
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--q", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--ck-out", required=True)

    p = add_abe("decrypt", cmd_abe_decrypt, "decrypt a ciphertext")
    p.add_argument("--sk", required=True)
    p.add_argument("--ct", required=True)
    p.add_argument("--pk", help="needed for ciphertexts extended by contract-ect")

    p = add_abe("size", cmd_abe_size, "ciphertext size in element counts")
    p.add_argument("--ct", required=True)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UnauthorizedSetError, AuthorizedSetError) as exc:
        print(f"lsscontract: error: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (LssError, ValueError) as exc:
        print(f"lsscontract: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
