"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 data or validation error.  Every run
prints its resolved configuration as one JSON line on standard error.  Output
files are written to a temporary name and renamed into place.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from .channels import BEC_ERASURE, ChannelDescriptor, ChannelValidationError
from .construction import (
    CodeSpec,
    ConstructionError,
    construct_polar,
    construct_rm,
    require_channel,
)
from .decoder import ObservationError, SCDecoder, _llr_table
from .gf2 import (
    BitVector,
    InvalidLengthError,
    bits_to_bytes,
    encode_array,
    read_bits_binary,
    read_bits_text,
)
from .simulate import (
    polarization_stats,
    rate_reliability_curve,
    rm_vs_polar,
    run_bler,
    scaling_probe,
    write_bler_csv,
    write_scaling_csv,
)
from .synthesis import ResourceLimitError, UnsupportedChannelError, bec_profile

EPILOG = """\
formats
  channel     bec:<eps> | bsc:<p> | table:<path.json>, where the JSON file is
              {"p0": [W(y|0) ...], "p1": [W(y|1) ...]}
  code file   JSON written by `construct`, e.g.
              {"version":1,"N":8,"K":4,"channel":"bec:0.5","method":"exact-bec",
               "info_set":[4,6,7,8],"frozen_values":"0000","z_hat":[...],
               "samples":null,"seed":null}   (info_set is 1-based)
  bits        text: one block per line of '0'/'1' characters, e.g. 0110
              binary: per block a little-endian u64 bit count then the bits
              packed MSB first
  symbols     one block per line, space-separated integer output ids, e.g.
              "0 1 2 0".  For bec channels 0 and 1 are received bits and
              2 is an erasure.  Table channels use their column indices.
  CSV         polarize: index,z,i   curve: eta,R,B,L
              simulate: trials,errors,bler,stderr,bound_sum
              compare-rm: code,trials,errors,bler,stderr,bound_sum
              bench: N,encode_ns_per_block,decode_ns_per_block,evaluations

example
  polarkit construct --channel bec:0.5 --n 3 --k 4 --out code.json
  polarkit encode --code code.json --in msg.bits --out cw.bits
  polarkit decode --code code.json --in rx.syms --out msg.bits
  polarkit simulate --code code.json --trials 10000 --seed 1 --out bler.csv
  polarkit curve --code code.json --eta-grid 0:1:101 --out curve.csv
"""


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _atomic_write(path: str, data: str | bytes) -> None:
    target = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=target.parent or ".", prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _text(writer) -> str:
    buf = io.StringIO()
    writer(buf)
    return buf.getvalue()


def _eta_grid(text: str) -> np.ndarray:
    """``lo:hi:count`` (inclusive, evenly spaced) or a comma list."""
    parts = text.split(":")
    try:
        if len(parts) == 3:
            return np.linspace(float(parts[0]), float(parts[1]), int(parts[2]))
        return np.array([float(v) for v in text.split(",")])
    except ValueError:
        raise UsageError(f"bad eta grid {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"bad integer list {text!r}") from None


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be in [0, 2^64)")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="polarkit",
        description="Polar code construction, encoding, SC decoding and simulation.",
        epilog=EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_text):
        return sub.add_parser(name, help=help_text, description=help_text, epilog=EPILOG,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    c = cmd("construct", "choose an information set and write a code file")
    c.add_argument("--channel", required=True)
    c.add_argument("--n", type=int, required=True, help="block length exponent, N = 2^n")
    c.add_argument("--k", type=int, required=True, help="number of information bits")
    c.add_argument("--method", default=None,
                   choices=["exact-bec", "exact-table", "monte-carlo", "rm"],
                   help="default: exact-bec for bec channels, otherwise monte-carlo")
    c.add_argument("--samples", type=int, default=100000, help="Monte-Carlo sample count")
    c.add_argument("--seed", type=_seed, default=None)
    c.add_argument("--frozen-seed", type=_seed, default=None,
                   help="draw the frozen bits from this seed instead of zeros")
    c.add_argument("--threads", type=int, default=1)
    c.add_argument("--out", required=True)

    e = cmd("encode", "encode message blocks (K bits each) into codewords (N bits each)")
    e.add_argument("--code", required=True)
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--format", choices=["text", "binary"], default="text")

    d = cmd("decode", "SC-decode channel symbol blocks into message blocks")
    d.add_argument("--code", required=True)
    d.add_argument("--in", dest="inp", required=True)
    d.add_argument("--out", required=True)
    d.add_argument("--format", choices=["text", "binary"], default="text")

    s = cmd("simulate", "estimate the block error rate of a code file")
    s.add_argument("--code", required=True)
    s.add_argument("--trials", type=int, required=True)
    s.add_argument("--seed", type=_seed, required=True)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--hist", default=None, help="also write index,first_errors,events CSV")
    s.add_argument("--out", required=True)

    z = cmd("polarize", "write the per-index Z and I of an erasure channel")
    z.add_argument("--channel", required=True)
    z.add_argument("--n", type=int, required=True)
    z.add_argument("--delta", type=float, default=None,
                   help="also report the polarized fractions on stderr")
    z.add_argument("--out", required=True)

    v = cmd("curve", "rate, bound sum and worst Z against the threshold eta")
    src = v.add_mutually_exclusive_group(required=True)
    src.add_argument("--code", help="take the reliability profile from a code file")
    src.add_argument("--channel", help="exact erasure profile; needs --n")
    v.add_argument("--n", type=int, default=None)
    v.add_argument("--eta-grid", default="0:1:101", help="lo:hi:count or comma list")
    v.add_argument("--out", required=True)

    r = cmd("compare-rm", "polar versus RM code on the same erasure channel noise")
    r.add_argument("--channel", required=True)
    r.add_argument("--n", type=int, required=True)
    r.add_argument("--k", type=int, required=True)
    r.add_argument("--trials", type=int, required=True)
    r.add_argument("--seed", type=_seed, required=True)
    r.add_argument("--threads", type=int, default=1)
    r.add_argument("--out", required=True)

    b = cmd("bench", "median encode and decode time per block")
    b.add_argument("--channel", required=True)
    b.add_argument("--n-list", default="10,12,14")
    b.add_argument("--trials", type=int, default=5)
    b.add_argument("--seed", type=_seed, default=0)
    b.add_argument("--out", required=True)
    return p


# --- commands -----------------------------------------------------------------


def _positive(name: str, value: int) -> None:
    if value < 1:
        raise UsageError(f"--{name} must be positive")


def _channel(text: str) -> ChannelDescriptor:
    return ChannelDescriptor.parse(text)


def do_construct(a) -> dict:
    ch = _channel(a.channel)
    _positive("threads", a.threads)
    N = 1 << a.n
    method = a.method
    if method == "monte-carlo":
        _positive("samples", a.samples)
        if a.seed is None:
            raise UsageError("monte-carlo construction needs --seed")
    if method == "rm":
        code = construct_rm(N, a.k, ch)
    else:
        code = construct_polar(ch, N, a.k, method, samples=a.samples, seed=a.seed,
                               frozen_seed=a.frozen_seed, threads=a.threads)
    _atomic_write(a.out, code.to_json())
    return {"method": method}


def _read_bits(path: str, fmt: str) -> list[BitVector]:
    if fmt == "binary":
        with open(path, "rb") as fh:
            return read_bits_binary(fh)
    with open(path) as fh:
        return read_bits_text(fh)


def _write_bits(path: str, fmt: str, rows: np.ndarray) -> None:
    vecs = [BitVector(r) for r in rows]
    if fmt == "binary":
        _atomic_write(path, bits_to_bytes(vecs))
    else:
        _atomic_write(path, "".join(v.to_str() + "\n" for v in vecs))


def do_encode(a) -> dict:
    code = CodeSpec.load(a.code)
    if code.K == 0:
        raise ValueError("code has no information bits to encode")
    msgs = _read_bits(a.inp, a.format)
    for k, m in enumerate(msgs, 1):
        if len(m) != code.K:
            raise ValueError(f"block {k}: {len(m)} bits, expected K={code.K}")
    if not msgs:
        _atomic_write(a.out, b"" if a.format == "binary" else "")
        return {"blocks": 0}
    x = encode_array(code.assemble(np.stack([m.bits for m in msgs])))
    _write_bits(a.out, a.format, x)
    return {"blocks": len(msgs)}


def read_symbols(path: str, ch: ChannelDescriptor, N: int) -> np.ndarray:
    """Parse a symbol file into internal output ids, one row per block."""
    y_count = ch.materialize().y_count
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                vals = [int(v) for v in line.split()]
            except ValueError:
                raise ObservationError(f"line {lineno}: symbols must be integers") from None
            if len(vals) != N:
                raise ObservationError(f"line {lineno}: {len(vals)} symbols, expected N={N}")
            arr = np.array(vals, dtype=np.int64)
            if arr.min() < 0 or arr.max() >= y_count:
                raise ObservationError(f"line {lineno}: symbol outside 0..{y_count - 1}")
            if ch.is_bec:
                # file: 0, 1 received bits, 2 erasure; internal: 0, erasure, 1
                arr = np.array([0, 2, BEC_ERASURE])[arr]
            rows.append(arr)
    return np.array(rows, dtype=np.int64).reshape(-1, N)


def do_decode(a) -> dict:
    code = CodeSpec.load(a.code)
    ch = require_channel(code)
    if code.K == 0:
        raise ValueError("code has no information bits to decode")
    y = read_symbols(a.inp, ch, code.N)
    if y.shape[0] == 0:
        _atomic_write(a.out, b"" if a.format == "binary" else "")
        return {"blocks": 0}
    obs = _llr_table(ch.materialize())[y]
    u_hat, _, _ = SCDecoder(code).decode_batch(obs)
    _write_bits(a.out, a.format, u_hat[:, code.info_set])
    return {"blocks": int(y.shape[0])}


def do_simulate(a) -> dict:
    _positive("trials", a.trials)
    _positive("threads", a.threads)
    code = CodeSpec.load(a.code)
    rep = run_bler(code, a.trials, a.seed, a.threads)
    _atomic_write(a.out, _text(lambda fh: write_bler_csv([rep], fh)))
    if a.hist:
        lines = ["index,first_errors,events\n"]
        lines += [f"{i + 1},{h},{e}\n" for i, (h, e) in enumerate(zip(rep.first_error_hist, rep.event_hist))]
        _atomic_write(a.hist, "".join(lines))
    return {"bler": rep.bler, "block_errors": rep.block_errors}


def _bec_eps(text: str) -> float:
    ch = _channel(text)
    if not ch.is_bec:
        raise UnsupportedChannelError("this command needs a bec:<eps> channel")
    return ch.param


def do_polarize(a) -> dict:
    eps = _bec_eps(a.channel)
    prof = bec_profile(eps, a.n)
    _atomic_write(a.out, _text(prof.write_csv))
    if a.delta is not None:
        high, low = polarization_stats(eps, a.n, a.delta)
        return {"frac_high": high, "frac_low": low}
    return {}


def do_curve(a) -> dict:
    grid = _eta_grid(a.eta_grid)
    if a.code:
        code = CodeSpec.load(a.code)
        if code.profile is None:
            raise ValueError("code file carries no reliability profile")
        z = code.profile.z_hat
    else:
        if a.n is None:
            raise UsageError("--channel needs --n")
        z = bec_profile(_bec_eps(a.channel), a.n).z
    curve = rate_reliability_curve(z, grid)
    _atomic_write(a.out, _text(curve.write_csv))
    return {"points": len(curve.points)}


def do_compare_rm(a) -> dict:
    _positive("trials", a.trials)
    _positive("threads", a.threads)
    eps = _bec_eps(a.channel)
    polar_rep, rm_rep, polar, rm = rm_vs_polar(eps, a.n, a.k, a.trials, a.seed, a.threads)
    _atomic_write(a.out, _text(lambda fh: write_bler_csv([polar_rep, rm_rep], fh, ["polar", "rm"])))
    return {"same_set": bool(np.array_equal(polar.info_set, rm.info_set))}


def do_bench(a) -> dict:
    _positive("trials", a.trials)
    rows = scaling_probe(_channel(a.channel), _int_list(a.n_list), a.trials, a.seed)
    _atomic_write(a.out, _text(lambda fh: write_scaling_csv(rows, fh)))
    return {}


COMMANDS = {
    "construct": do_construct,
    "encode": do_encode,
    "decode": do_decode,
    "simulate": do_simulate,
    "polarize": do_polarize,
    "curve": do_curve,
    "compare-rm": do_compare_rm,
    "bench": do_bench,
}

DATA_ERRORS = (
    ChannelValidationError,
    ConstructionError,
    InvalidLengthError,
    ObservationError,
    ResourceLimitError,
    UnsupportedChannelError,
    OSError,
    ValueError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"polarkit: usage error: {exc}", file=sys.stderr)
        return 1
    for name in ("n", "k"):
        if getattr(args, name, None) is not None and getattr(args, name) < 0:
            print(f"polarkit: usage error: --{name} must be non-negative", file=sys.stderr)
            return 1
    if args.command == "construct" and args.method is None:
        args.method = "exact-bec" if args.channel.startswith("bec:") else "monte-carlo"
    print(json.dumps(vars(args), sort_keys=True), file=sys.stderr)
    try:
        extra = COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"polarkit: usage error: {exc}", file=sys.stderr)
        return 1
    except DATA_ERRORS as exc:
        print(f"polarkit: error: {exc}", file=sys.stderr)
        return 2
    if extra:
        print(json.dumps(extra, sort_keys=True), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
