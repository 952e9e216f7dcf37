"""Command-line interface. Every command writes JSON-lines records.

Exit codes: 0 success, 1 validation or input error, 2 capacity exceeded,
3 a ``verify`` check failed.
"""
import argparse
import json
import math
import sys
import time

import numpy as np

from scpsim import backends, bits, boolfn, circuit, commuting, defaults, oracle, sim, verify
from scpsim.errors import CapacityError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_CAPACITY, EXIT_VERIFY = 0, 1, 2, 3


def _encode(obj):
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v) or math.isinf(v):
            return json.dumps(None)
        text = format(v, f".{defaults.FLOAT_DIGITS}g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    if obj is None or isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps(record):
    """One JSON line; floats carry 17 significant digits so they round-trip."""
    return _encode(record)


class _Emitter:
    def __init__(self, path):
        self.path = path
        self.stream = open(path, "a", encoding="utf-8") if path else sys.stdout

    def __call__(self, record):
        self.stream.write(dumps(record) + "\n")
        self.stream.flush()

    def close(self):
        if self.path:
            self.stream.close()


def _read(path, what):
    if not path:
        raise ValidationError(f"--{what} is required")
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ValidationError(f"cannot read {what} file {path}: {exc.strerror}") from None


def _circuit(args):
    return circuit.parse_circuit(_read(args.circuit, "circuit"))


def _function(args):
    return boolfn.parse_function(_read(args.fn, "fn"))


def cmd_sim(args, emit):
    c, f = _circuit(args), _function(args)
    budget = sim.AccuracyBudget.for_function(f, args.p_target, args.delta, args.schedule)
    res = sim.simulate(c, f, args.backend, budget, args.seed)
    emit({"command": "sim", **res.to_record()})
    if args.audit:
        emit({"command": "audit", **sim.error_budget_audit(c, f, budget, args.seed, args.backend)})


def cmd_expect(args, emit):
    c = _circuit(args)
    if args.s is None:
        raise ValidationError("--s is required")
    mask = circuit.PauliZMask.parse(args.s, c.m)
    backend = backends.auto_backend(c) if args.backend == "auto" else args.backend
    est = backends.backend_expectation(c, mask, args.epsilon, args.delta, args.seed, backend)
    emit({"command": "expect", "s": str(mask), "value": est.value, "backend": backend,
          "samples": est.samples, "path": est.path})


def cmd_km(args, emit):
    f = _function(args)
    g = boolfn.lift_to_signed(f)
    theta = args.theta or sim.AccuracyBudget.for_function(f, args.p_target, args.delta).theta
    exact = {"auto": "auto", "yes": True, "no": False}[args.exact]
    L = boolfn.km_significant_set(g, boolfn.KMParams(theta, args.delta), args.seed, exact=exact)
    emit({"command": "km", "m": f.m, "theta": theta, "delta": args.delta,
          "L_tilde": [bits.to_bits(s, f.m) for s in sorted(L)]})


def cmd_wht(args, emit):
    f = _function(args)
    spec = boolfn.wht_spectrum(f)
    emit({"command": "wht", "m": f.m, "spectrum": spec.as_bits(), "sparsity": spec.sparsity,
          "degree": boolfn.degree(spec)})


def _build(args):
    n, m = args.n, args.m or args.n
    size = args.size if args.size is not None else 2 * n
    if args.family == "iqp":
        return circuit.random_iqp(n, m, size, args.seed)
    if args.family == "clifford_magic":
        return circuit.random_clifford_magic(n, m, size, args.seed)
    if args.family == "simon_type":
        gen = np.random.default_rng(args.seed)
        Q = [q for q in range(n) if gen.random() < 0.5]
        R = [q for q in range(n) if gen.random() < 0.5]
        return circuit.build_simon_type(n, m, Q, R, circuit.random_diagonal_gates(n, size, gen))
    if args.family == "constant_depth":
        return circuit.build_random_constant_depth(n, m, args.depth, args.seed)
    return circuit.random_circuit(n, m, size, args.seed)


def cmd_build(args, emit):
    if args.n is None:
        raise ValidationError("--n is required")
    c = _build(args)
    text = c.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        sys.stdout.write(dumps({"command": "build", "path": args.out, "family": c.family, "n": c.n,
                                "m": c.m, "size": c.size, "depth": circuit.depth(c)}) + "\n")
    else:
        sys.stdout.write(text)


def cmd_commuting(args, emit):
    c, f = _circuit(args), _function(args)
    if f.m != c.m:
        c = sim._measured(c, f)
    for rec in commuting.reports_for_function(c, f):
        emit({"command": "commuting", **rec})


def cmd_oracle(args, emit):
    c = _circuit(args)
    dist = oracle.output_distribution(c)
    rec = {"command": "oracle", "n": c.n, "m": c.m,
           "distribution": {bits.to_bits(x, c.m): float(p) for x, p in enumerate(dist.probs)
                            if p > defaults.ZERO_CUTOFF}}
    if args.fn:
        f = _function(args)
        rec["acceptance_probability"] = oracle.acceptance_probability_exact(
            oracle.output_distribution(sim._measured(c, f)), f)
    emit(rec)


def cmd_verify(args, emit):
    only = {int(x) for x in args.only.split(",")} if args.only else None
    failed = 0
    for res in verify.run_all(args.scale, only):
        emit({"command": "verify", **res.to_record()})
        print(res.line(), file=sys.stderr)
        failed += not res.passed
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {"sim": cmd_sim, "expect": cmd_expect, "km": cmd_km, "wht": cmd_wht, "build": cmd_build,
            "commuting": cmd_commuting, "oracle": cmd_oracle, "verify": cmd_verify}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--circuit", help="circuit file")
    common.add_argument("--fn", help="Boolean function file")
    common.add_argument("--backend", default="auto", choices=("auto",) + backends.BACKENDS)
    common.add_argument("--p-target", type=int, default=defaults.DEFAULT_P_TARGET)
    common.add_argument("--delta", type=float, default=defaults.DEFAULT_DELTA)
    common.add_argument("--seed", type=int, default=defaults.DEFAULT_SEED)
    common.add_argument("--out", help="append records here instead of stdout (build: circuit file)")
    common.add_argument("--audit", action="store_true", help="sim: add an exact error-budget record")

    parser = argparse.ArgumentParser(prog="scpsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("sim", parents=[common], help="estimate the acceptance probability")
    p.add_argument("--schedule", default="tight", choices=sim.SCHEDULES)
    p = sub.add_parser("expect", parents=[common], help="one Pauli-Z expectation")
    p.add_argument("--s", help="m-bit Z mask")
    p.add_argument("--epsilon", type=float, default=0.01)
    p = sub.add_parser("km", parents=[common], help="significant Fourier coefficients of (-1)^f")
    p.add_argument("--theta", type=float, default=0, help="default: 3 p_target q_L")
    p.add_argument("--exact", default="auto", choices=("auto", "yes", "no"))
    sub.add_parser("wht", parents=[common], help="full Fourier spectrum of f")
    p = sub.add_parser("build", parents=[common], help="write a random circuit file")
    p.add_argument("--family", default="iqp",
                   choices=("iqp", "simon_type", "clifford_magic", "constant_depth", "random"))
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--size", type=int)
    p.add_argument("--depth", type=int, default=2)
    sub.add_parser("commuting", parents=[common], help="commuting-circuit resource report per s")
    sub.add_parser("oracle", parents=[common], help="exact output distribution")
    p = sub.add_parser("verify", parents=[common], help="run the acceptance checks")
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the full trial counts")
    p.add_argument("--only", help="comma-separated check numbers")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    emit = _Emitter(args.out if args.command != "build" else None)
    t0 = time.perf_counter()
    try:
        code = COMMANDS[args.command](args, emit) or EXIT_OK
    except CapacityError as exc:
        print(f"scpsim: capacity exceeded: {exc}", file=sys.stderr)
        code = EXIT_CAPACITY
    except ValidationError as exc:
        print(f"scpsim: {exc}", file=sys.stderr)
        code = EXIT_INVALID
    finally:
        emit.close()
    if code == EXIT_OK and args.command == "verify":
        print(f"scpsim: all checks passed in {time.perf_counter() - t0:.1f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
