"""Command-line front end.

Every command writes one JSON report (stdout or ``--out``) that records the
seed and tolerances.  Exit codes: 0 for a true verdict or a finished
construction, 1 for a false verdict, 2 for bad input.
"""
from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field

from . import gallery as gal
from . import io
from .algebra import AlgebraError
from .channel import ChannelError, complement, depolarizing, minimal_stinespring
from .numerics import DEFAULT_TOL, Tolerances
from .privacy import PrivacyError, check_eps_bound, is_correctable, is_private
from .symplectic import (
    SymplecticError,
    a2_channel,
    private_weyl_subalgebra,
    purification_check,
    verify_a2_recovery,
)

COMMANDS = ("analyze", "complement", "check-private", "check-correctable", "recovery",
            "eps-bound", "symplectic", "gallery")


class InputError(Exception):
    """Raised for anything that should map to exit code 2."""


@dataclass
class RunConfig:
    command: str
    channel: str | None = None
    algebra: str | None = None
    projection: str | None = None
    noise: str | None = None
    t: float | None = None
    n0: float = 0.0
    verify_recovery: bool = False
    target: str | None = None
    params: dict = field(default_factory=dict)
    seed: int = 0
    tol: Tolerances = DEFAULT_TOL
    out: str | None = None


def _r(x: float | None) -> float | None:
    return None if x is None else io._clean(float(x))


def _rmat(m) -> list:
    return [[_r(v) for v in row] for row in m]


def _base(cfg: RunConfig) -> dict:
    return {"command": cfg.command, "seed": cfg.seed,
            "tolerances": {"rank_tol": cfg.tol.rank_tol, "membership_tol": cfg.tol.membership_tol,
                           "eq_tol": cfg.tol.eq_tol, "sdp_tol": cfg.tol.sdp_tol}}


def _report(cfg: RunConfig, verdict, residual=None, witness=None, recovery=None,
            epsilon=None, achieved=None, bound=None, **extra) -> dict:
    rep = _base(cfg)
    rep.update({"verdict": verdict, "residual": _r(residual), "witness_index": witness,
                "recovery": None if recovery is None else io.encode_channel(recovery),
                "epsilon": _r(epsilon), "achieved": _r(achieved), "bound": _r(bound)})
    rep.update(extra)
    return rep


def _need(value: str | None, flag: str, cfg: RunConfig) -> str:
    if value is None:
        raise InputError(f"{cfg.command}: {flag} is required")
    return value


def _load_inputs(cfg: RunConfig, need_algebra: bool = True):
    chan = io.decode_channel(io.load_json(_need(cfg.channel, "--channel", cfg), "--channel"), cfg.tol)
    alg = None
    if need_algebra:
        alg = io.decode_algebra(io.load_json(_need(cfg.algebra, "--algebra", cfg), "--algebra"), cfg.tol)
        if alg.ambient_dim != chan.codomain_dim:
            raise InputError(f"--algebra: ambient_dim {alg.ambient_dim} does not match the channel "
                             f"output dimension {chan.codomain_dim}")
    proj = None
    if cfg.projection is not None:
        obj = io.load_json(cfg.projection, "--projection")
        if isinstance(obj, dict):
            obj = obj.get("projection", obj.get("matrix"))
        proj = io.decode_matrix(obj, "--projection")
    return chan, alg, proj


def _private(cfg: RunConfig):
    chan, alg, proj = _load_inputs(cfg)
    rep = is_private(chan, alg, proj, cfg.tol)
    return _report(cfg, rep.verdict, rep.residual, rep.witness_index), rep.verdict


def _correctable(cfg: RunConfig):
    chan, alg, proj = _load_inputs(cfg)
    rep = is_correctable(chan, alg, proj, cfg.tol)
    out = _report(cfg, rep.verdict, rep.residual, rep.witness_index, rep.recovery,
                  achieved=rep.achieved_error)
    return out, rep.verdict


def _analyze(cfg: RunConfig):
    chan, alg, proj = _load_inputs(cfg)
    priv = is_private(chan, alg, proj, cfg.tol)
    corr = is_correctable(chan, alg, proj, cfg.tol)
    verdict = "both" if priv.verdict and corr.verdict else \
        "private" if priv.verdict else "correctable" if corr.verdict else "neither"
    out = _report(cfg, verdict, max(priv.residual, corr.residual) if verdict == "neither"
                  else min(priv.residual, corr.residual), None, corr.recovery,
                  achieved=corr.achieved_error,
                  private={"verdict": priv.verdict, "residual": _r(priv.residual),
                           "witness_index": priv.witness_index},
                  correctable={"verdict": corr.verdict, "residual": _r(corr.residual),
                               "witness_index": corr.witness_index})
    return out, True


def _complement(cfg: RunConfig):
    chan, _, _ = _load_inputs(cfg, need_algebra=False)
    triple = minimal_stinespring(chan, tol=cfg.tol)
    comp = complement(triple, cfg.tol)
    out = _base(cfg)
    out.update({"channel": io.encode_channel(comp), "dilation_dim": triple.H_dim,
                "multiplicities": list(triple.multiplicities)})
    return out, True


def _recovery(cfg: RunConfig):
    chan, alg, proj = _load_inputs(cfg)
    rep = is_correctable(chan, alg, proj, cfg.tol)
    if not rep.verdict:
        return _report(cfg, False, rep.residual, rep.witness_index), False
    out = _base(cfg)
    out.update({"channel": io.encode_channel(rep.recovery),
                "homomorphism": io.encode_channel(rep.homomorphism),
                "achieved": _r(rep.achieved_error)})
    return out, True


def _eps_bound(cfg: RunConfig):
    chan, alg, proj = _load_inputs(cfg)
    if cfg.t is None:
        raise InputError("eps-bound: --t is required")
    noise = depolarizing(chan.domain.ambient_dim) if cfg.noise is None else \
        io.decode_channel(io.load_json(cfg.noise, "--noise"), cfg.tol)
    rep = check_eps_bound(chan, noise, cfg.t, alg, proj, cfg.tol)
    out = _report(cfg, rep.holds, epsilon=rep.epsilon, achieved=rep.achieved, bound=rep.bound,
                  t=cfg.t, epsilon_gap=_r(rep.epsilon_gap), achieved_gap=_r(rep.achieved_gap))
    return out, rep.holds


def _symplectic(cfg: RunConfig):
    if cfg.target not in ("a2", "private"):
        raise InputError("symplectic: target must be 'a2' or 'private'")
    out = _base(cfg)
    if cfg.target == "private":
        desc = io.decode_descriptor(io.load_json(_need(cfg.channel, "--channel", cfg), "--channel"))
        sub = private_weyl_subalgebra(desc)
        out.update({"descriptor": io.encode_descriptor(desc), "private_subspace": _rmat(sub.basis),
                    "certificate": _r(sub.certificate), "verdict": sub.dim > 0})
        return out, True
    desc = a2_channel(cfg.n0)
    sub = private_weyl_subalgebra(desc)
    out.update({"N0": cfg.n0, "descriptor": io.encode_descriptor(desc),
                "private_subspace": _rmat(sub.basis), "dilation": _rmat(desc.dilation())})
    if not cfg.verify_recovery:
        return out, True
    check = purification_check(cfg.n0)
    rep = verify_a2_recovery(cfg.n0)
    rows = [{"x": r["x"], "image": [_r(v) for v in r["image"]],
             "coefficient": [_r(v) for v in r["coefficient"]], "deviation": _r(r["deviation"])}
            for r in rep.rows]
    out.update({"verdict": rep.passed, "coefficients": rows, "max_deviation": _r(rep.max_deviation),
                "purification": {k: ([_r(x) for x in v] if isinstance(v, list) else _r(v))
                                 for k, v in check.items()}})
    return out, rep.passed


def _gallery(cfg: RunConfig):
    if cfg.target not in gal.GALLERY_NAMES:
        raise InputError(f"gallery: name must be one of {', '.join(gal.GALLERY_NAMES)}")
    try:
        ent = gal.entry(cfg.target, seed=cfg.seed, **cfg.params)
    except ValueError as exc:
        raise InputError(f"gallery: {exc}") from exc
    out = _base(cfg)
    out.update({"name": ent.name, "expected": ent.expected, "channel": io.encode_channel(ent.channel),
                "algebra": io.encode_algebra(ent.algebra), "projection": io.encode_matrix(ent.projection)})
    return out, True


HANDLERS = {
    "analyze": _analyze, "complement": _complement, "check-private": _private,
    "check-correctable": _correctable, "recovery": _recovery, "eps-bound": _eps_bound,
    "symplectic": _symplectic, "gallery": _gallery,
}


def run(cfg: RunConfig) -> tuple[int, dict | None]:
    """Execute one command; returns ``(exit_code, report)``."""
    try:
        report, ok = HANDLERS[cfg.command](cfg)
    except (InputError, io.SchemaError, ChannelError, AlgebraError, PrivacyError,
            SymplecticError, ValueError) as exc:
        return 2, {"command": cfg.command, "seed": cfg.seed, "error": str(exc)}
    return (0 if ok else 1), report


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="privalg", description="Private and correctable subalgebras of channels.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--channel", help="channel JSON (or Weyl descriptor JSON for 'symplectic private')")
    common.add_argument("--algebra", help="algebra JSON for the subalgebra N")
    common.add_argument("--projection", help="JSON matrix for P (defaults to the unit of N)")
    common.add_argument("--seed", type=int, default=None, help="seed (falls back to PRIVALG_SEED, then 0)")
    common.add_argument("--out", help="write the report here instead of stdout")
    for name in ("rank", "membership", "eq", "sdp"):
        common.add_argument(f"--tol-{name}", type=float, default=None)
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("analyze", "complement", "check-private", "check-correctable", "recovery"):
        sub.add_parser(name, parents=[common])
    eps = sub.add_parser("eps-bound", parents=[common])
    eps.add_argument("--t", type=float, required=True, help="noise weight in (1-t)E + tG")
    eps.add_argument("--noise", help="noise channel G (default: completely depolarizing)")
    sym = sub.add_parser("symplectic", parents=[common])
    sym.add_argument("target", choices=("a2", "private"))
    sym.add_argument("--N0", dest="n0", type=float, default=0.0, help="thermal mean photon number")
    sym.add_argument("--verify-recovery", action="store_true")
    g = sub.add_parser("gallery", parents=[common])
    g.add_argument("name", help=", ".join(gal.GALLERY_NAMES))
    g.add_argument("--n", type=int, help="qubits for phase-flip / bit-flip")
    g.add_argument("--d", type=int, help="dimension for deletion")
    g.add_argument("--m", type=int, help="number of vectors for schur")
    g.add_argument("--group", help="z or quaternion for group-average")
    return p


def _seed(arg: int | None) -> int:
    if arg is not None:
        return arg
    env = os.environ.get("PRIVALG_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise InputError(f"PRIVALG_SEED must be an integer, got {env!r}") from None


def config_from_args(argv: list[str] | None = None) -> RunConfig:
    a = _parser().parse_args(argv)
    tol = DEFAULT_TOL.replace(rank_tol=a.tol_rank, membership_tol=a.tol_membership,
                              eq_tol=a.tol_eq, sdp_tol=a.tol_sdp)
    params = {}
    if a.command == "gallery":
        params = {k: getattr(a, k) for k in ("n", "d", "m", "group") if getattr(a, k) is not None}
    return RunConfig(command=a.command, channel=a.channel, algebra=a.algebra, projection=a.projection,
                     noise=getattr(a, "noise", None), t=getattr(a, "t", None), n0=getattr(a, "n0", 0.0),
                     verify_recovery=getattr(a, "verify_recovery", False),
                     target=getattr(a, "target", None) or getattr(a, "name", None),
                     params=params, seed=_seed(a.seed), tol=tol, out=a.out)


def main(argv: list[str] | None = None) -> int:
    try:
        cfg = config_from_args(argv)
    except (InputError, ValueError) as exc:
        print(f"privalg: {exc}", file=sys.stderr)
        return 2
    code, report = run(cfg)
    if code == 2:
        print(f"privalg: {report['error']}", file=sys.stderr)
    text = io.dump_json(report)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
