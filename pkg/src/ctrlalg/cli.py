"""ctrlalg command line.

Every command prints machine lines prefixed ``#!`` (key=value) followed by a
human-readable table.  Exit codes: 0 definite verdict, 2 indeterminate, 1 error.

Module expressions name catalog entries (``A``, ``R1``, ``MV35`` or ``MV(3,5)``),
presentations and subspaces of a ``--module`` file, direct sums ``A+C`` and
quadratic functors ``wedge2(X)``, ``hatsq(X)``, ``gamma(X)``, ``tensor2(X)``.
"""

from __future__ import annotations

import argparse
import re
import sys

from . import quiver as qv
from .ctrlmod import DEFAULT_WINDOWS, Presentation, direct_sum, gen_str, tensor_mod2
from .dsl import DSLError, Workspace, parse_file
from .homext import ext1_dim, hom_space
from .invariants import (NotSplit, Obstructed, Split, Vanishes, coH_obstruction,
                         cup_nonzero, finite_tau_split, moore_count, replay_finite_certificate,
                         replay_split_certificate, tau_bar_split)
from .nil2 import Nil2Group, from_decl as nil2_from_decl
from .quad import QuadFunctor, quad_fp
from .tree import Tree, parse_tree
from .window import window

DEFINITE, INDETERMINATE, ERROR = 0, 2, 1
FUNCTORS = {"wedge2": QuadFunctor.WEDGE2, "hatsq": QuadFunctor.HATSQ, "gamma": QuadFunctor.GAMMA,
            "tensor2": QuadFunctor.TENSOR2}


class CliError(ValueError):
    pass


# ---------------------------------------------------------------- name resolution


class Context:
    def __init__(self, args: argparse.Namespace) -> None:
        self.args = args
        self.ws = Workspace()
        if getattr(args, "module", None):
            self.ws = parse_file(args.module)
        tree = getattr(args, "tree", None)
        self.tree: Tree | None = parse_tree(tree) if tree else self.ws.tree()
        self.windows = args.window
        self.k = args.stab

    def need_tree(self) -> Tree:
        if self.tree is None:
            raise CliError("no tree: pass --tree Tn or a --module whose modules share one tree")
        return self.tree

    def subspace(self, text: str) -> qv.NSubspace | None:
        text = text.strip()
        if text.startswith("subspace"):
            return qv.NSubspace.parse(text)
        if text in self.ws.subspaces:
            return qv.from_decl(self.ws.subspaces[text])
        m = re.fullmatch(r"V\(?(\d),?(\d)\)?", text)
        if m:
            want = f"V({m.group(1)},{m.group(2)})"
            found = [V for V in qv.indecomposables(int(m.group(1))) if V.name == want]
            if found:
                return found[0]
        fx = qv.FIXTURES / f"{text}.calg"
        if fx.exists():
            ws = parse_file(fx)
            if text in ws.subspaces:
                return qv.from_decl(ws.subspaces[text])
        return None

    def module(self, text: str) -> Presentation:
        parts = _split_sum(text)
        if len(parts) > 1:
            return direct_sum([self.module(p) for p in parts], text.replace(" ", ""))
        t = parts[0]
        m = re.fullmatch(r"(\w+)\((.*)\)", t)
        if m and m.group(1) in FUNCTORS:
            P = self.module(m.group(2))
            F = FUNCTORS[m.group(1)]
            if F is QuadFunctor.HATSQ and P.ring.name != "F2":
                P = tensor_mod2(P)
            return quad_fp(F, P)
        if t in self.ws.presentations:
            return self.ws.presentations[t]
        V = self.subspace(t)
        if V is not None:
            return qv.m_functor(V, self.need_tree(), t)
        tag = _catalog_tag(t)
        try:
            return qv.catalog_entry(self.need_tree(), tag).presentation
        except KeyError:
            raise CliError(f"unknown module {t!r}: not a catalog entry over {self.tree}, "
                           f"nor declared in {self.args.module or 'any --module file'}") from None


def _split_sum(text: str) -> list[str]:
    out, depth, cur = [], 0, ""
    for ch in text.strip():
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "+" and depth == 0:
            out.append(cur.strip())
            cur = ""
        else:
            cur += ch
    out.append(cur.strip())
    if any(not p for p in out) or depth:
        raise CliError(f"malformed module expression {text!r}")
    return out


def _catalog_tag(t: str) -> str:
    m = re.fullmatch(r"MV\(?(\d),?(\d)\)?", t)
    return f"MV({m.group(1)},{m.group(2)})" if m else t


# ---------------------------------------------------------------- output


def emit(**kv) -> None:
    print("#! " + " ".join(f"{k}={v}" for k, v in kv.items()))


def emit_report(rep, key: str = "DIM") -> int:
    for N, d in rep.dims.items():
        emit(**{f"{key}@{N}": d})
    if rep.verdict == "Stable":
        emit(**{key: rep.value})
        code = DEFINITE
    elif rep.verdict == "Diverging":
        emit(VERDICT="DIVERGING")
        code = DEFINITE
    else:
        emit(VERDICT="INDETERMINATE")
        code = INDETERMINATE
    print(f"{key.lower()}: {rep}")
    return code


def _cert_text(cert) -> str:
    def one(x) -> str:
        if isinstance(x, tuple) and x and all(isinstance(y, tuple) for y in x):
            return "/".join(gen_str(y) for y in x)
        return str(x)

    return ";".join(one(c).replace(" ", "") for c in cert)


# ---------------------------------------------------------------- commands


def cmd_decompose(ctx: Context) -> int:
    a = ctx.args
    V = ctx.subspace(a.M) if a.M else None
    if V is not None and a.tree is None:
        parts = qv.decompose(V, a.seed)
        labels = [qv.label(p) or str(p) for p in parts]
        emit(SUMMANDS="+".join(sorted(labels)) or "0")
        for p, lab in zip(parts, labels):
            print(f"{lab}\t{p.dimvec}\t{p}")
        return DEFINITE
    P = ctx.module(a.M)
    if P.tree.n_ends > 3:
        raise CliError("classification commands support trees with at most 3 ends")
    d = qv.decompose_fp_module(P, ctx.windows, ctx.k)
    if d.summands is None:
        emit(VERDICT="INDETERMINATE", CANDIDATES=len(d.solutions))
        print(d.residual)
        for s in d.solutions:
            print("  " + " + ".join(t if m == 1 else f"{m}*{t}" for t, m in s.items()))
        return INDETERMINATE
    emit(SUMMANDS=str(d).replace(" ", ""))
    print(f"{P.name} = {d}")
    return DEFINITE


def _pair(ctx: Context):
    a = ctx.args
    VM, VN = ctx.subspace(a.M), ctx.subspace(a.N)
    if VM is not None and VN is not None and a.tree is None:
        return VM, VN, True
    return ctx.module(a.M), ctx.module(a.N), False


def cmd_hom(ctx: Context) -> int:
    M, N, finite = _pair(ctx)
    if finite:
        d = qv.hom_dim(M, N)
        emit(DIM=d)
        print(f"dim Hom = {d}")
        return DEFINITE
    return emit_report(hom_space(M, N, ctx.windows, ctx.args.ansatz, ctx.k))


def cmd_ext(ctx: Context) -> int:
    M, N, finite = _pair(ctx)
    if finite:
        d = qv.ext_dim(M, N)
        emit(DIM=d)
        print(f"dim Ext¹ = {d}")
        return DEFINITE
    return emit_report(ext1_dim(M, N, ctx.windows, ctx.args.ansatz, ctx.k))


def cmd_quad(ctx: Context) -> int:
    a = ctx.args
    F = FUNCTORS.get(a.functor)
    if F is None:
        raise CliError(f"unknown functor {a.functor!r}; expected one of {', '.join(FUNCTORS)}")
    Q = ctx.module(f"{a.functor}({a.M})")
    N = ctx.windows[-1]
    W = window(Q, N)
    emit(GENERATORS=len(W.gens), RELATIONS=len(W.rels), WINDOW=N)
    print(f"# {Q.name}, reduced window presentation at size {N}")
    for g in W.gens:
        print(f"gen {gen_str(g)} @{W.pos[g]}")
    for r, col in sorted(W.rels.items(), key=lambda rc: repr(rc[0])):
        print(f"rel {gen_str(r)} => {' + '.join(sorted(gen_str(g) for g in col))}")
    if Q.tree.n_ends <= 3:
        d = qv.decompose_fp_module(Q, ctx.windows, ctx.k)
        for key, v in sorted(d.fingerprint.entries.items(), key=repr):
            print(f"# fingerprint {'/'.join(key)} = {v}")
        if d.summands is None:
            emit(VERDICT="INDETERMINATE", CANDIDATES=len(d.solutions))
            return INDETERMINATE
        emit(SUMMANDS=str(d).replace(" ", ""))
    return DEFINITE


def cmd_cup(ctx: Context) -> int:
    P = ctx.module(ctx.args.M)
    v = cup_nonzero(P, ctx.windows)
    if v.value is None:
        emit(VERDICT="INDETERMINATE")
        print(v.decomposition.residual)
        return INDETERMINATE
    emit(VERDICT="NONZERO" if v.value else "ZERO")
    print(f"{P.name} = {v.decomposition}")
    return DEFINITE


def cmd_coh(ctx: Context) -> int:
    a = ctx.args
    ws = ctx.ws
    if a.fixture:
        ws = parse_file(qv.FIXTURES / f"{a.fixture}.calg")
    for need in (a.top, a.mid):
        if need not in ws.nil2:
            raise CliError(f"nil-2 lift {need!r} not declared")
    if a.H not in ws.presentations:
        raise CliError(f"presentation {a.H!r} not declared")
    top, mid = ws.nil2[a.top], ws.nil2[a.mid]
    S, M, T = Nil2Group(top.source), Nil2Group(top.target), Nil2Group(mid.target)
    got = coH_obstruction(nil2_from_decl(top, S, M), nil2_from_decl(mid, M, T), ws.presentations[a.H],
                          ctx.windows, a.ansatz)
    for N, s in got.trace.items():
        emit(**{f"STATUS@{N}": s})
    if isinstance(got, Vanishes):
        emit(VERDICT="VANISHES")
        return DEFINITE
    if isinstance(got, Obstructed):
        emit(VERDICT="OBSTRUCTED", CERT=len(got.certificate))
        print("certificate equations (relation, target generator):")
        for r, t in got.certificate:
            print(f"  {gen_str(r)}\t{gen_str(t)}")
        return DEFINITE
    emit(VERDICT="INDETERMINATE")
    return INDETERMINATE


def cmd_split_tau(ctx: Context) -> int:
    a = ctx.args
    V = ctx.subspace(a.fixture or a.M) if (a.fixture or a.M) else None
    if V is not None and a.tree is None:
        v = finite_tau_split(V)
        if isinstance(v, Split):
            emit(VERDICT="SPLIT")
            for p, img in v.witness.items():
                bits = "".join("1" if img >> j & 1 else "0" for j in range(V.dim0))
                print(f"s(e{p[0]}⊗̂e{p[1]}) = {bits}")
            return DEFINITE
        ok = replay_finite_certificate(V, v)
        emit(VERDICT="NOT_SPLIT", CERT=_cert_text(v.certificate), REPLAY="ok" if ok else "failed")
        return DEFINITE if ok else ERROR
    P = ctx.module(a.M)
    v = tau_bar_split(P, ctx.windows, a.ansatz)
    for N, s in v.trace.items():
        emit(**{f"STATUS@{N}": s})
    if isinstance(v, Split):
        emit(VERDICT="SPLIT", REPLAY=v.replayed)
        return DEFINITE
    if isinstance(v, NotSplit):
        ok = replay_split_certificate(P, v, a.ansatz)
        emit(VERDICT="NOT_SPLIT", CERT=_cert_text(v.certificate), REPLAY="ok" if ok else "failed")
        return DEFINITE if ok else ERROR
    emit(VERDICT="INDETERMINATE")
    return INDETERMINATE


def cmd_moore(ctx: Context) -> int:
    P = ctx.module(ctx.args.M)
    r = moore_count(P, ctx.windows, ctx.k)
    for N, d in r.dims.items():
        emit(**{f"DIM@{N}": d})
    if r.ext.verdict == "Stable":
        emit(DIM=r.ext.value, ORBITS=r.orbit_count if r.orbit_count is not None else "?")
    elif r.ext.verdict == "Diverging":
        emit(VERDICT="DIVERGING")
    else:
        emit(VERDICT="INDETERMINATE")
    print(f"Ext¹({P.name}, {P.name}): {r.ext}" + (f"; {r.note}" if r.note else ""))
    return DEFINITE if r.ext.definite else INDETERMINATE


def cmd_catalog(ctx: Context) -> int:
    tree = ctx.need_tree()
    cat = qv.elementary_catalog(tree)
    emit(TREE=tree, ENTRIES=len(cat))
    for e in cat:
        sub = f"\t{e.subspace}" if e.subspace is not None else ""
        print(f"{e.tag}\t{e.kind}\tbranch {e.branch}{sub}")
    return DEFINITE


def cmd_check(ctx: Context) -> int:
    from .ctrlmod import Verified, check_controlled

    if not ctx.args.module:
        raise CliError("check needs --module")
    bad = 0
    for name, h in ctx.ws.homs.items():
        for N in ctx.windows:
            v = check_controlled(h, N)
            if not isinstance(v, Verified):
                print(f"{name}: {v}")
                bad += 1
                break
    emit(MODULES=len(ctx.ws.modules), HOMS=len(ctx.ws.homs), PRESENTATIONS=len(ctx.ws.presentations),
         NIL2=len(ctx.ws.nil2), SUBSPACES=len(ctx.ws.subspaces), VIOLATIONS=bad)
    return DEFINITE if not bad else ERROR


COMMANDS = {"decompose": cmd_decompose, "hom": cmd_hom, "ext": cmd_ext, "quad": cmd_quad, "cup": cmd_cup,
            "coh": cmd_coh, "split-tau": cmd_split_tau, "moore": cmd_moore, "catalog": cmd_catalog,
            "check": cmd_check}


def _windows(text: str) -> tuple[int, ...]:
    try:
        ws = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad window list {text!r}") from None
    if not ws or any(w < 1 for w in ws) or list(ws) != sorted(set(ws)):
        raise argparse.ArgumentTypeError("windows must be increasing positive integers")
    return ws


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ctrlalg", description="Controlled algebra over trees.")
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--module", help="DSL file with modules, presentations, lifts or subspaces")
    p.add_argument("--tree", help="T1, T2, T3, ...")
    p.add_argument("--M", help="module expression")
    p.add_argument("--N", help="second module expression (hom, ext)")
    p.add_argument("--functor", default="wedge2", help="wedge2, hatsq, gamma or tensor2 (quad)")
    p.add_argument("--fixture", help="shipped fixture name (coh, split-tau)")
    p.add_argument("--top", default="dtop", help="nil-2 lift of the top differential (coh)")
    p.add_argument("--mid", default="dmid", help="nil-2 lift of the middle differential (coh)")
    p.add_argument("--H", default="H", help="presentation of H_n (coh)")
    p.add_argument("--window", type=_windows, default=DEFAULT_WINDOWS, help="window sizes, e.g. 16,32,64")
    p.add_argument("--stab", type=int, default=3, help="equal trailing windows required for Stable")
    p.add_argument("--ansatz", default=None, help="finite or periodic:p")
    p.add_argument("--seed", type=int, default=0, help="seed for subspace decomposition")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ctx = Context(args)
        if args.command in ("coh",) and args.window == DEFAULT_WINDOWS:
            ctx.windows = (16, 32, 64)
        return COMMANDS[args.command](ctx)
    except (CliError, DSLError, KeyError, ValueError, NotImplementedError, OSError) as e:
        print(f"ctrlalg: error: {e}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
