"""Text format for free controlled modules, homomorphisms, presentations,
nil-2 lifts and n-subspaces.

    module E over T1 ring F2 { root e0@v0; ray e(m) where m >= 1 branch 1 height m; }
    hom A : E -> E { at e0 => e(1); for e(m) if m >= 1 => e(m+1); witness h(m) = m; }
    present A = A;                 # cokernel of the hom A
    present R = free E;            # free module, no relations
    nil2 d : D -> C { for a(m) if m > 1 => a(m) + a(m) - a(m-1); witness h(m) = m - 1; }
    subspace W0 n=3 V0=1 arm1={} arm2={} arm3={};

Sums are written ``2*x(m+1) - y`` with integer coefficients; ``0`` is the empty
sum.  In nil-2 rules the summands are read left to right as a group word.
``#`` starts a comment.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .ctrlmod import (FamilyModule, GeneratorFamily, IncompleteRules, Presentation, Ring, Rule,
                      RuleHom, Term, Violated, Witness, check_controlled, free_presentation)
from .expr import Expr, ExprError
from .tree import Tree, parse_tree, parse_vertex


class DSLError(ValueError):
    def __init__(self, msg: str, line: int = 0, col: int = 0) -> None:
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+|\#[^\n]*) |
    (?P<nl>\n) |
    (?P<num>\d+) |
    (?P<id>[A-Za-z_][A-Za-z_0-9]*) |
    (?P<bits>\{[01 ]*\}) |
    (?P<op>->|=>|<=|>=|==|!=|&&|\|\||[{}();,:=@+\-*/%<>!])
""", re.VERBOSE)


@dataclass
class Tok:
    kind: str
    text: str
    line: int
    col: int


def tokenize(src: str) -> list[Tok]:
    out, line, start, i = [], 1, 0, 0
    while i < len(src):
        m = _TOKEN.match(src, i)
        if not m:
            raise DSLError(f"unexpected character {src[i]!r}", line, i - start + 1)
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            start = m.end()
        elif kind != "ws":
            out.append(Tok(kind, m.group(), line, i - start + 1))
        i = m.end()
    out.append(Tok("eof", "", line, i - start + 1))
    return out


@dataclass
class NSubspaceDecl:
    name: str
    n: int
    dim0: int
    arms: list[list[str]]  # column bitstrings per arm


@dataclass
class Nil2Rule:
    label: str
    vars: tuple[str, ...]
    guard: Expr
    word: list[Term]


@dataclass
class Nil2Decl:
    name: str
    source: FamilyModule
    target: FamilyModule
    rules: list[Nil2Rule]
    exceptions: dict
    witness: Witness


@dataclass
class Workspace:
    modules: dict[str, FamilyModule] = field(default_factory=dict)
    homs: dict[str, RuleHom] = field(default_factory=dict)
    presentations: dict[str, Presentation] = field(default_factory=dict)
    nil2: dict[str, Nil2Decl] = field(default_factory=dict)
    subspaces: dict[str, NSubspaceDecl] = field(default_factory=dict)
    order: list[tuple[str, str]] = field(default_factory=list)  # (kind, name) in source order
    free_presentations: set = field(default_factory=set)

    def tree(self) -> Tree | None:
        trees = {m.tree for m in self.modules.values()}
        return trees.pop() if len(trees) == 1 else None

    def names(self) -> set[str]:
        return set(self.modules) | set(self.homs) | set(self.presentations) | set(self.nil2) | set(self.subspaces)

    def merge(self, other: "Workspace") -> "Workspace":
        for kind, name in other.order:
            if name in self.names():
                raise DSLError(f"duplicate declaration {name!r}")
            getattr(self, _KIND_ATTR[kind])[name] = getattr(other, _KIND_ATTR[kind])[name]
            self.order.append((kind, name))
        self.free_presentations |= other.free_presentations
        return self


_KIND_ATTR = {"module": "modules", "hom": "homs", "present": "presentations", "nil2": "nil2",
              "subspace": "subspaces"}


class Parser:
    def __init__(self, src: str, check_window: int = 16, base: Workspace | None = None) -> None:
        self.toks = tokenize(src)
        self.i = 0
        self.ws = Workspace()
        self.base = base
        self.check_window = check_window

    # -- token helpers
    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def err(self, msg: str, tok: Tok | None = None) -> DSLError:
        t = tok or self.tok
        return DSLError(msg, t.line, t.col)

    def next(self) -> Tok:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            raise self.err(f"expected {text!r}, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def ident(self) -> Tok:
        if self.tok.kind != "id":
            raise self.err(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        return self.next()

    def number(self) -> int:
        if self.tok.kind != "num":
            raise self.err(f"expected integer, found {self.tok.text!r}")
        return int(self.next().text)

    def collect(self, stops: set[str]) -> tuple[str, Tok]:
        """Raw expression text up to a stop token at bracket depth 0."""
        start = self.tok
        depth, parts = 0, []
        while True:
            t = self.tok
            if t.kind == "eof":
                raise self.err("unexpected end of input in expression", start)
            if depth == 0 and t.text in stops:
                break
            if t.text == "(":
                depth += 1
            elif t.text == ")":
                if depth == 0:
                    break
                depth -= 1
            parts.append(t.text)
            self.next()
        if not parts:
            raise self.err("empty expression", start)
        return " ".join(parts), start

    def expr(self, names: tuple[str, ...], stops: set[str]) -> Expr:
        text, start = self.collect(stops)
        try:
            return Expr(text, names)
        except ExprError as e:
            raise self.err(str(e), start) from None

    def lookup(self, table: str, name: Tok):
        for ws in (self.ws, self.base):
            if ws is not None and name.text in getattr(ws, table):
                return getattr(ws, table)[name.text]
        raise self.err(f"undeclared {table[:-1]} {name.text!r}", name)

    # -- declarations
    def parse(self) -> Workspace:
        while self.tok.kind != "eof":
            kw = self.ident()
            handler = {"module": self.module, "hom": self.hom, "present": self.present,
                       "nil2": self.nil2, "subspace": self.subspace}.get(kw.text)
            if handler is None:
                raise self.err(f"unknown declaration {kw.text!r}", kw)
            handler()
        return self.ws

    def declare(self, kind: str, name: Tok, obj) -> None:
        taken = self.ws.names() | (self.base.names() if self.base else set())
        if name.text in taken:
            raise self.err(f"duplicate declaration {name.text!r}", name)
        getattr(self.ws, _KIND_ATTR[kind])[name.text] = obj
        self.ws.order.append((kind, name.text))

    def module(self) -> None:
        name = self.ident()
        self.expect("over")
        ttok = self.ident()
        try:
            tree = parse_tree(ttok.text)
        except ValueError as e:
            raise self.err(str(e), ttok) from None
        self.expect("ring")
        rtok = self.ident()
        if rtok.text not in ("Z", "F2"):
            raise self.err("ring must be Z or F2", rtok)
        ring = Ring.INT if rtok.text == "Z" else Ring.F2
        self.expect("{")
        fams, roots = [], []
        while self.tok.text != "}":
            kw = self.ident()
            if kw.text == "root":
                lab = self.ident().text
                self.expect("@")
                vt = self.ident()
                try:
                    roots.append((lab, parse_vertex(vt.text)))
                except ValueError as e:
                    raise self.err(str(e), vt) from None
            elif kw.text == "ray":
                lab = self.ident().text
                vars_: list[str] = []
                self.expect("(")
                while self.tok.text != ")":
                    vars_.append(self.ident().text)
                    if self.tok.text == ",":
                        self.next()
                self.expect(")")
                names = tuple(vars_)
                shape = Expr("1", names)
                if self.tok.text == "where":
                    self.next()
                    shape = self.expr(names, {"branch"})
                self.expect("branch")
                branch = self.number()
                self.expect("height")
                height = self.expr(names, {";"})
                fams.append(GeneratorFamily(lab, names, shape, branch, height))
            else:
                raise self.err(f"expected 'ray' or 'root', found {kw.text!r}", kw)
            self.expect(";")
        self.expect("}")
        try:
            mod = FamilyModule(name.text, ring, tree, fams, roots)
            mod.gens(self.check_window)
        except ValueError as e:
            raise self.err(str(e), name) from None
        self.declare("module", name, mod)

    def sum_terms(self, names: tuple[str, ...], stops: set[str]) -> list[Term]:
        terms: list[Term] = []
        if self.tok.text == "0":
            self.next()
            return terms
        sign = 1
        if self.tok.text == "-":
            sign = -1
            self.next()
        while True:
            coef = 1
            if self.tok.kind == "num":
                coef = self.number()
                self.expect("*")
            lab = self.ident().text
            args: list[Expr] = []
            if self.tok.text == "(":
                self.next()
                while self.tok.text != ")":
                    args.append(self.expr(names, {",", ")"}))
                    if self.tok.text == ",":
                        self.next()
                self.expect(")")
            terms.append(Term(sign * coef, lab, tuple(args)))
            if self.tok.text in ("+", "-"):
                sign = 1 if self.next().text == "+" else -1
                continue
            if self.tok.text in stops:
                return terms
            raise self.err(f"expected '+', '-' or ';', found {self.tok.text!r}")

    def hom_body(self, src: FamilyModule):
        rules, excs, witness = [], [], None
        self.expect("{")
        while self.tok.text != "}":
            kw = self.ident()
            if kw.text == "for":
                lab = self.ident()
                if lab.text not in src.families:
                    raise self.err(f"{src.name} has no generator family {lab.text!r}", lab)
                vars_: list[str] = []
                self.expect("(")
                while self.tok.text != ")":
                    vars_.append(self.ident().text)
                    if self.tok.text == ",":
                        self.next()
                self.expect(")")
                names = tuple(vars_)
                guard = Expr("1", names)
                if self.tok.text == "if":
                    self.next()
                    guard = self.expr(names, {"=>"})
                self.expect("=>")
                rules.append((lab.text, names, guard, self.sum_terms(names, {";"})))
            elif kw.text == "at":
                lab = self.ident()
                consts: list[int] = []
                if self.tok.text == "(":
                    self.next()
                    while self.tok.text != ")":
                        neg = self.tok.text == "-"
                        if neg:
                            self.next()
                        consts.append(-self.number() if neg else self.number())
                        if self.tok.text == ",":
                            self.next()
                    self.expect(")")
                g = (lab.text, *consts)
                if not src.contains(g):
                    raise self.err(f"{src.name} has no generator {lab.text}{tuple(consts) if consts else ''}", lab)
                self.expect("=>")
                excs.append((g, self.sum_terms((), {";"})))
            elif kw.text == "witness":
                self.expect("h")
                self.expect("(")
                self.expect("m")
                self.expect(")")
                self.expect("=")
                witness = Witness(self.expr(("m",), {";"}))
            else:
                raise self.err(f"expected 'for', 'at' or 'witness', found {kw.text!r}", kw)
            self.expect(";")
        self.expect("}")
        return rules, excs, witness

    @staticmethod
    def _resolve_exc(tgt: FamilyModule, terms: list[Term]) -> list[tuple[int, tuple]]:
        out = []
        for t in terms:
            g = (t.label, *(a() for a in t.args))
            if not tgt.contains(g):
                raise IncompleteRules(f"exception term {t.label} is not a generator of {tgt.name}")
            out.append((t.coef, g))
        return out

    def hom(self) -> None:
        name = self.ident()
        self.expect(":")
        src = self.lookup("modules", self.ident())
        self.expect("->")
        dst_tok = self.ident()
        dst = self.lookup("modules", dst_tok)
        body_tok = self.tok
        rules, excs, witness = self.hom_body(src)
        if witness is None:
            raise self.err(f"hom {name.text} declares no displacement witness", body_tok)
        try:
            h = RuleHom(src, dst, name.text,
                        [Rule(lab, names, guard, terms) for lab, names, guard, terms in rules],
                        {g: self._resolve_exc(dst, terms) for g, terms in excs}, witness)
            verdict = check_controlled(h, self.check_window)
        except (ValueError, IncompleteRules) as e:
            raise self.err(str(e), name) from None
        if isinstance(verdict, Violated):
            raise self.err(f"hom {name.text} violates its witness at {verdict.generator}: {verdict.reason}", name)
        self.declare("hom", name, h)

    def present(self) -> None:
        name = self.ident()
        self.expect("=")
        if self.tok.text == "free":
            self.next()
            mod = self.lookup("modules", self.ident())
            P = free_presentation(mod, name.text)
            self.ws.free_presentations.add(name.text)
        else:
            h = self.lookup("homs", self.ident())
            P = Presentation(h, name.text)
        self.expect(";")
        self.declare("present", name, P)

    def nil2(self) -> None:
        name = self.ident()
        self.expect(":")
        src = self.lookup("modules", self.ident())
        self.expect("->")
        dst = self.lookup("modules", self.ident())
        body_tok = self.tok
        rules, excs, witness = self.hom_body(src)
        if witness is None:
            raise self.err(f"nil2 {name.text} declares no displacement witness", body_tok)
        decl = Nil2Decl(name.text, src, dst, [Nil2Rule(*r) for r in rules],
                        {g: terms for g, terms in excs}, witness)
        self.declare("nil2", name, decl)

    def subspace(self) -> None:
        name = self.ident()
        n = dim0 = None
        arms: dict[int, list[str]] = {}
        while self.tok.text != ";":
            key = self.ident()
            self.expect("=")
            if key.text == "n":
                n = self.number()
            elif key.text == "V0":
                dim0 = self.number()
            elif key.text.startswith("arm") and key.text[3:].isdigit():
                if self.tok.kind != "bits":
                    raise self.err("arm columns are written as {bits bits ...}")
                arms[int(key.text[3:])] = self.next().text[1:-1].split()
            else:
                raise self.err(f"unknown subspace field {key.text!r}", key)
        self.expect(";")
        if n is None or dim0 is None:
            raise self.err("subspace needs n= and V0=", name)
        if set(arms) - set(range(1, n + 1)):
            raise self.err("arm index out of range", name)
        cols = [arms.get(i, []) for i in range(1, n + 1)]
        for c in cols:
            for b in c:
                if len(b) != dim0:
                    raise self.err(f"arm column {b} has length {len(b)} != V0={dim0}", name)
        self.declare("subspace", name, NSubspaceDecl(name.text, n, dim0, cols))


def parse(src: str, check_window: int = 16, base: Workspace | None = None) -> Workspace:
    return Parser(src, check_window, base).parse()


def parse_file(path, check_window: int = 16, base: Workspace | None = None) -> Workspace:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read(), check_window, base)


# ---------------------------------------------------------------- serialization


def _sum_text(terms: list[Term]) -> str:
    if not terms:
        return "0"
    out = []
    for k, t in enumerate(terms):
        c = t.coef
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        body = t.label + (f"({', '.join(a.text for a in t.args)})" if t.args else "")
        if mag != 1:
            body = f"{mag}*{body}"
        if k == 0:
            out.append(body if sign == "+" else f"- {body}")
        else:
            out.append(f"{sign} {body}")
    return " ".join(out)


def _gen_literal(g: tuple) -> str:
    return g[0] + (f"({', '.join(str(i) for i in g[1:])})" if len(g) > 1 else "")


def _exc_terms(pairs: list[tuple[int, tuple]]) -> list[Term]:
    return [Term(c, g[0], tuple(Expr(str(i), ()) for i in g[1:])) for c, g in pairs]


def serialize_module(m: FamilyModule) -> str:
    lines = [f"module {m.name} over {m.tree} ring {'Z' if m.ring is Ring.INT else 'F2'} {{"]
    for lab, v in m.roots.items():
        lines.append(f"  root {lab}@{v};")
    for f in m.families.values():
        lines.append(f"  ray {f.label}({', '.join(f.vars)}) where {f.shape.text} branch {f.branch} height {f.height.text};")
    lines.append("}")
    return "\n".join(lines)


def _body(rules, exceptions: dict, witness: Witness, exc_as_terms: bool) -> list[str]:
    lines = []
    for g, val in exceptions.items():
        terms = val if exc_as_terms else _exc_terms(val)
        lines.append(f"  at {_gen_literal(g)} => {_sum_text(terms)};")
    for r in rules:
        head = f"  for {r.label}({', '.join(r.vars)})"
        if r.guard.text != "1":
            head += f" if {r.guard.text}"
        terms = r.terms if isinstance(r, Rule) else r.word
        lines.append(f"{head} => {_sum_text(terms)};")
    lines.append(f"  witness h(m) = {witness.expr.text};")
    return lines


def serialize_hom(h: RuleHom) -> str:
    rules = [r for rs in h.rules.values() for r in rs]
    return "\n".join([f"hom {h.name} : {h.source.name} -> {h.target.name} {{"]
                     + _body(rules, h.exceptions, h.witness, False) + ["}"])


def serialize(ws: Workspace) -> str:
    out = []
    for kind, name in ws.order:
        if kind == "module":
            out.append(serialize_module(ws.modules[name]))
        elif kind == "hom":
            out.append(serialize_hom(ws.homs[name]))
        elif kind == "present":
            P = ws.presentations[name]
            if name in ws.free_presentations:
                out.append(f"present {name} = free {P.P0.name};")
            else:
                out.append(f"present {name} = {P.relations.name};")
        elif kind == "nil2":
            d = ws.nil2[name]
            out.append("\n".join([f"nil2 {name} : {d.source.name} -> {d.target.name} {{"]
                                 + _body(d.rules, d.exceptions, d.witness, True) + ["}"]))
        elif kind == "subspace":
            s = ws.subspaces[name]
            arms = " ".join(f"arm{i + 1}={{{' '.join(c)}}}" for i, c in enumerate(s.arms))
            out.append(f"subspace {name} n={s.n} V0={s.dim0} {arms};")
    return "\n\n".join(out) + ("\n" if out else "")
