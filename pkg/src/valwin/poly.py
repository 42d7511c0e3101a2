"""Sparse multivariate polynomials over Q, with a small expression parser.

A monomial is an exponent tuple aligned with a generator name list; a
polynomial is a dict monomial -> nonzero Fraction.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ConfigError

Mono = tuple
Poly = dict


def mono_degree(m: Mono) -> int:
    return sum(m)


def mono_mul(a: Mono, b: Mono) -> Mono:
    return tuple(x + y for x, y in zip(a, b))


def mono_divides(a: Mono, b: Mono) -> bool:
    return all(x <= y for x, y in zip(a, b))


def mono_div(b: Mono, a: Mono) -> Mono:
    return tuple(y - x for x, y in zip(a, b))


def zero() -> Poly:
    return {}


def constant(c, nvars: int) -> Poly:
    c = Fraction(c)
    return {} if c == 0 else {(0,) * nvars: c}


def generator(i: int, nvars: int) -> Poly:
    m = [0] * nvars
    m[i] = 1
    return {tuple(m): Fraction(1)}


def padd(p: Poly, q: Poly) -> Poly:
    out = dict(p)
    for m, c in q.items():
        s = out.get(m, Fraction(0)) + c
        if s == 0:
            out.pop(m, None)
        else:
            out[m] = s
    return out


def pneg(p: Poly) -> Poly:
    return {m: -c for m, c in p.items()}


def psub(p: Poly, q: Poly) -> Poly:
    return padd(p, pneg(q))


def pscale(p: Poly, c) -> Poly:
    c = Fraction(c)
    if c == 0:
        return {}
    return {m: c * v for m, v in p.items()}


def pmul(p: Poly, q: Poly) -> Poly:
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = mono_mul(m1, m2)
            s = out.get(m, Fraction(0)) + c1 * c2
            if s == 0:
                out.pop(m, None)
            else:
                out[m] = s
    return out


def ppow(p: Poly, n: int, nvars: int) -> Poly:
    out = constant(1, nvars)
    for _ in range(n):
        out = pmul(out, p)
    return out


def pdegree(p: Poly):
    return max((mono_degree(m) for m in p), default=None)


def pmin_degree(p: Poly):
    return min((mono_degree(m) for m in p), default=None)


def drop_high_degree(p: Poly, cap: int) -> Poly:
    """Discard every monomial of total degree >= cap."""
    return {m: c for m, c in p.items() if mono_degree(m) < cap}


def mono_sort_key(m: Mono):
    # degree first; within a degree earlier generators dominate, so x^2
    # precedes x*y precedes y^2 for generator order (x, y)
    return (mono_degree(m), tuple(-e for e in m))


def sorted_monomials(p: Poly):
    return sorted(p, key=mono_sort_key)


def mono_string(m: Mono, names) -> str:
    parts = []
    for n, e in zip(names, m):
        if e == 1:
            parts.append(n)
        elif e > 1:
            parts.append(f"{n}^{e}")
    return "*".join(parts) if parts else "1"


def poly_string(p: Poly, names) -> str:
    if not p:
        return "0"
    chunks = []
    for m in sorted_monomials(p):
        c = p[m]
        ms = mono_string(m, names)
        if ms == "1":
            body = str(abs(c))
        elif abs(c) == 1:
            body = ms
        else:
            body = f"{abs(c)}*{ms}"
        if not chunks:
            chunks.append(body if c > 0 else f"-{body}")
        else:
            chunks.append(("+ " if c > 0 else "- ") + body)
    return " ".join(chunks)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(\d+|[A-Za-z_][A-Za-z_0-9]*|\^|\*|\+|-|/|\(|\))")


def _tokenize(s: str):
    out, pos = [], 0
    while pos < len(s):
        m = _TOKEN.match(s, pos)
        if not m:
            if s[pos:].strip():
                raise ConfigError(f"cannot tokenize {s[pos:]!r}")
            break
        out.append(m.group(1))
        pos = m.end()
    return out


class _Parser:
    """expr := term (('+'|'-') term)*; term := atom (('*'|'/') atom)* with
    implicit power '^'; atoms are names, integers and parenthesized exprs."""

    def __init__(self, tokens, names):
        self.toks = tokens
        self.pos = 0
        self.names = {n: i for i, n in enumerate(names)}
        self.nvars = len(names)

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self):
        t = self.peek()
        self.pos += 1
        return t

    def parse(self) -> Poly:
        p = self.expr()
        if self.peek() is not None:
            raise ConfigError(f"unexpected token {self.peek()!r}")
        return p

    def expr(self) -> Poly:
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take() == "-":
                sign = -sign
        p = pscale(self.term(), sign)
        while self.peek() in ("+", "-"):
            op = self.take()
            q = self.term()
            p = padd(p, q if op == "+" else pneg(q))
        return p

    def term(self) -> Poly:
        p = self.power()
        while self.peek() in ("*", "/"):
            op = self.take()
            q = self.power()
            if op == "*":
                p = pmul(p, q)
            else:
                if len(q) != 1 or mono_degree(next(iter(q))) != 0:
                    raise ConfigError("division only by a nonzero rational")
                p = pscale(p, 1 / next(iter(q.values())))
        return p

    def power(self) -> Poly:
        p = self.atom()
        while self.peek() == "^":
            self.take()
            e = self.take()
            if e is None or not e.isdigit():
                raise ConfigError("exponent must be a nonnegative integer")
            p = ppow(p, int(e), self.nvars)
        return p

    def atom(self) -> Poly:
        t = self.take()
        if t is None:
            raise ConfigError("unexpected end of expression")
        if t == "(":
            p = self.expr()
            if self.take() != ")":
                raise ConfigError("missing closing parenthesis")
            return p
        if t == "-":
            return pneg(self.atom())
        if t.isdigit():
            return constant(int(t), self.nvars)
        if t in self.names:
            return generator(self.names[t], self.nvars)
        raise ConfigError(f"unknown symbol {t!r}")


def parse_poly(s: str, names) -> Poly:
    """Parse an expression in the given generator names into a polynomial."""
    return _Parser(_tokenize(s), list(names)).parse()
